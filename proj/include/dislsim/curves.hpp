#pragma once

// Bundled reference loops. Each exercises a distinct regime: the circle has
// constant curvature, the ellipse varying curvature, the stadium genuinely
// vanishing curvature along its straight stretches, and the (3,2) knot-style
// loop is non-planar. All builders return arclength-resampled curves.

#include <cmath>
#include <random>
#include <vector>

#include "curve.hpp"

namespace dislsim {

inline ClosedCurve make_circle(double radius, int n, const Vec3& center = {}) {
    std::vector<Vec3> nodes(n);
    for (int i = 0; i < n; ++i) {
        const double t = two_pi() * i / n;
        nodes[i] = center + Vec3{radius * std::cos(t), radius * std::sin(t), 0.0};
    }
    return ClosedCurve(nodes);
}

inline ClosedCurve make_ellipse(double a, double b, int n) {
    std::vector<Vec3> nodes(n);
    for (int i = 0; i < n; ++i) {
        const double t = two_pi() * i / n;
        nodes[i] = {a * std::cos(t), b * std::sin(t), 0.0};
    }
    return resample_arclength(ClosedCurve(nodes), n);
}

/// Planar stadium-like loop built from a C^inf turning-angle profile: two
/// bump turns of pi joined by exactly straight stretches (curvature vanishes
/// identically there). straight and turn are the lengths of each piece.
inline ClosedCurve make_stadium(double straight, double turn, int n) {
    const int fine = 1 << 15;
    const double lambda = 2.0 * (straight + turn);
    // smoothed step: integral of the C^inf bump exp(-1/(t(1-t))) on (0,1)
    auto bump = [](double t) { return (t <= 0 || t >= 1) ? 0.0 : std::exp(-1.0 / (t * (1.0 - t))); };
    const int bn = 4096;
    std::vector<double> cdf(bn + 1, 0.0);
    for (int i = 1; i <= bn; ++i) {
        const double t0 = double(i - 1) / bn, t1 = double(i) / bn;
        cdf[i] = cdf[i - 1] + 0.5 * (bump(t0) + bump(t1)) / bn;
    }
    auto W = [&](double t) {
        if (t <= 0) return 0.0;
        if (t >= 1) return 1.0;
        const double u = t * bn;
        const int i = std::min(int(u), bn - 1);
        return (cdf[i] + (u - i) * (cdf[i + 1] - cdf[i])) / cdf[bn];
    };
    const double u1 = straight, u2 = 2.0 * straight + turn;  // turn onsets
    auto theta = [&](double u) { return pi() * (W((u - u1) / turn) + W((u - u2) / turn)); };
    // unit-speed integration of (cos theta, sin theta)
    std::vector<Vec3> path(fine + 1, Vec3{});
    for (int i = 1; i <= fine; ++i) {
        const double ua = lambda * (i - 1) / fine, ub = lambda * i / fine;
        const double um = 0.5 * (ua + ub);
        const double ta = theta(ua), tm = theta(um), tb = theta(ub);
        const Vec3 avg{(std::cos(ta) + 4.0 * std::cos(tm) + std::cos(tb)) / 6.0,
                       (std::sin(ta) + 4.0 * std::sin(tm) + std::sin(tb)) / 6.0, 0.0};
        path[i] = path[i - 1] + avg * (lambda / fine);
    }
    std::vector<Vec3> nodes(n);
    for (int i = 0; i < n; ++i) {
        const double u = double(i) / n * fine;
        const int j = std::min(int(u), fine - 1);
        nodes[i] = path[j] + (path[j + 1] - path[j]) * (u - j);
    }
    return resample_arclength(ClosedCurve(nodes), n);
}

/// Non-planar (3,2)-torus-knot-style smooth loop.
inline ClosedCurve make_torus_knot(double major, double minor, int n) {
    std::vector<Vec3> nodes(n);
    for (int i = 0; i < n; ++i) {
        const double t = two_pi() * i / n;
        const double w = major + minor * std::cos(3.0 * t);
        nodes[i] = {w * std::cos(2.0 * t), w * std::sin(2.0 * t), minor * std::sin(3.0 * t)};
    }
    return resample_arclength(ClosedCurve(nodes), n);
}

/// Circle with a seeded smooth low-mode perturbation (radial and vertical).
inline ClosedCurve make_perturbed_circle(double amplitude, int n, unsigned seed = 1) {
    std::mt19937_64 rng(seed);
    auto coeff = [&]() { return 2.0 * (double(rng() >> 11) * 0x1.0p-53) - 1.0; };
    double cr[4], cz[4], pr[4], pz[4];
    for (int m = 0; m < 4; ++m) {
        cr[m] = coeff();
        cz[m] = coeff();
        pr[m] = pi() * coeff();
        pz[m] = pi() * coeff();
    }
    std::vector<Vec3> nodes(n);
    for (int i = 0; i < n; ++i) {
        const double t = two_pi() * i / n;
        double dr = 0.0, dz = 0.0;
        for (int m = 0; m < 4; ++m) {
            dr += cr[m] * std::cos((m + 2) * t + pr[m]);
            dz += cz[m] * std::cos((m + 2) * t + pz[m]);
        }
        const double rho = 1.0 + amplitude * dr;
        nodes[i] = {rho * std::cos(t), rho * std::sin(t), amplitude * dz};
    }
    return resample_arclength(ClosedCurve(nodes), n);
}

}  // namespace dislsim
