#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "vec.hpp"

namespace dislsim {

struct GaussRule {
    std::vector<double> nodes;    // on (-1, 1)
    std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre rule of order n (standard Newton-on-Legendre construction).
inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n < 1 || n > 128) throw std::invalid_argument("gauss_legendre: order out of range");
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess
        double x = std::cos(pi() * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(r)).first->second;
}

/// Quadrature configuration shared by the line/tube/surface integrators.
/// Panel schemes around a near-singular point follow a dyadic grading: panel
/// lengths halve toward the singularity until they drop below
/// grading_factor * dist.
struct QuadratureSpec {
    int panel_order = 12;          // Gauss nodes per graded panel
    double grading_factor = 0.25;  // innermost panel length vs. distance to the curve
    double grading_ratio = 2.0;    // geometric grading ratio
    int theta_points = 32;         // uniform trapezoid points around the tube
    int radial_order = 10;         // Gauss nodes per radial (log-scale) panel
    double radial_panel_span = 1.5;  // radial panel width in log units
    int s_points = 64;             // rings along the curve for surfaces/tubes
    int mid_panels = 48, mid_order = 8;   // uniform composite rule, mid-range targets
    int far_panels = 8, far_order = 10;   // uniform composite rule, far targets
    int ball_costheta = 40, ball_phi = 80;  // angular orders of the far-field ball rule
    int ball_radial_panels = 24;            // radial panels across the far-field shell zone
    double tube_split_radius = 0.0;  // energy split radius rbar; 0 = reach/2
    double singularity_floor = 1e-12;  // times curve length; closer counts as on-curve
    bool estimate_error = false;   // report a refined-rule error estimate
};

/// Dyadic panel edges in (0, half]: {half, half/ratio, ...} down to the first
/// value <= factor*dist, always keeping at least one edge.
inline std::vector<double> graded_offsets(double half, double dist, double factor,
                                          double ratio) {
    std::vector<double> edges;
    double o = half;
    const double floor_len = std::max(factor * dist, half * 1e-14);
    edges.push_back(o);
    while (o > floor_len) {
        o /= ratio;
        edges.push_back(o);
    }
    return edges;  // descending; innermost panel is [0, edges.back()]
}

/// Fit y ~ c0 + c1*x by least squares, returning the slope c1.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares_slope: need matching arrays, size >= 2");
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace dislsim
