#pragma once

// Periodic model problem (1 - delta Lap) u_t = Lap u on the circle and the
// resolvent (delta L + 1) u = f, L = -a u'' + b u'. The evolution is exact in
// Fourier space: every mode decays by exp(-n^2 t / (1 + delta n^2)), so the
// decay rate is capped at 1/delta and no regularity is gained. The resolvent
// uses the banded periodic (cyclic tridiagonal) discretization, which is an
// M-matrix: the discrete maximum principle and the translation-argument
// Hoelder bound hold exactly on the grid.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "quadrature.hpp"
#include "tridiag.hpp"
#include "vec.hpp"

namespace dislsim {

/// Truncated Fourier state u = sum a_n sin(nx) + b_n cos(nx), n <= M.
struct FourierState {
    std::vector<double> sin_coeffs;  // a_n, index n (a_0 unused)
    std::vector<double> cos_coeffs;  // b_n, index n
    double delta = 0.0;
    double time = 0.0;

    explicit FourierState(int max_mode = 512, double delta_ = 0.0)
        : sin_coeffs(max_mode + 1, 0.0), cos_coeffs(max_mode + 1, 0.0), delta(delta_) {}

    int max_mode() const { return static_cast<int>(sin_coeffs.size()) - 1; }

    double eval(double x) const {
        double f = cos_coeffs[0];
        for (int n = 1; n <= max_mode(); ++n)
            f += sin_coeffs[n] * std::sin(n * x) + cos_coeffs[n] * std::cos(n * x);
        return f;
    }
};

/// Advance the model flow by t: coefficients scale by exp(-n^2 t/(1+delta n^2)).
inline FourierState evolve_model(const FourierState& state, double t) {
    if (!(t >= 0)) throw std::invalid_argument("evolve_model: need t >= 0");
    FourierState out = state;
    out.time = state.time + t;
    for (int n = 0; n <= state.max_mode(); ++n) {
        const double rate = double(n) * n / (1.0 + state.delta * n * n);
        const double decay = std::exp(-rate * t);
        out.sin_coeffs[n] *= decay;
        out.cos_coeffs[n] *= decay;
    }
    return out;
}

/// Discrete H^k distance between the delta-evolution and the heat evolution
/// of state0 at time t, for each delta in the list.
inline std::vector<double> hk_convergence(const FourierState& state0,
                                          const std::vector<double>& delta_list, double t,
                                          int k) {
    std::vector<double> out;
    out.reserve(delta_list.size());
    for (double delta : delta_list) {
        double acc = 0.0;
        for (int n = 1; n <= state0.max_mode(); ++n) {
            const double gd = std::exp(-double(n) * n * t / (1.0 + delta * n * n));
            const double g0 = std::exp(-double(n) * n * t);
            const double w = std::pow(double(n), 2 * k) * sqr(gd - g0);
            acc += w * (sqr(state0.sin_coeffs[n]) + sqr(state0.cos_coeffs[n]));
        }
        out.push_back(std::sqrt(acc));
    }
    return out;
}

/// (delta L + 1) u = f on the periodic grid x_j = 2 pi j / n with
/// L = -a(x) u'' + b(x) u'. Constant coefficients by default; the drift is
/// upwinded so the system stays an M-matrix for every grid.
inline std::vector<double> resolvent_solve(const std::vector<double>& f, double delta,
                                           const std::vector<double>& a = {},
                                           const std::vector<double>& b = {}) {
    const int n = static_cast<int>(f.size());
    if (n < 8) throw std::invalid_argument("resolvent_solve: need at least 8 samples");
    if (!(delta > 0)) throw std::invalid_argument("resolvent_solve: need delta > 0");
    if (!a.empty() && static_cast<int>(a.size()) != n)
        throw std::invalid_argument("resolvent_solve: coefficient size mismatch");
    if (!b.empty() && static_cast<int>(b.size()) != n)
        throw std::invalid_argument("resolvent_solve: coefficient size mismatch");
    const double h = two_pi() / n;
    std::vector<double> lo(n), dia(n), up(n);
    for (int i = 0; i < n; ++i) {
        const double ai = a.empty() ? 1.0 : a[i];
        if (!(ai > 0)) throw std::invalid_argument("resolvent_solve: ellipticity violated");
        const double bi = b.empty() ? 0.0 : b[i];
        lo[i] = -delta * ai / (h * h);
        up[i] = -delta * ai / (h * h);
        dia[i] = 1.0 + 2.0 * delta * ai / (h * h);
        if (bi >= 0) {  // upwind: b u' ~ b (u_i - u_{i-1}) / h
            dia[i] += delta * bi / h;
            lo[i] -= delta * bi / h;
        } else {  // b u' ~ b (u_{i+1} - u_i) / h
            dia[i] -= delta * bi / h;
            up[i] += delta * bi / h;
        }
    }
    std::vector<double> u = solve_cyclic_tridiagonal(lo, dia, up, f);
    // residual of the discrete system
    double fmax = 1e-300;
    for (double v : f) fmax = std::max(fmax, std::fabs(v));
    for (int i = 0; i < n; ++i) {
        const double res =
            dia[i] * u[i] + lo[i] * u[(i + n - 1) % n] + up[i] * u[(i + 1) % n] - f[i];
        if (std::fabs(res) > 1e-10 * fmax)
            throw std::runtime_error("resolvent_solve: residual above tolerance");
    }
    return u;
}

/// Discrete C^{0,alpha} seminorm over all sample pairs with circular distance.
inline double holder_seminorm(const std::vector<double>& f, double alpha) {
    const int n = static_cast<int>(f.size());
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double arc = std::min(two_pi() * (j - i) / n, two_pi() * (n - (j - i)) / n);
            worst = std::max(worst, std::fabs(f[i] - f[j]) / std::pow(arc, alpha));
        }
    return worst;
}

/// Weierstrass-type lacunary sum with prescribed Hoelder exponent alpha:
/// genuinely C^{0,alpha} and no smoother, which is what makes the
/// delta^{alpha/2} resolvent rate visible.
inline std::vector<double> weierstrass_samples(int n, double alpha, int levels,
                                               unsigned seed = 1) {
    std::vector<double> phases(levels);
    unsigned long long state = seed * 6364136223846793005ULL + 1442695040888963407ULL;
    for (int j = 0; j < levels; ++j) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        phases[j] = two_pi() * (double(state >> 11) * 0x1.0p-53);
    }
    std::vector<double> f(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double x = two_pi() * i / n;
        for (int j = 0; j < levels; ++j)
            f[i] += std::pow(2.0, -alpha * j) * std::cos(std::pow(2.0, j) * x + phases[j]);
    }
    return f;
}

struct RateFitRow {
    double delta = 0.0;
    double sup_error = 0.0;  // |u_delta - f|_inf on the grid
};

/// Sup errors over a delta sweep plus the fitted log-log exponent.
inline std::vector<RateFitRow> resolvent_rate_table(const std::vector<double>& f,
                                                    const std::vector<double>& deltas,
                                                    double* fitted_exponent) {
    std::vector<RateFitRow> rows;
    std::vector<double> lx, ly;
    for (double delta : deltas) {
        const std::vector<double> u = resolvent_solve(f, delta);
        double err = 0.0;
        for (size_t i = 0; i < f.size(); ++i) err = std::max(err, std::fabs(u[i] - f[i]));
        rows.push_back({delta, err});
        lx.push_back(std::log(delta));
        ly.push_back(std::log(err));
    }
    if (fitted_exponent) *fitted_exponent = least_squares_slope(lx, ly);
    return rows;
}

}  // namespace dislsim
