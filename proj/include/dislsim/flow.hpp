#pragma once

// Time integration of the evolution laws:
//   csf         gamma_t = (|b|^2 / 4 pi) H
//   l2_pk       gamma_t = F^{PK,eps}
//   h1_pk       gamma_t = (1 - delta Lap)^{-1} F^{PK,eps}
//   h1_csf      gamma_t = (1 - delta Lap)^{-1} (|b|^2 / 4 pi) H
//   mobility_pk gamma_t = m(tau, b, F) with the regularized force for delta>0,
// with explicit Euler / classical RK4 stepping, optional arclength
// redistribution, and an embeddedness guard that halves dt when the tube
// radius would fall below 2 eps.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "correction.hpp"
#include "curve.hpp"
#include "energy.hpp"
#include "force.hpp"
#include "tridiag.hpp"

namespace dislsim {

enum class FlowLaw { csf, l2_pk, h1_pk, mobility_pk, h1_csf };

class StepRejection : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class FlowAbort : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Crystallographic mobility: edge segments move in the b-tau plane, screw
/// segments pick among the slip directions by a smooth maximal-dissipation
/// weight |<f,s_i>|^p; blend beta switches between the branches.
struct MobilityLaw {
    std::vector<Vec3> slip_directions;
    double p = 16.0;
    std::function<double(double)> blend;

    MobilityLaw(std::vector<Vec3> dirs, double p_ = 16.0,
                std::function<double(double)> blend_ = nullptr)
        : slip_directions(std::move(dirs)), p(p_), blend(std::move(blend_)) {
        if (!blend) blend = [](double z) { return sqr(std::cos(0.5 * pi() * z)); };
        if (p < 2.0) throw std::invalid_argument("MobilityLaw: need exponent p >= 2");
        if (slip_directions.empty())
            throw std::invalid_argument("MobilityLaw: need at least one slip direction");
        for (const Vec3& s : slip_directions)
            if (std::fabs(s.norm() - 1.0) > 1e-12)
                throw std::invalid_argument("MobilityLaw: slip directions must be unit vectors");
        if (std::fabs(blend(0.0) - 1.0) > 1e-12 || std::fabs(blend(1.0)) > 1e-12 ||
            std::fabs(blend(-1.0)) > 1e-12)
            throw std::invalid_argument("MobilityLaw: blend must satisfy beta(0)=1, beta(+-1)=0");
    }

    Vec3 apply(const Vec3& tau, const Vec3& b, const Vec3& f) const {
        const double bn = b.norm();
        const double z = std::clamp(dot(tau, b) / bn, -1.0, 1.0);
        const double beta = std::clamp(blend(z), 0.0, 1.0);
        Vec3 edge{};
        const Vec3 bt = b - tau * dot(b, tau);
        const double btn = bt.norm();
        if (btn > 1e-12 * bn) {
            const Vec3 bthat = bt / btn;
            edge = bthat * dot(bthat, f);
        }
        // smooth maximal-dissipation selection, rescaled to avoid overflow at
        // large p
        double qmax = 0.0;
        for (const Vec3& s : slip_directions) qmax = std::max(qmax, std::fabs(dot(f, s)));
        Vec3 screw{};
        if (qmax > 0.0) {
            double den = 0.0;
            for (const Vec3& s : slip_directions) {
                const double fs = dot(f, s);
                const double w = std::pow(std::fabs(fs) / qmax, p);
                screw += s * (w * fs);
                den += w;
            }
            screw = screw / den;
        }
        return edge * beta + screw * (1.0 - beta);
    }
};

struct FlowConfig {
    FlowLaw law = FlowLaw::csf;
    double eps = 1e-3;    // core radius (pk laws)
    double delta = 1e-2;  // dissipation parameter (h1 laws, regularized mobility)
    double dt = 1e-3;
    double t_end = 0.1;
    bool redistribution = true;
    bool rk4 = true;  // false: explicit Euler
    std::optional<MobilityLaw> mobility;
    int snapshot_stride = 1;
    bool record_energy = false;
    double energy_outer_radius = 0.0;  // 0: 4 diam

    void validate(const ClosedCurve& initial) const {
        if (!(dt > 0)) throw std::invalid_argument("FlowConfig: dt must be positive");
        const bool uses_eps = law != FlowLaw::csf && law != FlowLaw::h1_csf;
        if (uses_eps && !(eps < initial.reach()))
            throw std::invalid_argument("FlowConfig: eps must stay below the embeddedness radius");
        const bool uses_delta = law == FlowLaw::h1_pk || law == FlowLaw::h1_csf;
        if (uses_delta && !(delta > 0))
            throw std::invalid_argument("FlowConfig: h1 laws need delta > 0");
        if (law == FlowLaw::mobility_pk && !mobility)
            throw std::invalid_argument("FlowConfig: mobility law not supplied");
    }
};

struct FlowContext {
    BurgersVector b;
    const CorrectionField* correction = nullptr;  // null -> zero field
    QuadratureSpec quad;
};

/// (1 - delta d^2/ds^2) v = f on the arclength-resampled grid, solved
/// componentwise by the cyclic tridiagonal factorization.
inline std::vector<Vec3> curve_laplacian_solve(const ClosedCurve& curve,
                                               const std::vector<Vec3>& f, double delta) {
    const int n = curve.size();
    if (static_cast<int>(f.size()) != n)
        throw std::invalid_argument("curve_laplacian_solve: field size mismatch");
    if (!(delta > 0)) throw std::invalid_argument("curve_laplacian_solve: need delta > 0");
    if (!curve.is_unit_speed(1e-6))
        throw std::invalid_argument("curve_laplacian_solve: curve must be arclength-resampled");
    const double h = curve.length() / n;
    const double off = -delta / (h * h), dia = 1.0 + 2.0 * delta / (h * h);
    const std::vector<double> a(n, off), d(n, dia), c(n, off);
    std::vector<Vec3> out(n);
    std::vector<double> rhs(n);
    double fmax = 0.0;
    for (const Vec3& v : f) fmax = std::max(fmax, v.norm());
    for (int comp = 0; comp < 3; ++comp) {
        for (int i = 0; i < n; ++i) rhs[i] = f[i][comp];
        const std::vector<double> x = solve_cyclic_tridiagonal(a, d, c, rhs);
        for (int i = 0; i < n; ++i) out[i][comp] = x[i];
        // residual check of the discrete system
        for (int i = 0; i < n; ++i) {
            const double res =
                dia * x[i] + off * (x[(i + 1) % n] + x[(i + n - 1) % n]) - rhs[i];
            if (std::fabs(res) > 1e-12 * std::max(fmax, 1e-300))
                throw std::runtime_error("curve_laplacian_solve: residual above tolerance");
        }
    }
    return out;
}

/// Velocity field of the configured law at the curve nodes.
inline std::vector<Vec3> velocity(const ClosedCurve& curve, const FlowConfig& config,
                                  const FlowContext& ctx) {
    const int n = curve.size();
    const double lead = ctx.b.norm2() / (4.0 * pi());
    auto csf_field = [&]() {
        std::vector<Vec3> v(n);
        for (int i = 0; i < n; ++i) v[i] = curve.curvature_at(curve.param_of_node(i)) * lead;
        return v;
    };
    auto pk_field = [&]() {
        if (!(2.0 * config.eps < curve.reach()))
            throw StepRejection("velocity: embeddedness radius fell below 2 eps");
        const TubeChart chart = adapted_frame(curve);
        const ZeroCorrection zero;
        const CorrectionField& corr = ctx.correction ? *ctx.correction : zero;
        return pk_force(chart, ctx.b, config.eps, corr, ctx.quad).force;
    };
    switch (config.law) {
        case FlowLaw::csf:
            return csf_field();
        case FlowLaw::l2_pk:
            return pk_field();
        case FlowLaw::h1_csf:
            return curve_laplacian_solve(curve, csf_field(), config.delta);
        case FlowLaw::h1_pk:
            return curve_laplacian_solve(curve, pk_field(), config.delta);
        case FlowLaw::mobility_pk: {
            std::vector<Vec3> f = pk_field();
            if (config.delta > 0) f = curve_laplacian_solve(curve, f, config.delta);
            std::vector<Vec3> v(n);
            for (int i = 0; i < n; ++i)
                v[i] = config.mobility->apply(curve.tangent_at(curve.param_of_node(i)), ctx.b.b,
                                              f[i]);
            return v;
        }
    }
    throw std::logic_error("velocity: unknown law");
}

struct StepResult {
    ClosedCurve curve;
    double dt_used = 0.0;
    int halvings = 0;
    std::vector<Vec3> initial_velocity;  // stage-1 velocity, for diagnostics
};

/// One explicit step over an arbitrary velocity field, with redistribution
/// and the embeddedness-guarded dt halving.
inline StepResult step(const ClosedCurve& curve,
                       const std::function<std::vector<Vec3>(const ClosedCurve&)>& vel,
                       double dt, bool rk4, bool redistribution, double guard_radius) {
    const int n = curve.size();
    std::vector<Vec3> k1;
    try {
        k1 = vel(curve);
    } catch (const StepRejection& err) {
        // the current state already violates the guard; halving cannot help
        throw FlowAbort(std::string("step: velocity rejected at the current state: ") +
                        err.what());
    }
    auto displaced = [&](const std::vector<Vec3>& base, const std::vector<Vec3>& dir,
                         double h) {
        std::vector<Vec3> nodes(n);
        for (int i = 0; i < n; ++i) nodes[i] = base[i] + dir[i] * h;
        return ClosedCurve(nodes);
    };
    for (int halvings = 0; halvings <= 20; ++halvings, dt *= 0.5) {
        try {
            std::vector<Vec3> move(n);
            if (!rk4) {
                move = k1;
            } else {
                const std::vector<Vec3> k2 = vel(displaced(curve.nodes(), k1, 0.5 * dt));
                const std::vector<Vec3> k3 = vel(displaced(curve.nodes(), k2, 0.5 * dt));
                const std::vector<Vec3> k4 = vel(displaced(curve.nodes(), k3, dt));
                for (int i = 0; i < n; ++i)
                    move[i] = (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) / 6.0;
            }
            ClosedCurve next = displaced(curve.nodes(), move, dt);
            if (next.reach() < guard_radius)
                throw StepRejection("step: embeddedness radius fell below the guard");
            if (redistribution) next = resample_arclength(next, n);
            return {std::move(next), dt, halvings, k1};
        } catch (const StepRejection&) {
            // halve dt and retry
        } catch (const std::invalid_argument&) {
            // a stage curve degenerated (e.g. self-intersecting sample); retry smaller
        }
    }
    throw FlowAbort("step: dt underflow after 20 halvings (embeddedness guard)");
}

struct StepDiagnostics {
    double t = 0.0;
    double length = 0.0;
    double max_speed = 0.0;
    double min_reach = 0.0;
    double dissipation = 0.0;  // <v, v>_{L^2 + delta H^1} for h1 laws, else L^2
    double energy = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
    std::vector<double> times;           // snapshot timestamps
    std::vector<ClosedCurve> snapshots;  // time-ordered states
    std::vector<StepDiagnostics> diagnostics;
    bool aborted = false;
    std::string abort_reason;

    const ClosedCurve& final_curve() const { return snapshots.back(); }
};

inline Trajectory run_flow(const ClosedCurve& initial, const FlowConfig& config,
                           const FlowContext& ctx) {
    config.validate(initial);
    const bool uses_eps = config.law != FlowLaw::csf && config.law != FlowLaw::h1_csf;
    const double guard = uses_eps ? 2.0 * config.eps : 0.0;
    const bool h1 = config.law == FlowLaw::h1_pk || config.law == FlowLaw::h1_csf;
    auto vel = [&](const ClosedCurve& c) { return velocity(c, config, ctx); };

    Trajectory traj;
    ClosedCurve curve = resample_arclength(initial, initial.size());
    traj.times.push_back(0.0);
    traj.snapshots.push_back(curve);
    double t = 0.0;
    int steps = 0;
    while (t < config.t_end - 1e-12 * config.t_end) {
        const double dt = std::min(config.dt, config.t_end - t);
        std::vector<Vec3> step_velocity;
        try {
            StepResult r = step(curve, vel, dt, config.rk4, config.redistribution, guard);
            t += r.dt_used;
            curve = std::move(r.curve);
            step_velocity = std::move(r.initial_velocity);
        } catch (const FlowAbort& err) {
            traj.aborted = true;
            traj.abort_reason = err.what();
            break;
        }
        ++steps;

        StepDiagnostics d;
        d.t = t;
        d.length = curve.length();
        d.min_reach = curve.reach();
        const int n = curve.size();
        const double h = curve.length() / n;
        for (const Vec3& v : step_velocity) d.max_speed = std::max(d.max_speed, v.norm());
        for (int i = 0; i < n; ++i) {
            d.dissipation += step_velocity[i].norm2() * h;
            if (h1) {
                const Vec3 dv =
                    (step_velocity[(i + 1) % n] - step_velocity[(i + n - 1) % n]) / (2.0 * h);
                d.dissipation += config.delta * dv.norm2() * h;
            }
        }
        if (config.record_energy) {
            const double R = config.energy_outer_radius > 0 ? config.energy_outer_radius
                                                            : 4.0 * curve.diameter();
            const ZeroCorrection zero;
            const CorrectionField& corr = ctx.correction ? *ctx.correction : zero;
            d.energy = effective_energy(curve, ctx.b, config.eps, corr, ctx.quad, R);
        }
        traj.diagnostics.push_back(d);
        if (steps % std::max(1, config.snapshot_stride) == 0 ||
            t >= config.t_end - 1e-12 * config.t_end) {
            traj.times.push_back(t);
            traj.snapshots.push_back(curve);
        }
    }
    return traj;
}

/// Symmetric Hausdorff distance between curve traces at dense resolution.
inline double hausdorff_distance(const ClosedCurve& a, const ClosedCurve& b, int dense = 512) {
    std::vector<Vec3> pa(dense), pb(dense);
    for (int i = 0; i < dense; ++i) {
        pa[i] = a.point(two_pi() * i / dense);
        pb[i] = b.point(two_pi() * i / dense);
    }
    double worst = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const std::vector<Vec3>& from = pass ? pb : pa;
        const std::vector<Vec3>& to = pass ? pa : pb;
        for (const Vec3& p : from) {
            double best = 1e300;
            for (const Vec3& q : to) best = std::min(best, (p - q).norm2());
            worst = std::max(worst, best);
        }
    }
    return std::sqrt(worst);
}

}  // namespace dislsim
