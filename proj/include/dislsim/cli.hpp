#pragma once

// Experiment orchestration behind the command line: field sampling, energy
// sweeps, force dumps, flow runs, convergence tables, and spectral rate fits.
// run() validates the configuration, writes the declared artifacts (each with
// a full config echo), prints a one-line summary, and maps failures to
// machine-readable exit codes.

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "energy.hpp"
#include "flow.hpp"
#include "force.hpp"
#include "io.hpp"
#include "spectral.hpp"
#include "strain.hpp"

namespace dislsim {

enum class ExitCode : int { ok = 0, invalid_input = 2, io_error = 3, numerical_error = 4 };

inline const char* exit_code_name(ExitCode c) {
    switch (c) {
        case ExitCode::ok: return "ok";
        case ExitCode::invalid_input: return "invalid-input";
        case ExitCode::io_error: return "io-error";
        case ExitCode::numerical_error: return "numerical-error";
    }
    return "unknown";
}

struct GridSpec {
    int nx = 8, ny = 8, nz = 8;
    Vec3 lo{-2, -2, -2}, hi{2, 2, 2};
};

struct RunConfig {
    std::string command;  // field | energy | force | flow | converge | spectral
    std::string curve = "circle";
    Vec3 b{0, 0, 1};
    double eps = 1e-3;
    std::vector<double> eps_list = {1e-2, 1e-3, 1e-4};
    double delta = 1e-2;
    double alpha = 0.5;
    unsigned seed = 1;
    QuadratureSpec quad;
    GridSpec grid;
    std::string out = "out.csv";
    std::string diag_out;         // optional per-step diagnostics CSV (flow)
    std::string write_curve;      // optional: persist the resolved curve
    std::string flow_law = "csf";  // csf | l2 | h1 | mobility | h1csf
    double dt = 1e-3;
    double t_end = 0.1;
    bool euler = false;
    bool no_redistribution = false;
    std::string converge_mode = "energy";  // energy | force | flow
    std::vector<double> spectral_deltas = {1e-1, 1e-2, 1e-3, 1e-4};
    int spectral_n = 4096;
    double outer_radius = 0.0;  // 0: 4 diam

    std::vector<std::pair<std::string, std::string>> echo() const {
        std::vector<std::pair<std::string, std::string>> e;
        e.emplace_back("command", command);
        e.emplace_back("curve", curve);
        e.emplace_back("b", format_double(b.x) + " " + format_double(b.y) + " " +
                                format_double(b.z));
        e.emplace_back("eps", format_double(eps));
        std::string el;
        for (double v : eps_list) el += format_double(v) + " ";
        e.emplace_back("eps_list", el);
        e.emplace_back("delta", format_double(delta));
        e.emplace_back("alpha", format_double(alpha));
        e.emplace_back("seed", std::to_string(seed));
        e.emplace_back("law", flow_law);
        e.emplace_back("dt", format_double(dt));
        e.emplace_back("t_end", format_double(t_end));
        e.emplace_back("integrator", euler ? "euler" : "rk4");
        e.emplace_back("redistribution", no_redistribution ? "off" : "on");
        e.emplace_back("mode", converge_mode);
        e.emplace_back("quad.panel_order", std::to_string(quad.panel_order));
        e.emplace_back("quad.theta_points", std::to_string(quad.theta_points));
        e.emplace_back("quad.s_points", std::to_string(quad.s_points));
        return e;
    }
};

namespace detail {

inline FlowLaw parse_law(const std::string& name) {
    if (name == "csf") return FlowLaw::csf;
    if (name == "l2" || name == "l2_pk") return FlowLaw::l2_pk;
    if (name == "h1" || name == "h1_pk") return FlowLaw::h1_pk;
    if (name == "mobility" || name == "mobility_pk") return FlowLaw::mobility_pk;
    if (name == "h1csf" || name == "h1_csf") return FlowLaw::h1_csf;
    throw std::invalid_argument("unknown flow law: " + name);
}

inline int run_field(const RunConfig& cfg) {
    const ClosedCurve curve = resolve_curve(cfg.curve);
    const BurgersVector b(cfg.b);
    const CurveRules rules(curve, cfg.quad);
    CsvWriter csv(cfg.out, cfg.echo(),
                  {"x", "y", "z", "S11", "S12", "S13", "S21", "S22", "S23", "S31", "S32", "S33",
                   "dist"});
    const GridSpec& g = cfg.grid;
    int written = 0, skipped = 0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            for (int k = 0; k < g.nz; ++k) {
                const Vec3 x{g.lo.x + (g.hi.x - g.lo.x) * (g.nx > 1 ? double(i) / (g.nx - 1) : 0.5),
                             g.lo.y + (g.hi.y - g.lo.y) * (g.ny > 1 ? double(j) / (g.ny - 1) : 0.5),
                             g.lo.z + (g.hi.z - g.lo.z) * (g.nz > 1 ? double(k) / (g.nz - 1) : 0.5)};
                try {
                    const StrainEval se = singular_strain(curve, b, x, cfg.quad, &rules);
                    std::vector<double> row{x.x, x.y, x.z};
                    for (int r = 0; r < 3; ++r)
                        for (int c = 0; c < 3; ++c) row.push_back(se.value(r, c));
                    row.push_back(se.dist);
                    csv.row(row);
                    ++written;
                } catch (const OnCurveError&) {
                    ++skipped;  // grid point on the curve: no finite value
                }
            }
    std::printf("field: %d samples written, %d on-curve points skipped -> %s\n", written,
                skipped, cfg.out.c_str());
    return 0;
}

inline int run_energy(const RunConfig& cfg) {
    const ClosedCurve curve = resolve_curve(cfg.curve);
    const BurgersVector b(cfg.b);
    const double R = cfg.outer_radius > 0 ? cfg.outer_radius : 4.0 * curve.diameter();
    CsvWriter csv(cfg.out, cfg.echo(),
                  {"eps", "total", "tube_part", "far_part", "asymptote", "renormalized",
                   "tail_bound"});
    double last_total = 0.0;
    for (double eps : cfg.eps_list) {
        const EnergyBreakdown e = core_energy(curve, b, eps, R, cfg.quad);
        csv.row({e.eps, e.total, e.tube_part, e.far_part, e.asymptote, e.renormalized,
                 e.tail_bound});
        last_total = e.total;
    }
    std::printf("energy: %zu eps values, last total %.6g -> %s\n", cfg.eps_list.size(),
                last_total, cfg.out.c_str());
    return 0;
}

inline int run_force(const RunConfig& cfg) {
    const ClosedCurve curve = resolve_curve(cfg.curve);
    const TubeChart chart = adapted_frame(curve);
    const BurgersVector b(cfg.b);
    const ZeroCorrection zero;
    const ForceField F = pk_force(chart, b, cfg.eps, zero, cfg.quad, cfg.alpha);
    CsvWriter csv(cfg.out, cfg.echo(),
                  {"s",   "Fx",  "Fy",  "Fz",  "t1x", "t1y", "t1z", "t2x", "t2y", "t2z",
                   "t3x", "t3y", "t3z", "leadx", "leady", "leadz", "remx", "remy", "remz"});
    for (size_t i = 0; i < F.s.size(); ++i) {
        csv.row({F.s[i], F.force[i].x, F.force[i].y, F.force[i].z, F.term1[i].x, F.term1[i].y,
                 F.term1[i].z, F.term2[i].x, F.term2[i].y, F.term2[i].z, F.term3[i].x,
                 F.term3[i].y, F.term3[i].z, F.leading[i].x, F.leading[i].y, F.leading[i].z,
                 F.remainder[i].x, F.remainder[i].y, F.remainder[i].z});
    }
    std::printf("force: eps=%g |remainder|_inf=%.6g holder(%.2g)=%.6g -> %s\n", cfg.eps,
                F.remainder_sup, cfg.alpha, F.remainder_holder, cfg.out.c_str());
    return 0;
}

inline int run_flow_cmd(const RunConfig& cfg) {
    const ClosedCurve curve = resolve_curve(cfg.curve);
    FlowConfig fc;
    fc.law = parse_law(cfg.flow_law);
    fc.eps = cfg.eps;
    fc.delta = cfg.delta;
    fc.dt = cfg.dt;
    fc.t_end = cfg.t_end;
    fc.rk4 = !cfg.euler;
    fc.redistribution = !cfg.no_redistribution;
    fc.snapshot_stride = std::max(1, int(cfg.t_end / cfg.dt / 64));
    if (fc.law == FlowLaw::mobility_pk)
        fc.mobility = MobilityLaw({Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}, 16.0);
    const FlowContext ctx{BurgersVector(cfg.b), nullptr, cfg.quad};
    const Trajectory traj = run_flow(curve, fc, ctx);

    nlohmann::json j;
    for (const auto& [k, v] : cfg.echo()) j["config"][k] = v;
    j["aborted"] = traj.aborted;
    if (traj.aborted) j["abort_reason"] = traj.abort_reason;
    j["snapshots"] = nlohmann::json::array();
    for (size_t k = 0; k < traj.snapshots.size(); ++k) {
        nlohmann::json snap;
        snap["t"] = traj.times[k];
        snap["nodes"] = nlohmann::json::array();
        for (const Vec3& p : traj.snapshots[k].nodes()) snap["nodes"].push_back({p.x, p.y, p.z});
        j["snapshots"].push_back(std::move(snap));
    }
    std::ofstream out(cfg.out);
    if (!out) throw IoError("cannot write artifact: " + cfg.out);
    out << j.dump(1) << "\n";

    if (!cfg.diag_out.empty()) {
        CsvWriter csv(cfg.diag_out, cfg.echo(),
                      {"t", "length", "max_speed", "min_reach", "dissipation", "energy"});
        for (const StepDiagnostics& d : traj.diagnostics)
            csv.row({d.t, d.length, d.max_speed, d.min_reach, d.dissipation, d.energy});
    }
    std::printf("flow: law=%s %zu snapshots, final length %.6g%s -> %s\n", cfg.flow_law.c_str(),
                traj.snapshots.size(), traj.final_curve().length(),
                traj.aborted ? " (aborted)" : "", cfg.out.c_str());
    return traj.aborted ? int(ExitCode::numerical_error) : 0;
}

inline int run_converge(const RunConfig& cfg) {
    const ClosedCurve curve = resolve_curve(cfg.curve);
    const BurgersVector b(cfg.b);
    if (cfg.converge_mode == "energy") {
        const double R = cfg.outer_radius > 0 ? cfg.outer_radius : 4.0 * curve.diameter();
        std::vector<double> logs, totals, rows;
        std::vector<EnergyBreakdown> es;
        for (double eps : cfg.eps_list) {
            es.push_back(core_energy(curve, b, eps, R, cfg.quad));
            logs.push_back(abs_log(eps));
            totals.push_back(es.back().total);
        }
        const double slope = least_squares_slope(logs, totals);
        CsvWriter csv(cfg.out, cfg.echo(),
                      {"eps", "total", "asymptote", "renormalized", "slope"});
        for (const EnergyBreakdown& e : es)
            csv.row({e.eps, e.total, e.asymptote, e.renormalized, slope});
        std::printf("converge energy: slope=%.6g (leading coefficient %.6g) -> %s\n", slope,
                    b.b.norm2() * curve.length() / (4.0 * pi()), cfg.out.c_str());
        return 0;
    }
    if (cfg.converge_mode == "force") {
        const TubeChart chart = adapted_frame(curve);
        const ZeroCorrection zero;
        CsvWriter csv(cfg.out, cfg.echo(), {"eps", "remainder_sup", "remainder_rel", "holder"});
        double lead = 0.0;
        for (const Vec3& H : curvature_vector(curve))
            lead = std::max(lead, H.norm() * b.norm2() / (4.0 * pi()));
        for (double eps : cfg.eps_list) {
            const ForceField F = pk_force(chart, b, eps, zero, cfg.quad, cfg.alpha);
            csv.row({eps, F.remainder_sup, F.remainder_sup / lead, F.remainder_holder});
        }
        std::printf("converge force: %zu eps values -> %s\n", cfg.eps_list.size(),
                    cfg.out.c_str());
        return 0;
    }
    if (cfg.converge_mode == "flow") {
        FlowConfig ref;
        ref.dt = cfg.dt;
        ref.t_end = cfg.t_end;
        ref.delta = cfg.delta;
        ref.snapshot_stride = 1 << 20;
        const bool h1 = cfg.flow_law == "h1" || cfg.flow_law == "h1_pk";
        ref.law = h1 ? FlowLaw::h1_csf : FlowLaw::csf;
        const FlowContext ctx{b, nullptr, cfg.quad};
        const Trajectory limit = run_flow(curve, ref, ctx);
        CsvWriter csv(cfg.out, cfg.echo(), {"eps", "sup_distance"});
        for (double eps : cfg.eps_list) {
            FlowConfig fc = ref;
            fc.law = h1 ? FlowLaw::h1_pk : FlowLaw::l2_pk;
            fc.eps = eps;
            const Trajectory got = run_flow(curve, fc, ctx);
            csv.row({eps, hausdorff_distance(limit.final_curve(), got.final_curve())});
        }
        std::printf("converge flow: %zu eps values -> %s\n", cfg.eps_list.size(),
                    cfg.out.c_str());
        return 0;
    }
    throw std::invalid_argument("unknown converge mode: " + cfg.converge_mode);
}

inline int run_spectral(const RunConfig& cfg) {
    const std::vector<double> f =
        weierstrass_samples(cfg.spectral_n, cfg.alpha, 11, cfg.seed);
    double exponent = 0.0;
    const std::vector<RateFitRow> rows =
        resolvent_rate_table(f, cfg.spectral_deltas, &exponent);
    CsvWriter csv(cfg.out, cfg.echo(), {"delta", "sup_error", "fitted_exponent"});
    for (const RateFitRow& r : rows) csv.row({r.delta, r.sup_error, exponent});
    std::printf("spectral: alpha=%g fitted exponent %.4f (predicted %.4f) -> %s\n", cfg.alpha,
                exponent, cfg.alpha / 2.0, cfg.out.c_str());
    return 0;
}

}  // namespace detail

/// Execute one experiment; throws on invalid configuration or I/O failure.
inline int run(const RunConfig& cfg) {
    if (!cfg.write_curve.empty()) write_curve_json(resolve_curve(cfg.curve), cfg.write_curve);
    if (cfg.command == "field") return detail::run_field(cfg);
    if (cfg.command == "energy") return detail::run_energy(cfg);
    if (cfg.command == "force") return detail::run_force(cfg);
    if (cfg.command == "flow") return detail::run_flow_cmd(cfg);
    if (cfg.command == "converge") return detail::run_converge(cfg);
    if (cfg.command == "spectral") return detail::run_spectral(cfg);
    throw std::invalid_argument("unknown command: " + cfg.command);
}

/// Exception-to-exit-code boundary used by the binary and by tests.
inline int run_guarded(const RunConfig& cfg) {
    try {
        return run(cfg);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error[%s]: %s\n", exit_code_name(ExitCode::io_error), e.what());
        return int(ExitCode::io_error);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error[%s]: %s\n", exit_code_name(ExitCode::invalid_input),
                     e.what());
        return int(ExitCode::invalid_input);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[%s]: %s\n", exit_code_name(ExitCode::numerical_error),
                     e.what());
        return int(ExitCode::numerical_error);
    }
}

}  // namespace dislsim
