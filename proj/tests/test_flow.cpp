#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dislsim/curves.hpp"
#include "dislsim/flow.hpp"

using namespace dislsim;

namespace {
std::mt19937_64 rng(77);
double uni(double a, double b) { return a + (b - a) * (double(rng() >> 11) * 0x1.0p-53); }
Vec3 rand_vec(double amp) { return {uni(-amp, amp), uni(-amp, amp), uni(-amp, amp)}; }
}  // namespace

TEST_CASE("curve laplacian resolvent: constants, eigenfunctions, bounds", "[flow]") {
    const int n = 128;
    const ClosedCurve circle = make_circle(1.0, n);  // length 2 pi, unit speed
    const double delta = 0.05;

    // constants are reproduced exactly
    const std::vector<Vec3> cst(n, Vec3{0.3, -1.2, 0.5});
    const std::vector<Vec3> vc = curve_laplacian_solve(circle, cst, delta);
    for (const Vec3& v : vc) CHECK((v - cst[0]).norm() < 1e-13);

    // Laplacian eigenfunction sin(m s): v = f / (1 + delta m^2) up to O(h^2)
    for (int m : {1, 3, 7}) {
        std::vector<Vec3> f(n);
        for (int i = 0; i < n; ++i) f[i] = {std::sin(m * two_pi() * i / n), 0, 0};
        const std::vector<Vec3> v = curve_laplacian_solve(circle, f, delta);
        const double gain = 1.0 / (1.0 + delta * m * m);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::fabs(v[i].x - gain * f[i].x));
        CHECK(worst < 5e-4 * gain * (m * m));  // second-difference eigenvalue defect
    }

    // maximum principle and Hoelder bound on random fields
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<Vec3> f(n);
        for (int i = 0; i < n; ++i) f[i] = rand_vec(1.0);
        const std::vector<Vec3> v = curve_laplacian_solve(circle, f, uni(1e-4, 1.0));
        double fmax = 0.0, vmax = 0.0;
        for (int i = 0; i < n; ++i) {
            fmax = std::max(fmax, f[i].norm());
            vmax = std::max(vmax, v[i].norm());
        }
        CHECK(vmax <= fmax + 1e-12);
        // componentwise discrete Hoelder seminorm (alpha = 1/2)
        for (int comp = 0; comp < 3; ++comp) {
            double fh = 0.0, vh = 0.0;
            for (int i = 0; i < n; i += 7)
                for (int j = i + 1; j < n; j += 5) {
                    const double arc = std::min(two_pi() * (j - i) / n,
                                                two_pi() - two_pi() * (j - i) / n);
                    const double w = 1.0 / std::sqrt(arc);
                    fh = std::max(fh, std::fabs(f[i][comp] - f[j][comp]) * w);
                    vh = std::max(vh, std::fabs(v[i][comp] - v[j][comp]) * w);
                }
            CHECK(vh <= fh + 1e-10);
        }
    }
}

TEST_CASE("velocity: csf on circles, mobility branches", "[flow]") {
    const ClosedCurve circle = make_circle(2.0, 64);
    FlowConfig cfg;
    cfg.law = FlowLaw::csf;
    const FlowContext ctx{BurgersVector({0, 0, 1}), nullptr, {}};
    const std::vector<Vec3> v = velocity(circle, cfg, ctx);
    for (int i = 0; i < 64; ++i) {
        const Vec3 inward = -(circle.nodes()[i] / circle.nodes()[i].norm());
        CHECK((v[i] - inward * (1.0 / (4.0 * pi() * 2.0))).norm() < 1e-10);
    }
}

TEST_CASE("mobility: edge projection, screw limit, dissipation sign", "[flow]") {
    const std::vector<Vec3> dirs = {Vec3{1, 0, 0}, Vec3{0.6, 0.8, 0.0}, Vec3{0, 0, 1}};
    const MobilityLaw m(dirs, 16.0);

    // beta endpoints are enforced at construction
    CHECK_THROWS_AS(MobilityLaw(dirs, 16.0, [](double) { return 0.5; }), std::invalid_argument);
    CHECK_THROWS_AS(MobilityLaw({Vec3{2, 0, 0}}, 16.0), std::invalid_argument);
    CHECK_THROWS_AS(MobilityLaw(dirs, 1.0), std::invalid_argument);

    // pure edge (tau _|_ b): m = <b^tau, f> b^tau
    {
        const Vec3 tau{1, 0, 0}, b{0, 0, 2.0};
        const Vec3 f{0.4, -0.3, 0.9};
        const Vec3 bt{0, 0, 1};
        CHECK((m.apply(tau, b, f) - bt * dot(bt, f)).norm() < 1e-14);
    }
    // screw limit (tau || b), single dominant direction, large p
    {
        const MobilityLaw mp(dirs, 64.0);
        const Vec3 tau{0, 0, 1}, b{0, 0, 1.5};
        const Vec3 f = Vec3{1, 0, 0} * 1.1 + Vec3{0.6, 0.8, 0} * 0.2;  // dominant s_1
        const Vec3 got = mp.apply(tau, b, f);
        const Vec3 want = Vec3{1, 0, 0} * dot(f, Vec3{1, 0, 0});
        CHECK((got - want).norm() < 0.01 * want.norm());
    }
    // nonnegative dissipation on random inputs
    for (int trial = 0; trial < 1000; ++trial) {
        Vec3 tau = rand_vec(1.0);
        while (tau.norm() < 0.1) tau = rand_vec(1.0);
        tau = tau / tau.norm();
        Vec3 b = rand_vec(2.0);
        while (b.norm() < 0.1) b = rand_vec(2.0);
        const Vec3 f = rand_vec(3.0);
        CHECK(dot(m.apply(tau, b, f), f) >= -1e-14);
    }
}

TEST_CASE("step: zero velocity leaves the curve unchanged", "[flow]") {
    const ClosedCurve circle = make_circle(1.0, 48);
    const auto zero_vel = [](const ClosedCurve& c) {
        return std::vector<Vec3>(c.size(), Vec3{});
    };
    const StepResult r = step(circle, zero_vel, 0.1, true, false, 0.0);
    for (int i = 0; i < 48; ++i) CHECK((r.curve.nodes()[i] - circle.nodes()[i]).norm() == 0.0);
}

TEST_CASE("step: dt underflow aborts with diagnostics", "[flow]") {
    const ClosedCurve circle = make_circle(1.0, 48);
    const auto zero_vel = [](const ClosedCurve& c) {
        return std::vector<Vec3>(c.size(), Vec3{});
    };
    // guard radius above the reach: every attempt is rejected
    CHECK_THROWS_AS(step(circle, zero_vel, 0.1, false, false, 5.0), FlowAbort);
}

TEST_CASE("circle shrinkage law under csf (RK4)", "[flow]") {
    const ClosedCurve circle = make_circle(1.0, 64);
    FlowConfig cfg;
    cfg.law = FlowLaw::csf;
    cfg.dt = 1e-3;
    cfg.rk4 = true;
    cfg.snapshot_stride = 500;
    const double b2 = 1.0;
    // rho^2 = 1 - (|b|^2 / 2 pi) t; run down to rho = 0.5
    cfg.t_end = 0.75 * two_pi() / b2 * 0.999;
    const FlowContext ctx{BurgersVector({0, 0, 1}), nullptr, {}};
    const Trajectory traj = run_flow(circle, cfg, ctx);
    REQUIRE_FALSE(traj.aborted);
    for (size_t k = 1; k < traj.snapshots.size(); ++k) {
        const double t = traj.times[k];
        const double want = std::sqrt(1.0 - b2 / two_pi() * t);
        const double got = traj.snapshots[k].length() / two_pi();
        CHECK(std::fabs(got - want) < 0.005 * want);
    }
    CHECK(traj.final_curve().length() / two_pi() < 0.51);
}

TEST_CASE("Euler and RK4 convergence orders via step halving", "[flow]") {
    const double T = 0.5;
    const double b2 = 1.0;
    const double exact = std::sqrt(1.0 - b2 / two_pi() * T);
    auto radius_err = [&](bool rk4, double dt) {
        FlowConfig cfg;
        cfg.law = FlowLaw::csf;
        cfg.dt = dt;
        cfg.rk4 = rk4;
        cfg.t_end = T;
        cfg.redistribution = false;  // pure integrator error
        cfg.snapshot_stride = 1 << 20;
        const FlowContext ctx{BurgersVector({0, 0, 1}), nullptr, {}};
        const Trajectory traj = run_flow(make_circle(1.0, 32), cfg, ctx);
        return std::fabs(traj.final_curve().length() / two_pi() - exact);
    };
    const double e1 = radius_err(false, 0.02), e2 = radius_err(false, 0.01);
    const double order_euler = std::log2(e1 / e2);
    CHECK(std::fabs(order_euler - 1.0) < 0.2);
    const double r1 = radius_err(true, 0.04), r2 = radius_err(true, 0.02);
    const double order_rk4 = std::log2(r1 / r2);
    CHECK(std::fabs(order_rk4 - 4.0) < 0.8);
}

TEST_CASE("h1_csf on the circle dissipates length", "[flow]") {
    FlowConfig cfg;
    cfg.law = FlowLaw::h1_csf;
    cfg.delta = 0.01;
    cfg.dt = 2e-3;
    cfg.t_end = 0.1;
    const FlowContext ctx{BurgersVector({0, 0, 1}), nullptr, {}};
    const Trajectory traj = run_flow(make_circle(1.0, 64), cfg, ctx);
    REQUIRE_FALSE(traj.aborted);
    for (size_t k = 0; k + 1 < traj.diagnostics.size(); ++k)
        CHECK(traj.diagnostics[k + 1].length < traj.diagnostics[k].length);
    for (const StepDiagnostics& d : traj.diagnostics) CHECK(d.dissipation > 0.0);
}

TEST_CASE("reparametrization neutrality of csf on the circle", "[flow]") {
    FlowConfig cfg;
    cfg.law = FlowLaw::csf;
    cfg.dt = 2e-3;
    cfg.t_end = 0.2;
    cfg.snapshot_stride = 1 << 20;
    const FlowContext ctx{BurgersVector({0, 0, 1}), nullptr, {}};
    cfg.redistribution = true;
    const Trajectory on = run_flow(make_circle(1.0, 48), cfg, ctx);
    cfg.redistribution = false;
    const Trajectory off = run_flow(make_circle(1.0, 48), cfg, ctx);
    CHECK(hausdorff_distance(on.final_curve(), off.final_curve()) < 10.0 * cfg.dt);
}

TEST_CASE("l2_pk trajectories approach csf as eps decreases", "[flow]") {
    FlowConfig base;
    base.dt = 2.5e-3;
    base.t_end = 0.05;
    base.snapshot_stride = 1 << 20;
    QuadratureSpec quad;
    quad.s_points = 48;
    quad.theta_points = 32;
    const FlowContext ctx{BurgersVector({0, 0, 1}), nullptr, quad};
    const ClosedCurve circle = make_circle(1.0, 48);

    FlowConfig csf = base;
    csf.law = FlowLaw::csf;
    const Trajectory ref = run_flow(circle, csf, ctx);

    double prev = 1e300;
    for (double eps : {1e-2, 1e-3}) {
        FlowConfig pk = base;
        pk.law = FlowLaw::l2_pk;
        pk.eps = eps;
        const Trajectory got = run_flow(circle, pk, ctx);
        REQUIRE_FALSE(got.aborted);
        const double dist = hausdorff_distance(ref.final_curve(), got.final_curve());
        CHECK(dist < prev);
        prev = dist;
    }
}

TEST_CASE("energy dissipates along h1_pk at resolved steps", "[flow]") {
    FlowConfig cfg;
    cfg.law = FlowLaw::h1_pk;
    cfg.eps = 1e-2;
    cfg.delta = 1e-2;
    cfg.dt = 5e-3;
    cfg.t_end = 0.02;
    cfg.record_energy = true;
    cfg.energy_outer_radius = 10.0;
    QuadratureSpec quad;
    quad.s_points = 48;
    quad.theta_points = 32;
    const FlowContext ctx{BurgersVector({0, 0, 1}), nullptr, quad};
    const Trajectory traj = run_flow(make_circle(1.0, 48), cfg, ctx);
    REQUIRE_FALSE(traj.aborted);
    for (size_t k = 0; k + 1 < traj.diagnostics.size(); ++k) {
        const StepDiagnostics& d0 = traj.diagnostics[k];
        const StepDiagnostics& d1 = traj.diagnostics[k + 1];
        const double slack = cfg.dt * cfg.dt * sqr(d0.max_speed) + 1e-10;
        CHECK(d1.energy <= d0.energy + slack);
    }
}
