// dislsim: dislocation-loop strain, energy, force, and flow experiments.

#include <CLI11.hpp>

#include "dislsim/cli.hpp"

using namespace dislsim;

int main(int argc, char** argv) {
    CLI::App app{"dislocation loop simulator: singular strain fields, core-cutoff energies,\n"
                 "Peach-Koehler forces, and curve evolution under several flow laws"};
    app.set_config("--config", "", "key=value configuration file (flags override it)");
    app.require_subcommand(1);

    RunConfig cfg;
    std::vector<double> bvec = {0, 0, 1};
    std::vector<double> grid_n = {8, 8, 8};
    std::vector<double> grid_box = {-2, 2, -2, 2, -2, 2};

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--curve", cfg.curve,
                        "curve file or builtin (circle, ellipse, stadium, knot; e.g. "
                        "ellipse:a=2,b=1,n=96)");
        sub->add_option("--b", bvec, "Burgers vector components")->expected(3);
        sub->add_option("--seed", cfg.seed, "seed for randomized test functions");
        sub->add_option("--out", cfg.out, "output artifact path");
        sub->add_option("--write-curve", cfg.write_curve, "also write the resolved curve JSON");
        sub->add_option("--theta-points", cfg.quad.theta_points, "tube angle quadrature points");
        sub->add_option("--s-points", cfg.quad.s_points, "rings along the curve");
        sub->add_option("--panel-order", cfg.quad.panel_order, "Gauss nodes per graded panel");
        sub->add_option("--outer-radius", cfg.outer_radius, "energy truncation radius (0: auto)");
    };

    CLI::App* field = app.add_subcommand("field", "sample S on a grid, CSV x,y,z,S11..S33,dist");
    add_common(field);
    field->add_option("--grid-n", grid_n, "grid points per axis")->expected(3);
    field->add_option("--grid-box", grid_box, "xmin xmax ymin ymax zmin zmax")->expected(6);

    CLI::App* energy = app.add_subcommand("energy", "core energy sweep over eps");
    add_common(energy);
    energy->add_option("--eps-list", cfg.eps_list, "core radii");

    CLI::App* force = app.add_subcommand("force", "Peach-Koehler force dump at one eps");
    add_common(force);
    force->add_option("--eps", cfg.eps, "core radius");
    force->add_option("--alpha", cfg.alpha, "Hoelder exponent for the remainder seminorm");

    CLI::App* flow = app.add_subcommand("flow", "integrate a flow law, JSON trajectory");
    add_common(flow);
    flow->add_option("--law", cfg.flow_law, "csf | l2 | h1 | mobility | h1csf");
    flow->add_option("--eps", cfg.eps, "core radius");
    flow->add_option("--delta", cfg.delta, "H1 dissipation parameter");
    flow->add_option("--dt", cfg.dt, "time step");
    flow->add_option("--t-end", cfg.t_end, "final time");
    flow->add_flag("--euler", cfg.euler, "explicit Euler instead of RK4");
    flow->add_flag("--no-redistribution", cfg.no_redistribution,
                   "disable arclength resampling between steps");
    flow->add_option("--diag", cfg.diag_out, "per-step diagnostics CSV");

    CLI::App* converge = app.add_subcommand("converge", "convergence tables over eps");
    add_common(converge);
    converge->add_option("--mode", cfg.converge_mode, "energy | force | flow");
    converge->add_option("--eps-list", cfg.eps_list, "core radii");
    converge->add_option("--alpha", cfg.alpha, "Hoelder exponent (force mode)");
    converge->add_option("--law", cfg.flow_law, "flow mode: h1 compares h1_pk vs h1_csf");
    converge->add_option("--dt", cfg.dt, "flow mode: time step");
    converge->add_option("--t-end", cfg.t_end, "flow mode: comparison time");
    converge->add_option("--delta", cfg.delta, "flow mode: H1 dissipation parameter");

    CLI::App* spectral = app.add_subcommand("spectral", "periodic resolvent rate fit");
    spectral->add_option("--alpha", cfg.alpha, "Hoelder exponent of the test function");
    spectral->add_option("--deltas", cfg.spectral_deltas, "resolvent parameters");
    spectral->add_option("--n", cfg.spectral_n, "grid points");
    spectral->add_option("--seed", cfg.seed, "test function seed");
    spectral->add_option("--out", cfg.out, "output artifact path");

    CLI11_PARSE(app, argc, argv);

    cfg.b = {bvec[0], bvec[1], bvec[2]};
    cfg.grid.nx = int(grid_n[0]);
    cfg.grid.ny = int(grid_n[1]);
    cfg.grid.nz = int(grid_n[2]);
    cfg.grid.lo = {grid_box[0], grid_box[2], grid_box[4]};
    cfg.grid.hi = {grid_box[1], grid_box[3], grid_box[5]};
    for (CLI::App* sub : {field, energy, force, flow, converge, spectral})
        if (sub->parsed()) cfg.command = sub->get_name();

    return run_guarded(cfg);
}
