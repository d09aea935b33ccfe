// Command-line front end: profile tabulation, sharp-interface runs, diffuse
// runs, approximate-solution dumps, spectral sweeps, convergence studies and
// the leading velocity-error diagnostic.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "acstokes/errors.hpp"
#include "acstokes/harness.hpp"

using namespace acstokes;

namespace {

Config load_config(const std::string& path) {
    if (path.empty()) return Config{};
    return Config::from_file(path);
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream os(dir + "/" + name, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file " + name);
    return os;
}

int cmd_profile(const std::string& config_path, const std::string& out) {
    (void)config_path;
    auto P = optimal_profile(DoubleWell::quartic());
    std::cout << "sigma = " << P.sigma << ", alpha = " << P.alpha << "\n";
    if (!out.empty()) {
        auto os = open_out(out, "profile.csv");
        P.write_csv(os);
        std::cout << "wrote " << out << "/profile.csv\n";
    }
    return 0;
}

int cmd_sharp(const std::string& config_path, const std::string& out) {
    Config cfg = load_config(config_path);
    auto P = optimal_profile(DoubleWell::quartic());
    SharpOptions opts;
    opts.grid_n = cfg.sharp_grid_n;
    opts.bc = cfg.bc;
    opts.sigma = P.sigma;
    opts.dt = cfg.dt > 0 ? cfg.dt : 1e-4;
    opts.t_final = cfg.t_final;
    opts.n_samples = cfg.modes;
    opts.output_every = cfg.output_every;
    auto traj = run_sharp(make_seed_curve(cfg.seed_curve, cfg.modes), opts);
    std::cout << "sharp run: " << traj.n_steps() << " steps, final length "
              << traj.curves.back().total_length() << "\n";
    if (!out.empty()) {
        // per-snapshot curve files and trace CSVs, plus the final state
        std::vector<int> dump_steps = traj.snapshot_steps;
        if (dump_steps.empty()) dump_steps.push_back(traj.n_steps() - 1);
        for (int step : dump_steps) {
            const std::string tag = "step" + std::to_string(step);
            {
                auto os = open_out(out, "traces_" + tag + ".csv");
                write_traces_csv(os, traj, step);
            }
            {
                auto os = open_out(out, "curve_" + tag + ".txt");
                traj.curves[step].save(os);
            }
        }
        std::cout << "wrote " << dump_steps.size() << " trace/curve snapshot pairs to " << out
                  << "\n";
    }
    return 0;
}

int cmd_diffuse(const std::string& config_path, const std::string& out) {
    Config cfg = load_config(config_path);
    auto P = optimal_profile(DoubleWell::quartic());
    DiffuseOptions opts;
    opts.eps = cfg.epsilon;
    opts.grid_n = cfg.grid_n;
    opts.dt = cfg.dt;
    opts.t_final = cfg.t_final;
    opts.bc = cfg.bc;
    opts.delta = cfg.delta;
    opts.output_every = cfg.output_every;
    auto run = run_diffuse(make_seed_curve(cfg.seed_curve, cfg.modes), opts, P);
    std::cout << "diffuse run: eps = " << opts.eps << ", grid " << run.snapshots[0].grid().n
              << "^2, dt = " << run.dt << "\n";
    std::cout << "energy " << run.ledger.front().energy << " -> " << run.ledger.back().energy
              << ", max|c| = " << run.ledger.back().max_abs_c << "\n";
    if (!out.empty()) {
        {
            auto os = open_out(out, "phase_final.bin");
            const auto& c = run.final_state.c;
            write_snapshot(os, "phase", c.grid(), c.bc(), run.final_state.time, c.data());
        }
        {
            auto os = open_out(out, "ledger.csv");
            os << "time,energy,dissipated,max_abs_c\n";
            os.precision(17);
            for (const auto& r : run.ledger)
                os << r.time << "," << r.energy << "," << r.dissipated << "," << r.max_abs_c
                   << "\n";
        }
        std::cout << "wrote " << out << "/phase_final.bin and ledger.csv\n";
    }
    return 0;
}

int cmd_approx(const std::string& config_path, const std::string& out, int order,
               const std::vector<double>& eps_list) {
    Config cfg = load_config(config_path);
    if (order >= 0) cfg.order_c = order;
    if (!eps_list.empty()) cfg.eps_ladder = eps_list;
    auto P = optimal_profile(DoubleWell::quartic());
    const double eps = cfg.eps_ladder.empty() ? cfg.epsilon : cfg.eps_ladder.front();

    SharpOptions sopts;
    sopts.grid_n = cfg.sharp_grid_n;
    sopts.bc = cfg.bc;
    sopts.sigma = P.sigma;
    sopts.dt = cfg.dt > 0 ? cfg.dt : 0.1 * eps * eps;
    sopts.t_final = cfg.t_final;
    sopts.n_samples = cfg.modes;
    sopts.output_every = 1;
    auto traj = run_sharp(make_seed_curve(cfg.seed_curve, cfg.modes), sopts);

    ExpansionOptions eopts;
    eopts.coupling.grid_n = cfg.sharp_grid_n;
    eopts.coupling.bc = cfg.bc;
    eopts.coupling.field_every = 1;
    auto bundle = build_expansion(traj, P, eopts);
    if (cfg.order_c >= 3) attach_c3(bundle, eps, {});

    int grid_n = cfg.grid_n;
    if (grid_n == 0) {
        grid_n = 32;
        while (1.0 / grid_n > eps / 4.0) grid_n *= 2;
    }
    Grid2D grid{grid_n};
    const int step = traj.n_steps() - 1;
    auto cA = build_cA(bundle, step, eps, cfg.order_c, grid, cfg.bc, cfg.delta);
    auto vA = build_vA(bundle, step, eps, cfg.order_v, grid, cfg.bc, cfg.delta);
    std::cout << "approx built at t = " << traj.times[step] << ", order_c = " << cfg.order_c
              << ", order_v = " << cfg.order_v << ", eps = " << eps
              << ", seam mismatch = " << vA.seam_mismatch << "\n";
    if (!out.empty()) {
        auto tag = "order" + std::to_string(cfg.order_c) + "_eps" + std::to_string(eps);
        {
            auto os = open_out(out, "cA_" + tag + ".bin");
            write_snapshot(os, "phase", grid, cfg.bc, traj.times[step], cA.data());
        }
        {
            auto os = open_out(out, "h1_ladder.csv");
            write_ladder_csv(os, bundle.h1);
        }
        {
            auto os = open_out(out, "h2_ladder.csv");
            write_ladder_csv(os, bundle.h2);
        }
        std::cout << "wrote " << out << "/cA_" << tag << ".bin, h1_ladder.csv, h2_ladder.csv\n";
    }
    return 0;
}

int cmd_spectral(const std::string& config_path, const std::string& out,
                 const std::vector<double>& eps_list) {
    Config cfg = load_config(config_path);
    // the eps = 0.1 ladder member needs a tube wider than eps
    if (config_path.empty()) {
        cfg.seed_curve = "circle:0.5,0.5,0.35";
        cfg.delta = 0.0;  // take the full geometric tube width
    }
    std::vector<double> ladder = eps_list.empty() ? std::vector<double>{0.1, 0.05, 0.025}
                                                  : eps_list;
    auto P = optimal_profile(DoubleWell::quartic());
    auto curve = make_seed_curve(cfg.seed_curve, cfg.modes);
    std::cout << "eps  lambda_1  lambda_2  lambda_3\n";
    std::ostringstream csv;
    csv << "eps,lambda1,lambda2,lambda3\n";
    for (double eps : ladder) {
        TubularChart chart(curve, cfg.delta);
        int n = 32;
        while (1.0 / n > eps / 4.0) n *= 2;
        Grid2D grid{n};
        auto cA = init_phase(chart, eps, P, grid, cfg.bc, chart.delta());
        auto lam = smallest_eigenvalues(cA, eps, P.well, 3);
        std::cout << eps << "  " << lam[0] << "  " << lam[1] << "  " << lam[2] << "\n";
        csv.precision(17);
        csv << eps << "," << lam[0] << "," << lam[1] << "," << lam[2] << "\n";
    }
    if (!out.empty()) {
        auto os = open_out(out, "spectral.csv");
        os << csv.str();
        std::cout << "wrote " << out << "/spectral.csv\n";
    }
    return 0;
}

int cmd_converge(const std::string& config_path, const std::string& out,
                 const std::vector<double>& eps_list, int order) {
    Config cfg = load_config(config_path);
    if (!eps_list.empty()) cfg.eps_ladder = eps_list;
    if (order >= 0) cfg.order_c = order;
    auto report = run_converge(cfg, out);
    write_report_csv(std::cout, report);
    if (report.fits_valid) {
        std::cout << "fitted orders: composite " << report.composite_fit.order << ", radius "
                  << report.radius_fit.order << ", velocity " << report.velocity_fit.order
                  << "\n";
    }
    return 0;
}

int cmd_w1(const std::string& config_path, const std::string& out) {
    Config cfg = load_config(config_path);
    auto P = optimal_profile(DoubleWell::quartic());
    const double eps = cfg.epsilon;

    DiffuseOptions dopts;
    dopts.eps = eps;
    dopts.grid_n = cfg.grid_n;
    dopts.dt = cfg.dt;
    dopts.t_final = cfg.t_final;
    dopts.bc = cfg.bc;
    dopts.delta = cfg.delta;
    auto seed = make_seed_curve(cfg.seed_curve, cfg.modes);
    auto run = run_diffuse(seed, dopts, P);

    SharpOptions sopts;
    sopts.grid_n = cfg.sharp_grid_n;
    sopts.bc = cfg.bc;
    sopts.sigma = P.sigma;
    sopts.dt = run.dt;
    sopts.t_final = cfg.t_final;
    sopts.n_samples = cfg.modes;
    sopts.output_every = 1;
    auto traj = run_sharp(seed, sopts);

    ExpansionOptions eopts;
    eopts.coupling.grid_n = cfg.sharp_grid_n;
    eopts.coupling.bc = cfg.bc;
    auto bundle = build_expansion(traj, P, eopts);

    const int step = traj.n_steps() - 1;
    Grid2D grid = run.final_state.c.grid();
    auto cA0 = build_cA(bundle, step, eps, 0, grid, cfg.bc, cfg.delta);
    TubularChart chart(traj.curves[step], cfg.delta);
    auto diag = w1_diagnostic(run.final_state.c, cA0, bundle.h2[step], eps, chart, P);
    std::cout << "w1 diagnostic at t = " << traj.times[step] << ": |w1|_inf = "
              << diag.w1.max_norm() << ", grad-norm^2 = " << diag.h1_norm_sq << "\n";
    if (!out.empty()) {
        auto os = open_out(out, "w1_trace.csv");
        os << "s,w1_n\n";
        os.precision(17);
        for (size_t j = 0; j < diag.normal_trace.size(); ++j)
            os << static_cast<double>(j) / diag.normal_trace.size() << "," << diag.normal_trace[j]
               << "\n";
        std::cout << "wrote " << out << "/w1_trace.csv\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stokes/Allen-Cahn sharp-interface laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int order = -1;
    std::vector<double> eps_list;
    app.add_option("--config", config_path, "key=value configuration file")->capture_default_str();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--order", order, "expansion order (0, 2 or 3)");
    app.add_option("--eps", eps_list, "epsilon ladder override")->delimiter(',');

    auto* profile = app.add_subcommand("profile", "tabulate the optimal profile");
    auto* sharp = app.add_subcommand("sharp", "front-tracking run of the limit system");
    auto* diffuse = app.add_subcommand("diffuse", "coupled Stokes/Allen-Cahn run");
    auto* approx = app.add_subcommand("approx", "assemble the approximate solutions");
    auto* spectral = app.add_subcommand("spectral", "spectral lower-bound sweep");
    auto* converge = app.add_subcommand("converge", "epsilon-ladder convergence study");
    auto* w1 = app.add_subcommand("w1", "leading velocity-error diagnostic");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (profile->parsed()) return cmd_profile(config_path, out_dir);
        if (sharp->parsed()) return cmd_sharp(config_path, out_dir);
        if (diffuse->parsed()) return cmd_diffuse(config_path, out_dir);
        if (approx->parsed()) return cmd_approx(config_path, out_dir, order, eps_list);
        if (spectral->parsed()) return cmd_spectral(config_path, out_dir, eps_list);
        if (converge->parsed()) return cmd_converge(config_path, out_dir, eps_list, order);
        if (w1->parsed()) return cmd_w1(config_path, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
