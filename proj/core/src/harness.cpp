#include "acstokes/harness.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "acstokes/errors.hpp"

namespace acstokes {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

void format(std::ostream& os, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace

Config Config::from_stream(std::istream& is) {
    Config c;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "epsilon")
            c.epsilon = std::stod(val);
        else if (key == "eps_ladder")
            c.eps_ladder = parse_list(val);
        else if (key == "grid_n")
            c.grid_n = std::stoi(val);
        else if (key == "dt")
            c.dt = std::stod(val);
        else if (key == "t_final")
            c.t_final = std::stod(val);
        else if (key == "bc")
            c.bc = (val == "dirichlet") ? BoundaryMode::Dirichlet : BoundaryMode::Periodic;
        else if (key == "delta")
            c.delta = std::stod(val);
        else if (key == "output_every")
            c.output_every = std::stoi(val);
        else if (key == "seed_curve")
            c.seed_curve = val;
        else if (key == "modes")
            c.modes = std::stoi(val);
        else if (key == "sharp_grid_n")
            c.sharp_grid_n = std::stoi(val);
        else if (key == "order_c")
            c.order_c = std::stoi(val);
        else if (key == "order_v")
            c.order_v = std::stoi(val);
        else if (key == "q")
            c.q = std::stod(val);
        else
            throw ConfigError("unknown config key: " + key);
    }
    return c;
}

Config Config::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    return from_stream(is);
}

void Config::write(std::ostream& os) const {
    os << "epsilon=" << epsilon << "\n";
    os << "eps_ladder=";
    for (size_t i = 0; i < eps_ladder.size(); ++i) os << (i ? "," : "") << eps_ladder[i];
    os << "\n";
    os << "grid_n=" << grid_n << "\ndt=" << dt << "\nt_final=" << t_final << "\n";
    os << "bc=" << (bc == BoundaryMode::Periodic ? "periodic" : "dirichlet") << "\n";
    os << "delta=" << delta << "\noutput_every=" << output_every << "\n";
    os << "seed_curve=" << seed_curve << "\nmodes=" << modes << "\n";
    os << "sharp_grid_n=" << sharp_grid_n << "\norder_c=" << order_c << "\norder_v=" << order_v
       << "\nq=" << q << "\n";
}

ClosedCurve make_seed_curve(const std::string& spec, int modes) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "circle") {
        auto v = parse_list(args);
        if (v.size() != 3) throw ConfigError("circle seed needs cx,cy,R");
        return ClosedCurve::circle({v[0], v[1]}, v[2], 0.0, modes);
    }
    if (kind == "ellipse") {
        auto v = parse_list(args);
        if (v.size() != 4) throw ConfigError("ellipse seed needs cx,cy,a,b");
        return ClosedCurve::ellipse({v[0], v[1]}, v[2], v[3], 0.0, modes);
    }
    if (kind == "file") {
        std::ifstream is(args);
        if (!is) throw ConfigError("cannot open curve file: " + args);
        return ClosedCurve::load(is);
    }
    throw ConfigError("unknown seed curve kind: " + kind);
}

SnapshotNorms error_norms(const PhaseField& c_eps, const PhaseField& c_A,
                          const VelocityField& v_eps, const VelocityField& v_A,
                          const TubularChart& chart, double delta, double q) {
    if (!(c_eps.grid() == c_A.grid()) || !(v_eps.grid() == c_eps.grid()) ||
        !(v_A.grid() == c_eps.grid()))
        throw GridMismatch("error_norms: fields live on different grids");
    const Grid2D grid = c_eps.grid();
    const int n = grid.n;
    const double h = grid.h();

    PhaseField diff(grid, c_eps.bc());
    for (size_t k = 0; k < diff.data().size(); ++k)
        diff.data()[k] = c_eps.data()[k] - c_A.data()[k];

    SnapshotNorms out;
    double l2 = 0.0, vq = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double d0 = diff.at(i, j);
            l2 += d0 * d0;
            // the difference vanishes at the Dirichlet wall
            const double gx = (diff.ghosted(i + 1, j, 0.0) - diff.ghosted(i - 1, j, 0.0)) / (2 * h);
            const double gy = (diff.ghosted(i, j + 1, 0.0) - diff.ghosted(i, j - 1, 0.0)) / (2 * h);
            auto sd = chart.signed_distance(grid.center(i, j));
            const double ad = std::abs(sd.d);
            if (ad > delta) out.grad_ext_sq += (gx * gx + gy * gy) * h * h;
            if (ad < 2.0 * delta) {
                Vec2 nrm = chart.curve().normal(sd.s);
                const double gn = gx * nrm[0] + gy * nrm[1];
                const double g2 = gx * gx + gy * gy;
                out.grad_n_sq += gn * gn * h * h;
                out.grad_tau_sq += (g2 - gn * gn) * h * h;
                out.grad_tube_sq += g2 * h * h;
            }
            const double du = 0.5 * (v_eps.u_wrap(i, j) + v_eps.u_wrap(i + 1, j)) -
                              0.5 * (v_A.u_wrap(i, j) + v_A.u_wrap(i + 1, j));
            const double dv = 0.5 * (v_eps.v_wrap(i, j) + v_eps.v_wrap(i, j + 1)) -
                              0.5 * (v_A.v_wrap(i, j) + v_A.v_wrap(i, j + 1));
            vq += std::pow(std::hypot(du, dv), q);
        }
    out.c_l2 = std::sqrt(l2) * h;
    out.v_lq = std::pow(vq * h * h, 1.0 / q);
    return out;
}

W1Diagnostic w1_diagnostic(const PhaseField& c_eps, const PhaseField& c_A0,
                           const SurfaceField& h2, double eps, const TubularChart& chart,
                           const OptimalProfile& profile) {
    if (!(c_eps.grid() == c_A0.grid())) throw GridMismatch("w1_diagnostic: grid mismatch");
    const Grid2D grid = c_eps.grid();
    const int n = grid.n;
    const double h = grid.h();
    const double delta = chart.delta();

    auto dh2 = fourier::inverse(fourier::derivative(h2.coef()));
    const int m = h2.n_modes();
    auto interp = [&](const std::vector<double>& v, double s) {
        double t = (s - std::floor(s)) * m;
        int j = static_cast<int>(t);
        if (j >= m) j = 0;
        const double f = t - j;
        return v[j] * (1.0 - f) + v[(j + 1) % m] * f;
    };

    std::vector<double> Txx(grid.cells()), Txy(grid.cells()), Tyy(grid.cells());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            // P = grad c_A0 - g with g = -zeta theta' eps grad_tau h2
            const double px = (c_A0.ghosted(i + 1, j) - c_A0.ghosted(i - 1, j)) / (2 * h);
            const double py = (c_A0.ghosted(i, j + 1) - c_A0.ghosted(i, j - 1)) / (2 * h);
            const double qx = (c_eps.ghosted(i + 1, j) - c_eps.ghosted(i - 1, j)) / (2 * h) - px;
            const double qy = (c_eps.ghosted(i, j + 1) - c_eps.ghosted(i, j - 1)) / (2 * h) - py;
            Vec2 g{0.0, 0.0};
            auto sd = chart.signed_distance(grid.center(i, j));
            if (!sd.clamped && std::abs(sd.d) < 2.0 * delta) {
                const double z = cutoff(sd.d, delta);
                const double rho = sd.d / eps;  // h_eps enters through c_A0 itself
                Vec2 gs = chart.grad_S(sd.d, sd.s);
                const double dh = interp(dh2, sd.s);
                g = (-z * profile.dtheta_at(rho) * eps * dh) * gs;
            }
            const double Px = px - g[0], Py = py - g[1];
            Txx[grid.idx(i, j)] = 2.0 * Px * qx;
            Txy[grid.idx(i, j)] = Px * qy + Py * qx;
            Tyy[grid.idx(i, j)] = 2.0 * Py * qy;
        }
    FaceField F = tensor_face_divergence(grid, c_eps.bc(), Txx, Txy, Tyy, -eps);

    W1Diagnostic out;
    out.w1 = stokes_solve(grid, F, c_eps.bc());
    out.h1_norm_sq = out.w1.grad_norm_sq();
    const int ms = chart.curve().n_modes();
    out.trace = interface_trace(out.w1, chart.curve(), ms);
    out.normal_trace.resize(ms);
    for (int j = 0; j < ms; ++j)
        out.normal_trace[j] = dot(chart.curve().normal(static_cast<double>(j) / ms), out.trace[j]);
    return out;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat assemble_schrodinger(const PhaseField& c_A, double eps, const DoubleWell& well) {
    const Grid2D grid = c_A.grid();
    const int n = grid.n;
    const double h = grid.h();
    const bool per = c_A.bc() == BoundaryMode::Periodic;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(grid.cells() * 5);
    auto id = [&](int i, int j) {
        return static_cast<int>(grid.idx((i % n + n) % n, (j % n + n) % n));
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int c = id(i, j);
            const double pot = well.ddf(c_A.at(i, j)) / (eps * eps);
            trips.emplace_back(c, c, 4.0 / (h * h) + pot);
            const int nb[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
            for (auto& q : nb) {
                if (!per && (q[0] < 0 || q[0] >= n || q[1] < 0 || q[1] >= n)) continue;
                trips.emplace_back(c, id(q[0], q[1]), -1.0 / (h * h));
            }
        }
    SpMat A(static_cast<int>(grid.cells()), static_cast<int>(grid.cells()));
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

struct SparseLanczos {
    const SpMat* A;
    double shift;
    Eigen::SimplicialLDLT<SpMat> solver;

    explicit SparseLanczos(const SpMat& mat, double s) : A(&mat), shift(s) {
        SpMat shifted = *A;
        for (int k = 0; k < shifted.rows(); ++k) shifted.coeffRef(k, k) -= shift;
        solver.compute(shifted);
        if (solver.info() != Eigen::Success)
            throw NoConvergence("sparse factorization for the spectral sweep failed");
    }

    std::vector<double> smallest(int want, int krylov) const {
        const int n = static_cast<int>(A->rows());
        std::vector<Eigen::VectorXd> V;
        std::vector<double> alpha, beta;
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = std::sin(0.61 * (i + 1)) + 1e-3;
        v.normalize();
        V.push_back(v);
        for (int j = 0; j < krylov; ++j) {
            Eigen::VectorXd w = solver.solve(V[j]);
            const double a = w.dot(V[j]);
            alpha.push_back(a);
            w -= a * V[j];
            if (j > 0) w -= beta[j - 1] * V[j - 1];
            for (const auto& u : V) w -= w.dot(u) * u;
            const double b = w.norm();
            if (b < 1e-13) break;
            beta.push_back(b);
            w /= b;
            V.push_back(w);
        }
        const int mK = static_cast<int>(alpha.size());
        if (mK < want) throw NoConvergence("Lanczos breakdown in the spectral sweep");
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(mK, mK);
        for (int i = 0; i < mK; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < mK) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        std::vector<double> lam;
        // largest Ritz values of the inverse are the smallest of the operator
        for (int t = 0; t < want; ++t) {
            const double nu = es.eigenvalues()[mK - 1 - t];
            if (std::abs(nu) < 1e-300) throw NoConvergence("vanishing Ritz value");
            lam.push_back(shift + 1.0 / nu);
        }
        return lam;
    }
};

}  // namespace

std::vector<double> smallest_eigenvalues(const PhaseField& c_A, double eps,
                                         const DoubleWell& well, int k) {
    if (k < 1 || k > 10) throw ConfigError("smallest_eigenvalues: k must be in [1,10]");
    SpMat A = assemble_schrodinger(c_A, eps, well);
    double pot_min = 1e300;
    for (double v : c_A.data()) pot_min = std::min(pot_min, well.ddf(v) / (eps * eps));
    // first pass with a safe shift, second with a tight one
    SparseLanczos stage1(A, pot_min - 1.0);
    auto rough = stage1.smallest(k, std::max(50, 6 * k));
    const double gap = rough.size() > 1 ? std::max(rough[1] - rough[0], 1e-3) : 1.0;
    SparseLanczos stage2(A, rough[0] - 0.25 * gap);
    return stage2.smallest(k, std::max(40, 6 * k));
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& rows) {
    if (rows.size() < 3) throw InsufficientData("rate_fit needs at least 3 rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [eps, err] : rows) {
        if (!(eps > 0.0)) throw InsufficientData("rate_fit: eps must be positive and distinct");
        if (!(err > 0.0)) throw NonPositiveError("rate_fit: errors must be positive");
    }
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = i + 1; j < rows.size(); ++j)
            if (rows[i].first == rows[j].first)
                throw InsufficientData("rate_fit: eps values must be distinct");
    const double n = static_cast<double>(rows.size());
    for (auto& [eps, err] : rows) {
        const double x = std::log(eps), y = std::log(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    RateFit fit;
    fit.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.order * sx) / n;
    double res = 0.0;
    for (auto& [eps, err] : rows) {
        const double r = std::log(err) - (fit.intercept + fit.order * std::log(eps));
        res += r * r;
    }
    fit.residual = std::sqrt(res / n);
    return fit;
}

namespace {

double mean_radius_of(const ClosedCurve& c) {
    Vec2 ctr = c.centroid_of_samples();
    auto pts = c.sample(4 * c.n_modes());
    double acc = 0.0;
    for (auto& p : pts) acc += norm(p - ctr);
    return acc / pts.size();
}

}  // namespace

ConvergeReport run_converge(const Config& config, const std::string& out_dir) {
    const OptimalProfile profile = optimal_profile(DoubleWell::quartic());
    ConvergeReport report;

    for (double eps : config.eps_ladder) {
        LadderRow row;
        row.eps = eps;
        int grid_n = config.grid_n;
        if (grid_n == 0) {
            grid_n = 32;
            while (1.0 / grid_n > eps / 4.0) grid_n *= 2;
        }
        double dt = config.dt > 0.0 ? config.dt : 0.1 * eps * eps;
        const int steps =
            std::max(1, static_cast<int>(std::ceil(config.t_final / dt - 1e-9)));
        dt = config.t_final / steps;
        const int cadence =
            config.output_every > 0 ? config.output_every : std::max(1, steps / 5);
        row.grid_n = grid_n;
        row.dt = dt;

        ClosedCurve seed = make_seed_curve(config.seed_curve, config.modes);

        SharpOptions sopts;
        sopts.grid_n = config.sharp_grid_n;
        sopts.bc = config.bc;
        sopts.sigma = profile.sigma;
        sopts.dt = dt;
        sopts.t_final = config.t_final;
        sopts.n_samples = config.modes;
        sopts.output_every = cadence;
        SharpTrajectory traj = run_sharp(seed, sopts);

        ExpansionOptions eopts;
        eopts.coupling.grid_n = config.sharp_grid_n;
        eopts.coupling.bc = config.bc;
        eopts.coupling.field_every = config.order_v >= 1 ? cadence : 0;
        ExpansionBundle bundle = build_expansion(traj, profile, eopts);
        if (config.order_c >= 3) {
            SolveC3Options c3o;
            c3o.store_every = cadence;
            attach_c3(bundle, eps, c3o);
        }

        DiffuseOptions dopts;
        dopts.eps = eps;
        dopts.grid_n = grid_n;
        dopts.dt = dt;
        dopts.t_final = config.t_final;
        dopts.bc = config.bc;
        dopts.delta = config.delta;
        dopts.output_every = cadence;
        DiffuseRun run = run_diffuse(seed, dopts, profile);

        row.energy_start = run.ledger.front().energy;
        row.energy_end = run.ledger.back().energy;
        for (const auto& rec : run.ledger) row.max_abs_c = std::max(row.max_abs_c, rec.max_abs_c);

        Grid2D grid{grid_n};
        std::vector<double> t_list, ext_sq, tau_sq, n_sq, vq_list;
        for (size_t q = 0; q < run.snapshots.size(); ++q) {
            const double t = run.snapshot_times[q];
            const int step = bundle.step_of_time(t);
            TubularChart chart(traj.curves[step], config.delta);

            PhaseField cA =
                build_cA(bundle, step, eps, config.order_c, grid, config.bc, config.delta);
            ApproxVelocity vA =
                build_vA(bundle, step, eps, config.order_v, grid, config.bc, config.delta);

            SnapshotNorms norms = error_norms(run.snapshots[q], cA, run.velocity_snapshots[q],
                                              vA.v, chart, config.delta, config.q);
            row.sup_c_l2 = std::max(row.sup_c_l2, norms.c_l2);
            t_list.push_back(t);
            ext_sq.push_back(norms.grad_ext_sq);
            tau_sq.push_back(norms.grad_tau_sq);
            n_sq.push_back(norms.grad_n_sq);
            vq_list.push_back(norms.v_lq * norms.v_lq);

            auto fit = fit_circle(zero_level_points(run.snapshots[q]));
            const double r_sharp = mean_radius_of(traj.curves[step]);
            row.radius_error = std::max(row.radius_error, std::abs(fit.radius - r_sharp));
        }
        auto time_trapz = [&](const std::vector<double>& f) {
            double acc = 0.0;
            for (size_t i = 1; i < f.size(); ++i)
                acc += 0.5 * (f[i - 1] + f[i]) * (t_list[i] - t_list[i - 1]);
            return acc;
        };
        row.grad_exterior = std::sqrt(time_trapz(ext_sq));
        row.grad_tangential = std::sqrt(time_trapz(tau_sq));
        row.grad_normal_weighted = eps * std::sqrt(time_trapz(n_sq));
        row.velocity_error = std::sqrt(time_trapz(vq_list));
        report.rows.push_back(row);
    }

    if (report.rows.size() >= 3) {
        std::vector<std::pair<double, double>> comp, rad, vel;
        for (const auto& r : report.rows) {
            comp.push_back({r.eps, r.composite()});
            rad.push_back({r.eps, r.radius_error});
            vel.push_back({r.eps, r.velocity_error});
        }
        report.composite_fit = rate_fit(comp);
        report.radius_fit = rate_fit(rad);
        report.velocity_fit = rate_fit(vel);
        report.fits_valid = true;
    } else {
        std::cerr << "run_converge: fewer than 3 ladder points, skipping rate fits\n";
    }

    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream csv(out_dir + "/converge.csv", std::ios::binary);
        write_report_csv(csv, report);
        auto series = [&](const std::string& name, auto getter) {
            std::ofstream f(out_dir + "/" + name, std::ios::binary);
            for (const auto& r : report.rows) {
                format(f, r.eps);
                f << " ";
                format(f, getter(r));
                f << "\n";
            }
        };
        series("composite_vs_eps.dat", [](const LadderRow& r) { return r.composite(); });
        series("radius_vs_eps.dat", [](const LadderRow& r) { return r.radius_error; });
        series("velocity_vs_eps.dat", [](const LadderRow& r) { return r.velocity_error; });
    }
    return report;
}

void write_report_csv(std::ostream& os, const ConvergeReport& report) {
    os << "# acstokes-converge v1\n";
    os << "eps,grid_n,dt,sup_c_l2,grad_exterior,grad_tangential,grad_normal_weighted,composite,"
          "velocity_error,radius_error,energy_start,energy_end,max_abs_c\n";
    for (const auto& r : report.rows) {
        format(os, r.eps);
        os << "," << r.grid_n << ",";
        format(os, r.dt);
        for (double v : {r.sup_c_l2, r.grad_exterior, r.grad_tangential, r.grad_normal_weighted,
                         r.composite(), r.velocity_error, r.radius_error, r.energy_start,
                         r.energy_end, r.max_abs_c}) {
            os << ",";
            format(os, v);
        }
        os << "\n";
    }
    if (report.fits_valid) {
        os << "# fit composite order=";
        format(os, report.composite_fit.order);
        os << " radius order=";
        format(os, report.radius_fit.order);
        os << " velocity order=";
        format(os, report.velocity_fit.order);
        os << "\n";
    } else {
        os << "# fits skipped: ladder too short\n";
    }
}

}  // namespace acstokes
