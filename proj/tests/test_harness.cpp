#include <cmath>
#include <sstream>

#include "acstokes/errors.hpp"
#include "acstokes/harness.hpp"
#include "doctest.h"

using namespace acstokes;

namespace {
const OptimalProfile& default_profile() {
    static OptimalProfile P = optimal_profile(DoubleWell::quartic());
    return P;
}
}  // namespace

TEST_CASE("config round trip and seed curves") {
    std::stringstream ss;
    ss << "eps_ladder=0.1,0.05\n# comment\nt_final = 0.01\nbc=dirichlet\nseed_curve=ellipse:0.5,0.5,0.3,0.2\n";
    auto cfg = Config::from_stream(ss);
    CHECK(cfg.eps_ladder.size() == 2);
    CHECK(cfg.t_final == doctest::Approx(0.01));
    CHECK(cfg.bc == BoundaryMode::Dirichlet);
    auto curve = make_seed_curve(cfg.seed_curve, 64);
    CHECK(std::abs(curve.enclosed_area()) == doctest::Approx(M_PI * 0.3 * 0.2).epsilon(1e-10));

    std::stringstream bad;
    bad << "nonsense=1\n";
    CHECK_THROWS_AS(Config::from_stream(bad), ConfigError);
}

TEST_CASE("error norms: zero difference, synthetic scaling, splitting identity") {
    Grid2D grid{64};
    auto curve = ClosedCurve::circle({0.5, 0.5}, 0.3);
    TubularChart chart(curve, 0.1);
    PhaseField base(grid, BoundaryMode::Periodic);
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            Vec2 x = grid.center(i, j);
            base.at(i, j) = std::sin(2 * M_PI * x[0]) * std::cos(2 * M_PI * x[1]);
        }
    VelocityField vz(grid, BoundaryMode::Periodic);

    auto zero = error_norms(base, base, vz, vz, chart, 0.1, 1.5);
    CHECK(zero.c_l2 == 0.0);
    CHECK(zero.grad_ext_sq == 0.0);
    CHECK(zero.v_lq == 0.0);

    // u = eps^k phi: the fitted exponent of the L2 norm recovers k
    const double k_true = 2.0;
    std::vector<std::pair<double, double>> rows;
    for (double eps : {0.1, 0.05, 0.025}) {
        PhaseField pert = base;
        PhaseField cA(grid, BoundaryMode::Periodic);
        for (size_t q = 0; q < pert.data().size(); ++q)
            pert.data()[q] = cA.data()[q] + std::pow(eps, k_true) * base.data()[q];
        auto n = error_norms(pert, cA, vz, vz, chart, 0.1, 1.5);
        rows.push_back({eps, n.c_l2});
    }
    auto fit = rate_fit(rows);
    CHECK(std::abs(fit.order - k_true) <= 0.02);

    // orthogonal splitting inside the tube
    PhaseField cAzero(grid, BoundaryMode::Periodic);
    auto n = error_norms(base, cAzero, vz, vz, chart, 0.1, 1.5);
    CHECK(n.grad_tau_sq + n.grad_n_sq ==
          doctest::Approx(n.grad_tube_sq).epsilon(1e-10));
}

TEST_CASE("norms agree with a slow direct-summation reference on a smoke grid") {
    Grid2D grid{32};
    auto curve = ClosedCurve::circle({0.5, 0.5}, 0.3);
    TubularChart chart(curve, 0.1);
    PhaseField a(grid, BoundaryMode::Periodic), b(grid, BoundaryMode::Periodic);
    VelocityField va(grid, BoundaryMode::Periodic), vb(grid, BoundaryMode::Periodic);
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            Vec2 x = grid.center(i, j);
            a.at(i, j) = std::tanh(10.0 * (std::hypot(x[0] - 0.5, x[1] - 0.5) - 0.3));
            b.at(i, j) = 0.7 * a.at(i, j);
            va.u(i, j) = std::sin(2 * M_PI * x[1]);
            vb.v(i, j) = std::cos(2 * M_PI * x[0]);
        }
    auto n = error_norms(a, b, va, vb, chart, 0.1, 1.5);

    // reference: naive loops, independent formulas
    const double h = grid.h();
    double l2 = 0.0, vq = 0.0;
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            const double d = a.at(i, j) - b.at(i, j);
            l2 += d * d * h * h;
            const int ip = (i + 1) % grid.n;
            const int jp = (j + 1) % grid.n;
            const double du = 0.5 * (va.u(i, j) + va.u(ip, j)) - 0.5 * (vb.u(i, j) + vb.u(ip, j));
            const double dv = 0.5 * (va.v(i, j) + va.v(i, jp)) - 0.5 * (vb.v(i, j) + vb.v(i, jp));
            vq += std::pow(std::sqrt(du * du + dv * dv), 1.5) * h * h;
        }
    CHECK(n.c_l2 == doctest::Approx(std::sqrt(l2)).epsilon(1e-12));
    CHECK(n.v_lq == doctest::Approx(std::pow(vq, 1.0 / 1.5)).epsilon(1e-12));
}

TEST_CASE("w1 diagnostic: zero difference gives zero, the g-term is a small correction") {
    const auto& P = default_profile();
    Grid2D grid{96};
    auto curve = ClosedCurve::circle({0.5, 0.5}, 0.3);
    TubularChart chart(curve, 0.1);
    const double eps = 0.06;
    auto c0 = init_phase(chart, eps, P, grid, BoundaryMode::Periodic, 0.1);

    SurfaceField h2(64);
    {
        std::vector<double> v(64);
        for (int j = 0; j < 64; ++j) v[j] = 0.4 * std::sin(2.0 * M_PI * j / 64.0);
        h2 = SurfaceField::from_samples(v);
    }

    auto zero = w1_diagnostic(c0, c0, h2, eps, chart, P);
    CHECK(zero.w1.max_norm() <= 1e-13);

    // perturbed state: the response is nonzero, and switching the g-term off
    // moves it only by an eps-small amount
    PhaseField c_eps = c0;
    for (int j = 0; j < grid.n; ++j)
        for (int i = 0; i < grid.n; ++i) {
            Vec2 x = grid.center(i, j);
            c_eps.at(i, j) += 1e-3 * std::sin(2 * M_PI * x[0]) * std::sin(2 * M_PI * x[1]);
        }
    auto with_g = w1_diagnostic(c_eps, c0, h2, eps, chart, P);
    SurfaceField h2zero(64);
    auto no_g = w1_diagnostic(c_eps, c0, h2zero, eps, chart, P);
    CHECK(with_g.w1.max_norm() > 0.0);
    double diff = 0.0;
    for (size_t k = 0; k < with_g.w1.u_data().size(); ++k)
        diff = std::max(diff, std::abs(with_g.w1.u_data()[k] - no_g.w1.u_data()[k]));
    // the g-term carries an explicit eps and d_s h2 factor
    CHECK(diff <= 10.0 * eps * 0.4 * 2.0 * M_PI * no_g.w1.max_norm() + 1e-12);
}

TEST_CASE("spectral sweep: constant phase matches the shifted Laplacian") {
    const auto& P = default_profile();
    Grid2D grid{64};
    PhaseField ones(grid, BoundaryMode::Periodic, 1.0);
    const double eps = 0.1;
    auto lam = smallest_eigenvalues(ones, eps, P.well, 3);
    const double expect = P.well.ddf(1.0) / (eps * eps);  // periodic Laplacian adds 0
    CHECK(lam[0] == doctest::Approx(expect).epsilon(0.01));
    CHECK(lam[1] >= lam[0] - 1e-9);
}

TEST_CASE("rate fitting") {
    std::vector<std::pair<double, double>> rows{{0.1, 1e-2}, {0.05, 2.5e-3}, {0.025, 6.25e-4}};
    auto fit = rate_fit(rows);
    CHECK(fit.order == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.residual <= 1e-12);

    // 1 percent multiplicative noise moves the fitted order by well under 0.1
    std::vector<std::pair<double, double>> noisy = rows;
    noisy[0].second *= 1.01;
    noisy[1].second *= 0.99;
    noisy[2].second *= 1.01;
    CHECK(std::abs(rate_fit(noisy).order - 2.0) <= 0.1);

    CHECK_THROWS_AS(rate_fit({{0.1, 1.0}, {0.05, 0.5}}), InsufficientData);
    CHECK_THROWS_AS(rate_fit({{0.1, 1.0}, {0.05, 0.5}, {0.025, -0.1}}), NonPositiveError);
}

TEST_CASE("degenerate ladder skips fits; reruns are byte identical") {
    Config cfg;
    cfg.eps_ladder = {0.08};
    cfg.t_final = 1e-3;
    cfg.modes = 32;
    cfg.sharp_grid_n = 128;
    cfg.order_v = 0;
    auto report = run_converge(cfg, "");
    CHECK(!report.fits_valid);
    REQUIRE(report.rows.size() == 1);
    CHECK(report.rows[0].sup_c_l2 >= 0.0);

    std::stringstream a, b;
    write_report_csv(a, report);
    auto report2 = run_converge(cfg, "");
    write_report_csv(b, report2);
    CHECK(a.str() == b.str());
    CHECK(!a.str().empty());
}
