#include <cmath>
#include <random>

#include "acstokes/errors.hpp"
#include "acstokes/profile.hpp"
#include "doctest.h"

using namespace acstokes;

TEST_CASE("default well reproduces tanh(rho/2), alpha = 1, sigma = 2/3") {
    auto P = optimal_profile(DoubleWell::quartic());
    REQUIRE(P.rho.size() == static_cast<size_t>(P.n + 1));
    double dev = 0.0;
    for (size_t i = 0; i < P.rho.size(); ++i)
        dev = std::max(dev, std::abs(P.theta[i] - std::tanh(0.5 * P.rho[i])));
    CHECK(dev <= 1e-10);
    CHECK(P.alpha == doctest::Approx(1.0));
    CHECK(P.sigma == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("tabulation satisfies the profile ODE and symmetry invariants") {
    auto P = optimal_profile(DoubleWell::quartic());
    const double h = P.spacing();
    const int m = static_cast<int>(P.rho.size());

    // ODE residual with 6th-order finite differences of the tabulated theta
    double res = 0.0;
    for (int i = 3; i < m - 3; ++i) {
        const double dd = (2.0 * P.theta[i - 3] - 27.0 * P.theta[i - 2] + 270.0 * P.theta[i - 1] -
                           490.0 * P.theta[i] + 270.0 * P.theta[i + 1] - 27.0 * P.theta[i + 2] +
                           2.0 * P.theta[i + 3]) /
                          (180.0 * h * h);
        res = std::max(res, std::abs(-dd + P.well.df(P.theta[i])));
    }
    CHECK(res <= 1e-8);

    CHECK(P.theta[P.index_of_zero()] == doctest::Approx(0.0));
    for (int i = 1; i < m; ++i) CHECK(P.theta[i] >= P.theta[i - 1]);
    double odd = 0.0, even = 0.0, eta_odd = 0.0;
    for (int i = 0; i < m; ++i) {
        odd = std::max(odd, std::abs(P.theta[i] + P.theta[m - 1 - i]));
        even = std::max(even, std::abs(P.dtheta[i] - P.dtheta[m - 1 - i]));
        eta_odd = std::max(eta_odd, std::abs(P.eta[i] + P.eta[m - 1 - i]));
    }
    CHECK(odd <= 1e-10);
    CHECK(even <= 1e-10);
    CHECK(eta_odd <= 1e-9);

    // fitted decay exponent of 1 - theta over rho in [5, 15]
    const auto at = [&](double r) { return 1.0 - P.theta_at(r); };
    const double slope = std::log(at(5.0) / at(15.0)) / 10.0;
    CHECK(slope >= 0.95 * P.alpha);

    // eta matches the closed form (3T - T^3)/2 for the default well
    double eta_dev = 0.0;
    for (int i = 0; i < m; ++i) {
        const double T = std::tanh(0.5 * P.rho[i]);
        eta_dev = std::max(eta_dev, std::abs(P.eta[i] - 0.5 * (3.0 * T - T * T * T)));
    }
    CHECK(eta_dev <= 1e-7);
    for (int i = 1; i < m; ++i) CHECK(P.eta[i] >= P.eta[i - 1] - 1e-15);
}

TEST_CASE("general well goes through the first-integral quadrature") {
    // f = (1-s^2)^2/4 has the closed-form profile tanh(rho/sqrt(2))
    DoubleWell w;
    w.f = [](double s) { return 0.25 * (1.0 - s * s) * (1.0 - s * s); };
    w.df = [](double s) { return s * s * s - s; };
    w.ddf = [](double s) { return 3.0 * s * s - 1.0; };
    w.dddf = [](double s) { return 6.0 * s; };
    auto P = optimal_profile(w, 30.0, 3000);
    CHECK(!P.closed_form);
    CHECK(P.alpha == doctest::Approx(std::sqrt(2.0)));
    double dev = 0.0;
    for (size_t i = 0; i < P.rho.size(); ++i)
        dev = std::max(dev, std::abs(P.theta[i] - std::tanh(P.rho[i] / std::sqrt(2.0))));
    CHECK(dev <= 1e-9);
}

TEST_CASE("a function that is not a double well is rejected") {
    DoubleWell w = DoubleWell::quartic();
    w.df = [](double s) { return 0.5 * (s * s * s - s) + 0.1; };  // f'(1) != 0
    CHECK_THROWS_AS(optimal_profile(w), NotADoubleWell);
}

TEST_CASE("solve_linearized reproduces the translation-mode identity") {
    auto P = optimal_profile(DoubleWell::quartic());
    const int m = static_cast<int>(P.rho.size());

    // L(-rho theta'/2) = theta'' follows from differentiating the profile ODE
    auto u = solve_linearized(P.ddtheta, P);
    double err = 0.0;
    for (int i = 0; i < m; ++i)
        err = std::max(err, std::abs(u[i] + 0.5 * P.rho[i] * P.dtheta[i]));
    CHECK(err <= 1e-6);

    // zero right side gives the zero solution
    auto z = solve_linearized(std::vector<double>(m, 0.0), P);
    for (int i = 0; i < m; i += 97) CHECK(std::abs(z[i]) <= 1e-12);

    // theta' itself violates compatibility; the integral is sigma = 2/3
    try {
        solve_linearized(P.dtheta, P);
        FAIL("expected IncompatibleRHS");
    } catch (const IncompatibleRHS& e) {
        CHECK(e.integral == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
    }

    // orthogonality of the returned solution to the kernel direction
    std::vector<double> prod(m);
    for (int i = 0; i < m; ++i) prod[i] = u[i] * P.dtheta[i];
    const double ip = P.integrate(prod);
    std::vector<double> usq(m);
    for (int i = 0; i < m; ++i) usq[i] = u[i] * u[i];
    CHECK(std::abs(ip) <= 1e-8 * std::sqrt(P.integrate(usq)));
}

TEST_CASE("spectrum of the linearized operator") {
    auto P = optimal_profile(DoubleWell::quartic());
    auto pairs = spectrum_L(P, 3);
    CHECK(std::abs(pairs[0].value) <= 1e-6);

    // eigenvector aligns with theta'
    double num = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < P.rho.size(); ++i) {
        num += pairs[0].vector[i] * P.dtheta[i];
        na += pairs[0].vector[i] * pairs[0].vector[i];
        nb += P.dtheta[i] * P.dtheta[i];
    }
    CHECK(std::abs(num) / std::sqrt(na * nb) >= 1.0 - 1e-6);

    // spectral gap; 3/4 is the known second eigenvalue for the tanh profile
    CHECK(pairs[1].value > 0.5);
    CHECK(pairs[1].value == doctest::Approx(0.75).epsilon(1e-4));

    // constant-potential control: q = f''(1) = 1 shifts the Dirichlet Laplacian
    OptimalProfile flat = P;
    flat.closed_form = false;
    std::fill(flat.theta.begin(), flat.theta.end(), 1.0);
    auto cpairs = spectrum_L(flat, 1);
    const double expected = 1.0 + std::pow(M_PI / (2.0 * P.L), 2);
    CHECK(cpairs[0].value == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("c2_hat slices") {
    auto P = optimal_profile(DoubleWell::quartic());
    const int ns = 8;
    const int m = static_cast<int>(P.rho.size());

    // grad h1 = 0 and kappa1 = div v: the right side vanishes entirely
    {
        std::vector<double> zero(ns, 0.0), k1(ns, 0.7), dv(ns, 0.7);
        auto c2 = c2_hat(zero, k1, dv, P);
        for (int j = 0; j < ns; ++j)
            for (int i = 0; i < m; i += 211) CHECK(std::abs(c2[j][i]) <= 1e-10);
    }

    // kappa1 = div v and |grad h1|^2 = 1: c2 solves L c2 = theta'', so -rho theta'/2
    {
        std::vector<double> one(ns, 1.0), k1(ns, 0.3), dv(ns, 0.3);
        auto c2 = c2_hat(one, k1, dv, P);
        double err = 0.0;
        for (int i = 0; i < m; ++i)
            err = std::max(err, std::abs(c2[0][i] + 0.5 * P.rho[i] * P.dtheta[i]));
        CHECK(err <= 1e-6);
        CHECK(std::abs(c2[0][P.index_of_zero()]) <= 1e-12);
    }

    // compatibility of the full right side for random smooth data
    {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        for (int trial = 0; trial < 5; ++trial) {
            const double a = U(rng), b = 1.0 + U(rng), c = U(rng);
            std::vector<double> rhs(m), prod(m);
            for (int i = 0; i < m; ++i)
                rhs[i] = a * a * P.ddtheta[i] - P.rho[i] * P.dtheta[i] * (b - c);
            for (int i = 0; i < m; ++i) prod[i] = rhs[i] * P.dtheta[i];
            CHECK(std::abs(P.integrate(prod)) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b - c)));
        }
    }
}
