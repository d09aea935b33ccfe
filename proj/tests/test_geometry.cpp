#include <cmath>
#include <sstream>

#include "acstokes/chart.hpp"
#include "acstokes/curve.hpp"
#include "acstokes/errors.hpp"
#include "doctest.h"

using namespace acstokes;

namespace {
ClosedCurve unit_circle() { return ClosedCurve::circle({0.0, 0.0}, 1.0); }
}  // namespace

TEST_CASE("spectral derivative sanity") {
    std::vector<double> x(64);
    for (int j = 0; j < 64; ++j) x[j] = std::sin(2.0 * M_PI * j / 64.0);
    auto c = fourier::forward(x);
    auto dc = fourier::derivative(c);
    for (int j = 0; j < 64; ++j) {
        const double s = static_cast<double>(j) / 64;
        CHECK(fourier::eval(dc, s) == doctest::Approx(2.0 * M_PI * std::cos(2.0 * M_PI * s))
                                          .epsilon(1e-12));
    }
}

TEST_CASE("unit circle has curvature -1 with the enclosed phase as minus") {
    auto c = unit_circle();
    for (int j = 0; j < 37; ++j) {
        const double s = j / 37.0;
        CHECK(c.curvature(s) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    // n = rot90(tau) points away from the enclosed region
    Vec2 p = c.position(0.2), n = c.normal(0.2);
    CHECK(dot(p, n) > 0.9);
}

TEST_CASE("circle of radius 2 has constant parametrization speed 4 pi") {
    auto c = ClosedCurve::circle({0.3, -0.1}, 2.0);
    for (int j = 0; j < 11; ++j)
        CHECK(c.speed(j / 11.0) == doctest::Approx(4.0 * M_PI).epsilon(1e-12));
}

TEST_CASE("ellipse curvature matches the closed form") {
    auto c = ClosedCurve::ellipse({0.0, 0.0}, 2.0, 1.0);
    // closed form |kappa| = a b / (a^2 sin^2 t + b^2 cos^2 t)^{3/2}
    auto exact = [](double t) {
        const double a = 2.0, b = 1.0;
        const double den = a * a * std::sin(t) * std::sin(t) + b * b * std::cos(t) * std::cos(t);
        return a * b / std::pow(den, 1.5);
    };
    for (double s : {0.0, 0.25, 0.5}) {
        // the stored parametrization may run the other way; compare at the point
        Vec2 p = c.position(s);
        const double t = std::atan2(p[1] / 1.0, p[0] / 2.0);
        CHECK(std::abs(c.curvature(s)) == doctest::Approx(exact(t)).epsilon(1e-10));
        CHECK(c.curvature(s) < 0.0);
    }
}

TEST_CASE("degenerate and self-intersecting inputs are rejected") {
    std::vector<Vec2> same(64, Vec2{1.0, 1.0});
    CHECK_THROWS_AS(ClosedCurve::from_samples(same), DegenerateParametrization);

    std::vector<Vec2> eight(128);
    for (int j = 0; j < 128; ++j) {
        const double t = 2.0 * M_PI * j / 128;
        eight[j] = {std::sin(2.0 * t), std::sin(t)};  // figure eight
    }
    CHECK_THROWS_AS(ClosedCurve::from_samples(eight), SelfIntersection);
}

TEST_CASE("curve serialization round trip") {
    auto c = ClosedCurve::ellipse({0.1, 0.2}, 1.5, 0.7);
    std::stringstream ss;
    c.save(ss);
    auto c2 = ClosedCurve::load(ss);
    for (double s : {0.0, 0.31, 0.77}) {
        CHECK(c2.position(s)[0] == doctest::Approx(c.position(s)[0]).epsilon(1e-14));
        CHECK(c2.position(s)[1] == doctest::Approx(c.position(s)[1]).epsilon(1e-14));
    }
}

TEST_CASE("signed distance on the unit circle") {
    TubularChart chart(unit_circle());
    CHECK(chart.delta() == doctest::Approx(0.3));

    auto center = chart.signed_distance({0.0, 0.0});
    CHECK(center.clamped);  // 3*delta = 0.9 < 1
    CHECK(center.d == doctest::Approx(-1.0).epsilon(1e-9));

    auto out = chart.signed_distance({1.5, 0.0});
    CHECK(!out.clamped);
    CHECK(out.d == doctest::Approx(0.5).epsilon(1e-12));
    const double s_wrap = std::abs(out.s - std::round(out.s));  // distance to 0 on the torus
    CHECK(s_wrap <= 1e-10);

    auto on = chart.signed_distance({std::cos(1.0), std::sin(1.0)});
    CHECK(on.d == doctest::Approx(0.0).epsilon(1e-12));

    // gradient of d equals the unit normal, checked by finite differences
    const double h = 1e-6;
    Vec2 x{1.1 * std::cos(0.4), 1.1 * std::sin(0.4)};
    const double dxp = chart.signed_distance({x[0] + h, x[1]}).d;
    const double dxm = chart.signed_distance({x[0] - h, x[1]}).d;
    const double dyp = chart.signed_distance({x[0], x[1] + h}).d;
    const double dym = chart.signed_distance({x[0], x[1] - h}).d;
    Vec2 grad{(dxp - dxm) / (2 * h), (dyp - dym) / (2 * h)};
    auto sd = chart.signed_distance(x);
    Vec2 n = chart.curve().normal(sd.s);
    CHECK(dot(grad, n) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("closest point residual and projection idempotence") {
    auto c = ClosedCurve::ellipse({0.0, 0.0}, 1.2, 0.8);
    TubularChart chart(c);
    for (int j = 0; j < 25; ++j) {
        const double s = j / 25.0;
        const double r = (j % 5 - 2) * 0.4 * chart.delta();
        Vec2 x = chart.chart_point(r, s);
        auto sd = chart.signed_distance(x);
        CHECK(sd.d == doctest::Approx(r).epsilon(1e-9));
        Vec2 recon = chart.curve().position(sd.s) + sd.d * chart.curve().normal(sd.s);
        CHECK(norm(x - recon) < 1e-10);
        // idempotence: project(P(x) + r' n) = P(x)
        Vec2 p = chart.project(x);
        Vec2 shifted = p + (0.5 * chart.delta()) * chart.curve().normal(sd.s);
        Vec2 p2 = chart.project(shifted);
        CHECK(norm(p - p2) < 1e-9);
    }
}

TEST_CASE("tubular quadrature integrates the annulus area") {
    TubularChart chart(unit_circle());
    const double got = chart.tubular_quadrature([](double, double) { return 1.0; }, 0.1);
    CHECK(got == doctest::Approx(M_PI * (1.1 * 1.1 - 0.9 * 0.9)).epsilon(1e-8));

    // f(r,s) = r integrates to the first moment of the annulus; direct 2D
    // quadrature over the same region is the oracle
    const double got_r = chart.tubular_quadrature([](double r, double) { return r; }, 0.1);
    double oracle = 0.0;
    {
        const int nr = 2000, ns = 256;
        for (int i = 0; i < nr; ++i) {
            const double r = -0.1 + 0.2 * (i + 0.5) / nr;
            // on the circle J = 1 + r (note H = -1), ds weight = 2 pi
            oracle += (0.2 / nr) * r * (1.0 + r) * 2.0 * M_PI * ns / ns;
        }
    }
    CHECK(got_r == doctest::Approx(oracle).epsilon(1e-7));

    CHECK(chart.tubular_quadrature([](double, double) { return 1.0; }, 0.0) == 0.0);
}

TEST_CASE("time derivative of the distance is minus the normal velocity") {
    // shrinking circle R(t) = sqrt(R0^2 - 2t): V = H = -1/R
    const double R0 = 1.0, dt = 1e-6;
    auto c0 = ClosedCurve::circle({0.0, 0.0}, R0);
    auto c1 = ClosedCurve::circle({0.0, 0.0}, std::sqrt(R0 * R0 - 2.0 * dt));
    TubularChart chart0(c0), chart1(c1);
    Vec2 x{1.1, 0.0};
    const double dddt = (chart1.signed_distance(x).d - chart0.signed_distance(x).d) / dt;
    CHECK(dddt == doctest::Approx(1.0 / R0).epsilon(1e-5));  // -V = +1/R

    // Laplacian of d on the curve equals -H, via 5-point finite differences
    const double h = 1e-4;
    Vec2 p{R0, 0.0};
    auto d = [&](double a, double b) { return chart0.signed_distance({a, b}).d; };
    const double lap = (d(p[0] + h, p[1]) + d(p[0] - h, p[1]) + d(p[0], p[1] + h) +
                        d(p[0], p[1] - h) - 4.0 * d(p[0], p[1])) /
                       (h * h);
    CHECK(lap == doctest::Approx(1.0 / R0).epsilon(1e-4));  // -H = 1/R
}

TEST_CASE("grad S is tangential and the chain rule holds") {
    auto c = ClosedCurve::ellipse({0.0, 0.0}, 1.3, 0.9);
    TubularChart chart(c);

    // finite-difference gradient of the S field dotted with the normal
    const double h = 1e-6;
    for (int j = 0; j < 9; ++j) {
        Vec2 x = chart.chart_point(0.3 * chart.delta(), j / 9.0 + 0.02);
        auto wrap = [](double a, double b) {
            double df = a - b;
            df -= std::round(df);
            return df;
        };
        const double sx =
            wrap(chart.signed_distance({x[0] + h, x[1]}).s, chart.signed_distance({x[0] - h, x[1]}).s) /
            (2 * h);
        const double sy =
            wrap(chart.signed_distance({x[0], x[1] + h}).s, chart.signed_distance({x[0], x[1] - h}).s) /
            (2 * h);
        auto sd = chart.signed_distance(x);
        Vec2 n = c.normal(sd.s);
        CHECK(std::abs(sx * n[0] + sy * n[1]) < 1e-8 * (std::abs(sx) + std::abs(sy) + 1.0));
        Vec2 gs = chart.grad_S(sd.d, sd.s);
        CHECK(sx == doctest::Approx(gs[0]).epsilon(1e-5));
        CHECK(sy == doctest::Approx(gs[1]).epsilon(1e-5));
    }

    // chain rule: grad phi = n d_r phi + grad_S d_s phi for phi(x) = f(d) g(S)
    auto phi = [&](Vec2 x) {
        auto sd = chart.signed_distance(x);
        return std::sin(3.0 * sd.d) * std::cos(2.0 * M_PI * sd.s);
    };
    auto grad_exact = [&](Vec2 x) {
        auto sd = chart.signed_distance(x);
        Vec2 n = c.normal(sd.s);
        Vec2 gs = chart.grad_S(sd.d, sd.s);
        const double dr = 3.0 * std::cos(3.0 * sd.d) * std::cos(2.0 * M_PI * sd.s);
        const double ds = -2.0 * M_PI * std::sin(3.0 * sd.d) * std::sin(2.0 * M_PI * sd.s);
        return Vec2{n[0] * dr + gs[0] * ds, n[1] * dr + gs[1] * ds};
    };
    Vec2 x = chart.chart_point(0.2 * chart.delta(), 0.37);
    auto err_at = [&](double hh) {
        Vec2 g{(phi({x[0] + hh, x[1]}) - phi({x[0] - hh, x[1]})) / (2 * hh),
               (phi({x[0], x[1] + hh}) - phi({x[0], x[1] - hh})) / (2 * hh)};
        return norm(g - grad_exact(x));
    };
    const double e1 = err_at(1e-3), e2 = err_at(5e-4);
    CHECK(e2 < e1 / 3.0);  // second order in the step
}

TEST_CASE("surface operator differences vanish on the curve") {
    auto c = ClosedCurve::ellipse({0.0, 0.0}, 1.1, 0.8);
    TubularChart chart(c);
    SurfaceOperatorSet ops(chart);
    std::vector<double> hvals(c.n_modes());
    for (int j = 0; j < c.n_modes(); ++j)
        hvals[j] = std::sin(2.0 * M_PI * j / c.n_modes()) + 0.3 * std::cos(4.0 * M_PI * j / c.n_modes());
    auto hc = fourier::forward(hvals);
    for (double s : {0.1, 0.5, 0.9}) {
        CHECK(norm(ops.grad_difference(hc, 0.0, s)) < 1e-13);
        CHECK(std::abs(ops.lap_difference(hc, 0.0, s)) < 1e-13);
        // away from the curve they pick up the r-dependence linearly
        const double r = 0.1 * chart.delta();
        Vec2 fd = ops.grad_difference(hc, r, s);
        Vec2 lin = r * ops.d_dr_grad_difference(hc, s);
        CHECK(norm(fd - lin) < 0.1 * norm(fd) + 1e-12);
    }
}
