#include "acstokes/chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "acstokes/errors.hpp"

namespace acstokes {

namespace {
constexpr int kNewtonMaxIter = 50;
constexpr double kNewtonTol = 1e-12;

// Gauss-Legendre nodes/weights on [-1,1] by Newton on the Legendre polynomial.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}
}  // namespace

TubularChart::TubularChart(ClosedCurve curve, double delta) : curve_(std::move(curve)) {
    const double maxH = curve_.max_abs_curvature();
    const double geometric = maxH > 0.0 ? 0.3 / maxH : 0.3;
    delta_ = delta > 0.0 ? delta : geometric;
    if (delta_ > geometric) delta_ = geometric;
    build_seed_table();

    // injectivity: J > 0 for |r| < 3 delta on samples
    const int ms = 2 * curve_.n_modes();
    for (int j = 0; j < ms; ++j) {
        const double s = static_cast<double>(j) / ms;
        for (double r : {-3.0 * delta_ * 0.999, 3.0 * delta_ * 0.999}) {
            if (jacobian(r, s) <= 0.0)
                throw DegenerateParametrization("chart map not injective on the 3*delta tube");
        }
    }
}

void TubularChart::build_seed_table() {
    dense_m_ = 8 * curve_.n_modes();
    dense_pts_ = curve_.sample(dense_m_);
    dense_spacing_ = 0.0;
    for (int j = 0; j < dense_m_; ++j)
        dense_spacing_ =
            std::max(dense_spacing_, norm(dense_pts_[(j + 1) % dense_m_] - dense_pts_[j]));

    Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Vec2 hi{-lo[0], -lo[1]};
    for (auto& p : dense_pts_) {
        lo[0] = std::min(lo[0], p[0]);
        lo[1] = std::min(lo[1], p[1]);
        hi[0] = std::max(hi[0], p[0]);
        hi[1] = std::max(hi[1], p[1]);
    }
    const double pad = 3.5 * delta_;
    seed_lo_ = {lo[0] - pad, lo[1] - pad};
    const double extent = std::max(hi[0] - lo[0], hi[1] - lo[1]) + 2.0 * pad;
    seed_n_ = 192;
    seed_h_ = extent / seed_n_;
    seed_s_.assign(static_cast<size_t>(seed_n_) * seed_n_, 0.0f);
    for (int iy = 0; iy < seed_n_; ++iy) {
        for (int ix = 0; ix < seed_n_; ++ix) {
            Vec2 c{seed_lo_[0] + (ix + 0.5) * seed_h_, seed_lo_[1] + (iy + 0.5) * seed_h_};
            double best = std::numeric_limits<double>::max();
            int arg = 0;
            for (int j = 0; j < dense_m_; ++j) {
                Vec2 dvec = c - dense_pts_[j];
                const double d2 = dot(dvec, dvec);
                if (d2 < best) {
                    best = d2;
                    arg = j;
                }
            }
            seed_s_[static_cast<size_t>(iy) * seed_n_ + ix] =
                static_cast<float>(static_cast<double>(arg) / dense_m_);
        }
    }
}

bool TubularChart::point_inside(Vec2 x) const {
    // ray cast along +x over the dense sample polygon
    bool inside = false;
    for (int j = 0; j < dense_m_; ++j) {
        const Vec2& a = dense_pts_[j];
        const Vec2& b = dense_pts_[(j + 1) % dense_m_];
        if ((a[1] > x[1]) != (b[1] > x[1])) {
            const double t = (x[1] - a[1]) / (b[1] - a[1]);
            if (a[0] + t * (b[0] - a[0]) > x[0]) inside = !inside;
        }
    }
    return inside;
}

double TubularChart::newton_closest(Vec2 x, double s0) const {
    double s = s0;
    for (int it = 0; it < kNewtonMaxIter; ++it) {
        Vec2 p = curve_.position(s);
        Vec2 dp = curve_.derivative(s);
        Vec2 ddp = curve_.second_derivative(s);
        Vec2 e = x - p;
        const double F = dot(e, dp);
        const double dF = -dot(dp, dp) + dot(e, ddp);
        if (std::abs(dF) < 1e-30) throw NoConvergence("closest-point Newton: flat objective");
        double step = F / dF;
        // safeguard against overshooting between distant arcs
        step = std::clamp(step, -0.25, 0.25);
        s -= step;
        s -= std::floor(s);
        if (std::abs(step) < kNewtonTol) return s;
    }
    throw NoConvergence("closest-point Newton did not converge (delta too large for curvature?)");
}

SignedDistanceResult TubularChart::signed_distance(Vec2 x) const {
    SignedDistanceResult res;
    // seed lookup
    const int ix = static_cast<int>(std::floor((x[0] - seed_lo_[0]) / seed_h_));
    const int iy = static_cast<int>(std::floor((x[1] - seed_lo_[1]) / seed_h_));
    auto coarse_result = [&]() {
        // marker for points beyond the tube: sign plus the polygon distance
        double best = std::numeric_limits<double>::max();
        int arg = 0;
        for (int j = 0; j < dense_m_; ++j) {
            Vec2 dv = x - dense_pts_[j];
            const double d2 = dot(dv, dv);
            if (d2 < best) {
                best = d2;
                arg = j;
            }
        }
        res.clamped = true;
        res.d = (point_inside(x) ? -1.0 : 1.0) * std::sqrt(best);
        res.s = static_cast<double>(arg) / dense_m_;
        return res;
    };
    if (ix < 0 || iy < 0 || ix >= seed_n_ || iy >= seed_n_) return coarse_result();
    const double s0 = seed_s_[static_cast<size_t>(iy) * seed_n_ + ix];

    // quick reject on the coarse distance before running Newton
    {
        Vec2 p0 = curve_.position(s0);
        const double coarse = norm(x - p0);
        if (coarse > 3.0 * delta_ + 2.0 * seed_h_ + dense_spacing_) return coarse_result();
    }

    const double s = newton_closest(x, s0);
    Vec2 p = curve_.position(s);
    Vec2 n = curve_.normal(s);
    Vec2 e = x - p;
    const double d = dot(e, n);
    if (std::abs(d) >= 3.0 * delta_) {
        res.clamped = true;
        res.d = d;
        res.s = s;
        return res;
    }
    res.d = d;
    res.s = s;
    return res;
}

Vec2 TubularChart::project(Vec2 x) const {
    auto r = signed_distance(x);
    return curve_.position(r.s);
}

double TubularChart::jacobian(double r, double s) const {
    return curve_.speed(s) * (1.0 - r * curve_.curvature(s));
}

double TubularChart::laplacian_distance(double r, double s) const {
    const double H = curve_.curvature(s);
    return -H / (1.0 - r * H);
}

Vec2 TubularChart::grad_S(double r, double s) const {
    const double G = jacobian(r, s);
    return (1.0 / G) * curve_.tangent(s);
}

double TubularChart::grad_S_norm_sq(double r, double s) const {
    const double G = jacobian(r, s);
    return 1.0 / (G * G);
}

double TubularChart::laplacian_S(double r, double s) const {
    // Laplacian of the coordinate function s(x): -(d_s G)/G^3 with
    // G(r,s) = |X0'(s)| (1 - r H(s)).
    const double sp = curve_.speed(s);
    const double spd = curve_.speed_derivative(s);
    const double H = curve_.curvature(s);
    const double Hd = curve_.curvature_derivative(s);
    const double G = sp * (1.0 - r * H);
    const double dsG = spd * (1.0 - r * H) - r * sp * Hd;
    return -dsG / (G * G * G);
}

Vec2 d_dr_grad_S_of(const ClosedCurve& curve, double s) {
    const double sp = curve.speed(s);
    const double H = curve.curvature(s);
    return (H / sp) * curve.tangent(s);
}

double d_dr_grad_S_norm_sq_of(const ClosedCurve& curve, double s) {
    const double sp = curve.speed(s);
    const double H = curve.curvature(s);
    return 2.0 * H / (sp * sp);
}

double d_dr_laplacian_S_of(const ClosedCurve& curve, double s) {
    const double sp = curve.speed(s);
    const double spd = curve.speed_derivative(s);
    const double H = curve.curvature(s);
    const double Hd = curve.curvature_derivative(s);
    return Hd / (sp * sp) - 2.0 * H * spd / (sp * sp * sp);
}

Vec2 TubularChart::d_dr_grad_S(double s) const { return d_dr_grad_S_of(curve_, s); }
double TubularChart::d_dr_grad_S_norm_sq(double s) const {
    return d_dr_grad_S_norm_sq_of(curve_, s);
}
double TubularChart::d_dr_laplacian_S(double s) const { return d_dr_laplacian_S_of(curve_, s); }

double TubularChart::tubular_quadrature(const std::function<double(double, double)>& f,
                                        double half_width) const {
    if (half_width < 0.0 || half_width > 3.0 * delta_ + 1e-15)
        throw ConfigError("tubular_quadrature: half width must lie in [0, 3*delta]");
    if (half_width == 0.0) return 0.0;
    static thread_local std::vector<double> gx, gw;
    if (gx.size() != 32) gauss_legendre(32, gx, gw);
    const int ms = 2 * curve_.n_modes();
    double total = 0.0;
    for (int j = 0; j < ms; ++j) {
        const double s = static_cast<double>(j) / ms;
        double row = 0.0;
        for (size_t q = 0; q < gx.size(); ++q) {
            const double r = half_width * gx[q];
            row += gw[q] * f(r, s) * jacobian(r, s);
        }
        total += row * half_width;
    }
    return total / ms;
}

Vec2 SurfaceOperatorSet::grad_full(const std::vector<fourier::cd>& h_coef, double r,
                                   double s) const {
    auto dh = fourier::derivative(h_coef);
    return fourier::eval(dh, s) * chart_->grad_S(r, s);
}

double SurfaceOperatorSet::lap_full(const std::vector<fourier::cd>& h_coef, double r,
                                    double s) const {
    auto dh = fourier::derivative(h_coef);
    auto ddh = fourier::derivative(h_coef, 2);
    return chart_->grad_S_norm_sq(r, s) * fourier::eval(ddh, s) +
           chart_->laplacian_S(r, s) * fourier::eval(dh, s);
}

Vec2 SurfaceOperatorSet::grad_restricted(const std::vector<fourier::cd>& h_coef, double s) const {
    return grad_full(h_coef, 0.0, s);
}

double SurfaceOperatorSet::lap_restricted(const std::vector<fourier::cd>& h_coef, double s) const {
    return lap_full(h_coef, 0.0, s);
}

Vec2 SurfaceOperatorSet::grad_difference(const std::vector<fourier::cd>& h_coef, double r,
                                         double s) const {
    return grad_full(h_coef, r, s) - grad_restricted(h_coef, s);
}

double SurfaceOperatorSet::lap_difference(const std::vector<fourier::cd>& h_coef, double r,
                                          double s) const {
    return lap_full(h_coef, r, s) - lap_restricted(h_coef, s);
}

Vec2 SurfaceOperatorSet::d_dr_grad_difference(const std::vector<fourier::cd>& h_coef,
                                              double s) const {
    auto dh = fourier::derivative(h_coef);
    return fourier::eval(dh, s) * chart_->d_dr_grad_S(s);
}

double SurfaceOperatorSet::d_dr_lap_difference(const std::vector<fourier::cd>& h_coef,
                                               double s) const {
    auto dh = fourier::derivative(h_coef);
    auto ddh = fourier::derivative(h_coef, 2);
    return chart_->d_dr_grad_S_norm_sq(s) * fourier::eval(ddh, s) +
           chart_->d_dr_laplacian_S(s) * fourier::eval(dh, s);
}

}  // namespace acstokes
