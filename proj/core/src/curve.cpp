#include "acstokes/curve.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "acstokes/errors.hpp"

namespace acstokes {

namespace {

constexpr double kMinSpeedTol = 1e-8;

std::vector<fourier::cd> resample_coef(const std::vector<fourier::cd>& c, int n) {
    if (static_cast<int>(c.size()) == n) return c;
    auto samples = fourier::resample(c, n);
    return fourier::forward(samples);
}

// Reverse parametrization s -> -s: sample values x_j -> x_{(m-j) mod m}.
std::vector<fourier::cd> reverse_coef(const std::vector<fourier::cd>& c) {
    auto x = fourier::inverse(c);
    const size_t m = x.size();
    std::vector<double> r(m);
    for (size_t j = 0; j < m; ++j) r[j] = x[(m - j) % m];
    return fourier::forward(r);
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return cross(q - p, r - p); };
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

}  // namespace

ClosedCurve::ClosedCurve(std::vector<fourier::cd> coef_x, std::vector<fourier::cd> coef_y,
                         double time_tag, int n_modes)
    : ClosedCurve(std::move(coef_x), std::move(coef_y), time_tag, n_modes, true) {}

ClosedCurve::ClosedCurve(std::vector<fourier::cd> coef_x, std::vector<fourier::cd> coef_y,
                         double time_tag, int n_modes, bool check_intersections) {
    if (n_modes < 4 || n_modes % 2 != 0)
        throw DegenerateParametrization("mode count must be even and at least 4");
    if (coef_x.size() < 3 || coef_y.size() < 3)
        throw DegenerateParametrization("need at least 3 modes per component");
    n_ = n_modes;
    time_tag_ = time_tag;
    cx_ = resample_coef(coef_x, n_);
    cy_ = resample_coef(coef_y, n_);
    fourier::truncate(cx_, n_ / 2 - 1);  // drop Nyquist
    fourier::truncate(cy_, n_ / 2 - 1);

    // Normalize orientation: enclosed region is the minus phase, n exterior to it.
    {
        auto dx = fourier::derivative(cx_);
        auto dy = fourier::derivative(cy_);
        auto x = fourier::inverse(cx_);
        auto y = fourier::inverse(cy_);
        auto xp = fourier::inverse(dx);
        auto yp = fourier::inverse(dy);
        double area2 = 0.0;  // 2 * signed area = integral of (x y' - y x') ds
        for (int j = 0; j < n_; ++j) area2 += x[j] * yp[j] - y[j] * xp[j];
        area2 /= n_;
        if (area2 > 0.0) {  // counterclockwise input: rot90(tau) would point inward
            cx_ = reverse_coef(cx_);
            cy_ = reverse_coef(cy_);
            flipped_ = true;
        }
    }

    dx_ = fourier::derivative(cx_);
    dy_ = fourier::derivative(cy_);
    ddx_ = fourier::derivative(cx_, 2);
    ddy_ = fourier::derivative(cy_, 2);
    validate(check_intersections);
}

void ClosedCurve::validate(bool check_intersections) const {
    const int m = 4 * n_;
    auto xp = fourier::resample(dx_, m);
    auto yp = fourier::resample(dy_, m);
    for (int j = 0; j < m; ++j) {
        const double sp = std::hypot(xp[j], yp[j]);
        if (sp < kMinSpeedTol)
            throw DegenerateParametrization("parametrization speed below tolerance");
    }
    if (!check_intersections) return;
    // Self-intersection on the sample polygon, skipping adjacent segments.
    const int ms = 2 * n_;
    auto poly = sample(ms);
    for (int i = 0; i < ms; ++i) {
        for (int j = i + 2; j < ms; ++j) {
            if (i == 0 && j == ms - 1) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % ms], poly[j], poly[(j + 1) % ms]))
                throw SelfIntersection("curve samples cross");
        }
    }
}

ClosedCurve ClosedCurve::from_samples(const std::vector<Vec2>& points, double time_tag,
                                      int n_modes, bool check_intersections) {
    std::vector<double> xs(points.size()), ys(points.size());
    for (size_t j = 0; j < points.size(); ++j) {
        xs[j] = points[j][0];
        ys[j] = points[j][1];
    }
    return ClosedCurve(fourier::forward(xs), fourier::forward(ys), time_tag, n_modes,
                       check_intersections);
}

ClosedCurve::GeometrySamples ClosedCurve::sample_geometry(int m) const {
    if (m <= 0) m = n_;
    GeometrySamples g;
    auto xs = fourier::resample(cx_, m), ys = fourier::resample(cy_, m);
    auto xp = fourier::resample(dx_, m), yp = fourier::resample(dy_, m);
    auto xpp = fourier::resample(ddx_, m), ypp = fourier::resample(ddy_, m);
    g.position.resize(m);
    g.tangent.resize(m);
    g.normal.resize(m);
    g.speed.resize(m);
    g.curvature.resize(m);
    for (int j = 0; j < m; ++j) {
        g.position[j] = {xs[j], ys[j]};
        const double sp = std::hypot(xp[j], yp[j]);
        g.speed[j] = sp;
        g.tangent[j] = {xp[j] / sp, yp[j] / sp};
        g.normal[j] = rot90(g.tangent[j]);
        g.curvature[j] = (xp[j] * ypp[j] - yp[j] * xpp[j]) / (sp * sp * sp);
    }
    return g;
}

ClosedCurve ClosedCurve::circle(Vec2 center, double radius, double time_tag, int n_modes) {
    std::vector<Vec2> pts(static_cast<size_t>(n_modes));
    for (int j = 0; j < n_modes; ++j) {
        const double a = 2.0 * M_PI * j / n_modes;
        pts[j] = {center[0] + radius * std::cos(a), center[1] + radius * std::sin(a)};
    }
    return from_samples(pts, time_tag, n_modes);
}

ClosedCurve ClosedCurve::ellipse(Vec2 center, double a, double b, double time_tag, int n_modes) {
    std::vector<Vec2> pts(static_cast<size_t>(n_modes));
    for (int j = 0; j < n_modes; ++j) {
        const double ang = 2.0 * M_PI * j / n_modes;
        pts[j] = {center[0] + a * std::cos(ang), center[1] + b * std::sin(ang)};
    }
    return from_samples(pts, time_tag, n_modes);
}

Vec2 ClosedCurve::position(double s) const {
    return {fourier::eval(cx_, s), fourier::eval(cy_, s)};
}
Vec2 ClosedCurve::derivative(double s) const {
    return {fourier::eval(dx_, s), fourier::eval(dy_, s)};
}
Vec2 ClosedCurve::second_derivative(double s) const {
    return {fourier::eval(ddx_, s), fourier::eval(ddy_, s)};
}
Vec2 ClosedCurve::tangent(double s) const {
    Vec2 d = derivative(s);
    return (1.0 / norm(d)) * d;
}

double ClosedCurve::curvature(double s) const {
    Vec2 d = derivative(s);
    Vec2 dd = second_derivative(s);
    const double sp = norm(d);
    return cross(d, dd) / (sp * sp * sp);
}

double ClosedCurve::speed_derivative(double s) const {
    Vec2 d = derivative(s);
    Vec2 dd = second_derivative(s);
    return dot(d, dd) / norm(d);
}

double ClosedCurve::curvature_derivative(double s) const {
    const double h = 1e-4;
    return (curvature(s + h) - curvature(s - h)) / (2.0 * h);
}

double ClosedCurve::max_abs_curvature() const {
    auto g = sample_geometry(4 * n_);
    double m = 0.0;
    for (double k : g.curvature) m = std::max(m, std::abs(k));
    return m;
}

double ClosedCurve::total_length() const {
    auto xp = fourier::resample(dx_, 4 * n_), yp = fourier::resample(dy_, 4 * n_);
    double len = 0.0;
    for (size_t j = 0; j < xp.size(); ++j) len += std::hypot(xp[j], yp[j]);
    return len / xp.size();
}

double ClosedCurve::enclosed_area() const {
    const int ms = 4 * n_;
    double area2 = 0.0;
    for (int j = 0; j < ms; ++j) {
        const double s = static_cast<double>(j) / ms;
        area2 += cross(position(s), derivative(s));
    }
    return 0.5 * area2 / ms;
}

Vec2 ClosedCurve::centroid_of_samples() const {
    auto pts = sample(n_);
    Vec2 c{0.0, 0.0};
    for (auto& p : pts) c = c + p;
    return (1.0 / pts.size()) * c;
}

std::vector<Vec2> ClosedCurve::sample(int m) const {
    if (m <= 0) m = n_;
    auto xs = fourier::resample(cx_, m);
    auto ys = fourier::resample(cy_, m);
    std::vector<Vec2> pts(static_cast<size_t>(m));
    for (int j = 0; j < m; ++j) pts[j] = {xs[j], ys[j]};
    return pts;
}

double ClosedCurve::tail_fraction() const {
    double tail = 0.0, total = 0.0;
    for (int k = 1; k < n_; ++k) {
        const int kf = std::abs(fourier::signed_freq(k, n_));
        const double mag = std::norm(cx_[k]) + std::norm(cy_[k]);
        total += mag;
        if (kf > n_ / 3) tail += mag;
    }
    return total > 0.0 ? tail / total : 0.0;
}

void ClosedCurve::save(std::ostream& os) const {
    os << "closedcurve v1\n" << n_ << " " << time_tag_ << "\n";
    os.precision(17);
    for (int k = 0; k < n_; ++k)
        os << cx_[k].real() << " " << cx_[k].imag() << " " << cy_[k].real() << " " << cy_[k].imag()
           << "\n";
}

ClosedCurve ClosedCurve::load(std::istream& is) {
    std::string tag, version;
    is >> tag >> version;
    if (tag != "closedcurve" || version != "v1")
        throw ConfigError("unrecognized curve file header");
    int n = 0;
    double t = 0.0;
    is >> n >> t;
    std::vector<fourier::cd> cx(static_cast<size_t>(n)), cy(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        double a, b, c, d;
        is >> a >> b >> c >> d;
        cx[k] = {a, b};
        cy[k] = {c, d};
    }
    return ClosedCurve(cx, cy, t, n);
}

ClosedCurve build_curve(const std::vector<fourier::cd>& coef_x,
                        const std::vector<fourier::cd>& coef_y, double t, int n_modes) {
    return ClosedCurve(coef_x, coef_y, t, n_modes);
}

}  // namespace acstokes
