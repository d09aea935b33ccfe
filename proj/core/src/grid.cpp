#include "acstokes/grid.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "acstokes/errors.hpp"

namespace acstokes {

double PhaseField::ghosted(int i, int j, double boundary_value) const {
    const int n = grid_.n;
    if (bc_ == BoundaryMode::Periodic) {
        return at((i % n + n) % n, (j % n + n) % n);
    }
    if (i >= 0 && i < n && j >= 0 && j < n) return at(i, j);
    // value boundary: linear ghost through the wall value
    const int ic = std::min(std::max(i, 0), n - 1);
    const int jc = std::min(std::max(j, 0), n - 1);
    return 2.0 * boundary_value - at(ic, jc);
}

double PhaseField::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double PhaseField::l2_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s) * grid_.h();
}

VelocityField::VelocityField(Grid2D grid, BoundaryMode bc) : grid_(grid), bc_(bc) {
    u_.assign(static_cast<size_t>(nu_x()) * grid_.n, 0.0);
    v_.assign(static_cast<size_t>(grid_.n) * nv_y(), 0.0);
    p_.assign(grid_.cells(), 0.0);
}

double VelocityField::u_wrap(int i, int j) const {
    const int n = grid_.n;
    if (bc_ == BoundaryMode::Periodic) return u((i % n + n) % n, (j % n + n) % n);
    if (i < 0 || i > n) return 0.0;
    if (j < 0) return -u(i, 0);  // tangential reflection for the no-slip wall
    if (j >= n) return -u(i, n - 1);
    return u(i, j);
}

double VelocityField::v_wrap(int i, int j) const {
    const int n = grid_.n;
    if (bc_ == BoundaryMode::Periodic) return v((i % n + n) % n, (j % n + n) % n);
    if (j < 0 || j > n) return 0.0;
    if (i < 0) return -v(0, j);
    if (i >= n) return -v(n - 1, j);
    return v(i, j);
}

Vec2 VelocityField::sample(Vec2 x) const {
    const double h = grid_.h();
    // u lives at (i h, (j+1/2) h)
    const double ax = x[0] / h, ay = x[1] / h - 0.5;
    const int i0 = static_cast<int>(std::floor(ax)), j0 = static_cast<int>(std::floor(ay));
    const double fx = ax - i0, fy = ay - j0;
    const double us = (1 - fx) * (1 - fy) * u_wrap(i0, j0) + fx * (1 - fy) * u_wrap(i0 + 1, j0) +
                      (1 - fx) * fy * u_wrap(i0, j0 + 1) + fx * fy * u_wrap(i0 + 1, j0 + 1);
    const double bx = x[0] / h - 0.5, by = x[1] / h;
    const int i1 = static_cast<int>(std::floor(bx)), j1 = static_cast<int>(std::floor(by));
    const double gx = bx - i1, gy = by - j1;
    const double vs = (1 - gx) * (1 - gy) * v_wrap(i1, j1) + gx * (1 - gy) * v_wrap(i1 + 1, j1) +
                      (1 - gx) * gy * v_wrap(i1, j1 + 1) + gx * gy * v_wrap(i1 + 1, j1 + 1);
    return {us, vs};
}

double VelocityField::sample_p(Vec2 x) const {
    const double h = grid_.h();
    const int n = grid_.n;
    const double ax = x[0] / h - 0.5, ay = x[1] / h - 0.5;
    int i0 = static_cast<int>(std::floor(ax)), j0 = static_cast<int>(std::floor(ay));
    const double fx = ax - i0, fy = ay - j0;
    auto pv = [&](int i, int j) {
        if (bc_ == BoundaryMode::Periodic) return p((i % n + n) % n, (j % n + n) % n);
        return p(std::min(std::max(i, 0), n - 1), std::min(std::max(j, 0), n - 1));
    };
    return (1 - fx) * (1 - fy) * pv(i0, j0) + fx * (1 - fy) * pv(i0 + 1, j0) +
           (1 - fx) * fy * pv(i0, j0 + 1) + fx * fy * pv(i0 + 1, j0 + 1);
}

double VelocityField::divergence_max() const {
    const int n = grid_.n;
    const double h = grid_.h();
    double m = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double du = u_wrap(i + 1, j) - u_wrap(i, j);
            const double dv = v_wrap(i, j + 1) - v_wrap(i, j);
            m = std::max(m, std::abs((du + dv) / h));
        }
    return m;
}

double VelocityField::max_norm() const {
    double m = 0.0;
    for (double x : u_) m = std::max(m, std::abs(x));
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

double VelocityField::lq_norm(double q) const {
    const int n = grid_.n;
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double uc = 0.5 * (u_wrap(i, j) + u_wrap(i + 1, j));
            const double vc = 0.5 * (v_wrap(i, j) + v_wrap(i, j + 1));
            acc += std::pow(std::hypot(uc, vc), q);
        }
    return std::pow(acc * grid_.h() * grid_.h(), 1.0 / q);
}

double VelocityField::grad_norm_sq() const {
    const int n = grid_.n;
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double dux = u_wrap(i + 1, j) - u_wrap(i, j);
            const double duy = u_wrap(i, j + 1) - u_wrap(i, j);
            const double dvx = v_wrap(i + 1, j) - v_wrap(i, j);
            const double dvy = v_wrap(i, j + 1) - v_wrap(i, j);
            acc += dux * dux + duy * duy + dvx * dvx + dvy * dvy;
        }
    return acc;  // h^2 sum (d/h)^2 = plain sum of squared differences
}

void write_snapshot(std::ostream& os, const std::string& kind, const Grid2D& grid,
                    BoundaryMode bc, double time, const std::vector<double>& values) {
    os << "acstokes-grid v1\n"
       << kind << " " << grid.n << " " << grid.h() << " "
       << (bc == BoundaryMode::Periodic ? "periodic" : "dirichlet") << " " << time << " "
       << values.size() << "\n";
    os.write(reinterpret_cast<const char*>(values.data()),
             static_cast<std::streamsize>(values.size() * sizeof(double)));
}

std::vector<double> read_snapshot(std::istream& is, std::string& kind, Grid2D& grid,
                                  BoundaryMode& bc, double& time) {
    std::string magic, version, bcs;
    is >> magic >> version >> kind;
    if (magic != "acstokes-grid" || version != "v1")
        throw ConfigError("unrecognized snapshot header");
    double h = 0.0;
    size_t count = 0;
    is >> grid.n >> h >> bcs >> time >> count;
    bc = bcs == "periodic" ? BoundaryMode::Periodic : BoundaryMode::Dirichlet;
    is.get();  // newline
    std::vector<double> values(count);
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    return values;
}

void write_csv_slice(std::ostream& os, const PhaseField& f, int j) {
    os << "x,value\n";
    os.precision(17);
    for (int i = 0; i < f.grid().n; ++i) os << f.grid().center(i, j)[0] << "," << f.at(i, j) << "\n";
}

}  // namespace acstokes
