#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "acstokes/curve.hpp"

namespace acstokes {

enum class BoundaryMode { Periodic, Dirichlet };

/// Uniform grid of n x n cells on the unit box.
struct Grid2D {
    int n = 0;
    double h() const { return 1.0 / n; }
    Vec2 center(int i, int j) const { return {(i + 0.5) * h(), (j + 0.5) * h()}; }
    Vec2 u_face(int i, int j) const { return {i * h(), (j + 0.5) * h()}; }
    Vec2 v_face(int i, int j) const { return {(i + 0.5) * h(), j * h()}; }
    size_t cells() const { return static_cast<size_t>(n) * n; }
    size_t idx(int i, int j) const { return static_cast<size_t>(j) * n + i; }
    bool operator==(const Grid2D& o) const { return n == o.n; }
};

/// Cell-centered scalar field.
class PhaseField {
  public:
    PhaseField() = default;
    PhaseField(Grid2D grid, BoundaryMode bc, double fill = 0.0)
        : grid_(grid), bc_(bc), data_(grid.cells(), fill) {}

    const Grid2D& grid() const { return grid_; }
    BoundaryMode bc() const { return bc_; }
    double& at(int i, int j) { return data_[grid_.idx(i, j)]; }
    double at(int i, int j) const { return data_[grid_.idx(i, j)]; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    /// Value with periodic wrap or Dirichlet ghost (value boundary_value).
    double ghosted(int i, int j, double boundary_value = -1.0) const;

    double max_abs() const;
    double l2_norm() const;  // sqrt(h^2 sum c^2)

  private:
    Grid2D grid_;
    BoundaryMode bc_ = BoundaryMode::Periodic;
    std::vector<double> data_;
};

/// Face-normal force (same staggering as the velocity).
struct FaceField {
    std::vector<double> fu, fv;
};

/// MAC staggered velocity with cell-centered pressure.
/// Periodic: u and v are n x n. Dirichlet: u is (n+1) x n with the i = 0 and
/// i = n columns fixed to zero, v is n x (n+1) likewise.
class VelocityField {
  public:
    VelocityField() = default;
    VelocityField(Grid2D grid, BoundaryMode bc);

    const Grid2D& grid() const { return grid_; }
    BoundaryMode bc() const { return bc_; }

    int nu_x() const { return bc_ == BoundaryMode::Periodic ? grid_.n : grid_.n + 1; }
    int nv_y() const { return bc_ == BoundaryMode::Periodic ? grid_.n : grid_.n + 1; }

    double& u(int i, int j) { return u_[static_cast<size_t>(j) * nu_x() + i]; }
    double u(int i, int j) const { return u_[static_cast<size_t>(j) * nu_x() + i]; }
    double& v(int i, int j) { return v_[static_cast<size_t>(j) * grid_.n + i]; }
    double v(int i, int j) const { return v_[static_cast<size_t>(j) * grid_.n + i]; }
    double& p(int i, int j) { return p_[grid_.idx(i, j)]; }
    double p(int i, int j) const { return p_[grid_.idx(i, j)]; }

    std::vector<double>& u_data() { return u_; }
    std::vector<double>& v_data() { return v_; }
    std::vector<double>& p_data() { return p_; }
    const std::vector<double>& u_data() const { return u_; }
    const std::vector<double>& v_data() const { return v_; }
    const std::vector<double>& p_data() const { return p_; }

    /// u at face (i,j) with wrap/boundary handling (i may be n for periodic).
    double u_wrap(int i, int j) const;
    double v_wrap(int i, int j) const;

    /// Bilinear sample of each staggered component at a physical point.
    Vec2 sample(Vec2 x) const;
    double sample_p(Vec2 x) const;

    double divergence_max() const;
    double max_norm() const;
    /// sqrt(h^2 sum |v|^q)^(1/q) with components averaged to centers
    double lq_norm(double q) const;
    double grad_norm_sq() const;  // h^2 sum of squared forward differences

  private:
    Grid2D grid_;
    BoundaryMode bc_ = BoundaryMode::Periodic;
    std::vector<double> u_, v_, p_;
};

/// Binary snapshot with a text header (grid size, spacing, bc, time).
void write_snapshot(std::ostream& os, const std::string& kind, const Grid2D& grid,
                    BoundaryMode bc, double time, const std::vector<double>& values);
std::vector<double> read_snapshot(std::istream& is, std::string& kind, Grid2D& grid,
                                  BoundaryMode& bc, double& time);
/// CSV slice export (row j of a cell-centered field).
void write_csv_slice(std::ostream& os, const PhaseField& f, int j);

}  // namespace acstokes
