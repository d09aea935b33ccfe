#include "acstokes/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "acstokes/errors.hpp"

namespace acstokes {

namespace {

// Thomas algorithm; sub/sup have length n-1. Overwrites nothing.
std::vector<double> tridiag_solve(std::vector<double> sub, std::vector<double> diag,
                                  std::vector<double> sup, std::vector<double> rhs) {
    const size_t n = diag.size();
    for (size_t i = 1; i < n; ++i) {
        const double m = sub[i - 1] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
    return x;
}

double dot_h(const std::vector<double>& a, const std::vector<double>& b, double h) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * h;
}

// 16-point Gauss-Legendre on [a,b]
double gl16(const std::function<double(double)>& f, double a, double b) {
    static const double x[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                0.9445750230732326, 0.9894009349916499};
    static const double w[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                0.0622535239386479, 0.0271524594117541};
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += w[i] * (f(mid + half * x[i]) + f(mid - half * x[i]));
    return s * half;
}

struct LinearizedSystem {
    std::vector<double> sub, diag, sup;
};

// -u'' + q u with far-field Robin closure u' = -sign(rho) a (u - uinf) folded
// into the boundary rows via ghost elimination.
LinearizedSystem assemble(const std::vector<double>& q, double h, double a_minus, double a_plus,
                          double uinf_minus, double uinf_plus, std::vector<double>& rhs_correction) {
    const size_t m = q.size();
    LinearizedSystem S;
    S.sub.assign(m - 1, -1.0 / (h * h));
    S.sup.assign(m - 1, -1.0 / (h * h));
    S.diag.resize(m);
    for (size_t i = 0; i < m; ++i) S.diag[i] = 2.0 / (h * h) + q[i];
    rhs_correction.assign(m, 0.0);
    // left end: ghost u_{-1} = u_1 - 2 h a_minus (u_0 - uinf_minus)
    S.diag[0] = (2.0 + 2.0 * h * a_minus) / (h * h) + q[0];
    S.sup[0] = -2.0 / (h * h);
    rhs_correction[0] = 2.0 * a_minus * uinf_minus / h;
    // right end
    S.diag[m - 1] = (2.0 + 2.0 * h * a_plus) / (h * h) + q[m - 1];
    S.sub[m - 2] = -2.0 / (h * h);
    rhs_correction[m - 1] = 2.0 * a_plus * uinf_plus / h;
    return S;
}

// discrete kernel of the homogeneous operator by inverse iteration
std::vector<double> discrete_kernel(const LinearizedSystem& S, const std::vector<double>& start,
                                    double h) {
    std::vector<double> v = start;
    for (int it = 0; it < 3; ++it) {
        v = tridiag_solve(S.sub, S.diag, S.sup, v);
        const double nrm = std::sqrt(dot_h(v, v, h));
        for (auto& x : v) x /= nrm;
    }
    return v;
}

// cubic (4-point Lagrange) interpolation at midpoints of a uniform tabulation
std::vector<double> refine_midpoints(const std::vector<double>& v) {
    const size_t m = v.size();
    std::vector<double> out(2 * m - 1);
    for (size_t i = 0; i < m; ++i) out[2 * i] = v[i];
    for (size_t i = 0; i + 1 < m; ++i) {
        double val;
        if (i == 0)
            val = (5.0 * v[0] + 15.0 * v[1] - 5.0 * v[2] + v[3]) / 16.0;
        else if (i + 2 >= m)
            val = (5.0 * v[m - 1] + 15.0 * v[m - 2] - 5.0 * v[m - 3] + v[m - 4]) / 16.0;
        else
            val = (-v[i - 1] + 9.0 * v[i] + 9.0 * v[i + 1] - v[i + 2]) / 16.0;
        out[2 * i + 1] = val;
    }
    return out;
}

std::vector<double> solve_on_grid(const std::vector<double>& q, const std::vector<double>& g,
                                  const std::vector<double>& kernel, double h, double a_minus,
                                  double a_plus, double uinf_minus, double uinf_plus,
                                  size_t zero_index) {
    std::vector<double> corr;
    LinearizedSystem S = assemble(q, h, a_minus, a_plus, uinf_minus, uinf_plus, corr);
    std::vector<double> rhs = g;
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] += corr[i];
    // project the right side off the discrete kernel
    const double proj = dot_h(rhs, kernel, h) / dot_h(kernel, kernel, h);
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] -= proj * kernel[i];
    std::vector<double> u = tridiag_solve(S.sub, S.diag, S.sup, rhs);
    // pin u(0) = 0 by removing the kernel multiple
    const double c = u[zero_index] / kernel[zero_index];
    for (size_t i = 0; i < u.size(); ++i) u[i] -= c * kernel[i];
    return u;
}

}  // namespace

DoubleWell DoubleWell::quartic() {
    DoubleWell w;
    w.f = [](double s) { return 0.125 * (1.0 - s * s) * (1.0 - s * s); };
    w.df = [](double s) { return 0.5 * (s * s * s - s); };
    w.ddf = [](double s) { return 0.5 * (3.0 * s * s - 1.0); };
    w.dddf = [](double s) { return 3.0 * s; };
    return w;
}

double DoubleWell::decay_rate() const {
    return std::sqrt(std::min(ddf(-1.0), ddf(1.0)));
}

void DoubleWell::validate() const {
    if (std::abs(df(1.0)) > 1e-12 || std::abs(df(-1.0)) > 1e-12)
        throw NotADoubleWell("f'(+-1) must vanish");
    if (ddf(1.0) <= 0.0 || ddf(-1.0) <= 0.0) throw NotADoubleWell("f''(+-1) must be positive");
    for (int i = 0; i <= 200; ++i) {
        const double s = -1.0 + 2.0 * i / 200.0;
        if (std::abs(f(s) - f(-s)) > 1e-12 * (1.0 + std::abs(f(s))))
            throw NotADoubleWell("f must be even");
        if (i > 0 && i < 200 && f(s) <= 0.0)
            throw NotADoubleWell("f must be positive on (-1,1)");
    }
}

OptimalProfile optimal_profile(const DoubleWell& well, double L, int n) {
    well.validate();
    if (n % 2 != 0) ++n;
    OptimalProfile P;
    P.well = well;
    P.L = L;
    P.n = n;
    P.alpha = well.decay_rate();
    const int m = n + 1;
    const double h = 2.0 * L / n;
    P.rho.resize(m);
    for (int i = 0; i < m; ++i) P.rho[i] = -L + i * h;
    P.theta.resize(m);
    P.dtheta.resize(m);
    P.ddtheta.resize(m);

    // the default quartic well has theta0 = tanh(rho/2)
    const DoubleWell q = DoubleWell::quartic();
    bool is_default = true;
    for (int i = 0; i <= 16; ++i) {
        const double s = -1.5 + 3.0 * i / 16.0;
        if (std::abs(well.f(s) - q.f(s)) > 1e-14 * (1.0 + std::abs(q.f(s)))) {
            is_default = false;
            break;
        }
    }
    P.closed_form = is_default;

    if (is_default) {
        for (int i = 0; i < m; ++i) {
            const double t = std::tanh(0.5 * P.rho[i]);
            P.theta[i] = t;
            P.dtheta[i] = 0.5 * (1.0 - t * t);
            P.ddtheta[i] = 0.5 * (t * t * t - t);
        }
    } else {
        // invert rho(theta) = int_0^theta ds / sqrt(2 f) incrementally
        const int i0 = n / 2;
        P.theta[i0] = 0.0;
        double th = 0.0;
        auto speed = [&](double s) {
            const double v = 2.0 * well.f(s);
            if (!(v > 0.0)) throw NonIntegrable("sqrt(2f) vanished away from the wells");
            return 1.0 / std::sqrt(v);
        };
        double rho_acc = 0.0;
        for (int i = i0 + 1; i < m; ++i) {
            const double target = P.rho[i];
            if (1.0 - th < 1e-13) {
                P.theta[i] = 1.0;
                continue;
            }
            // Newton on rho(theta) - target with incremental quadrature
            double lo = th, hi = 1.0 - 1e-16;
            double t_new = th + (target - rho_acc) * std::sqrt(2.0 * well.f(th));
            t_new = std::clamp(t_new, lo, hi);
            for (int it = 0; it < 80; ++it) {
                const double r_new = rho_acc + gl16(speed, th, t_new);
                const double err = r_new - target;
                if (err > 0)
                    hi = t_new;
                else
                    lo = t_new;
                if (std::abs(err) < 1e-14 * (1.0 + std::abs(target))) break;
                double step = -err * std::sqrt(std::max(2.0 * well.f(t_new), 1e-300));
                double cand = t_new + step;
                if (cand <= lo || cand >= hi) cand = 0.5 * (lo + hi);
                t_new = cand;
            }
            rho_acc += gl16(speed, th, t_new);
            th = t_new;
            P.theta[i] = th;
        }
        for (int i = 0; i < i0; ++i) P.theta[i] = -P.theta[n - i];  // odd symmetry
        for (int i = 0; i < m; ++i) {
            P.dtheta[i] = std::sqrt(std::max(2.0 * well.f(P.theta[i]), 0.0));
            P.ddtheta[i] = well.df(P.theta[i]);
        }
    }

    // sigma and eta by trapezoid on the grid (integrand decays like e^{-2 alpha L})
    {
        double sigma = 0.0;
        for (int i = 0; i < m; ++i) {
            const double w = (i == 0 || i == m - 1) ? 0.5 : 1.0;
            sigma += w * P.dtheta[i] * P.dtheta[i];
        }
        P.sigma = sigma * h;
        P.eta.resize(m);
        std::vector<double> g(m);
        for (int i = 0; i < m; ++i) g[i] = P.dtheta[i] * P.dtheta[i];
        double acc = 0.0;
        P.eta[0] = -1.0;
        for (int i = 1; i < m; ++i) {
            if (i >= 2 && i + 1 < m)  // fourth-order corrected trapezoid
                acc += h / 24.0 * (-g[i - 2] + 13.0 * g[i - 1] + 13.0 * g[i] - g[i + 1]);
            else
                acc += 0.5 * h * (g[i - 1] + g[i]);
            P.eta[i] = -1.0 + 2.0 * acc / P.sigma;
        }
    }
    return P;
}

namespace {
// 4-point Lagrange interpolation on the uniform table (clamped at the ends)
double lerp_table(const std::vector<double>& rho, const std::vector<double>& v, double r,
                  double left, double right) {
    if (r <= rho.front()) return left;
    if (r >= rho.back()) return right;
    const double h = rho[1] - rho[0];
    const double t = (r - rho.front()) / h;
    size_t i = std::min(static_cast<size_t>(t), rho.size() - 2);
    if (i == 0) i = 1;
    if (i + 2 >= rho.size()) i = rho.size() - 3;
    const double f = t - static_cast<double>(i);  // in [-1, 2] near the ends
    const double vm = v[i - 1], v0 = v[i], v1 = v[i + 1], v2 = v[i + 2];
    return vm * (-f * (f - 1.0) * (f - 2.0) / 6.0) + v0 * ((f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0) +
           v1 * (-(f + 1.0) * f * (f - 2.0) / 2.0) + v2 * ((f + 1.0) * f * (f - 1.0) / 6.0);
}
}  // namespace

double OptimalProfile::theta_at(double r) const { return lerp_table(rho, theta, r, -1.0, 1.0); }
double OptimalProfile::dtheta_at(double r) const { return lerp_table(rho, dtheta, r, 0.0, 0.0); }
double OptimalProfile::ddtheta_at(double r) const { return lerp_table(rho, ddtheta, r, 0.0, 0.0); }
double OptimalProfile::eta_at(double r) const { return lerp_table(rho, eta, r, -1.0, 1.0); }

double OptimalProfile::integrate(const std::vector<double>& values) const {
    const double h = spacing();
    double s = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
        s += w * values[i];
    }
    return s * h;
}

void OptimalProfile::write_csv(std::ostream& os) const {
    os << "rho,theta,dtheta,ddtheta,eta\n";
    os.precision(17);
    for (size_t i = 0; i < rho.size(); ++i)
        os << rho[i] << "," << theta[i] << "," << dtheta[i] << "," << ddtheta[i] << "," << eta[i]
           << "\n";
}

std::vector<double> solve_linearized(const std::vector<double>& g, const OptimalProfile& P,
                                     double tol_compat_rel) {
    const size_t m = P.rho.size();
    if (g.size() != m) throw GridMismatch("solve_linearized: rhs not on the profile grid");
    const double h = P.spacing();

    const double compat = dot_h(g, P.dtheta, h);
    const double tol =
        tol_compat_rel * std::sqrt(dot_h(g, g, h)) * std::sqrt(dot_h(P.dtheta, P.dtheta, h));
    if (std::abs(compat) > std::max(tol, 1e-300)) throw IncompatibleRHS(compat);

    const double ap = std::sqrt(P.well.ddf(1.0)), am = std::sqrt(P.well.ddf(-1.0));
    const double uinf_p = g.back() / P.well.ddf(1.0), uinf_m = g.front() / P.well.ddf(-1.0);

    // coarse solve
    std::vector<double> q(m);
    for (size_t i = 0; i < m; ++i) q[i] = P.well.ddf(P.theta[i]);
    std::vector<double> dummy;
    LinearizedSystem Sc = assemble(q, h, am, ap, uinf_m, uinf_p, dummy);
    std::vector<double> kern_c = discrete_kernel(Sc, P.dtheta, h);
    const size_t i0 = static_cast<size_t>(P.index_of_zero());
    std::vector<double> uc = solve_on_grid(q, g, kern_c, h, am, ap, uinf_m, uinf_p, i0);

    // fine solve on midpoint-refined grid, then Richardson
    std::vector<double> theta_f;
    if (P.closed_form) {
        theta_f.resize(2 * m - 1);
        for (size_t i = 0; i < theta_f.size(); ++i)
            theta_f[i] = std::tanh(0.5 * (P.rho.front() + 0.5 * h * i));
    } else {
        theta_f = refine_midpoints(P.theta);
    }
    std::vector<double> qf(theta_f.size());
    for (size_t i = 0; i < qf.size(); ++i) qf[i] = P.well.ddf(theta_f[i]);
    std::vector<double> gf = refine_midpoints(g);
    std::vector<double> dthf(theta_f.size());
    for (size_t i = 0; i < dthf.size(); ++i)
        dthf[i] = std::sqrt(std::max(2.0 * P.well.f(theta_f[i]), 0.0));
    LinearizedSystem Sf = assemble(qf, 0.5 * h, am, ap, uinf_m, uinf_p, dummy);
    std::vector<double> kern_f = discrete_kernel(Sf, dthf, 0.5 * h);
    std::vector<double> uf =
        solve_on_grid(qf, gf, kern_f, 0.5 * h, am, ap, uinf_m, uinf_p, 2 * i0);

    std::vector<double> u(m);
    for (size_t i = 0; i < m; ++i) u[i] = (4.0 * uf[2 * i] - uc[i]) / 3.0;
    return u;
}

std::vector<std::vector<double>> c2_hat(const std::vector<double>& grad_h1_sq,
                                        const std::vector<double>& kappa1,
                                        const std::vector<double>& div_tau_v,
                                        const OptimalProfile& P) {
    const size_t ns = grad_h1_sq.size();
    if (kappa1.size() != ns || div_tau_v.size() != ns)
        throw GridMismatch("c2_hat: inputs not on a common s-grid");
    const size_t m = P.rho.size();
    std::vector<std::vector<double>> out(ns);
    std::vector<double> rhs(m);
    for (size_t j = 0; j < ns; ++j) {
        const double coef = kappa1[j] - div_tau_v[j];
        for (size_t i = 0; i < m; ++i)
            rhs[i] = grad_h1_sq[j] * P.ddtheta[i] - P.rho[i] * P.dtheta[i] * coef;
        out[j] = solve_linearized(rhs, P);
    }
    return out;
}

namespace {

// symmetric tridiagonal operator -D2 + q with homogeneous Dirichlet ends
struct SymTri {
    std::vector<double> diag;
    double off;
};

SymTri assemble_dirichlet(const std::vector<double>& q, double h) {
    SymTri T;
    T.off = -1.0 / (h * h);
    T.diag.resize(q.size());
    for (size_t i = 0; i < q.size(); ++i) T.diag[i] = 2.0 / (h * h) + q[i];
    return T;
}

std::vector<double> shifted_solve(const SymTri& T, double shift, const std::vector<double>& rhs) {
    const size_t n = T.diag.size();
    std::vector<double> sub(n - 1, T.off), sup(n - 1, T.off), diag(n);
    for (size_t i = 0; i < n; ++i) diag[i] = T.diag[i] - shift;
    return tridiag_solve(sub, diag, sup, rhs);
}

struct LanczosResult {
    std::vector<double> values;                // eigenvalues of the ORIGINAL operator
    std::vector<std::vector<double>> vectors;  // normalized
};

// shift-invert Lanczos with full reorthogonalization
LanczosResult lanczos_smallest(const SymTri& T, double shift, int want, int krylov) {
    const size_t n = T.diag.size();
    std::vector<std::vector<double>> V;
    std::vector<double> alpha, beta;
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) v[i] = std::sin(0.37 * (i + 1)) + 1e-3;  // fixed seed vector
    {
        double nrm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        for (auto& x : v) x /= nrm;
    }
    V.push_back(v);
    std::vector<double> w;
    for (int j = 0; j < krylov; ++j) {
        w = shifted_solve(T, shift, V[j]);
        double a = std::inner_product(w.begin(), w.end(), V[j].begin(), 0.0);
        alpha.push_back(a);
        for (size_t i = 0; i < n; ++i) w[i] -= a * V[j][i];
        if (j > 0)
            for (size_t i = 0; i < n; ++i) w[i] -= beta[j - 1] * V[j - 1][i];
        for (const auto& u : V) {  // full reorthogonalization
            double c = std::inner_product(w.begin(), w.end(), u.begin(), 0.0);
            for (size_t i = 0; i < n; ++i) w[i] -= c * u[i];
        }
        double b = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
        if (b < 1e-14) break;
        beta.push_back(b);
        for (auto& x : w) x /= b;
        V.push_back(w);
    }
    const int mK = static_cast<int>(alpha.size());
    if (mK < want) throw NoConvergence("Lanczos breakdown before reaching requested count");

    // eigen-decomposition of the small tridiagonal by Jacobi on the dense form
    std::vector<std::vector<double>> A(mK, std::vector<double>(mK, 0.0));
    for (int i = 0; i < mK; ++i) {
        A[i][i] = alpha[i];
        if (i + 1 < mK) A[i][i + 1] = A[i + 1][i] = beta[i];
    }
    std::vector<std::vector<double>> Q(mK, std::vector<double>(mK, 0.0));
    for (int i = 0; i < mK; ++i) Q[i][i] = 1.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double offmax = 0.0;
        for (int p = 0; p < mK; ++p)
            for (int r = p + 1; r < mK; ++r) offmax = std::max(offmax, std::abs(A[p][r]));
        if (offmax < 1e-14) break;
        for (int p = 0; p < mK; ++p) {
            for (int r = p + 1; r < mK; ++r) {
                if (std::abs(A[p][r]) < 1e-18) continue;
                const double t = 0.5 * (A[r][r] - A[p][p]) / A[p][r];
                const double sgn = t >= 0 ? 1.0 : -1.0;
                const double tan_ = sgn / (std::abs(t) + std::sqrt(1.0 + t * t));
                const double c = 1.0 / std::sqrt(1.0 + tan_ * tan_), s = tan_ * c;
                for (int i = 0; i < mK; ++i) {
                    const double aip = A[i][p], air = A[i][r];
                    A[i][p] = c * aip - s * air;
                    A[i][r] = s * aip + c * air;
                }
                for (int i = 0; i < mK; ++i) {
                    const double api = A[p][i], ari = A[r][i];
                    A[p][i] = c * api - s * ari;
                    A[r][i] = s * api + c * ari;
                }
                for (int i = 0; i < mK; ++i) {
                    const double qip = Q[i][p], qir = Q[i][r];
                    Q[i][p] = c * qip - s * qir;
                    Q[i][r] = s * qip + c * qir;
                }
            }
        }
    }
    // invert back: eigenvalue of T = shift + 1/nu, nu = Ritz value of (T-shift)^{-1}
    std::vector<int> order(mK);
    for (int i = 0; i < mK; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return A[a][a] > A[b][b]; });

    LanczosResult R;
    for (int t = 0; t < want; ++t) {
        const int idx = order[t];
        const double nu = A[idx][idx];
        if (std::abs(nu) < 1e-300) throw NoConvergence("shift-invert Ritz value vanished");
        R.values.push_back(shift + 1.0 / nu);
        std::vector<double> vec(n, 0.0);
        for (int j = 0; j < mK; ++j)
            for (size_t i = 0; i < n; ++i) vec[i] += Q[j][idx] * V[j][i];
        double nrm = std::sqrt(std::inner_product(vec.begin(), vec.end(), vec.begin(), 0.0));
        for (auto& x : vec) x /= nrm;
        R.vectors.push_back(std::move(vec));
    }
    return R;
}

}  // namespace

std::vector<EigenPair> spectrum_L(const OptimalProfile& P, int k) {
    if (k < 1 || k > 10) throw ConfigError("spectrum_L: k must lie in [1, 10]");
    const size_t m = P.rho.size();
    const double h = P.spacing();

    std::vector<double> q(m);
    for (size_t i = 0; i < m; ++i) q[i] = P.well.ddf(P.theta[i]);
    SymTri Tc = assemble_dirichlet(q, h);

    std::vector<double> theta_f;
    if (P.closed_form) {
        theta_f.resize(2 * m - 1);
        for (size_t i = 0; i < theta_f.size(); ++i)
            theta_f[i] = std::tanh(0.5 * (P.rho.front() + 0.5 * h * i));
    } else {
        theta_f = refine_midpoints(P.theta);
    }
    std::vector<double> qf(theta_f.size());
    for (size_t i = 0; i < qf.size(); ++i) qf[i] = P.well.ddf(theta_f[i]);
    SymTri Tf = assemble_dirichlet(qf, 0.5 * h);

    const double shift = -0.5 - 0.5 * std::abs(P.well.ddf(0.0));
    const int krylov = std::max(40, 4 * k);
    LanczosResult Rc = lanczos_smallest(Tc, shift, k, krylov);
    LanczosResult Rf = lanczos_smallest(Tf, shift, k, krylov);

    std::vector<EigenPair> out(static_cast<size_t>(k));
    for (int t = 0; t < k; ++t) {
        out[t].value = (4.0 * Rf.values[t] - Rc.values[t]) / 3.0;
        // return the fine eigenvector restricted to the profile grid
        std::vector<double> vec(m);
        for (size_t i = 0; i < m; ++i) vec[i] = Rf.vectors[t][2 * i];
        double nrm = std::sqrt(dot_h(vec, vec, h));
        const size_t peak = static_cast<size_t>(P.index_of_zero());
        if (vec[peak] < 0.0) nrm = -nrm;  // sign convention: positive at rho = 0
        for (auto& x : vec) x /= nrm;
        out[t].vector = std::move(vec);
    }
    return out;
}

}  // namespace acstokes
