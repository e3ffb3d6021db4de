#include "stablecones/grid_solver.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stablecones {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

// Normalizing constant of the 1-d fractional Laplacian kernel
// nu(z) = c |z|^{-1-alpha}.
double frac_lap_const(double alpha) {
    return alpha * std::pow(2.0, alpha - 1.0) * std::tgamma(0.5 * (alpha + 1.0)) /
           (std::sqrt(kPi) * std::tgamma(1.0 - 0.5 * alpha));
}

// Kernel moments int_{r1}^{r2} z^{-1-alpha} dz and int z^{-alpha} dz.
double mom0(double alpha, double r1, double r2) {
    return (std::pow(r1, -alpha) - std::pow(r2, -alpha)) / alpha;
}
double mom1(double alpha, double r1, double r2) {
    if (alpha == 1.0) return std::log(r2 / r1);
    return (std::pow(r1, 1.0 - alpha) - std::pow(r2, 1.0 - alpha)) / (alpha - 1.0);
}

struct OperatorWeights {
    std::vector<double> lambda; // lambda[k], k >= 1; hat weights
    double kappa_h2 = 0.0;      // singular-cell coefficient / h^2
    double total_one_side = 0.0;
};

OperatorWeights hat_weights(double alpha, double h, long kmax) {
    OperatorWeights w;
    const double c = frac_lap_const(alpha);
    w.lambda.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
    // k = 1: only the right half of the hat lies in |z| >= h.
    w.lambda[1] = c / h * (2.0 * h * mom0(alpha, h, 2.0 * h) - mom1(alpha, h, 2.0 * h));
    for (long k = 2; k <= kmax; ++k) {
        const double l1 = (k - 1) * h, l2 = k * h, l3 = (k + 1) * h;
        w.lambda[static_cast<std::size_t>(k)] =
            c / h * (mom1(alpha, l1, l2) - l1 * mom0(alpha, l1, l2) +
                     l3 * mom0(alpha, l2, l3) - mom1(alpha, l2, l3));
    }
    w.kappa_h2 = c * std::pow(h, 2.0 - alpha) / (2.0 - alpha) / (h * h);
    w.total_one_side = c * std::pow(h, -alpha) / alpha;
    return w;
}

} // namespace

std::size_t Grid1D::nearest(double x) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), x);
    if (it == nodes.begin()) return 0;
    if (it == nodes.end()) return nodes.size() - 1;
    const std::size_t i = static_cast<std::size_t>(it - nodes.begin());
    return (x - nodes[i - 1] <= nodes[i] - x) ? i - 1 : i;
}

Grid1D make_grid(const ConeSpec& cone, double R, double h) {
    if (cone.kind != ConeKind::HalfLine && cone.kind != ConeKind::PuncturedLine)
        throw std::invalid_argument("grid solver supports the half-line and the punctured line");
    if (!(h > 0.0) || !(R > h))
        throw std::invalid_argument("need 0 < h < R");
    const double ratio = R / h;
    const long n = std::lround(ratio);
    if (std::fabs(ratio - static_cast<double>(n)) > 1e-9)
        throw std::invalid_argument("R/h must be an integer");

    Grid1D g;
    g.cone = cone;
    g.R = R;
    g.h = h;
    g.weight = h;
    if (cone.kind == ConeKind::PuncturedLine) {
        for (long i = -(n - 1); i <= n - 1; ++i) {
            if (i == 0) continue; // the puncture is a killed site
            g.lattice.push_back(i);
            g.nodes.push_back(static_cast<double>(i) * h);
        }
    } else {
        for (long i = 1; i <= n - 1; ++i) {
            g.lattice.push_back(i);
            g.nodes.push_back(static_cast<double>(i) * h);
        }
    }
    return g;
}

namespace {

// The Martin kernel is not C^2 at the vertex, so the Taylor treatment of
// the singular cell leaves a residual (A M)_i on the near-vertex rows,
// which shows up as a spurious drift of the conserved functional int u M
// and as a boundary layer in near-vertex survival. Fit the local kill
// rate instead: a diagonal adjustment A_ii -> A_ii - (A M)_i / M_i makes
// M exactly harmonic on the fitted rows, the way it is for the continuum
// operator. Symmetry and the off-diagonal sign pattern are untouched; the
// row sum moves by the same small amount, and the fit stops rather than
// turn a row sum nonnegative. Rows beyond |x| = 1 are left alone; there
// (A M) is dominated by the genuine truncation kill.
void fit_vertex_rows(Eigen::MatrixXd& A, const Grid1D& grid) {
    const auto beta_opt = beta_of(grid.cone);
    if (!beta_opt) return;
    const double beta = *beta_opt;
    const long n = static_cast<long>(A.rows());
    Eigen::VectorXd M(n);
    for (long i = 0; i < n; ++i)
        M(i) = std::pow(std::fabs(grid.nodes[static_cast<std::size_t>(i)]), beta);
    const Eigen::VectorXd r = A * M;
    const Eigen::VectorXd rowsum = A.rowwise().sum();
    const double x_fit = std::min(1.0, 0.25 * grid.R);
    for (long i = 0; i < n; ++i) {
        if (std::fabs(grid.nodes[static_cast<std::size_t>(i)]) > x_fit) continue;
        const double delta = -r(i) / M(i);
        if (rowsum(i) + delta >= 0.0 || A(i, i) + delta >= 0.0) continue;
        A(i, i) += delta;
    }
}

} // namespace

Eigen::MatrixXd build_operator(double alpha, const Grid1D& grid) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("alpha must lie in (0,2)");
    const long n = static_cast<long>(grid.size());
    const long span = grid.lattice.back() - grid.lattice.front();
    const OperatorWeights w = hat_weights(alpha, grid.h, span);

    Eigen::MatrixXd A(n, n);
    const double diag = -(2.0 * w.total_one_side + 2.0 * w.kappa_h2);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            if (i == j) {
                A(i, j) = diag;
            } else {
                const long k = std::labs(grid.lattice[static_cast<std::size_t>(i)] -
                                         grid.lattice[static_cast<std::size_t>(j)]);
                A(i, j) = w.lambda[static_cast<std::size_t>(k)] + (k == 1 ? w.kappa_h2 : 0.0);
            }
        }
    }
    fit_vertex_rows(A, grid);
    return A;
}

Eigen::VectorXd apply_operator(double alpha, const Grid1D& grid, const Eigen::VectorXd& u) {
    const long n = static_cast<long>(grid.size());
    if (u.size() != n) throw std::invalid_argument("size mismatch");
    const long span = grid.lattice.back() - grid.lattice.front();
    const OperatorWeights w = hat_weights(alpha, grid.h, span);
    const double diag = -(2.0 * w.total_one_side + 2.0 * w.kappa_h2);
    Eigen::VectorXd out(n);
    for (long i = 0; i < n; ++i) {
        double acc = diag * u(i);
        const long li = grid.lattice[static_cast<std::size_t>(i)];
        for (long j = 0; j < n; ++j) {
            if (j == i) continue;
            const long k = std::labs(li - grid.lattice[static_cast<std::size_t>(j)]);
            acc += (w.lambda[static_cast<std::size_t>(k)] + (k == 1 ? w.kappa_h2 : 0.0)) * u(j);
        }
        out(i) = acc;
    }
    return out;
}

Spectrum::Spectrum(const Eigen::MatrixXd& A, Grid1D grid, double alpha)
    : grid_(std::move(grid)), alpha_(alpha) {
    const lapack_int n = static_cast<lapack_int>(A.rows());
    V_ = A;
    lam_.resize(n);
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, V_.data(), n, lam_.data());
    if (info != 0) throw std::runtime_error("eigendecomposition failed (dsyevd)");
}

Eigen::VectorXd Spectrum::apply(double t, const Eigen::VectorXd& f) const {
    Eigen::VectorXd c = V_.transpose() * f;
    c.array() *= (t * lam_.array()).exp();
    return V_ * c;
}

Eigen::MatrixXd Spectrum::propagator(double t) const {
    Eigen::MatrixXd E = V_ * (t * lam_.array()).exp().matrix().asDiagonal();
    Eigen::MatrixXd P = E * V_.transpose();
    P = 0.5 * (P + P.transpose()).eval();
    return P;
}

GridKernel Spectrum::kernel(double t) const {
    if (t < std::pow(grid_.h, alpha_))
        throw std::invalid_argument("kernel time below the grid resolution limit h^alpha");
    GridKernel k;
    k.K = propagator(t) / grid_.weight;
    k.t = t;
    k.grid = grid_;
    // Rounding can leave tiny negative entries where the kernel vanishes.
    const double floor = -1e-12 * k.K.maxCoeff();
    if (k.K.minCoeff() < floor)
        throw std::runtime_error("heat kernel has significantly negative entries");
    k.K = k.K.cwiseMax(0.0);
    return k;
}

Eigen::VectorXd Spectrum::survival(double t) const {
    return apply(t, Eigen::VectorXd::Ones(static_cast<long>(grid_.size())));
}

Eigen::VectorXd expm_taylor_apply(const Eigen::MatrixXd& A, double t, Eigen::VectorXd v) {
    const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
    const int s = std::max(1, static_cast<int>(std::ceil(2.0 * t * norm1)));
    const double dt = t / s;
    for (int step = 0; step < s; ++step) {
        Eigen::VectorXd term = v;
        Eigen::VectorXd acc = v;
        for (int j = 1; j <= 24; ++j) {
            term = (A * term) * (dt / j);
            acc += term;
            if (term.lpNorm<Eigen::Infinity>() < 1e-18 * acc.lpNorm<Eigen::Infinity>()) break;
        }
        v = acc;
    }
    return v;
}

Eigen::VectorXd martin_on_grid(const MartinKernel& M, const Grid1D& grid) {
    Eigen::VectorXd m(static_cast<long>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i)
        m(static_cast<long>(i)) = M(std::span<const double>(&grid.nodes[i], 1));
    return m;
}

Eigen::MatrixXd rho_kernel(const GridKernel& kernel, const Eigen::VectorXd& M,
                           std::vector<std::size_t>* flagged) {
    const long n = kernel.K.rows();
    if (M.size() != n) throw std::invalid_argument("size mismatch");
    Eigen::VectorXd inv(n);
    for (long i = 0; i < n; ++i) {
        if (M(i) < 1e-12) {
            if (flagged) flagged->push_back(static_cast<std::size_t>(i));
            inv(i) = 0.0; // degenerate near the vertex; handled by limits
        } else {
            inv(i) = 1.0 / M(i);
        }
    }
    return inv.asDiagonal() * kernel.K * inv.asDiagonal();
}

namespace {

// Interpolation brackets for the contracted argument c*x_i, staying on the
// same side of a punctured grid and clamping toward the vertex (rho has a
// continuous vertex limit).
struct Bracket {
    std::size_t lo, hi;
    double frac;
};

Bracket contract_bracket(const Grid1D& grid, double cx) {
    const auto& xs = grid.nodes;
    const auto it = std::lower_bound(xs.begin(), xs.end(), cx);
    if (it == xs.begin()) return {0, 0, 0.0};
    if (it == xs.end()) return {xs.size() - 1, xs.size() - 1, 0.0};
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    std::size_t lo = hi - 1;
    // Do not interpolate across the puncture.
    if (grid.cone.kind == ConeKind::PuncturedLine && xs[lo] < 0.0 && xs[hi] > 0.0) {
        return cx < 0.0 ? Bracket{lo, lo, 0.0} : Bracket{hi, hi, 0.0};
    }
    const double f = (cx - xs[lo]) / (xs[hi] - xs[lo]);
    return {lo, hi, f};
}

} // namespace

StationaryResult ou_stationary(const Spectrum& spectrum, const Eigen::VectorXd& M,
                               const Eigen::VectorXd& initial, const StationaryOptions& opts) {
    const Grid1D& grid = spectrum.grid();
    const long n = static_cast<long>(grid.size());
    if (M.size() != n || initial.size() != n) throw std::invalid_argument("size mismatch");

    const double s0 = 1.0 - std::exp(-opts.t0);
    const double contract = std::exp(-opts.t0 / spectrum.alpha());

    GridKernel K = spectrum.kernel(s0);
    Eigen::MatrixXd rho = rho_kernel(K, M);

    // Interpolation operator for the contracted first argument.
    std::vector<Bracket> br(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i)
        br[static_cast<std::size_t>(i)] = contract_bracket(grid, contract * grid.nodes[static_cast<std::size_t>(i)]);

    const Eigen::ArrayXd m2w = M.array().square() * grid.weight;
    auto step = [&](const Eigen::VectorXd& phi) {
        // g = interp^T (M^2 w phi); phi' = rho g.
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        for (long i = 0; i < n; ++i) {
            const Bracket& b = br[static_cast<std::size_t>(i)];
            const double v = m2w(i) * phi(i);
            g(static_cast<long>(b.lo)) += (1.0 - b.frac) * v;
            if (b.hi != b.lo) g(static_cast<long>(b.hi)) += b.frac * v;
        }
        Eigen::VectorXd out = rho * g;
        const double mass = (out.array() * m2w).sum();
        if (!(mass > 0.0)) throw std::runtime_error("stationary iteration lost all mass");
        return Eigen::VectorXd(out / mass);
    };

    Eigen::VectorXd phi = initial;
    const double mass0 = (phi.array() * m2w).sum();
    if (!(mass0 > 0.0)) throw std::invalid_argument("initial density must have positive mass");
    phi /= mass0;

    StationaryResult res;
    double residual = std::numeric_limits<double>::infinity();
    double prev_residual = residual;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        Eigen::VectorXd next = step(phi);
        residual = ((next - phi).array().abs() * m2w).sum();
        phi = next;
        if (residual < opts.tol) break;
        if (it > 50 && residual > 0.999 * prev_residual && residual > 100 * opts.tol)
            throw std::runtime_error("stationary iteration stagnated before reaching tolerance");
        prev_residual = residual;
    }
    res.phi = phi;
    res.residual = residual;
    res.iterations = it + 1;
    res.converged = residual < opts.tol;
    return res;
}

Eigen::VectorXd initial_uniform_ball(const Grid1D& grid, const Eigen::VectorXd& M) {
    const long n = static_cast<long>(grid.size());
    Eigen::VectorXd f(n);
    for (long i = 0; i < n; ++i)
        f(i) = std::fabs(grid.nodes[static_cast<std::size_t>(i)]) <= 1.0 ? 1.0 : 0.0;
    const double mass = (f.array() * M.array().square()).sum() * grid.weight;
    return f / mass;
}

Eigen::VectorXd initial_triangular(const Grid1D& grid, const Eigen::VectorXd& M) {
    const long n = static_cast<long>(grid.size());
    Eigen::VectorXd f(n);
    for (long i = 0; i < n; ++i) {
        const double a = std::fabs(grid.nodes[static_cast<std::size_t>(i)]);
        f(i) = a < 2.0 ? 1.0 - 0.5 * a : 0.0;
    }
    const double mass = (f.array() * M.array().square()).sum() * grid.weight;
    return f / mass;
}

PhiInterp::PhiInterp(Grid1D grid, Eigen::VectorXd phi)
    : grid_(std::move(grid)), phi_(std::move(phi)) {
    if (phi_.size() != static_cast<long>(grid_.size()))
        throw std::invalid_argument("size mismatch");
}

PhiInterp PhiInterp::with_tail(double p) const {
    PhiInterp out = *this;
    out.tail_exp_ = p;
    return out;
}

double PhiInterp::operator()(double x) const {
    const auto& xs = grid_.nodes;
    if (x < xs.front() - grid_.h || x > xs.back() + grid_.h) {
        if (tail_exp_ > 0.0) {
            const double edge = x > 0.0 ? xs.back() : xs.front();
            const long i = x > 0.0 ? static_cast<long>(xs.size()) - 1 : 0;
            return phi_(i) * std::pow(std::fabs(x) / std::fabs(edge), -tail_exp_);
        }
        throw std::out_of_range("argument outside the truncated grid");
    }
    const auto it = std::lower_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return phi_(0);
    if (it == xs.end()) return phi_(static_cast<long>(xs.size()) - 1);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    if (grid_.cone.kind == ConeKind::PuncturedLine && xs[lo] < 0.0 && xs[hi] > 0.0) {
        // Clamp to the same-side node across the puncture gap.
        return x < 0.0 ? phi_(static_cast<long>(lo)) : phi_(static_cast<long>(hi));
    }
    const double f = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return phi_(static_cast<long>(lo)) * (1.0 - f) + phi_(static_cast<long>(hi)) * f;
}

EntranceLaw::EntranceLaw(PhiInterp phi, MartinKernel M, double beta, double scale)
    : phi_(std::move(phi)), M_(std::move(M)), beta_(beta), scale_(scale) {}

double EntranceLaw::operator()(double t, double x) const {
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    const double alpha = M_.cone().alpha;
    const double arg = std::pow(t, -1.0 / alpha) * x;
    const double m = M_(std::span<const double>(&x, 1));
    if (m == 0.0) return 0.0;
    return scale_ * std::pow(t, -(1.0 + 2.0 * beta_) / alpha) * phi_(arg) * m;
}

std::pair<double, Eigen::VectorXd> c1_and_mu(const Eigen::VectorXd& phi,
                                             const Eigen::VectorXd& M, const Grid1D& grid) {
    const double c1 = (phi.array() * M.array()).sum() * grid.weight;
    if (!(c1 > 0.0)) throw std::runtime_error("C1 must be positive");
    Eigen::VectorXd mu = (phi.array() * M.array()) / c1;
    return {c1, mu};
}

namespace {

// Cumulative trapezoid of phi |y|^{pw} up to each node, with power-law
// cells where the integrand meets the vertex (M vanishes like |y|^beta, so
// a trapezoid across the vertex would overcount).
std::vector<double> cumulative_weighted(const Grid1D& grid, const Eigen::VectorXd& phi,
                                        double pw) {
    const auto& xs = grid.nodes;
    std::vector<double> cum(xs.size());
    auto w = [&](std::size_t i) { return std::pow(std::fabs(xs[i]), pw); };
    double acc;
    if (xs.front() > 0.0) {
        acc = phi(0) * xs.front() * w(0) / (1.0 + pw); // [0, x_0] power cell
    } else {
        acc = 0.5 * phi(0) * w(0) * grid.h; // sliver at the outer edge
    }
    cum[0] = acc;
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i - 1] < 0.0 && xs[i] > 0.0) {
            // Cell across the puncture: integrate |y|^{pw} exactly.
            acc += (phi(static_cast<long>(i - 1)) + phi(static_cast<long>(i))) *
                   grid.h * w(i) / (1.0 + pw);
        } else {
            acc += 0.5 *
                   (phi(static_cast<long>(i - 1)) * w(i - 1) +
                    phi(static_cast<long>(i)) * w(i)) *
                   (xs[i] - xs[i - 1]);
        }
        cum[i] = acc;
    }
    return cum;
}

// Interpolates a cumulative array; below the first (positive) node the
// integrand is a power, so the head cell scales like (y/x_0)^{1+pw}.
double cum_at(const Grid1D& grid, const std::vector<double>& cum, double y, double pw) {
    const auto& xs = grid.nodes;
    if (y >= xs.back()) return cum.back();
    if (xs.front() > 0.0 && y <= xs.front()) {
        if (y <= 0.0) return 0.0;
        return cum[0] * std::pow(y / xs.front(), 1.0 + pw);
    }
    if (y <= xs.front()) return 0.0;
    const auto it = std::upper_bound(xs.begin(), xs.end(), y);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double f = (y - xs[lo]) / (xs[hi] - xs[lo]);
    return cum[lo] * (1.0 - f) + cum[hi] * f;
}

} // namespace

double StationaryCalibration::mass_m2(double y) const {
    const int sides = wide_grid.cone.kind == ConeKind::PuncturedLine ? 2 : 1;
    const double Rw = wide_grid.R;
    const double ya = std::fabs(y);
    if (ya <= Rw) {
        const double inner = cum_at(wide_grid, cum_m2, ya, 2.0 * beta) -
                             (sides == 2 ? cum_at(wide_grid, cum_m2, -ya, 2.0 * beta) : 0.0);
        return inner;
    }
    const double a = alpha, b = beta;
    const double tail =
        sides * tail_coef * (std::pow(Rw, b - a) - std::pow(ya, b - a)) / (a - b);
    return cum_m2.back() + tail;
}

double StationaryCalibration::mu_cdf(double y) const {
    const bool two_sided = wide_grid.cone.kind == ConeKind::PuncturedLine;
    const double Rw = wide_grid.R;
    const double a = alpha;
    const double left_tail = two_sided ? tail_coef * std::pow(Rw, -a) / a : 0.0;
    double acc;
    if (y <= -Rw) {
        acc = two_sided ? tail_coef * std::pow(-y, -a) / a : 0.0;
    } else if (y >= Rw) {
        acc = left_tail + cum_m1.back() +
              tail_coef * (std::pow(Rw, -a) - std::pow(y, -a)) / a;
    } else {
        acc = left_tail + cum_at(wide_grid, cum_m1, y, beta);
    }
    return std::min(1.0, acc / c1);
}

EntranceLaw StationaryCalibration::entrance_law() const {
    return EntranceLaw(PhiInterp(wide_grid, wide_phi),
                       MartinKernel::exact(wide_grid.cone), beta, gamma);
}

StationaryCalibration calibrate_stationary(const StationaryResult& fine,
                                           const Spectrum& fine_spectrum,
                                           double wide_factor,
                                           const StationaryOptions& opts) {
    const Grid1D& fg = fine_spectrum.grid();
    const double alpha = fine_spectrum.alpha();
    const ConeSpec cone = fg.cone;
    const auto beta_opt = beta_of(cone);
    if (!beta_opt) throw std::invalid_argument("cone has no closed-form exponent");

    StationaryCalibration cal;
    cal.alpha = alpha;
    cal.beta = *beta_opt;
    cal.wide_grid = make_grid(cone, fg.R * wide_factor, fg.h * wide_factor);
    Eigen::MatrixXd A = build_operator(alpha, cal.wide_grid);
    Spectrum wide_spec(A, cal.wide_grid, alpha);
    const MartinKernel Mk = MartinKernel::exact(cone);
    cal.wide_M = martin_on_grid(Mk, cal.wide_grid);
    StationaryResult wide = ou_stationary(
        wide_spec, cal.wide_M, initial_uniform_ball(cal.wide_grid, cal.wide_M), opts);
    cal.wide_phi = wide.phi;

    // Power-tail coefficient with the leading |y|^{-alpha/2} correction:
    // phi |y|^{1+a+b} = kappa + kappa_2 |y|^{-a/2}, least squares on the
    // window [R/8, R/4] (close enough to the boundary to be asymptotic,
    // far enough to be unpolluted by the truncation).
    const double p = 1.0 + alpha + cal.beta;
    const double Rw = cal.wide_grid.R;
    double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < cal.wide_grid.size(); ++i) {
        const double y = std::fabs(cal.wide_grid.nodes[i]);
        if (y < Rw / 8.0 || y > Rw / 4.0) continue;
        const double z = std::pow(y, -0.5 * alpha);
        const double v = cal.wide_phi(static_cast<long>(i)) * std::pow(y, p);
        s11 += 1.0;
        s12 += z;
        s22 += z * z;
        b1 += v;
        b2 += v * z;
    }
    const double det = s11 * s22 - s12 * s12;
    double kappa_grid = (s22 * b1 - s12 * b2) / det;
    if (!(kappa_grid > 0.0)) kappa_grid = b1 / s11; // fall back to the plain mean

    const int sides = cone.kind == ConeKind::PuncturedLine ? 2 : 1;
    const double tail_m2 = sides * kappa_grid * std::pow(Rw, cal.beta - alpha) /
                           (alpha - cal.beta);
    const double tail_m1 = sides * kappa_grid * std::pow(Rw, -alpha) / alpha;

    cal.cum_m1 = cumulative_weighted(cal.wide_grid, cal.wide_phi, cal.beta);
    cal.cum_m2 = cumulative_weighted(cal.wide_grid, cal.wide_phi, 2.0 * cal.beta);
    cal.gamma = 1.0 / (cal.cum_m2.back() + tail_m2);
    cal.tail_coef = cal.gamma * kappa_grid;
    for (std::size_t i = 0; i < cal.cum_m1.size(); ++i) {
        cal.cum_m1[i] *= cal.gamma;
        cal.cum_m2[i] *= cal.gamma;
    }
    cal.c1 = cal.cum_m1.back() + cal.gamma * tail_m1;

    // Fine/wide shape consistency on the overlap window.
    PhiInterp wide_interp(cal.wide_grid, cal.wide_phi);
    std::vector<double> ratios;
    for (std::size_t i = 0; i < fg.size(); ++i) {
        const double y = std::fabs(fg.nodes[i]);
        if (y < 1.0 || y > 4.0) continue;
        const double denom = fine.phi(static_cast<long>(i));
        if (denom > 0.0) ratios.push_back(wide_interp(fg.nodes[i]) / denom);
    }
    if (!ratios.empty()) {
        std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
        cal.overlap_ratio = ratios[ratios.size() / 2];
    }
    return cal;
}

DecayTable decay_check(const Eigen::VectorXd& f, double q,
                       const std::vector<double>& t_grid, const Spectrum& spectrum,
                       const Eigen::VectorXd& M, const EntranceLaw& psi) {
    if (q < 1.0) throw std::invalid_argument("q must be >= 1");
    const Grid1D& grid = spectrum.grid();
    const long n = static_cast<long>(grid.size());
    const double alpha = spectrum.alpha();
    const double beta = psi.beta();
    const double expo = (1.0 + 2.0 * beta) / alpha * (q - 1.0) / q;

    DecayTable table;
    table.mass_target = (f.array() * M.array()).sum() * grid.weight;

    for (double t : t_grid) {
        Eigen::VectorXd g = spectrum.apply(t, f);
        DecayRow row;
        row.t = t;
        row.mass = (g.array() * M.array()).sum() * grid.weight;

        double norm_q = 0.0;
        for (long i = 0; i < n; ++i) {
            const double x = grid.nodes[static_cast<std::size_t>(i)];
            const double diff = g(i) - table.mass_target * psi(t, x);
            norm_q += std::pow(std::fabs(diff), q) * std::pow(M(i), 2.0 - q);
        }
        row.norm = std::pow(norm_q * grid.weight, 1.0 / q);
        row.rescaled = std::pow(t, expo) * row.norm;
        table.rows.push_back(row);

        double inner = 0.0, outer = 0.0;
        for (long i = 0; i < n; ++i) {
            const double v = std::fabs(g(i)) * M(i);
            if (std::fabs(grid.nodes[static_cast<std::size_t>(i)]) > 0.5 * grid.R)
                outer += v;
            else
                inner += v;
        }
        if (outer > 0.01 * (inner + outer)) table.truncation_warning = true;
    }
    if (!table.rows.empty())
        table.decreasing_to_small = table.rows.back().rescaled < 0.1 * table.rows.front().rescaled;
    return table;
}

double hypercontractivity_check(const Eigen::MatrixXd& rho1, const Eigen::VectorXd& M,
                                const Grid1D& grid, double q) {
    const long n = rho1.rows();
    double sup = 0.0;
    for (long j = 0; j < n; ++j) {
        double col = 0.0;
        for (long i = 0; i < n; ++i)
            col += std::pow(rho1(i, j), q) * M(i) * M(i);
        sup = std::max(sup, col * grid.weight);
    }
    return sup;
}

} // namespace stablecones
