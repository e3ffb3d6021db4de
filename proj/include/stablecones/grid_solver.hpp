#ifndef STABLECONES_GRID_SOLVER_HPP
#define STABLECONES_GRID_SOLVER_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "stablecones/cones.hpp"

namespace stablecones {

/// Uniform 1-d lattice on the truncated cone (half-line or punctured line).
/// Nodes exclude the killed sites (0 and everything outside (-R, R)); the
/// quadrature weight is the trapezoid weight h, exact for grid functions
/// vanishing at the killed sites.
struct Grid1D {
    ConeSpec cone;
    double R = 0.0;
    double h = 0.0;
    std::vector<double> nodes;   // increasing
    std::vector<long> lattice;   // node position in units of h
    double weight = 0.0;         // per-node quadrature weight (= h)

    std::size_t size() const { return nodes.size(); }
    /// Index of the node nearest to x.
    std::size_t nearest(double x) const;
};

Grid1D make_grid(const ConeSpec& cone, double R, double h);

/// Discrete generator -(-Delta)^{alpha/2} with Dirichlet condition on the
/// killed sites: exact kernel-cell weights from hat-function interpolation
/// for |z| >= h, and a second-difference correction carrying the singular
/// cell |z| < h. Symmetric with M-matrix sign pattern; row sums are
/// strictly negative (mass escaping to the exterior).
Eigen::MatrixXd build_operator(double alpha, const Grid1D& grid);

/// Matrix-free action of the same operator (for large consistency tests).
Eigen::VectorXd apply_operator(double alpha, const Grid1D& grid,
                               const Eigen::VectorXd& u);

/// Dirichlet heat kernel sampled on the grid: K[i][j] ~ p_t(node_i, node_j).
struct GridKernel {
    Eigen::MatrixXd K;
    double t = 0.0;
    Grid1D grid;
};

/// Spectral factorization of the generator; heat kernels and semigroup
/// actions at any t come from one factorization.
class Spectrum {
public:
    Spectrum(const Eigen::MatrixXd& A, Grid1D grid, double alpha);

    /// e^{tA} f  (the semigroup applied to a grid function).
    Eigen::VectorXd apply(double t, const Eigen::VectorXd& f) const;

    /// Dense e^{tA} (symmetrized).
    Eigen::MatrixXd propagator(double t) const;

    /// Heat kernel K_t = e^{tA} / h.
    GridKernel kernel(double t) const;

    /// Grid survival probabilities at time t.
    Eigen::VectorXd survival(double t) const;

    const Grid1D& grid() const { return grid_; }
    double alpha() const { return alpha_; }
    const Eigen::VectorXd& eigenvalues() const { return lam_; }

private:
    Grid1D grid_;
    double alpha_;
    Eigen::MatrixXd V_;
    Eigen::VectorXd lam_;
};

/// Independent route to e^{tA} v (scaled truncated Taylor); used to
/// cross-check the spectral exponential.
Eigen::VectorXd expm_taylor_apply(const Eigen::MatrixXd& A, double t,
                                  Eigen::VectorXd v);

/// Martin kernel sampled on the grid.
Eigen::VectorXd martin_on_grid(const MartinKernel& M, const Grid1D& grid);

/// Renormalized kernel rho_t(i,j) = K_t(i,j) / (M_i M_j). Nodes where the
/// kernel degenerates (M < 1e-12) are reported in flagged.
Eigen::MatrixXd rho_kernel(const GridKernel& kernel, const Eigen::VectorXd& M,
                           std::vector<std::size_t>* flagged = nullptr);

struct StationaryOptions {
    double t0 = 0.6931471805599453; // ln 2
    double tol = 1e-6;
    int max_iter = 2000;
};

struct StationaryResult {
    Eigen::VectorXd phi;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Stationary density of the Ornstein-Uhlenbeck kernel
/// l_t(x,y) = rho_{1-e^{-t}}(e^{-t/alpha} x, y): fixed-point iteration of
/// the discrete step operator with mass renormalization after each step
/// (truncation leaks a little mass per step; the renormalized map is the
/// one with an honest fixed point). Residual is L1(M^2) of one step.
StationaryResult ou_stationary(const Spectrum& spectrum, const Eigen::VectorXd& M,
                               const Eigen::VectorXd& initial,
                               const StationaryOptions& opts = {});

/// Canonical initial densities for the iteration (normalized in L1(M^2)).
Eigen::VectorXd initial_uniform_ball(const Grid1D& grid, const Eigen::VectorXd& M);
Eigen::VectorXd initial_triangular(const Grid1D& grid, const Eigen::VectorXd& M);

/// Grid function interpolator for phi: linear between nodes, clamped to the
/// nearest node value toward the vertex (phi is continuous at 0), throws
/// beyond the truncation radius unless a power-tail extension is attached.
class PhiInterp {
public:
    PhiInterp(Grid1D grid, Eigen::VectorXd phi);
    double operator()(double x) const;
    const Grid1D& grid() const { return grid_; }
    const Eigen::VectorXd& values() const { return phi_; }

    /// Same interpolant, but |x| beyond the last node decays like
    /// phi(edge) (|x|/edge)^{-p} instead of throwing.
    PhiInterp with_tail(double p) const;

private:
    Grid1D grid_;
    Eigen::VectorXd phi_;
    double tail_exp_ = 0.0; // 0: throw out of range
};

/// Entrance law Psi_t(x) = t^{-(1+2 beta)/alpha} phi(t^{-1/alpha} x) M(x).
/// The optional scale carries the continuum normalization of phi when the
/// grid-normalized density is calibrated against a wider grid.
class EntranceLaw {
public:
    EntranceLaw(PhiInterp phi, MartinKernel M, double beta, double scale = 1.0);
    double operator()(double t, double x) const;
    const PhiInterp& phi() const { return phi_; }
    double beta() const { return beta_; }
    double scale() const { return scale_; }

private:
    PhiInterp phi_;
    MartinKernel M_;
    double beta_;
    double scale_;
};

/// C1 = int phi M and the Yaglom density mu = phi M / C1 on the grid.
std::pair<double, Eigen::VectorXd> c1_and_mu(const Eigen::VectorXd& phi,
                                             const Eigen::VectorXd& M,
                                             const Grid1D& grid);

/// Continuum calibration of the stationary density. The integrals of phi
/// against M and M^2 have slowly decaying tails (phi ~ kappa |y|^{-1-a-b}),
/// so a fixed point normalized on a desk-scale grid misstates them; a wide
/// coarse grid (same matrix size) resolves the tail region and an analytic
/// power tail closes the remainder. The wide object carries the
/// continuum-normalized integrals; the fine grid keeps vertex resolution.
struct StationaryCalibration {
    Grid1D wide_grid;
    Eigen::VectorXd wide_phi;   // wide fixed point, grid-normalized
    Eigen::VectorXd wide_M;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 1.0;         // continuum scale: phi_cont = gamma * wide_phi
    double tail_coef = 0.0;     // kappa (continuum scale) in the power tail
    double overlap_ratio = 1.0; // median wide/fine on the overlap window
    double c1 = 0.0;            // continuum int phi M

    /// Continuum int over |x| <= y of phi M^2.
    double mass_m2(double y) const;
    /// Yaglom CDF F(y) = (1/C1) int_{-inf}^{y} phi M (support on the cone).
    double mu_cdf(double y) const;
    /// Entrance law bound to the wide shape with continuum scale.
    EntranceLaw entrance_law() const;

    std::vector<double> cum_m1; // int up to node i of phi M (gamma-scaled)
    std::vector<double> cum_m2; // same against M^2
};

StationaryCalibration calibrate_stationary(const StationaryResult& fine,
                                           const Spectrum& fine_spectrum,
                                           double wide_factor = 16.0,
                                           const StationaryOptions& opts = {});

struct DecayRow {
    double t = 0.0;
    double norm = 0.0;          // ||P_t f - A Psi_t||_{q,M}
    double rescaled = 0.0;      // t^{((1+2b)/a)(q-1)/q} * norm
    double mass = 0.0;          // int P_t f M dx
};

struct DecayTable {
    std::vector<DecayRow> rows;
    double mass_target = 0.0;   // A = int f M dx
    bool decreasing_to_small = false; // last rescaled < 0.1 * first
    bool truncation_warning = false;  // boundary mass of P_t f exceeded 1%
};

DecayTable decay_check(const Eigen::VectorXd& f, double q,
                       const std::vector<double>& t_grid,
                       const Spectrum& spectrum, const Eigen::VectorXd& M,
                       const EntranceLaw& psi);

/// sup over columns of int rho_1(x,y)^q M^2(x) dx on the grid.
double hypercontractivity_check(const Eigen::MatrixXd& rho1,
                                const Eigen::VectorXd& M, const Grid1D& grid,
                                double q);

} // namespace stablecones

#endif
