#include "stablecones/hitting.hpp"

#include <cmath>
#include <stdexcept>

#include "stablecones/density.hpp"

namespace stablecones {

namespace {
// Gauss-Legendre 8 on [0,1] for the time integral of the far limit.
constexpr double kTimeX[8] = {0.0198550717512319, 0.1016667612931866, 0.2372337950418355,
                              0.4082826787521751, 0.5917173212478249, 0.7627662049581645,
                              0.8983332387068134, 0.9801449282487681};
constexpr double kTimeW[8] = {0.0506142681451881, 0.1111905172266872, 0.1568533229389436,
                              0.1813418916891810, 0.1813418916891810, 0.1568533229389436,
                              0.1111905172266872, 0.0506142681451881};
} // namespace

HittingTable::HittingTable(double alpha, double radius, double h)
    : alpha_(alpha), radius_(radius), h_(h), z_safe_(0.75 * radius) {
    if (!(alpha > 1.0))
        throw std::invalid_argument("point killing needs alpha > 1");

    const ConeSpec cone = ConeSpec::punctured_line(alpha);
    Grid1D grid = make_grid(cone, radius, h);
    n_side_ = std::lround(radius / h) - 1;
    nodes_ = grid.nodes;

    Eigen::MatrixXd A = build_operator(alpha, grid);
    Spectrum spectrum(A, grid, alpha);
    GridKernel K = spectrum.kernel(1.0);

    // Free density at lattice differences.
    const long max_k = 2 * n_side_;
    std::vector<double> p1d(static_cast<std::size_t>(max_k) + 1);
    for (long k = 0; k <= max_k; ++k)
        p1d[static_cast<std::size_t>(k)] = density_1d(alpha, 1.0, static_cast<double>(k) * h);

    const long n = static_cast<long>(grid.size());
    ratio_.resize(n, n);
    for (long i = 0; i < n; ++i) {
        const long li = grid.lattice[static_cast<std::size_t>(i)];
        for (long j = 0; j < n; ++j) {
            const long k = std::labs(li - grid.lattice[static_cast<std::size_t>(j)]);
            const double r = K.K(i, j) / p1d[static_cast<std::size_t>(k)];
            ratio_(i, j) = std::min(1.0, std::max(0.0, r));
        }
    }

    // Far-endpoint limit: time-average of the survival probability.
    far_.assign(static_cast<std::size_t>(n), 0.0);
    for (int q = 0; q < 8; ++q) {
        Eigen::VectorXd s = spectrum.survival(kTimeX[q]);
        for (long i = 0; i < n; ++i)
            far_[static_cast<std::size_t>(i)] += kTimeW[q] * std::min(1.0, std::max(0.0, s(i)));
    }
}

void HittingTable::locate(double z, std::size_t& lo, std::size_t& hi, double& frac) const {
    // Node layout: index 0..n_side-1 holds -R+h..-h, index n_side..2n_side-1 holds h..R-h.
    const std::size_t n = nodes_.size();
    const double zc = std::min(std::max(z, nodes_.front()), nodes_.back());
    if (zc >= h_) {
        const double pos = zc / h_ - 1.0;
        std::size_t i = static_cast<std::size_t>(pos);
        if (i >= static_cast<std::size_t>(n_side_) - 1) i = static_cast<std::size_t>(n_side_) - 1;
        lo = static_cast<std::size_t>(n_side_) + i;
        hi = std::min(lo + 1, n - 1);
        frac = pos - static_cast<double>(i);
        if (hi == lo) frac = 0.0;
    } else if (zc <= -h_) {
        const double pos = (zc + radius_) / h_ - 1.0; // 0 at -R+h
        std::size_t i = static_cast<std::size_t>(std::max(0.0, pos));
        if (i >= static_cast<std::size_t>(n_side_) - 1) i = static_cast<std::size_t>(n_side_) - 1;
        lo = i;
        hi = std::min(lo + 1, static_cast<std::size_t>(n_side_) - 1);
        frac = pos - static_cast<double>(i);
        if (hi == lo) frac = 0.0;
    } else {
        // Inside the puncture gap: clamp to the same-side innermost node.
        lo = hi = (z < 0.0) ? static_cast<std::size_t>(n_side_) - 1
                            : static_cast<std::size_t>(n_side_);
        frac = 0.0;
    }
    if (frac < 0.0) frac = 0.0;
    if (frac > 1.0) frac = 1.0;
}

double HittingTable::far_limit(double z) const {
    std::size_t lo, hi;
    double f;
    locate(z, lo, hi, f);
    return far_[lo] * (1.0 - f) + far_[hi] * f;
}

double HittingTable::survive_ratio(double z0, double z1) const {
    const double a0 = std::fabs(z0), a1 = std::fabs(z1);
    if (a0 >= z_safe_ && a1 >= z_safe_) return 1.0;
    if (a0 >= z_safe_) return far_limit(z1);
    if (a1 >= z_safe_) return far_limit(z0);
    std::size_t lo0, hi0, lo1, hi1;
    double f0, f1;
    locate(z0, lo0, hi0, f0);
    locate(z1, lo1, hi1, f1);
    const double v = (1.0 - f0) * ((1.0 - f1) * ratio_(lo0, lo1) + f1 * ratio_(lo0, hi1)) +
                     f0 * ((1.0 - f1) * ratio_(hi0, lo1) + f1 * ratio_(hi0, hi1));
    return std::min(1.0, std::max(0.0, v));
}

} // namespace stablecones
