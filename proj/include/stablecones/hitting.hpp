#ifndef STABLECONES_HITTING_HPP
#define STABLECONES_HITTING_HPP

#include <Eigen/Dense>
#include <vector>

#include "stablecones/grid_solver.hpp"

namespace stablecones {

/// Bridge survival table for killing at the single point 0 (d = 1,
/// alpha > 1). Discrete monitoring never lands on a point, so per-step
/// killing uses the exact chain construction: sample a free increment and
/// keep the step alive with probability
///     p_1^Gamma(z0, z1) / p_1(z1 - z0),   z = y / dt^{1/alpha},
/// which makes the monitored chain an exact observation of the killed
/// process (up to the accuracy of the tabulated kernel ratio). The table
/// comes from the 1-d grid solver on the punctured line; far from the
/// puncture the ratio is closed analytically: a bridge with both ends at
/// distance >> 1 cannot afford the two big jumps a hit would need, and
/// with one far end the ratio tends to int_0^1 P_z(tau > s) ds.
class HittingTable {
public:
    explicit HittingTable(double alpha, double radius = 32.0, double h = 1.0 / 32.0);

    /// P(unit-time bridge from z0 to z1 avoids 0), clamped to [0,1].
    double survive_ratio(double z0, double z1) const;

    double alpha() const { return alpha_; }
    double radius() const { return radius_; }
    double grid_step() const { return h_; }

private:
    double far_limit(double z) const;
    // Array index and fraction for a coordinate, same-side clamped.
    void locate(double z, std::size_t& lo, std::size_t& hi, double& frac) const;

    double alpha_;
    double radius_;
    double h_;
    double z_safe_;
    long n_side_;                 // nodes per side
    std::vector<double> nodes_;
    Eigen::MatrixXd ratio_;
    std::vector<double> far_;     // limit row
};

} // namespace stablecones

#endif
