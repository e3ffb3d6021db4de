#ifndef STABLECONES_KILLED_MC_HPP
#define STABLECONES_KILLED_MC_HPP

#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "stablecones/cones.hpp"
#include "stablecones/estimate.hpp"
#include "stablecones/hitting.hpp"
#include "stablecones/rng.hpp"

namespace stablecones {

/// One monitored path of the killed process.
struct PathResult {
    bool survived = false;
    std::vector<double> endpoint;        // X_t (natural scale), valid if survived
    std::optional<long> exit_step;       // first monitor index outside the cone
    double dt = 0.0;
};

struct DtEstimate {
    double dt = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t n = 0;
};

/// Estimate with Richardson extrapolation across a dt schedule (ratio 2).
/// When the dt estimates are statistically indistinguishable the raw values
/// are pooled instead (extrapolating pure noise only inflates variance).
struct RichardsonEstimate {
    EstimateCI estimate;
    std::vector<DtEstimate> raw;
    double order = 0.5;
};

// Initial laws whose alpha-moment is finite by construction.
struct PointMass {
    std::vector<double> x;
};
struct UniformBox {
    std::vector<double> lo, hi;
};
struct ParetoTail { // d = 1: density ~ x^{-1-index} on [x_min, inf)
    double x_min = 1.0;
    double index = 0.0; // must exceed alpha
};
using InitialLaw = std::variant<PointMass, UniformBox, ParetoTail>;

struct YaglomResult {
    std::vector<std::vector<double>> samples; // rescaled survivors t^{-1/alpha} X_t
    std::int64_t paths_run = 0;
    double survival_rate = 0.0;
};

struct BetaEstimate {
    double beta_hat = 0.0;
    double stderr_ = 0.0;
    double r2 = 0.0;
    bool fit_warning = false; // R^2 < 0.99
    std::vector<double> t_grid;
    std::vector<double> survival_mean; // across replicates
};

/// Monte Carlo engine for the process killed outside a cone.
///
/// Paths are simulated in self-similar coordinates y = t^{-1/alpha} x on a
/// unit horizon, so survival(x, t) and survival(t^{-1/alpha} x, 1) with a
/// coupled stream execute identical floating point operations and agree bit
/// for bit. Cones killed by a thin set (punctured line, slit plane) use the
/// kernel-ratio step killing from HittingTable; the rest use plain
/// discrete-time exit monitoring.
class KilledMc {
public:
    explicit KilledMc(const ConeSpec& cone, int workers = 1);

    PathResult simulate_path(std::span<const double> x, double t, double dt,
                             const RngStream& rng) const;

    RichardsonEstimate survival(std::span<const double> x, double t, std::int64_t n_paths,
                                const std::vector<double>& dt_schedule, const RngStream& rng) const;

    /// Coupled survival estimates on a common set of paths over an
    /// increasing t grid (multiples of dt); monotone by construction.
    std::vector<EstimateCI> survival_curve(std::span<const double> x,
                                           const std::vector<double>& t_grid, double dt,
                                           std::int64_t n_paths, const RngStream& rng) const;

    /// E_x[tau > t; M(X_t)] / M(x); requires an exact Martin kernel.
    RichardsonEstimate martin_invariance(std::span<const double> x, double t,
                                         std::int64_t n_paths,
                                         const std::vector<double>& dt_schedule,
                                         const RngStream& rng) const;

    /// Rescaled endpoints conditioned on survival; runs until the target
    /// survivor count is reached, aborting if the survival rate is below
    /// min_rate.
    YaglomResult yaglom_samples(const InitialLaw& start, double t,
                                std::int64_t n_target_survivors, double dt,
                                const RngStream& rng, double min_rate = 1e-4) const;

    /// Homogeneity exponent from the log-log slope of survival over a
    /// geometric t grid. Uses a fixed number of steps per horizon so the
    /// monitoring bias enters as a t-independent factor and drops out of
    /// the slope; the spread over independent replicates gives the error.
    BetaEstimate estimate_beta(std::span<const double> x, const std::vector<double>& t_grid,
                               std::int64_t n_paths_per_t, int steps_per_horizon,
                               int replicates, const RngStream& rng) const;

    const ConeSpec& cone() const { return cone_; }
    const HittingTable* hitting_table() const { return table_.get(); }
    int workers() const { return workers_; }

private:
    // Returns 0 if the path survived all n steps, else the exit step in
    // 1..n; y (rescaled coordinates) holds the final position on survival.
    long run_path(std::span<double> y, long n_steps, double inc_scale,
                  RngStream& rng) const;

    ConeSpec cone_;
    std::shared_ptr<const HittingTable> table_;
    int workers_;
};

} // namespace stablecones

#endif
