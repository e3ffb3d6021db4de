#ifndef STABLECONES_ESTIMATE_HPP
#define STABLECONES_ESTIMATE_HPP

#include <cstdint>
#include <functional>
#include <vector>

namespace stablecones {

/// Monte Carlo estimate with uncertainty and provenance.
struct EstimateCI {
    double value = 0.0;
    double stderr_ = 0.0;
    std::int64_t n = 0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    double dt_used = 0.0;
    bool extrapolated = false;
    bool extrapolation_warning = false; // dt estimates disagree beyond 3 sigma

    void finalize_ci() {
        ci_lo = value - 1.96 * stderr_;
        ci_hi = value + 1.96 * stderr_;
    }
    bool ci_covers(double target) const { return ci_lo <= target && target <= ci_hi; }
};

/// Sample mean and standard error of the mean.
std::pair<double, double> mean_stderr(const std::vector<double>& xs);

/// One-sample Kolmogorov-Smirnov distance; cdf must be a distribution
/// function; the sample is sorted internally.
double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical value of the one-sample KS statistic.
double ks_critical_one_sample(std::size_t n, double level);

/// Asymptotic critical value of the two-sample KS statistic.
double ks_critical_two_sample(std::size_t n, std::size_t m, double level);

/// Ordinary least squares fit y = a + b x; returns slope, its standard
/// error, and R^2.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace stablecones

#endif
