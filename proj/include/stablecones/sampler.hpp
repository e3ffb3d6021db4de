#ifndef STABLECONES_SAMPLER_HPP
#define STABLECONES_SAMPLER_HPP

#include <span>
#include <vector>

#include "stablecones/rng.hpp"

namespace stablecones {

/// Parameters of the isotropic stable law: stability index and dimension.
struct StableLaw {
    double alpha;
    int dim;

    StableLaw(double alpha_, int dim_);
};

// Exact samplers. Every draw is generated as a unit-time variate and scaled
// by t^{1/alpha}, so with a shared stream the draw at time t equals
// t^{1/alpha} times the draw at time 1 bit for bit; the scaling identity of
// the law holds pathwise, not just in distribution.

/// One-dimensional symmetric stable increment over time t,
/// characteristic function exp(-t|xi|^alpha).
double sample_symmetric_1d(const StableLaw& law, double t, RngStream& rng);

/// Positive stable subordinator increment over time t:
/// E exp(-lambda S) = exp(-t lambda^alpha_half), 0 < alpha_half < 1.
double sample_positive_stable(double alpha_half, double t, RngStream& rng);

/// Isotropic d-dimensional stable increment over time t via Gaussian
/// subordination: sqrt(2 S) Z with S the (alpha/2)-subordinator at time t.
std::vector<double> sample_isotropic(const StableLaw& law, double t, RngStream& rng);

/// Allocation-free variant for hot loops; out.size() must equal law.dim.
void sample_isotropic_into(const StableLaw& law, double t, RngStream& rng,
                           std::span<double> out);

// Unit-time draws, the primitive every sampler above scales by t^{1/alpha}.
// Path engines use these directly and hoist the time-scale factor.
double sample_symmetric_unit(double alpha, RngStream& rng);
double sample_positive_unit(double alpha_half, RngStream& rng);
void sample_isotropic_unit_into(double alpha, RngStream& rng, std::span<double> out);

} // namespace stablecones

#endif
