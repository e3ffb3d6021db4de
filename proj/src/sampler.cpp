#include "stablecones/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace stablecones {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("stable law requires alpha in (0,2)");
}

void check_time(double t) {
    if (!(t > 0.0)) throw std::invalid_argument("time must be positive");
}

// Chambers-Mallows-Stuck, symmetric parameterization with CF exp(-|xi|^alpha).
// At alpha = 1 the second factor has exponent 0 and the formula reduces to
// tan(theta), the standard Cauchy draw.
double sym_stable_unit(double alpha, RngStream& rng) {
    const double theta = kPi * (rng.uniform() - 0.5);
    const double w = rng.exponential();
    const double at = alpha * theta;
    const double num = std::sin(at);
    const double den = std::pow(std::cos(theta), 1.0 / alpha);
    const double fac = std::pow(std::cos(theta - at) / w, (1.0 - alpha) / alpha);
    return num / den * fac;
}

// Kanter's representation of the positive a-stable law with Laplace
// transform exp(-lambda^a). Evaluated in log space to halve the number of
// pow calls.
double positive_stable_unit(double a, RngStream& rng) {
    const double theta = kPi * rng.uniform_open();
    const double w = rng.exponential();
    const double log_a_fn = (a * std::log(std::sin(a * theta)) +
                             (1.0 - a) * std::log(std::sin((1.0 - a) * theta)) -
                             std::log(std::sin(theta))) /
                            (1.0 - a);
    return std::exp((1.0 - a) / a * (log_a_fn - std::log(w)));
}

} // namespace

double sample_symmetric_unit(double alpha, RngStream& rng) {
    check_alpha(alpha);
    return sym_stable_unit(alpha, rng);
}

double sample_positive_unit(double alpha_half, RngStream& rng) {
    if (!(alpha_half > 0.0 && alpha_half < 1.0))
        throw std::invalid_argument("subordinator index must lie in (0,1)");
    return positive_stable_unit(alpha_half, rng);
}

void sample_isotropic_unit_into(double alpha, RngStream& rng, std::span<double> out) {
    check_alpha(alpha);
    const double s = positive_stable_unit(0.5 * alpha, rng);
    const double scale = std::sqrt(2.0 * s);
    std::size_t i = 0;
    while (i + 1 < out.size()) {
        double z0, z1;
        rng.normal_pair(z0, z1);
        out[i] = scale * z0;
        out[i + 1] = scale * z1;
        i += 2;
    }
    if (i < out.size()) {
        double z0, z1;
        rng.normal_pair(z0, z1);
        out[i] = scale * z0;
    }
}

StableLaw::StableLaw(double alpha_, int dim_) : alpha(alpha_), dim(dim_) {
    check_alpha(alpha);
    if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
}

double sample_symmetric_1d(const StableLaw& law, double t, RngStream& rng) {
    if (law.dim != 1)
        throw std::invalid_argument("sample_symmetric_1d requires d = 1");
    check_time(t);
    return std::pow(t, 1.0 / law.alpha) * sym_stable_unit(law.alpha, rng);
}

double sample_positive_stable(double alpha_half, double t, RngStream& rng) {
    if (!(alpha_half > 0.0 && alpha_half < 1.0))
        throw std::invalid_argument("subordinator index must lie in (0,1)");
    check_time(t);
    return std::pow(t, 1.0 / alpha_half) * positive_stable_unit(alpha_half, rng);
}

void sample_isotropic_into(const StableLaw& law, double t, RngStream& rng,
                           std::span<double> out) {
    check_time(t);
    if (static_cast<int>(out.size()) != law.dim)
        throw std::invalid_argument("output span size must equal law.dim");
    sample_isotropic_unit_into(law.alpha, rng, out);
    const double scale = std::pow(t, 1.0 / law.alpha);
    for (double& v : out) v *= scale;
}

std::vector<double> sample_isotropic(const StableLaw& law, double t, RngStream& rng) {
    std::vector<double> out(static_cast<std::size_t>(law.dim));
    sample_isotropic_into(law, t, rng, out);
    return out;
}

} // namespace stablecones
