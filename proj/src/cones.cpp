#include "stablecones/cones.hpp"

#include <cmath>
#include <stdexcept>

namespace stablecones {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("cone requires alpha in (0,2)");
}

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void check_dim(const ConeSpec& cone, std::span<const double> x) {
    if (static_cast<int>(x.size()) != cone.dim)
        throw std::invalid_argument("point dimension does not match cone");
}

} // namespace

ConeSpec ConeSpec::half_line(double alpha) {
    check_alpha(alpha);
    return {ConeKind::HalfLine, 1, alpha, 0.0};
}

ConeSpec ConeSpec::punctured_line(double alpha) {
    check_alpha(alpha);
    if (!(alpha > 1.0))
        throw std::invalid_argument("punctured line requires alpha > 1 (the point is polar otherwise)");
    return {ConeKind::PuncturedLine, 1, alpha, 0.0};
}

ConeSpec ConeSpec::half_space(int dim, double alpha) {
    check_alpha(alpha);
    if (dim < 1) throw std::invalid_argument("half-space requires d >= 1");
    return {ConeKind::HalfSpace, dim, alpha, 0.0};
}

ConeSpec ConeSpec::right_circular(int dim, double alpha, double aperture) {
    check_alpha(alpha);
    if (dim < 2) throw std::invalid_argument("right-circular cone requires d >= 2");
    if (!(aperture > 0.0 && aperture < kPi))
        throw std::invalid_argument("aperture must lie in (0, pi)");
    return {ConeKind::RightCircular, dim, alpha, aperture};
}

ConeSpec ConeSpec::slit_plane(double alpha) {
    check_alpha(alpha);
    if (!(alpha > 1.0))
        throw std::invalid_argument("slit plane requires alpha > 1 (the ray is polar otherwise)");
    return {ConeKind::SlitPlane, 2, alpha, 0.0};
}

std::string ConeSpec::name() const {
    switch (kind) {
        case ConeKind::HalfLine: return "half_line";
        case ConeKind::PuncturedLine: return "punctured_line";
        case ConeKind::HalfSpace: return "half_space";
        case ConeKind::RightCircular: return "right_circular";
        case ConeKind::SlitPlane: return "slit_plane";
    }
    return "?";
}

std::vector<double> ConeSpec::unit_point() const {
    std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
    x.back() = 1.0;
    return x;
}

bool contains(const ConeSpec& cone, std::span<const double> x) {
    check_dim(cone, x);
    switch (cone.kind) {
        case ConeKind::HalfLine:
            return x[0] > 0.0;
        case ConeKind::PuncturedLine:
            return x[0] != 0.0;
        case ConeKind::HalfSpace:
            return x.back() > 0.0;
        case ConeKind::RightCircular: {
            const double r = norm2(x);
            if (r == 0.0) return false;
            return x.back() > r * std::cos(cone.aperture);
        }
        case ConeKind::SlitPlane:
            return !(x[1] == 0.0 && x[0] >= 0.0);
    }
    return false;
}

double boundary_distance(const ConeSpec& cone, std::span<const double> x) {
    check_dim(cone, x);
    if (!contains(cone, x)) return 0.0;
    switch (cone.kind) {
        case ConeKind::HalfLine:
            return x[0];
        case ConeKind::PuncturedLine:
            return std::fabs(x[0]);
        case ConeKind::HalfSpace:
            return x.back();
        case ConeKind::RightCircular: {
            // Angular gap to the boundary cone; beyond pi/2 the nearest
            // complement point is the vertex.
            const double r = norm2(x);
            double perp = 0.0;
            for (std::size_t i = 0; i + 1 < x.size(); ++i) perp += x[i] * x[i];
            const double psi = std::atan2(std::sqrt(perp), x.back());
            const double gap = cone.aperture - psi;
            return gap >= 0.5 * kPi ? r : r * std::sin(gap);
        }
        case ConeKind::SlitPlane: {
            if (x[0] <= 0.0) return norm2(x);
            return std::fabs(x[1]);
        }
    }
    return 0.0;
}

std::optional<double> beta_of(const ConeSpec& cone) {
    switch (cone.kind) {
        case ConeKind::HalfLine:
        case ConeKind::HalfSpace:
            return 0.5 * cone.alpha;
        case ConeKind::PuncturedLine:
            return cone.alpha - 1.0;
        case ConeKind::SlitPlane:
            return 0.5 * (cone.alpha - 1.0);
        case ConeKind::RightCircular:
            if (cone.aperture == 0.5 * kPi) return 0.5 * cone.alpha;
            return std::nullopt;
    }
    return std::nullopt;
}

MartinKernel::MartinKernel(const ConeSpec& cone, double beta, bool exact, double norm)
    : cone_(cone), beta_(beta), exact_(exact), norm_(norm) {}

MartinKernel MartinKernel::exact(const ConeSpec& cone) {
    switch (cone.kind) {
        case ConeKind::HalfLine:
        case ConeKind::HalfSpace:
            return MartinKernel(cone, 0.5 * cone.alpha, true, 1.0);
        case ConeKind::PuncturedLine:
            return MartinKernel(cone, cone.alpha - 1.0, true, 1.0);
        case ConeKind::SlitPlane:
            throw std::invalid_argument(
                "slit plane has no pointwise Martin kernel here; only its exponent is exposed");
        case ConeKind::RightCircular:
            throw std::invalid_argument(
                "right-circular cones have no exact kernel; use MartinKernel::surrogate");
    }
    throw std::invalid_argument("unsupported cone");
}

MartinKernel MartinKernel::surrogate(const ConeSpec& cone, double beta) {
    if (cone.kind != ConeKind::RightCircular)
        throw std::invalid_argument("surrogate kernel is defined for right-circular cones only");
    if (!(beta >= 0.0 && beta < cone.alpha))
        throw std::invalid_argument("beta must lie in [0, alpha)");
    const auto one = cone.unit_point();
    const double d1 = boundary_distance(cone, one);
    const double norm = std::pow(d1, 0.5 * cone.alpha); // |1| = 1
    return MartinKernel(cone, beta, false, norm);
}

double MartinKernel::operator()(std::span<const double> x) const {
    check_dim(cone_, x);
    if (!contains(cone_, x)) return 0.0;
    switch (cone_.kind) {
        case ConeKind::HalfLine:
            return std::pow(x[0], 0.5 * cone_.alpha);
        case ConeKind::HalfSpace:
            return std::pow(x.back(), 0.5 * cone_.alpha);
        case ConeKind::PuncturedLine:
            return std::pow(std::fabs(x[0]), cone_.alpha - 1.0);
        case ConeKind::RightCircular: {
            const double delta = boundary_distance(cone_, x);
            const double r = norm2(x);
            return std::pow(delta, 0.5 * cone_.alpha) *
                   std::pow(r, beta_ - 0.5 * cone_.alpha) / norm_;
        }
        case ConeKind::SlitPlane:
            throw std::invalid_argument("slit plane kernel is not pointwise-evaluable");
    }
    return 0.0;
}

} // namespace stablecones
