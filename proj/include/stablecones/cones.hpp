#ifndef STABLECONES_CONES_HPP
#define STABLECONES_CONES_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stablecones {

enum class ConeKind {
    HalfLine,      // d = 1, (0, inf)
    PuncturedLine, // d = 1, R \ {0}, alpha > 1
    HalfSpace,     // d >= 1, { x_d > 0 }
    RightCircular, // d >= 2, { x_d > |x| cos(eta) }, eta in (0, pi)
    SlitPlane,     // d = 2, R^2 minus the ray [0,inf) x {0}, alpha > 1
};

/// A cone of the supported catalogue together with the stability index it
/// is used with (carried for validity checks: the punctured line and the
/// slit plane only make sense for alpha > 1, otherwise their complements
/// are polar and nothing is killed).
struct ConeSpec {
    ConeKind kind;
    int dim;
    double alpha;
    double aperture; // right-circular only

    static ConeSpec half_line(double alpha);
    static ConeSpec punctured_line(double alpha);
    static ConeSpec half_space(int dim, double alpha);
    static ConeSpec right_circular(int dim, double alpha, double aperture);
    static ConeSpec slit_plane(double alpha);

    std::string name() const;

    /// The distinguished interior point (0, ..., 0, 1).
    std::vector<double> unit_point() const;
};

bool contains(const ConeSpec& cone, std::span<const double> x);

/// Euclidean distance from x to the complement of the cone; 0 outside.
double boundary_distance(const ConeSpec& cone, std::span<const double> x);

/// Homogeneity exponent beta where a closed form is known; nullopt for
/// right-circular cones with aperture != pi/2 (estimate it by Monte Carlo).
std::optional<double> beta_of(const ConeSpec& cone);

/// Martin kernel normalized at the distinguished point. Exact closed forms
/// exist for the half-line, punctured line and half-space. Right-circular
/// cones get the comparability surrogate delta^{alpha/2} |x|^{beta-alpha/2}
/// (flagged, never used where an identity is asserted). The slit plane has
/// no pointwise kernel here, only its exponent.
class MartinKernel {
public:
    /// Exact kernel; throws for cones without a closed form.
    static MartinKernel exact(const ConeSpec& cone);

    /// Surrogate kernel for right-circular cones; beta must be supplied
    /// (known for aperture pi/2, otherwise estimated externally).
    static MartinKernel surrogate(const ConeSpec& cone, double beta);

    double operator()(std::span<const double> x) const;

    const ConeSpec& cone() const { return cone_; }
    double beta() const { return beta_; }
    bool is_exact() const { return exact_; }

private:
    MartinKernel(const ConeSpec& cone, double beta, bool exact, double norm);

    ConeSpec cone_;
    double beta_;
    bool exact_;
    double norm_; // value of the raw formula at the distinguished point
};

} // namespace stablecones

#endif
