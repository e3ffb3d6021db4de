#include "stablecones/density.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace stablecones {

namespace {

constexpr double kPi = 3.141592653589793238462643383279503;

// Gauss-Legendre nodes/weights on [-1,1], positive half.
constexpr double kGl8X[4] = {0.1834346424956498049394761, 0.5255324099163289858177390,
                             0.7966664774136267395915539, 0.9602898564975362316835609};
constexpr double kGl8W[4] = {0.3626837833783619829651504, 0.3137066458778872873379622,
                             0.2223810344533744705443560, 0.1012285362903762591525314};
constexpr double kGl16X[8] = {0.0950125098376374401853193, 0.2816035507792589132304605,
                              0.4580167776572273863424194, 0.6178762444026437484466718,
                              0.7554044083550030338951012, 0.8656312023878317438804679,
                              0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr double kGl16W[8] = {0.1894506104550684962853967, 0.1826034150449235888667637,
                              0.1691565193950025381893121, 0.1495959888165767320815017,
                              0.1246289712555338720524763, 0.0951585116824927848099251,
                              0.0622535239386478928628438, 0.0271524594117540948517806};

template <typename F>
double gl8(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        s += kGl8W[i] * (f(c + h * kGl8X[i]) + f(c - h * kGl8X[i]));
    return s * h;
}

template <typename F>
double gl16(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i)
        s += kGl16W[i] * (f(c + h * kGl16X[i]) + f(c - h * kGl16X[i]));
    return s * h;
}

// The tolerance is deliberately not halved on recursion: with a mildly
// singular integrand endpoint the halving makes the leaf tolerance
// unreachable; a constant leaf tolerance bounds the total error by
// (number of leaves) * abs_tol, still far below the accuracy target.
template <typename F>
double adaptive_gl(const F& f, double a, double b, double abs_tol, int depth = 0) {
    const double i16 = gl16(f, a, b);
    const double i8 = gl8(f, a, b);
    const double err = std::fabs(i16 - i8);
    if (err <= abs_tol || depth >= 60) {
        if (depth >= 60 && err > 1e4 * abs_tol)
            throw QuadratureError("panel quadrature failed to converge");
        return i16;
    }
    const double m = 0.5 * (a + b);
    return adaptive_gl(f, a, m, abs_tol, depth + 1) +
           adaptive_gl(f, m, b, abs_tol, depth + 1);
}

// Euler acceleration of an alternating series given its partial sums:
// repeated averaging of adjacent entries. Division-free, so it cannot blow
// up on a nearly converged tail; error estimated from the last levels.
double euler_accelerate(std::vector<double> s, double& err_est) {
    double prev = s.back();
    err_est = std::numeric_limits<double>::infinity();
    while (s.size() > 1) {
        for (std::size_t i = 0; i + 1 < s.size(); ++i) s[i] = 0.5 * (s[i] + s[i + 1]);
        s.pop_back();
        err_est = std::fabs(s.back() - prev);
        prev = s.back();
    }
    return s[0];
}

void check_alpha01_2(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("alpha must lie in (0,2)");
}

// Unit-time density p_1(x) by oscillatory panel quadrature.
double p1_cosine(double alpha, double x) {
    x = std::fabs(x);
    const double rmax = std::pow(46.0, 1.0 / alpha); // exp(-46) ~ 1e-20
    auto f = [alpha, x](double r) { return std::exp(-std::pow(r, alpha)) * std::cos(r * x); };

    const double scale = 1e-14; // panel tolerances relative to O(1) integrand
    if (x * rmax <= 0.5 * kPi) {
        return adaptive_gl(f, 0.0, rmax, scale) / kPi;
    }

    // Zeros of cos(r x) at (k + 1/2) pi / x.
    const double half_period = kPi / x;
    const double z0 = 0.5 * half_period;
    const long n_zeros = static_cast<long>(std::floor((rmax - z0) / half_period)) + 1;

    double total = adaptive_gl(f, 0.0, z0, scale);
    if (n_zeros <= 0) return total / kPi;

    const long direct_cap = 512;
    if (n_zeros <= direct_cap) {
        double lo = z0;
        for (long k = 0; k < n_zeros; ++k) {
            const double hi = std::min(z0 + static_cast<double>(k + 1) * half_period, rmax);
            total += adaptive_gl(f, lo, hi, scale);
            lo = hi;
        }
        return total / kPi;
    }

    // Alternating tail: sum the first panels directly, then accelerate.
    const long n_direct = 40;
    double lo = z0;
    for (long k = 0; k < n_direct; ++k) {
        const double hi = z0 + static_cast<double>(k + 1) * half_period;
        total += adaptive_gl(f, lo, hi, scale);
        lo = hi;
    }
    std::vector<double> partial;
    partial.reserve(72);
    double tail = 0.0;
    for (long k = 0; k < 72; ++k) {
        const double hi = lo + half_period;
        tail += adaptive_gl(f, lo, hi, scale);
        partial.push_back(tail);
        lo = hi;
    }
    double err = 0.0;
    const double lim = euler_accelerate(partial, err);
    if (!std::isfinite(lim) || err > 1e-10 + 1e-7 * std::fabs(total + lim))
        throw QuadratureError("cosine-transform acceleration did not converge");
    return (total + lim) / kPi;
}

// Lower incomplete gamma gamma(q, z) for small z via the standard series.
double lower_inc_gamma(double q, double z) {
    if (z <= 0.0) return 0.0;
    double term = std::pow(z, q) * std::exp(-z) / q;
    double sum = term;
    for (int n = 1; n < 200; ++n) {
        term *= z / (q + n);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

} // namespace

double density_1d(double alpha, double t, double x) {
    check_alpha01_2(alpha);
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    const double c = std::pow(t, -1.0 / alpha);
    return c * p1_cosine(alpha, c * x);
}

double survival_series_1d(double alpha, double x, int terms) {
    double s = 0.0;
    double sign = 1.0;
    double fact = 1.0;
    for (int k = 1; k <= terms; ++k) {
        fact *= k;
        s += sign * std::tgamma(k * alpha) * std::sin(0.5 * kPi * k * alpha) / fact *
             std::pow(x, -static_cast<double>(k) * alpha);
        sign = -sign;
    }
    return s / kPi;
}

// ---------------------------------------------------------------------------
// Subordinator density
// ---------------------------------------------------------------------------

SubordinatorDensity::SubordinatorDensity(double alpha) {
    check_alpha01_2(alpha);
    a_ = 0.5 * alpha;
    c_cos_ = std::cos(0.5 * kPi * a_);
    c_sin_ = std::sin(0.5 * kPi * a_);

    // Where the large-s power series reaches ~1e-9 relative truncation.
    s_series_ = 2.0;
    for (;;) {
        const double t1 = std::tgamma(a_ + 1.0) * std::fabs(std::sin(kPi * a_)) *
                          std::pow(s_series_, -a_ - 1.0);
        const double t6 = std::tgamma(6.0 * a_ + 1.0) / 720.0 *
                          std::pow(s_series_, -6.0 * a_ - 1.0);
        if (t6 < 1e-9 * t1 || s_series_ > 1e6) break;
        s_series_ *= 1.5;
    }

    // Log-spaced cache below the series region. Scan downward until the
    // Fourier integral is swamped by cancellation (the fast-decaying left
    // tail), which marks the numerical support floor.
    const double per_decade = 256.0;
    log_step_ = std::log(10.0) / per_decade;
    const double log_hi = std::log(s_series_);
    std::vector<double> rev;
    double lg = log_hi;
    int dead = 0;
    while (lg > std::log(1e-8)) {
        const double v = eval_fourier(std::exp(lg));
        if (v <= 0.0) {
            ++dead;
            if (dead >= 3) break;
        } else {
            dead = 0;
        }
        rev.push_back(v);
        lg -= log_step_;
    }
    // Trim trailing dead entries and reverse into increasing-s order.
    while (!rev.empty() && rev.back() <= 0.0) {
        rev.pop_back();
        lg += log_step_;
    }
    if (rev.size() < 8)
        throw QuadratureError("subordinator density support scan failed");
    log_lo_ = lg + log_step_;
    s_lo_ = std::exp(log_lo_);
    log_eta_.resize(rev.size());
    for (std::size_t i = 0; i < rev.size(); ++i)
        log_eta_[i] = std::log(rev[rev.size() - 1 - i]);
}

double SubordinatorDensity::eval_fourier(double s) const {
    const double a = a_, c1 = c_cos_, c2 = c_sin_;
    auto f = [=](double u) {
        const double ua = std::pow(u, a);
        return std::exp(-c1 * ua) * std::cos(s * u - c2 * ua);
    };
    const double u_max = std::pow(46.0 / c1, 1.0 / a);
    const double u_star = std::pow(c2 * a / s, 1.0 / (1.0 - a));
    auto phase = [=](double u) { return s * u - c2 * std::pow(u, a); };

    // Breakpoints at phase multiples of pi within each monotone segment.
    std::vector<double> bp;
    bp.push_back(0.0);
    // Only ~120 panels are ever consumed (direct head + accelerated tail);
    // beyond the first 140 level crossings of either monotone segment the
    // envelope is already below the cutoff, so cap the breakpoint count.
    auto add_levels = [&](double ua2, double ub, bool increasing) {
        const double pa = phase(ua2), pb = phase(ub);
        double lo_lv = std::min(pa, pb), hi_lv = std::max(pa, pb);
        long k0 = static_cast<long>(std::ceil(lo_lv / kPi));
        long k1 = static_cast<long>(std::floor(hi_lv / kPi));
        constexpr long cap = 140;
        if (k1 - k0 > cap) {
            if (increasing) k1 = k0 + cap; // crossings met in u-order from below
            else k0 = k1 - cap;            // decreasing phase: high levels first
        }
        for (long k = k0; k <= k1; ++k) {
            const double level = kPi * static_cast<double>(k);
            double lo = ua2, hi = ub;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const bool below = phase(mid) < level;
                if (below == increasing) lo = mid; else hi = mid;
            }
            bp.push_back(0.5 * (lo + hi));
        }
    };
    if (u_star < u_max) {
        add_levels(1e-300, u_star, false);
        bp.push_back(u_star);
        add_levels(u_star, u_max, true);
    } else {
        add_levels(1e-300, u_max, false);
    }
    bp.push_back(u_max);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    const double tol = 1e-14;
    const std::size_t n_panels = bp.size() - 1;
    double abs_sum = 0.0;
    double total = 0.0;

    if (n_panels <= 120) {
        // Short enough: the full integral, no acceleration needed.
        for (std::size_t i = 1; i < bp.size(); ++i) {
            const double term = adaptive_gl(f, bp[i - 1], bp[i], tol);
            total += term;
            abs_sum += std::fabs(term);
        }
    } else {
        // Direct head, then Euler acceleration of the alternating tail of
        // full half-period panels.
        std::size_t i = 1;
        for (; i <= 48; ++i) {
            const double term = adaptive_gl(f, bp[i - 1], bp[i], tol);
            total += term;
            abs_sum += std::fabs(term);
        }
        std::vector<double> partial;
        double tail = 0.0;
        for (int k = 0; k < 72 && i < bp.size(); ++k, ++i) {
            const double term = adaptive_gl(f, bp[i - 1], bp[i], tol);
            tail += term;
            abs_sum += std::fabs(term);
            partial.push_back(tail);
        }
        double err = 0.0;
        const double lim = euler_accelerate(partial, err);
        const bool below_floor = err <= 1e-12 * abs_sum;
        if (!std::isfinite(lim) ||
            (err > 1e-12 + 1e-6 * std::fabs(total + lim) && !below_floor))
            throw QuadratureError("subordinator inversion did not converge");
        total += lim;
    }
    const double v = total / kPi;
    if (!(v > 1e-12 * abs_sum) || !std::isfinite(v)) return 0.0; // cancellation floor
    return v;
}

double SubordinatorDensity::eval_series(double s) const {
    double sum = 0.0;
    double sign = 1.0, fact = 1.0;
    for (int k = 1; k <= 6; ++k) {
        fact *= k;
        sum += sign * std::tgamma(k * a_ + 1.0) * std::sin(kPi * k * a_) / fact *
               std::pow(s, -static_cast<double>(k) * a_ - 1.0);
        sign = -sign;
    }
    return sum / kPi;
}

double SubordinatorDensity::operator()(double s) const {
    if (s >= s_series_) return eval_series(s);
    if (s <= s_lo_) return 0.0;
    const double pos = (std::log(s) - log_lo_) / log_step_;
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(pos),
                                                log_eta_.size() - 2);
    const double f = pos - static_cast<double>(i);
    return std::exp(log_eta_[i] * (1.0 - f) + log_eta_[i + 1] * f);
}

// ---------------------------------------------------------------------------
// Radial density
// ---------------------------------------------------------------------------

RadialDensity::RadialDensity(const StableLaw& law) : law_(law), eta_(law.alpha) {
    if (law.dim > 3)
        throw std::invalid_argument("radial density supports d <= 3");
}

double RadialDensity::radial_unit(double r) const {
    const double d = static_cast<double>(law_.dim);
    const double b = 0.25 * r * r;
    auto integrand = [&](double ls) {
        const double s = std::exp(ls);
        return std::pow(4.0 * kPi * s, -0.5 * d) * std::exp(-b / s) * eta_(s) * s;
    };

    // Simpson in log s across the cached support plus the series region.
    const double lo = std::log(eta_.support_lo());
    const double s_big = std::max({1e4, 100.0 * r * r, 100.0 * eta_.series_from()});
    const double hi = std::log(s_big);
    const int n = 4096; // even
    const double h = (hi - lo) / n;
    double sum = integrand(lo) + integrand(hi);
    for (int i = 1; i < n; ++i)
        sum += integrand(lo + h * i) * (i % 2 ? 4.0 : 2.0);
    double total = sum * h / 3.0;

    // Analytic tail beyond s_big using the two leading series terms of eta.
    const double a = eta_.index();
    const double pref = std::pow(4.0 * kPi, -0.5 * d) / kPi;
    for (int k = 1; k <= 2; ++k) {
        const double coef = (k == 1 ? 1.0 : -0.5) * std::tgamma(k * a + 1.0) *
                            std::sin(kPi * k * a);
        const double q = 0.5 * d + k * a;
        double tail_int;
        if (b > 0.0) {
            tail_int = std::pow(b, -q) * lower_inc_gamma(q, b / s_big);
        } else {
            tail_int = std::pow(s_big, -q) / q;
        }
        total += pref * coef * tail_int;
    }
    return total;
}

double RadialDensity::operator()(double t, double r) const {
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
    if (r < 0.0) throw std::invalid_argument("radius must be nonnegative");
    const double c = std::pow(t, -1.0 / law_.alpha);
    return std::pow(t, -static_cast<double>(law_.dim) / law_.alpha) * radial_unit(c * r);
}

// ---------------------------------------------------------------------------
// CDF of the unit-time 1-d law
// ---------------------------------------------------------------------------

StableCdf1d::StableCdf1d(double alpha) : alpha_(alpha), x_max_(64.0) {
    check_alpha01_2(alpha);
    // Dense linear grid near the body, geometric out to the matching point.
    for (double x = 0.0; x <= 4.0 + 1e-12; x += 1.0 / 128.0) xs_.push_back(x);
    for (double x = xs_.back() * 1.02; x < x_max_; x *= 1.02) xs_.push_back(x);
    xs_.push_back(x_max_);

    cdf_.resize(xs_.size());
    cdf_[0] = 0.5;
    for (std::size_t i = 1; i < xs_.size(); ++i) {
        const double a = xs_[i - 1], b = xs_[i];
        const double m = 0.5 * (a + b);
        const double fa = p1_cosine(alpha_, a), fm = p1_cosine(alpha_, m),
                     fb = p1_cosine(alpha_, b);
        cdf_[i] = cdf_[i - 1] + (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }
}

double StableCdf1d::operator()(double x) const {
    if (x < 0.0) return 1.0 - (*this)(-x);
    if (x >= x_max_) return 1.0 - survival_series_1d(alpha_, x);
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
    if (i + 1 >= xs_.size()) return cdf_.back();
    const double f = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
    return cdf_[i] * (1.0 - f) + cdf_[i + 1] * f;
}

} // namespace stablecones
