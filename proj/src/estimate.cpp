#include "stablecones/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stablecones {

std::pair<double, double> mean_stderr(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("empty sample");
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

namespace {
double ks_lambda(double level) {
    // Inverse of the Kolmogorov distribution tail at the given level.
    if (level == 0.05) return 1.3581;
    if (level == 0.01) return 1.6276;
    // K(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2); bisect.
    double lo = 0.3, hi = 3.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double tail = 0.0;
        for (int k = 1; k <= 50; ++k)
            tail += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * mid * mid);
        if (tail > level) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}
} // namespace

double ks_critical_one_sample(std::size_t n, double level) {
    return ks_lambda(level) / std::sqrt(static_cast<double>(n));
}

double ks_critical_two_sample(std::size_t n, std::size_t m, double level) {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return ks_lambda(level) * std::sqrt((nn + mm) / (nn * mm));
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::invalid_argument("need at least 3 points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.slope_stderr = x.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
    return fit;
}

} // namespace stablecones
