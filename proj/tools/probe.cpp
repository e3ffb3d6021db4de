// Temporary development probe; replaced by the real CLI.
#include <cstdio>
#include <cstring>
#include <string>

#include "stablecones/density.hpp"
#include "stablecones/estimate.hpp"
#include "stablecones/killed_mc.hpp"
#include "stablecones/sampler.hpp"

using namespace stablecones;

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "density";
    if (mode == "density") {
        const double alphas[] = {0.6, 1.0, 1.2, 1.5, 1.9};
        const double xs[] = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0, 1000.0};
        for (double a : alphas)
            for (double x : xs)
                std::printf("p1 %.2f %.6g %.17g\n", a, x, density_1d(a, 1.0, x));
    } else if (mode == "radial") {
        for (int d : {1, 2, 3}) {
            StableLaw law(argc > 2 ? std::atof(argv[2]) : 1.0, d);
            RadialDensity p(law);
            for (double r : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0})
                std::printf("pr %d %.2f %.6g %.17g\n", d, law.alpha, r, p(1.0, r));
        }
    } else if (mode == "sampler") {
        const double alpha = argc > 2 ? std::atof(argv[2]) : 1.5;
        StableLaw law(alpha, 1);
        RngStream rng(42, 7);
        const long n = 2000000;
        double mcos = 0.0, tail1 = 0.0;
        for (long i = 0; i < n; ++i) {
            const double v = sample_symmetric_1d(law, 1.0, rng);
            mcos += std::cos(v);
            tail1 += std::fabs(v) > 1.0 ? 1.0 : 0.0;
        }
        std::printf("E cos(X) = %.6f  (target %.6f)\n", mcos / n, std::exp(-1.0));
        std::printf("P(|X|>1) = %.6f\n", tail1 / n);
        RngStream rng2(42, 8);
        double mexp = 0.0;
        for (long i = 0; i < n; ++i)
            mexp += std::exp(-4.0 * sample_positive_stable(0.5, 1.0, rng2));
        std::printf("E exp(-4S) = %.6f (target %.6f)\n", mexp / n, std::exp(-2.0));
    } else if (mode == "eta") {
        const double alpha = argc > 2 ? std::atof(argv[2]) : 1.0;
        SubordinatorDensity eta(alpha);
        std::printf("support_lo %.6g series_from %.6g\n", eta.support_lo(), eta.series_from());
        for (double s : {0.05, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0})
            std::printf("eta %.3g %.17g\n", s, eta(s));
    }
    return 0;
}
