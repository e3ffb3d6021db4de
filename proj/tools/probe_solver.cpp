// Temporary development probe for the grid solver.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "stablecones/density.hpp"
#include "stablecones/grid_solver.hpp"
#include "stablecones/killed_mc.hpp"

using namespace stablecones;

int main(int argc, char** argv) {
    const std::string mode = argc > 1 ? argv[1] : "small";
    const double alpha = argc > 2 ? std::atof(argv[2]) : 1.0;

    if (mode == "small") {
        const ConeSpec cone = ConeSpec::half_line(alpha);
        Grid1D grid = make_grid(cone, 16.0, 1.0 / 32.0);
        Eigen::MatrixXd A = build_operator(alpha, grid);
        std::printf("n = %zu\n", grid.size());
        // Row sums
        Eigen::VectorXd rs = A.rowwise().sum();
        std::printf("max row sum %.3e (must be < 0)\n", rs.maxCoeff());
        std::printf("symmetric: %d\n", (A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);

        Spectrum spec(A, grid, alpha);
        // Chapman-Kolmogorov at t=s=0.5
        GridKernel K1 = spec.kernel(0.5);
        GridKernel K2 = spec.kernel(1.0);
        Eigen::MatrixXd comp = K1.K * K1.K * grid.weight;
        std::printf("CK max err %.3e\n", (comp - K2.K).cwiseAbs().maxCoeff());

        // Domination by the free density
        double worst = 0.0;
        for (long i = 0; i < (long)grid.size(); i += 37)
            for (long j = 0; j < (long)grid.size(); j += 23) {
                const double free = density_1d(alpha, 1.0, grid.nodes[i] - grid.nodes[j]);
                worst = std::max(worst, K2.K(i, j) / free);
            }
        std::printf("max K/p ratio %.6f (must be <= 1+1e-3)\n", worst);

        // Survival at x=1, t=1
        Eigen::VectorXd s = spec.survival(1.0);
        std::printf("survival(1,1) = %.6f\n", s(grid.nearest(1.0)));

        // Symbol test at xi=1 on this grid
        Eigen::VectorXd re(grid.size()), im(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            re(i) = std::cos(grid.nodes[i]);
            im(i) = std::sin(grid.nodes[i]);
        }
        Eigen::VectorXd Are = apply_operator(alpha, grid, re);
        Eigen::VectorXd Aim = apply_operator(alpha, grid, im);
        const std::size_t mid = grid.nearest(4.0);
        // -(Are + i Aim) should equal |xi|^alpha (cos + i sin) near the middle
        std::printf("symbol: re %.6f (want %.6f), im %.6f (want %.6f)\n", -Are(mid),
                    re(mid), -Aim(mid), im(mid));

        // Stationary density
        Eigen::VectorXd M(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            M(i) = std::pow(grid.nodes[i], alpha / 2);
        StationaryResult st = ou_stationary(spec, M, initial_uniform_ball(grid, M));
        std::printf("phi: converged=%d iters=%d residual=%.3e\n", st.converged,
                    st.iterations, st.residual);
        StationaryResult st2 = ou_stationary(spec, M, initial_triangular(grid, M));
        const double dist = ((st.phi - st2.phi).array().abs() * M.array().square()).sum() * grid.weight;
        std::printf("two-start L1(M^2) distance %.3e\n", dist);
        const double c1 = (st.phi.array() * M.array()).sum() * grid.weight;
        std::printf("C1 = %.6f\n", c1);
        // Vertex limit: survival/M at nodes nearest 0 vs C1
        for (int i = 0; i < 5; ++i)
            std::printf("  node %d: surv/M = %.6f\n", i, s(i) / M(i));
        // phi envelope
        double env_lo = 1e300, env_hi = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid.nodes[i] > 8.0) break;
            const double e = st.phi(i) * std::pow(1.0 + grid.nodes[i], 1.0 + 1.5 * alpha);
            env_lo = std::min(env_lo, e);
            env_hi = std::max(env_hi, e);
        }
        std::printf("phi envelope ratio on [0,R/2]: %.3f\n", env_hi / env_lo);
    } else if (mode == "vertex") {
        const double R = argc > 3 ? std::atof(argv[3]) : 64.0;
        const double h = argc > 4 ? 1.0 / std::atof(argv[4]) : 1.0 / 64.0;
        const ConeSpec cone = ConeSpec::half_line(alpha);
        Grid1D grid = make_grid(cone, R, h);
        std::printf("n = %zu\n", grid.size());
        Eigen::MatrixXd A = build_operator(alpha, grid);
        Spectrum spec(A, grid, alpha);
        Eigen::VectorXd M(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            M(i) = std::pow(grid.nodes[i], alpha / 2);
        StationaryResult st = ou_stationary(spec, M, initial_uniform_ball(grid, M));
        std::printf("phi converged=%d residual=%.2e iters=%d\n", st.converged, st.residual,
                    st.iterations);
        // Tail coefficient: phi ~ kappa y^{-1-3a/2} fitted on [R/4, R/2]
        double kap = 0.0;
        int cnt = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double y = grid.nodes[i];
            if (y < R / 4 || y > R / 2) continue;
            kap += st.phi(i) * std::pow(y, 1.0 + 1.5 * alpha);
            ++cnt;
        }
        kap /= cnt;
        // Tail integrals beyond R: int phi M^2 ~ kap y^{-1-a/2}; int phi M ~ kap y^{-1-a}
        const double tail_m2 = kap * std::pow(R, -0.5 * alpha) / (0.5 * alpha);
        const double tail_m1 = kap * std::pow(R, -alpha) / alpha;
        const double mass_grid = (st.phi.array() * M.array().square()).sum() * grid.weight;
        const double c1_grid = (st.phi.array() * M.array()).sum() * grid.weight;
        std::printf("grid mass=%.6f tail_m2=%.6f  -> corrected scale %.6f\n", mass_grid,
                    tail_m2, 1.0 / (mass_grid + tail_m2));
        const double scale = 1.0 / (mass_grid + tail_m2);
        const double c1 = scale * (c1_grid + tail_m1);
        std::printf("C1 grid=%.6f corrected=%.6f\n", c1_grid, c1);
        Eigen::VectorXd s = spec.survival(1.0);
        for (int i = 0; i < 8; ++i)
            std::printf("  x=%.4f surv/M = %.6f\n", grid.nodes[i], s(i) / M(i));
        for (double x : {0.25, 0.5, 1.0, 2.0})
            std::printf("  x=%.3f surv/M = %.6f\n", x,
                        s(grid.nearest(x)) / M(grid.nearest(x)));
    } else if (mode == "yaglom") {
        const double R = argc > 3 ? std::atof(argv[3]) : 64.0;
        const double h = argc > 4 ? 1.0 / std::atof(argv[4]) : 1.0 / 64.0;
        const ConeSpec cone = ConeSpec::half_line(alpha);
        Grid1D grid = make_grid(cone, R, h);
        Eigen::MatrixXd A = build_operator(alpha, grid);
        Spectrum spec(A, grid, alpha);
        Eigen::VectorXd M(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            M(i) = std::pow(grid.nodes[i], alpha / 2);
        StationaryResult st = ou_stationary(spec, M, initial_uniform_ball(grid, M));
        auto [c1g, mu] = c1_and_mu(st.phi, M, grid);
        StationaryCalibration cal = calibrate_stationary(st, spec);
        std::printf("grid C1=%.6f calibrated C1=%.6f gamma=%.4f kappa=%.4f overlap=%.4f\n",
                    c1g, cal.c1, cal.gamma, cal.tail_coef, cal.overlap_ratio);
        const double c1 = cal.c1;
        std::printf("mu grid total mass %.6f\n",
                    mu.sum() * grid.weight);
        // MC survivors at t = 64
        KilledMc mc(cone);
        RngStream rng(99, 5);
        const double t = 64.0;
        auto yr = mc.yaglom_samples(PointMass{{1.0}}, t, 20000, 0.0625, rng);
        std::printf("paths=%lld rate=%.4f survivors=%zu\n", (long long)yr.paths_run,
                    yr.survival_rate, yr.samples.size());
        // KS against the calibrated mu CDF
        std::vector<double> xs;
        for (const auto& s : yr.samples) xs.push_back(s[0]);
        std::sort(xs.begin(), xs.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double F = cal.mu_cdf(xs[i]);
            ks = std::max(ks, std::fabs(F - (double)i / xs.size()));
            ks = std::max(ks, std::fabs((double)(i + 1) / xs.size() - F));
        }
        std::printf("KS(mc survivors, calibrated mu) = %.4f\n", ks);
        auto q = [&](double p) { return xs[(std::size_t)(p * (xs.size() - 1))]; };
        std::printf("mc quantiles: 25%%=%.4f 50%%=%.4f 75%%=%.4f 90%%=%.4f\n", q(0.25),
                    q(0.5), q(0.75), q(0.9));
        for (double p : {0.25, 0.5, 0.75, 0.9}) {
            double lo = 0.0, hi = 2000.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (cal.mu_cdf(mid) < p) lo = mid; else hi = mid;
            }
            std::printf("mu q%.0f%% = %.4f  ", 100 * p, 0.5 * (lo + hi));
        }
        std::printf("\n");
        // Entrance-law mass at t in {1,4}: quadrature on the fine grid with
        // the wide shape plus the analytic tail.
        EntranceLaw psi = cal.entrance_law();
        for (double t : {1.0, 4.0}) {
            double m = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                m += psi(t, grid.nodes[i]) * M(i) * grid.weight;
            const double arg = grid.R * std::pow(t, -1.0 / alpha);
            const double tail = (1.0 - cal.mass_m2(arg));
            std::printf("int Psi_%g M = %.6f (grid %.6f + tail %.6f)\n", t, m + tail, m,
                        tail);
        }
        // survival of MC vs C1 M(x) t^{-b/a} prediction
        const double pred = c1 * std::pow(t, -0.5);
        std::printf("mc survival rate %.5f vs C1 t^{-1/2} = %.5f\n", yr.survival_rate, pred);
    } else if (mode == "lam") {
        const double R = argc > 3 ? std::atof(argv[3]) : 64.0;
        const double h = argc > 4 ? 1.0 / std::atof(argv[4]) : 1.0 / 64.0;
        const ConeSpec cone = ConeSpec::half_line(alpha);
        Grid1D grid = make_grid(cone, R, h);
        Eigen::MatrixXd A = build_operator(alpha, grid);
        Spectrum spec(A, grid, alpha);
        Eigen::VectorXd M(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            M(i) = std::pow(grid.nodes[i], alpha / 2);
        StationaryResult st = ou_stationary(spec, M, initial_uniform_ball(grid, M));
        // one raw step without renormalization
        const double s0 = 1.0 - std::exp(-0.6931471805599453);
        const double contract = std::exp(-0.6931471805599453 / alpha);
        GridKernel K = spec.kernel(s0);
        Eigen::MatrixXd rho = rho_kernel(K, M);
        Eigen::VectorXd g = Eigen::VectorXd::Zero((long)grid.size());
        for (long i = 0; i < (long)grid.size(); ++i) {
            const double cx = contract * grid.nodes[i];
            const std::size_t gi = grid.nearest(cx);
            g((long)gi) += M(i) * M(i) * grid.weight * st.phi(i); // nearest-node only (diagnostic)
        }
        Eigen::VectorXd out = rho * g;
        const double mass = (out.array() * M.array().square()).sum() * grid.weight;
        std::printf("lambda1 (mass retained per ln2 step) = %.6f\n", mass);
        // Entrance-law mass at t = 4: integral over grid of Psi_4 M
        PhiInterp phin(grid, st.phi);
        MartinKernel Mk = MartinKernel::exact(cone);
        EntranceLaw psi(phin, Mk, alpha / 2);
        double m4 = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            m4 += psi(4.0, grid.nodes[i]) * M(i) * grid.weight;
        std::printf("int Psi_4 M = %.6f\n", m4);
    } else if (mode == "profile") {
        const double R = argc > 3 ? std::atof(argv[3]) : 64.0;
        const double h = argc > 4 ? 1.0 / std::atof(argv[4]) : 1.0 / 64.0;
        const ConeSpec cone = ConeSpec::half_line(alpha);
        Grid1D grid = make_grid(cone, R, h);
        Eigen::MatrixXd A = build_operator(alpha, grid);
        Spectrum spec(A, grid, alpha);
        Eigen::VectorXd M(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            M(i) = std::pow(grid.nodes[i], alpha / 2);
        StationaryResult st = ou_stationary(spec, M, initial_uniform_ball(grid, M));
        const double p = 1.0 + 1.5 * alpha;
        for (double y = 0.5; y < R; y *= 2.0) {
            const std::size_t i = grid.nearest(y);
            std::printf("y=%8.2f  phi*y^p = %.6f   phi=%.6e\n", grid.nodes[i],
                        st.phi(i) * std::pow(grid.nodes[i], p), st.phi(i));
        }
        const double c1g = (st.phi.array() * M.array()).sum() * grid.weight;
        std::printf("grid C1 = %.6f\n", c1g);
    } else if (mode == "decay") {
        const double R = argc > 3 ? std::atof(argv[3]) : 64.0;
        const double h = argc > 4 ? 1.0 / std::atof(argv[4]) : 1.0 / 64.0;
        const ConeSpec cone = ConeSpec::half_line(alpha);
        Grid1D grid = make_grid(cone, R, h);
        Eigen::MatrixXd A = build_operator(alpha, grid);
        Spectrum spec(A, grid, alpha);
        const MartinKernel Mk = MartinKernel::exact(cone);
        Eigen::VectorXd M = martin_on_grid(Mk, grid);
        StationaryResult st = ou_stationary(spec, M, initial_uniform_ball(grid, M));
        const double beta = alpha / 2;
        PhiInterp phin = PhiInterp(grid, st.phi).with_tail(1.0 + alpha + beta);
        EntranceLaw psi(phin, Mk, beta);

        // Vertex monotonicity: L1(M^2) distance of rho_1 columns to the
        // continuum-calibrated phi.
        StationaryCalibration cal = calibrate_stationary(st, spec);
        const double scale = cal.gamma * cal.overlap_ratio;
        std::printf("calibration: gamma=%.4f overlap=%.4f scale=%.4f\n", cal.gamma,
                    cal.overlap_ratio, scale);
        GridKernel K1 = spec.kernel(1.0);
        Eigen::MatrixXd rho = rho_kernel(K1, M);
        Eigen::VectorXd phin_norm = scale * st.phi;
        const double phim = (phin_norm.array() * M.array().square()).sum() * grid.weight;
        for (int k = 0; k < 12; ++k) {
            const int i = k < 8 ? k : (k - 7) * 16; // first nodes then 0.25,0.5,...
            Eigen::VectorXd col = rho.col(i);
            const double cm = (col.array() * M.array().square()).sum() * grid.weight;
            const double d = ((col / cm - phin_norm / phim).array().abs() *
                              M.array().square()).sum() * grid.weight;
            const double draw = ((col - phin_norm).array().abs() *
                                 M.array().square()).sum() * grid.weight;
            std::printf("x=%.4f: colmass=%.4f d_norm=%.6f d_raw=%.6f\n",
                        grid.nodes[i], cm, d, draw);
        }

        // f = Psi_1 identity row
        Eigen::VectorXd f1(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) f1(i) = psi(1.0, grid.nodes[i]);
        for (double q : {1.0, 2.0}) {
            DecayTable tb = decay_check(f1, q, {1.0, 2.0, 4.0, 8.0, 16.0}, spec, M, psi);
            std::printf("identity q=%g A=%.6f:", q, tb.mass_target);
            for (auto& r : tb.rows) std::printf(" %.2e", r.rescaled);
            std::printf(" trunc_warn=%d\n", tb.truncation_warning);
        }
        // A = 0 pair of hats
        auto hat = [&](double c, double wdt, double x) {
            const double a2 = std::fabs(x - c);
            return a2 < wdt ? 1.0 - a2 / wdt : 0.0;
        };
        Eigen::VectorXd f(grid.size());
        double m1v = 0.0, m2v = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            m1v += hat(1.0, 0.5, grid.nodes[i]) * M(i) * grid.weight;
            m2v += hat(2.0, 0.5, grid.nodes[i]) * M(i) * grid.weight;
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            f(i) = hat(1.0, 0.5, grid.nodes[i]) - m1v / m2v * hat(2.0, 0.5, grid.nodes[i]);
        for (double q : {1.0, 2.0}) {
            DecayTable tb = decay_check(f, q, {1.0, 2.0, 4.0, 8.0, 16.0}, spec, M, psi);
            std::printf("A0 q=%g A=%.2e:", q, tb.mass_target);
            for (auto& r : tb.rows) std::printf(" %.3e", r.rescaled);
            std::printf("\n  mass:");
            for (auto& r : tb.rows) std::printf(" %.2e", r.mass);
            std::printf(" (target %.2e) trunc=%d\n", tb.mass_target, tb.truncation_warning);
        }
        // Hypercontractivity q=1
        std::printf("hyper q=1: %.6f\n", hypercontractivity_check(rho, M, grid, 1.0));
        std::printf("hyper q=2: %.6f\n", hypercontractivity_check(rho, M, grid, 2.0));
        // Semigroup identity at s=t=1/2, x=1
        GridKernel Kh = spec.kernel(0.5);
        Eigen::VectorXd ps(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) ps(i) = psi(0.5, grid.nodes[i]);
        Eigen::VectorXd evolved = spec.apply(0.5, ps);
        for (double xq : {0.5, 1.0, 2.0, 4.0, 8.0}) {
            const std::size_t i = grid.nearest(xq);
            std::printf("psi evol x=%g: %.6f vs %.6f\n", xq, evolved(i),
                        psi(1.0, grid.nodes[i]));
        }
    } else if (mode == "mc") {
        const double x = argc > 3 ? std::atof(argv[3]) : 0.125;
        const long n = argc > 4 ? std::atol(argv[4]) : 200000;
        const ConeSpec cone = ConeSpec::half_line(alpha);
        KilledMc mc(cone);
        RngStream rng(2024, 1);
        const double pt[1] = {x};
        auto r = mc.survival(std::span<const double>(pt, 1), 1.0, n, {1e-3, 5e-4}, rng);
        for (const auto& d : r.raw)
            std::printf("dt=%.4g  surv=%.6f +- %.6f\n", d.dt, d.value, d.stderr_);
        std::printf("combined %.6f +- %.6f (extrap=%d), ratio to M = %.6f\n",
                    r.estimate.value, r.estimate.stderr_, r.estimate.extrapolated,
                    r.estimate.value / std::pow(x, alpha / 2));
    }
    return 0;
}
