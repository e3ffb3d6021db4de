#include "stablecones/killed_mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stablecones/parallel.hpp"
#include "stablecones/sampler.hpp"

namespace stablecones {

namespace {

constexpr std::int64_t kBlock = 4096;

long steps_for(double t, double dt) {
    if (!(t > 0.0) || !(dt > 0.0) || dt > t * (1.0 + 1e-12))
        throw std::invalid_argument("need 0 < dt <= t");
    const double ratio = t / dt;
    const long n = std::lround(ratio);
    if (n < 1 || std::fabs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
        throw std::invalid_argument("t/dt must be a whole number of steps");
    return n;
}

void check_schedule(const std::vector<double>& dts) {
    if (dts.size() < 2)
        throw std::invalid_argument("dt schedule needs at least two values (ratio 2)");
    for (std::size_t i = 1; i < dts.size(); ++i) {
        if (std::fabs(dts[i - 1] / dts[i] - 2.0) > 1e-9)
            throw std::invalid_argument("dt schedule must decrease by factors of 2");
    }
}

struct BlockStat {
    double sum = 0.0;
    double sumsq = 0.0;
    std::int64_t n = 0;
};

EstimateCI reduce_blocks(const std::vector<BlockStat>& blocks, const RngStream& rng, double dt) {
    double sum = 0.0, sumsq = 0.0;
    std::int64_t n = 0;
    for (const auto& b : blocks) {
        sum += b.sum;
        sumsq += b.sumsq;
        n += b.n;
    }
    EstimateCI e;
    e.n = n;
    e.value = sum / static_cast<double>(n);
    const double var = std::max(0.0, (sumsq - sum * e.value) / static_cast<double>(n - 1));
    e.stderr_ = std::sqrt(var / static_cast<double>(n));
    e.seed = rng.seed();
    e.stream_id = rng.stream_id();
    e.dt_used = dt;
    e.finalize_ci();
    return e;
}

} // namespace

KilledMc::KilledMc(const ConeSpec& cone, int workers) : cone_(cone), workers_(workers) {
    if (cone.kind == ConeKind::PuncturedLine || cone.kind == ConeKind::SlitPlane)
        table_ = std::make_shared<HittingTable>(cone.alpha);
}

long KilledMc::run_path(std::span<double> y, long n_steps, double inc_scale,
                        RngStream& rng) const {
    const double alpha = cone_.alpha;
    const double zf = 1.0 / inc_scale; // rescaled position -> bridge coordinate

    switch (cone_.kind) {
        case ConeKind::HalfLine: {
            double v = y[0];
            for (long k = 1; k <= n_steps; ++k) {
                v += inc_scale * sample_symmetric_unit(alpha, rng);
                if (!(v > 0.0)) return k;
            }
            y[0] = v;
            return 0;
        }
        case ConeKind::PuncturedLine: {
            double v = y[0];
            for (long k = 1; k <= n_steps; ++k) {
                const double w = v + inc_scale * sample_symmetric_unit(alpha, rng);
                const double u = rng.uniform();
                if (w == 0.0) return k;
                if (u >= table_->survive_ratio(v * zf, w * zf)) return k;
                v = w;
            }
            y[0] = v;
            return 0;
        }
        case ConeKind::HalfSpace: {
            const std::size_t d = y.size();
            double inc[8];
            for (long k = 1; k <= n_steps; ++k) {
                sample_isotropic_unit_into(alpha, rng, std::span<double>(inc, d));
                for (std::size_t c = 0; c < d; ++c) y[c] += inc_scale * inc[c];
                if (!(y[d - 1] > 0.0)) return k;
            }
            return 0;
        }
        case ConeKind::RightCircular: {
            const std::size_t d = y.size();
            const double cos_eta = std::cos(cone_.aperture);
            double inc[8];
            for (long k = 1; k <= n_steps; ++k) {
                sample_isotropic_unit_into(alpha, rng, std::span<double>(inc, d));
                double norm2 = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    y[c] += inc_scale * inc[c];
                    norm2 += y[c] * y[c];
                }
                const double r = std::sqrt(norm2);
                if (!(y[d - 1] > r * cos_eta) || r == 0.0) return k;
            }
            return 0;
        }
        case ConeKind::SlitPlane: {
            double inc[2];
            double v0 = y[0], v1 = y[1];
            for (long k = 1; k <= n_steps; ++k) {
                sample_isotropic_unit_into(alpha, rng, std::span<double>(inc, 2));
                const double w0 = v0 + inc_scale * inc[0];
                const double w1 = v1 + inc_scale * inc[1];
                const double u = rng.uniform();
                if (w1 == 0.0 && w0 >= 0.0) return k; // landed on the ray
                const double r = table_->survive_ratio(v1 * zf, w1 * zf);
                if (u >= r) {
                    // The perpendicular bridge touched the axis; kill only
                    // if the touch happened on the killed ray x1 > 0.
                    double x1_touch;
                    if ((v1 > 0.0) != (w1 > 0.0)) {
                        const double f = std::fabs(v1) / (std::fabs(v1) + std::fabs(w1));
                        x1_touch = v0 + f * (w0 - v0);
                    } else {
                        x1_touch = std::fabs(v1) <= std::fabs(w1) ? v0 : w0;
                    }
                    if (x1_touch > 0.0) return k;
                }
                v0 = w0;
                v1 = w1;
            }
            y[0] = v0;
            y[1] = v1;
            return 0;
        }
    }
    throw std::logic_error("unsupported cone kind");
}

PathResult KilledMc::simulate_path(std::span<const double> x, double t, double dt,
                                   const RngStream& rng) const {
    if (!contains(cone_, x)) throw std::invalid_argument("start point must lie in the cone");
    const long n = steps_for(t, dt);
    const double alpha = cone_.alpha;
    const double shrink = std::pow(t, -1.0 / alpha);
    const double delta = dt / t;
    const double inc_scale = std::pow(delta, 1.0 / alpha);

    std::vector<double> y(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) y[c] = shrink * x[c];

    RngStream stream = rng;
    const long exit = run_path(y, n, inc_scale, stream);

    PathResult res;
    res.dt = dt;
    if (exit == 0) {
        res.survived = true;
        const double grow = std::pow(t, 1.0 / alpha);
        res.endpoint.resize(x.size());
        for (std::size_t c = 0; c < x.size(); ++c) res.endpoint[c] = grow * y[c];
    } else {
        res.exit_step = exit;
    }
    return res;
}

namespace {

// Shared Richardson combination for survival-style estimates.
RichardsonEstimate combine_richardson(std::vector<DtEstimate> raw, const RngStream& rng) {
    RichardsonEstimate out;
    out.raw = raw; // sorted by decreasing dt
    const std::size_t m = raw.size();
    const DtEstimate& fine = raw[m - 1];
    const DtEstimate& mid = raw[m - 2];

    double order = 0.5;
    if (m >= 3) {
        const DtEstimate& coarse = raw[m - 3];
        const double d1 = coarse.value - mid.value;
        const double d2 = mid.value - fine.value;
        if (d1 * d2 > 0.0) {
            const double ratio = d1 / d2;
            if (ratio > 1.15 && ratio < 8.0)
                order = std::min(2.0, std::max(0.25, std::log2(ratio)));
        }
    }
    out.order = order;

    const double diff = fine.value - mid.value;
    const double sigma_diff = std::hypot(fine.stderr_, mid.stderr_);

    EstimateCI e;
    e.seed = rng.seed();
    e.stream_id = rng.stream_id();
    e.dt_used = fine.dt;
    if (std::fabs(diff) < 2.0 * sigma_diff) {
        // No resolvable bias: pool all dt estimates.
        double wsum = 0.0, vsum = 0.0, n_tot = 0.0;
        for (const auto& r : raw) {
            const double w = static_cast<double>(r.n);
            wsum += w;
            vsum += w * r.value;
            n_tot += static_cast<double>(r.n);
        }
        e.value = vsum / wsum;
        double var = 0.0;
        for (const auto& r : raw) {
            const double w = static_cast<double>(r.n) / wsum;
            var += w * w * r.stderr_ * r.stderr_;
        }
        e.stderr_ = std::sqrt(var);
        e.n = static_cast<std::int64_t>(n_tot);
        e.extrapolated = false;
    } else {
        const double c = 1.0 / (std::pow(2.0, order) - 1.0);
        e.value = fine.value + c * (fine.value - mid.value);
        e.stderr_ = std::hypot((1.0 + c) * fine.stderr_, c * mid.stderr_);
        e.n = fine.n;
        e.extrapolated = true;
    }
    if (m >= 3) {
        const DtEstimate& coarse = raw[m - 3];
        const double c = 1.0 / (std::pow(2.0, order) - 1.0);
        const double ex1 = mid.value + c * (mid.value - coarse.value);
        const double ex2 = fine.value + c * (fine.value - mid.value);
        const double s = std::hypot(mid.stderr_, fine.stderr_) * (1.0 + 2.0 * c);
        if (std::fabs(ex1 - ex2) > 3.0 * s) e.extrapolation_warning = true;
    }
    e.finalize_ci();
    out.estimate = e;
    return out;
}

} // namespace

RichardsonEstimate KilledMc::survival(std::span<const double> x, double t,
                                      std::int64_t n_paths,
                                      const std::vector<double>& dt_schedule,
                                      const RngStream& rng) const {
    if (!contains(cone_, x)) throw std::invalid_argument("start point must lie in the cone");
    std::vector<double> dts = dt_schedule;
    std::sort(dts.begin(), dts.end(), std::greater<>());
    check_schedule(dts);

    const double alpha = cone_.alpha;
    const double shrink = std::pow(t, -1.0 / alpha);
    std::vector<double> y0(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) y0[c] = shrink * x[c];

    std::vector<DtEstimate> raw;
    for (std::size_t d = 0; d < dts.size(); ++d) {
        const long n_steps = steps_for(t, dts[d]);
        const double inc_scale = std::pow(dts[d] / t, 1.0 / alpha);
        const RngStream base = rng.substream(0x5u + d);

        const std::int64_t n_blocks = (n_paths + kBlock - 1) / kBlock;
        std::vector<BlockStat> blocks(static_cast<std::size_t>(n_blocks));
        parallel_for_blocks(n_paths, kBlock, workers_,
            [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
                BlockStat st;
                double y[8];
                for (std::int64_t i = begin; i < end; ++i) {
                    for (std::size_t c = 0; c < y0.size(); ++c) y[c] = y0[c];
                    RngStream path_rng = base.substream(static_cast<std::uint64_t>(i));
                    const long exit =
                        run_path(std::span<double>(y, y0.size()), n_steps, inc_scale, path_rng);
                    const double v = exit == 0 ? 1.0 : 0.0;
                    st.sum += v;
                    st.sumsq += v;
                    ++st.n;
                }
                blocks[static_cast<std::size_t>(b)] = st;
            });
        EstimateCI e = reduce_blocks(blocks, rng, dts[d]);
        raw.push_back({dts[d], e.value, e.stderr_, e.n});
    }
    return combine_richardson(std::move(raw), rng);
}

std::vector<EstimateCI> KilledMc::survival_curve(std::span<const double> x,
                                                 const std::vector<double>& t_grid, double dt,
                                                 std::int64_t n_paths,
                                                 const RngStream& rng) const {
    if (!contains(cone_, x)) throw std::invalid_argument("start point must lie in the cone");
    if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()))
        throw std::invalid_argument("t grid must be increasing");
    const double t_max = t_grid.back();
    const long n_steps = steps_for(t_max, dt);
    std::vector<long> cut;
    for (double t : t_grid) cut.push_back(steps_for(t, dt));

    const double alpha = cone_.alpha;
    const double shrink = std::pow(t_max, -1.0 / alpha);
    const double inc_scale = std::pow(dt / t_max, 1.0 / alpha);
    std::vector<double> y0(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) y0[c] = shrink * x[c];

    const std::int64_t n_blocks = (n_paths + kBlock - 1) / kBlock;
    std::vector<std::vector<std::int64_t>> counts(
        static_cast<std::size_t>(n_blocks), std::vector<std::int64_t>(t_grid.size(), 0));
    parallel_for_blocks(n_paths, kBlock, workers_,
        [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
            double y[8];
            auto& cnt = counts[static_cast<std::size_t>(b)];
            for (std::int64_t i = begin; i < end; ++i) {
                for (std::size_t c = 0; c < y0.size(); ++c) y[c] = y0[c];
                RngStream path_rng = rng.substream(static_cast<std::uint64_t>(i));
                const long exit =
                    run_path(std::span<double>(y, y0.size()), n_steps, inc_scale, path_rng);
                for (std::size_t j = 0; j < cut.size(); ++j)
                    if (exit == 0 || exit > cut[j]) ++cnt[j];
            }
        });

    std::vector<EstimateCI> out;
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        std::int64_t k = 0;
        for (const auto& cnt : counts) k += cnt[j];
        EstimateCI e;
        e.n = n_paths;
        e.value = static_cast<double>(k) / static_cast<double>(n_paths);
        e.stderr_ = std::sqrt(std::max(0.0, e.value * (1.0 - e.value) /
                                                 static_cast<double>(n_paths - 1)));
        e.seed = rng.seed();
        e.stream_id = rng.stream_id();
        e.dt_used = dt;
        e.finalize_ci();
        out.push_back(e);
    }
    return out;
}

RichardsonEstimate KilledMc::martin_invariance(std::span<const double> x, double t,
                                               std::int64_t n_paths,
                                               const std::vector<double>& dt_schedule,
                                               const RngStream& rng) const {
    const MartinKernel M = MartinKernel::exact(cone_); // refuses surrogate cones
    if (!contains(cone_, x)) throw std::invalid_argument("start point must lie in the cone");
    const double mx = M(x);

    std::vector<double> dts = dt_schedule;
    std::sort(dts.begin(), dts.end(), std::greater<>());
    check_schedule(dts);

    const double alpha = cone_.alpha;
    const double shrink = std::pow(t, -1.0 / alpha);
    const double grow = std::pow(t, 1.0 / alpha);
    std::vector<double> y0(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) y0[c] = shrink * x[c];

    std::vector<DtEstimate> raw;
    for (std::size_t d = 0; d < dts.size(); ++d) {
        const long n_steps = steps_for(t, dts[d]);
        const double inc_scale = std::pow(dts[d] / t, 1.0 / alpha);
        const RngStream base = rng.substream(0x11u + d);

        const std::int64_t n_blocks = (n_paths + kBlock - 1) / kBlock;
        std::vector<BlockStat> blocks(static_cast<std::size_t>(n_blocks));
        parallel_for_blocks(n_paths, kBlock, workers_,
            [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
                BlockStat st;
                double y[8], endpoint[8];
                for (std::int64_t i = begin; i < end; ++i) {
                    for (std::size_t c = 0; c < y0.size(); ++c) y[c] = y0[c];
                    RngStream path_rng = base.substream(static_cast<std::uint64_t>(i));
                    const long exit =
                        run_path(std::span<double>(y, y0.size()), n_steps, inc_scale, path_rng);
                    double v = 0.0;
                    if (exit == 0) {
                        for (std::size_t c = 0; c < y0.size(); ++c) endpoint[c] = grow * y[c];
                        v = M(std::span<const double>(endpoint, y0.size())) / mx;
                    }
                    st.sum += v;
                    st.sumsq += v * v;
                    ++st.n;
                }
                blocks[static_cast<std::size_t>(b)] = st;
            });
        EstimateCI e = reduce_blocks(blocks, rng, dts[d]);
        raw.push_back({dts[d], e.value, e.stderr_, e.n});
    }
    return combine_richardson(std::move(raw), rng);
}

namespace {

std::vector<double> draw_start(const InitialLaw& law, const ConeSpec& cone, RngStream& rng) {
    if (std::holds_alternative<PointMass>(law)) {
        return std::get<PointMass>(law).x;
    }
    if (std::holds_alternative<UniformBox>(law)) {
        const auto& box = std::get<UniformBox>(law);
        std::vector<double> x(box.lo.size());
        for (;;) {
            for (std::size_t c = 0; c < x.size(); ++c)
                x[c] = box.lo[c] + (box.hi[c] - box.lo[c]) * rng.uniform();
            if (contains(cone, x)) return x;
        }
    }
    const auto& par = std::get<ParetoTail>(law);
    const double u = rng.uniform_open();
    return {par.x_min * std::pow(u, -1.0 / par.index)};
}

void validate_initial(const InitialLaw& law, const ConeSpec& cone) {
    if (std::holds_alternative<PointMass>(law)) {
        const auto& x = std::get<PointMass>(law).x;
        if (!contains(cone, x)) throw std::invalid_argument("point mass must lie in the cone");
        return;
    }
    if (std::holds_alternative<UniformBox>(law)) {
        const auto& box = std::get<UniformBox>(law);
        if (box.lo.size() != static_cast<std::size_t>(cone.dim) || box.lo.size() != box.hi.size())
            throw std::invalid_argument("box dimension mismatch");
        for (std::size_t c = 0; c < box.lo.size(); ++c)
            if (!(box.lo[c] < box.hi[c])) throw std::invalid_argument("empty box");
        return;
    }
    const auto& par = std::get<ParetoTail>(law);
    if (cone.dim != 1) throw std::invalid_argument("power-tail law is 1-d");
    if (!(par.index > cone.alpha))
        throw std::invalid_argument("power-tail index must exceed alpha (finite alpha-moment)");
    if (!(par.x_min > 0.0)) throw std::invalid_argument("x_min must be positive");
}

} // namespace

YaglomResult KilledMc::yaglom_samples(const InitialLaw& start, double t,
                                      std::int64_t n_target_survivors, double dt,
                                      const RngStream& rng, double min_rate) const {
    validate_initial(start, cone_);
    const long n_steps = steps_for(t, dt);
    const double alpha = cone_.alpha;
    const double shrink = std::pow(t, -1.0 / alpha);
    const double inc_scale = std::pow(dt / t, 1.0 / alpha);
    const std::size_t d = static_cast<std::size_t>(cone_.dim);

    YaglomResult res;
    const std::int64_t pilot = 8192;
    std::int64_t batch_index = 0;
    while (static_cast<std::int64_t>(res.samples.size()) < n_target_survivors) {
        const std::int64_t batch =
            batch_index == 0 ? pilot
                             : std::max<std::int64_t>(
                                   kBlock, static_cast<std::int64_t>(
                                               static_cast<double>(n_target_survivors -
                                                                   static_cast<std::int64_t>(
                                                                       res.samples.size())) /
                                               std::max(res.survival_rate, 1e-6)));
        const std::int64_t n_blocks = (batch + kBlock - 1) / kBlock;
        std::vector<std::vector<std::vector<double>>> block_hits(
            static_cast<std::size_t>(n_blocks));
        const RngStream base = rng.substream(0x100u + static_cast<std::uint64_t>(batch_index));
        parallel_for_blocks(batch, kBlock, workers_,
            [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
                auto& hits = block_hits[static_cast<std::size_t>(b)];
                double y[8];
                for (std::int64_t i = begin; i < end; ++i) {
                    RngStream path_rng = base.substream(static_cast<std::uint64_t>(i));
                    const std::vector<double> x0 = draw_start(start, cone_, path_rng);
                    for (std::size_t c = 0; c < d; ++c) y[c] = shrink * x0[c];
                    const long exit =
                        run_path(std::span<double>(y, d), n_steps, inc_scale, path_rng);
                    if (exit == 0) hits.emplace_back(y, y + d);
                }
            });
        for (auto& hits : block_hits)
            for (auto& h : hits) res.samples.push_back(std::move(h));
        res.paths_run += batch;
        res.survival_rate =
            static_cast<double>(res.samples.size()) / static_cast<double>(res.paths_run);
        ++batch_index;
        if (res.paths_run >= pilot && res.survival_rate < min_rate)
            throw std::runtime_error(
                "yaglom sampling aborted: survival rate " + std::to_string(res.survival_rate) +
                " below the cost guard " + std::to_string(min_rate));
    }
    return res;
}

BetaEstimate KilledMc::estimate_beta(std::span<const double> x,
                                     const std::vector<double>& t_grid,
                                     std::int64_t n_paths_per_t, int steps_per_horizon,
                                     int replicates, const RngStream& rng) const {
    if (!contains(cone_, x)) throw std::invalid_argument("start point must lie in the cone");
    if (t_grid.size() < 3) throw std::invalid_argument("need at least 3 horizons");
    if (!(t_grid.back() / t_grid.front() >= 7.99))
        throw std::invalid_argument("t grid must span at least three octaves");
    if (replicates < 2) throw std::invalid_argument("need at least 2 replicates");
    const double alpha = cone_.alpha;
    double x_norm = 0.0;
    for (double c : x) x_norm += c * c;
    if (std::sqrt(x_norm) > std::pow(t_grid.front(), 1.0 / alpha) * (1.0 + 1e-12))
        throw std::invalid_argument("start point must satisfy |x| <= t_min^{1/alpha}");

    std::vector<double> log_t;
    for (double t : t_grid) log_t.push_back(std::log(t));

    std::vector<double> slopes;
    std::vector<std::vector<double>> surv(t_grid.size());
    for (int r = 0; r < replicates; ++r) {
        std::vector<double> log_p;
        for (std::size_t j = 0; j < t_grid.size(); ++j) {
            const double t = t_grid[j];
            const double dt = t / static_cast<double>(steps_per_horizon);
            const long n_steps = steps_per_horizon;
            const double shrink = std::pow(t, -1.0 / alpha);
            const double inc_scale = std::pow(dt / t, 1.0 / alpha);
            std::vector<double> y0(x.size());
            for (std::size_t c = 0; c < x.size(); ++c) y0[c] = shrink * x[c];

            const RngStream base =
                rng.substream(0x1000u + static_cast<std::uint64_t>(r) * 1024u +
                              static_cast<std::uint64_t>(j));
            const std::int64_t n_blocks = (n_paths_per_t + kBlock - 1) / kBlock;
            std::vector<std::int64_t> alive(static_cast<std::size_t>(n_blocks), 0);
            parallel_for_blocks(n_paths_per_t, kBlock, workers_,
                [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
                    std::int64_t cnt = 0;
                    double y[8];
                    for (std::int64_t i = begin; i < end; ++i) {
                        for (std::size_t c = 0; c < y0.size(); ++c) y[c] = y0[c];
                        RngStream path_rng = base.substream(static_cast<std::uint64_t>(i));
                        if (run_path(std::span<double>(y, y0.size()), n_steps, inc_scale,
                                     path_rng) == 0)
                            ++cnt;
                    }
                    alive[static_cast<std::size_t>(b)] = cnt;
                });
            std::int64_t k = 0;
            for (auto c : alive) k += c;
            if (k == 0)
                throw std::runtime_error("no survivors at t = " + std::to_string(t) +
                                         "; increase n_paths_per_t");
            const double p = static_cast<double>(k) / static_cast<double>(n_paths_per_t);
            surv[j].push_back(p);
            log_p.push_back(std::log(p));
        }
        slopes.push_back(fit_line(log_t, log_p).slope);
    }

    const auto [slope_mean, slope_se] = mean_stderr(slopes);
    BetaEstimate est;
    est.beta_hat = -alpha * slope_mean;
    est.stderr_ = alpha * slope_se;
    est.t_grid = t_grid;
    std::vector<double> mean_log_p;
    for (std::size_t j = 0; j < t_grid.size(); ++j) {
        double m = 0.0;
        for (double p : surv[j]) m += p;
        m /= static_cast<double>(surv[j].size());
        est.survival_mean.push_back(m);
        mean_log_p.push_back(std::log(m));
    }
    est.r2 = fit_line(log_t, mean_log_p).r2;
    est.fit_warning = est.r2 < 0.99;
    return est;
}

} // namespace stablecones
