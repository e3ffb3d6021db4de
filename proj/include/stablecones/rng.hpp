#ifndef STABLECONES_RNG_HPP
#define STABLECONES_RNG_HPP

#include <cstdint>
#include <cmath>

namespace stablecones {

// 64-bit finalizer used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Reproducible random stream identified by (seed, stream_id).
///
/// The core generator is xoshiro256++ seeded through splitmix64, so the
/// sequence is a pure function of (seed, stream_id) on every platform.
/// Distinct stream_ids give statistically independent streams; engines
/// derive one child stream per Monte Carlo path via substream(), which
/// keeps results independent of scheduling and worker count.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), id_(stream_id) {
        std::uint64_t st = seed;
        (void)splitmix64(st);
        st ^= stream_id * 0xda942042e4dd58b5ULL;
        s_[0] = splitmix64(st);
        s_[1] = splitmix64(st);
        s_[2] = splitmix64(st);
        s_[3] = splitmix64(st);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0,1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on the open interval (0,1).
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exp(1), strictly positive.
    double exponential() {
        return -std::log1p(-uniform());
    }

    /// Standard normal pair (Box-Muller); no state beyond the counter.
    void normal_pair(double& z0, double& z1) {
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        z0 = r * std::cos(a);
        z1 = r * std::sin(a);
    }

    /// Independent child stream; index may be a path or block number.
    RngStream substream(std::uint64_t index) const {
        std::uint64_t st = id_ ^ (0x9e3779b97f4a7c15ULL + (index << 1));
        const std::uint64_t child = splitmix64(st) ^ (index * 0xd1342543de82ef95ULL);
        return RngStream(seed_, child);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return id_; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
    std::uint64_t seed_;
    std::uint64_t id_;
};

} // namespace stablecones

#endif
