/*
 * Deterministic random number generation. Every stochastic quantity in a
 * simulation (mismatch draws, noise injection, shuffle partitions) is pulled
 * from substreams derived from one 64-bit seed, so identical (config, seed)
 * pairs reproduce bit-identical runs.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nssar {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Independent stream for (seed, purpose/trial index).
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(splitmix64(seed ^ splitmix64(stream + 0x51ed2701)));
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in [-1, 1).
    double uniform_pm() { return 2.0 * uniform() - 1.0; }

    /// Standard normal via the Marsaglia polar method. The transform is done
    /// by hand so the sequence does not depend on the standard library's
    /// distribution implementation.
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = uniform_pm();
            v = uniform_pm();
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    std::uint64_t bits() { return gen_(); }

    /// Unbiased integer in [0, n).
    std::uint32_t below(std::uint32_t n) {
        const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= bound);
        return static_cast<std::uint32_t>(r % n);
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace nssar
