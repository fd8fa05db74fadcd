#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace robustgate {

/// Mixes a 64-bit value into a well-distributed seed (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent child seed from (seed, stream). Used to split one
/// experiment seed into per-path / per-task streams without correlation.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(seed ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Seedable random generator with reproducible output across platforms.
///
/// std::mt19937_64 output is pinned by the standard; the Gaussian sampler is
/// a hand-rolled Box-Muller because std::normal_distribution is
/// implementation-defined and would break bit-identical reruns.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : base_(seed), engine_(mix_seed(seed)) {}

    Rng(std::uint64_t seed, std::uint64_t stream) : Rng(split_seed(seed, stream)) {}

    /// Uniform in [0, 1).
    double uniform() {
        // 53 random bits -> double in [0,1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal draw (Box-Muller, cached spare).
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Independent child generator for stream `stream`.
    Rng split(std::uint64_t stream) const { return Rng(base_, stream); }

  private:
    std::uint64_t base_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace robustgate
