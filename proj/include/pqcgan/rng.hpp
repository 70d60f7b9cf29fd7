#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace pqcgan::rng {

inline constexpr double kTwoPi = 6.28318530717958647692528676656;

/// splitmix64 finalizer. Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Derive a child seed from (base, index). Children of the same base with
/// different indices are decorrelated streams, so work split across shots,
/// repetitions or grid points does not depend on evaluation order.
inline std::uint64_t derive(std::uint64_t base, std::uint64_t index) {
    return mix64(base ^ mix64(index ^ 0xa0761d6478bd642full));
}

inline std::uint64_t derive(std::uint64_t base, std::uint64_t i, std::uint64_t j) {
    return derive(derive(base, i), j);
}

/// Small deterministic PRNG (splitmix64 stream). Identical output on every
/// platform, unlike the distributions in <random>.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1]; safe as a log argument.
    double u01_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Standard normal draw (Box-Muller, one value per call).
    double normal() {
        const double u1 = u01_pos();
        const double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    /// Index i with probability weights[i] / sum(weights). Weights need not
    /// be normalized but must be nonnegative.
    std::size_t sample_index(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = u01() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

  private:
    std::uint64_t state_;
};

} // namespace pqcgan::rng
