#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace rbai {

// splitmix64 step; used to derive independent stream seeds from one trial seed
// so that environment noise is unaffected by how the policy consumes draws.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t label) {
    std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (label + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// mt19937_64 wrapped with sampling helpers that avoid std::*_distribution,
// whose outputs differ across standard library implementations.
class Rng {
  public:
    Rng() : engine_(0) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform double in [0, 1) with 53 random bits
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform index in {0, ..., n-1}
    int uniform_index(int n) {
        double u = next_double();
        int k = static_cast<int>(u * n);
        return k < n ? k : n - 1;
    }

    // inverse-CDF draw from a probability vector (any Eigen vector/row
    // expression); the final positive entry absorbs rounding slack in the
    // cumulative sum
    template <typename Derived>
    int sample(const Eigen::DenseBase<Derived>& probs) {
        double u = next_double();
        double cum = 0.0;
        int last_positive = 0;
        for (int i = 0; i < probs.size(); ++i) {
            double p = probs(i);
            if (p <= 0.0) continue;
            last_positive = i;
            cum += p;
            if (u < cum) return i;
        }
        return last_positive;
    }

  private:
    std::mt19937_64 engine_;
};

// Stream labels for the named per-trial RNG streams. Arms use labels
// 0..K-1; the constants below stay clear of any realistic arm count.
namespace stream {
inline constexpr std::uint64_t kPolicy = 1000;
inline constexpr std::uint64_t kTieBreak = 1001;
}  // namespace stream

inline Rng derive_stream(std::uint64_t trial_seed, std::uint64_t label) {
    return Rng(mix_seed(trial_seed, label));
}

}  // namespace rbai
