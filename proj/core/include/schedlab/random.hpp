#pragma once

#include <cstdint>

namespace schedlab {

// Deterministic 64-bit generator (splitmix64). Every uniform draw consumes
// exactly one next_u64() call, so consumers can document and pin their draw
// counts; split() derives an independent child stream without advancing the
// parent. Identical seeds produce identical sequences on every platform.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in [0,1), 53-bit resolution. One draw.
    double next_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo,hi). One draw.
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_real(); }

    // Uniform integer in [lo,hi] inclusive. One draw.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
        const std::uint64_t x = next_u64();
        const auto wide = static_cast<unsigned __int128>(x) * span;
        return lo + static_cast<std::int64_t>(static_cast<std::uint64_t>(wide >> 64));
    }

    // Child stream for substream `index`; the parent state is untouched.
    SplitMix64 split(std::uint64_t index) const {
        return SplitMix64(mix(state_ ^ (0x632be59bd9b4e019ull * (2 * index + 1))));
    }

  private:
    std::uint64_t state_;
};

// Derived per-task seed used by batch harnesses: pure function of (base, k).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t k) {
    return SplitMix64::mix(base ^ (0x9e3779b97f4a7c15ull * (k + 1)));
}

}  // namespace schedlab
