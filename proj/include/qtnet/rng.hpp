#pragma once

#include <cstdint>
#include <limits>

namespace qtnet {

// SplitMix64 finalizer (Steele, Lea & Flood). This is the stable seed
// splitting function: changing it changes every derived seed.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// seed(master, i) = mix64(master + mix64(i + 1) * golden)
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(master + mix64(index + 1) * kGolden);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b) noexcept {
    return derive_seed(derive_seed(master, a), b);
}

// Counter-based SplitMix64 stream; the j-th output is mix64(seed + (j+1)*golden).
// Construction is free, which matters for rejection sampling where every
// attempt owns an independent stream. Satisfies UniformRandomBitGenerator.
class Stream {
public:
    using result_type = std::uint64_t;

    constexpr explicit Stream(std::uint64_t seed) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept {
        state_ += kGolden;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

}  // namespace qtnet
