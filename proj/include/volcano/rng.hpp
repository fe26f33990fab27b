#pragma once

#include <cstdint>
#include <random>

namespace volcano {

/// splitmix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of realization `index` within an ensemble. Depends only on the pair,
/// never on scheduling, so serial and parallel runs draw identical systems.
constexpr std::uint64_t realization_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(master ^ mix64(index ^ 0xa0761d6478bd642fULL));
}

/// Independent sub-streams of one realization.
enum class Stream : std::uint64_t { Frequencies = 1, Vectors = 2, Coupling = 3, Phases = 4 };

constexpr std::uint64_t stream_seed(std::uint64_t seed, Stream stream) noexcept {
    return mix64(seed + 0x632be59bd9b4e019ULL * static_cast<std::uint64_t>(stream));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// +1 or -1 with equal probability; consumes one bit per call.
    int sign() noexcept {
        if (bits_left_ == 0) {
            bits_ = engine_();
            bits_left_ = 64;
        }
        const int s = (bits_ & 1U) ? -1 : 1;
        bits_ >>= 1;
        --bits_left_;
        return s;
    }

    double normal() { return normal_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uint64_t bits_ = 0;
    int bits_left_ = 0;
};

} // namespace volcano
