#pragma once

#include <array>
#include <cstdint>

namespace volcano {

/// Exact accumulator for sums of doubles.
///
/// Values are added into a fixed-point integer spanning the whole double
/// range (32-bit digits held in 64-bit limbs, carries resolved lazily), so
/// the result is independent of the order of additions and merges. value()
/// rounds the exact total to double; equal exact totals give equal doubles.
class ExactSum {
public:
    void add(double x) noexcept;
    void merge(const ExactSum& other) noexcept;
    double value() const noexcept;

private:
    static constexpr int kDigitBits = 32;
    static constexpr int kMinExponent = -1088;  // multiple of 32 below 2^-1074
    static constexpr int kLimbs = 70;
    // Limbs may each absorb ~2^31 digit additions before a carry pass.
    static constexpr std::uint32_t kPendingLimit = 1U << 29;

    void normalize() noexcept;

    std::array<std::int64_t, kLimbs> limbs_{};
    std::uint32_t pending_ = 0;
    bool nan_ = false;
    int inf_sign_ = 0;  // +1 / -1 once an infinity was added
};

} // namespace volcano
