#include "volcano/exact_sum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace volcano {

void ExactSum::add(double x) noexcept {
    if (x == 0.0) {
        return;
    }
    if (!std::isfinite(x)) {
        if (std::isnan(x)) {
            nan_ = true;
        } else {
            const int s = x > 0 ? 1 : -1;
            if (inf_sign_ != 0 && inf_sign_ != s) {
                nan_ = true;
            }
            inf_sign_ = s;
        }
        return;
    }
    const auto bits = std::bit_cast<std::uint64_t>(x);
    const bool negative = (bits >> 63) != 0;
    const int biased = static_cast<int>((bits >> 52) & 0x7ff);
    std::uint64_t mantissa = bits & ((std::uint64_t{1} << 52) - 1);
    int exponent;  // x = mantissa * 2^exponent
    if (biased == 0) {
        exponent = -1074;
    } else {
        mantissa |= std::uint64_t{1} << 52;
        exponent = biased - 1075;
    }
    const int offset = exponent - kMinExponent;
    const int limb = offset / kDigitBits;
    const int shift = offset % kDigitBits;
    const unsigned __int128 wide = static_cast<unsigned __int128>(mantissa) << shift;
    constexpr std::uint64_t digit_mask = 0xffffffffULL;
    const auto d0 = static_cast<std::int64_t>(static_cast<std::uint64_t>(wide) & digit_mask);
    const auto d1 = static_cast<std::int64_t>(static_cast<std::uint64_t>(wide >> 32) & digit_mask);
    const auto d2 = static_cast<std::int64_t>(static_cast<std::uint64_t>(wide >> 64));
    if (negative) {
        limbs_[limb] -= d0;
        limbs_[limb + 1] -= d1;
        limbs_[limb + 2] -= d2;
    } else {
        limbs_[limb] += d0;
        limbs_[limb + 1] += d1;
        limbs_[limb + 2] += d2;
    }
    if (++pending_ >= kPendingLimit) {
        normalize();
    }
}

void ExactSum::merge(const ExactSum& other) noexcept {
    if (pending_ + other.pending_ >= kPendingLimit) {
        normalize();
    }
    ExactSum rhs = other;
    rhs.normalize();
    for (int i = 0; i < kLimbs; ++i) {
        limbs_[i] += rhs.limbs_[i];
    }
    ++pending_;
    nan_ = nan_ || other.nan_;
    if (other.inf_sign_ != 0) {
        if (inf_sign_ != 0 && inf_sign_ != other.inf_sign_) {
            nan_ = true;
        }
        inf_sign_ = other.inf_sign_;
    }
}

void ExactSum::normalize() noexcept {
    for (int i = 0; i + 1 < kLimbs; ++i) {
        const std::int64_t carry = limbs_[i] >> kDigitBits;  // arithmetic shift: floor division
        limbs_[i] -= carry * (std::int64_t{1} << kDigitBits);
        limbs_[i + 1] += carry;
    }
    pending_ = 0;
}

double ExactSum::value() const noexcept {
    if (nan_) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (inf_sign_ != 0) {
        return inf_sign_ * std::numeric_limits<double>::infinity();
    }
    ExactSum copy = *this;
    copy.normalize();
    double sign = 1.0;
    if (copy.limbs_[kLimbs - 1] < 0) {
        for (auto& limb : copy.limbs_) {
            limb = -limb;
        }
        copy.normalize();
        sign = -1.0;
    }
    // All digits now in [0, 2^32): accumulate the top three nonzero digits,
    // which carry more than 64 significant bits.
    int top = kLimbs - 1;
    while (top >= 0 && copy.limbs_[top] == 0) {
        --top;
    }
    if (top < 0) {
        return 0.0;
    }
    double result = 0.0;
    for (int i = std::max(0, top - 3); i <= top; ++i) {
        result += std::ldexp(static_cast<double>(copy.limbs_[i]), kMinExponent + kDigitBits * i);
    }
    return sign * result;
}

} // namespace volcano
