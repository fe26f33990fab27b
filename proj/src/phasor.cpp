#include "volcano/phasor.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace volcano {

namespace {

// Cody-Waite split of pi/2 (33 + 33 + 33 bits).
constexpr double kPio2Hi = 1.57079632673412561417e+00;
constexpr double kPio2Mid = 6.07710050630396597660e-11;
constexpr double kPio2Lo = 2.02226624871116645580e-21;
constexpr double kTwoOverPi = 6.36619772367581382433e-01;
constexpr double kReductionLimit = 1.0e5;
constexpr double kRoundingShift = 0x1.8p52;

// Minimax coefficients on [-pi/4, pi/4] (fdlibm __kernel_sin / __kernel_cos).
constexpr double S1 = -1.66666666666666324348e-01;
constexpr double S2 = 8.33333333332248946124e-03;
constexpr double S3 = -1.98412698298579493134e-04;
constexpr double S4 = 2.75573137070700676789e-06;
constexpr double S5 = -2.50507602534068634195e-08;
constexpr double S6 = 1.58969099521155010221e-10;
constexpr double C1 = 4.16666666666666019037e-02;
constexpr double C2 = -1.38888888888741095749e-03;
constexpr double C3 = 2.48015872894767294178e-05;
constexpr double C4 = -2.75573143513906633035e-07;
constexpr double C5 = 2.08757232129817482790e-09;
constexpr double C6 = -1.13596475577881948265e-11;

} // namespace

void phasors(std::span<const double> theta, std::span<double> cos_out, std::span<double> sin_out) noexcept {
    const std::size_t n = theta.size();
    const double* __restrict x = theta.data();
    double* __restrict co = cos_out.data();
    double* __restrict si = sin_out.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[i];
        // Adding 1.5 * 2^52 rounds to the nearest integer and leaves it in the low mantissa bits.
        const double shifted = v * kTwoOverPi + kRoundingShift;
        const double q = shifted - kRoundingShift;
        const double r = ((v - q * kPio2Hi) - q * kPio2Mid) - q * kPio2Lo;
        const double z = r * r;
        const double s = r + r * z * (S1 + z * (S2 + z * (S3 + z * (S4 + z * (S5 + z * S6)))));
        const double hz = 0.5 * z;
        const double w = 1.0 - hz;
        const double c = w + (((1.0 - w) - hz) + z * z * (C1 + z * (C2 + z * (C3 + z * (C4 + z * (C5 + z * C6))))));
        const std::uint64_t quadrant = std::bit_cast<std::uint64_t>(shifted);
        const bool swap = (quadrant & 1U) != 0;
        // quadrants 1,2 negate the cosine; 2,3 negate the sine
        const std::uint64_t cos_sign = ((quadrant + 1U) & 2U) << 62;
        const std::uint64_t sin_sign = (quadrant & 2U) << 62;
        co[i] = std::bit_cast<double>(std::bit_cast<std::uint64_t>(swap ? s : c) ^ cos_sign);
        si[i] = std::bit_cast<double>(std::bit_cast<std::uint64_t>(swap ? c : s) ^ sin_sign);
    }
    std::size_t outliers = 0;
    for (std::size_t i = 0; i < n; ++i) {
        outliers += !(std::fabs(x[i]) <= kReductionLimit);
    }
    if (outliers == 0) {
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(std::fabs(x[i]) <= kReductionLimit)) {
            co[i] = std::cos(x[i]);
            si[i] = std::sin(x[i]);
        }
    }
}

double wrap_phase(double theta) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(theta, two_pi);
    if (w < 0.0) {
        w += two_pi;
    }
    // fmod of a tiny negative angle can round up to exactly 2*pi
    return w >= two_pi ? 0.0 : w;
}

void wrap_phases(std::span<double> theta) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double* __restrict x = theta.data();
    const std::size_t n = theta.size();
    std::size_t outliers = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[i];
        const double shifted = v < 0.0 ? v + two_pi : (v >= two_pi ? v - two_pi : v);
        outliers += !(shifted >= 0.0 && shifted < two_pi);
        x[i] = shifted;
    }
    if (outliers == 0) {
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] >= 0.0 && x[i] < two_pi)) {
            x[i] = wrap_phase(x[i]);
        }
    }
}

double wrap_signed(double theta) noexcept {
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(theta, 2.0 * pi);
    if (w <= -pi) {
        w += 2.0 * pi;
    }
    return w;
}

} // namespace volcano
