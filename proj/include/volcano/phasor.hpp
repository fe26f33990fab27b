#pragma once

#include <span>

namespace volcano {

/// Writes cos(theta[i]) and sin(theta[i]) for every i.
///
/// Vectorizable polynomial kernel, accurate to a few ulp; arguments with
/// magnitude above 1e5 fall back to std::cos / std::sin. Output spans must
/// have the same length as `theta`.
void phasors(std::span<const double> theta, std::span<double> cos_out, std::span<double> sin_out) noexcept;

/// Wraps an angle into [0, 2*pi).
double wrap_phase(double theta) noexcept;

/// Wraps every angle into [0, 2*pi) in place.
void wrap_phases(std::span<double> theta) noexcept;

/// Wraps an angle into (-pi, pi].
double wrap_signed(double theta) noexcept;

} // namespace volcano
