#pragma once

#include "volcano/exact_sum.hpp"
#include "volcano/integrator.hpp"
#include "volcano/model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace volcano {

/// Streaming sums of r, 1/r, r^2 and 1/r^2. Sums are exact, so merging is
/// associative and commutative bit for bit.
class MomentAccumulator {
public:
    /// Floor applied to r before inversion.
    static constexpr double kInverseFloor = 1e-30;

    void add(double r) noexcept;
    void add(std::span<const double> r) noexcept;
    void merge(const MomentAccumulator& other) noexcept;

    std::uint64_t count() const noexcept { return count_; }
    std::uint64_t merges() const noexcept { return merges_; }
    double sum_r() const noexcept { return sum_r_.value(); }
    double sum_inverse() const noexcept { return sum_inverse_.value(); }
    double sum_r2() const noexcept { return sum_r2_.value(); }
    double sum_inverse2() const noexcept { return sum_inverse2_.value(); }

private:
    std::uint64_t count_ = 0;
    std::uint64_t merges_ = 0;
    ExactSum sum_r_;
    ExactSum sum_inverse_;
    ExactSum sum_r2_;
    ExactSum sum_inverse2_;
};

/// Adds every |P_j| of one field snapshot.
MomentAccumulator accumulate_fields(MomentAccumulator acc, const LocalFields& sample);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// M_{+1} M_{-1} with a delta-method standard error (M_{+1}, M_{-1} treated as independent).
/// Throws std::domain_error for fewer than two samples.
Estimate moment_product(const MomentAccumulator& acc);

/// Closed-form M_{+1} M_{-1} of the two-dimensional bimodal model with gamma = mu^2 / sigma^2.
double momentfit_curve(double gamma);

/// momentfit_curve(1): products above it mean the radial density is concave down at the origin.
double volcano_threshold();

/// Upper end of the gamma search range.
inline constexpr double kGammaMax = 1e3;

/// Inverts momentfit_curve by bisection on [0, kGammaMax]. Values >= pi/2 map to 0,
/// values at or below momentfit_curve(kGammaMax) map to kGammaMax.
double gamma_from_moment_product(double value);

enum class VolcanoSide { Below, Above, Undecided };

std::string_view to_string(VolcanoSide side);

struct Classification {
    VolcanoSide side = VolcanoSide::Undecided;
    double z = 0.0;  // (value - threshold) / std_error
};

Classification classify_volcano(Estimate product, double margin = 1.5);
Classification classify_volcano(const MomentAccumulator& acc, double margin = 1.5);

/// Ensemble M_{+1} M_{-1} built from per-realization means of r and 1/r. Realizations are
/// the independent units, so the standard error is the delta-method error of the product
/// of the two grand means, with their covariance estimated across realizations.
/// Every realization should contribute the same number of samples.
class PooledProduct {
public:
    void add(double mean_r, double mean_inverse) noexcept;
    /// Throws std::domain_error for an empty accumulator.
    void add(const MomentAccumulator& realization);
    void merge(const PooledProduct& other) noexcept;

    std::uint64_t count() const noexcept { return count_; }
    double mean_r() const noexcept;
    double mean_inverse() const noexcept;
    double value() const noexcept { return mean_r() * mean_inverse(); }
    /// Zero for fewer than two realizations.
    double std_error() const noexcept;
    Estimate estimate() const noexcept { return {value(), std_error()}; }

private:
    std::uint64_t count_ = 0;
    ExactSum a_;
    ExactSum b_;
    ExactSum aa_;
    ExactSum bb_;
    ExactSum ab_;
};

struct BimodalFit {
    double mu = 0.0;
    double sigma = 1.0;
    double gamma = 0.0;
};

BimodalFit make_bimodal_fit(double mu, double sigma);

/// Sum of two normals at +/-mu with variance sigma^2, restricted to r >= 0.
double bimodal_density(double r, const BimodalFit& fit);

/// Equal-width histogram of field magnitudes on [0, r_max]; samples beyond r_max are
/// counted as overflow. Histograms with the same edges merge by adding counts.
class RadialHistogram {
public:
    RadialHistogram(std::size_t bins, double r_max);

    void add(double r) noexcept;
    void add(std::span<const double> r) noexcept;
    void merge(const RadialHistogram& other);

    std::size_t bins() const noexcept { return counts_.size(); }
    double r_max() const noexcept { return r_max_; }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }
    std::uint64_t overflow() const noexcept { return overflow_; }
    std::uint64_t total() const noexcept;
    std::vector<double> edges() const;
    std::vector<double> centers() const;

    /// Probability density of r (integrates to the in-range fraction).
    std::vector<double> density() const;
    /// Density per unit area of the 2D field distribution at radius r:
    /// count / (total * pi (r_hi^2 - r_lo^2)).
    std::vector<double> areal_density() const;
    /// Index of the bin with the highest areal density.
    std::size_t areal_mode() const;

private:
    double r_max_;
    double width_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t overflow_ = 0;
};

/// Histogram on [0, max r] of the given samples. Throws on empty input or bins < 2.
RadialHistogram radial_histogram(std::span<const double> samples, std::size_t bins);

/// Density of theta_j - phi_k against the normalized coupling J_jk N / (J K) in [-1, 1],
/// over ordered pairs j != k. For every oscillator j each coupling slice receives unit
/// weight, spread evenly over the k in that slice ("averaged across k").
class PhaseFieldDensity {
public:
    PhaseFieldDensity(std::size_t coupling_bins, std::size_t phase_bins);

    /// Throws std::invalid_argument for non-LowRank couplings or J = 0.
    void add_snapshot(const Coupling& coupling, std::span<const double> phases, const LocalFields& fields);
    void merge(const PhaseFieldDensity& other);

    std::size_t coupling_bins() const noexcept { return coupling_bins_; }
    std::size_t phase_bins() const noexcept { return phase_bins_; }
    std::size_t snapshots() const noexcept { return snapshots_; }

    double coupling_center(std::size_t slice) const noexcept;
    double phase_center(std::size_t bin) const noexcept;
    double weight(std::size_t slice, std::size_t bin) const noexcept;
    double slice_weight(std::size_t slice) const noexcept;

    /// Density over the phase difference within one slice; integrates to 1 on (-pi, pi].
    double density(std::size_t slice, std::size_t bin) const noexcept;

    /// Fraction of the slice's weight with phase difference in [lo, hi] (uniform within bins).
    double slice_mass(std::size_t slice, double lo, double hi) const noexcept;

    /// Chi-square test of uniformity for one slice, using the per-snapshot oscillator count
    /// as sample size. Returns the upper-tail p-value (1 for empty slices).
    double uniformity_pvalue(std::size_t slice) const;

private:
    std::size_t coupling_bins_;
    std::size_t phase_bins_;
    std::size_t snapshots_ = 0;
    std::vector<double> weights_;  // slice-major
};

/// Upper-tail chi-square probability for `statistic` with `dof` degrees of freedom.
double chi_square_sf(double statistic, double dof);

} // namespace volcano
