#include "volcano/fieldstats.hpp"

#include "volcano/phasor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace volcano {

void MomentAccumulator::add(double r) noexcept {
    const double inv = 1.0 / std::max(r, kInverseFloor);
    sum_r_.add(r);
    sum_inverse_.add(inv);
    sum_r2_.add(r * r);
    sum_inverse2_.add(inv * inv);
    ++count_;
}

void MomentAccumulator::add(std::span<const double> r) noexcept {
    for (double v : r) {
        add(v);
    }
}

void MomentAccumulator::merge(const MomentAccumulator& other) noexcept {
    sum_r_.merge(other.sum_r_);
    sum_inverse_.merge(other.sum_inverse_);
    sum_r2_.merge(other.sum_r2_);
    sum_inverse2_.merge(other.sum_inverse2_);
    count_ += other.count_;
    merges_ += other.merges_ + 1;
}

MomentAccumulator accumulate_fields(MomentAccumulator acc, const LocalFields& sample) {
    for (std::size_t j = 0; j < sample.size(); ++j) {
        acc.add(sample.magnitude(j));
    }
    return acc;
}

Estimate moment_product(const MomentAccumulator& acc) {
    if (acc.count() < 2) {
        throw std::domain_error("moment_product: need at least two samples");
    }
    const auto n = static_cast<double>(acc.count());
    const double m1 = acc.sum_r() / n;
    const double minv = acc.sum_inverse() / n;
    const double var_r = std::max(0.0, (acc.sum_r2() - n * m1 * m1) / (n - 1.0));
    const double var_inv = std::max(0.0, (acc.sum_inverse2() - n * minv * minv) / (n - 1.0));
    const double var_product = (minv * minv * var_r + m1 * m1 * var_inv) / n;
    return {m1 * minv, std::sqrt(var_product)};
}

double momentfit_curve(double gamma) {
    if (!(gamma >= 0.0)) {
        throw std::domain_error("momentfit_curve: gamma must be >= 0");
    }
    const double half = 0.5 * gamma;
    const double root = std::sqrt(half);
    const double denom = std::exp(-half) + std::sqrt(std::numbers::pi * half) * std::erf(root);
    return 0.5 * std::numbers::pi * (1.0 + gamma) / (denom * denom);
}

double volcano_threshold() {
    static const double threshold = momentfit_curve(1.0);
    return threshold;
}

double gamma_from_moment_product(double value) {
    if (value >= 0.5 * std::numbers::pi) {
        return 0.0;
    }
    if (value <= momentfit_curve(kGammaMax)) {
        return kGammaMax;
    }
    double lo = 0.0;
    double hi = kGammaMax;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) {
            break;
        }
        // decreasing curve: larger product means smaller gamma
        if (momentfit_curve(mid) > value) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::string_view to_string(VolcanoSide side) {
    switch (side) {
    case VolcanoSide::Below:
        return "below";
    case VolcanoSide::Above:
        return "above";
    case VolcanoSide::Undecided:
        return "undecided";
    }
    return "undecided";
}

Classification classify_volcano(Estimate product, double margin) {
    const double diff = product.value - volcano_threshold();
    Classification c;
    if (product.std_error > 0.0) {
        c.z = diff / product.std_error;
    } else {
        c.z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    }
    if (diff > margin * product.std_error) {
        c.side = VolcanoSide::Below;
    } else if (-diff > margin * product.std_error) {
        c.side = VolcanoSide::Above;
    }
    return c;
}

Classification classify_volcano(const MomentAccumulator& acc, double margin) {
    return classify_volcano(moment_product(acc), margin);
}

void PooledProduct::add(double mean_r, double mean_inverse) noexcept {
    a_.add(mean_r);
    b_.add(mean_inverse);
    aa_.add(mean_r * mean_r);
    bb_.add(mean_inverse * mean_inverse);
    ab_.add(mean_r * mean_inverse);
    ++count_;
}

void PooledProduct::add(const MomentAccumulator& realization) {
    if (realization.count() == 0) {
        throw std::domain_error("pooled product: empty realization");
    }
    const auto n = static_cast<double>(realization.count());
    add(realization.sum_r() / n, realization.sum_inverse() / n);
}

void PooledProduct::merge(const PooledProduct& other) noexcept {
    a_.merge(other.a_);
    b_.merge(other.b_);
    aa_.merge(other.aa_);
    bb_.merge(other.bb_);
    ab_.merge(other.ab_);
    count_ += other.count_;
}

double PooledProduct::mean_r() const noexcept {
    return count_ == 0 ? 0.0 : a_.value() / static_cast<double>(count_);
}

double PooledProduct::mean_inverse() const noexcept {
    return count_ == 0 ? 0.0 : b_.value() / static_cast<double>(count_);
}

double PooledProduct::std_error() const noexcept {
    if (count_ < 2) {
        return 0.0;
    }
    const auto n = static_cast<double>(count_);
    const double A = mean_r();
    const double B = mean_inverse();
    const double vaa = (aa_.value() - n * A * A) / (n - 1.0);
    const double vbb = (bb_.value() - n * B * B) / (n - 1.0);
    const double vab = (ab_.value() - n * A * B) / (n - 1.0);
    const double var = (B * B * vaa + A * A * vbb + 2.0 * A * B * vab) / n;
    return std::sqrt(std::max(0.0, var));
}

BimodalFit make_bimodal_fit(double mu, double sigma) {
    if (!(mu >= 0.0) || !(sigma > 0.0)) {
        throw std::invalid_argument("bimodal fit needs mu >= 0 and sigma > 0");
    }
    return {mu, sigma, mu * mu / (sigma * sigma)};
}

double bimodal_density(double r, const BimodalFit& fit) {
    if (r < 0.0) {
        return 0.0;
    }
    const double s2 = fit.sigma * fit.sigma;
    return 2.0 / std::sqrt(2.0 * std::numbers::pi * s2) * std::exp(-(fit.mu * fit.mu + r * r) / (2.0 * s2)) *
           std::cosh(fit.mu * r / s2);
}

RadialHistogram::RadialHistogram(std::size_t bins, double r_max)
    : r_max_(r_max), width_(r_max / static_cast<double>(bins)), counts_(bins, 0) {
    if (bins < 2) {
        throw std::invalid_argument("radial histogram needs at least two bins");
    }
    if (!(r_max > 0.0) || !std::isfinite(r_max)) {
        throw std::invalid_argument("radial histogram needs a finite positive upper edge");
    }
}

void RadialHistogram::add(double r) noexcept {
    if (!(r <= r_max_)) {
        ++overflow_;
        return;
    }
    const auto bin = std::min(static_cast<std::size_t>(std::max(r, 0.0) / width_), counts_.size() - 1);
    ++counts_[bin];
}

void RadialHistogram::add(std::span<const double> r) noexcept {
    for (double v : r) {
        add(v);
    }
}

void RadialHistogram::merge(const RadialHistogram& other) {
    if (other.counts_.size() != counts_.size() || other.r_max_ != r_max_) {
        throw std::invalid_argument("cannot merge histograms with different edges");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
    }
    overflow_ += other.overflow_;
}

std::uint64_t RadialHistogram::total() const noexcept {
    std::uint64_t t = overflow_;
    for (auto c : counts_) {
        t += c;
    }
    return t;
}

std::vector<double> RadialHistogram::edges() const {
    std::vector<double> e(counts_.size() + 1);
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = r_max_ * static_cast<double>(i) / static_cast<double>(counts_.size());
    }
    return e;
}

std::vector<double> RadialHistogram::centers() const {
    const auto e = edges();
    std::vector<double> c(counts_.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = 0.5 * (e[i] + e[i + 1]);
    }
    return c;
}

std::vector<double> RadialHistogram::density() const {
    const auto e = edges();
    const auto t = static_cast<double>(total());
    std::vector<double> d(counts_.size(), 0.0);
    if (t == 0.0) {
        return d;
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = static_cast<double>(counts_[i]) / (t * (e[i + 1] - e[i]));
    }
    return d;
}

std::vector<double> RadialHistogram::areal_density() const {
    const auto e = edges();
    const auto t = static_cast<double>(total());
    std::vector<double> d(counts_.size(), 0.0);
    if (t == 0.0) {
        return d;
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double area = std::numbers::pi * (e[i + 1] * e[i + 1] - e[i] * e[i]);
        d[i] = static_cast<double>(counts_[i]) / (t * area);
    }
    return d;
}

std::size_t RadialHistogram::areal_mode() const {
    const auto d = areal_density();
    return static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
}

RadialHistogram radial_histogram(std::span<const double> samples, std::size_t bins) {
    if (samples.empty()) {
        throw std::invalid_argument("radial_histogram: no samples");
    }
    const double r_max = *std::max_element(samples.begin(), samples.end());
    RadialHistogram h(bins, r_max > 0.0 ? r_max : 1.0);
    h.add(samples);
    return h;
}

PhaseFieldDensity::PhaseFieldDensity(std::size_t coupling_bins, std::size_t phase_bins)
    : coupling_bins_(coupling_bins), phase_bins_(phase_bins), weights_(coupling_bins * phase_bins, 0.0) {
    if (coupling_bins < 1 || phase_bins < 2) {
        throw std::invalid_argument("phase-field density needs >= 1 coupling bin and >= 2 phase bins");
    }
}

void PhaseFieldDensity::add_snapshot(const Coupling& coupling, std::span<const double> phases,
                                     const LocalFields& fields) {
    if (coupling.kind != CouplingKind::LowRank) {
        throw std::invalid_argument("phase-field density requires a low-rank coupling");
    }
    if (coupling.scale == 0.0 || coupling.rank() == 0) {
        throw std::invalid_argument("phase-field density: coupling normalization J K is zero");
    }
    const std::size_t n = coupling.size;
    if (phases.size() != n || fields.size() != n) {
        throw std::invalid_argument("phase-field density: size mismatch");
    }
    const int rank = coupling.rank();
    const std::size_t classes = std::size_t{1} << rank;

    // Normalized coupling between patterns is (sum_m (-1)^m u_m v_m) / K.
    std::vector<std::uint32_t> pattern(n);
    std::vector<std::size_t> class_count(classes, 0);
    for (std::size_t j = 0; j < n; ++j) {
        pattern[j] = coupling.vectors.pattern(j);
        ++class_count[pattern[j]];
    }
    auto slice_of = [&](std::uint32_t a, std::uint32_t b) {
        int dot = 0;
        for (int m = 0; m < rank; ++m) {
            const int ua = ((a >> m) & 1U) ? -1 : 1;
            const int ub = ((b >> m) & 1U) ? -1 : 1;
            dot += (m % 2 == 0) ? -ua * ub : ua * ub;
        }
        const double x = static_cast<double>(dot) / rank;
        const auto bin = static_cast<std::size_t>((x + 1.0) * 0.5 * static_cast<double>(coupling_bins_));
        return std::min(bin, coupling_bins_ - 1);
    };
    std::vector<std::size_t> slice_table(classes * classes);
    for (std::uint32_t a = 0; a < classes; ++a) {
        for (std::uint32_t b = 0; b < classes; ++b) {
            slice_table[a * classes + b] = slice_of(a, b);
        }
    }

    std::vector<double> phi(n);
    for (std::size_t k = 0; k < n; ++k) {
        phi[k] = fields.angle(k);
    }
    const double scale = static_cast<double>(phase_bins_) / (2.0 * std::numbers::pi);
    std::vector<double> per_slice(coupling_bins_);
    std::vector<double> row(coupling_bins_ * phase_bins_);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t* slices = slice_table.data() + pattern[j] * classes;
        std::fill(per_slice.begin(), per_slice.end(), 0.0);
        for (std::uint32_t b = 0; b < classes; ++b) {
            per_slice[slices[b]] += static_cast<double>(class_count[b]);
        }
        per_slice[slices[pattern[j]]] -= 1.0;  // k != j
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) {
                continue;
            }
            const std::size_t slice = slices[pattern[k]];
            double delta = phases[j] - phi[k];
            if (delta > std::numbers::pi) {
                delta -= 2.0 * std::numbers::pi;
            } else if (delta <= -std::numbers::pi) {
                delta += 2.0 * std::numbers::pi;
            }
            if (!(delta > -std::numbers::pi && delta <= std::numbers::pi)) {
                delta = wrap_signed(delta);
            }
            const auto bin = std::min(static_cast<std::size_t>((delta + std::numbers::pi) * scale), phase_bins_ - 1);
            row[slice * phase_bins_ + bin] += 1.0;
        }
        for (std::size_t s = 0; s < coupling_bins_; ++s) {
            if (per_slice[s] <= 0.0) {
                continue;
            }
            const double w = 1.0 / per_slice[s];
            for (std::size_t b = 0; b < phase_bins_; ++b) {
                weights_[s * phase_bins_ + b] += w * row[s * phase_bins_ + b];
            }
        }
    }
    ++snapshots_;
}

void PhaseFieldDensity::merge(const PhaseFieldDensity& other) {
    if (other.coupling_bins_ != coupling_bins_ || other.phase_bins_ != phase_bins_) {
        throw std::invalid_argument("cannot merge phase-field densities with different binning");
    }
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        weights_[i] += other.weights_[i];
    }
    snapshots_ += other.snapshots_;
}

double PhaseFieldDensity::coupling_center(std::size_t slice) const noexcept {
    return -1.0 + (2.0 * static_cast<double>(slice) + 1.0) / static_cast<double>(coupling_bins_);
}

double PhaseFieldDensity::phase_center(std::size_t bin) const noexcept {
    return -std::numbers::pi + (static_cast<double>(bin) + 0.5) * 2.0 * std::numbers::pi / static_cast<double>(phase_bins_);
}

double PhaseFieldDensity::weight(std::size_t slice, std::size_t bin) const noexcept {
    return weights_[slice * phase_bins_ + bin];
}

double PhaseFieldDensity::slice_weight(std::size_t slice) const noexcept {
    double total = 0.0;
    for (std::size_t b = 0; b < phase_bins_; ++b) {
        total += weights_[slice * phase_bins_ + b];
    }
    return total;
}

double PhaseFieldDensity::density(std::size_t slice, std::size_t bin) const noexcept {
    const double total = slice_weight(slice);
    if (total <= 0.0) {
        return 0.0;
    }
    const double width = 2.0 * std::numbers::pi / static_cast<double>(phase_bins_);
    return weight(slice, bin) / (total * width);
}

double PhaseFieldDensity::slice_mass(std::size_t slice, double lo, double hi) const noexcept {
    const double total = slice_weight(slice);
    if (total <= 0.0 || !(hi > lo)) {
        return 0.0;
    }
    const double width = 2.0 * std::numbers::pi / static_cast<double>(phase_bins_);
    double mass = 0.0;
    for (std::size_t b = 0; b < phase_bins_; ++b) {
        const double left = -std::numbers::pi + static_cast<double>(b) * width;
        const double overlap = std::min(hi, left + width) - std::max(lo, left);
        if (overlap > 0.0) {
            mass += weight(slice, b) * overlap / width;
        }
    }
    return mass / total;
}

double PhaseFieldDensity::uniformity_pvalue(std::size_t slice) const {
    const double total = slice_weight(slice);
    if (total <= 0.0 || snapshots_ == 0) {
        return 1.0;
    }
    // Each oscillator contributes unit weight per snapshot: the per-snapshot
    // average has at most multinomial variance with n = total / snapshots.
    const double n = total / static_cast<double>(snapshots_);
    const double expected = n / static_cast<double>(phase_bins_);
    double chi2 = 0.0;
    for (std::size_t b = 0; b < phase_bins_; ++b) {
        const double observed = weight(slice, b) / static_cast<double>(snapshots_);
        chi2 += (observed - expected) * (observed - expected) / expected;
    }
    return chi_square_sf(chi2, static_cast<double>(phase_bins_ - 1));
}

double chi_square_sf(double statistic, double dof) {
    if (statistic <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

} // namespace volcano
