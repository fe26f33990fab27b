#include "volcano/integrator.hpp"

#include "volcano/csv.hpp"
#include "volcano/phasor.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>

namespace volcano {

namespace {

constexpr std::size_t kBlock = 256;

struct Pair {
    double re = 0.0;
    double im = 0.0;
};

// Sum of sign[k] * (c[k], s[k]) over one block with four fixed lanes.
Pair block_dot(const std::int8_t* __restrict sign, const double* __restrict c, const double* __restrict s,
               std::size_t n) noexcept {
    double re[4] = {0.0, 0.0, 0.0, 0.0};
    double im[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        for (int l = 0; l < 4; ++l) {
            const double w = sign[k + l];
            re[l] += w * c[k + l];
            im[l] += w * s[k + l];
        }
    }
    for (; k < n; ++k) {
        const double w = sign[k];
        re[0] += w * c[k];
        im[0] += w * s[k];
    }
    return {(re[0] + re[1]) + (re[2] + re[3]), (im[0] + im[1]) + (im[2] + im[3])};
}

// Pairwise tree over blocks [first, last); the tree shape depends only on n.
Pair pairwise_dot(const std::int8_t* sign, const double* c, const double* s, std::size_t n) noexcept {
    if (n <= kBlock) {
        return block_dot(sign, c, s, n);
    }
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    const std::size_t half = (blocks / 2) * kBlock;
    const Pair a = pairwise_dot(sign, c, s, half);
    const Pair b = pairwise_dot(sign + half, c + half, s + half, n - half);
    return {a.re + b.re, a.im + b.im};
}

void lowrank_fields(const Coupling& coupling, std::span<const double> c, std::span<const double> s,
                    LocalFields& out) {
    const std::size_t n = coupling.size;
    const int rank = coupling.rank();
    const double unit = coupling.scale / static_cast<double>(n);
    std::fill(out.re.begin(), out.re.end(), 0.0);
    std::fill(out.im.begin(), out.im.end(), 0.0);
    if (coupling.scale == 0.0) {
        return;
    }
    double* __restrict re = out.re.data();
    double* __restrict im = out.im.data();
    for (int m = 0; m < rank; ++m) {
        const auto sign = coupling.vectors.component(m);
        const Pair sum = pairwise_dot(sign.data(), c.data(), s.data(), n);
        // (-1)^m for the one-based component index m + 1
        const double alt = (m % 2 == 0) ? -unit : unit;
        const double w_re = alt * sum.re;
        const double w_im = alt * sum.im;
        const std::int8_t* __restrict u = sign.data();
        for (std::size_t j = 0; j < n; ++j) {
            const double uj = u[j];
            re[j] += w_re * uj;
            im[j] += w_im * uj;
        }
    }
}

void matrix_fields(const Coupling& coupling, std::span<const double> c, std::span<const double> s,
                   LocalFields& out) {
    const std::size_t n = coupling.size;
    for (std::size_t j = 0; j < n; ++j) {
        const double* row = coupling.matrix.data() + j * n;
        double re = 0.0;
        double im = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            re += row[k] * c[k];
            im += row[k] * s[k];
        }
        out.re[j] = re;
        out.im[j] = im;
    }
}

} // namespace

double LocalFields::magnitude(std::size_t j) const noexcept { return std::sqrt(re[j] * re[j] + im[j] * im[j]); }

double LocalFields::angle(std::size_t j) const noexcept { return std::atan2(im[j], re[j]); }

std::vector<double> LocalFields::magnitudes() const {
    std::vector<double> r(size());
    for (std::size_t j = 0; j < r.size(); ++j) {
        r[j] = magnitude(j);
    }
    return r;
}

void FieldEvaluator::local_fields(const Coupling& coupling, std::span<const double> phases, LocalFields& out) {
    const std::size_t n = phases.size();
    if (n != coupling.size) {
        throw std::invalid_argument("local_fields: phase count does not match coupling size");
    }
    cos_.resize(n);
    sin_.resize(n);
    out.re.resize(n);
    out.im.resize(n);
    phasors(phases, cos_, sin_);
    if (coupling.kind == CouplingKind::LowRank) {
        lowrank_fields(coupling, cos_, sin_, out);
    } else {
        matrix_fields(coupling, cos_, sin_, out);
    }
}

void FieldEvaluator::velocity(const Coupling& coupling, std::span<const double> phases,
                              std::span<const double> omega, std::span<double> out, LocalFields& fields) {
    local_fields(coupling, phases, fields);
    const std::size_t n = phases.size();
    const double* __restrict re = fields.re.data();
    const double* __restrict im = fields.im.data();
    const double* __restrict c = cos_.data();
    const double* __restrict s = sin_.data();
    const double* __restrict w = omega.data();
    double* __restrict v = out.data();
    // r sin(phi - theta) = Im(P exp(-i theta))
    for (std::size_t j = 0; j < n; ++j) {
        v[j] = w[j] + (im[j] * c[j] - re[j] * s[j]);
    }
}

LocalFields local_fields(const OscillatorSystem& system) {
    FieldEvaluator eval;
    LocalFields out;
    eval.local_fields(system.coupling, system.phases, out);
    return out;
}

LocalFields local_fields_reference(const OscillatorSystem& system) {
    const std::size_t n = system.size();
    LocalFields out;
    out.re.assign(n, 0.0);
    out.im.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const double jk = coupling_entry(system.coupling, j, k);
            out.re[j] += jk * std::cos(system.phases[k]);
            out.im[j] += jk * std::sin(system.phases[k]);
        }
    }
    return out;
}

std::vector<double> velocity(const OscillatorSystem& system) {
    FieldEvaluator eval;
    LocalFields fields;
    std::vector<double> v(system.size());
    eval.velocity(system.coupling, system.phases, system.frequencies, v, fields);
    return v;
}

std::vector<double> velocity_pairwise(const OscillatorSystem& system) {
    const std::size_t n = system.size();
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            sum += coupling_entry(system.coupling, j, k) * std::sin(system.phases[k] - system.phases[j]);
        }
        v[j] = system.frequencies[j] + sum;
    }
    return v;
}

std::complex<double> order_parameter(std::span<const double> phases) {
    if (phases.empty()) {
        throw std::invalid_argument("order_parameter: no phases");
    }
    std::vector<double> c(phases.size());
    std::vector<double> s(phases.size());
    phasors(phases, c, s);
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < phases.size(); ++k) {
        re += c[k];
        im += s[k];
    }
    const auto n = static_cast<double>(phases.size());
    return {re / n, im / n};
}

Propagator::Propagator(OscillatorSystem system) : system_(std::move(system)) {
    const std::size_t n = system_.size();
    if (system_.frequencies.size() != n || system_.coupling.size != n) {
        throw std::invalid_argument("Propagator: inconsistent system sizes");
    }
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    stage_.resize(n);
}

void Propagator::evaluate(std::span<const double> phases, std::span<double> out, LocalFields& fields) {
    evaluator_.velocity(system_.coupling, phases, system_.frequencies, out, fields);
}

const LocalFields& Propagator::fields() {
    if (!fields_current_) {
        evaluate(system_.phases, k1_, fields_);
        fields_current_ = true;
    }
    return fields_;
}

std::complex<double> Propagator::order_parameter() const { return volcano::order_parameter(system_.phases); }

void Propagator::step(double dt) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step size must be positive");
    }
    const std::size_t n = system_.size();
    double* theta = system_.phases.data();
    if (!fields_current_) {
        evaluate(system_.phases, k1_, fields_);
    }
    const double half = 0.5 * dt;
    for (std::size_t j = 0; j < n; ++j) {
        stage_[j] = theta[j] + half * k1_[j];
    }
    evaluate(stage_, k2_, scratch_fields_);
    for (std::size_t j = 0; j < n; ++j) {
        stage_[j] = theta[j] + half * k2_[j];
    }
    evaluate(stage_, k3_, scratch_fields_);
    for (std::size_t j = 0; j < n; ++j) {
        stage_[j] = theta[j] + dt * k3_[j];
    }
    evaluate(stage_, k4_, scratch_fields_);
    const double sixth = dt / 6.0;
    for (std::size_t j = 0; j < n; ++j) {
        theta[j] += sixth * ((k1_[j] + k4_[j]) + 2.0 * (k2_[j] + k3_[j]));
    }
    wrap_phases(system_.phases);
    fields_current_ = false;
}

void rk4_step(OscillatorSystem& system, double dt) {
    Propagator p(std::move(system));
    p.step(dt);
    system = p.system();
}

void validate(const TrajectoryConfig& config) {
    if (!(config.dt > 0.0)) {
        throw std::invalid_argument("dt must be > 0");
    }
    if (config.recorded_steps == 0) {
        throw std::invalid_argument("recorded steps must be >= 1");
    }
    if (config.stride == 0) {
        throw std::invalid_argument("record stride must be >= 1");
    }
}

TrajectoryRecord integrate(const TrajectoryConfig& config) {
    validate(config);
    return integrate(build_system(config.system), config);
}

TrajectoryRecord integrate(OscillatorSystem system, const TrajectoryConfig& config) {
    validate(config);
    Propagator prop(std::move(system));
    for (std::size_t i = 0; i < config.transient_steps; ++i) {
        prop.step(config.dt);
    }
    TrajectoryRecord rec;
    const std::size_t samples = config.recorded_steps / config.stride;
    rec.times.reserve(samples);
    rec.order.reserve(samples);
    for (std::size_t i = 1; i <= config.recorded_steps; ++i) {
        prop.step(config.dt);
        if (i % config.stride != 0) {
            continue;
        }
        rec.times.push_back(static_cast<double>(config.transient_steps + i) * config.dt);
        rec.order.push_back(prop.order_parameter());
        if (config.record_fields) {
            rec.field_magnitudes.push_back(prop.fields().magnitudes());
        }
        if (config.record_phases) {
            rec.phases.emplace_back(prop.phases().begin(), prop.phases().end());
        }
    }
    return rec;
}

void write_csv(std::ostream& out, const TrajectoryRecord& record) {
    const bool with_fields = !record.field_magnitudes.empty();
    if (with_fields) {
        CsvWriter csv(out, {"time", "Z_re", "Z_im", "mean_r"});
        for (std::size_t i = 0; i < record.times.size(); ++i) {
            double mean = 0.0;
            for (double r : record.field_magnitudes[i]) {
                mean += r;
            }
            mean /= static_cast<double>(record.field_magnitudes[i].size());
            csv.row({record.times[i], record.order[i].real(), record.order[i].imag(), mean});
        }
    } else {
        CsvWriter csv(out, {"time", "Z_re", "Z_im"});
        for (std::size_t i = 0; i < record.times.size(); ++i) {
            csv.row({record.times[i], record.order[i].real(), record.order[i].imag()});
        }
    }
}

} // namespace volcano
