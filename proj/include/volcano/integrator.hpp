#pragma once

#include "volcano/model.hpp"

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace volcano {

/// Complex local fields P_j = sum_k J_jk exp(i theta_k), split into parts.
struct LocalFields {
    std::vector<double> re;
    std::vector<double> im;

    std::size_t size() const noexcept { return re.size(); }
    double magnitude(std::size_t j) const noexcept;  // r_j
    double angle(std::size_t j) const noexcept;      // phi_j in (-pi, pi]
    std::vector<double> magnitudes() const;
};

/// Reusable scratch space for field and velocity evaluation on one coupling.
///
/// LowRank: K signed sums s_m = sum_k u_m^(k) exp(i theta_k), then
/// P_j = (J/N) sum_m (-1)^m u_m^(j) s_m, O(NK). The sums use fixed-shape
/// pairwise reduction so results do not depend on how work is split.
/// Gaussian/Dense: row-by-row matrix-vector product, O(N^2).
class FieldEvaluator {
public:
    void local_fields(const Coupling& coupling, std::span<const double> phases, LocalFields& out);

    /// theta_dot_j = omega_j + r_j sin(phi_j - theta_j). Also leaves the fields in `fields`.
    void velocity(const Coupling& coupling, std::span<const double> phases, std::span<const double> omega,
                  std::span<double> out, LocalFields& fields);

    /// Phasors of the last evaluated phases.
    std::span<const double> cos_values() const noexcept { return cos_; }
    std::span<const double> sin_values() const noexcept { return sin_; }

private:
    std::vector<double> cos_;
    std::vector<double> sin_;
};

LocalFields local_fields(const OscillatorSystem& system);

/// Direct double sum with std::cos/std::sin over coupling_entry; O(N^2 K). Reference only.
LocalFields local_fields_reference(const OscillatorSystem& system);

std::vector<double> velocity(const OscillatorSystem& system);

/// omega_j + sum_k J_jk sin(theta_k - theta_j) evaluated pair by pair. Reference only.
std::vector<double> velocity_pairwise(const OscillatorSystem& system);

/// Normalized order parameter (1/N) sum_k exp(i theta_k).
std::complex<double> order_parameter(std::span<const double> phases);

/// Owns a system and advances it with classical fixed-step RK4.
/// The fields of the current state are cached and reused as the first stage.
class Propagator {
public:
    explicit Propagator(OscillatorSystem system);

    void step(double dt);
    const LocalFields& fields();
    std::complex<double> order_parameter() const;

    const OscillatorSystem& system() const noexcept { return system_; }
    std::span<const double> phases() const noexcept { return system_.phases; }

private:
    void evaluate(std::span<const double> phases, std::span<double> out, LocalFields& fields);

    OscillatorSystem system_;
    FieldEvaluator evaluator_;
    LocalFields fields_;
    LocalFields scratch_fields_;
    bool fields_current_ = false;
    std::vector<double> k1_, k2_, k3_, k4_, stage_;
};

/// One RK4 step of size dt; phases wrapped into [0, 2 pi) afterwards.
void rk4_step(OscillatorSystem& system, double dt);

struct TrajectoryConfig {
    SystemSpec system;
    double dt = 0.01;
    std::size_t transient_steps = 1000;
    std::size_t recorded_steps = 2000;
    std::size_t stride = 1;
    bool record_fields = false;
    bool record_phases = false;
};

/// Observables sampled after every `stride`-th recorded step.
struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::complex<double>> order;
    std::vector<std::vector<double>> field_magnitudes;  // empty unless requested
    std::vector<std::vector<double>> phases;            // empty unless requested
};

void validate(const TrajectoryConfig& config);

TrajectoryRecord integrate(const TrajectoryConfig& config);

/// Same protocol starting from an explicit system (its phases are the initial condition).
TrajectoryRecord integrate(OscillatorSystem system, const TrajectoryConfig& config);

/// Columns: time, Z_re, Z_im, and mean_r when field magnitudes were recorded.
void write_csv(std::ostream& out, const TrajectoryRecord& record);

} // namespace volcano
