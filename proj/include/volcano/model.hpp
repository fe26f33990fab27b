#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace volcano {

enum class CouplingKind { LowRank, Gaussian, Dense };

enum class InitialCondition { UniformRandom, AllZero };

std::string_view to_string(CouplingKind kind);
std::string_view to_string(InitialCondition init);
CouplingKind parse_coupling_kind(std::string_view text);
InitialCondition parse_initial_condition(std::string_view text);

/// Interaction vectors u^(j) in {+1,-1}^K, stored component-major
/// (all N entries of component m are contiguous).
class SignMatrix {
public:
    SignMatrix() = default;
    SignMatrix(std::size_t oscillators, int rank);

    std::size_t oscillators() const noexcept { return oscillators_; }
    int rank() const noexcept { return rank_; }

    /// Entry u_m^(j), m zero-based.
    int operator()(std::size_t j, int m) const noexcept {
        return signs_[static_cast<std::size_t>(m) * oscillators_ + j];
    }
    void set(std::size_t j, int m, int value) noexcept {
        signs_[static_cast<std::size_t>(m) * oscillators_ + j] = static_cast<std::int8_t>(value);
    }
    std::span<const std::int8_t> component(int m) const noexcept {
        return {signs_.data() + static_cast<std::size_t>(m) * oscillators_, oscillators_};
    }

    /// Canonical class index of oscillator j: bit m is set iff u_{m+1}^(j) = -1.
    std::uint32_t pattern(std::size_t j) const noexcept;

    friend bool operator==(const SignMatrix&, const SignMatrix&) = default;

private:
    std::size_t oscillators_ = 0;
    int rank_ = 0;
    std::vector<std::int8_t> signs_;
};

/// Coupling matrix J_jk. LowRank keeps only the N x K sign matrix;
/// Gaussian and Dense keep the full row-major N x N matrix.
struct Coupling {
    CouplingKind kind = CouplingKind::LowRank;
    std::size_t size = 0;
    double scale = 0.0;  // J
    SignMatrix vectors;
    std::vector<double> matrix;

    int rank() const noexcept { return vectors.rank(); }
};

struct OscillatorSystem {
    std::vector<double> phases;
    std::vector<double> frequencies;
    Coupling coupling;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return phases.size(); }
};

/// Lorentzian quantile tan(pi (u - 1/2)) with u clamped to [2^-52, 1 - 2^-52].
double lorentzian_quantile(double u) noexcept;

std::vector<double> sample_frequencies(std::size_t n, std::uint64_t seed);

/// Throws std::invalid_argument unless K is even and positive.
SignMatrix sample_interaction_vectors(std::size_t n, int rank, std::uint64_t seed);

std::vector<double> sample_uniform_phases(std::size_t n, std::uint64_t seed);

Coupling make_lowrank_coupling(SignMatrix vectors, double scale);

/// Symmetric matrix with zero diagonal and N(0, J^2/N) entries, one draw per unordered pair.
Coupling build_gaussian_coupling(std::size_t n, double scale, std::uint64_t seed);

/// Wraps an explicit matrix; rejects non-square or asymmetric input.
Coupling make_dense_coupling(std::vector<double> matrix, std::size_t n);

/// J_jk. Throws std::out_of_range for bad indices.
double coupling_entry(const Coupling& coupling, std::size_t j, std::size_t k);

/// Full N x N row-major matrix; for validation only.
std::vector<double> dense_matrix(const Coupling& coupling);

/// Everything needed to rebuild a system bit-exactly.
struct SystemSpec {
    CouplingKind kind = CouplingKind::LowRank;
    std::size_t n = 250;
    int rank = 4;
    double scale = 1.0;
    std::uint64_t seed = 0;
    InitialCondition init = InitialCondition::UniformRandom;
};

/// Validates the spec (throws std::invalid_argument) and draws the system from its seed.
/// Dense systems cannot be drawn from a seed and are rejected here.
OscillatorSystem build_system(const SystemSpec& spec);

void validate(const SystemSpec& spec);

void to_json(nlohmann::json& out, const SystemSpec& spec);
void from_json(const nlohmann::json& in, SystemSpec& spec);

/// Writes the materialized coupling matrix as CSV (one row per line, no header).
void write_matrix_csv(std::ostream& out, const Coupling& coupling);

/// Largest N accepted by lowrank_limit_check (K = N keeps N^2 signs).
inline constexpr std::size_t kLimitCheckCap = 8192;

/// Sample standard deviation of the off-diagonal entries of a LowRank
/// coupling with K = N. N must be even.
double lowrank_limit_check(std::size_t n, double scale, std::uint64_t seed, std::size_t cap = kLimitCheckCap);

} // namespace volcano
