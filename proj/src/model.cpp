#include "volcano/model.hpp"

#include "volcano/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "volcano/csv.hpp"

namespace volcano {

std::string_view to_string(CouplingKind kind) {
    switch (kind) {
    case CouplingKind::LowRank:
        return "lowrank";
    case CouplingKind::Gaussian:
        return "gaussian";
    case CouplingKind::Dense:
        return "dense";
    }
    return "unknown";
}

std::string_view to_string(InitialCondition init) {
    return init == InitialCondition::AllZero ? "zero" : "uniform";
}

CouplingKind parse_coupling_kind(std::string_view text) {
    if (text == "lowrank") {
        return CouplingKind::LowRank;
    }
    if (text == "gaussian") {
        return CouplingKind::Gaussian;
    }
    if (text == "dense") {
        return CouplingKind::Dense;
    }
    throw std::invalid_argument("unknown coupling kind '" + std::string(text) + "' (expected lowrank|gaussian|dense)");
}

InitialCondition parse_initial_condition(std::string_view text) {
    if (text == "uniform") {
        return InitialCondition::UniformRandom;
    }
    if (text == "zero") {
        return InitialCondition::AllZero;
    }
    throw std::invalid_argument("unknown initial condition '" + std::string(text) + "' (expected uniform|zero)");
}

SignMatrix::SignMatrix(std::size_t oscillators, int rank)
    : oscillators_(oscillators), rank_(rank), signs_(oscillators * static_cast<std::size_t>(rank), 1) {}

std::uint32_t SignMatrix::pattern(std::size_t j) const noexcept {
    std::uint32_t index = 0;
    for (int m = 0; m < rank_ && m < 32; ++m) {
        if ((*this)(j, m) < 0) {
            index |= 1U << m;
        }
    }
    return index;
}

double lorentzian_quantile(double u) noexcept {
    constexpr double eps = 0x1.0p-52;
    const double clamped = std::clamp(u, eps, 1.0 - eps);
    return std::tan(std::numbers::pi * (clamped - 0.5));
}

std::vector<double> sample_frequencies(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> omega(n);
    for (auto& w : omega) {
        w = lorentzian_quantile(rng.uniform());
    }
    return omega;
}

namespace {

void require_even_rank(int rank) {
    if (rank < 2 || rank % 2 != 0) {
        throw std::invalid_argument("K must be even and >= 2 (got " + std::to_string(rank) + ")");
    }
}

} // namespace

SignMatrix sample_interaction_vectors(std::size_t n, int rank, std::uint64_t seed) {
    require_even_rank(rank);
    Rng rng(seed);
    SignMatrix u(n, rank);
    for (std::size_t j = 0; j < n; ++j) {
        for (int m = 0; m < rank; ++m) {
            u.set(j, m, rng.sign());
        }
    }
    return u;
}

std::vector<double> sample_uniform_phases(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> theta(n);
    for (auto& t : theta) {
        t = 2.0 * std::numbers::pi * rng.uniform();
    }
    return theta;
}

Coupling make_lowrank_coupling(SignMatrix vectors, double scale) {
    require_even_rank(vectors.rank());
    if (!(scale >= 0.0)) {
        throw std::invalid_argument("coupling scale J must be >= 0");
    }
    Coupling c;
    c.kind = CouplingKind::LowRank;
    c.size = vectors.oscillators();
    c.scale = scale;
    c.vectors = std::move(vectors);
    return c;
}

Coupling build_gaussian_coupling(std::size_t n, double scale, std::uint64_t seed) {
    if (n < 2) {
        throw std::invalid_argument("Gaussian coupling needs N >= 2");
    }
    if (!(scale >= 0.0)) {
        throw std::invalid_argument("coupling scale J must be >= 0");
    }
    Coupling c;
    c.kind = CouplingKind::Gaussian;
    c.size = n;
    c.scale = scale;
    c.matrix.assign(n * n, 0.0);
    Rng rng(seed);
    const double sd = scale / std::sqrt(static_cast<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            const double v = sd * rng.normal();
            c.matrix[j * n + k] = v;
            c.matrix[k * n + j] = v;
        }
    }
    return c;
}

Coupling make_dense_coupling(std::vector<double> matrix, std::size_t n) {
    if (matrix.size() != n * n) {
        throw std::invalid_argument("dense coupling must be N x N");
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            if (matrix[j * n + k] != matrix[k * n + j]) {
                throw std::invalid_argument("dense coupling must be symmetric");
            }
        }
    }
    Coupling c;
    c.kind = CouplingKind::Dense;
    c.size = n;
    c.matrix = std::move(matrix);
    return c;
}

double coupling_entry(const Coupling& coupling, std::size_t j, std::size_t k) {
    if (j >= coupling.size || k >= coupling.size) {
        throw std::out_of_range("coupling index out of range");
    }
    if (coupling.kind != CouplingKind::LowRank) {
        return coupling.matrix[j * coupling.size + k];
    }
    // Alternating sum (-1)^m with m = 1..K; component index m-1 here.
    int sum = 0;
    for (int m = 0; m < coupling.rank(); ++m) {
        const int term = coupling.vectors(j, m) * coupling.vectors(k, m);
        sum += (m % 2 == 0) ? -term : term;
    }
    return coupling.scale / static_cast<double>(coupling.size) * sum;
}

std::vector<double> dense_matrix(const Coupling& coupling) {
    if (coupling.kind != CouplingKind::LowRank) {
        return coupling.matrix;
    }
    const std::size_t n = coupling.size;
    std::vector<double> m(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            m[j * n + k] = coupling_entry(coupling, j, k);
        }
    }
    return m;
}

void validate(const SystemSpec& spec) {
    if (spec.n < 1) {
        throw std::invalid_argument("N must be >= 1");
    }
    if (!(spec.scale >= 0.0) || !std::isfinite(spec.scale)) {
        throw std::invalid_argument("J must be finite and >= 0");
    }
    switch (spec.kind) {
    case CouplingKind::LowRank:
        require_even_rank(spec.rank);
        break;
    case CouplingKind::Gaussian:
        if (spec.n < 2) {
            throw std::invalid_argument("Gaussian coupling needs N >= 2");
        }
        break;
    case CouplingKind::Dense:
        throw std::invalid_argument("dense couplings cannot be rebuilt from a seed");
    }
}

OscillatorSystem build_system(const SystemSpec& spec) {
    validate(spec);
    OscillatorSystem sys;
    sys.seed = spec.seed;
    sys.frequencies = sample_frequencies(spec.n, stream_seed(spec.seed, Stream::Frequencies));
    if (spec.kind == CouplingKind::LowRank) {
        sys.coupling = make_lowrank_coupling(
            sample_interaction_vectors(spec.n, spec.rank, stream_seed(spec.seed, Stream::Vectors)), spec.scale);
    } else {
        sys.coupling = build_gaussian_coupling(spec.n, spec.scale, stream_seed(spec.seed, Stream::Coupling));
    }
    if (spec.init == InitialCondition::AllZero) {
        sys.phases.assign(spec.n, 0.0);
    } else {
        sys.phases = sample_uniform_phases(spec.n, stream_seed(spec.seed, Stream::Phases));
    }
    return sys;
}

void to_json(nlohmann::json& out, const SystemSpec& spec) {
    out = nlohmann::json{{"coupling", to_string(spec.kind)},
                         {"N", spec.n},
                         {"K", spec.kind == CouplingKind::LowRank ? spec.rank : 0},
                         {"J", spec.scale},
                         {"seed", spec.seed},
                         {"init", to_string(spec.init)}};
}

void from_json(const nlohmann::json& in, SystemSpec& spec) {
    spec.kind = parse_coupling_kind(in.at("coupling").get<std::string>());
    spec.n = in.at("N").get<std::size_t>();
    spec.rank = in.at("K").get<int>();
    spec.scale = in.at("J").get<double>();
    spec.seed = in.at("seed").get<std::uint64_t>();
    spec.init = parse_initial_condition(in.value("init", std::string("uniform")));
}

void write_matrix_csv(std::ostream& out, const Coupling& coupling) {
    const auto m = dense_matrix(coupling);
    const std::size_t n = coupling.size;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) {
                out << ',';
            }
            out << format_double(m[j * n + k]);
        }
        out << '\n';
    }
}

double lowrank_limit_check(std::size_t n, double scale, std::uint64_t seed, std::size_t cap) {
    if (n > cap) {
        throw std::invalid_argument("lowrank_limit_check: N exceeds cap of " + std::to_string(cap));
    }
    if (n < 2 || n % 2 != 0) {
        throw std::invalid_argument("lowrank_limit_check: K = N must be even and >= 2");
    }
    const auto u = sample_interaction_vectors(n, static_cast<int>(n), seed);
    // Entries are (J/N) d_jk with integer d_jk = sum_m (-1)^m u_m^(j) u_m^(k); accumulate d exactly.
    std::vector<std::int8_t> alternating(n * n);
    std::vector<std::int8_t> plain(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t m = 0; m < n; ++m) {
            const int v = u(j, static_cast<int>(m));
            plain[j * n + m] = static_cast<std::int8_t>(v);
            alternating[j * n + m] = static_cast<std::int8_t>(m % 2 == 0 ? -v : v);
        }
    }
    std::int64_t sum = 0;
    std::int64_t sum_sq = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::int8_t* a = alternating.data() + j * n;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) {
                continue;
            }
            const std::int8_t* b = plain.data() + k * n;
            std::int32_t d = 0;
            for (std::size_t m = 0; m < n; ++m) {
                d += a[m] * b[m];
            }
            sum += d;
            sum_sq += static_cast<std::int64_t>(d) * d;
        }
    }
    const auto count = static_cast<double>(n * (n - 1));
    const double centered = static_cast<double>(sum_sq) - static_cast<double>(sum) * static_cast<double>(sum) / count;
    const double unit = scale / static_cast<double>(n);
    return unit * std::sqrt(centered / (count - 1.0));
}

} // namespace volcano
