#include "volcano/oa.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

namespace volcano {

namespace {

void check_rank(int rank, int cap) {
    if (rank < 2 || rank % 2 != 0) {
        throw std::invalid_argument("K must be even and >= 2");
    }
    if (rank > cap) {
        throw std::invalid_argument("K = " + std::to_string(rank) + " exceeds the matrix cap " +
                                    std::to_string(cap));
    }
}

std::string divergence_message(double time, std::size_t index, double magnitude) {
    std::ostringstream os;
    os << "reduced system diverged at t=" << time << ": |a(" << index << ")| = " << magnitude;
    return os.str();
}

} // namespace

OAState oa_zero_state(int rank) {
    check_rank(rank, 30);
    OAState s;
    s.rank = rank;
    s.amplitudes.assign(std::size_t{1} << rank, cplx{});
    return s;
}

void validate(const OAState& state) {
    check_rank(state.rank, 30);
    if (state.amplitudes.size() != (std::size_t{1} << state.rank)) {
        throw std::invalid_argument("state needs 2^K amplitudes");
    }
    for (const cplx& a : state.amplitudes) {
        if (!(std::abs(a) <= 1.0)) {
            throw std::invalid_argument("amplitudes must lie in the closed unit disk");
        }
    }
}

cplx oa_order_parameter(const OAState& state) {
    cplx sum{};
    for (const cplx& a : state.amplitudes) {
        sum += std::conj(a);
    }
    return sum / static_cast<double>(state.amplitudes.size());
}

std::vector<cplx> oa_local_field(const OAState& state, double coupling) {
    const int K = state.rank;
    const std::size_t n = state.amplitudes.size();
    std::vector<cplx> t(static_cast<std::size_t>(K));
    for (std::uint32_t v = 0; v < n; ++v) {
        const cplx c = std::conj(state.amplitudes[v]);
        for (int m = 1; m <= K; ++m) {
            t[m - 1] += static_cast<double>(pattern_sign(v, m)) * c;
        }
    }
    const double scale = coupling / static_cast<double>(n);
    std::vector<cplx> p(n);
    for (std::uint32_t u = 0; u < n; ++u) {
        cplx acc{};
        for (int m = 1; m <= K; ++m) {
            const int s = (m % 2 == 0 ? 1 : -1) * pattern_sign(u, m);
            acc += static_cast<double>(s) * t[m - 1];
        }
        p[u] = scale * acc;
    }
    return p;
}

std::vector<cplx> oa_rhs(const OAState& state, double coupling) {
    std::vector<cplx> p = oa_local_field(state, coupling);
    for (std::size_t u = 0; u < p.size(); ++u) {
        const cplx a = state.amplitudes[u];
        p[u] = -a + 0.5 * (std::conj(p[u]) - a * a * p[u]);
    }
    return p;
}

OADivergence::OADivergence(double time_, std::size_t index_, double magnitude_)
    : std::runtime_error(divergence_message(time_, index_, magnitude_)), time(time_), index(index_),
      magnitude(magnitude_) {}

OATrajectory oa_integrate(const OAState& initial, double coupling, double dt, std::size_t steps,
                          std::size_t stride) {
    validate(initial);
    if (!(dt > 0.0)) {
        throw std::invalid_argument("dt must be > 0");
    }
    if (stride == 0) {
        throw std::invalid_argument("record stride must be >= 1");
    }
    OATrajectory out;
    OAState s = initial;
    OAState tmp = initial;
    auto record = [&](double t) {
        out.times.push_back(t);
        out.states.push_back(s);
        out.order.push_back(oa_order_parameter(s));
    };
    record(0.0);
    const std::size_t n = s.size();
    for (std::size_t step = 1; step <= steps; ++step) {
        const auto k1 = oa_rhs(s, coupling);
        for (std::size_t u = 0; u < n; ++u) tmp.amplitudes[u] = s.amplitudes[u] + 0.5 * dt * k1[u];
        const auto k2 = oa_rhs(tmp, coupling);
        for (std::size_t u = 0; u < n; ++u) tmp.amplitudes[u] = s.amplitudes[u] + 0.5 * dt * k2[u];
        const auto k3 = oa_rhs(tmp, coupling);
        for (std::size_t u = 0; u < n; ++u) tmp.amplitudes[u] = s.amplitudes[u] + dt * k3[u];
        const auto k4 = oa_rhs(tmp, coupling);
        const double t = static_cast<double>(step) * dt;
        for (std::size_t u = 0; u < n; ++u) {
            s.amplitudes[u] += dt / 6.0 * (k1[u] + 2.0 * k2[u] + 2.0 * k3[u] + k4[u]);
            const double mag = std::abs(s.amplitudes[u]);
            if (!(mag <= 1.0 + 1e-6)) {
                throw OADivergence(t, u, mag);
            }
        }
        if (step % stride == 0) {
            record(t);
        }
    }
    return out;
}

Eigen::MatrixXd matrix_A(int rank, int cap) {
    check_rank(rank, cap);
    const auto n = static_cast<Eigen::Index>(1) << rank;
    Eigen::MatrixXd A(n, n);
    for (Eigen::Index u = 0; u < n; ++u) {
        for (Eigen::Index v = 0; v < n; ++v) {
            int sum = 0;
            for (int m = 1; m <= rank; ++m) {
                const int sign = m % 2 == 0 ? 1 : -1;
                sum += sign * pattern_sign(static_cast<std::uint32_t>(u), m) *
                       pattern_sign(static_cast<std::uint32_t>(v), m);
            }
            A(u, v) = sum;
        }
    }
    return A;
}

std::vector<double> SpectrumReport::values() const {
    std::vector<double> out;
    for (const auto& g : groups) {
        out.insert(out.end(), g.multiplicity, g.value);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Eigen::VectorXd zeta_vector(int rank, int n) {
    if (n < 1 || n > rank) {
        throw std::invalid_argument("eigenvector index must be in [1, K]");
    }
    const auto size = static_cast<Eigen::Index>(1) << rank;
    Eigen::VectorXd z(size);
    for (Eigen::Index v = 0; v < size; ++v) {
        z(v) = pattern_sign(static_cast<std::uint32_t>(v), n);
    }
    return z;
}

SpectrumReport spectrum_analytic(int rank, int cap) {
    check_rank(rank, cap);
    SpectrumReport r;
    r.rank = rank;
    const double top = std::ldexp(1.0, rank);
    const auto half = static_cast<std::size_t>(rank / 2);
    r.groups = {{-top, half}, {0.0, (std::size_t{1} << rank) - static_cast<std::size_t>(rank)}, {top, half}};
    const Eigen::MatrixXd A = matrix_A(rank, cap);
    for (int n = 1; n <= rank; ++n) {
        const Eigen::VectorXd z = zeta_vector(rank, n);
        const double lambda = n % 2 == 0 ? top : -top;
        r.eigenvector_residual = std::max(r.eigenvector_residual, (A * z - lambda * z).cwiseAbs().maxCoeff());
    }
    return r;
}

std::vector<double> spectrum_numeric(int rank, int cap) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix_A(rank, cap), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigensolver failed");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    std::vector<double> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end());
    return out;
}

SpectrumReport spectrum_checked(int rank, int cap) {
    SpectrumReport r = spectrum_analytic(rank, cap);
    const auto numeric = spectrum_numeric(rank, cap);
    const auto analytic = r.values();
    double res = 0.0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        res = std::max(res, std::abs(numeric[i] - analytic[i]));
    }
    r.numeric_residual = res;
    return r;
}

double leading_eigenvalue(const Eigen::MatrixXd& matrix) {
    if (matrix.isApprox(matrix.transpose(), 0.0)) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().maxCoeff();
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, false);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("eigensolver failed");
    }
    return solver.eigenvalues().real().maxCoeff();
}

JacobianReport jacobian_at_origin(double coupling, int rank, int cap) {
    JacobianReport r;
    const Eigen::MatrixXd A = matrix_A(rank, cap);
    r.matrix = coupling / std::ldexp(1.0, rank + 1) * A;
    r.matrix.diagonal().array() -= 1.0;
    r.leading_analytic = -1.0 + coupling / 2.0;
    r.leading_numeric = leading_eigenvalue(r.matrix);
    return r;
}

Eigen::MatrixXd real_linearization(double coupling, int rank, double step) {
    check_rank(rank, kMatrixRankCap);
    const auto n = static_cast<Eigen::Index>(1) << rank;
    Eigen::MatrixXd L(2 * n, 2 * n);
    OAState plus = oa_zero_state(rank);
    OAState minus = oa_zero_state(rank);
    for (Eigen::Index col = 0; col < 2 * n; ++col) {
        const auto u = static_cast<std::size_t>(col % n);
        const cplx d = col < n ? cplx{step, 0.0} : cplx{0.0, step};
        plus.amplitudes[u] = d;
        minus.amplitudes[u] = -d;
        const auto fp = oa_rhs(plus, coupling);
        const auto fm = oa_rhs(minus, coupling);
        for (Eigen::Index row = 0; row < n; ++row) {
            const cplx diff = (fp[row] - fm[row]) / (2.0 * step);
            L(row, col) = diff.real();
            L(row + n, col) = diff.imag();
        }
        plus.amplitudes[u] = 0.0;
        minus.amplitudes[u] = 0.0;
    }
    return L;
}

double critical_coupling_continuum() noexcept { return 2.0; }

double critical_coupling_numeric(int rank, double tol, double lo, double hi) {
    auto f = [rank](double J) { return jacobian_at_origin(J, rank).leading_numeric; };
    double flo = f(lo);
    const double fhi = f(hi);
    if (!(flo < 0.0 && fhi > 0.0)) {
        throw std::invalid_argument("leading eigenvalue does not change sign on the bracket");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double fm = f(mid);
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<cplx> class_order_parameters(const SignMatrix& vectors, std::span<const double> phases) {
    if (phases.size() != vectors.oscillators()) {
        throw std::invalid_argument("phase count does not match interaction vectors");
    }
    const std::size_t classes = std::size_t{1} << vectors.rank();
    std::vector<cplx> z(classes);
    std::vector<std::size_t> count(classes);
    for (std::size_t j = 0; j < phases.size(); ++j) {
        const auto c = vectors.pattern(j);
        z[c] += std::polar(1.0, phases[j]);
        ++count[c];
    }
    for (std::size_t c = 0; c < classes; ++c) {
        if (count[c] > 0) {
            z[c] /= static_cast<double>(count[c]);
        }
    }
    return z;
}

std::vector<std::size_t> class_sizes(const SignMatrix& vectors) {
    std::vector<std::size_t> count(std::size_t{1} << vectors.rank());
    for (std::size_t j = 0; j < vectors.oscillators(); ++j) {
        ++count[vectors.pattern(j)];
    }
    return count;
}

} // namespace volcano
