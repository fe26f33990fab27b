#pragma once

#include "volcano/model.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace volcano {

using cplx = std::complex<double>;

/// Sign u_m (m one-based) of the interaction pattern with canonical index `index`.
inline int pattern_sign(std::uint32_t index, int m) noexcept {
    return (index >> (m - 1)) & 1U ? -1 : 1;
}

/// Reduced amplitudes a(u), one per u in {+1,-1}^K in canonical order.
struct OAState {
    int rank = 2;
    std::vector<cplx> amplitudes;

    std::size_t size() const noexcept { return amplitudes.size(); }
};

inline constexpr int kMatrixRankCap = 12;

/// Zero state for rank K. Throws for odd K or K outside [2, 30].
OAState oa_zero_state(int rank);

/// Throws std::invalid_argument if the size is wrong or any |a| > 1.
void validate(const OAState& state);

/// Ensemble order parameter implied by the state: mean over u of conj(a(u)).
cplx oa_order_parameter(const OAState& state);

/// P(u) = (J / 2^K) sum_m (-1)^m u_m t_m with t_m = sum_u' u'_m conj(a(u')).
std::vector<cplx> oa_local_field(const OAState& state, double coupling);

/// da/dt = -a + (conj(P) - a^2 P) / 2.
std::vector<cplx> oa_rhs(const OAState& state, double coupling);

class OADivergence : public std::runtime_error {
public:
    OADivergence(double time, std::size_t index, double magnitude);
    double time;
    std::size_t index;
    double magnitude;
};

struct OATrajectory {
    std::vector<double> times;
    std::vector<OAState> states;
    std::vector<cplx> order;
};

/// RK4 for `steps` steps; states recorded at t = 0 and after every `stride` steps.
/// Throws OADivergence as soon as some |a(u)| exceeds 1 + 1e-6.
OATrajectory oa_integrate(const OAState& initial, double coupling, double dt, std::size_t steps,
                          std::size_t stride = 1);

/// A_uv = sum_m (-1)^m u_m v_m.
Eigen::MatrixXd matrix_A(int rank, int cap = kMatrixRankCap);

struct EigenGroup {
    double value = 0.0;
    std::size_t multiplicity = 0;
};

struct SpectrumReport {
    int rank = 0;
    std::vector<EigenGroup> groups;
    double eigenvector_residual = 0.0;  // max_n ||A zeta_n - (-1)^n 2^K zeta_n||_inf
    double numeric_residual = -1.0;     // max |sorted numeric - sorted analytic|; -1 if not computed

    /// Eigenvalues with multiplicity, ascending.
    std::vector<double> values() const;
};

/// zeta_n with entries zeta_v = v_n, n one-based.
Eigen::VectorXd zeta_vector(int rank, int n);

/// Closed-form spectrum of A plus the eigenvector residual check.
SpectrumReport spectrum_analytic(int rank, int cap = kMatrixRankCap);

/// Symmetric eigensolver on matrix_A; returns ascending eigenvalues.
std::vector<double> spectrum_numeric(int rank, int cap = kMatrixRankCap);

/// Analytic report with numeric_residual filled in.
SpectrumReport spectrum_checked(int rank, int cap = kMatrixRankCap);

struct JacobianReport {
    Eigen::MatrixXd matrix;
    double leading_analytic = 0.0;
    double leading_numeric = 0.0;
};

/// -I + J / 2^(K+1) A and its leading eigenvalue.
JacobianReport jacobian_at_origin(double coupling, int rank, int cap = kMatrixRankCap);

/// Central-difference Jacobian of oa_rhs at a = 0 in real coordinates
/// (Re a_0, ..., Re a_{n-1}, Im a_0, ..., Im a_{n-1}).
Eigen::MatrixXd real_linearization(double coupling, int rank, double step = 1e-6);

/// Largest real part among the eigenvalues of a general real matrix.
double leading_eigenvalue(const Eigen::MatrixXd& matrix);

double critical_coupling_continuum() noexcept;

/// Bisection on the sign of the numeric leading Jacobian eigenvalue over [lo, hi].
double critical_coupling_numeric(int rank, double tol = 1e-12, double lo = 0.0, double hi = 10.0);

/// Class-resolved order parameters z(u) = mean of e^{i theta_j} over oscillators
/// with pattern u, for a LowRank system. Empty classes give 0.
std::vector<cplx> class_order_parameters(const SignMatrix& vectors, std::span<const double> phases);

/// Number of oscillators in each class.
std::vector<std::size_t> class_sizes(const SignMatrix& vectors);

} // namespace volcano
