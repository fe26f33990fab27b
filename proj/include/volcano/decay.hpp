#pragma once

#include "volcano/model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace volcano {

enum class DecayAverage { MeanAbs, AbsMean };

std::string_view to_string(DecayAverage average);
DecayAverage parse_decay_average(std::string_view text);

struct DecayConfig {
    CouplingKind kind = CouplingKind::LowRank;
    std::size_t n = 5000;
    int rank = 2;
    double scale = 10.0;
    double dt = 0.01;
    std::size_t steps = 1000;
    std::size_t stride = 1;
    std::size_t realizations = 100;
    std::uint64_t master_seed = 0;
    unsigned workers = 1;
    DecayAverage average = DecayAverage::MeanAbs;
};

void validate(const DecayConfig& config);

struct DecayCurve {
    std::vector<double> times;
    std::vector<double> values;     // mean |Z| or |mean Z|, Z normalized by N
    std::vector<double> std_error;
    std::size_t oscillators = 0;
    std::size_t realizations = 0;
    DecayAverage average = DecayAverage::MeanAbs;
};

/// Expected |Z| of R-averaged order parameters of N independent uniform phases: sqrt(pi / (4 N R)).
double noise_floor(std::size_t n, std::size_t realizations);

/// Level the curve settles at when nothing is left but incoherent noise.
/// Averaging |Z| does not shrink it with R, so MeanAbs uses R = 1.
double curve_noise_floor(const DecayCurve& curve);

/// Curve starting from the in-phase state; t = 0 is included.
DecayCurve decay_experiment(const DecayConfig& config);

/// Same ensemble with J = 0.
DecayCurve decay_baseline(DecayConfig config);

/// Columns t, mean_absZ (or absmeanZ), stderr.
void write_csv(std::ostream& out, const DecayCurve& curve);

enum class DecayModel { Exponential, PowerLaw };

std::string_view to_string(DecayModel model);

struct FitWindow {
    double t_lo = 0.0;
    double t_hi = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rss = 0.0;
    double r_squared = 0.0;
};

struct DecayFit {
    DecayModel model = DecayModel::Exponential;
    FitWindow window;
    std::size_t points = 0;
    LineFit exponential;  // log|Z| against t
    LineFit power_law;    // log|Z| against log t
    /// rss(power law) / rss(exponential); below 1 favours the power law.
    double score = 0.0;

    double rate() const noexcept { return -exponential.slope; }
    double exponent() const noexcept { return -power_law.slope; }
};

class DecayFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// [0.5, last time before the curve first falls below 3 x floor].
FitWindow auto_window(const DecayCurve& curve, double floor);
FitWindow auto_window(const DecayCurve& curve);

/// Least-squares fits on points with t in the window, t > 0 and value > floor.
/// Throws DecayFitError with fewer than 10 such points.
DecayFit fit_decay(const DecayCurve& curve, FitWindow window, double floor = 0.0);

/// Ordinary least squares y = slope x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace volcano
