#include "volcano/decay.hpp"

#include "volcano/csv.hpp"
#include "volcano/ensemble.hpp"
#include "volcano/integrator.hpp"
#include "volcano/rng.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>

namespace volcano {

std::string_view to_string(DecayAverage average) {
    return average == DecayAverage::MeanAbs ? "mean_abs" : "abs_mean";
}

DecayAverage parse_decay_average(std::string_view text) {
    if (text == "mean_abs") {
        return DecayAverage::MeanAbs;
    }
    if (text == "abs_mean") {
        return DecayAverage::AbsMean;
    }
    throw std::invalid_argument("unknown averaging '" + std::string(text) + "' (expected mean_abs|abs_mean)");
}

std::string_view to_string(DecayModel model) {
    return model == DecayModel::Exponential ? "exponential" : "power_law";
}

void validate(const DecayConfig& config) {
    if (!(config.dt > 0.0)) {
        throw std::invalid_argument("dt must be > 0");
    }
    if (config.stride == 0) {
        throw std::invalid_argument("record stride must be >= 1");
    }
    if (config.realizations == 0) {
        throw std::invalid_argument("realizations must be >= 1");
    }
    SystemSpec probe;
    probe.kind = config.kind;
    probe.n = config.n;
    probe.rank = config.rank;
    volcano::validate(probe);
}

double noise_floor(std::size_t n, std::size_t realizations) {
    if (n == 0 || realizations == 0) {
        throw std::invalid_argument("noise floor needs N, R >= 1");
    }
    return std::sqrt(std::numbers::pi / (4.0 * static_cast<double>(n) * static_cast<double>(realizations)));
}

double curve_noise_floor(const DecayCurve& curve) {
    return noise_floor(curve.oscillators, curve.average == DecayAverage::MeanAbs ? 1 : curve.realizations);
}

DecayCurve decay_experiment(const DecayConfig& config) {
    validate(config);
    const std::size_t samples = config.steps / config.stride + 1;
    auto run = [&](std::uint64_t index) {
        SystemSpec spec;
        spec.kind = config.kind;
        spec.n = config.n;
        spec.rank = config.rank;
        spec.scale = config.scale;
        spec.seed = realization_seed(config.master_seed, index);
        spec.init = InitialCondition::AllZero;
        Propagator prop(build_system(spec));
        std::vector<std::complex<double>> z;
        z.reserve(samples);
        z.push_back(prop.order_parameter());
        for (std::size_t step = 1; step <= config.steps; ++step) {
            prop.step(config.dt);
            if (step % config.stride == 0) {
                z.push_back(prop.order_parameter());
            }
        }
        return z;
    };
    const auto runs = parallel_map(0, config.realizations, config.workers, run);

    DecayCurve curve;
    curve.oscillators = config.n;
    curve.realizations = config.realizations;
    curve.average = config.average;
    const auto R = static_cast<double>(config.realizations);
    for (std::size_t i = 0; i < samples; ++i) {
        curve.times.push_back(static_cast<double>(i * config.stride) * config.dt);
        double value = 0.0;
        double var = 0.0;
        if (config.average == DecayAverage::MeanAbs) {
            double s = 0.0;
            for (const auto& z : runs) s += std::abs(z[i]);
            value = s / R;
            for (const auto& z : runs) var += (std::abs(z[i]) - value) * (std::abs(z[i]) - value);
        } else {
            std::complex<double> s{};
            for (const auto& z : runs) s += z[i];
            const std::complex<double> mean = s / R;
            value = std::abs(mean);
            for (const auto& z : runs) var += std::norm(z[i] - mean);
        }
        curve.values.push_back(value);
        curve.std_error.push_back(config.realizations > 1 ? std::sqrt(var / (R - 1.0) / R) : 0.0);
    }
    return curve;
}

DecayCurve decay_baseline(DecayConfig config) {
    config.scale = 0.0;
    return decay_experiment(config);
}

void write_csv(std::ostream& out, const DecayCurve& curve) {
    CsvWriter csv(out, {"t", curve.average == DecayAverage::MeanAbs ? "mean_absZ" : "absmeanZ", "stderr"});
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        csv.row({curve.times[i], curve.values[i], curve.std_error[i]});
    }
}

FitWindow auto_window(const DecayCurve& curve, double floor) {
    FitWindow w{0.5, curve.times.empty() ? 0.0 : curve.times.back()};
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        if (curve.values[i] < 3.0 * floor) {
            w.t_hi = i > 0 ? curve.times[i - 1] : curve.times[0];
            break;
        }
    }
    return w;
}

FitWindow auto_window(const DecayCurve& curve) { return auto_window(curve, curve_noise_floor(curve)); }

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        f.rss += r * r;
    }
    f.r_squared = syy > 0.0 ? 1.0 - f.rss / syy : 1.0;
    return f;
}

DecayFit fit_decay(const DecayCurve& curve, FitWindow window, double floor) {
    if (!(window.t_lo <= window.t_hi)) {
        throw DecayFitError("empty fit window");
    }
    std::vector<double> t, logt, logz;
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        const double ti = curve.times[i];
        if (ti < window.t_lo || ti > window.t_hi || !(ti > 0.0) || !(curve.values[i] > floor)) {
            continue;
        }
        t.push_back(ti);
        logt.push_back(std::log(ti));
        logz.push_back(std::log(curve.values[i]));
    }
    if (t.size() < 10) {
        throw DecayFitError("fit window has " + std::to_string(t.size()) +
                            " points above the noise floor (need 10)");
    }
    DecayFit fit;
    fit.window = window;
    fit.points = t.size();
    fit.exponential = fit_line(t, logz);
    fit.power_law = fit_line(logt, logz);
    fit.score = fit.power_law.rss / fit.exponential.rss;
    fit.model = fit.power_law.rss < fit.exponential.rss ? DecayModel::PowerLaw : DecayModel::Exponential;
    return fit;
}

} // namespace volcano
