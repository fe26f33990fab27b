// Acceptance run: one PASS/FAIL line per criterion, with the measured numbers.
// Usage: acceptance [--only NAME] [--list] [--workers N]

#include "volcano/cli.hpp"
#include "volcano/critical.hpp"
#include "volcano/decay.hpp"
#include "volcano/ensemble.hpp"
#include "volcano/fieldstats.hpp"
#include "volcano/integrator.hpp"
#include "volcano/oa.hpp"
#include "volcano/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

using namespace volcano;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

unsigned g_workers = 1;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome continuum_critical_coupling() {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream os;
    os.precision(15);
    bool ok = true;
    for (int K : {2, 4, 6}) {
        const double jc = critical_coupling_numeric(K);
        ok = ok && std::abs(jc - 2.0) < 1e-8;
        os << "K=" << K << " J_c=" << jc << "; ";
    }
    const double s = seconds_since(t0);
    os << "time " << s << " s";
    return {ok && s < 1.0, os.str()};
}

Outcome spectrum_of_A() {
    std::ostringstream os;
    bool ok = true;
    for (int K = 2; K <= 8; K += 2) {
        const auto A = matrix_A(K);
        const auto n = static_cast<std::uint32_t>(A.rows());
        const double big = std::ldexp(1.0, K);
        std::vector<double> want;
        want.insert(want.end(), K / 2, -big);
        want.insert(want.end(), n - K, 0.0);
        want.insert(want.end(), K / 2, big);
        const auto got = spectrum_numeric(K);
        double eig = 0.0;
        for (std::size_t i = 0; i < n; ++i) eig = std::max(eig, std::abs(got[i] - want[i]));
        double vec = 0.0;
        for (int m = 1; m <= K; ++m) {
            Eigen::VectorXd zeta(n);
            for (std::uint32_t v = 0; v < n; ++v) zeta(v) = pattern_sign(v, m);
            const double lambda = (m % 2 ? -1.0 : 1.0) * big;
            vec = std::max(vec, (A * zeta - lambda * zeta).cwiseAbs().maxCoeff());
        }
        ok = ok && eig < 1e-8 && vec < 1e-10;
        os << "K=" << K << " eig " << eig << " vec " << vec << "; ";
    }
    return {ok, os.str()};
}

Outcome fast_path_correctness() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(31337);
    double worst = 0.0;
    const int instances = 240;
    for (int i = 0; i < instances; ++i) {
        SystemSpec s;
        s.n = 2 + gen() % 199;
        s.rank = 2 * static_cast<int>(1 + gen() % 3);
        s.scale = std::uniform_real_distribution<double>(0.0, 5.0)(gen);
        s.seed = gen();
        const auto sys = build_system(s);
        const auto fast = local_fields(sys);
        const auto ref = local_fields_reference(sys);
        const auto v = velocity(sys);
        const auto vr = velocity_pairwise(sys);
        for (std::size_t j = 0; j < s.n; ++j) {
            worst = std::max({worst, std::abs(fast.re[j] - ref.re[j]), std::abs(fast.im[j] - ref.im[j]),
                              std::abs(v[j] - vr[j])});
        }
    }
    const double s = seconds_since(t0);
    std::ostringstream os;
    os << instances << " instances, max deviation " << worst << ", time " << s << " s";
    return {worst < 1e-12 && s < 30.0, os.str()};
}

Outcome dephasing_baseline() {
    const auto t0 = std::chrono::steady_clock::now();
    TrajectoryConfig tc;
    tc.system.n = 5000;
    tc.system.rank = 2;
    tc.system.scale = 0.0;
    tc.system.init = InitialCondition::AllZero;
    tc.transient_steps = 0;
    tc.recorded_steps = 300;
    const auto rec = integrate(tc);
    double worst = 0.0, at = 0.0;
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        const double t = rec.times[i];
        const double dev = std::abs(std::abs(rec.order[i]) - std::exp(-t)) / std::exp(-t);
        if (dev > worst) {
            worst = dev;
            at = t;
        }
    }
    const double s = seconds_since(t0);
    std::ostringstream os;
    os << "max relative deviation " << worst << " at t=" << at << " (noise sd there "
       << std::sqrt((1 - std::exp(-2 * at)) / 2e4) / std::exp(-at) << " relative), time " << s << " s";
    return {worst < 0.05 && s < 60.0, os.str()};
}

Outcome volcano_transition() {
    FieldProtocol p;
    p.n = 250;
    p.rank = 4;
    p.master_seed = 1;
    std::ostringstream os;
    bool ok = true;
    for (double J : {1.5, 2.5}) {
        const auto ens = volcano_ensemble(p, J, 500, g_workers, 50, 3.0);
        const auto cls = classify_volcano(ens.products.estimate());
        const std::size_t mode = ens.histogram.areal_mode();
        const double mode_r = ens.histogram.centers()[mode];
        const bool below = J < 2.0;
        ok = ok && cls.side == (below ? VolcanoSide::Below : VolcanoSide::Above) && ((mode == 0) == below);
        os << "J=" << J << " product " << ens.products.value() << " +/- " << ens.products.std_error() << " -> "
           << to_string(cls.side) << ", areal mode r=" << mode_r << "; ";
    }
    return {ok, os.str()};
}

Outcome moment_machinery() {
    using Big = boost::multiprecision::cpp_bin_float_50;
    using GK = boost::math::quadrature::gauss_kronrod<Big, 61>;
    auto h = [](Big r) { return exp(-(r - 1) * (r - 1) / 2) + exp(-(r + 1) * (r + 1) / 2); };
    const Big top = 60;
    const Big tol("1e-30");
    const Big z = GK::integrate([&](Big r) { return r * h(r); }, Big(0), top, 30, tol);
    const Big m1 = GK::integrate([&](Big r) { return r * r * h(r); }, Big(0), top, 30, tol);
    const Big mm1 = GK::integrate(h, Big(0), top, 30, tol);
    const double oracle = static_cast<double>(m1 * mm1 / (z * z));
    const double c1 = momentfit_curve(1.0);

    double round_trip = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double g = i * 0.01;
        round_trip = std::max(round_trip, std::abs(gamma_from_moment_product(momentfit_curve(g)) - g));
    }

    auto radial = [](double r) { return r * (std::exp(-0.5 * (r - 1) * (r - 1)) + std::exp(-0.5 * (r + 1) * (r + 1))); };
    const double r_top = 10.0;
    double bound = 0.0;
    for (double r = 0.0; r < r_top; r += 1e-4) bound = std::max(bound, radial(r));
    bound *= 1.01;
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> ur(0.0, r_top), uy(0.0, bound);
    MomentAccumulator acc;
    while (acc.count() < 1000000) {
        const double r = ur(gen);
        if (uy(gen) < radial(r)) acc.add(r);
    }
    const Estimate mc = moment_product(acc);
    const double z_mc = std::abs(mc.value - c1) / mc.std_error;

    std::ostringstream os;
    os.precision(10);
    os << "curve(1)=" << c1 << " oracle=" << oracle << " |diff|=" << std::abs(c1 - oracle)
       << "; round trip max " << round_trip << "; Monte Carlo " << mc.value << " +/- " << mc.std_error << " (" << z_mc
       << " se)";
    const bool ok = std::abs(c1 - 1.46946) < 1e-4 && std::abs(c1 - oracle) < 1e-10 && round_trip < 1e-6 && z_mc < 3.0;
    return {ok, os.str()};
}

Outcome critical_trend() {
    struct Row {
        std::size_t n;
        double j_c, err;
    };
    std::vector<Row> rows;
    std::ostringstream os;
    for (std::size_t n : {250, 1000, 4000}) {
        const auto t0 = std::chrono::steady_clock::now();
        FieldProtocol p;
        p.n = n;
        p.rank = 2;
        p.init = InitialCondition::AllZero;
        p.master_seed = 2024;
        BisectionConfig cfg;
        cfg.max_realizations = 1000;
        const auto est = estimate_jc(cfg, field_product_batch(p, g_workers));
        const double stat = statistical_uncertainty(est);
        const double err = std::hypot(est.uncertainty(), std::isfinite(stat) ? stat : 0.0);
        rows.push_back({n, est.j_c, err});
        os << "N=" << n << " J_c=" << est.j_c << " +/- " << err << " (bracket " << est.uncertainty() << ", stat "
           << stat << ", " << est.log.size() << " decisions, " << seconds_since(t0) << " s); ";
    }
    bool ok = std::abs(rows.back().j_c - 2.0) < 0.4;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ok = ok && std::abs(rows[i].j_c - 2.0) <= std::abs(rows[i - 1].j_c - 2.0) + rows[i].err + rows[i - 1].err;
    }
    return {ok, os.str()};
}

Outcome decay_contrast() {
    DecayConfig low;
    low.n = 5000;
    low.rank = 2;
    low.scale = 10.0;
    low.steps = 1000;
    low.realizations = 100;
    low.master_seed = 7;
    low.workers = g_workers;
    DecayConfig full = low;
    full.n = 500;
    full.rank = 500;
    std::ostringstream os;
    bool ok = true;
    for (const auto& [name, cfg] : {std::pair{"K=2 N=5000", low}, std::pair{"K=N=500", full}}) {
        const auto curve = decay_experiment(cfg);
        const double floor = curve_noise_floor(curve);
        try {
            const auto fit = fit_decay(curve, auto_window(curve, floor), floor);
            os << name << ": window [" << fit.window.t_lo << ", " << fit.window.t_hi << "] " << fit.points
               << " points, exp R^2 " << fit.exponential.r_squared << " rate " << fit.rate() << ", power R^2 "
               << fit.power_law.r_squared << " exponent " << fit.exponent() << ", score " << fit.score << "; ";
            ok = ok && (cfg.rank == 2 ? fit.exponential.r_squared > 0.99 : fit.score < 1.0);
        } catch (const DecayFitError& e) {
            os << name << ": " << e.what() << "; ";
            ok = false;
        }
    }
    return {ok, os.str()};
}

Outcome phase_field_structure() {
    FieldProtocol p;
    p.n = 2000;
    p.rank = 6;
    p.stride = 20;
    p.master_seed = 3;
    const double pi = std::numbers::pi;
    const double band = 0.3;
    const double uniform_band = 2.0 * band / (2.0 * pi);
    std::ostringstream os;

    const auto low = phase_field_ensemble(p, 1.0, 1, g_workers, 7, 32);
    std::size_t used = 0, passed = 0;
    os << "J=1 p-values";
    for (std::size_t s = 0; s < low.coupling_bins(); ++s) {
        if (low.slice_weight(s) <= 0.0) continue;
        const double pv = low.uniformity_pvalue(s);
        ++used;
        passed += pv > 0.01;
        os << ' ' << pv;
    }
    const bool uniform_ok = used > 0 && passed >= 0.9 * used;

    const auto high = phase_field_ensemble(p, 3.0, 1, g_workers, 7, 32);
    bool bands_ok = true;
    os << "; J=3 p-values";
    for (std::size_t s = 0; s < high.coupling_bins(); ++s) {
        if (high.slice_weight(s) > 0.0) os << ' ' << high.uniformity_pvalue(s);
    }
    os << "; J=3 band masses (uniform " << uniform_band << ")";
    for (std::size_t s = 0; s < high.coupling_bins(); ++s) {
        const double c = high.coupling_center(s);
        if (c >= 0.5) {
            const double m = high.slice_mass(s, -band, band);
            bands_ok = bands_ok && m > 2.0 * uniform_band;
            os << " c=" << c << " near 0: " << m;
        } else if (c <= -0.5) {
            const double m = high.slice_mass(s, pi - band, pi) + high.slice_mass(s, -pi, -pi + band);
            bands_ok = bands_ok && m > 2.0 * uniform_band;
            os << " c=" << c << " near pi: " << m;
        }
    }
    return {uniform_ok && bands_ok, os.str()};
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "volcano_acceptance_determinism";
    fs::remove_all(root);
    const std::vector<std::vector<std::string>> runs{
        {"simulate", "--N", "200", "--K", "4", "--J", "1", "3"},
        {"volcano", "--N", "100", "--K", "4", "--J", "1.5", "2.5", "--realizations", "8"},
        {"critical", "--N", "100", "--batch", "10", "--max_realizations", "30", "--accuracy", "0.2",
         "--transient_steps", "100", "--recorded_steps", "100"},
        {"oa", "--K", "4", "--J", "1", "3", "--steps", "500"},
        {"decay", "--N", "300", "--K", "300", "--realizations", "8", "--steps", "300", "--baseline"},
        {"phases", "--N", "200", "--K", "6", "--J", "1", "3", "--realizations", "3"},
    };
    bool ok = true;
    std::ostringstream os;
    for (const auto& args : runs) {
        std::map<std::string, std::string> sums[2];
        int w = 0;
        for (const char* workers : {"1", "3"}) {
            auto full = args;
            const fs::path out = root / (args[0] + "_" + workers);
            full.insert(full.end(), {"--workers", workers, "--output", out.string()});
            const auto m = run(parse_config(full).config);
            for (const auto& f : m.outputs) sums[w][f.name] = f.sha256;
            ++w;
        }
        const bool same = !sums[0].empty() && sums[0] == sums[1];
        ok = ok && same;
        os << args[0] << " " << sums[0].size() << " files " << (same ? "identical" : "DIFFER") << "; ";
    }
    fs::remove_all(root);
    return {ok, os.str()};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"continuum_critical_coupling", continuum_critical_coupling},
    {"spectrum_of_A", spectrum_of_A},
    {"fast_path_correctness", fast_path_correctness},
    {"dephasing_baseline", dephasing_baseline},
    {"volcano_transition", volcano_transition},
    {"moment_machinery", moment_machinery},
    {"critical_trend", critical_trend},
    {"decay_contrast", decay_contrast},
    {"phase_field_structure", phase_field_structure},
    {"determinism", determinism},
};

} // namespace

int main(int argc, char** argv) {
    std::string only;
    g_workers = std::max(1U, std::thread::hardware_concurrency());
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            only = argv[++i];
        } else if (a == "--workers" && i + 1 < argc) {
            g_workers = static_cast<unsigned>(std::stoul(argv[++i]));
        } else if (a == "--list") {
            for (const auto& [name, fn] : kCriteria) std::cout << name << '\n';
            return 0;
        } else {
            std::cerr << "usage: acceptance [--only NAME] [--list] [--workers N]\n";
            return 2;
        }
    }
    int failures = 0, ran = 0;
    for (const auto& [name, fn] : kCriteria) {
        if (!only.empty() && name != only) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << seconds_since(t0) << " s]"
                  << std::endl;
    }
    if (ran == 0) {
        std::cerr << "no criterion named '" << only << "'\n";
        return 2;
    }
    return failures == 0 ? 0 : 1;
}
