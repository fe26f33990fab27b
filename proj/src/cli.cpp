#include "volcano/cli.hpp"

#include "volcano/critical.hpp"
#include "volcano/csv.hpp"
#include "volcano/ensemble.hpp"
#include "volcano/fieldstats.hpp"
#include "volcano/integrator.hpp"
#include "volcano/oa.hpp"
#include "volcano/rng.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#ifndef VOLCANO_VERSION
#define VOLCANO_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace volcano {

std::string_view toolkit_version() noexcept { return VOLCANO_VERSION; }

namespace {

constexpr std::array<std::pair<Experiment, std::string_view>, 6> kExperiments{{
    {Experiment::Simulate, "simulate"},
    {Experiment::Volcano, "volcano"},
    {Experiment::Critical, "critical"},
    {Experiment::OA, "oa"},
    {Experiment::Decay, "decay"},
    {Experiment::Phases, "phases"},
}};

} // namespace

std::string_view to_string(Experiment experiment) {
    for (const auto& [e, name] : kExperiments) {
        if (e == experiment) {
            return name;
        }
    }
    return "simulate";
}

Experiment parse_experiment(std::string_view text) {
    for (const auto& [e, name] : kExperiments) {
        if (name == text) {
            return e;
        }
    }
    throw ConfigError("unknown experiment '" + std::string(text) + "'");
}

EnsembleConfig default_config(Experiment experiment) {
    EnsembleConfig c;
    c.experiment = experiment;
    switch (experiment) {
    case Experiment::Simulate:
        break;
    case Experiment::Volcano:
        c.couplings = {1.5, 2.0, 2.5};
        c.realizations = 500;
        break;
    case Experiment::Critical:
        c.rank = 2;
        c.couplings = {};
        c.init = InitialCondition::AllZero;
        break;
    case Experiment::OA:
        c.rank = 2;
        c.couplings = {3.0};
        break;
    case Experiment::Decay:
        c.n = 5000;
        c.rank = 2;
        c.couplings = {10.0};
        c.realizations = 750;
        c.init = InitialCondition::AllZero;
        break;
    case Experiment::Phases:
        c.n = 2000;
        c.rank = 6;
        c.couplings = {1.0, 3.0};
        c.stride = 20;
        break;
    }
    return c;
}

void validate(const EnsembleConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (c.rank < 2 || c.rank % 2 != 0) {
        fail("K must be even and >= 2 (got " + std::to_string(c.rank) + ")");
    }
    if (!(c.dt > 0.0) || !std::isfinite(c.dt)) {
        fail("dt must be > 0");
    }
    if (c.stride == 0) {
        fail("stride must be >= 1");
    }
    if (c.workers == 0) {
        fail("workers must be >= 1");
    }
    for (double J : c.couplings) {
        if (!std::isfinite(J)) {
            fail("J must be finite");
        }
    }
    if (c.experiment != Experiment::Critical && c.couplings.empty()) {
        fail("at least one J is required");
    }
    if (c.experiment == Experiment::OA) {
        if (c.rank > kMatrixRankCap) {
            fail("K must be <= " + std::to_string(kMatrixRankCap) + " for the reduced system");
        }
        if (!(c.amplitude >= 0.0 && c.amplitude <= 1.0)) {
            fail("amplitude must lie in [0, 1]");
        }
        return;
    }
    if (c.coupling == CouplingKind::Dense) {
        fail("coupling=dense needs an explicit matrix; use lowrank or gaussian");
    }
    if (c.n == 0) {
        fail("N must be >= 1");
    }
    if (c.coupling == CouplingKind::Gaussian && c.n < 2) {
        fail("gaussian coupling needs N >= 2");
    }
    const bool ensemble = c.experiment == Experiment::Volcano || c.experiment == Experiment::Decay ||
                          c.experiment == Experiment::Phases;
    if (ensemble && c.realizations == 0) {
        fail("realizations must be >= 1");
    }
    if ((c.experiment == Experiment::Volcano || c.experiment == Experiment::Critical ||
         c.experiment == Experiment::Phases) &&
        c.recorded_steps / c.stride == 0) {
        fail("recorded_steps must be >= stride");
    }
    if (c.experiment == Experiment::Volcano && (c.bins < 2 || !(c.r_max >= 0.0))) {
        fail("bins must be >= 2 and r_max >= 0");
    }
    if (c.experiment == Experiment::Critical) {
        if (!(c.j_lo < c.j_hi)) {
            fail("j_lo must be < j_hi");
        }
        if (!(c.accuracy > 0.0) || c.batch == 0 || c.max_realizations == 0 || !(c.margin > 0.0)) {
            fail("accuracy, batch, max_realizations and margin must be positive");
        }
    }
    if (c.experiment == Experiment::Phases) {
        if (c.coupling != CouplingKind::LowRank) {
            fail("phases needs coupling=lowrank");
        }
        if (c.phase_bins < 2) {
            fail("phase_bins must be >= 2");
        }
    }
}

void to_json(json& out, const EnsembleConfig& c) {
    out = json{{"experiment", to_string(c.experiment)},
               {"coupling", to_string(c.coupling)},
               {"N", c.n},
               {"K", c.rank},
               {"J", c.couplings},
               {"dt", c.dt},
               {"transient_steps", c.transient_steps},
               {"recorded_steps", c.recorded_steps},
               {"steps", c.steps},
               {"stride", c.stride},
               {"realizations", c.realizations},
               {"init", to_string(c.init)},
               {"seed", c.seed},
               {"output", c.output},
               {"workers", c.workers},
               {"bins", c.bins},
               {"r_max", c.r_max},
               {"j_lo", c.j_lo},
               {"j_hi", c.j_hi},
               {"accuracy", c.accuracy},
               {"batch", c.batch},
               {"max_realizations", c.max_realizations},
               {"margin", c.margin},
               {"amplitude", c.amplitude},
               {"baseline", c.baseline},
               {"average", to_string(c.average)},
               {"coupling_bins", c.coupling_bins},
               {"phase_bins", c.phase_bins}};
}

namespace {

struct Binding {
    EnsembleConfig config;
    std::string coupling;
    std::string init;
    std::string average;
    std::string config_file;
    CLI::App* app = nullptr;
};

void bind(Binding& b) {
    CLI::App& s = *b.app;
    EnsembleConfig& c = b.config;
    const Experiment e = c.experiment;
    b.coupling = std::string(to_string(c.coupling));
    b.init = std::string(to_string(c.init));
    b.average = std::string(to_string(c.average));

    s.add_option("--config", b.config_file, "flat key = value file; keys are the long flag names");
    if (e != Experiment::OA) {
        s.add_option("--N", c.n, "oscillators")->capture_default_str();
        s.add_option("--coupling", b.coupling, "lowrank|gaussian")->capture_default_str();
    }
    s.add_option("--K", c.rank, "rank of the interaction vectors (even)")->capture_default_str();
    if (e == Experiment::Critical) {
        s.add_option("--j_lo", c.j_lo, "lower end of the J bracket")->capture_default_str();
        s.add_option("--j_hi", c.j_hi, "upper end of the J bracket")->capture_default_str();
        s.add_option("--accuracy", c.accuracy, "final bracket width")->capture_default_str();
        s.add_option("--batch", c.batch, "realizations per batch (also the minimum per J)")->capture_default_str();
        s.add_option("--max_realizations,--max-sims", c.max_realizations, "cap per J")->capture_default_str();
        s.add_option("--margin", c.margin, "decision margin in standard errors")->capture_default_str();
    } else {
        s.add_option("--J", c.couplings, "coupling strength(s)")->capture_default_str()->expected(1, -1);
    }
    s.add_option("--dt", c.dt, "RK4 step")->capture_default_str();
    if (e == Experiment::OA || e == Experiment::Decay) {
        s.add_option("--steps", c.steps, "integration steps")->capture_default_str();
    } else {
        s.add_option("--transient_steps", c.transient_steps, "discarded steps")->capture_default_str();
        s.add_option("--recorded_steps", c.recorded_steps, "recorded steps")->capture_default_str();
    }
    s.add_option("--stride", c.stride, "record every n-th step")->capture_default_str();
    if (e == Experiment::Volcano || e == Experiment::Decay || e == Experiment::Phases) {
        s.add_option("--realizations", c.realizations, "realizations per J")->capture_default_str();
    }
    if (e != Experiment::OA && e != Experiment::Decay) {
        s.add_option("--init", b.init, "uniform|zero")->capture_default_str();
    }
    s.add_option("--seed", c.seed, "master seed")->capture_default_str();
    s.add_option("--output", c.output, "output directory")->capture_default_str();
    s.add_option("--workers", c.workers, "worker threads")->capture_default_str();
    switch (e) {
    case Experiment::Volcano:
        s.add_option("--bins", c.bins, "radial histogram bins")->capture_default_str();
        s.add_option("--r_max", c.r_max, "histogram range (0: J)")->capture_default_str();
        break;
    case Experiment::OA:
        s.add_option("--amplitude", c.amplitude, "largest initial |a(u)|")->capture_default_str();
        break;
    case Experiment::Decay:
        s.add_flag("--baseline", c.baseline, "also run the J = 0 ensemble");
        s.add_option("--average", b.average, "mean_abs|abs_mean")->capture_default_str();
        break;
    case Experiment::Phases:
        s.add_option("--coupling_bins", c.coupling_bins, "coupling slices (0: K + 1)")->capture_default_str();
        s.add_option("--phase_bins", c.phase_bins, "phase-difference bins")->capture_default_str();
        break;
    default:
        break;
    }
}

std::string describe(Experiment e) {
    switch (e) {
    case Experiment::Simulate:
        return "integrate one realization per J and write the order-parameter trajectory";
    case Experiment::Volcano:
        return "radial field histograms and moment classification per J";
    case Experiment::Critical:
        return "bisection for the finite-N critical coupling";
    case Experiment::OA:
        return "reduced-system spectrum, Jacobian, and trajectories";
    case Experiment::Decay:
        return "order-parameter decay from the in-phase state";
    case Experiment::Phases:
        return "phase-difference density against coupling strength";
    }
    return {};
}

} // namespace

ParseResult parse_config(const std::vector<std::string>& args) {
    CLI::App app{"Randomly coupled phase-oscillator toolkit", "volcano"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(toolkit_version()));
    app.allow_config_extras(CLI::config_extras_mode::error);
    std::vector<Binding> bindings;
    bindings.reserve(kExperiments.size());
    for (const auto& [e, name] : kExperiments) {
        Binding& b = bindings.emplace_back();
        b.config = default_config(e);
        b.app = app.add_subcommand(std::string(name), describe(e));
        bind(b);
    }
    ParseResult result;
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    Binding* chosen = nullptr;
    try {
        app.parse(reversed);
        for (Binding& b : bindings) {
            if (b.app->parsed()) {
                chosen = &b;
            }
        }
        if (!chosen->config_file.empty()) {
            std::ifstream in(chosen->config_file);
            if (!in) {
                throw ConfigError("cannot read config file '" + chosen->config_file + "'");
            }
            std::stringstream doc;
            doc << '[' << chosen->app->get_name() << "]\n" << in.rdbuf();
            try {
                app.parse_from_stream(doc);
            } catch (const CLI::ConfigError& err) {
                std::string what = err.what();
                const std::string marker = "was not able to parse ";
                const std::string prefix = chosen->app->get_name() + ".";
                if (const auto pos = what.find(marker); pos != std::string::npos) {
                    std::string key = what.substr(pos + marker.size());
                    if (key.starts_with(prefix)) {
                        key = key.substr(prefix.size());
                    }
                    what = "unknown key '" + key + "'";
                }
                throw ConfigError("config file '" + chosen->config_file + "': " + what);
            }
        }
    } catch (const CLI::CallForHelp&) {
        result.exit = true;
        result.message = app.help();
        return result;
    } catch (const CLI::CallForAllHelp&) {
        result.exit = true;
        result.message = app.help("", CLI::AppFormatMode::All);
        return result;
    } catch (const CLI::CallForVersion&) {
        result.exit = true;
        result.message = std::string(toolkit_version()) + "\n";
        return result;
    } catch (const CLI::ParseError& err) {
        throw ConfigError(err.what());
    }
    EnsembleConfig c = chosen->config;
    try {
        c.coupling = parse_coupling_kind(chosen->coupling);
        c.init = parse_initial_condition(chosen->init);
        c.average = parse_decay_average(chosen->average);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(err.what());
    }
    if (c.experiment == Experiment::Decay) {
        c.init = InitialCondition::AllZero;
    }
    validate(c);
    result.config = c;
    return result;
}

void to_json(json& out, const RunManifest& m) {
    json files = json::array();
    for (const auto& f : m.outputs) {
        files.push_back({{"file", f.name}, {"bytes", f.bytes}, {"sha256", f.sha256}});
    }
    out = json{{"toolkit", "volcano"},
               {"version", m.version},
               {"status", m.ok ? "ok" : "failed"},
               {"config", m.config},
               {"timing", {{"wall_seconds", m.wall_seconds}}},
               {"seeds", m.seeds},
               {"outputs", files}};
    if (!m.ok) {
        out["error"] = m.error;
    }
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::system_error(errno, std::generic_category(), "cannot read " + path.string());
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 unavailable");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class OutputDir {
public:
    OutputDir(const std::string& dir, RunManifest& manifest) : dir_(dir), manifest_(manifest) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw std::system_error(ec, "cannot create output directory " + dir_.string());
        }
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const fs::path path = dir_ / name;
        {
            std::ofstream out(path, std::ios::binary);
            if (!out) {
                throw std::system_error(errno, std::generic_category(), "cannot open " + path.string());
            }
            body(out);
            out.flush();
            if (!out) {
                throw std::system_error(errno, std::generic_category(), "write failed for " + path.string());
            }
        }
        manifest_.outputs.push_back({name, fs::file_size(path), sha256_file(path)});
    }

    void write_json(const std::string& name, const json& doc) {
        write(name, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
    }

    const fs::path& path() const noexcept { return dir_; }

private:
    fs::path dir_;
    RunManifest& manifest_;
};

std::string tag(double J) { return "J" + format_double(J); }

FieldProtocol protocol_of(const EnsembleConfig& c) {
    FieldProtocol p;
    p.kind = c.coupling;
    p.n = c.n;
    p.rank = c.rank;
    p.dt = c.dt;
    p.transient_steps = c.transient_steps;
    p.recorded_steps = c.recorded_steps;
    p.stride = c.stride;
    p.init = c.init;
    p.master_seed = c.seed;
    return p;
}

void seed_range(RunManifest& m, std::uint64_t master, std::size_t count) {
    for (std::size_t i = m.seeds.size(); i < count; ++i) {
        m.seeds.push_back(realization_seed(master, i));
    }
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"stderr", e.std_error}}; }

void run_simulate(const EnsembleConfig& c, OutputDir& out, RunManifest& m) {
    json summary = json::array();
    for (double J : c.couplings) {
        TrajectoryConfig tc;
        tc.system = realization_spec(protocol_of(c), J, 0);
        tc.dt = c.dt;
        tc.transient_steps = c.transient_steps;
        tc.recorded_steps = c.recorded_steps;
        tc.stride = c.stride;
        tc.record_fields = true;
        const TrajectoryRecord rec = integrate(tc);
        out.write("trajectory_" + tag(J) + ".csv", [&](std::ostream& os) { write_csv(os, rec); });
        double mean_abs = 0.0;
        for (const auto& z : rec.order) {
            mean_abs += std::abs(z);
        }
        mean_abs /= static_cast<double>(rec.order.size());
        MomentAccumulator acc;
        for (const auto& r : rec.field_magnitudes) {
            acc.add(r);
        }
        json entry{{"J", J},
                   {"system", tc.system},
                   {"final_abs_Z", std::abs(rec.order.back())},
                   {"mean_abs_Z", mean_abs}};
        if (acc.count() >= 2) {
            entry["moment_product"] = estimate_json(moment_product(acc));
        }
        summary.push_back(entry);
    }
    seed_range(m, c.seed, 1);
    out.write_json("simulate.json", {{"runs", summary}});
}

void run_volcano(const EnsembleConfig& c, OutputDir& out, RunManifest& m) {
    json summary = json::array();
    const FieldProtocol p = protocol_of(c);
    for (double J : c.couplings) {
        const double r_max = c.r_max > 0.0 ? c.r_max : std::max(std::abs(J), 1e-3);
        const VolcanoEnsemble ens = volcano_ensemble(p, J, c.realizations, c.workers, c.bins, r_max);
        const auto edges = ens.histogram.edges();
        const auto centers = ens.histogram.centers();
        const auto density = ens.histogram.density();
        const auto areal = ens.histogram.areal_density();
        out.write("radial_" + tag(J) + ".csv", [&](std::ostream& os) {
            CsvWriter csv(os, {"r_lo", "r_hi", "r", "density", "areal_density", "count"});
            for (std::size_t i = 0; i < centers.size(); ++i) {
                csv.row({edges[i], edges[i + 1], centers[i], density[i], areal[i],
                         static_cast<double>(ens.histogram.counts()[i])});
            }
        });
        const Estimate per_run = ens.products.estimate();
        const Classification cls = classify_volcano(per_run, c.margin);
        const std::size_t mode = ens.histogram.areal_mode();
        summary.push_back({{"J", J},
                           {"realizations", c.realizations},
                           {"product", estimate_json(per_run)},
                           {"threshold", volcano_threshold()},
                           {"side", to_string(cls.side)},
                           {"z", finite_or_null(cls.z)},
                           {"gamma", gamma_from_moment_product(per_run.value)},
                           {"areal_mode_r", centers[mode]},
                           {"mode_at_origin", mode == 0},
                           {"overflow_fraction", static_cast<double>(ens.histogram.overflow()) /
                                                     static_cast<double>(ens.histogram.total())}});
    }
    seed_range(m, c.seed, c.realizations);
    out.write_json("volcano.json", {{"runs", summary}});
}

json decision_json(const DecisionRecord& d) {
    return {{"J", d.coupling},
            {"realizations", d.realizations},
            {"product", d.product},
            {"stderr", d.std_error},
            {"decision", to_string(d.decision)}};
}

void run_critical(const EnsembleConfig& c, OutputDir& out, RunManifest& m) {
    BisectionConfig bc;
    bc.j_lo = c.j_lo;
    bc.j_hi = c.j_hi;
    bc.accuracy = c.accuracy;
    bc.batch = c.batch;
    bc.min_realizations = c.batch;
    bc.max_realizations = c.max_realizations;
    bc.margin = c.margin;
    const ProductBatch batch = field_product_batch(protocol_of(c), c.workers);
    std::uint64_t used = 0;
    auto write_log = [&](const std::vector<DecisionRecord>& log) {
        out.write("decisions.csv", [&](std::ostream& os) {
            os << "J,realizations,product,stderr,decision\n";
            for (const auto& d : log) {
                os << format_double(d.coupling) << ',' << d.realizations << ',' << format_double(d.product) << ','
                   << format_double(d.std_error) << ',' << to_string(d.decision) << '\n';
            }
        });
    };
    CriticalEstimate est;
    try {
        est = estimate_jc(bc, batch);
    } catch (const InvalidBracket& err) {
        write_log({err.lo, err.hi});
        seed_range(m, c.seed, std::max(err.lo.realizations, err.hi.realizations));
        throw;
    }
    json log = json::array();
    for (const auto& d : est.log) {
        log.push_back(decision_json(d));
        used = std::max(used, d.realizations);
    }
    write_log(est.log);
    seed_range(m, c.seed, used);
    out.write_json("critical.json", {{"N", c.n},
                                     {"K", c.rank},
                                     {"J_c", est.j_c},
                                     {"lo", est.lo},
                                     {"hi", est.hi},
                                     {"uncertainty", est.uncertainty()},
                                     {"statistical_uncertainty", finite_or_null(statistical_uncertainty(est))},
                                     {"threshold", volcano_threshold()},
                                     {"log", log}});
}

void run_oa(const EnsembleConfig& c, OutputDir& out, RunManifest& m) {
    const SpectrumReport spec = spectrum_checked(c.rank);
    json groups = json::array();
    for (const auto& g : spec.groups) {
        groups.push_back({{"value", g.value}, {"multiplicity", g.multiplicity}});
    }
    json runs = json::array();
    const std::uint64_t seed = realization_seed(c.seed, 0);
    seed_range(m, c.seed, 1);
    Rng rng(stream_seed(seed, Stream::Phases));
    OAState init = oa_zero_state(c.rank);
    for (auto& a : init.amplitudes) {
        a = std::polar(c.amplitude * rng.uniform(), 2.0 * std::numbers::pi * rng.uniform());
    }
    for (double J : c.couplings) {
        const JacobianReport jac = jacobian_at_origin(J, c.rank);
        const OATrajectory traj = oa_integrate(init, J, c.dt, c.steps, c.stride);
        out.write("oa_trajectory_" + tag(J) + ".csv", [&](std::ostream& os) {
            CsvWriter csv(os, {"t", "Z_re", "Z_im", "max_abs_a", "mean_abs_a"});
            for (std::size_t i = 0; i < traj.times.size(); ++i) {
                double mx = 0.0, mean = 0.0;
                for (const auto& a : traj.states[i].amplitudes) {
                    mx = std::max(mx, std::abs(a));
                    mean += std::abs(a);
                }
                mean /= static_cast<double>(traj.states[i].size());
                csv.row({traj.times[i], traj.order[i].real(), traj.order[i].imag(), mx, mean});
            }
        });
        json final_state = json::array();
        for (const auto& a : traj.states.back().amplitudes) {
            final_state.push_back({a.real(), a.imag()});
        }
        runs.push_back({{"J", J},
                        {"leading_eigenvalue_analytic", jac.leading_analytic},
                        {"leading_eigenvalue_numeric", jac.leading_numeric},
                        {"final_amplitudes", final_state}});
    }
    out.write_json("oa.json", {{"K", c.rank},
                               {"spectrum", groups},
                               {"eigenvector_residual", spec.eigenvector_residual},
                               {"numeric_residual", spec.numeric_residual},
                               {"critical_coupling", critical_coupling_continuum()},
                               {"critical_coupling_numeric", critical_coupling_numeric(c.rank)},
                               {"runs", runs}});
}

json fit_json(const DecayCurve& curve) {
    const double floor = curve_noise_floor(curve);
    const FitWindow w = auto_window(curve, floor);
    json out{{"noise_floor", floor}, {"window", {w.t_lo, w.t_hi}}};
    try {
        const DecayFit f = fit_decay(curve, w, floor);
        auto line = [](const LineFit& l) {
            return json{{"slope", l.slope}, {"intercept", l.intercept}, {"rss", l.rss}, {"r_squared", l.r_squared}};
        };
        out["model"] = to_string(f.model);
        out["rate"] = f.rate();
        out["exponent"] = f.exponent();
        out["points"] = f.points;
        out["score"] = f.score;
        out["exponential"] = line(f.exponential);
        out["power_law"] = line(f.power_law);
    } catch (const DecayFitError& err) {
        out["model"] = nullptr;
        out["fit_error"] = err.what();
    }
    return out;
}

void run_decay(const EnsembleConfig& c, OutputDir& out, RunManifest& m) {
    DecayConfig dc;
    dc.kind = c.coupling;
    dc.n = c.n;
    dc.rank = c.rank;
    dc.dt = c.dt;
    dc.steps = c.steps;
    dc.stride = c.stride;
    dc.realizations = c.realizations;
    dc.master_seed = c.seed;
    dc.workers = c.workers;
    dc.average = c.average;
    json runs = json::array();
    for (double J : c.couplings) {
        dc.scale = J;
        const DecayCurve curve = decay_experiment(dc);
        out.write("decay_" + tag(J) + ".csv", [&](std::ostream& os) { write_csv(os, curve); });
        runs.push_back({{"J", J}, {"fit", fit_json(curve)}});
    }
    json doc{{"N", c.n}, {"K", c.rank}, {"realizations", c.realizations}, {"runs", runs}};
    if (c.baseline) {
        const DecayCurve base = decay_baseline(dc);
        out.write("decay_baseline.csv", [&](std::ostream& os) { write_csv(os, base); });
        doc["baseline"] = fit_json(base);
    }
    seed_range(m, c.seed, c.realizations);
    out.write_json("decay.json", doc);
}

void run_phases(const EnsembleConfig& c, OutputDir& out, RunManifest& m) {
    const std::size_t slices = c.coupling_bins > 0 ? c.coupling_bins : static_cast<std::size_t>(c.rank) + 1;
    json runs = json::array();
    const double band = 0.3;
    const double pi = std::numbers::pi;
    for (double J : c.couplings) {
        const PhaseFieldDensity d =
            phase_field_ensemble(protocol_of(c), J, c.realizations, c.workers, slices, c.phase_bins);
        out.write("phasemap_" + tag(J) + ".csv", [&](std::ostream& os) {
            CsvWriter csv(os, {"coupling", "delta", "density"});
            for (std::size_t s = 0; s < d.coupling_bins(); ++s) {
                for (std::size_t b = 0; b < d.phase_bins(); ++b) {
                    csv.row({d.coupling_center(s), d.phase_center(b), d.density(s, b)});
                }
            }
        });
        json table = json::array();
        for (std::size_t s = 0; s < d.coupling_bins(); ++s) {
            if (d.slice_weight(s) <= 0.0) {
                continue;
            }
            table.push_back({{"coupling", d.coupling_center(s)},
                             {"weight", d.slice_weight(s)},
                             {"uniformity_p", d.uniformity_pvalue(s)},
                             {"mass_near_0", d.slice_mass(s, -band, band)},
                             {"mass_near_pi", d.slice_mass(s, pi - band, pi) + d.slice_mass(s, -pi, -pi + band)}});
        }
        runs.push_back({{"J", J}, {"snapshots", d.snapshots()}, {"slices", table}});
    }
    seed_range(m, c.seed, c.realizations);
    out.write_json("phases.json", {{"N", c.n}, {"K", c.rank}, {"band_halfwidth", band}, {"runs", runs}});
}

} // namespace

RunManifest run(const EnsembleConfig& config) {
    validate(config);
    RunManifest m;
    to_json(m.config, config);
    m.version = std::string(toolkit_version());
    const auto start = std::chrono::steady_clock::now();
    OutputDir out(config.output, m);
    auto finish = [&] {
        m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream mf(out.path() / "manifest.json");
        mf << json(m).dump(2) << '\n';
        if (!mf) {
            throw std::system_error(errno, std::generic_category(), "cannot write manifest.json");
        }
    };
    try {
        switch (config.experiment) {
        case Experiment::Simulate:
            run_simulate(config, out, m);
            break;
        case Experiment::Volcano:
            run_volcano(config, out, m);
            break;
        case Experiment::Critical:
            run_critical(config, out, m);
            break;
        case Experiment::OA:
            run_oa(config, out, m);
            break;
        case Experiment::Decay:
            run_decay(config, out, m);
            break;
        case Experiment::Phases:
            run_phases(config, out, m);
            break;
        }
    } catch (const std::exception& err) {
        m.ok = false;
        m.error = err.what();
        try {
            finish();
        } catch (...) {
        }
        throw;
    }
    finish();
    return m;
}

int main_entry(const std::vector<std::string>& args) {
    ParseResult parsed;
    try {
        parsed = parse_config(args);
    } catch (const ConfigError& err) {
        std::cerr << "volcano: configuration error: " << err.what() << '\n';
        return static_cast<int>(ExitCode::Usage);
    }
    if (parsed.exit) {
        std::cout << parsed.message;
        return parsed.exit_code;
    }
    try {
        const RunManifest m = run(parsed.config);
        std::cout << "wrote " << m.outputs.size() << " files to " << parsed.config.output << '\n';
        return static_cast<int>(ExitCode::Ok);
    } catch (const ConfigError& err) {
        std::cerr << "volcano: configuration error: " << err.what() << '\n';
        return static_cast<int>(ExitCode::Usage);
    } catch (const std::system_error& err) {
        std::cerr << "volcano: i/o error: " << err.what() << '\n';
        return static_cast<int>(ExitCode::Io);
    } catch (const InvalidBracket& err) {
        std::cerr << "volcano: numerical error: " << err.what() << '\n';
        return static_cast<int>(ExitCode::Numerical);
    } catch (const OADivergence& err) {
        std::cerr << "volcano: numerical error: " << err.what() << '\n';
        return static_cast<int>(ExitCode::Numerical);
    } catch (const std::invalid_argument& err) {
        std::cerr << "volcano: configuration error: " << err.what() << '\n';
        return static_cast<int>(ExitCode::Usage);
    } catch (const std::exception& err) {
        std::cerr << "volcano: internal error: " << err.what() << '\n';
        return static_cast<int>(ExitCode::Internal);
    }
}

} // namespace volcano
