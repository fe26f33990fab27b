#pragma once

#include "volcano/decay.hpp"
#include "volcano/model.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace volcano {

enum class Experiment { Simulate, Volcano, Critical, OA, Decay, Phases };

std::string_view to_string(Experiment experiment);
Experiment parse_experiment(std::string_view text);

struct EnsembleConfig {
    Experiment experiment = Experiment::Simulate;
    CouplingKind coupling = CouplingKind::LowRank;
    std::size_t n = 250;
    int rank = 4;
    std::vector<double> couplings{2.0};
    double dt = 0.01;
    std::size_t transient_steps = 1000;
    std::size_t recorded_steps = 2000;
    std::size_t steps = 1000;  // oa and decay
    std::size_t stride = 1;
    std::size_t realizations = 1;
    InitialCondition init = InitialCondition::UniformRandom;
    std::uint64_t seed = 0;
    std::string output = "out";
    unsigned workers = 1;

    // volcano
    std::size_t bins = 50;
    double r_max = 0.0;  // 0: use J

    // critical
    double j_lo = 0.5;
    double j_hi = 6.0;
    double accuracy = 0.02;
    std::size_t batch = 100;
    std::size_t max_realizations = 100000;
    double margin = 1.5;

    // oa
    double amplitude = 0.01;

    // decay
    bool baseline = false;
    DecayAverage average = DecayAverage::MeanAbs;

    // phases
    std::size_t coupling_bins = 0;  // 0: K + 1, one slice per coupling value
    std::size_t phase_bins = 32;
};

/// Defaults for one experiment, taken from the reference protocols.
EnsembleConfig default_config(Experiment experiment);

/// Throws ConfigError with an actionable message.
void validate(const EnsembleConfig& config);

void to_json(nlohmann::json& out, const EnsembleConfig& config);

/// Usage, unknown key, or invariant violation.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Result of command-line parsing: either a config or a request to exit (help, version).
struct ParseResult {
    EnsembleConfig config;
    bool exit = false;
    int exit_code = 0;
    std::string message;
};

/// Subcommand with flags. `--config FILE` reads flat key = value lines whose keys are
/// the long flag names; flags given on the command line win.
ParseResult parse_config(const std::vector<std::string>& args);

enum class ExitCode : int {
    Ok = 0,
    Internal = 1,
    Usage = 2,
    Io = 3,
    Numerical = 4,
};

struct OutputFile {
    std::string name;
    std::uintmax_t bytes = 0;
    std::string sha256;
};

struct RunManifest {
    nlohmann::json config;
    std::string version;
    double wall_seconds = 0.0;
    std::vector<std::uint64_t> seeds;
    std::vector<OutputFile> outputs;
    bool ok = true;
    std::string error;
};

void to_json(nlohmann::json& out, const RunManifest& manifest);

std::string sha256_file(const std::filesystem::path& path);

/// Runs the experiment and writes its files plus manifest.json into config.output.
/// On failure the manifest lists what was written and the exception is rethrown.
RunManifest run(const EnsembleConfig& config);

/// Full entry point: parse, run, report. Returns the process exit code.
int main_entry(const std::vector<std::string>& args);

std::string_view toolkit_version() noexcept;

} // namespace volcano
