#include "volcano/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include <doctest.h>

using namespace volcano;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("volcano_cli_" + name);
    fs::remove_all(p);
    return p;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p;
}

std::string error_of(const std::vector<std::string>& args) {
    try {
        parse_config(args);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::map<std::string, std::string> checksums(const RunManifest& m) {
    std::map<std::string, std::string> out;
    for (const auto& f : m.outputs) out[f.name] = f.sha256;
    return out;
}

} // namespace

TEST_CASE("defaults") {
    const auto c = parse_config({"critical"}).config;
    CHECK(c.experiment == Experiment::Critical);
    CHECK(c.rank == 2);
    CHECK(c.dt == 0.01);
    CHECK(c.transient_steps == 1000);
    CHECK(c.recorded_steps == 2000);
    CHECK(c.init == InitialCondition::AllZero);
    const auto d = parse_config({"decay"}).config;
    CHECK(d.n == 5000);
    CHECK(d.couplings == std::vector<double>{10.0});
    CHECK(d.steps == 1000);
    CHECK(parse_config({"volcano"}).config.couplings == std::vector<double>{1.5, 2.0, 2.5});
    CHECK(parse_config({"simulate", "--J", "1", "2"}).config.couplings == std::vector<double>{1.0, 2.0});
}

TEST_CASE("invalid values are rejected with a reason") {
    CHECK(error_of({"critical", "--K", "3"}).find("K must be even") != std::string::npos);
    CHECK(error_of({"volcano", "--N", "0"}).find("N must be") != std::string::npos);
    CHECK_FALSE(error_of({"simulate", "--dt", "0"}).empty());
    CHECK_FALSE(error_of({"simulate", "--init", "sideways"}).empty());
    CHECK_FALSE(error_of({"simulate", "--bogus", "1"}).empty());
    CHECK_FALSE(error_of({}).empty());
    CHECK_FALSE(error_of({"critical", "--j_lo", "3", "--j_hi", "2"}).empty());
}

TEST_CASE("config files") {
    const auto file = write_file("volcano_cli_cfg.ini", "J = 1\nN = 64\n# comment\nseed = 12\n");
    const auto from_file = parse_config({"simulate", "--config", file.string()}).config;
    CHECK(from_file.couplings == std::vector<double>{1.0});
    CHECK(from_file.n == 64);
    CHECK(from_file.seed == 12);
    const auto flag_wins = parse_config({"simulate", "--config", file.string(), "--J", "3"}).config;
    CHECK(flag_wins.couplings == std::vector<double>{3.0});
    CHECK(flag_wins.n == 64);

    const auto bad = write_file("volcano_cli_bad.ini", "N = 64\nbogus = 2\n");
    CHECK(error_of({"simulate", "--config", bad.string()}).find("unknown key 'bogus'") != std::string::npos);
    CHECK(error_of({"simulate", "--config", "/nonexistent/volcano.ini"}).find("cannot read") != std::string::npos);

    const auto alias = write_file("volcano_cli_alias.ini", "max_realizations = 300\n");
    CHECK(parse_config({"critical", "--config", alias.string()}).config.max_realizations == 300);
    CHECK(parse_config({"critical", "--max-sims", "400"}).config.max_realizations == 400);
}

TEST_CASE("help and version") {
    const auto h = parse_config({"volcano", "--help"});
    CHECK(h.exit);
    CHECK(h.exit_code == 0);
    CHECK(h.message.find("--realizations") != std::string::npos);
    const auto v = parse_config({"--version"});
    CHECK(v.exit);
    CHECK(v.message.find(toolkit_version()) != std::string::npos);
    CHECK(main_entry({"oa", "--help"}) == 0);
}

TEST_CASE("runs are reproducible and schedule independent") {
    const auto args = [](const fs::path& out, const std::string& workers) {
        return std::vector<std::string>{"volcano", "--N", "60", "--K", "2", "--J", "1", "3", "--realizations", "6",
                                        "--transient_steps", "50", "--recorded_steps", "50", "--bins", "10",
                                        "--workers", workers, "--output", out.string()};
    };
    const fs::path dir = scratch("a");
    const auto a = run(parse_config(args(dir, "1")).config);
    const auto b = run(parse_config(args(scratch("b"), "1")).config);
    const auto c = run(parse_config(args(scratch("c"), "4")).config);
    CHECK(a.ok);
    CHECK(checksums(a).size() == 3);
    CHECK(checksums(a) == checksums(b));
    CHECK(checksums(a) == checksums(c));
    CHECK(a.seeds.size() == 6);
    CHECK(sha256_file(dir / "volcano.json") == checksums(a)["volcano.json"]);

    std::ifstream in(dir / "manifest.json");
    const auto manifest = nlohmann::json::parse(in);
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["config"]["N"] == 60);
    CHECK(manifest["outputs"].size() == 3);
}

TEST_CASE("exit codes") {
    CHECK(main_entry({"critical", "--K", "3"}) == static_cast<int>(ExitCode::Usage));
    CHECK(main_entry({"nonsense"}) == static_cast<int>(ExitCode::Usage));

    const auto blocker = write_file("volcano_cli_blocker", "not a directory");
    CHECK(main_entry({"oa", "--steps", "10", "--output", (blocker / "sub").string()}) ==
          static_cast<int>(ExitCode::Io));

    // Both ends land on the same side, so the bisection cannot start.
    const auto out = scratch("bracket");
    CHECK(main_entry({"critical", "--N", "40", "--j_lo", "0.1", "--j_hi", "0.2", "--batch", "5",
                      "--max_realizations", "5", "--transient_steps", "20", "--recorded_steps", "20", "--output",
                      out.string()}) == static_cast<int>(ExitCode::Numerical));
    std::ifstream in(out / "manifest.json");
    const auto manifest = nlohmann::json::parse(in);
    CHECK(manifest["status"] == "failed");
    CHECK(manifest["error"].get<std::string>().find("invalid bracket") != std::string::npos);
    CHECK(fs::exists(out / "decisions.csv"));

    CHECK(main_entry({"oa", "--K", "2", "--J", "2.5", "--steps", "20", "--output", scratch("oa").string()}) ==
          static_cast<int>(ExitCode::Ok));
}
