// schro-gsp: invariant checks and desk-scale experiments.
//
// Exit codes: 0 ok, 1 failed assertion, 2 usage/config error, 3 numerical error.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "schro/error.hpp"
#include "schro_tools/experiments.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace schro;
using namespace schro::tools;

constexpr int kOk = 0;
constexpr int kAssertion = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::Argument:
    case ErrorCode::Format:
    case ErrorCode::Io:
      return kUsage;
    default:
      return kNumerical;
  }
}

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Config, path + ": " + e.what());
  }
}

// The seed override lands in whichever key the command uses for its seed.
void apply_seed(json& cfg, const std::string& command, std::uint64_t seed) {
  if (command == "diagnose") fail(ErrorCode::Config, "--seed has no meaning for diagnose");
  cfg["seed"] = seed;
}

ExperimentOutput dispatch(const std::string& command, const json& cfg, const std::string& config_path) {
  if (command == "verify") return run_verify(VerifyConfig::from_json(cfg));
  if (command == "clusters") return run_clusters(ClustersConfig::from_json(cfg));
  if (command == "pmo-grid") return run_pmo_grid(PmoGridConfig::from_json(cfg));
  if (command == "ring") return run_ring(RingConfig::from_json(cfg));
  if (config_path.empty()) fail(ErrorCode::Config, "diagnose needs --config");
  const fs::path base = fs::path(config_path).parent_path();
  return run_diagnose(DiagnoseConfig::from_json(cfg, base.empty() ? fs::path(".") : base));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schrodinger graph signal processing: invariant checks and toy experiments"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> filter;
  app.add_option("command", command, "verify | clusters | ring | pmo-grid | diagnose")
      ->required()
      ->check(CLI::IsMember({"verify", "clusters", "ring", "pmo-grid", "diagnose"}));
  app.add_option("--config", config_path, "JSON config file (defaults apply when omitted)");
  app.add_option("--out", out_dir, "Output directory (default: out/<command>)");
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--filter", filter, "verify only: run suites whose name contains this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    json cfg = read_config(config_path);
    if (!cfg.is_object()) fail(ErrorCode::Config, "config must be a JSON object");
    if (seed) apply_seed(cfg, command, *seed);
    if (filter) {
      if (command != "verify") fail(ErrorCode::Config, "--filter only applies to verify");
      cfg["filter"] = *filter;
    }
    const ExperimentOutput result = dispatch(command, cfg, config_path);
    const fs::path dir = out_dir.empty() ? fs::path("out") / command : fs::path(out_dir);
    result.write(dir);

    for (const auto& a : result.assertions) {
      std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.detail << "\n";
    }
    std::cout << "wrote " << dir.string() << "\n";
    return result.passed() ? kOk : kAssertion;
  } catch (const Error& e) {
    std::cerr << "schro-gsp: " << to_string(e.code()) << " error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "schro-gsp: " << e.what() << "\n";
    return kNumerical;
  }
}
