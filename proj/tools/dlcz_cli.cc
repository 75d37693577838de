// dlcz: batch front-end for the memory-node simulator.
//
//   dlcz <experiment> [--config FILE] [--seed N] [--out DIR] [--model.alpha 0.05 ...]
//
// Exit codes: 0 success, 2 configuration error, 3 malformed input data,
// 4 physically invalid parameters.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dlcz/config.h"
#include "dlcz/event_io.h"
#include "dlcz/qstate.h"
#include "dlcz/runners.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitPhysics = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heralded memory-node simulator and analysis pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::map<std::string, std::string> overrides;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  for (const auto& key : dlcz::config_keys()) {
    if (key == "seed" || key == "output.dir") continue;
    app.add_option_function<std::string>(
        "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
        "override " + key);
  }

  std::optional<dlcz::ExperimentKind> kind;
  for (auto k : {dlcz::ExperimentKind::kFringeScan, dlcz::ExperimentKind::kBasisCorrelation,
                 dlcz::ExperimentKind::kDelayScan, dlcz::ExperimentKind::kRates,
                 dlcz::ExperimentKind::kSimulate, dlcz::ExperimentKind::kAnalyze}) {
    auto* sub = app.add_subcommand(dlcz::experiment_name(k));
    sub->fallthrough();
    sub->callback([&kind, k] { kind = k; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    std::vector<dlcz::ConfigEntry> entries;
    if (!config_path.empty()) entries = dlcz::read_config_file(config_path);
    for (const auto& [key, value] : overrides) entries.push_back({key, value, "--" + key});
    if (seed) entries.push_back({"seed", std::to_string(*seed), "--seed"});
    if (!out_dir.empty()) entries.push_back({"output.dir", out_dir, "--out"});
    const dlcz::RunConfig config = dlcz::build_config(entries);

    const dlcz::Report report = dlcz::run_experiment_kind(*kind, config);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << (config.out_dir / (report.name + ".json")).string() << '\n';
    for (const auto& f : report.files) std::cout << "wrote " << (config.out_dir / f.name).string() << '\n';
    return 0;
  } catch (const dlcz::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const dlcz::DataFormatError& e) {
    std::cerr << "data format error: " << e.what() << '\n';
    return kExitData;
  } catch (const dlcz::PhysicsError& e) {
    std::cerr << "physics error: " << e.what() << '\n';
    return kExitPhysics;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
