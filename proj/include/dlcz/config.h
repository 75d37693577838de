#ifndef DLCZ_CONFIG_H_
#define DLCZ_CONFIG_H_

// Run configuration: a flat "key = value" text format whose keys can also
// be given as command-line flags (--model.alpha 0.05). '#' starts a comment.
//
// model.preset is applied first wherever it appears; every other key is
// applied in file order, then command-line overrides in argument order.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlcz/analysis.h"
#include "dlcz/event_io.h"
#include "dlcz/simkernel.h"
#include "dlcz/tia.h"

namespace dlcz {

/// Invalid configuration. The message carries "<source>:<line>: " when the
/// problem is tied to a config line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { kFringeScan, kBasisCorrelation, kDelayScan, kRates, kSimulate, kAnalyze };

const char* experiment_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment(std::string_view name);

struct ExperimentParams {
  std::optional<ExperimentKind> kind;
  std::uint64_t trials = 250000;  // per analyzer-setting run
  std::vector<double> theta_grid_deg = {0, 15, 30, 45, 60, 75, 90, 105, 120, 135, 150, 165};
  double idler_theta_deg = 0.0;
  std::vector<std::int64_t> delta_t_list_ns = {100, 200};
  std::optional<CoincidenceWindow> window;                     // overrides the standard window
  std::map<std::int64_t, CoincidenceWindow> delay_windows;     // per-delta_t windows
  std::filesystem::path input;
  EventFormat event_format = EventFormat::kCsv;
  CoherenceSplit split = CoherenceSplit::kConservative;
  ErrorMethod error_method = ErrorMethod::kLinearized;
  int bootstrap_resamples = 1000;
  unsigned threads = 1;
  int bin_ns = 2;
};

struct RunConfig {
  ImperfectionModel model;
  PulseSchedule schedule;
  ExperimentParams experiment;
  std::uint64_t master_seed = 1;
  std::filesystem::path out_dir = ".";
};

/// Named, fitted parameter sets:
///   noiseless  ideal correlations, unit efficiencies, no decay
///   fit-dt100  V_p = 0.80 with V_c and gaussian tau fitted so the pipeline
///              gives F_si(150 ns) = 1/2 and F_si = 0.66 over the 100 ns
///              coincidence window; unit efficiencies
///   fit-dt200  fitted to F_0 = 0.79 and F_si = 0.63 over the 200 ns window
///   lab        fit-dt100 correlations with the measured efficiencies
///              alpha = 0.05, beta = 0.04, xi = 0.03, n_s = 0.014
ImperfectionModel preset_model(std::string_view name);
std::vector<std::string> preset_names();

inline constexpr double kDefaultTauNs = 145.845;
inline constexpr double kDefaultVCoh = 0.64;
inline constexpr double kDt200TauNs = 268.0;

/// Known keys, in documentation order.
const std::vector<std::string>& config_keys();

struct ConfigEntry {
  std::string key;
  std::string value;
  std::string where;  // "file:line" or "--flag"
};

/// Splits config text into entries; throws ConfigError on syntax errors or
/// duplicate keys.
std::vector<ConfigEntry> parse_config_entries(std::string_view text, const std::string& source);
std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path);

/// Applies entries on top of the defaults (preset first). Throws ConfigError.
RunConfig build_config(const std::vector<ConfigEntry>& entries);

/// Parses one key into the config; throws ConfigError naming `where`.
void apply_entry(RunConfig& config, const ConfigEntry& entry);

/// Cross-field checks; physics violations surface as PhysicsError.
void validate_config(const RunConfig& config, ExperimentKind kind);

/// Coincidence window for a delay: explicit per-delay window, then the
/// global override, then the standard table. Throws ConfigError if none.
CoincidenceWindow window_for(const RunConfig& config, std::int64_t delta_t_ns);

}  // namespace dlcz

#endif  // DLCZ_CONFIG_H_
