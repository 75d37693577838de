#ifndef DLCZ_RUNNERS_H_
#define DLCZ_RUNNERS_H_

// Experiment runners behind the command-line front-end. Each runner returns
// typed results plus a Report: a JSON summary and the CSV/event files to
// write. Output bytes depend only on the configuration and master seed.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlcz/analysis.h"
#include "dlcz/config.h"
#include "dlcz/event_io.h"

namespace dlcz {

inline constexpr int kSchemaVersion = 1;

struct OutputFile {
  std::string name;
  std::string contents;
};

struct Report {
  std::string name;                // summary is written as <name>.json
  nlohmann::ordered_json summary;  // always carries "schema" and "schema_version"
  std::vector<OutputFile> files;
  std::vector<std::string> warnings;
};

/// Writes the summary and every file into `dir`, creating it if needed.
void write_report(const Report& report, const std::filesystem::path& dir);

/// Number formatting used in every CSV: "%.10g", empty for NaN.
std::string csv_number(double v);

struct FringePoint {
  double theta_s;  // rad
  std::uint64_t pass;  // idler transmitted (D2)
  std::uint64_t fail;  // idler reflected (D3)
  double p_pass;       // NaN without coincidences
  double sigma;
  double p_born;       // window-averaged Born value
};

struct FringeScanResult {
  double theta_i;  // rad
  std::vector<FringePoint> points;
  std::optional<FringeFit> fit;
  Report report;
};

/// Sweeps theta_s over the grid with the idler analyzer fixed at
/// experiment.idler_theta_deg, phi_s = -phase.
FringeScanResult run_fringe_scan(const RunConfig& config);

struct BasisCorrelationResult {
  BasisRuns runs;
  CorrelationTable rectilinear;
  CorrelationTable diagonal;
  std::optional<double> f0;
  std::optional<double> f45;
  std::optional<FidelityEstimate> f_si;
  std::optional<Reconstruction> reconstruction;
  Report report;
};

/// Four runs (rectilinear H/V, diagonal +/-) at maximum-correlation settings.
BasisCorrelationResult run_basis_correlation(const RunConfig& config);

struct DelaySeries {
  std::int64_t delta_t_ns;
  CoincidenceWindow window;
  std::vector<BinnedFidelity> bins;
  std::vector<double> model;  // analytic fidelity per bin
  std::vector<double> mean_delay;
  std::vector<std::uint64_t> coincidences;
  bool monotone_non_increasing;  // over the bins that have a value
};

struct DelayScanResult {
  std::vector<DelaySeries> series;
  Report report;
};

DelayScanResult run_delay_scan(const RunConfig& config);

struct RatesResult {
  RateReport analytic;
  Report report;
};

RatesResult run_rates(const RunConfig& config);

/// Event-file labels of the four basis runs, in run order.
inline constexpr std::array<const char*, 4> kRunLabels = {"b0_h", "b0_v", "b45_p", "b45_m"};

struct SimulateResult {
  std::array<std::vector<ClickRecord>, 4> events;
  Report report;
};

/// Raw event streams of the four basis runs, written as events_<label>.csv
/// or .bin.
SimulateResult run_simulate(const RunConfig& config);

struct AnalyzeResult {
  std::optional<BasisCorrelationResult> tables;  // directory input
  std::vector<CoincidenceEvent> coincidences;    // single-file input
  Report report;
};

/// experiment.input is either a directory produced by simulate (full
/// table/fidelity report) or a single event file (coincidences and delay
/// histogram). Throws DataFormatError on malformed files.
AnalyzeResult run_analyze(const RunConfig& config);

/// Runs `kind` and writes its report into config.out_dir.
Report run_experiment_kind(ExperimentKind kind, const RunConfig& config);

}  // namespace dlcz

#endif  // DLCZ_RUNNERS_H_
