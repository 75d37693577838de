#include "dlcz/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace dlcz {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(const ConfigEntry& e, const std::string& what) {
  throw ConfigError(e.where + ": " + e.key + ": " + what);
}

double parse_double(const ConfigEntry& e, std::string_view text) {
  std::string t = trim(text);
  if (t == "inf" || t == "infinity") return kInf;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    fail(e, "expected a number, got '" + t + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const ConfigEntry& e, std::string_view text) {
  std::string t = trim(text);
  Int v{};
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    fail(e, "expected an integer, got '" + t + "'");
  }
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> parse_double_list(const ConfigEntry& e) {
  std::vector<double> out;
  for (const auto& p : split(e.value, ',')) out.push_back(parse_double(e, p));
  return out;
}

CoincidenceWindow parse_window(const ConfigEntry& e, std::string_view text) {
  auto parts = split(text, ',');
  if (parts.size() != 2) fail(e, "expected 'lo,hi'");
  CoincidenceWindow w{parse_int<std::int64_t>(e, parts[0]), parse_int<std::int64_t>(e, parts[1])};
  if (!(w.lo < w.hi)) fail(e, "window needs lo < hi");
  return w;
}

using Setter = void (*)(RunConfig&, const ConfigEntry&);

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"model.preset", [](RunConfig& c, const ConfigEntry& e) {
         try {
           c.model = preset_model(e.value);
         } catch (const std::invalid_argument& ex) {
           fail(e, ex.what());
         }
       }},
      {"model.v_pop", [](RunConfig& c, const ConfigEntry& e) { c.model.v_pop = parse_double(e, e.value); }},
      {"model.v_coh", [](RunConfig& c, const ConfigEntry& e) { c.model.v_coh = parse_double(e, e.value); }},
      {"model.background",
       [](RunConfig& c, const ConfigEntry& e) { c.model.background = parse_double(e, e.value); }},
      {"model.alpha", [](RunConfig& c, const ConfigEntry& e) { c.model.alpha = parse_double(e, e.value); }},
      {"model.beta", [](RunConfig& c, const ConfigEntry& e) { c.model.beta = parse_double(e, e.value); }},
      {"model.xi", [](RunConfig& c, const ConfigEntry& e) { c.model.xi = parse_double(e, e.value); }},
      {"model.n_s", [](RunConfig& c, const ConfigEntry& e) { c.model.n_s = parse_double(e, e.value); }},
      {"model.phase", [](RunConfig& c, const ConfigEntry& e) { c.model.phase = parse_double(e, e.value); }},
      {"model.tau_ns",
       [](RunConfig& c, const ConfigEntry& e) { c.model.decoherence.tau_ns = parse_double(e, e.value); }},
      {"model.decoherence_shape",
       [](RunConfig& c, const ConfigEntry& e) {
         if (e.value == "gaussian") {
           c.model.decoherence.shape = DecayShape::kGaussian;
         } else if (e.value == "exponential") {
           c.model.decoherence.shape = DecayShape::kExponential;
         } else {
           fail(e, "expected 'gaussian' or 'exponential'");
         }
       }},
      {"model.dark_d1", [](RunConfig& c, const ConfigEntry& e) { c.model.dark_d1 = parse_double(e, e.value); }},
      {"model.dark_d2", [](RunConfig& c, const ConfigEntry& e) { c.model.dark_d2 = parse_double(e, e.value); }},
      {"model.dark_d3", [](RunConfig& c, const ConfigEntry& e) { c.model.dark_d3 = parse_double(e, e.value); }},
      {"schedule.rep_rate_hz",
       [](RunConfig& c, const ConfigEntry& e) { c.schedule.rep_rate_hz = parse_double(e, e.value); }},
      {"schedule.write_len_ns",
       [](RunConfig& c, const ConfigEntry& e) { c.schedule.write_len_ns = parse_int<std::int64_t>(e, e.value); }},
      {"schedule.read_len_ns",
       [](RunConfig& c, const ConfigEntry& e) { c.schedule.read_len_ns = parse_int<std::int64_t>(e, e.value); }},
      {"schedule.delta_t_ns",
       [](RunConfig& c, const ConfigEntry& e) { c.schedule.delta_t_ns = parse_int<std::int64_t>(e, e.value); }},
      {"schedule.signal_gate_ns",
       [](RunConfig& c, const ConfigEntry& e) {
         c.schedule.signal_gate_ns = parse_int<std::int64_t>(e, e.value);
       }},
      {"schedule.idler_gate_ns",
       [](RunConfig& c, const ConfigEntry& e) { c.schedule.idler_gate_ns = parse_int<std::int64_t>(e, e.value); }},
      {"experiment.kind",
       [](RunConfig& c, const ConfigEntry& e) {
         auto k = parse_experiment(e.value);
         if (!k) fail(e, "unknown experiment '" + e.value + "'");
         c.experiment.kind = *k;
       }},
      {"experiment.trials",
       [](RunConfig& c, const ConfigEntry& e) {
         c.experiment.trials = parse_int<std::uint64_t>(e, e.value);
         if (c.experiment.trials == 0) fail(e, "must be positive");
       }},
      {"experiment.theta_grid_deg",
       [](RunConfig& c, const ConfigEntry& e) { c.experiment.theta_grid_deg = parse_double_list(e); }},
      {"experiment.idler_theta_deg",
       [](RunConfig& c, const ConfigEntry& e) { c.experiment.idler_theta_deg = parse_double(e, e.value); }},
      {"experiment.delta_t_list_ns",
       [](RunConfig& c, const ConfigEntry& e) {
         c.experiment.delta_t_list_ns.clear();
         for (const auto& p : split(e.value, ',')) {
           c.experiment.delta_t_list_ns.push_back(parse_int<std::int64_t>(e, p));
         }
       }},
      {"experiment.window_ns",
       [](RunConfig& c, const ConfigEntry& e) { c.experiment.window = parse_window(e, e.value); }},
      {"experiment.delay_windows_ns",
       [](RunConfig& c, const ConfigEntry& e) {
         c.experiment.delay_windows.clear();
         for (const auto& item : split(e.value, ';')) {
           auto parts = split(item, ':');
           if (parts.size() != 2) fail(e, "expected 'delta_t:lo,hi;...'");
           c.experiment.delay_windows[parse_int<std::int64_t>(e, parts[0])] = parse_window(e, parts[1]);
         }
       }},
      {"experiment.input", [](RunConfig& c, const ConfigEntry& e) { c.experiment.input = e.value; }},
      {"experiment.event_format",
       [](RunConfig& c, const ConfigEntry& e) {
         if (e.value == "csv") {
           c.experiment.event_format = EventFormat::kCsv;
         } else if (e.value == "binary") {
           c.experiment.event_format = EventFormat::kBinary;
         } else {
           fail(e, "expected 'csv' or 'binary'");
         }
       }},
      {"experiment.coherence_split",
       [](RunConfig& c, const ConfigEntry& e) {
         if (e.value == "conservative") {
           c.experiment.split = CoherenceSplit::kConservative;
         } else if (e.value == "optimistic") {
           c.experiment.split = CoherenceSplit::kOptimistic;
         } else {
           fail(e, "expected 'conservative' or 'optimistic'");
         }
       }},
      {"experiment.error_method",
       [](RunConfig& c, const ConfigEntry& e) {
         if (e.value == "linearized") {
           c.experiment.error_method = ErrorMethod::kLinearized;
         } else if (e.value == "bootstrap") {
           c.experiment.error_method = ErrorMethod::kBootstrap;
         } else {
           fail(e, "expected 'linearized' or 'bootstrap'");
         }
       }},
      {"experiment.bootstrap_resamples",
       [](RunConfig& c, const ConfigEntry& e) {
         c.experiment.bootstrap_resamples = parse_int<int>(e, e.value);
         if (c.experiment.bootstrap_resamples < 2) fail(e, "needs at least 2 resamples");
       }},
      {"experiment.threads",
       [](RunConfig& c, const ConfigEntry& e) {
         c.experiment.threads = parse_int<unsigned>(e, e.value);
         if (c.experiment.threads == 0) fail(e, "must be positive");
       }},
      {"experiment.bin_ns",
       [](RunConfig& c, const ConfigEntry& e) {
         c.experiment.bin_ns = parse_int<int>(e, e.value);
         if (c.experiment.bin_ns < 2 || c.experiment.bin_ns % 2 != 0) {
           fail(e, "must be a positive multiple of 2");
         }
       }},
      {"seed", [](RunConfig& c, const ConfigEntry& e) { c.master_seed = parse_int<std::uint64_t>(e, e.value); }},
      {"output.dir", [](RunConfig& c, const ConfigEntry& e) { c.out_dir = e.value; }},
  };
  return table;
}

ImperfectionModel fit_dt100() {
  ImperfectionModel m;
  m.v_pop = 0.80;
  m.v_coh = kDefaultVCoh;
  m.decoherence = {kDefaultTauNs, DecayShape::kGaussian};
  return m;
}

}  // namespace

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kFringeScan: return "fringe-scan";
    case ExperimentKind::kBasisCorrelation: return "basis-correlation";
    case ExperimentKind::kDelayScan: return "delay-scan";
    case ExperimentKind::kRates: return "rates";
    case ExperimentKind::kSimulate: return "simulate";
    case ExperimentKind::kAnalyze: return "analyze";
  }
  return "?";
}

std::optional<ExperimentKind> parse_experiment(std::string_view name) {
  for (auto k : {ExperimentKind::kFringeScan, ExperimentKind::kBasisCorrelation,
                 ExperimentKind::kDelayScan, ExperimentKind::kRates, ExperimentKind::kSimulate,
                 ExperimentKind::kAnalyze}) {
    if (name == experiment_name(k)) return k;
  }
  return std::nullopt;
}

ImperfectionModel preset_model(std::string_view name) {
  if (name == "noiseless") return ImperfectionModel{};
  if (name == "fit-dt100") return fit_dt100();
  if (name == "fit-dt200") {
    ImperfectionModel m;
    m.v_pop = 0.58;
    m.v_coh = 1.0;
    m.decoherence = {kDt200TauNs, DecayShape::kGaussian};
    return m;
  }
  if (name == "lab") {
    ImperfectionModel m = fit_dt100();
    m.alpha = 0.05;
    m.beta = 0.04;
    m.xi = 0.03;
    m.n_s = 0.014;
    return m;
  }
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"noiseless", "fit-dt100", "fit-dt200", "lab"};
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::vector<ConfigEntry> parse_config_entries(std::string_view text, const std::string& source) {
  std::vector<ConfigEntry> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::string content = trim(line);
    if (content.empty()) continue;

    const std::string where = source + ":" + std::to_string(line_no);
    auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(where + ": expected 'key = value'");
    }
    ConfigEntry e{trim(std::string_view(content).substr(0, eq)),
                  trim(std::string_view(content).substr(eq + 1)), where};
    if (e.key.empty()) throw ConfigError(where + ": missing key");
    if (e.value.empty()) throw ConfigError(where + ": " + e.key + ": missing value");
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), e.key) == keys.end()) {
      throw ConfigError(where + ": unknown key '" + e.key + "'");
    }
    if (!seen.insert(e.key).second) {
      throw ConfigError(where + ": duplicate key '" + e.key + "'");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_entries(buf.str(), path.string());
}

void apply_entry(RunConfig& config, const ConfigEntry& entry) {
  for (const auto& [name, setter] : setters()) {
    if (name == entry.key) {
      setter(config, entry);
      return;
    }
  }
  throw ConfigError(entry.where + ": unknown key '" + entry.key + "'");
}

RunConfig build_config(const std::vector<ConfigEntry>& entries) {
  RunConfig config;
  const ConfigEntry* preset = nullptr;
  for (const auto& e : entries) {
    if (e.key == "model.preset") preset = &e;
  }
  if (preset) apply_entry(config, *preset);
  for (const auto& e : entries) {
    if (e.key != "model.preset") apply_entry(config, e);
  }
  return config;
}

void validate_config(const RunConfig& config, ExperimentKind kind) {
  config.model.validate();
  config.schedule.validate();
  const auto& x = config.experiment;
  if (x.kind && *x.kind != kind) {
    throw ConfigError(std::string("experiment.kind is '") + experiment_name(*x.kind) +
                      "' but the command is '" + experiment_name(kind) + "'");
  }
  switch (kind) {
    case ExperimentKind::kFringeScan:
      if (x.theta_grid_deg.empty()) throw ConfigError("experiment.theta_grid_deg is empty");
      for (double t : x.theta_grid_deg) {
        if (!std::isfinite(t)) throw ConfigError("experiment.theta_grid_deg has a non-finite angle");
      }
      window_for(config, config.schedule.delta_t_ns);
      break;
    case ExperimentKind::kDelayScan:
      if (x.delta_t_list_ns.empty()) throw ConfigError("experiment.delta_t_list_ns is empty");
      for (auto dt : x.delta_t_list_ns) {
        PulseSchedule s = config.schedule;
        s.delta_t_ns = dt;
        try {
          s.validate();
        } catch (const std::exception& ex) {
          throw ConfigError("experiment.delta_t_list_ns: " + std::string(ex.what()));
        }
        window_for(config, dt);
      }
      break;
    case ExperimentKind::kBasisCorrelation:
    case ExperimentKind::kSimulate:
      window_for(config, config.schedule.delta_t_ns);
      break;
    case ExperimentKind::kAnalyze:
      if (x.input.empty()) throw ConfigError("analyze needs experiment.input");
      if (!std::filesystem::exists(x.input)) {
        throw ConfigError("experiment.input: '" + x.input.string() + "' does not exist");
      }
      window_for(config, config.schedule.delta_t_ns);
      break;
    case ExperimentKind::kRates:
      break;
  }
}

CoincidenceWindow window_for(const RunConfig& config, std::int64_t delta_t_ns) {
  const auto& x = config.experiment;
  if (auto it = x.delay_windows.find(delta_t_ns); it != x.delay_windows.end()) return it->second;
  if (x.window) return *x.window;
  if (auto w = standard_window(delta_t_ns)) return *w;
  throw ConfigError("no coincidence window for delta_t = " + std::to_string(delta_t_ns) +
                    " ns; set experiment.window_ns or experiment.delay_windows_ns");
}

}  // namespace dlcz
