#include "dlcz/runners.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dlcz/rng.h"
#include "dlcz/tia.h"

namespace dlcz {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kDeg = std::numbers::pi / 180.0;

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json header(const std::string& schema, const RunConfig& config) {
  Json j;
  j["schema"] = schema;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = config.master_seed;
  return j;
}

Json model_json(const ImperfectionModel& m) {
  Json j;
  j["v_pop"] = m.v_pop;
  j["v_coh"] = m.v_coh;
  j["background"] = m.background;
  j["alpha"] = m.alpha;
  j["beta"] = m.beta;
  j["xi"] = m.xi;
  j["n_s"] = m.n_s;
  j["phase"] = m.phase;
  j["tau_ns"] = number_or_null(m.decoherence.tau_ns);
  j["decoherence_shape"] = m.decoherence.shape == DecayShape::kGaussian ? "gaussian" : "exponential";
  j["dark_d1"] = m.dark_d1;
  j["dark_d2"] = m.dark_d2;
  j["dark_d3"] = m.dark_d3;
  return j;
}

Json window_json(const CoincidenceWindow& w) { return Json::array({w.lo, w.hi}); }

Json table_json(const CorrelationTable& t) {
  Json j;
  j["basis"] = t.basis_label;
  Json counts = Json::array(), probs = Json::array(), errors = Json::array();
  for (int r = 0; r < 2; ++r) {
    counts.push_back(Json::array({t.counts[r][0], t.counts[r][1]}));
    probs.push_back(Json::array({number_or_null(t.probs[r][0]), number_or_null(t.probs[r][1])}));
    errors.push_back(Json::array({number_or_null(t.errors[r][0]), number_or_null(t.errors[r][1])}));
  }
  j["counts"] = counts;
  j["probabilities"] = probs;
  j["errors"] = errors;
  j["row_defined"] = Json::array({t.row_defined[0], t.row_defined[1]});
  return j;
}

Json verdict_json(const ClassicalVerdict& v) {
  Json j;
  j["exceeds"] = v.exceeds;
  j["bound"] = v.bound;
  j["margin"] = v.margin;
  return j;
}

Json matrix_json(const Eigen::MatrixXcd& m, bool imag) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(imag ? m(r, c).imag() : m(r, c).real());
    rows.push_back(row);
  }
  return rows;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

FidelityOptions fidelity_options(const RunConfig& config) {
  FidelityOptions o;
  o.split = config.experiment.split;
  o.error_method = config.experiment.error_method;
  o.bootstrap_resamples = config.experiment.bootstrap_resamples;
  o.bootstrap_seed = split_seed(config.master_seed, 0xB0075);
  return o;
}

std::array<SettingsPair, 4> basis_settings(double phase) {
  auto rect = max_correlation_settings(Basis::kRectilinear, phase);
  auto diag = max_correlation_settings(Basis::kDiagonal, phase);
  return {rect.rows[0], rect.rows[1], diag.rows[0], diag.rows[1]};
}

std::array<std::vector<ClickRecord>, 4> simulate_runs(const RunConfig& config,
                                                      const PulseSchedule& sched,
                                                      std::uint64_t seed_base) {
  const auto settings = basis_settings(config.model.phase);
  std::array<std::vector<ClickRecord>, 4> out;
  for (int k = 0; k < 4; ++k) {
    out[k] = run_experiment(config.model, sched, settings[k], config.experiment.trials,
                            split_seed(seed_base, k), config.experiment.threads);
  }
  return out;
}

BasisRuns coincidences_of(const std::array<std::vector<ClickRecord>, 4>& events,
                          const PulseSchedule& sched, const CoincidenceWindow& window) {
  BasisRuns runs;
  for (int k = 0; k < 4; ++k) {
    auto c = match_coincidences(gate(events[k], sched), window);
    (k < 2 ? runs.rectilinear[k] : runs.diagonal[k - 2]) = std::move(c);
  }
  return runs;
}

const std::vector<CoincidenceEvent>& run_events(const BasisRuns& runs, int k) {
  return k < 2 ? runs.rectilinear[k] : runs.diagonal[k - 2];
}

std::string coincidence_csv(const std::vector<CoincidenceEvent>& events) {
  std::ostringstream out;
  write_coincidences_csv(out, events);
  return out.str();
}

double row_fraction(const CorrelationTable& t) {
  const double total = double(t.row_total(0) + t.row_total(1));
  return total > 0 ? t.row_total(0) / total : std::nan("");
}

// Tables, fidelities and verdicts of four basis runs. The Report gets the
// summary fields and the table/coincidence CSVs; callers add the rest.
BasisCorrelationResult basis_result(BasisRuns runs, const RunConfig& config,
                                    const CoincidenceWindow& window, const std::string& schema) {
  BasisCorrelationResult res{std::move(runs), {}, {}, {}, {}, {}, {}, {}};
  auto [rect, diag] = tables_from_runs(res.runs)(window);
  res.rectilinear = rect;
  res.diagonal = diag;
  Report& rep = res.report;

  if (rect.complete()) res.f0 = state_fidelity_from_table(rect);
  if (diag.complete()) res.f45 = state_fidelity_from_table(diag);
  if (rect.complete() && diag.complete()) {
    res.reconstruction = reconstruct_density(rect, diag, config.experiment.split);
    res.f_si = entanglement_fidelity_estimate(rect, diag, fidelity_options(config));
  } else {
    rep.warnings.push_back("a correlation-table row has no coincidences; fidelities are undefined");
  }

  Json j = header(schema, config);
  j["delta_t_ns"] = config.schedule.delta_t_ns;
  j["window_ns"] = window_json(window);
  j["coherence_split"] = config.experiment.split == CoherenceSplit::kConservative ? "conservative"
                                                                                  : "optimistic";
  j["tables"] = Json::array({table_json(rect), table_json(diag)});
  Json fid;
  fid["f_0"] = optional_json(res.f0);
  fid["f_45"] = optional_json(res.f45);
  fid["f_si"] = res.f_si ? Json(res.f_si->value) : Json(nullptr);
  fid["f_si_error"] = res.f_si ? Json(res.f_si->error) : Json(nullptr);
  j["fidelities"] = fid;
  Json verdicts;
  verdicts["f_0"] = res.f0 ? verdict_json(classical_bound_check(*res.f0, FidelityKind::kStateTransfer))
                           : Json(nullptr);
  verdicts["f_45"] = res.f45
                         ? verdict_json(classical_bound_check(*res.f45, FidelityKind::kStateTransfer))
                         : Json(nullptr);
  verdicts["f_si"] = res.f_si ? verdict_json(classical_bound_check(std::clamp(res.f_si->value, 0.0, 1.0),
                                                                   FidelityKind::kEntanglement))
                              : Json(nullptr);
  j["classical_verdicts"] = verdicts;
  if (res.reconstruction) {
    const auto& r = *res.reconstruction;
    Json rj;
    rj["fringe_amplitude"] = r.fringe_amplitude;
    rj["c14"] = r.c14;
    rj["c23"] = r.c23;
    rj["raw_min_eigenvalue"] = r.raw_min_eigenvalue;
    rj["psd_repaired"] = r.psd_repaired;
    rj["rho_real"] = matrix_json(r.rho.matrix(), false);
    rj["rho_imag"] = matrix_json(r.rho.matrix(), true);
    j["reconstruction"] = rj;
  } else {
    j["reconstruction"] = nullptr;
  }
  Json diag_j;
  diag_j["signal_row_fraction"] =
      Json::array({number_or_null(row_fraction(rect)), number_or_null(row_fraction(diag))});
  j["diagnostics"] = diag_j;
  rep.summary = j;

  std::ostringstream table_csv;
  table_csv << "basis,signal_row,idler_port,count,probability,error\n";
  for (const CorrelationTable* t : {&rect, &diag}) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) {
        table_csv << t->basis_label << ',' << r << ',' << (c == 0 ? "D2" : "D3") << ','
                  << t->counts[r][c] << ',' << csv_number(t->probs[r][c]) << ','
                  << csv_number(t->errors[r][c]) << '\n';
      }
    }
  }
  rep.files.push_back({"correlation_table.csv", table_csv.str()});
  for (int k = 0; k < 4; ++k) {
    rep.files.push_back({std::string("coincidences_") + kRunLabels[k] + ".csv",
                         coincidence_csv(run_events(res.runs, k))});
  }
  return res;
}

std::uint64_t gated_heralds(const std::vector<ClickRecord>& events, const PulseSchedule& sched) {
  std::uint64_t n = 0;
  for (const auto& e : gate(events, sched)) n += e.channel == Channel::kD1;
  return n;
}

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& contents) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << contents;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  };
  write(report.name + ".json", dump(report.summary));
  for (const auto& f : report.files) write(f.name, f.contents);
}

FringeScanResult run_fringe_scan(const RunConfig& config) {
  validate_config(config, ExperimentKind::kFringeScan);
  const auto& x = config.experiment;
  const CoincidenceWindow window = window_for(config, config.schedule.delta_t_ns);
  const AnalyzerSetting idler(x.idler_theta_deg * kDeg, 0.0);
  const DensityMatrix joint = window_averaged_state(config.model, config.schedule, window);

  FringeScanResult res;
  res.theta_i = x.idler_theta_deg * kDeg;
  std::vector<double> fit_theta, fit_p, fit_w;
  for (std::size_t k = 0; k < x.theta_grid_deg.size(); ++k) {
    const double theta = x.theta_grid_deg[k] * kDeg;
    const SettingsPair settings{AnalyzerSetting(theta, -config.model.phase), idler};
    auto events = run_experiment(config.model, config.schedule, settings, x.trials,
                                 split_seed(config.master_seed, k), x.threads);
    FringePoint pt{theta, 0, 0, std::nan(""), std::nan(""),
                   conditional_pass_probability(joint, settings)};
    for (const auto& c : match_coincidences(gate(events, config.schedule), window)) {
      (c.stop_channel == Channel::kD2 ? pt.pass : pt.fail) += 1;
    }
    const double n = double(pt.pass + pt.fail);
    if (n > 0) {
      pt.p_pass = pt.pass / n;
      pt.sigma = std::sqrt(pt.p_pass * (1.0 - pt.p_pass) / n);
      // Add-one smoothing keeps the weight finite at p = 0 or 1.
      const double p_reg = (pt.pass + 1.0) / (n + 2.0);
      fit_theta.push_back(theta);
      fit_p.push_back(pt.p_pass);
      fit_w.push_back((n + 2.0) / (p_reg * (1.0 - p_reg)));
    }
    res.points.push_back(pt);
  }
  Report& rep = res.report;
  rep.name = "fringe_scan";
  try {
    res.fit = fringe_fit(fit_theta, fit_p, fit_w, res.theta_i);
  } catch (const std::invalid_argument& e) {
    rep.warnings.push_back(std::string("no visibility fit: ") + e.what());
  }

  std::ostringstream csv;
  csv << "theta_s_deg,theta_s_rad,coincidences,pass_count,fail_count,p_pass,p_fail,sigma,p_born,p_fit\n";
  for (std::size_t k = 0; k < res.points.size(); ++k) {
    const auto& p = res.points[k];
    const double fit = res.fit ? 0.5 * (1.0 + res.fit->raw_visibility *
                                                  std::cos(2.0 * (p.theta_s - res.theta_i)))
                               : std::nan("");
    csv << csv_number(x.theta_grid_deg[k]) << ',' << csv_number(p.theta_s) << ','
        << p.pass + p.fail << ',' << p.pass << ',' << p.fail << ',' << csv_number(p.p_pass) << ','
        << csv_number(1.0 - p.p_pass) << ',' << csv_number(p.sigma) << ','
        << csv_number(p.p_born) << ',' << csv_number(fit) << '\n';
  }
  rep.files.push_back({"fringe_scan.csv", csv.str()});

  Json j = header("dlcz.fringe-scan", config);
  j["trials_per_point"] = x.trials;
  j["idler_theta_deg"] = x.idler_theta_deg;
  j["window_ns"] = window_json(window);
  j["model"] = model_json(config.model);
  j["points"] = res.points.size();
  if (res.fit) {
    j["visibility"] = res.fit->visibility;
    j["visibility_error"] = res.fit->visibility_error;
    j["raw_visibility"] = res.fit->raw_visibility;
    j["residual"] = res.fit->residual;
  } else {
    j["visibility"] = j["visibility_error"] = j["raw_visibility"] = j["residual"] = nullptr;
  }
  std::optional<std::size_t> peak;
  for (std::size_t k = 0; k < res.points.size(); ++k) {
    if (std::isnan(res.points[k].p_pass)) continue;
    if (!peak || res.points[k].p_pass > res.points[*peak].p_pass) peak = k;
  }
  j["peak_p_pass"] = peak ? Json(res.points[*peak].p_pass) : Json(nullptr);
  j["peak_theta_s_deg"] = peak ? Json(x.theta_grid_deg[*peak]) : Json(nullptr);
  j["warnings"] = rep.warnings;
  rep.summary = j;
  return res;
}

BasisCorrelationResult run_basis_correlation(const RunConfig& config) {
  validate_config(config, ExperimentKind::kBasisCorrelation);
  const auto window = window_for(config, config.schedule.delta_t_ns);
  const auto events = simulate_runs(config, config.schedule, config.master_seed);
  BasisCorrelationResult res = basis_result(coincidences_of(events, config.schedule, window),
                                            config, window, "dlcz.basis-correlation");
  Report& rep = res.report;
  rep.name = "basis_correlation";
  Json& j = rep.summary;
  j["trials_per_run"] = config.experiment.trials;
  j["model"] = model_json(config.model);

  std::uint64_t heralds = 0, coinc = 0;
  for (int k = 0; k < 4; ++k) {
    heralds += gated_heralds(events[k], config.schedule);
    coinc += run_events(res.runs, k).size();
  }
  const RateReport measured = rates_from_counts(heralds, coinc, 4 * config.experiment.trials,
                                                config.model.alpha, config.schedule.rep_rate_hz);
  Json mj;
  mj["heralds"] = heralds;
  mj["coincidences"] = coinc;
  mj["r_s"] = measured.r_s;
  mj["r_si"] = measured.r_si;
  mj["zeta"] = measured.zeta;
  j["measured_rates"] = mj;

  const DensityMatrix joint = window_averaged_state(config.model, config.schedule, window);
  const auto rect = born_table(joint, Basis::kRectilinear, config.model.phase);
  const auto diag = born_table(joint, Basis::kDiagonal, config.model.phase);
  Json pj;
  pj["tables"] = Json::array({table_json(rect), table_json(diag)});
  pj["f_0"] = state_fidelity_from_table(rect);
  pj["f_45"] = state_fidelity_from_table(diag);
  pj["f_si"] = analytic_window_fidelity(config.model, config.schedule, window, config.experiment.split);
  j["model_prediction"] = pj;
  j["warnings"] = rep.warnings;
  return res;
}

DelayScanResult run_delay_scan(const RunConfig& config) {
  validate_config(config, ExperimentKind::kDelayScan);
  DelayScanResult res;
  const FidelityOptions options = fidelity_options(config);
  Report& rep = res.report;
  rep.name = "delay_scan";
  Json series = Json::array();
  std::ostringstream csv;
  csv << "delta_t_ns,bin_index,bin_lo_ns,bin_hi_ns,mean_delay_ns,coincidences,f_si,f_si_error,"
         "f_si_model,below_threshold\n";

  for (std::size_t i = 0; i < config.experiment.delta_t_list_ns.size(); ++i) {
    PulseSchedule sched = config.schedule;
    sched.delta_t_ns = config.experiment.delta_t_list_ns[i];
    DelaySeries s;
    s.delta_t_ns = sched.delta_t_ns;
    s.window = window_for(config, sched.delta_t_ns);
    const auto events = simulate_runs(config, sched, split_seed(config.master_seed, 1000 + i));
    const BasisRuns runs = coincidences_of(events, sched, s.window);
    s.bins = time_binned_fidelity(s.window, tables_from_runs(runs), options);

    for (const auto& b : s.bins) {
      double sum = 0.0;
      std::uint64_t n = 0;
      for (int k = 0; k < 4; ++k) {
        for (const auto& e : select(run_events(runs, k), b.bin)) {
          sum += double(e.delay);
          ++n;
        }
      }
      s.coincidences.push_back(n);
      s.mean_delay.push_back(n ? sum / n : std::nan(""));
      double model = std::nan("");
      try {
        model = analytic_window_fidelity(config.model, sched, b.bin, config.experiment.split);
      } catch (const std::invalid_argument&) {
        // The quarter holds no grid-time pair; there is nothing to predict.
      }
      s.model.push_back(model);
    }
    s.monotone_non_increasing = true;
    std::optional<double> prev;
    for (const auto& b : s.bins) {
      if (!b.f_si) continue;
      if (prev && *b.f_si > *prev) s.monotone_non_increasing = false;
      prev = b.f_si;
    }

    Json sj;
    sj["delta_t_ns"] = s.delta_t_ns;
    sj["window_ns"] = window_json(s.window);
    sj["monotone_non_increasing"] = s.monotone_non_increasing;
    Json bins = Json::array();
    for (std::size_t k = 0; k < s.bins.size(); ++k) {
      const auto& b = s.bins[k];
      Json bj;
      bj["bin_ns"] = window_json(b.bin);
      bj["mean_delay_ns"] = number_or_null(s.mean_delay[k]);
      bj["coincidences"] = s.coincidences[k];
      bj["f_si"] = optional_json(b.f_si);
      bj["f_si_error"] = optional_json(b.error);
      bj["f_si_model"] = number_or_null(s.model[k]);
      bj["below_threshold"] = b.below_threshold;
      bins.push_back(bj);

      csv << s.delta_t_ns << ',' << k << ',' << b.bin.lo << ',' << b.bin.hi << ','
          << csv_number(s.mean_delay[k]) << ',' << s.coincidences[k] << ','
          << csv_number(b.f_si.value_or(std::nan(""))) << ','
          << csv_number(b.error.value_or(std::nan(""))) << ',' << csv_number(s.model[k]) << ','
          << (b.below_threshold ? 1 : 0) << '\n';
      if (!b.f_si) {
        rep.warnings.push_back("delta_t " + std::to_string(s.delta_t_ns) + " ns, bin " +
                               std::to_string(k) + ": a table row has no coincidences");
      }
    }
    sj["bins"] = bins;
    series.push_back(sj);
    res.series.push_back(std::move(s));
  }
  rep.files.push_back({"delay_scan.csv", csv.str()});
  Json j = header("dlcz.delay-scan", config);
  j["trials_per_run"] = config.experiment.trials;
  j["model"] = model_json(config.model);
  j["series"] = series;
  j["warnings"] = rep.warnings;
  rep.summary = j;
  return res;
}

RatesResult run_rates(const RunConfig& config) {
  validate_config(config, ExperimentKind::kRates);
  RatesResult res;
  res.analytic = rates(config.model, config.schedule);
  const auto& r = res.analytic;
  Report& rep = res.report;
  rep.name = "rates";
  Json j = header("dlcz.rates", config);
  j["rep_rate_hz"] = config.schedule.rep_rate_hz;
  j["alpha"] = config.model.alpha;
  j["beta"] = config.model.beta;
  j["xi"] = config.model.xi;
  j["n_s"] = config.model.n_s;
  j["r_s"] = r.r_s;
  j["zeta"] = r.zeta;
  j["r_si"] = r.r_si;
  j["n_s_inferred"] = r.n_s_inferred;
  j["r_2"] = r.r_2;
  rep.summary = j;
  std::ostringstream csv;
  csv << "quantity,value,unit\n"
      << "r_s," << csv_number(r.r_s) << ",1/s\n"
      << "zeta," << csv_number(r.zeta) << ",\n"
      << "r_si," << csv_number(r.r_si) << ",1/s\n"
      << "n_s_inferred," << csv_number(r.n_s_inferred) << ",\n"
      << "r_2," << csv_number(r.r_2) << ",1/s\n";
  rep.files.push_back({"rates.csv", csv.str()});
  return res;
}

SimulateResult run_simulate(const RunConfig& config) {
  validate_config(config, ExperimentKind::kSimulate);
  SimulateResult res;
  res.events = simulate_runs(config, config.schedule, config.master_seed);
  Report& rep = res.report;
  rep.name = "simulate";
  const bool binary = config.experiment.event_format == EventFormat::kBinary;
  const auto settings = basis_settings(config.model.phase);
  Json runs = Json::array();
  for (int k = 0; k < 4; ++k) {
    const std::string file = std::string("events_") + kRunLabels[k] + (binary ? ".bin" : ".csv");
    std::ostringstream out;
    if (binary) {
      write_events_binary(out, res.events[k]);
    } else {
      write_events_csv(out, res.events[k]);
    }
    rep.files.push_back({file, out.str()});
    Json rj;
    rj["label"] = kRunLabels[k];
    rj["file"] = file;
    rj["clicks"] = res.events[k].size();
    rj["signal_theta"] = settings[k].signal.theta();
    rj["signal_phi"] = settings[k].signal.phi();
    rj["idler_theta"] = settings[k].idler.theta();
    rj["idler_phi"] = settings[k].idler.phi();
    runs.push_back(rj);
  }
  Json j = header("dlcz.simulate", config);
  j["trials_per_run"] = config.experiment.trials;
  j["delta_t_ns"] = config.schedule.delta_t_ns;
  j["format"] = binary ? "binary" : "csv";
  j["model"] = model_json(config.model);
  j["runs"] = runs;
  rep.summary = j;
  return res;
}

AnalyzeResult run_analyze(const RunConfig& config) {
  validate_config(config, ExperimentKind::kAnalyze);
  const auto& input = config.experiment.input;
  const auto window = window_for(config, config.schedule.delta_t_ns);
  AnalyzeResult res;

  if (std::filesystem::is_directory(input)) {
    std::array<std::vector<ClickRecord>, 4> events;
    for (int k = 0; k < 4; ++k) {
      const auto csv = input / (std::string("events_") + kRunLabels[k] + ".csv");
      const auto bin = input / (std::string("events_") + kRunLabels[k] + ".bin");
      const bool has_csv = std::filesystem::exists(csv), has_bin = std::filesystem::exists(bin);
      if (has_csv == has_bin) {
        throw DataFormatError(input.string() + ": expected exactly one of " +
                              csv.filename().string() + " and " + bin.filename().string());
      }
      events[k] = read_events(has_csv ? csv : bin);
    }
    BasisCorrelationResult tables =
        basis_result(coincidences_of(events, config.schedule, window), config, window,
                     "dlcz.analyze-tables");
    res.report = tables.report;
    res.report.name = "analyze";
    res.report.summary["input"] = input.string();
    res.report.summary["warnings"] = res.report.warnings;
    tables.report = {};
    res.tables = std::move(tables);
    return res;
  }

  const auto events = read_events(input);
  const auto gated = gate(events, config.schedule);
  res.coincidences = match_coincidences(gated, window);
  Report& rep = res.report;
  rep.name = "analyze";
  if (events.empty()) rep.warnings.push_back("input holds no events");
  std::uint64_t d2 = 0;
  for (const auto& c : res.coincidences) d2 += c.stop_channel == Channel::kD2;
  const auto hist = histogram(res.coincidences, config.experiment.bin_ns);

  Json j = header("dlcz.analyze-stream", config);
  j["input"] = input.string();
  j["delta_t_ns"] = config.schedule.delta_t_ns;
  j["window_ns"] = window_json(window);
  j["clicks"] = events.size();
  j["gated_clicks"] = gated.size();
  j["coincidences"] = res.coincidences.size();
  j["stop_d2"] = d2;
  j["stop_d3"] = res.coincidences.size() - d2;
  j["bin_ns"] = config.experiment.bin_ns;
  j["warnings"] = rep.warnings;
  rep.summary = j;

  std::ostringstream hcsv;
  hcsv << "bin_lo_ns,bin_hi_ns,count\n";
  for (const auto& [lo, n] : hist) hcsv << lo << ',' << lo + config.experiment.bin_ns << ',' << n << '\n';
  rep.files.push_back({"coincidences.csv", coincidence_csv(res.coincidences)});
  rep.files.push_back({"histogram.csv", hcsv.str()});
  return res;
}

Report run_experiment_kind(ExperimentKind kind, const RunConfig& config) {
  Report rep;
  switch (kind) {
    case ExperimentKind::kFringeScan: rep = run_fringe_scan(config).report; break;
    case ExperimentKind::kBasisCorrelation: rep = run_basis_correlation(config).report; break;
    case ExperimentKind::kDelayScan: rep = run_delay_scan(config).report; break;
    case ExperimentKind::kRates: rep = run_rates(config).report; break;
    case ExperimentKind::kSimulate: rep = run_simulate(config).report; break;
    case ExperimentKind::kAnalyze: rep = run_analyze(config).report; break;
  }
  write_report(rep, config.out_dir);
  return rep;
}

}  // namespace dlcz
