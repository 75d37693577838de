#include "dlcz/analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "dlcz/rng.h"

namespace dlcz {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Probs = std::array<std::array<double, 2>, 2>;

// Independent row probabilities of a pair of tables:
// x = (P_rect[0][0], P_rect[1][1], P_diag[0][0], P_diag[1][1]).
using RowVector = std::array<double, 4>;

RowVector row_vector(const CorrelationTable& rect, const CorrelationTable& diag) {
  return {rect.probs[0][0], rect.probs[1][1], diag.probs[0][0], diag.probs[1][1]};
}

RowVector row_errors(const CorrelationTable& rect, const CorrelationTable& diag) {
  return {rect.errors[0][0], rect.errors[1][1], diag.errors[0][0], diag.errors[1][1]};
}

Probs probs_from(double p00, double p11) { return {{{p00, 1.0 - p00}, {1.0 - p11, p11}}}; }

double pipeline_fidelity(const RowVector& x, const CorrelationTable& rect_template,
                         const CorrelationTable& diag_template, CoherenceSplit split) {
  auto rect = CorrelationTable::from_probabilities(rect_template.basis_label,
                                                   probs_from(x[0], x[1]), rect_template.errors);
  auto diag = CorrelationTable::from_probabilities(diag_template.basis_label,
                                                   probs_from(x[2], x[3]), diag_template.errors);
  return entanglement_fidelity_bound(reconstruct_density(rect, diag, split).rho);
}

double linearized_error(const CorrelationTable& rect, const CorrelationTable& diag,
                        CoherenceSplit split) {
  const RowVector x = row_vector(rect, diag);
  const RowVector sigma = row_errors(rect, diag);
  constexpr double h = 1e-7;
  double var = 0.0;
  for (int k = 0; k < 4; ++k) {
    if (!(sigma[k] > 0.0)) continue;
    RowVector up = x;
    RowVector dn = x;
    up[k] = std::min(1.0, x[k] + h);
    dn[k] = std::max(0.0, x[k] - h);
    double grad = (pipeline_fidelity(up, rect, diag, split) -
                   pipeline_fidelity(dn, rect, diag, split)) /
                  (up[k] - dn[k]);
    var += grad * grad * sigma[k] * sigma[k];
  }
  return std::sqrt(var);
}

double bootstrap_error(const CorrelationTable& rect, const CorrelationTable& diag,
                       const FidelityOptions& options) {
  if (options.bootstrap_resamples < 2) {
    throw std::invalid_argument("bootstrap needs at least two resamples");
  }
  SplitMix64 rng(options.bootstrap_seed);
  auto resample = [&](const CorrelationTable& t) {
    std::array<std::array<std::uint64_t, 2>, 2> counts{};
    for (int r = 0; r < 2; ++r) {
      std::uint64_t n = t.row_total(r);
      std::binomial_distribution<std::uint64_t> draw(n, t.probs[r][0]);
      counts[r][0] = draw(rng);
      counts[r][1] = n - counts[r][0];
    }
    return CorrelationTable::from_counts(t.basis_label, counts);
  };
  double sum = 0.0;
  double sum2 = 0.0;
  int used = 0;
  for (int b = 0; b < options.bootstrap_resamples; ++b) {
    CorrelationTable r = resample(rect);
    CorrelationTable d = resample(diag);
    if (!r.complete() || !d.complete()) continue;
    double f;
    try {
      f = entanglement_fidelity_bound(reconstruct_density(r, d, options.split).rho);
    } catch (const PhysicsError&) {
      continue;
    }
    sum += f;
    sum2 += f * f;
    ++used;
  }
  if (used < 2) return kNaN;
  double mean = sum / used;
  return std::sqrt(std::max(0.0, (sum2 - used * mean * mean) / (used - 1)));
}

}  // namespace

const char* basis_label(Basis basis) { return basis == Basis::kRectilinear ? "0" : "45"; }

BasisSettings max_correlation_settings(Basis basis, double phase) {
  using std::numbers::pi;
  if (basis == Basis::kRectilinear) {
    AnalyzerSetting idler(0.0, 0.0);
    return {{{{AnalyzerSetting(0.0, 0.0), idler}, {AnalyzerSetting(pi / 2, 0.0), idler}}}};
  }
  AnalyzerSetting idler(pi / 4, 0.0);
  return {{{{AnalyzerSetting(pi / 4, -phase), idler},
            {AnalyzerSetting(3 * pi / 4, -phase), idler}}}};
}

CorrelationTable CorrelationTable::from_counts(
    std::string label, const std::array<std::array<std::uint64_t, 2>, 2>& counts) {
  CorrelationTable t;
  t.basis_label = std::move(label);
  t.counts = counts;
  for (int r = 0; r < 2; ++r) {
    const std::uint64_t n = counts[r][0] + counts[r][1];
    if (n == 0) {
      t.row_defined[r] = false;
      t.probs[r] = {kNaN, kNaN};
      t.errors[r] = {kNaN, kNaN};
      continue;
    }
    for (int c = 0; c < 2; ++c) {
      double p = static_cast<double>(counts[r][c]) / static_cast<double>(n);
      t.probs[r][c] = p;
      t.errors[r][c] = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    }
  }
  return t;
}

CorrelationTable CorrelationTable::from_probabilities(
    std::string label, const std::array<std::array<double, 2>, 2>& probs,
    const std::array<std::array<double, 2>, 2>& errors) {
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      if (!(probs[r][c] >= 0.0 && probs[r][c] <= 1.0)) {
        throw std::invalid_argument("table probabilities must lie in [0, 1]");
      }
    }
    if (std::abs(probs[r][0] + probs[r][1] - 1.0) > kAlgebraTolerance) {
      throw std::invalid_argument("table rows must sum to 1");
    }
  }
  CorrelationTable t;
  t.basis_label = std::move(label);
  t.probs = probs;
  t.errors = errors;
  return t;
}

CorrelationTable conditional_probabilities(std::span<const CoincidenceEvent> row0,
                                           std::span<const CoincidenceEvent> row1,
                                           std::string label) {
  std::array<std::array<std::uint64_t, 2>, 2> counts{};
  auto tally = [](std::span<const CoincidenceEvent> events, std::array<std::uint64_t, 2>& row) {
    for (const auto& e : events) {
      ++row[e.stop_channel == Channel::kD2 ? 0 : 1];
    }
  };
  tally(row0, counts[0]);
  tally(row1, counts[1]);
  return CorrelationTable::from_counts(std::move(label), counts);
}

CorrelationTable born_table(const DensityMatrix& joint, Basis basis, double phase) {
  BasisSettings settings = max_correlation_settings(basis, phase);
  Probs probs{};
  for (int r = 0; r < 2; ++r) {
    double p = conditional_pass_probability(joint, settings.rows[r]);
    probs[r] = {p, 1.0 - p};
  }
  return CorrelationTable::from_probabilities(basis_label(basis), probs);
}

FringeFit fringe_fit(std::span<const double> theta, std::span<const double> p,
                     std::span<const double> weights, double theta0) {
  const std::size_t n = theta.size();
  if (p.size() != n || (!weights.empty() && weights.size() != n)) {
    throw std::invalid_argument("fringe_fit: theta, p and weights must have equal length");
  }
  if (n < 3) {
    throw std::invalid_argument("fringe_fit: need at least 3 points");
  }
  auto [lo, hi] = std::minmax_element(theta.begin(), theta.end());
  if (*hi - *lo < std::numbers::pi / 2 - 1e-12) {
    throw std::invalid_argument("fringe_fit: angles must span at least half a fringe period");
  }
  double sgg = 0.0;
  double sgy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double w = weights.empty() ? 1.0 : weights[k];
    if (!std::isfinite(theta[k]) || !std::isfinite(p[k]) || !(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("fringe_fit: non-finite input or negative weight");
    }
    double g = std::cos(2.0 * (theta[k] - theta0));
    double y = 2.0 * p[k] - 1.0;
    sgg += w * g * g;
    sgy += w * g * y;
  }
  if (!(sgg > 1e-300)) {
    throw std::invalid_argument("fringe_fit: degenerate data (no fringe sensitivity)");
  }
  const double v = sgy / sgg;
  double rss = 0.0;
  double unweighted_rss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double w = weights.empty() ? 1.0 : weights[k];
    double model = 0.5 * (1.0 + v * std::cos(2.0 * (theta[k] - theta0)));
    double r = p[k] - model;
    rss += w * r * r;
    unweighted_rss += 4.0 * r * r;
  }
  double err;
  if (weights.empty()) {
    err = std::sqrt(unweighted_rss / static_cast<double>(n - 1) / sgg);
  } else {
    // sigma_y = 2 sigma_p, so the y-space weight is w / 4.
    err = std::sqrt(4.0 / sgg);
  }
  return {std::clamp(v, 0.0, 1.0), v, err, rss};
}

Reconstruction reconstruct_density(const CorrelationTable& rect, const CorrelationTable& diag,
                                   CoherenceSplit split) {
  if (!rect.complete() || !diag.complete()) {
    throw std::invalid_argument("reconstruct_density: a table row has no counts");
  }
  const double r11 = 0.5 * rect.probs[0][0];
  const double r22 = 0.5 * rect.probs[0][1];
  const double r33 = 0.5 * rect.probs[1][0];
  const double r44 = 0.5 * rect.probs[1][1];
  const double c = 0.5 * (diag.probs[0][0] + diag.probs[1][1]) - 0.5;

  const double bound14 = std::sqrt(r11 * r44);
  const double bound23 = std::sqrt(r22 * r33);
  const double e0 = std::isfinite(diag.errors[0][0]) ? diag.errors[0][0] : 0.0;
  const double e1 = std::isfinite(diag.errors[1][1]) ? diag.errors[1][1] : 0.0;
  const double sigma_c = 0.5 * std::sqrt(e0 * e0 + e1 * e1);
  if (std::abs(c) > bound14 + bound23 + 3.0 * sigma_c + kAlgebraTolerance) {
    std::ostringstream msg;
    msg << "inconsistent tables: fringe amplitude " << c << " exceeds the positivity bound "
        << bound14 + bound23;
    throw PhysicsError(msg.str());
  }
  double c23 = split == CoherenceSplit::kConservative ? std::clamp(c, -bound23, bound23) : 0.0;
  double c14 = c - c23;

  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
  m(kIndexHH, kIndexHH) = r11;
  m(kIndexHV, kIndexHV) = r22;
  m(kIndexVH, kIndexVH) = r33;
  m(kIndexVV, kIndexVV) = r44;
  m(kIndexHH, kIndexVV) = m(kIndexVV, kIndexHH) = c14;
  m(kIndexHV, kIndexVH) = m(kIndexVH, kIndexHV) = c23;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
  const double raw_min = solver.eigenvalues().minCoeff();
  bool repaired = false;
  if (raw_min < -kPsdFloor) {
    Eigen::VectorXd lambda = solver.eigenvalues().cwiseMax(0.0);
    lambda /= lambda.sum();
    m = solver.eigenvectors() * lambda.cast<Complex>().asDiagonal() *
        solver.eigenvectors().adjoint();
    m = (0.5 * (m + m.adjoint())).eval();
    repaired = true;
  }
  return {DensityMatrix(std::move(m)), c, c14, c23, raw_min, repaired};
}

double entanglement_fidelity_bound(const DensityMatrix& rho) {
  if (rho.dim() != 4) {
    throw DimensionError("entanglement fidelity needs a two-photon state");
  }
  return 0.5 * (rho(kIndexHH, kIndexHH).real() + rho(kIndexVV, kIndexVV).real()) +
         std::abs(rho(kIndexHH, kIndexVV));
}

double state_fidelity_from_table(const CorrelationTable& table) {
  if (!table.complete()) {
    throw std::invalid_argument("state fidelity undefined: a table row has no counts");
  }
  return std::min(table.probs[0][0], table.probs[1][1]);
}

ClassicalVerdict classical_bound_check(double f, FidelityKind kind) {
  if (!(f >= 0.0 && f <= 1.0)) {
    throw std::invalid_argument("fidelity must lie in [0, 1]");
  }
  const double bound = kind == FidelityKind::kStateTransfer ? 2.0 / 3.0 : 0.5;
  return {f > bound, bound, f - bound};
}

RateReport rates(const ImperfectionModel& m, const PulseSchedule& sched) {
  m.validate();
  sched.validate();
  const double r = sched.rep_rate_hz;
  RateReport out{};
  out.r_s = m.alpha * m.n_s * r;
  out.zeta = m.beta * m.xi;
  out.r_si = out.zeta * out.r_s;
  out.n_s_inferred = m.alpha > 0.0 ? out.r_s / (m.alpha * r) : 0.0;
  const double chain = m.beta * m.xi * m.alpha * m.n_s;
  out.r_2 = chain * chain * r;
  return out;
}

RateReport rates_from_counts(std::uint64_t heralds, std::uint64_t coincidences,
                             std::uint64_t n_trials, double alpha, double rep_rate_hz) {
  if (n_trials == 0 || !(rep_rate_hz > 0.0)) {
    throw std::invalid_argument("rates_from_counts needs trials and a positive repetition rate");
  }
  const double seconds = static_cast<double>(n_trials) / rep_rate_hz;
  RateReport out{};
  out.r_s = static_cast<double>(heralds) / seconds;
  out.r_si = static_cast<double>(coincidences) / seconds;
  out.zeta = heralds > 0 ? static_cast<double>(coincidences) / static_cast<double>(heralds) : 0.0;
  out.n_s_inferred = alpha > 0.0 ? out.r_s / (alpha * rep_rate_hz) : 0.0;
  const double chain = out.zeta * alpha * out.n_s_inferred;
  out.r_2 = chain * chain * rep_rate_hz;
  return out;
}

TablesBuilder tables_from_runs(const BasisRuns& runs) {
  return [&runs](const CoincidenceWindow& w) {
    auto rect = conditional_probabilities(select(runs.rectilinear[0], w),
                                          select(runs.rectilinear[1], w),
                                          basis_label(Basis::kRectilinear));
    auto diag = conditional_probabilities(select(runs.diagonal[0], w),
                                          select(runs.diagonal[1], w),
                                          basis_label(Basis::kDiagonal));
    return std::make_pair(std::move(rect), std::move(diag));
  };
}

FidelityEstimate entanglement_fidelity_estimate(const CorrelationTable& rect,
                                                const CorrelationTable& diag,
                                                const FidelityOptions& options) {
  double f = entanglement_fidelity_bound(reconstruct_density(rect, diag, options.split).rho);
  double err = options.error_method == ErrorMethod::kLinearized
                   ? linearized_error(rect, diag, options.split)
                   : bootstrap_error(rect, diag, options);
  return {f, err};
}

std::vector<BinnedFidelity> time_binned_fidelity(const CoincidenceWindow& window,
                                                 const TablesBuilder& tables,
                                                 const FidelityOptions& options) {
  std::vector<BinnedFidelity> out;
  for (const auto& bin : split_into_quarters(window)) {
    auto [rect, diag] = tables(bin);
    BinnedFidelity b{bin, std::nullopt, std::nullopt, true};
    if (rect.complete() && diag.complete()) {
      FidelityEstimate est = entanglement_fidelity_estimate(rect, diag, options);
      b.f_si = est.value;
      b.error = est.error;
      b.below_threshold = !(est.value - est.error > 0.5);
    }
    out.push_back(b);
  }
  return out;
}

std::map<std::int64_t, std::uint64_t> delay_distribution(const PulseSchedule& sched,
                                                         const CoincidenceWindow& window) {
  sched.validate();
  window.validate();
  std::map<std::int64_t, std::uint64_t> out;
  const auto signal = sched.signal_gate().grid();
  const auto idler = sched.idler_gate().grid();
  for (std::int64_t ts : signal) {
    for (std::int64_t ti : idler) {
      if (window.contains(ti - ts)) ++out[ti - ts];
    }
  }
  return out;
}

DensityMatrix window_averaged_state(const ImperfectionModel& m, const PulseSchedule& sched,
                                    const CoincidenceWindow& window) {
  auto dist = delay_distribution(sched, window);
  if (dist.empty()) {
    throw std::invalid_argument("no grid-time pair falls in the coincidence window");
  }
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(4, 4);
  double total = 0.0;
  for (const auto& [delay, mult] : dist) {
    double storage = static_cast<double>(std::max<std::int64_t>(delay, 0));
    acc += static_cast<double>(mult) * noisy_joint_state(m, m.phase, storage).matrix();
    total += static_cast<double>(mult);
  }
  acc /= total;
  acc = (0.5 * (acc + acc.adjoint())).eval();
  return DensityMatrix(std::move(acc));
}

double analytic_pipeline_fidelity(const ImperfectionModel& m, double delay_ns,
                                  CoherenceSplit split) {
  DensityMatrix joint = noisy_joint_state(m, m.phase, delay_ns);
  return entanglement_fidelity_bound(
      reconstruct_density(born_table(joint, Basis::kRectilinear, m.phase),
                          born_table(joint, Basis::kDiagonal, m.phase), split)
          .rho);
}

double analytic_window_fidelity(const ImperfectionModel& m, const PulseSchedule& sched,
                                const CoincidenceWindow& window, CoherenceSplit split) {
  DensityMatrix joint = window_averaged_state(m, sched, window);
  return entanglement_fidelity_bound(
      reconstruct_density(born_table(joint, Basis::kRectilinear, m.phase),
                          born_table(joint, Basis::kDiagonal, m.phase), split)
          .rho);
}

double calibrate_tau(ImperfectionModel m, double delay_ns, double target_fidelity) {
  auto f_at = [&](double tau) {
    m.decoherence.tau_ns = tau;
    return analytic_pipeline_fidelity(m, delay_ns);
  };
  double lo = std::max(delay_ns, 1.0) * 1e-3;
  double hi = std::max(delay_ns, 1.0) * 1e6;
  if (!(f_at(lo) <= target_fidelity && f_at(hi) >= target_fidelity)) {
    throw PhysicsError("calibrate_tau: target fidelity not reachable by any tau");
  }
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-14; ++it) {
    double mid = std::sqrt(lo * hi);
    (f_at(mid) < target_fidelity ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace dlcz
