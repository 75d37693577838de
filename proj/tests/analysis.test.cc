#include "dlcz/analysis.h"

#include <cmath>
#include <numbers>
#include <random>

#include "dlcz/rng.h"
#include "gtest/gtest.h"
#include "test_util.h"

using namespace dlcz;
using dlcz::testing::is_valid_density;
using dlcz::testing::random_density;
using dlcz::testing::random_state;

namespace {

constexpr double kPi = std::numbers::pi;

using Counts = std::array<std::array<std::uint64_t, 2>, 2>;
using Probs = std::array<std::array<double, 2>, 2>;

const Counts kMeasuredRect = {{{92, 8}, {12, 88}}};
const Counts kMeasuredDiag = {{{75, 25}, {19, 81}}};

std::vector<CoincidenceEvent> events_with(std::uint64_t d2, std::uint64_t d3) {
  std::vector<CoincidenceEvent> out;
  for (std::uint64_t k = 0; k < d2 + d3; ++k) {
    out.push_back({k, 0, k < d2 ? Channel::kD2 : Channel::kD3, 40, 40});
  }
  return out;
}

CorrelationTable table(const Probs& p, const char* label = "0") {
  return CorrelationTable::from_probabilities(label, p);
}

// Separable state: a random convex mixture of random product states.
DensityMatrix separable(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> terms(1, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = terms(rng);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(4, 4);
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    double w = unit(rng) + 1e-3;
    DensityMatrix prod = tensor(random_density(rng, 2), DensityMatrix::pure(random_state(rng, 2)));
    acc += w * prod.matrix();
    total += w;
  }
  acc /= total;
  acc = (0.5 * (acc + acc.adjoint())).eval();
  return DensityMatrix(acc);
}

}  // namespace

TEST(analysis, conditional_probabilities_examples) {
  auto t = conditional_probabilities(events_with(92, 8), events_with(12, 88), "0");
  EXPECT_EQ(t.counts, kMeasuredRect);
  EXPECT_DOUBLE_EQ(t.probs[0][0], 0.92);
  EXPECT_DOUBLE_EQ(t.probs[0][1], 0.08);
  EXPECT_DOUBLE_EQ(t.probs[1][0], 0.12);
  EXPECT_DOUBLE_EQ(t.probs[1][1], 0.88);
  EXPECT_NEAR(t.errors[0][0], std::sqrt(0.92 * 0.08 / 100), 1e-15);

  auto flat = CorrelationTable::from_counts("0", {{{50, 50}, {50, 50}}});
  for (auto& row : flat.probs) EXPECT_EQ(row, (std::array<double, 2>{0.5, 0.5}));

  auto perfect = CorrelationTable::from_counts("0", {{{1000, 0}, {0, 1000}}});
  EXPECT_EQ(perfect.probs[0][0], 1.0);
  EXPECT_EQ(perfect.probs[1][0], 0.0);
  EXPECT_EQ(perfect.errors[0][0], 0.0);
  EXPECT_EQ(perfect.errors[1][1], 0.0);
}

TEST(analysis, rows_sum_to_one) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> n(0, 100000);
  for (int k = 0; k < 500; ++k) {
    Counts c = {{{n(rng), n(rng) + 1}, {n(rng) + 1, n(rng)}}};
    auto t = CorrelationTable::from_counts("45", c);
    for (int r = 0; r < 2; ++r) {
      EXPECT_NEAR(t.probs[r][0] + t.probs[r][1], 1.0, 1e-12);
      const double p = double(c[r][0]) / double(c[r][0] + c[r][1]);
      EXPECT_NEAR(t.errors[r][0], std::sqrt(p * (1 - p) / double(c[r][0] + c[r][1])), 1e-15);
    }
  }
}

TEST(analysis, empty_row_is_flagged) {
  auto t = conditional_probabilities(events_with(3, 1), {}, "0");
  EXPECT_TRUE(t.row_defined[0]);
  EXPECT_FALSE(t.row_defined[1]);
  EXPECT_TRUE(std::isnan(t.probs[1][0]));
  EXPECT_FALSE(t.complete());
  EXPECT_THROW(state_fidelity_from_table(t), std::invalid_argument);
}

TEST(analysis, from_probabilities_validates) {
  EXPECT_THROW(table({{{0.7, 0.2}, {0.5, 0.5}}}), std::invalid_argument);
  EXPECT_THROW(table({{{1.2, -0.2}, {0.5, 0.5}}}), std::invalid_argument);
}

TEST(analysis, fringe_fit_synthetic) {
  std::vector<double> theta, p84, flat, cos2;
  for (int k = 0; k < 12; ++k) {
    double t = k * kPi / 12.0;
    theta.push_back(t);
    p84.push_back(0.5 * (1.0 + 0.84 * std::cos(2.0 * t)));
    flat.push_back(0.5);
    cos2.push_back(std::pow(std::cos(t), 2));
  }
  EXPECT_NEAR(fringe_fit(theta, p84, {}).visibility, 0.84, 1e-9);
  EXPECT_NEAR(fringe_fit(theta, flat, {}).visibility, 0.0, 1e-12);
  EXPECT_NEAR(fringe_fit(theta, cos2, {}).visibility, 1.0, 1e-12);
  EXPECT_NEAR(fringe_fit(theta, p84, {}).residual, 0.0, 1e-20);

  std::vector<double> shifted;
  for (double t : theta) shifted.push_back(0.5 * (1.0 + 0.6 * std::cos(2.0 * (t - kPi / 4.0))));
  EXPECT_NEAR(fringe_fit(theta, shifted, {}, kPi / 4.0).visibility, 0.6, 1e-12);
  EXPECT_NEAR(fringe_fit(theta, shifted, {}, 0.0).visibility, 0.0, 1e-12);
}

TEST(analysis, fringe_fit_errors) {
  std::vector<double> two = {0.0, 1.0}, p2 = {1.0, 0.5};
  EXPECT_THROW(fringe_fit(two, p2, {}), std::invalid_argument);
  std::vector<double> narrow = {0.0, 0.2, 0.4}, p3 = {1.0, 0.9, 0.8};
  EXPECT_THROW(fringe_fit(narrow, p3, {}), std::invalid_argument);
  std::vector<double> wide = {0.0, 1.0, 2.0}, bad = {0.5, NAN, 0.5};
  EXPECT_THROW(fringe_fit(wide, bad, {}), std::invalid_argument);
  std::vector<double> w = {1.0, 1.0};
  EXPECT_THROW(fringe_fit(wide, p3, w), std::invalid_argument);
}

TEST(analysis, fringe_fit_recovers_planted_visibility) {
  SplitMix64 rng(2);
  for (double v : {0.2, 0.5, 0.84, 1.0}) {
    std::vector<double> theta, p, w;
    const int n = 20000;
    for (int k = 0; k < 12; ++k) {
      double t = k * kPi / 12.0;
      double truth = 0.5 * (1.0 + v * std::cos(2.0 * t));
      std::binomial_distribution<int> draw(n, truth);
      int pass = draw(rng);
      double pr = (pass + 1.0) / (n + 2.0);
      theta.push_back(t);
      p.push_back(double(pass) / n);
      w.push_back((n + 2.0) / (pr * (1.0 - pr)));
    }
    FringeFit fit = fringe_fit(theta, p, w);
    EXPECT_NEAR(fit.raw_visibility, v, 3.0 * fit.visibility_error) << v;
    EXPECT_LE(fit.visibility, 1.0);
  }
}

TEST(analysis, state_fidelity_examples) {
  EXPECT_DOUBLE_EQ(state_fidelity_from_table(CorrelationTable::from_counts("0", kMeasuredRect)), 0.88);
  EXPECT_DOUBLE_EQ(state_fidelity_from_table(CorrelationTable::from_counts("45", kMeasuredDiag)), 0.75);
  EXPECT_EQ(state_fidelity_from_table(table({{{1.0, 0.0}, {0.0, 1.0}}})), 1.0);
}

TEST(analysis, reconstruct_ideal_tables) {
  Reconstruction r = reconstruct_density(table({{{1.0, 0.0}, {0.0, 1.0}}}),
                                         table({{{1.0, 0.0}, {0.0, 1.0}}}, "45"));
  DensityMatrix bell = DensityMatrix::pure(bell_state(0.0));
  EXPECT_LT((r.rho.matrix() - bell.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_FALSE(r.psd_repaired);
}

TEST(analysis, reconstruct_mixed_tables) {
  Reconstruction r = reconstruct_density(table({{{0.5, 0.5}, {0.5, 0.5}}}),
                                         table({{{0.5, 0.5}, {0.5, 0.5}}}, "45"));
  EXPECT_LT((r.rho.matrix() - 0.25 * Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(analysis, reconstruct_measured_tables) {
  auto rect = CorrelationTable::from_counts("0", kMeasuredRect);
  auto diag = CorrelationTable::from_counts("45", kMeasuredDiag);
  Reconstruction r = reconstruct_density(rect, diag);
  EXPECT_NEAR(r.rho(0, 0).real(), 0.46, 1e-12);
  EXPECT_NEAR(r.rho(1, 1).real(), 0.04, 1e-12);
  EXPECT_NEAR(r.rho(2, 2).real(), 0.06, 1e-12);
  EXPECT_NEAR(r.rho(3, 3).real(), 0.44, 1e-12);
  EXPECT_NEAR(r.fringe_amplitude, 0.28, 1e-12);
  // Hand arithmetic: c23 = sqrt(0.04 * 0.06), c14 = 0.28 - c23.
  EXPECT_NEAR(r.c23, std::sqrt(0.0024), 1e-12);
  EXPECT_NEAR(r.c14, 0.28 - std::sqrt(0.0024), 1e-12);
  EXPECT_GE(r.c14, 0.231);
  const double f = entanglement_fidelity_bound(r.rho);
  EXPECT_NEAR(f, 0.45 + 0.28 - std::sqrt(0.0024), 1e-12);
  EXPECT_NEAR(f, 0.681, 5e-4);
  EXPECT_FALSE(r.psd_repaired);
}

TEST(analysis, reconstruct_left_inverts_born_map) {
  // Forward: noisy_joint_state -> Born tables. Inverse recovers V_p and the
  // HH-VV coherence exactly when c23 has no room (V_p = 1) and the diagonal
  // always.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    ImperfectionModel m;
    m.v_pop = unit(rng);
    m.v_coh = unit(rng);
    DensityMatrix joint = noisy_joint_state(m, 0.0, 0.0);
    Reconstruction r = reconstruct_density(born_table(joint, Basis::kRectilinear, 0.0),
                                           born_table(joint, Basis::kDiagonal, 0.0));
    const double vp = 2.0 * (r.rho(0, 0).real() + r.rho(3, 3).real()) - 1.0;
    EXPECT_NEAR(vp, m.v_pop, 1e-12);
    EXPECT_NEAR(r.fringe_amplitude, m.v_coh * (1.0 + m.v_pop) / 4.0, 1e-12);
    Reconstruction opt = reconstruct_density(born_table(joint, Basis::kRectilinear, 0.0),
                                             born_table(joint, Basis::kDiagonal, 0.0),
                                             CoherenceSplit::kOptimistic);
    EXPECT_LT((opt.rho.matrix() - joint.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(analysis, reconstruct_rejects_inconsistent_tables) {
  // Rows always "H": r22 = r44 = 0, so no coherence is allowed at all.
  EXPECT_THROW(reconstruct_density(table({{{1.0, 0.0}, {1.0, 0.0}}}), table({{{1.0, 0.0}, {0.0, 1.0}}}, "45")),
               PhysicsError);
  EXPECT_THROW(reconstruct_density(table({{{1.0, 0.0}, {0.0, 1.0}}}), CorrelationTable::from_counts("45", {})),
               std::invalid_argument);
}

TEST(analysis, reconstruct_negative_fringe) {
  Reconstruction r = reconstruct_density(CorrelationTable::from_counts("0", kMeasuredRect),
                                         CorrelationTable::from_counts("45", {{{25, 75}, {81, 19}}}));
  EXPECT_NEAR(r.fringe_amplitude, -0.28, 1e-12);
  EXPECT_NEAR(entanglement_fidelity_bound(r.rho), 0.45 + 0.28 - std::sqrt(0.0024), 1e-12);
}

TEST(analysis, psd_repair_is_reported) {
  Reconstruction r = reconstruct_density(table({{{0.6, 0.4}, {0.4, 0.6}}}), table({{{0.9, 0.1}, {0.1, 0.9}}}, "45"),
                                         CoherenceSplit::kOptimistic);
  EXPECT_TRUE(r.psd_repaired);
  EXPECT_LT(r.raw_min_eigenvalue, -1e-10);
  EXPECT_TRUE(is_valid_density(r.rho.matrix()));

  // Within three standard errors of the bound the estimate is repaired,
  // beyond it the tables are rejected.
  // Bound here is sqrt(0.45 * 0.25) + sqrt(0.05 * 0.25) = 0.447 against C = 0.49.
  Probs rect = {{{0.9, 0.1}, {0.5, 0.5}}};
  Probs errs = {{{0.0, 0.0}, {0.0, 0.0}}};
  Probs diag_errs = {{{0.03, 0.03}, {0.03, 0.03}}};
  auto diag = CorrelationTable::from_probabilities("45", {{{0.99, 0.01}, {0.01, 0.99}}}, diag_errs);
  Reconstruction near = reconstruct_density(CorrelationTable::from_probabilities("0", rect, errs), diag);
  EXPECT_TRUE(near.psd_repaired);
  EXPECT_TRUE(is_valid_density(near.rho.matrix()));
  auto tight = CorrelationTable::from_probabilities("45", {{{0.99, 0.01}, {0.01, 0.99}}}, errs);
  EXPECT_THROW(reconstruct_density(CorrelationTable::from_probabilities("0", rect, errs), tight), PhysicsError);
}

TEST(analysis, fidelity_bound_examples) {
  for (double eta : {0.0, 1.0, kPi, 5.5}) {
    EXPECT_NEAR(entanglement_fidelity_bound(DensityMatrix::pure(bell_state(eta))), 1.0, 1e-12);
  }
  EXPECT_NEAR(entanglement_fidelity_bound(DensityMatrix::maximally_mixed(4)), 0.25, 1e-15);
  EXPECT_THROW(entanglement_fidelity_bound(DensityMatrix::maximally_mixed(2)), DimensionError);
}

TEST(analysis, fidelity_bound_is_max_over_phase) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    DensityMatrix rho = random_density(rng, 4);
    const double bound = entanglement_fidelity_bound(rho);
    EXPECT_LE(bound, 1.0 + 1e-12);
    double best = 0.0;
    for (int j = 0; j < 3600; ++j) best = std::max(best, fidelity(rho, bell_state(j * 2.0 * kPi / 3600)));
    EXPECT_GE(bound + 1e-12, best);
    EXPECT_NEAR(bound, best, 1e-5);
  }
}

TEST(analysis, separability_ceiling) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10000; ++k) {
    EXPECT_LE(entanglement_fidelity_bound(separable(rng)), 0.5 + 1e-9);
  }
}

TEST(analysis, classical_bound_examples) {
  ClassicalVerdict v = classical_bound_check(0.88, FidelityKind::kStateTransfer);
  EXPECT_TRUE(v.exceeds);
  EXPECT_NEAR(v.margin, 0.213, 5e-4);
  v = classical_bound_check(0.5, FidelityKind::kEntanglement);
  EXPECT_FALSE(v.exceeds);
  EXPECT_EQ(v.margin, 0.0);
  EXPECT_TRUE(classical_bound_check(0.63, FidelityKind::kEntanglement).exceeds);
  EXPECT_THROW(classical_bound_check(1.2, FidelityKind::kEntanglement), std::invalid_argument);
}

TEST(analysis, rates_at_lab_parameters) {
  ImperfectionModel m;
  m.alpha = 0.05;
  m.beta = 0.04;
  m.xi = 0.03;
  m.n_s = 0.014;
  PulseSchedule s;
  RateReport r = rates(m, s);
  // Independent arithmetic on the quoted factors.
  const double rs = 0.05 * 0.014 * 4.7e5;
  const double zeta = 0.04 * 0.03;
  EXPECT_NEAR(r.r_s, rs, 1e-12 * rs);
  EXPECT_NEAR(r.r_s, 329.0, 1e-9);
  EXPECT_NEAR(r.zeta, 1.2e-3, 1e-15);
  EXPECT_NEAR(r.r_si, zeta * rs, 1e-12);
  EXPECT_NEAR(r.r_si, 0.3948, 1e-12);
  EXPECT_NEAR(r.r_2, std::pow(0.04 * 0.03 * 0.05 * 0.014, 2) * 4.7e5, 1e-22);
  EXPECT_NEAR(r.r_2, 3.316e-7, 1e-10);
  EXPECT_NEAR(r.n_s_inferred, 0.014, 1e-15);
}

TEST(analysis, rates_from_counts) {
  RateReport r = rates_from_counts(700, 1, 1000000, 0.05, 4.7e5);
  EXPECT_NEAR(r.r_s, 700 / (1e6 / 4.7e5), 1e-9);
  EXPECT_NEAR(r.zeta, 1.0 / 700, 1e-15);
  EXPECT_NEAR(r.n_s_inferred, 700.0 / 1e6 / 0.05, 1e-15);
  EXPECT_THROW(rates_from_counts(1, 1, 0, 0.05, 4.7e5), std::invalid_argument);
}

TEST(analysis, max_correlation_compensates_phase) {
  ImperfectionModel m;
  m.v_pop = 0.8;
  m.v_coh = 0.64;
  for (double eta : {0.0, 0.7, 2.5, 4.0}) {
    m.phase = eta;
    DensityMatrix joint = noisy_joint_state(m, eta, 0.0);
    auto diag = born_table(joint, Basis::kDiagonal, eta);
    EXPECT_NEAR(diag.probs[0][0], 0.5 + 0.64 * 1.8 / 4.0, 1e-12);
    EXPECT_NEAR(diag.probs[1][1], 0.5 + 0.64 * 1.8 / 4.0, 1e-12);
    EXPECT_NEAR(analytic_pipeline_fidelity(m, 0.0), 0.9 / 2.0 + (0.64 * 1.8 / 4.0 - std::sqrt(0.05 * 0.05)), 1e-12);
  }
}

TEST(analysis, delay_distribution_enumeration) {
  PulseSchedule s;
  CoincidenceWindow w{0, 80};
  auto dist = delay_distribution(s, w);
  // Independent count: signal grid 0..248, idler grid 156..294.
  std::map<std::int64_t, std::uint64_t> oracle;
  for (std::int64_t ts = 0; ts < 250; ts += 2) {
    for (std::int64_t ti = 156; ti < 295; ti += 2) {
      if (ti - ts >= 0 && ti - ts < 80) ++oracle[ti - ts];
    }
  }
  EXPECT_EQ(dist, oracle);
}

TEST(analysis, window_average_without_decay_is_the_joint_state) {
  ImperfectionModel m;
  m.v_pop = 0.8;
  m.v_coh = 0.7;
  m.phase = 1.2;
  DensityMatrix avg = window_averaged_state(m, {}, {0, 80});
  EXPECT_LT((avg.matrix() - noisy_joint_state(m, 1.2, 0.0).matrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(window_averaged_state(m, {}, {1000, 1100}), std::invalid_argument);
}

TEST(analysis, calibrated_tau) {
  ImperfectionModel m;
  m.v_pop = 0.8;
  m.v_coh = 0.64;
  m.decoherence.shape = DecayShape::kGaussian;
  const double tau = calibrate_tau(m, 150.0, 0.5);
  m.decoherence.tau_ns = tau;
  EXPECT_NEAR(analytic_pipeline_fidelity(m, 150.0), 0.5, 1e-9);
  double prev = 1.0;
  for (double d = 0.0; d <= 300.0; d += 10.0) {
    double f = analytic_pipeline_fidelity(m, d);
    EXPECT_LE(f, prev + 1e-15);
    prev = f;
  }
  m.v_coh = 0.0;
  EXPECT_THROW(calibrate_tau(m, 150.0, 0.5), PhysicsError);
}

TEST(analysis, time_binned_noiseless_is_perfect) {
  ImperfectionModel m;
  PulseSchedule s;
  BasisRuns runs;
  auto settings_r = max_correlation_settings(Basis::kRectilinear, 0.0);
  auto settings_d = max_correlation_settings(Basis::kDiagonal, 0.0);
  const CoincidenceWindow w{0, 80};
  for (int row = 0; row < 2; ++row) {
    runs.rectilinear[row] = match_coincidences(gate(run_experiment(m, s, settings_r.rows[row], 20000, 10 + row), s), w);
    runs.diagonal[row] = match_coincidences(gate(run_experiment(m, s, settings_d.rows[row], 20000, 20 + row), s), w);
  }
  auto bins = time_binned_fidelity(w, tables_from_runs(runs));
  ASSERT_EQ(bins.size(), 4u);
  for (const auto& b : bins) {
    ASSERT_TRUE(b.f_si.has_value());
    EXPECT_NEAR(*b.f_si, 1.0, 1e-12);
    EXPECT_FALSE(b.below_threshold);
  }
}

TEST(analysis, time_binned_flags) {
  // Quarter 0 has no data; quarter 1 has a weak, noisy fidelity.
  BasisRuns runs;
  auto add = [](std::vector<CoincidenceEvent>& v, std::int64_t delay, Channel c, int n) {
    for (int k = 0; k < n; ++k) v.push_back({v.size(), 0, c, delay, delay});
  };
  add(runs.rectilinear[0], 30, Channel::kD2, 6);
  add(runs.rectilinear[0], 30, Channel::kD3, 4);
  add(runs.rectilinear[1], 30, Channel::kD3, 6);
  add(runs.rectilinear[1], 30, Channel::kD2, 4);
  add(runs.diagonal[0], 30, Channel::kD2, 6);
  add(runs.diagonal[0], 30, Channel::kD3, 4);
  add(runs.diagonal[1], 30, Channel::kD3, 6);
  add(runs.diagonal[1], 30, Channel::kD2, 4);
  auto bins = time_binned_fidelity({0, 80}, tables_from_runs(runs));
  EXPECT_FALSE(bins[0].f_si.has_value());
  EXPECT_TRUE(bins[0].below_threshold);
  ASSERT_TRUE(bins[1].f_si.has_value());
  EXPECT_TRUE(bins[1].below_threshold);
}

TEST(analysis, linearized_and_bootstrap_errors_agree) {
  auto rect = CorrelationTable::from_counts("0", {{{9200, 800}, {1200, 8800}}});
  auto diag = CorrelationTable::from_counts("45", {{{7500, 2500}, {1900, 8100}}});
  FidelityEstimate lin = entanglement_fidelity_estimate(rect, diag);
  FidelityOptions boot;
  boot.error_method = ErrorMethod::kBootstrap;
  boot.bootstrap_resamples = 2000;
  FidelityEstimate b = entanglement_fidelity_estimate(rect, diag, boot);
  EXPECT_EQ(lin.value, b.value);
  EXPECT_NEAR(b.error, lin.error, 0.15 * lin.error);
  // Closed-form gradient: F = (p_r0 + p_r1)/4 + (p_d0 + p_d1)/2 - 1/2 - sqrt(r22 r33).
  const double r22 = 0.5 * 0.08, r33 = 0.5 * 0.12;
  const double g_r0 = 0.25 + 0.25 * std::sqrt(r33 / r22);
  const double g_r1 = 0.25 + 0.25 * std::sqrt(r22 / r33);
  const double var = std::pow(g_r0 * rect.errors[0][0], 2) + std::pow(g_r1 * rect.errors[1][1], 2) +
                     std::pow(0.5 * diag.errors[0][0], 2) + std::pow(0.5 * diag.errors[1][1], 2);
  EXPECT_NEAR(lin.error, std::sqrt(var), 1e-6);
  FidelityOptions again = boot;
  EXPECT_EQ(entanglement_fidelity_estimate(rect, diag, again).error, b.error);
}
