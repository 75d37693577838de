#ifndef DLCZ_ANALYSIS_H_
#define DLCZ_ANALYSIS_H_

// Estimators on coincidence data: conditional-probability tables, fringe
// fits, two-basis density-matrix reconstruction, fidelities, classical
// limits and the rate algebra of the node.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlcz/simkernel.h"
#include "dlcz/tia.h"

namespace dlcz {

/// Analyzer bases of the correlation measurements.
///   kRectilinear: idler at theta_i = 0, signal rows at theta_s = 0 (H) and pi/2 (V).
///   kDiagonal:    idler at theta_i = pi/4, signal rows at theta_s = pi/4 (+)
///                 and 3 pi/4 (-), with phi_s = -phase compensating the
///                 signal-idler phase.
enum class Basis { kRectilinear, kDiagonal };

const char* basis_label(Basis basis);

struct BasisSettings {
  std::array<SettingsPair, 2> rows;  // row 0: signal "H"/"+", row 1: "V"/"-"
};

BasisSettings max_correlation_settings(Basis basis, double phase);

/// Conditional probabilities P(idler column | signal row). Column 0 is the
/// idler analyzer's transmitted port (D2), column 1 the reflected port (D3).
struct CorrelationTable {
  std::string basis_label;
  std::array<std::array<std::uint64_t, 2>, 2> counts{};
  std::array<std::array<double, 2>, 2> probs{};
  std::array<std::array<double, 2>, 2> errors{};  // one-sigma binomial
  std::array<bool, 2> row_defined{true, true};

  static CorrelationTable from_counts(std::string label,
                                      const std::array<std::array<std::uint64_t, 2>, 2>& counts);
  /// Table without counts (analytic or quoted values); errors default to 0.
  static CorrelationTable from_probabilities(
      std::string label, const std::array<std::array<double, 2>, 2>& probs,
      const std::array<std::array<double, 2>, 2>& errors = {});

  std::uint64_t row_total(int row) const { return counts[row][0] + counts[row][1]; }
  bool complete() const { return row_defined[0] && row_defined[1]; }
};

/// Builds a table from the coincidences of the two signal-row runs.
CorrelationTable conditional_probabilities(std::span<const CoincidenceEvent> row0,
                                           std::span<const CoincidenceEvent> row1,
                                           std::string label);

/// Born-rule table for `joint` measured at the basis' maximum-correlation
/// settings.
CorrelationTable born_table(const DensityMatrix& joint, Basis basis, double phase);

struct FringeFit {
  double visibility;      // clipped to [0, 1]
  double raw_visibility;  // unclipped least-squares value
  double visibility_error;
  double residual;        // weighted sum of squared residuals
};

/// Weighted least squares of p(theta) = (1 + V cos 2(theta - theta0)) / 2
/// with V the only free parameter. Weights are 1 / sigma^2 of each point
/// (empty span: unit weights). Needs at least three points spanning at
/// least pi/2 in theta; throws std::invalid_argument otherwise.
FringeFit fringe_fit(std::span<const double> theta, std::span<const double> p,
                     std::span<const double> weights, double theta0 = 0.0);

enum class CoherenceSplit {
  kConservative,  // give c23 as much of the fringe amplitude as positivity allows
  kOptimistic,    // c23 = 0
};

struct Reconstruction {
  DensityMatrix rho;
  double fringe_amplitude;  // C = (P(+|+) + P(-|-))/2 - 1/2
  double c14;               // HH-VV coherence before any repair
  double c23;               // HV-VH coherence before any repair
  double raw_min_eigenvalue;
  bool psd_repaired;
};

/// Linear inversion from the two bases assuming equiprobable signal rows.
/// The diagonal comes from the rectilinear table; C = c14 + c23 from the
/// diagonal table. Throws PhysicsError when |C| exceeds the positivity bound
/// sqrt(r11 r44) + sqrt(r22 r33) by more than three standard errors of C.
/// Negative eigenvalues below -1e-10 are clipped and the trace renormalized;
/// psd_repaired reports it.
Reconstruction reconstruct_density(const CorrelationTable& rectilinear,
                                   const CorrelationTable& diagonal,
                                   CoherenceSplit split = CoherenceSplit::kConservative);

/// max over eta of <Psi_M(eta)|rho|Psi_M(eta)> = (r11 + r44)/2 + |r14|.
double entanglement_fidelity_bound(const DensityMatrix& rho);

/// Lower of the two maximum-correlation probabilities of a table.
double state_fidelity_from_table(const CorrelationTable& table);

enum class FidelityKind { kStateTransfer, kEntanglement };

struct ClassicalVerdict {
  bool exceeds;
  double bound;
  double margin;  // f - bound
};

/// Classical limits: 2/3 for state transfer, 1/2 for entanglement.
ClassicalVerdict classical_bound_check(double f, FidelityKind kind);

struct RateReport {
  double r_s;           // heralds per second
  double r_si;          // signal-idler coincidences per second
  double zeta;          // idler detection probability per herald
  double n_s_inferred;  // r_s / (alpha R)
  double r_2;           // two-node rate (zeta alpha n_s)^2 R
};

/// Closed-form rates: r_s = alpha n_s R, zeta = beta xi, r_si = zeta r_s,
/// r_2 = (beta xi alpha n_s)^2 R.
RateReport rates(const ImperfectionModel& m, const PulseSchedule& sched);

/// Rates from measured counts over `n_trials` pulses.
RateReport rates_from_counts(std::uint64_t heralds, std::uint64_t coincidences,
                             std::uint64_t n_trials, double alpha, double rep_rate_hz);

/// Coincidences of the four maximum-correlation runs.
struct BasisRuns {
  std::array<std::vector<CoincidenceEvent>, 2> rectilinear;
  std::array<std::vector<CoincidenceEvent>, 2> diagonal;
};

using TablesBuilder =
    std::function<std::pair<CorrelationTable, CorrelationTable>(const CoincidenceWindow&)>;

/// Tables from the events of `runs` whose delay lies in the given window.
TablesBuilder tables_from_runs(const BasisRuns& runs);

enum class ErrorMethod { kLinearized, kBootstrap };

struct FidelityOptions {
  CoherenceSplit split = CoherenceSplit::kConservative;
  ErrorMethod error_method = ErrorMethod::kLinearized;
  int bootstrap_resamples = 1000;
  std::uint64_t bootstrap_seed = 1;
};

struct FidelityEstimate {
  double value;
  double error;
};

/// Pipeline fidelity (reconstruct_density + entanglement_fidelity_bound) with
/// a statistical error from the tables' binomial errors.
FidelityEstimate entanglement_fidelity_estimate(const CorrelationTable& rectilinear,
                                                const CorrelationTable& diagonal,
                                                const FidelityOptions& options = {});

struct BinnedFidelity {
  CoincidenceWindow bin;
  std::optional<double> f_si;  // empty when a table row has no counts
  std::optional<double> error;
  bool below_threshold;        // error bar reaches down to 1/2, or no value
};

/// Splits the window into quarters and estimates the entanglement fidelity
/// of each.
std::vector<BinnedFidelity> time_binned_fidelity(const CoincidenceWindow& window,
                                                 const TablesBuilder& tables,
                                                 const FidelityOptions& options = {});

/// Multiplicity of each storage delay among (signal, idler) grid-time pairs
/// that land in the window. Clicks are uniform on the gate grids.
std::map<std::int64_t, std::uint64_t> delay_distribution(const PulseSchedule& sched,
                                                         const CoincidenceWindow& window);

/// Joint state averaged over the delay distribution of coincidences in the
/// window (dark counts excluded).
DensityMatrix window_averaged_state(const ImperfectionModel& m, const PulseSchedule& sched,
                                    const CoincidenceWindow& window);

/// Noiseless-statistics pipeline fidelity at a fixed storage delay.
double analytic_pipeline_fidelity(const ImperfectionModel& m, double delay_ns,
                                  CoherenceSplit split = CoherenceSplit::kConservative);

/// Same, averaged over the coincidence window of a schedule.
double analytic_window_fidelity(const ImperfectionModel& m, const PulseSchedule& sched,
                                const CoincidenceWindow& window,
                                CoherenceSplit split = CoherenceSplit::kConservative);

/// Decoherence time at which analytic_pipeline_fidelity(m, delay) equals
/// target (bisection over tau; m.decoherence.shape is kept).
double calibrate_tau(ImperfectionModel m, double delay_ns, double target_fidelity);

}  // namespace dlcz

#endif  // DLCZ_ANALYSIS_H_
