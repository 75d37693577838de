#ifndef DLCZ_SIMKERNEL_H_
#define DLCZ_SIMKERNEL_H_

// Monte Carlo generation of gated detector clicks for one memory node.
//
// Trial-local timeline (integer ns): the 250 ns signal gate opens at t = 0
// and is centered on the write pulse. The read pulse is centered delta_t
// after the write pulse center, and the idler gate is centered on it. Click
// times fall on the 2 ns analyzer grid (even integers) inside their gate.

#include <cstdint>
#include <limits>
#include <vector>

#include "dlcz/memory.h"
#include "dlcz/optics.h"
#include "dlcz/qstate.h"

namespace dlcz {

/// Parametric imperfection model of the node.
struct ImperfectionModel {
  double v_pop = 1.0;       // population-correlation visibility
  double v_coh = 1.0;       // coherence visibility
  double background = 0.0;  // white-noise mixing fraction
  double alpha = 1.0;       // signal arm transmission x detection
  double beta = 1.0;        // idler arm transmission x detection
  double xi = 1.0;          // atom-to-photon transfer efficiency
  double n_s = 1.0;         // forward-scattered signal photons per pulse
  double phase = 0.0;       // eta_s + eta_i of the signal-idler state
  DecoherenceModel decoherence{std::numeric_limits<double>::infinity(), DecayShape::kGaussian};
  double dark_d1 = 0.0;  // per-gate dark click probabilities
  double dark_d2 = 0.0;
  double dark_d3 = 0.0;

  /// Throws PhysicsError for out-of-range parameters.
  void validate() const;
};

struct GateInterval {
  std::int64_t lo;  // inclusive
  std::int64_t hi;  // exclusive

  bool contains(std::int64_t t) const { return t >= lo && t < hi; }
  /// Even (2 ns grid) times inside the interval.
  std::vector<std::int64_t> grid() const;
};

struct PulseSchedule {
  double rep_rate_hz = 4.7e5;
  std::int64_t write_len_ns = 140;
  std::int64_t read_len_ns = 115;
  std::int64_t delta_t_ns = 100;  // write-center to read-center delay
  std::int64_t signal_gate_ns = 250;
  std::int64_t idler_gate_ns = 140;

  void validate() const;
  std::int64_t write_center_ns() const { return signal_gate_ns / 2; }
  std::int64_t read_center_ns() const { return write_center_ns() + delta_t_ns; }
  GateInterval signal_gate() const;
  GateInterval idler_gate() const;
};

enum class Channel : std::uint8_t { kD1 = 1, kD2 = 2, kD3 = 3 };

const char* channel_name(Channel c);

struct ClickRecord {
  std::uint64_t trial_index;
  Channel channel;
  std::uint32_t time_ns;

  friend bool operator==(const ClickRecord&, const ClickRecord&) = default;
};

struct SettingsPair {
  AnalyzerSetting signal;
  AnalyzerSetting idler;
};

/// (1 - b) rho_core + b I/4 with rho_core diagonal
/// ((1+V_p)/4, (1-V_p)/4, (1-V_p)/4, (1+V_p)/4) and a single HH-VV coherence
/// of magnitude d(delay) V_c (1+V_p)/4. The coherence phase follows the Bell
/// state (|HH> + e^{i eta}|VV>)/sqrt(2): <HH|rho|VV> carries e^{-i eta}.
DensityMatrix noisy_joint_state(const ImperfectionModel& m, double eta, double delay_ns);

/// Idler state conditioned on the signal passing its analyzer.
struct ConditionalIdler {
  double p_signal;  // probability of the signal passing
  DensityMatrix idler;
};
ConditionalIdler condition_on_signal(const DensityMatrix& joint, const AnalyzerSetting& signal);

/// P(idler passes | signal passes) by the Born rule.
double conditional_pass_probability(const DensityMatrix& joint, const SettingsPair& settings);

/// Same quantity computed through the memory: heralded preparation, the
/// preparation imperfection channel (v_pop, v_coh), decay over `delay_ns`
/// and read-out. Valid for background = 0, where it coincides with the
/// two-photon route for phase = eta_s + eta_i.
DensityMatrix memory_path_idler_state(const ImperfectionModel& m, const AnalyzerSetting& signal,
                                      double eta_s, double eta_i, double delay_ns);

/// Uniform draws consumed by one trial, in this order:
///   0,1  D1 detector draws (photon p = n_s * alpha, dark_d1)
///   2    D1 photon click time      3  D1 dark click time
///   4    read-out success (xi)     5  idler polarization (pass if < P_pass)
///   6    idler photon arrival time
///   7,8  D2 detector draws (efficiency beta, dark_d2)   9  D2 dark time
///   10,11 D3 detector draws (efficiency beta, dark_d3)  12 D3 dark time
/// An idler photon exists only after a photon-caused D1 click and a
/// successful read-out. Its polarization is sampled from the joint state at
/// the storage time t_idler - t_signal (clamped at zero).
inline constexpr int kDrawsPerTrial = 13;

std::vector<ClickRecord> run_trial(const ImperfectionModel& m, const PulseSchedule& sched,
                                   const SettingsPair& settings, std::uint64_t seed,
                                   std::uint64_t trial_index = 0);

/// Trials 0..n_trials-1 with seeds split_seed(master_seed, i). Output is
/// ordered by trial index and is identical for any thread count.
std::vector<ClickRecord> run_experiment(const ImperfectionModel& m, const PulseSchedule& sched,
                                        const SettingsPair& settings, std::uint64_t n_trials,
                                        std::uint64_t master_seed, unsigned threads = 1);

}  // namespace dlcz

#endif  // DLCZ_SIMKERNEL_H_
