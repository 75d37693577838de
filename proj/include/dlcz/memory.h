#ifndef DLCZ_MEMORY_H_
#define DLCZ_MEMORY_H_

// Heralded preparation, storage and read-out of the collective-excitation
// memory qubit. Memory states live on the ordered basis {|L_a>, |R_a>}.

#include <optional>

#include "dlcz/optics.h"
#include "dlcz/qstate.h"

namespace dlcz {

enum class DecayShape { kExponential, kGaussian };

/// Decay of the |L_a>-|R_a> coherence with storage time.
///   exponential: d(t) = exp(-t / tau)
///   gaussian:    d(t) = exp(-(t / tau)^2)
/// An infinite tau disables decoherence.
struct DecoherenceModel {
  double tau_ns = 150.0;
  DecayShape shape = DecayShape::kGaussian;

  void validate() const;
  /// Coherence factor after `storage_ns` >= 0 of storage.
  double coherence_factor(double storage_ns) const;

  friend bool operator==(const DecoherenceModel&, const DecoherenceModel&) = default;
};

class MemoryQubit {
 public:
  MemoryQubit(DensityMatrix rho, double prepared_at_ns);

  const DensityMatrix& rho() const { return rho_; }
  double prepared_at() const { return prepared_at_; }
  /// Latest time the state has been propagated to.
  double evolved_to() const { return evolved_to_; }

 private:
  friend MemoryQubit decohere(const MemoryQubit&, const DecoherenceModel&, double);
  friend MemoryQubit apply_storage_imperfection(const MemoryQubit&, double, double);

  DensityMatrix initial_;  // state at prepared_at, before any decay
  DensityMatrix rho_;
  double prepared_at_;
  double evolved_to_;
  std::optional<DecoherenceModel> decay_model_;
};

/// Projects the memory onto the state heralded by a D1 click behind the
/// given signal analyzer: cos(theta) e^{-i phi}|L_a> + sin(theta) e^{i eta_s}|R_a>.
MemoryQubit prepare_from_signal(const AnalyzerSetting& signal_setting, double eta_s, double t_ns);

/// Propagates the qubit to `t_now_ns`. Only off-diagonal elements change.
///
/// Exponential decay is applied incrementally from evolved_to(), so repeated
/// calls compose. Gaussian decay is always evaluated once from prepared_at()
/// against the state recorded at preparation. A qubit keeps the first model
/// it was decohered with; passing a different one throws PhysicsError, as
/// does t_now_ns < evolved_to().
MemoryQubit decohere(const MemoryQubit& qubit, const DecoherenceModel& model, double t_now_ns);

/// Preparation-time imperfection channel: populations flip L_a <-> R_a with
/// probability (1 - v_pop) / 2 and the coherence is scaled by
/// v_coh * (1 + v_pop) / 2. Must be applied before any decay.
MemoryQubit apply_storage_imperfection(const MemoryQubit& qubit, double v_pop, double v_coh);

struct ReadoutParams {
  double xi = 1.0;
  double eta_i = 0.0;

  void validate() const;
};

/// Idler polarization state after read-out (|L_a> -> |H>, |R_a> -> e^{i eta_i}|V>).
DensityMatrix readout_map(const DensityMatrix& memory, double eta_i);

/// Returns the idler state when `u` < xi, otherwise no idler photon.
std::optional<DensityMatrix> read_out(const MemoryQubit& qubit, const ReadoutParams& params,
                                      double u);

}  // namespace dlcz

#endif  // DLCZ_MEMORY_H_
