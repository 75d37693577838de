#include "dlcz/memory.h"

#include <cmath>
#include <sstream>

namespace dlcz {
namespace {

DensityMatrix scale_coherence(const DensityMatrix& rho, double factor) {
  Eigen::MatrixXcd m = rho.matrix();
  m(0, 1) *= factor;
  m(1, 0) *= factor;
  return DensityMatrix(std::move(m));
}

}  // namespace

void DecoherenceModel::validate() const {
  if (!(tau_ns > 0.0)) {
    throw PhysicsError("decoherence time tau must be positive");
  }
}

double DecoherenceModel::coherence_factor(double storage_ns) const {
  if (!(storage_ns >= 0.0)) {
    throw PhysicsError("storage time must be non-negative");
  }
  if (std::isinf(tau_ns)) return 1.0;
  double x = storage_ns / tau_ns;
  return shape == DecayShape::kExponential ? std::exp(-x) : std::exp(-x * x);
}

MemoryQubit::MemoryQubit(DensityMatrix rho, double prepared_at_ns)
    : initial_(rho), rho_(std::move(rho)), prepared_at_(prepared_at_ns),
      evolved_to_(prepared_at_ns) {
  if (rho_.dim() != 2) {
    throw DimensionError("memory qubit must be two-dimensional");
  }
  if (!std::isfinite(prepared_at_ns)) {
    throw PhysicsError("preparation time must be finite");
  }
}

MemoryQubit prepare_from_signal(const AnalyzerSetting& signal_setting, double eta_s, double t_ns) {
  Eigen::VectorXcd v(2);
  v(0) = std::polar(std::cos(signal_setting.theta()), -signal_setting.phi());
  v(1) = std::polar(std::sin(signal_setting.theta()), eta_s);
  return MemoryQubit(DensityMatrix::pure(StateVector::normalized(std::move(v))), t_ns);
}

MemoryQubit decohere(const MemoryQubit& qubit, const DecoherenceModel& model, double t_now_ns) {
  model.validate();
  if (t_now_ns < qubit.prepared_at_) {
    std::ostringstream msg;
    msg << "time reversal: t_now = " << t_now_ns << " ns precedes preparation at "
        << qubit.prepared_at_ << " ns";
    throw PhysicsError(msg.str());
  }
  if (t_now_ns < qubit.evolved_to_) {
    throw PhysicsError("time reversal: qubit already propagated past t_now");
  }
  if (qubit.decay_model_ && !(*qubit.decay_model_ == model)) {
    throw PhysicsError("qubit was already decohered with a different model");
  }
  MemoryQubit out = qubit;
  out.decay_model_ = model;
  out.evolved_to_ = t_now_ns;
  if (model.shape == DecayShape::kExponential) {
    out.rho_ = scale_coherence(qubit.rho_,
                               model.coherence_factor(t_now_ns - qubit.evolved_to_));
  } else {
    out.rho_ = scale_coherence(qubit.initial_,
                               model.coherence_factor(t_now_ns - qubit.prepared_at_));
  }
  return out;
}

MemoryQubit apply_storage_imperfection(const MemoryQubit& qubit, double v_pop, double v_coh) {
  if (!(v_pop >= 0.0 && v_pop <= 1.0 && v_coh >= 0.0 && v_coh <= 1.0)) {
    throw PhysicsError("visibilities must lie in [0, 1]");
  }
  if (qubit.evolved_to_ != qubit.prepared_at_) {
    throw PhysicsError("storage imperfection must be applied before decay");
  }
  const double flip = (1.0 - v_pop) / 2.0;
  const Eigen::MatrixXcd& r = qubit.rho_.matrix();
  Eigen::MatrixXcd m(2, 2);
  m(0, 0) = (1.0 - flip) * r(0, 0) + flip * r(1, 1);
  m(1, 1) = (1.0 - flip) * r(1, 1) + flip * r(0, 0);
  m(0, 1) = v_coh * (1.0 - flip) * r(0, 1);
  m(1, 0) = std::conj(m(0, 1));
  MemoryQubit out(DensityMatrix(std::move(m)), qubit.prepared_at_);
  return out;
}

void ReadoutParams::validate() const {
  if (!(xi >= 0.0 && xi <= 1.0)) {
    throw PhysicsError("read-out efficiency xi must lie in [0, 1]");
  }
  if (!std::isfinite(eta_i)) {
    throw PhysicsError("idler phase must be finite");
  }
}

DensityMatrix readout_map(const DensityMatrix& memory, double eta_i) {
  if (memory.dim() != 2) {
    throw DimensionError("read-out expects a memory qubit");
  }
  Eigen::Matrix2cd map = Eigen::Matrix2cd::Zero();
  map(0, 0) = 1.0;
  map(1, 1) = std::polar(1.0, eta_i);
  return apply_unitary(map, memory);
}

std::optional<DensityMatrix> read_out(const MemoryQubit& qubit, const ReadoutParams& params,
                                      double u) {
  params.validate();
  if (!(u < params.xi)) return std::nullopt;
  return readout_map(qubit.rho(), params.eta_i);
}

}  // namespace dlcz
