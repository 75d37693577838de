#include "dlcz/simkernel.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <thread>

#include "dlcz/rng.h"

namespace dlcz {
namespace {

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream msg;
    msg << name << " = " << v << " outside [0, 1]";
    throw PhysicsError(msg.str());
  }
}

std::size_t grid_index(double u, std::size_t n) {
  return std::min(static_cast<std::size_t>(u * static_cast<double>(n)), n - 1);
}

// Per-(model, schedule, settings) tables shared by every trial of a run.
class TrialKernel {
 public:
  TrialKernel(const ImperfectionModel& m, const PulseSchedule& sched, const SettingsPair& settings)
      : model_(m) {
    m.validate();
    sched.validate();
    signal_grid_ = sched.signal_gate().grid();
    idler_grid_ = sched.idler_gate().grid();
    min_delay_ = idler_grid_.front() - signal_grid_.back();
    std::int64_t max_delay = idler_grid_.back() - signal_grid_.front();
    p_pass_.reserve(static_cast<std::size_t>((max_delay - min_delay_) / 2 + 1));
    for (std::int64_t d = min_delay_; d <= max_delay; d += 2) {
      double storage = static_cast<double>(std::max<std::int64_t>(d, 0));
      DensityMatrix joint = noisy_joint_state(m, m.phase, storage);
      p_pass_.push_back(conditional_pass_probability(joint, settings));
    }
    d1_ = DetectorParams{1.0, m.dark_d1};
    d2_ = DetectorParams{m.beta, m.dark_d2};
    d3_ = DetectorParams{m.beta, m.dark_d3};
    p_signal_ = m.n_s * m.alpha;
  }

  void run(std::uint64_t seed, std::uint64_t trial_index, std::vector<ClickRecord>& out) const {
    SplitMix64 rng(seed);
    std::array<double, kDrawsPerTrial> u;
    for (auto& x : u) x = rng.uniform();

    const std::size_t ns = signal_grid_.size();
    const std::size_t ni = idler_grid_.size();

    ClickCause d1 = detect(p_signal_, d1_, {u[0], u[1]});
    std::int64_t t_signal = signal_grid_[grid_index(u[2], ns)];
    std::int64_t t_d1_dark = signal_grid_[grid_index(u[3], ns)];

    bool idler_present = d1 == ClickCause::kPhoton && u[4] < model_.xi;
    std::int64_t t_idler = idler_grid_[grid_index(u[6], ni)];
    bool idler_passes = false;
    if (idler_present) {
      auto k = static_cast<std::size_t>((t_idler - t_signal - min_delay_) / 2);
      idler_passes = u[5] < p_pass_[k];
    }

    ClickCause d2 = detect(idler_present && idler_passes ? 1.0 : 0.0, d2_, {u[7], u[8]});
    std::int64_t t_d2_dark = idler_grid_[grid_index(u[9], ni)];
    ClickCause d3 = detect(idler_present && !idler_passes ? 1.0 : 0.0, d3_, {u[10], u[11]});
    std::int64_t t_d3_dark = idler_grid_[grid_index(u[12], ni)];

    auto emit = [&](Channel c, ClickCause cause, std::int64_t photon_t, std::int64_t dark_t) {
      if (cause == ClickCause::kNone) return;
      std::int64_t t = cause == ClickCause::kPhoton ? photon_t : dark_t;
      out.push_back({trial_index, c, static_cast<std::uint32_t>(t)});
    };
    emit(Channel::kD1, d1, t_signal, t_d1_dark);
    emit(Channel::kD2, d2, t_idler, t_d2_dark);
    emit(Channel::kD3, d3, t_idler, t_d3_dark);
  }

 private:
  ImperfectionModel model_;
  std::vector<std::int64_t> signal_grid_;
  std::vector<std::int64_t> idler_grid_;
  std::int64_t min_delay_ = 0;
  std::vector<double> p_pass_;
  DetectorParams d1_, d2_, d3_;
  double p_signal_ = 0.0;
};

}  // namespace

void ImperfectionModel::validate() const {
  require_unit_interval(v_pop, "v_pop");
  require_unit_interval(v_coh, "v_coh");
  require_unit_interval(background, "background");
  require_unit_interval(alpha, "alpha");
  require_unit_interval(beta, "beta");
  require_unit_interval(xi, "xi");
  require_unit_interval(n_s, "n_s");
  require_unit_interval(dark_d1, "dark_d1");
  require_unit_interval(dark_d2, "dark_d2");
  require_unit_interval(dark_d3, "dark_d3");
  if (!std::isfinite(phase)) {
    throw PhysicsError("phase must be finite");
  }
  decoherence.validate();
}

std::vector<std::int64_t> GateInterval::grid() const {
  std::vector<std::int64_t> out;
  std::int64_t t = lo;
  if (t % 2 != 0) ++t;
  for (; t < hi; t += 2) out.push_back(t);
  return out;
}

void PulseSchedule::validate() const {
  if (!(rep_rate_hz > 0.0) || !std::isfinite(rep_rate_hz)) {
    throw PhysicsError("repetition rate must be positive");
  }
  if (write_len_ns <= 0 || read_len_ns <= 0 || delta_t_ns <= 0) {
    throw PhysicsError("pulse lengths and delta_t must be positive");
  }
  if (signal_gate_ns < 2 || idler_gate_ns < 2 || signal_gate_ns % 2 != 0 ||
      idler_gate_ns % 2 != 0) {
    throw PhysicsError("gate widths must be positive multiples of 2 ns");
  }
  if (read_center_ns() - idler_gate_ns / 2 < 0) {
    throw PhysicsError("idler gate would open before the trial starts");
  }
  if (idler_gate().hi > static_cast<std::int64_t>(std::numeric_limits<std::uint32_t>::max())) {
    throw PhysicsError("idler gate exceeds the 32-bit time range");
  }
}

GateInterval PulseSchedule::signal_gate() const { return {0, signal_gate_ns}; }

GateInterval PulseSchedule::idler_gate() const {
  return {read_center_ns() - idler_gate_ns / 2, read_center_ns() + idler_gate_ns / 2};
}

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::kD1:
      return "D1";
    case Channel::kD2:
      return "D2";
    case Channel::kD3:
      return "D3";
  }
  return "?";
}

DensityMatrix noisy_joint_state(const ImperfectionModel& m, double eta, double delay_ns) {
  m.validate();
  if (!std::isfinite(eta)) {
    throw PhysicsError("phase must be finite");
  }
  const double d = m.decoherence.coherence_factor(delay_ns);
  const double b = m.background;
  const double even = (1.0 + m.v_pop) / 4.0;
  const double odd = (1.0 - m.v_pop) / 4.0;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(4, 4);
  rho(kIndexHH, kIndexHH) = (1.0 - b) * even + b / 4.0;
  rho(kIndexHV, kIndexHV) = (1.0 - b) * odd + b / 4.0;
  rho(kIndexVH, kIndexVH) = (1.0 - b) * odd + b / 4.0;
  rho(kIndexVV, kIndexVV) = (1.0 - b) * even + b / 4.0;
  Complex c = std::polar((1.0 - b) * d * m.v_coh * even, -eta);
  rho(kIndexHH, kIndexVV) = c;
  rho(kIndexVV, kIndexHH) = std::conj(c);
  return DensityMatrix(std::move(rho));
}

ConditionalIdler condition_on_signal(const DensityMatrix& joint, const AnalyzerSetting& signal) {
  if (joint.dim() != 4) {
    throw DimensionError("condition_on_signal expects a two-photon state");
  }
  StateVector k = analyzer_ket(signal);
  Eigen::MatrixXcd idler = Eigen::MatrixXcd::Zero(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int ip = 0; ip < 2; ++ip) {
      Complex acc = 0.0;
      for (int s = 0; s < 2; ++s) {
        for (int sp = 0; sp < 2; ++sp) {
          acc += std::conj(k[s]) * joint(2 * s + i, 2 * sp + ip) * k[sp];
        }
      }
      idler(i, ip) = acc;
    }
  }
  double p = idler.trace().real();
  if (!(p > 0.0)) {
    throw PhysicsError("signal analyzer transmits nothing for this state");
  }
  idler /= p;
  idler = (0.5 * (idler + idler.adjoint())).eval();
  return {p, DensityMatrix(std::move(idler))};
}

double conditional_pass_probability(const DensityMatrix& joint, const SettingsPair& settings) {
  return measure_polarization(condition_on_signal(joint, settings.signal).idler, settings.idler)
      .p_pass;
}

DensityMatrix memory_path_idler_state(const ImperfectionModel& m, const AnalyzerSetting& signal,
                                      double eta_s, double eta_i, double delay_ns) {
  m.validate();
  if (m.background != 0.0) {
    throw PhysicsError("the memory route has no counterpart for background noise");
  }
  MemoryQubit q = prepare_from_signal(signal, eta_s, 0.0);
  q = apply_storage_imperfection(q, m.v_pop, m.v_coh);
  q = decohere(q, m.decoherence, delay_ns);
  return readout_map(q.rho(), eta_i);
}

std::vector<ClickRecord> run_trial(const ImperfectionModel& m, const PulseSchedule& sched,
                                   const SettingsPair& settings, std::uint64_t seed,
                                   std::uint64_t trial_index) {
  TrialKernel kernel(m, sched, settings);
  std::vector<ClickRecord> out;
  kernel.run(seed, trial_index, out);
  return out;
}

std::vector<ClickRecord> run_experiment(const ImperfectionModel& m, const PulseSchedule& sched,
                                        const SettingsPair& settings, std::uint64_t n_trials,
                                        std::uint64_t master_seed, unsigned threads) {
  if (n_trials < 1) {
    throw std::invalid_argument("run_experiment needs at least one trial");
  }
  const TrialKernel kernel(m, sched, settings);
  threads = std::max(1u, threads);
  if (threads == 1 || n_trials < 2 * threads) {
    std::vector<ClickRecord> out;
    for (std::uint64_t i = 0; i < n_trials; ++i) {
      kernel.run(split_seed(master_seed, i), i, out);
    }
    return out;
  }
  std::vector<std::vector<ClickRecord>> chunks(threads);
  std::vector<std::thread> workers;
  const std::uint64_t per = (n_trials + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      const std::uint64_t begin = w * per;
      const std::uint64_t end = std::min(n_trials, begin + per);
      for (std::uint64_t i = begin; i < end; ++i) {
        kernel.run(split_seed(master_seed, i), i, chunks[w]);
      }
    });
  }
  for (auto& t : workers) t.join();
  std::vector<ClickRecord> out;
  for (auto& c : chunks) out.insert(out.end(), c.begin(), c.end());
  return out;
}

}  // namespace dlcz
