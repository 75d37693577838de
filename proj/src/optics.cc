#include "dlcz/optics.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dlcz {
namespace {

double wrap(double angle, double period) {
  double r = std::fmod(angle, period);
  if (r < 0.0) r += period;
  // fmod can return `period` itself after the shift for tiny negatives.
  if (r >= period) r = 0.0;
  return r;
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw PhysicsError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

AnalyzerSetting::AnalyzerSetting(double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi)) {
    throw PhysicsError("analyzer angles must be finite");
  }
  theta_ = wrap(theta, std::numbers::pi);
  phi_ = wrap(phi, 2.0 * std::numbers::pi);
}

AnalyzerSetting AnalyzerSetting::orthogonal() const {
  return AnalyzerSetting(theta_ + std::numbers::pi / 2.0, phi_);
}

StateVector analyzer_ket(const AnalyzerSetting& setting) {
  Eigen::VectorXcd v(2);
  v(0) = std::polar(std::cos(setting.theta()), setting.phi());
  v(1) = std::sin(setting.theta());
  return StateVector::normalized(std::move(v));
}

Eigen::Matrix2cd analyzer_unitary(const AnalyzerSetting& setting) {
  const double c = std::cos(setting.theta());
  const double s = std::sin(setting.theta());
  const Complex phase = std::polar(1.0, setting.phi());
  Eigen::Matrix2cd u;
  u(0, 0) = c * phase;
  u(1, 0) = s;
  u(0, 1) = -s * phase;
  u(1, 1) = c;
  return u;
}

PolarizationOutcome measure_polarization(const StateVector& psi, const AnalyzerSetting& setting) {
  if (psi.dim() != 2) {
    throw DimensionError("measure_polarization expects a single-photon polarization state");
  }
  Eigen::Matrix2cd u = analyzer_unitary(setting);
  double p = std::norm(u.col(0).dot(psi.amplitudes()));
  p = std::clamp(p, 0.0, 1.0);
  return {p, StateVector::normalized(u.col(0)), StateVector::normalized(u.col(1))};
}

PolarizationOutcome measure_polarization(const DensityMatrix& rho, const AnalyzerSetting& setting) {
  if (rho.dim() != 2) {
    throw DimensionError("measure_polarization expects a single-photon polarization state");
  }
  Eigen::Matrix2cd u = analyzer_unitary(setting);
  Eigen::Vector2cd k = u.col(0);
  double p = k.dot(rho.matrix() * k).real();
  p = std::clamp(p, 0.0, 1.0);
  return {p, StateVector::normalized(u.col(0)), StateVector::normalized(u.col(1))};
}

void DetectorParams::validate() const {
  require_probability(efficiency, "detector efficiency");
  require_probability(dark_click_prob_per_gate, "dark click probability");
}

ClickCause detect(double p_photon, const DetectorParams& params, const DetectorDraws& draws) {
  require_probability(p_photon, "photon probability");
  if (draws[0] < p_photon * params.efficiency) return ClickCause::kPhoton;
  if (draws[1] < params.dark_click_prob_per_gate) return ClickCause::kDark;
  return ClickCause::kNone;
}

bool detector_click(double p_photon, const DetectorParams& params, const DetectorDraws& draws) {
  return detect(p_photon, params, draws) != ClickCause::kNone;
}

}  // namespace dlcz
