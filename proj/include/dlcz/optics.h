#ifndef DLCZ_OPTICS_H_
#define DLCZ_OPTICS_H_

#include <array>

#include <Eigen/Dense>

#include "dlcz/qstate.h"

namespace dlcz {

/// Net polarization transform R(theta, phi) followed by a polarizer. The
/// transmitted ket is cos(theta) e^{i phi}|H> + sin(theta)|V>.
///
/// Angles are canonicalized to theta in [0, pi) and phi in [0, 2 pi).
/// Shifting theta by pi only flips the global sign of the analyzer kets.
class AnalyzerSetting {
 public:
  AnalyzerSetting() = default;
  AnalyzerSetting(double theta, double phi);

  double theta() const { return theta_; }
  double phi() const { return phi_; }

  /// Setting whose transmitted ket is orthogonal to this one (theta + pi/2).
  AnalyzerSetting orthogonal() const;

  friend bool operator==(const AnalyzerSetting&, const AnalyzerSetting&) = default;

 private:
  double theta_ = 0.0;
  double phi_ = 0.0;
};

StateVector analyzer_ket(const AnalyzerSetting& setting);

/// Columns: analyzer_ket(setting) and its complement
/// -sin(theta) e^{i phi}|H> + cos(theta)|V>.
Eigen::Matrix2cd analyzer_unitary(const AnalyzerSetting& setting);

struct PolarizationOutcome {
  double p_pass;
  StateVector post_pass;
  StateVector post_fail;
};

PolarizationOutcome measure_polarization(const StateVector& psi, const AnalyzerSetting& setting);
PolarizationOutcome measure_polarization(const DensityMatrix& rho, const AnalyzerSetting& setting);

struct DetectorParams {
  double efficiency = 1.0;
  double dark_click_prob_per_gate = 0.0;

  void validate() const;
};

enum class ClickCause { kNone, kPhoton, kDark };

/// Uniform draws in [0, 1) consumed by one gated detector.
/// draws[0] decides photon detection, draws[1] decides the dark click.
using DetectorDraws = std::array<double, 2>;

/// Photon-caused click when draws[0] < p_photon * efficiency; otherwise a
/// dark click when draws[1] < dark_click_prob_per_gate. Both draws are always
/// consumed by the caller.
ClickCause detect(double p_photon, const DetectorParams& params, const DetectorDraws& draws);

/// True with probability 1 - (1 - p_photon * efficiency)(1 - dark).
bool detector_click(double p_photon, const DetectorParams& params, const DetectorDraws& draws);

}  // namespace dlcz

#endif  // DLCZ_OPTICS_H_
