#ifndef DLCZ_QSTATE_H_
#define DLCZ_QSTATE_H_

// Finite-dimensional state algebra for polarization and memory qubits.
//
// All two-photon objects use the ordered basis {HH, HV, VH, VV} with the
// signal photon in the first (most significant) slot. Single-qubit objects
// use {H, V} for photons and {L_a, R_a} for the memory.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dlcz {

using Complex = std::complex<double>;

inline constexpr double kAlgebraTolerance = 1e-12;
inline constexpr double kPsdFloor = 1e-10;
inline constexpr double kUnitarityTolerance = 1e-10;

inline constexpr int kIndexHH = 0;
inline constexpr int kIndexHV = 1;
inline constexpr int kIndexVH = 2;
inline constexpr int kIndexVV = 3;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a value would violate a physical invariant (norm, trace,
/// positivity, parameter range).
class PhysicsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Normalized pure state of dimension 2, 3 or 4.
class StateVector {
 public:
  /// Checks normalization to kAlgebraTolerance; throws PhysicsError otherwise.
  explicit StateVector(Eigen::VectorXcd amplitudes);

  /// Rescales to unit norm. Throws PhysicsError for a zero vector.
  static StateVector normalized(Eigen::VectorXcd amplitudes);
  static StateVector basis(int dim, int index);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Complex operator[](int i) const { return amplitudes_(i); }

 private:
  Eigen::VectorXcd amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix of dimension 2, 3 or 4.
class DensityMatrix {
 public:
  /// Validates Hermiticity and trace to kAlgebraTolerance and the smallest
  /// eigenvalue against -kPsdFloor; throws PhysicsError on violation.
  explicit DensityMatrix(Eigen::MatrixXcd entries);

  static DensityMatrix pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(int dim);
  /// weight * a + (1 - weight) * b
  static DensityMatrix mix(double weight, const DensityMatrix& a, const DensityMatrix& b);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return entries_; }
  Complex operator()(int row, int col) const { return entries_(row, col); }
  double min_eigenvalue() const;

 private:
  Eigen::MatrixXcd entries_;
};

/// (|HH> + e^{i eta}|VV>) / sqrt(2).
StateVector bell_state(double eta);

/// Perturbative write-process parameters. `chi` must lie in [0, 0.5].
struct WriteProcessParams {
  double chi = 0.0;
  double eta_s = 0.0;
  double eta_i = 0.0;

  void validate() const;
  /// True when chi is large enough that dropped O(chi^2) terms matter.
  bool beyond_perturbative_regime() const { return chi > 0.1; }
};

inline constexpr int kEmissionVacuum = 0;
inline constexpr int kEmissionLeft = 1;
inline constexpr int kEmissionRight = 2;

/// Truncated write-emission state over {vacuum, left excitation, right
/// excitation}: (|vac> + chi |L> + chi |R>) / sqrt(1 + 2 chi^2).
/// Writes a warning to std::clog when the params leave the perturbative regime.
StateVector write_emission_state(const WriteProcessParams& params);

/// Single-excitation component of an emission state, renormalized to a
/// qubit over {L, R}. Throws PhysicsError when that component vanishes.
StateVector heralded_excitation(const StateVector& emission);

/// <psi|rho|psi>; values within 1e-10 outside [0, 1] are clipped.
double fidelity(const DensityMatrix& rho, const StateVector& psi);

/// Per-atom weights of the two collective modes. Both weight lists must be
/// normalized to kAlgebraTolerance.
class EnsembleMode {
 public:
  EnsembleMode(std::vector<Complex> weights_left, std::vector<Complex> weights_right);
  /// Renormalizes each list; throws PhysicsError for a zero-norm list.
  static EnsembleMode normalized(std::vector<Complex> weights_left,
                                 std::vector<Complex> weights_right);
  static EnsembleMode uniform(int n_left, int n_right);

  int n_left() const { return static_cast<int>(weights_left_.size()); }
  int n_right() const { return static_cast<int>(weights_right_.size()); }
  const std::vector<Complex>& weights_left() const { return weights_left_; }
  const std::vector<Complex>& weights_right() const { return weights_right_; }

 private:
  std::vector<Complex> weights_left_;
  std::vector<Complex> weights_right_;
};

/// |L_a> and |R_a> expanded in the orthonormal single-spin-flip basis of the
/// N_L + N_R atoms (basis state k has atom k in |b>, all others in |a>).
struct EffectiveStates {
  Eigen::VectorXcd left;
  Eigen::VectorXcd right;

  /// Gram matrix [[<L|L>, <L|R>], [<R|L>, <R|R>]].
  Eigen::Matrix2cd gram() const;
  bool gram_is_identity(double tol = kAlgebraTolerance) const;
};

EffectiveStates effective_states(const EnsembleMode& mode);

enum class Subsystem { kSignal, kIdler };

StateVector tensor(const StateVector& signal, const StateVector& idler);
DensityMatrix tensor(const DensityMatrix& signal, const DensityMatrix& idler);

/// Throws std::invalid_argument unless U^dagger U = I to kUnitarityTolerance.
void require_unitary(const Eigen::MatrixXcd& u);
StateVector apply_unitary(const Eigen::MatrixXcd& u, const StateVector& psi);
DensityMatrix apply_unitary(const Eigen::MatrixXcd& u, const DensityMatrix& rho);

/// Traces out `traced` from a two-qubit density matrix.
DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem traced);

}  // namespace dlcz

#endif  // DLCZ_QSTATE_H_
