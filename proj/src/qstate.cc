#include "dlcz/qstate.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

namespace dlcz {
namespace {

void require_supported_dim(Eigen::Index dim, const char* what) {
  if (dim < 2 || dim > 4) {
    std::ostringstream msg;
    msg << what << " dimension " << dim << " not in {2, 3, 4}";
    throw DimensionError(msg.str());
  }
}

bool all_finite(const Eigen::MatrixXcd& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) {
      return false;
    }
  }
  return true;
}

double squared_norm(const std::vector<Complex>& weights) {
  double total = 0.0;
  for (const auto& g : weights) {
    total += std::norm(g);
  }
  return total;
}

std::vector<Complex> renormalize(std::vector<Complex> weights, const char* side) {
  double n2 = squared_norm(weights);
  if (weights.empty() || !(n2 > 0.0) || !std::isfinite(n2)) {
    throw PhysicsError(std::string("zero-norm ") + side + " weight list");
  }
  double inv = 1.0 / std::sqrt(n2);
  for (auto& g : weights) {
    g *= inv;
  }
  return weights;
}

}  // namespace

StateVector::StateVector(Eigen::VectorXcd amplitudes) : amplitudes_(std::move(amplitudes)) {
  require_supported_dim(amplitudes_.size(), "state vector");
  if (!all_finite(amplitudes_)) {
    throw PhysicsError("state vector has non-finite amplitudes");
  }
  double n2 = amplitudes_.squaredNorm();
  if (std::abs(n2 - 1.0) > kAlgebraTolerance) {
    std::ostringstream msg;
    msg << "state vector not normalized: |psi|^2 = " << n2;
    throw PhysicsError(msg.str());
  }
}

StateVector StateVector::normalized(Eigen::VectorXcd amplitudes) {
  double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw PhysicsError("cannot normalize a zero or non-finite vector");
  }
  amplitudes /= n;
  return StateVector(std::move(amplitudes));
}

StateVector StateVector::basis(int dim, int index) {
  require_supported_dim(dim, "state vector");
  if (index < 0 || index >= dim) {
    throw DimensionError("basis index out of range");
  }
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(index) = 1.0;
  return StateVector(std::move(v));
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw DimensionError("density matrix must be square");
  }
  require_supported_dim(entries_.rows(), "density matrix");
  if (!all_finite(entries_)) {
    throw PhysicsError("density matrix has non-finite entries");
  }
  double asym = (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > kAlgebraTolerance) {
    std::ostringstream msg;
    msg << "density matrix not Hermitian (max |rho - rho^dagger| = " << asym << ")";
    throw PhysicsError(msg.str());
  }
  Complex tr = entries_.trace();
  if (std::abs(tr - 1.0) > kAlgebraTolerance) {
    std::ostringstream msg;
    msg << "density matrix trace " << tr.real() << " != 1";
    throw PhysicsError(msg.str());
  }
  double lambda_min = min_eigenvalue();
  if (lambda_min < -kPsdFloor) {
    std::ostringstream msg;
    msg << "density matrix not positive semidefinite (min eigenvalue " << lambda_min << ")";
    throw PhysicsError(msg.str());
  }
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  require_supported_dim(dim, "density matrix");
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::mix(double weight, const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("cannot mix density matrices of different dimension");
  }
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw PhysicsError("mixing weight outside [0, 1]");
  }
  return DensityMatrix(weight * a.matrix() + (1.0 - weight) * b.matrix());
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries_, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

StateVector bell_state(double eta) {
  if (!std::isfinite(eta)) {
    throw PhysicsError("bell_state phase must be finite");
  }
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
  v(kIndexHH) = std::numbers::sqrt2 / 2.0;
  v(kIndexVV) = std::polar(std::numbers::sqrt2 / 2.0, eta);
  return StateVector(std::move(v));
}

void WriteProcessParams::validate() const {
  if (!std::isfinite(chi) || !std::isfinite(eta_s) || !std::isfinite(eta_i)) {
    throw PhysicsError("write-process parameters must be finite");
  }
  if (chi < 0.0 || chi > 0.5) {
    std::ostringstream msg;
    msg << "coupling chi = " << chi << " outside [0, 0.5]";
    throw PhysicsError(msg.str());
  }
}

StateVector write_emission_state(const WriteProcessParams& params) {
  params.validate();
  if (params.beyond_perturbative_regime()) {
    std::clog << "warning: chi = " << params.chi
              << " exceeds 0.1; the first-order emission state drops O(chi^2) terms\n";
  }
  Eigen::VectorXcd v(3);
  v(kEmissionVacuum) = 1.0;
  v(kEmissionLeft) = params.chi;
  v(kEmissionRight) = params.chi;
  return StateVector::normalized(std::move(v));
}

StateVector heralded_excitation(const StateVector& emission) {
  if (emission.dim() != 3) {
    throw DimensionError("emission state must be 3-dimensional");
  }
  Eigen::VectorXcd v(2);
  v(0) = emission[kEmissionLeft];
  v(1) = emission[kEmissionRight];
  if (v.squaredNorm() == 0.0) {
    throw PhysicsError("emission state has no single-excitation component");
  }
  return StateVector::normalized(std::move(v));
}

double fidelity(const DensityMatrix& rho, const StateVector& psi) {
  if (rho.dim() != psi.dim()) {
    throw DimensionError("fidelity: density matrix and state dimensions differ");
  }
  Complex overlap = psi.amplitudes().dot(rho.matrix() * psi.amplitudes());
  double f = overlap.real();
  if (f < 0.0 && f > -kPsdFloor) f = 0.0;
  if (f > 1.0 && f < 1.0 + kPsdFloor) f = 1.0;
  return f;
}

EnsembleMode::EnsembleMode(std::vector<Complex> weights_left, std::vector<Complex> weights_right)
    : weights_left_(std::move(weights_left)), weights_right_(std::move(weights_right)) {
  if (weights_left_.empty() || weights_right_.empty()) {
    throw PhysicsError("ensemble modes need at least one atom on each side");
  }
  if (std::abs(squared_norm(weights_left_) - 1.0) > kAlgebraTolerance ||
      std::abs(squared_norm(weights_right_) - 1.0) > kAlgebraTolerance) {
    throw PhysicsError("ensemble weights must satisfy sum |g|^2 = 1 on each side");
  }
}

EnsembleMode EnsembleMode::normalized(std::vector<Complex> weights_left,
                                      std::vector<Complex> weights_right) {
  return EnsembleMode(renormalize(std::move(weights_left), "left"),
                      renormalize(std::move(weights_right), "right"));
}

EnsembleMode EnsembleMode::uniform(int n_left, int n_right) {
  if (n_left < 1 || n_right < 1) {
    throw PhysicsError("ensemble sizes must be positive");
  }
  return EnsembleMode(std::vector<Complex>(n_left, 1.0 / std::sqrt(double(n_left))),
                      std::vector<Complex>(n_right, 1.0 / std::sqrt(double(n_right))));
}

Eigen::Matrix2cd EffectiveStates::gram() const {
  Eigen::Matrix2cd g;
  g(0, 0) = left.dot(left);
  g(0, 1) = left.dot(right);
  g(1, 0) = right.dot(left);
  g(1, 1) = right.dot(right);
  return g;
}

bool EffectiveStates::gram_is_identity(double tol) const {
  return (gram() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <= tol;
}

EffectiveStates effective_states(const EnsembleMode& mode) {
  const int n = mode.n_left() + mode.n_right();
  EffectiveStates out{Eigen::VectorXcd::Zero(n), Eigen::VectorXcd::Zero(n)};
  for (int i = 0; i < mode.n_left(); ++i) {
    out.left(i) = mode.weights_left()[i];
  }
  for (int j = 0; j < mode.n_right(); ++j) {
    out.right(mode.n_left() + j) = mode.weights_right()[j];
  }
  return out;
}

StateVector tensor(const StateVector& signal, const StateVector& idler) {
  if (signal.dim() != 2 || idler.dim() != 2) {
    throw DimensionError("tensor product is defined for two qubits");
  }
  Eigen::VectorXcd v(4);
  for (int s = 0; s < 2; ++s) {
    for (int i = 0; i < 2; ++i) {
      v(2 * s + i) = signal[s] * idler[i];
    }
  }
  return StateVector::normalized(std::move(v));
}

DensityMatrix tensor(const DensityMatrix& signal, const DensityMatrix& idler) {
  if (signal.dim() != 2 || idler.dim() != 2) {
    throw DimensionError("tensor product is defined for two qubits");
  }
  Eigen::MatrixXcd m(4, 4);
  for (int s = 0; s < 2; ++s) {
    for (int sp = 0; sp < 2; ++sp) {
      m.block(2 * s, 2 * sp, 2, 2) = signal(s, sp) * idler.matrix();
    }
  }
  return DensityMatrix(std::move(m));
}

void require_unitary(const Eigen::MatrixXcd& u) {
  if (u.rows() != u.cols()) {
    throw DimensionError("unitary must be square");
  }
  double dev = (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols()))
                   .cwiseAbs()
                   .maxCoeff();
  if (!(dev <= kUnitarityTolerance)) {
    std::ostringstream msg;
    msg << "matrix is not unitary (max |U^dagger U - I| = " << dev << ")";
    throw std::invalid_argument(msg.str());
  }
}

StateVector apply_unitary(const Eigen::MatrixXcd& u, const StateVector& psi) {
  if (u.cols() != psi.dim()) {
    throw DimensionError("apply_unitary: dimension mismatch");
  }
  require_unitary(u);
  return StateVector::normalized(u * psi.amplitudes());
}

DensityMatrix apply_unitary(const Eigen::MatrixXcd& u, const DensityMatrix& rho) {
  if (u.cols() != rho.dim()) {
    throw DimensionError("apply_unitary: dimension mismatch");
  }
  require_unitary(u);
  Eigen::MatrixXcd m = u * rho.matrix() * u.adjoint();
  // Round-off can leave ~1e-16 anti-Hermitian residue.
  m = (0.5 * (m + m.adjoint())).eval();
  return DensityMatrix(std::move(m));
}

DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem traced) {
  if (rho.dim() != 4) {
    throw DimensionError("partial_trace expects a two-qubit density matrix");
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < 2; ++k) {
        if (traced == Subsystem::kIdler) {
          out(a, b) += rho(2 * a + k, 2 * b + k);
        } else {
          out(a, b) += rho(2 * k + a, 2 * k + b);
        }
      }
    }
  }
  return DensityMatrix(std::move(out));
}

}  // namespace dlcz
