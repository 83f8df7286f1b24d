#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "sta/errors.hpp"

namespace sta {

using Complex = std::complex<double>;
inline constexpr Complex kI{0.0, 1.0};

// Dense fixed-size storage; every system in this library has dimension <= 6.
template <int N>
using Operator = Eigen::Matrix<Complex, N, N>;
template <int N>
using StateVector = Eigen::Matrix<Complex, N, 1>;
template <int N>
using DensityMatrix = Eigen::Matrix<Complex, N, N>;

using Op2 = Operator<2>;
using Op3 = Operator<3>;

enum class Axis { x, y, z };

inline const char* to_string(Axis axis) {
  switch (axis) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
  }
  return "?";
}

inline Op2 pauli(Axis axis) {
  Op2 m;
  switch (axis) {
    case Axis::x: m << 0, 1, 1, 0; break;
    case Axis::y: m << 0, -kI, kI, 0; break;
    case Axis::z: m << 1, 0, 0, -1; break;
  }
  return m;
}

/// Spin-1 angular momentum in the basis where J_z = diag(1, 0, -1).
inline Op3 spin1(Axis axis) {
  const double r = 1.0 / std::numbers::sqrt2;
  Op3 m;
  switch (axis) {
    case Axis::x: m << 0, r, 0, r, 0, r, 0, r, 0; break;
    case Axis::y: m << 0, -kI * r, 0, kI * r, 0, -kI * r, 0, kI * r, 0; break;
    case Axis::z: m << 1, 0, 0, 0, 0, 0, 0, 0, -1; break;
  }
  return m;
}

/// Unitary V with V† H_Λ(Ωx, Ωy) V = Ωx J_x + Ωy J_y, H_Λ the tridiagonal three-level form.
inline Op3 v_transform() {
  const double r = 1.0 / std::numbers::sqrt2;
  Op3 v;
  v << r, 0, r,
       0, 1, 0,
       kI * r, 0, -kI * r;
  return v;
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

template <int N>
double hermiticity_defect(const Operator<N>& h) {
  return max_abs(h - h.adjoint());
}

template <int N>
double unitarity_defect(const Operator<N>& u) {
  return max_abs(u * u.adjoint() - Operator<N>::Identity());
}

/// exp(-i * phase * H) for Hermitian H, via the eigendecomposition of H.
template <int N>
Operator<N> mat_exp_skew(const Operator<N>& h, double phase) {
  const double scale = std::max(1.0, max_abs(h));
  if (hermiticity_defect(h) > 1e-12 * scale) {
    throw InvalidHamiltonian("mat_exp_skew: generator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<Operator<N>> eig(h);
  Eigen::Matrix<Complex, N, 1> phases;
  for (int k = 0; k < N; ++k) {
    phases(k) = std::exp(-kI * (phase * eig.eigenvalues()(k)));
  }
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

template <int N>
StateVector<N> basis_state(int k) {
  if (k < 0 || k >= N) throw RangeError("basis_state: index " + std::to_string(k) + " out of range");
  StateVector<N> v = StateVector<N>::Zero();
  v(k) = 1.0;
  return v;
}

template <int N>
DensityMatrix<N> pure_density(const StateVector<N>& psi) {
  return psi * psi.adjoint();
}

/// Max-norm distance between a and b after removing the best global phase.
template <class DerivedA, class DerivedB>
double distance_up_to_phase(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex{1.0};
  return max_abs(a - phase * b);
}

/// Columns of an evolution operator, i.e. the moving states U|n>.
template <int N>
std::array<StateVector<N>, N> moving_states(const Operator<N>& u) {
  std::array<StateVector<N>, N> cols;
  for (int k = 0; k < N; ++k) cols[k] = u.col(k);
  return cols;
}

}  // namespace sta
