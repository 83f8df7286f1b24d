#pragma once

// Reference computations used only by the tests. Each one reaches the same
// quantity as the library by a different route.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "sta/linalg.hpp"
#include "sta/two_level.hpp"

namespace oracle {

using sta::Complex;
using sta::kI;

/// exp(-i p H) by a 50-term Taylor series with scaling and squaring.
template <int N>
sta::Operator<N> taylor_exp(const sta::Operator<N>& h, double phase) {
  int squarings = 0;
  double scale = std::abs(phase) * h.cwiseAbs().sum();
  while (scale > 0.5) {
    scale /= 2.0;
    ++squarings;
  }
  const sta::Operator<N> x = -kI * phase / std::pow(2.0, squarings) * h;
  sta::Operator<N> term = sta::Operator<N>::Identity();
  sta::Operator<N> sum = term;
  for (int k = 1; k <= 50; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  return sum;
}

/// Two-level rotation assembled from three Taylor exponentials.
inline sta::Op2 rotation(double alpha, double theta, double beta) {
  using sta::Axis;
  return taylor_exp<2>(sta::pauli(Axis::z), -alpha / 2.0) * taylor_exp<2>(sta::pauli(Axis::y), theta) *
         taylor_exp<2>(sta::pauli(Axis::z), -beta / 2.0);
}

inline sta::Op3 rotation_spin1(double alpha, double theta, double beta) {
  using sta::Axis;
  return taylor_exp<3>(sta::spin1(Axis::z), -alpha / 2.0) * taylor_exp<3>(sta::spin1(Axis::y), theta) *
         taylor_exp<3>(sta::spin1(Axis::z), -beta / 2.0);
}

/// Angles moving linearly in t with the stored rates, evaluated at offset t.
inline sta::RotationAngles advance(const sta::RotationAngles& a, double t) {
  sta::RotationAngles b = a;
  b.theta += a.theta_dot * t;
  b.alpha += a.alpha_dot * t;
  b.beta += a.beta_dot * t;
  return b;
}

/// Picture Hamiltonian R† H0 R + i (dR†/dt) R with a central difference (step 1e-6).
template <int N, class Rotation>
sta::Operator<N> picture_hamiltonian(const sta::Operator<N>& h0, const sta::RotationAngles& a, Rotation rot) {
  constexpr double h = 1e-6;
  const auto r = [&](double t) {
    const auto b = advance(a, t);
    return rot(b.alpha, b.theta, b.beta);
  };
  const sta::Operator<N> r0 = r(0.0);
  const sta::Operator<N> dr_dag = (r(h).adjoint() - r(-h).adjoint()) / (2.0 * h);
  return r0.adjoint() * h0 * r0 + kI * dr_dag * r0;
}

/// Coefficients c_k of H = Σ c_k G_k via Tr(G_k H) / Tr(G_k²).
template <int N>
sta::AxisCoefficients project(const sta::Operator<N>& h, const sta::Operator<N>& gx, const sta::Operator<N>& gy,
                              const sta::Operator<N>& gz) {
  const auto c = [&](const sta::Operator<N>& g) { return ((g * h).trace() / (g * g).trace()).real(); };
  return {c(gx), c(gy), c(gz)};
}

/// Independent RK4 for dU/ds = -i H(s) U on [0, s_end].
template <int N>
sta::Operator<N> rk4_propagator(const std::function<sta::Operator<N>(double)>& hamiltonian, double s_end,
                                int steps) {
  sta::Operator<N> u = sta::Operator<N>::Identity();
  const double dt = s_end / steps;
  for (int k = 0; k < steps; ++k) {
    const double s = k * dt;
    const sta::Operator<N> h0 = hamiltonian(s), hm = hamiltonian(s + dt / 2), h1 = hamiltonian(s + dt);
    const sta::Operator<N> k1 = -kI * h0 * u;
    const sta::Operator<N> k2 = -kI * hm * (u + dt / 2 * k1);
    const sta::Operator<N> k3 = -kI * hm * (u + dt / 2 * k2);
    const sta::Operator<N> k4 = -kI * h1 * (u + dt * k3);
    u += dt / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

/// Minimum over global phases of the max-norm difference.
template <int N>
double distance_mod_phase(const sta::Operator<N>& a, const sta::Operator<N>& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (a - phase * b).cwiseAbs().maxCoeff();
}

template <int N>
sta::Operator<N> random_hermitian(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  sta::Operator<N> m;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) m(i, j) = Complex(u(rng), u(rng));
  }
  return (m + m.adjoint()) / 2.0;
}

inline sta::RotationAngles random_angles(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> rate(-3.0, 3.0);
  return {ang(rng), ang(rng), ang(rng), rate(rng), rate(rng), rate(rng)};
}

/// Case I schedules plus bumps c_θ s⁴(1-s)⁴ on θ and c_α s³(1-s)³ on α. Boundary
/// values and the leading endpoint behaviour are unchanged as long as |c_θ| < 2.5π,
/// so sin 2θ keeps its sign on the interior.
struct PerturbedCase1 {
  double c_theta;
  double c_alpha;

  sta::RotationAngles operator()(double s) const {
    auto a = sta::Case1Schedule{}(s);
    const double u = s * (1.0 - s);
    a.theta += c_theta * std::pow(u, 4);
    a.theta_dot += c_theta * 4.0 * std::pow(u, 3) * (1.0 - 2.0 * s);
    a.alpha += c_alpha * std::pow(u, 3);
    a.alpha_dot += c_alpha * 3.0 * u * u * (1.0 - 2.0 * s);
    return a;
  }
};

/// Case II schedules with amplitude A1 and a c·s³(1-s)³ bump on θ.
struct PerturbedCase2 {
  double a1;
  double c_theta;

  sta::RotationAngles operator()(double s) const {
    auto a = sta::Case2Schedule{a1}(s);
    a.theta += c_theta * std::pow(s * (1.0 - s), 3);
    a.theta_dot += c_theta * 3.0 * std::pow(s * (1.0 - s), 2) * (1.0 - 2.0 * s);
    return a;
  }
};

/// Five-point central derivative.
inline double derivative(const std::function<double(double)>& f, double s, double h = 1e-4) {
  return (-f(s + 2 * h) + 8 * f(s + h) - 8 * f(s - h) + f(s - 2 * h)) / (12 * h);
}

}  // namespace oracle
