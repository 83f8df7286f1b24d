#pragma once

// Fixed-step RK4 propagation of the Schrödinger and Lindblad equations for
// small dense systems (ħ = 1, time in units of the protocol duration T).

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "sta/errors.hpp"
#include "sta/linalg.hpp"

namespace sta {

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  int n_steps = 10000;

  void validate() const {
    if (!(t_end > t_start)) throw ParameterError("TimeGrid: t_end must exceed t_start");
    if (n_steps < 100) throw ParameterError("TimeGrid: n_steps must be at least 100");
  }
  double step() const { return (t_end - t_start) / n_steps; }
  double time(int k) const { return t_start + k * step(); }
};

template <int N>
struct CollapseChannel {
  Operator<N> op;
  double rate = 0.0;
};

/// standard: rate/2 (L†L ρ - 2 L ρ L† + ρ L†L), L = op is the jump.
/// printed:  rate/2 (L L† ρ - 2 L† ρ L + ρ L L†), i.e. op† is the jump.
enum class DissipatorForm { standard, printed };

template <int N, class State>
struct Trajectory {
  TimeGrid grid;
  std::vector<double> times;
  std::vector<State> states;  // filled only when states are recorded
  std::vector<std::array<double, N>> populations;
  std::vector<double> fidelity;  // filled only when a target is given
  State final_state;
  double max_drift = 0.0;  // |norm - 1| or |trace - 1| over the run
};

template <int N>
using StateTrajectory = Trajectory<N, StateVector<N>>;
template <int N>
using DensityTrajectory = Trajectory<N, DensityMatrix<N>>;

template <int N>
struct StateOptions {
  bool record_states = true;
  std::optional<StateVector<N>> target;
  bool renormalize = false;
  double norm_tolerance = 1e-4;
};

template <int N>
struct LindbladOptions {
  DissipatorForm form = DissipatorForm::standard;
  bool record_states = true;
  std::optional<StateVector<N>> target;
  double trace_tolerance = 1e-5;
  double positivity_tolerance = 1e-6;
};

template <int N>
double fidelity(const DensityMatrix<N>& rho, const StateVector<N>& target) {
  return std::abs((target.adjoint() * rho * target)(0, 0));
}

template <int N>
double fidelity(const StateVector<N>& psi, const StateVector<N>& target) {
  return std::norm(target.dot(psi));
}

template <int N>
std::array<double, N> state_populations(const StateVector<N>& psi) {
  std::array<double, N> p{};
  for (int k = 0; k < N; ++k) p[k] = std::norm(psi(k));
  return p;
}

template <int N>
std::array<double, N> state_populations(const DensityMatrix<N>& rho) {
  std::array<double, N> p{};
  for (int k = 0; k < N; ++k) p[k] = rho(k, k).real();
  return p;
}

/// RK4 on dψ/ds = -i H(s) ψ. H is any callable s -> Operator<N>.
template <int N, class Hamiltonian>
StateTrajectory<N> propagate_state(const Hamiltonian& hamiltonian, const StateVector<N>& psi0, const TimeGrid& grid,
                                   const StateOptions<N>& options = {}) {
  grid.validate();
  if (std::abs(psi0.norm() - 1.0) > 1e-8) throw ParameterError("propagate_state: initial state is not normalized");

  StateTrajectory<N> out;
  out.grid = grid;
  const auto record = [&](double s, const StateVector<N>& psi) {
    out.times.push_back(s);
    out.populations.push_back(state_populations<N>(psi));
    if (options.record_states) out.states.push_back(psi);
    if (options.target) out.fidelity.push_back(fidelity<N>(psi, *options.target));
    out.max_drift = std::max(out.max_drift, std::abs(psi.norm() - 1.0));
  };

  const double h = grid.step();
  const auto rhs = [&](double s, const StateVector<N>& psi) -> StateVector<N> {
    return -kI * (Operator<N>(hamiltonian(s)) * psi);
  };
  StateVector<N> psi = psi0;
  record(grid.t_start, psi);
  for (int k = 0; k < grid.n_steps; ++k) {
    const double s = grid.time(k);
    const StateVector<N> k1 = rhs(s, psi);
    const StateVector<N> k2 = rhs(s + h / 2, psi + (h / 2) * k1);
    const StateVector<N> k3 = rhs(s + h / 2, psi + (h / 2) * k2);
    const StateVector<N> k4 = rhs(s + h, psi + h * k3);
    psi += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (options.renormalize) psi.normalize();
    record(grid.time(k + 1), psi);
  }
  out.final_state = psi;
  if (std::abs(psi.norm() - 1.0) > options.norm_tolerance) {
    throw AccuracyError("propagate_state: norm drift " + std::to_string(std::abs(psi.norm() - 1.0)) +
                        " exceeds tolerance; use more steps");
  }
  return out;
}

/// RK4 on dU/ds = -i H(s) U from U(t_start) = u0; returns U(t_end).
template <int N, class Hamiltonian>
Operator<N> propagate_operator(const Hamiltonian& hamiltonian, const TimeGrid& grid,
                               const Operator<N>& u0 = Operator<N>::Identity()) {
  grid.validate();
  const double h = grid.step();
  const auto rhs = [&](double s, const Operator<N>& u) -> Operator<N> {
    return -kI * (Operator<N>(hamiltonian(s)) * u);
  };
  Operator<N> u = u0;
  for (int k = 0; k < grid.n_steps; ++k) {
    const double s = grid.time(k);
    const Operator<N> k1 = rhs(s, u);
    const Operator<N> k2 = rhs(s + h / 2, u + (h / 2) * k1);
    const Operator<N> k3 = rhs(s + h / 2, u + (h / 2) * k2);
    const Operator<N> k4 = rhs(s + h, u + h * k3);
    u += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

template <int N>
double min_eigenvalue(const DensityMatrix<N>& rho) {
  const DensityMatrix<N> herm = (rho + rho.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<DensityMatrix<N>> eig(herm, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

/// RK4 on dρ/ds = -i[H, ρ] + Σ rate (L ρ L† - ½{L†L, ρ}).
template <int N, class Hamiltonian>
DensityTrajectory<N> propagate_lindblad(const Hamiltonian& hamiltonian, const DensityMatrix<N>& rho0,
                                        const std::vector<CollapseChannel<N>>& channels, const TimeGrid& grid,
                                        const LindbladOptions<N>& options = {}) {
  grid.validate();
  if (hermiticity_defect<N>(rho0) > 1e-10 || std::abs(rho0.trace() - 1.0) > 1e-8) {
    throw ParameterError("propagate_lindblad: initial density matrix must be Hermitian with unit trace");
  }

  std::vector<Operator<N>> jumps;
  Operator<N> anti = Operator<N>::Zero();  // ½ Σ L†L
  for (const auto& ch : channels) {
    if (!(ch.rate >= 0.0) || !std::isfinite(ch.rate)) throw ParameterError("collapse rate must be finite and >= 0");
    if (ch.rate == 0.0) continue;
    const Operator<N> l =
        std::sqrt(ch.rate) * (options.form == DissipatorForm::standard ? Operator<N>(ch.op) : Operator<N>(ch.op.adjoint()));
    anti += 0.5 * l.adjoint() * l;
    jumps.push_back(l);
  }

  DensityTrajectory<N> out;
  out.grid = grid;
  const auto record = [&](double s, const DensityMatrix<N>& rho) {
    out.times.push_back(s);
    out.populations.push_back(state_populations<N>(rho));
    if (options.record_states) out.states.push_back(rho);
    if (options.target) out.fidelity.push_back(fidelity<N>(rho, *options.target));
    out.max_drift = std::max(out.max_drift, std::abs(rho.trace() - 1.0));
  };

  const double h = grid.step();
  const auto rhs = [&](double s, const DensityMatrix<N>& rho) -> DensityMatrix<N> {
    // non-Hermitian effective generator G = H - i½ΣL†L: dρ = -i(Gρ - ρG†) + Σ LρL†
    const Operator<N> g = Operator<N>(hamiltonian(s)) - kI * anti;
    const Operator<N> g_rho = g * rho;
    DensityMatrix<N> d = -kI * g_rho + kI * g_rho.adjoint();
    for (const auto& l : jumps) d.noalias() += l * rho * l.adjoint();
    return d;
  };

  DensityMatrix<N> rho = rho0;
  record(grid.t_start, rho);
  for (int k = 0; k < grid.n_steps; ++k) {
    const double s = grid.time(k);
    const DensityMatrix<N> k1 = rhs(s, rho);
    const DensityMatrix<N> k2 = rhs(s + h / 2, rho + (h / 2) * k1);
    const DensityMatrix<N> k3 = rhs(s + h / 2, rho + (h / 2) * k2);
    const DensityMatrix<N> k4 = rhs(s + h, rho + h * k3);
    rho += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    record(grid.time(k + 1), rho);
    if ((k + 1) % 500 == 0 && min_eigenvalue<N>(rho) < -options.positivity_tolerance) {
      throw PositivityError("propagate_lindblad: density matrix lost positivity at s = " +
                            std::to_string(grid.time(k + 1)));
    }
  }
  out.final_state = rho;
  if (std::abs(rho.trace() - 1.0) > options.trace_tolerance) {
    throw AccuracyError("propagate_lindblad: trace drift exceeds tolerance; use more steps");
  }
  if (min_eigenvalue<N>(rho) < -options.positivity_tolerance) {
    throw PositivityError("propagate_lindblad: final density matrix has a negative eigenvalue");
  }
  return out;
}

/// Labeled population series, one per basis state.
template <int N, class State>
std::vector<std::pair<std::string, std::vector<double>>> populations(
    const Trajectory<N, State>& traj, const std::type_identity_t<std::array<std::string, N>>& labels) {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  for (int k = 0; k < N; ++k) {
    std::vector<double> series;
    series.reserve(traj.populations.size());
    for (const auto& p : traj.populations) series.push_back(p[k]);
    out.emplace_back(labels[k], std::move(series));
  }
  return out;
}

}  // namespace sta
