#pragma once

// Reproduction pipelines: Table I/II, pulse shapes, fidelity vs coupling,
// population dynamics, STIRAP comparison and the decoherence and
// imperfection sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <initializer_list>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "sta/dynamics.hpp"
#include "sta/errors.hpp"
#include "sta/nv_model.hpp"
#include "sta/two_level.hpp"

namespace sta::experiments {

/// Evaluates fn(0..count-1) on up to `jobs` threads (jobs <= 0: hardware
/// concurrency). Results keep index order; the first exception is rethrown.
template <class F>
auto parallel_map(std::size_t count, int jobs, F&& fn) {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<std::optional<R>> slots(count);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };

  const std::size_t wanted = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::clamp<std::size_t>(wanted, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::vector<R> out;
  out.reserve(count);
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

// ---------------------------------------------------------------------------
// Pulses and single runs

enum class PulseKind { gaussian_fit, designed };

inline const char* to_string(PulseKind k) { return k == PulseKind::gaussian_fit ? "gaussian_fit" : "designed"; }

/// Shortcut pulses for schedule amplitude A (B from the config or solved).
/// gaussian_fit: Gaussian pair fitted to the designed pulses.
inline nv::PulsePair shortcut_pulses(const nv::NvConfig& config, PulseKind kind = PulseKind::gaussian_fit) {
  config.validate();
  const double b = config.b.value_or(nv::solve_b(config.a));
  auto designed = nv::designed_pulses(config.a, b);
  if (kind == PulseKind::designed) return designed.pulses;
  auto pulses = nv::gaussian_fit(designed.pulses).pulses();
  pulses.parameters.emplace_back("A", config.a);
  pulses.parameters.emplace_back("B", b);
  return pulses;
}

/// Static parameter offsets, as fractions of the nominal values.
struct Perturbation {
  double d_t = 0.0;       // run to T(1 + d_t) with pulses shaped for T
  double d_omega = 0.0;   // both amplitudes scaled by 1 + d_omega
  double d_lambda = 0.0;  // λ -> λ(1 + d_lambda)
};

struct NvRunOptions {
  int n_steps = 10000;  // steps per nominal duration T
  nv::DecayModel decay = nv::DecayModel::truncated_subspace;
  DissipatorForm form = DissipatorForm::standard;
  bool record_states = false;
  Perturbation perturbation;
};

inline TimeGrid nv_grid(const NvRunOptions& opt) {
  const double end = 1.0 + opt.perturbation.d_t;
  if (!(end > 0.0)) throw ParameterError("dT/T must exceed -1");
  if (opt.n_steps < 100) throw ParameterError("steps per T must be at least 100");
  TimeGrid grid{0.0, end, std::max(100, static_cast<int>(std::lround(opt.n_steps * end)))};
  grid.validate();
  return grid;
}

/// Full six-level Schrödinger run from ψ1 with ψ5 as the target.
inline StateTrajectory<nv::kDim> run_nv_unitary(const nv::PulsePair& pulses, double lambda,
                                                 const NvRunOptions& opt = {}) {
  if (!(lambda > 0.0)) throw ParameterError("lambda must be > 0");
  const auto p = opt.perturbation.d_omega == 0.0 ? pulses : pulses.scaled(1.0 + opt.perturbation.d_omega);
  const double lam = lambda * (1.0 + opt.perturbation.d_lambda);
  StateOptions<nv::kDim> so;
  so.record_states = opt.record_states;
  so.target = nv::ket(nv::psi5);
  return propagate_state<nv::kDim>([&](double s) { return nv::full_hamiltonian(s, p, lam); }, nv::ket(nv::psi1),
                                   nv_grid(opt), so);
}

/// Lindblad run with cavity loss κ and NV decay γ from the config.
inline DensityTrajectory<nv::kDim> run_nv_lindblad(const nv::PulsePair& pulses, const nv::NvConfig& config,
                                                    const NvRunOptions& opt = {}) {
  config.validate();
  const auto p = opt.perturbation.d_omega == 0.0 ? pulses : pulses.scaled(1.0 + opt.perturbation.d_omega);
  const double lam = config.lambda * (1.0 + opt.perturbation.d_lambda);
  LindbladOptions<nv::kDim> lo;
  lo.form = opt.form;
  lo.record_states = opt.record_states;
  lo.target = nv::ket(nv::psi5);
  return propagate_lindblad<nv::kDim>([&](double s) { return nv::full_hamiltonian(s, p, lam); },
                                      pure_density<nv::kDim>(nv::ket(nv::psi1)),
                                      nv::collapse_channels(config.kappa, config.gamma, opt.decay, opt.form),
                                      nv_grid(opt), lo);
}

/// Three-level effective model (ψ1, φ1, ψ5) run from ψ1.
inline StateTrajectory<3> run_effective(const nv::PulsePair& pulses, int n_steps = 10000) {
  StateOptions<3> so;
  so.record_states = false;
  so.target = basis_state<3>(2);
  return propagate_state<3>([&](double s) { return nv::effective_hamiltonian(s, pulses); }, basis_state<3>(0),
                            TimeGrid{0.0, 1.0, n_steps}, so);
}

template <int N, class State>
double peak_population(const Trajectory<N, State>& traj, std::initializer_list<int> levels) {
  double best = 0.0;
  for (const auto& p : traj.populations) {
    double sum = 0.0;
    for (int k : levels) sum += p[k];
    best = std::max(best, sum);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Sweep results

struct SweepAxis {
  std::string label;
  std::vector<double> samples;
};

struct SweepGrid {
  std::string quantity = "F(T)";
  std::vector<SweepAxis> axes;  // one or two; values are row-major over axes[0] x axes[1]
  std::vector<double> values;
  nv::NvConfig config;
  nv::PulsePair pulses;
  std::vector<std::pair<std::string, std::string>> notes;

  std::size_t shape(std::size_t axis) const { return axes.at(axis).samples.size(); }

  double at(std::size_t i, std::size_t j = 0) const {
    return values.at(axes.size() == 1 ? i : i * shape(1) + j);
  }

  void validate() const {
    if (axes.empty() || axes.size() > 2) throw ParameterError("SweepGrid: one or two axes");
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.samples.size();
    if (n != values.size()) throw ParameterError("SweepGrid: value count does not match the axes");
    for (double v : values) {
      if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) throw AccuracyError("SweepGrid: value " + std::to_string(v) + " outside [0, 1]");
    }
  }
};

/// Evenly spaced samples over [lo, hi].
inline std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw ParameterError("linspace: n must be positive");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return out;
}

// ---------------------------------------------------------------------------
// Pipelines

struct Table1Row {
  double a = 0.0;
  double b = 0.0;
  double p_imax = 0.0;            // sin²(A/32)
  double p_imax_simulated = 0.0;  // peak φ1 population of the effective model
  double omega_max_t = 0.0;
};

inline std::vector<Table1Row> table1(const std::vector<double>& a_values, int jobs = 1, int n_steps = 10000) {
  return parallel_map(a_values.size(), jobs, [&](std::size_t i) {
    const double a = a_values[i];
    Table1Row row;
    row.a = a;
    row.b = nv::solve_b(a);
    const auto d = nv::designed_pulses(a, row.b);
    row.p_imax = std::pow(std::sin(a / 32.0), 2);
    row.p_imax_simulated = peak_population(run_effective(d.pulses, n_steps), {1});
    row.omega_max_t = nv::max_design_amplitude(d.design);
    return row;
  });
}

inline SweepGrid fidelity_vs_lambda(const std::vector<double>& lambdas, const nv::PulsePair& pulses, int jobs = 1,
                                    const NvRunOptions& opt = {}) {
  SweepGrid grid;
  grid.axes = {{"lambdaT", lambdas}};
  grid.pulses = pulses;
  grid.values = parallel_map(lambdas.size(), jobs, [&](std::size_t i) {
    if (!(lambdas[i] > 0.0)) throw ParameterError("lambda values must be > 0");
    return run_nv_unitary(pulses, lambdas[i], opt).fidelity.back();
  });
  grid.validate();
  return grid;
}

inline StateTrajectory<nv::kDim> population_dynamics(const nv::NvConfig& config, const nv::PulsePair& pulses,
                                                      const NvRunOptions& opt = {}) {
  config.validate();
  return run_nv_unitary(pulses, config.lambda, opt);
}

struct FidelityCurve {
  std::string label;
  double omega0 = 0.0;  // 0 for the shortcut run
  double lambda = 0.0;
  std::vector<double> times;
  std::vector<double> fidelity;

  double final() const { return fidelity.back(); }
};

struct StirapCase {
  double omega0;
  double lambda;
};

/// Shortcut run first, then one STIRAP run per case.
inline std::vector<FidelityCurve> stirap_comparison(const std::vector<StirapCase>& cases,
                                                    const nv::PulsePair& shortcut, double shortcut_lambda = 30.0,
                                                    int jobs = 1, const NvRunOptions& opt = {}) {
  return parallel_map(cases.size() + 1, jobs, [&](std::size_t i) {
    FidelityCurve c;
    if (i == 0) {
      c.label = "shortcut";
      c.lambda = shortcut_lambda;
      auto traj = run_nv_unitary(shortcut, shortcut_lambda, opt);
      c.times = std::move(traj.times);
      c.fidelity = std::move(traj.fidelity);
    } else {
      const auto& sc = cases[i - 1];
      c.omega0 = sc.omega0;
      c.lambda = sc.lambda;
      c.label = "stirap_O" + std::to_string(static_cast<int>(std::lround(sc.omega0))) + "_L" +
                std::to_string(static_cast<int>(std::lround(sc.lambda)));
      auto traj = run_nv_unitary(nv::stirap_pulses(sc.omega0), sc.lambda, opt);
      c.times = std::move(traj.times);
      c.fidelity = std::move(traj.fidelity);
    }
    return c;
  });
}

/// Final fidelity over a (κ/λ) x (γ/λ) grid.
inline SweepGrid decoherence_sweep(const std::vector<double>& kappa_over_lambda,
                                   const std::vector<double>& gamma_over_lambda, const nv::NvConfig& config,
                                   const nv::PulsePair& pulses, int jobs = 1, const NvRunOptions& opt = {}) {
  config.validate();
  for (double r : kappa_over_lambda) {
    if (!(r >= 0.0)) throw ParameterError("kappa/lambda must be >= 0");
  }
  for (double r : gamma_over_lambda) {
    if (!(r >= 0.0)) throw ParameterError("gamma/lambda must be >= 0");
  }
  SweepGrid grid;
  grid.axes = {{"kappa/lambda", kappa_over_lambda}, {"gamma/lambda", gamma_over_lambda}};
  grid.config = config;
  grid.pulses = pulses;
  grid.notes = {{"decay_model", nv::to_string(opt.decay)}};
  const std::size_t nj = gamma_over_lambda.size();
  grid.values = parallel_map(kappa_over_lambda.size() * nj, jobs, [&](std::size_t idx) {
    nv::NvConfig c = config;
    c.kappa = kappa_over_lambda[idx / nj] * config.lambda;
    c.gamma = gamma_over_lambda[idx % nj] * config.lambda;
    NvRunOptions o = opt;
    o.record_states = false;
    return run_nv_lindblad(pulses, c, o).fidelity.back();
  });
  grid.validate();
  return grid;
}

enum class RobustnessAxis { dT, dOmega, dLambda };

inline const char* to_string(RobustnessAxis a) {
  switch (a) {
    case RobustnessAxis::dT: return "dT/T";
    case RobustnessAxis::dOmega: return "dOmega0/Omega0";
    case RobustnessAxis::dLambda: return "dlambda/lambda";
  }
  return "?";
}

inline RobustnessAxis parse_robustness_axis(const std::string& s) {
  if (s == "dT") return RobustnessAxis::dT;
  if (s == "dOmega") return RobustnessAxis::dOmega;
  if (s == "dLambda") return RobustnessAxis::dLambda;
  throw ParameterError("unknown robustness axis '" + s + "' (expected dT, dOmega or dLambda)");
}

inline void apply(Perturbation& p, RobustnessAxis axis, double value) {
  switch (axis) {
    case RobustnessAxis::dT: p.d_t = value; break;
    case RobustnessAxis::dOmega: p.d_omega = value; break;
    case RobustnessAxis::dLambda: p.d_lambda = value; break;
  }
}

/// Unitary final fidelity over a 2D grid of relative offsets in [-range, range].
inline SweepGrid robustness_sweep(RobustnessAxis axis1, RobustnessAxis axis2, double range, int n,
                                  const nv::NvConfig& config, const nv::PulsePair& pulses, int jobs = 1,
                                  const NvRunOptions& opt = {}) {
  if (axis1 == axis2) throw ParameterError("robustness_sweep: the two axes must differ");
  if (!(range > 0.0 && range <= 0.2)) throw ParameterError("robustness_sweep: range must be in (0, 0.2]");
  if (n < 2) throw ParameterError("robustness_sweep: need at least 2 samples per axis");
  config.validate();
  SweepGrid grid;
  grid.axes = {{to_string(axis1), linspace(-range, range, n)}, {to_string(axis2), linspace(-range, range, n)}};
  grid.config = config;
  grid.pulses = pulses;
  grid.notes = {{"decoherence", "none"}, {"dT_semantics", "pulses shaped for T, evolution runs to T+dT"}};
  const auto nn = static_cast<std::size_t>(n);
  grid.values = parallel_map(nn * nn, jobs, [&](std::size_t idx) {
    NvRunOptions o = opt;
    o.record_states = false;
    apply(o.perturbation, axis1, grid.axes[0].samples[idx / nn]);
    apply(o.perturbation, axis2, grid.axes[1].samples[idx % nn]);
    return run_nv_unitary(pulses, config.lambda, o).fidelity.back();
  });
  grid.validate();
  return grid;
}

enum class TwoLevelCase { I, II };

struct TwoLevelDemo {
  TwoLevelPulses design;
  StateTrajectory<2> trajectory;
};

/// Case I or II transfer from |1> (with A1 for Case II), target |2>.
inline TwoLevelDemo two_level_demo(TwoLevelCase which, double a1 = 8.0 * std::numbers::pi, int n_steps = 10000) {
  TwoLevelPulses design = which == TwoLevelCase::I ? design_case1(Case1Schedule{}) : design_case2(a1);
  StateOptions<2> so;
  so.record_states = false;
  so.target = basis_state<2>(1);
  auto traj = propagate_state<2>([&](double s) { return design.hamiltonian(s); }, basis_state<2>(0),
                                 TimeGrid{0.0, 1.0, n_steps}, so);
  return {std::move(design), std::move(traj)};
}

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  enum class Kind { within, at_least, at_most, less_than };

  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  Kind kind = Kind::within;

  bool passed() const {
    switch (kind) {
      case Kind::within: return std::abs(value - reference) <= tolerance;
      case Kind::at_least: return value >= reference;
      case Kind::at_most: return value <= reference;
      case Kind::less_than: return value < reference;
    }
    return false;
  }

  std::string describe() const {
    char buf[256];
    switch (kind) {
      case Kind::within:
        std::snprintf(buf, sizeof buf, "%s = %.6g (expected %.6g +/- %.3g)", name.c_str(), value, reference, tolerance);
        break;
      case Kind::at_least:
        std::snprintf(buf, sizeof buf, "%s = %.6g (expected >= %.6g)", name.c_str(), value, reference);
        break;
      case Kind::at_most:
        std::snprintf(buf, sizeof buf, "%s = %.6g (expected <= %.6g)", name.c_str(), value, reference);
        break;
      case Kind::less_than:
        std::snprintf(buf, sizeof buf, "%s = %.6g (expected < %.6g)", name.c_str(), value, reference);
        break;
    }
    return buf;
  }
};

inline Checkpoint within(std::string name, double value, double reference, double tol) {
  return {std::move(name), value, reference, tol, Checkpoint::Kind::within};
}
inline Checkpoint at_least(std::string name, double value, double bound) {
  return {std::move(name), value, bound, 0.0, Checkpoint::Kind::at_least};
}
inline Checkpoint less_than(std::string name, double value, double bound) {
  return {std::move(name), value, bound, 0.0, Checkpoint::Kind::less_than};
}

inline bool all_passed(const std::vector<Checkpoint>& cps) {
  return std::all_of(cps.begin(), cps.end(), [](const Checkpoint& c) { return c.passed(); });
}

/// Reference values used by the reproduction targets.
namespace reference {

inline const std::vector<double> kTable1A = {9.5, 10.0, 10.5, 11.0, 11.5, 12.0};
inline const std::vector<double> kTable1B = {46.7738, 44.4844, 42.4155, 40.5370, 38.8242, 37.2564};
inline const std::vector<double> kTable1PImax = {0.085, 0.094, 0.104, 0.113, 0.123, 0.134};
inline const std::vector<double> kTable1OmegaMaxT = {9.629, 9.103, 8.625, 8.188, 7.788, 7.420};

struct Table2Point {
  double kappa_ratio;
  double gamma_ratio;
  double fidelity;
};
inline const std::vector<Table2Point> kTable2 = {
    {0.01, 0.0, 0.9965}, {0.0, 0.01, 0.9955}, {0.02, 0.02, 0.9848}, {0.03, 0.03, 0.9783}, {0.04, 0.04, 0.9713}};

inline const std::vector<double> kThresholdLambdas = {20.0, 25.0, 30.0, 40.0, 60.0};

}  // namespace reference

}  // namespace sta::experiments
