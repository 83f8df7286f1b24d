#pragma once

// Two NV centers coupled through one whispering-gallery mode.
//
// Single-excitation basis (NV1, NV2, cavity photons):
//   ψ1 = |f,g,0>  ψ2 = |e,g,0>  ψ3 = |g,g,1>  ψ4 = |g,e,0>  ψ5 = |g,f,0>
// plus ψ6 = |g,g,0>, reachable only through dissipation. Laser Ω1 drives
// ψ1<->ψ2, laser Ω2 drives ψ5<->ψ4 and the cavity couples ψ2,ψ4 <-> ψ3 with λ.

#include <unsupported/Eigen/NonLinearOptimization>

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sta/dynamics.hpp"
#include "sta/errors.hpp"
#include "sta/linalg.hpp"
#include "sta/quadrature.hpp"
#include "sta/spin1.hpp"

namespace sta::nv {

inline constexpr int kDim = 6;
using Op6 = Operator<kDim>;
using State6 = StateVector<kDim>;

enum Level : int { psi1 = 0, psi2, psi3, psi4, psi5, psi6 };

inline const std::array<std::string, kDim> kBasisLabels = {"|f,g,0>", "|e,g,0>", "|g,g,1>",
                                                          "|g,e,0>", "|g,f,0>", "|g,g,0>"};

inline State6 ket(Level level) { return basis_state<kDim>(level); }

struct NvConfig {
  double lambda = 30.0;
  double a = 11.0;
  std::optional<double> b;  // solved from a when empty
  double kappa = 0.0;
  double gamma = 0.0;

  void validate() const {
    if (!(lambda > 0.0)) throw ParameterError("lambda must be > 0");
    if (!(a > 0.0 && a < 32.0)) throw ParameterError("A = " + std::to_string(a) + " outside (0, 32)");
    if (!(kappa >= 0.0)) throw ParameterError("kappa must be >= 0");
    if (!(gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
  }
};

enum class Provenance { designed, gaussian_fit, stirap };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::designed: return "designed";
    case Provenance::gaussian_fit: return "gaussian_fit";
    case Provenance::stirap: return "stirap";
  }
  return "?";
}

/// Physical Rabi frequencies Ω1(s), Ω2(s) in units of 1/T.
struct PulsePair {
  std::function<double(double)> omega1;
  std::function<double(double)> omega2;
  Provenance provenance = Provenance::designed;
  std::vector<std::pair<std::string, double>> parameters;

  /// Both amplitudes multiplied by factor.
  PulsePair scaled(double factor) const {
    PulsePair out = *this;
    out.omega1 = [f = omega1, factor](double s) { return factor * f(s); };
    out.omega2 = [f = omega2, factor](double s) { return factor * f(s); };
    out.parameters.emplace_back("amplitude_scale", factor);
    return out;
  }
};

inline Op6 full_hamiltonian(double s, const PulsePair& pulses, double lambda) {
  Op6 h = Op6::Zero();
  h(psi1, psi2) = h(psi2, psi1) = pulses.omega1(s);
  h(psi5, psi4) = h(psi4, psi5) = pulses.omega2(s);
  h(psi2, psi3) = h(psi3, psi2) = lambda;
  h(psi4, psi3) = h(psi3, psi4) = lambda;
  return h;
}

/// Cavity coupling part of the Hamiltonian alone.
inline Op6 cavity_hamiltonian(double lambda) {
  PulsePair off{[](double) { return 0.0; }, [](double) { return 0.0; }, Provenance::designed, {}};
  return full_hamiltonian(0.0, off, lambda);
}

struct EigenPair {
  double value;
  State6 vector;
};

/// Analytic eigenpairs of the cavity coupling: dark φ1 (0), bright φ2 (+√2λ), φ3 (-√2λ).
inline std::array<EigenPair, 3> hc_eigensystem(double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("hc_eigensystem: lambda must be >= 0");
  const double r = 1.0 / std::numbers::sqrt2;
  State6 dark = (-ket(psi2) + ket(psi4)) * r;
  State6 plus = (ket(psi2) + std::numbers::sqrt2 * ket(psi3) + ket(psi4)) / 2.0;
  State6 minus = (ket(psi2) - std::numbers::sqrt2 * ket(psi3) + ket(psi4)) / 2.0;
  return {EigenPair{0.0, dark}, EigenPair{std::numbers::sqrt2 * lambda, plus},
          EigenPair{-std::numbers::sqrt2 * lambda, minus}};
}

/// Effective three-level Hamiltonian in the basis (ψ1, φ1, ψ5), valid for √2λ >> Ω.
inline Op3 effective_hamiltonian(double s, const PulsePair& pulses) {
  return lambda_form(-pulses.omega1(s) / std::numbers::sqrt2, pulses.omega2(s) / std::numbers::sqrt2);
}

/// θ = π/2 - (A/2) s²(1-s)², μ' = B s(1-s).
class NvSchedule {
 public:
  NvSchedule(double a, double b) : a_(a), b_(b) {
    if (!(a > 0.0 && a < 32.0)) throw ParameterError("A = " + std::to_string(a) + " outside (0, 32)");
    if (!std::isfinite(b)) throw ParameterError("B must be finite");
  }

  double a() const { return a_; }
  double b() const { return b_; }

  double theta(double s) const { return std::numbers::pi / 2.0 - a_ / 2.0 * std::pow(s * (1.0 - s), 2); }
  double theta_dot(double s) const { return a_ * s * (1.0 - s) * (2.0 * s - 1.0); }
  double mu_dot(double s) const { return b_ * s * (1.0 - s); }

  MuSchedule mu_schedule() const {
    return MuSchedule{[a = a_](double s) { return std::numbers::pi / 2.0 - a / 2.0 * std::pow(s * (1.0 - s), 2); },
                      [a = a_](double s) { return a * s * (1.0 - s) * (2.0 * s - 1.0); },
                      [b = b_](double s) { return b * s * (1.0 - s); }, std::numbers::pi};
  }

 private:
  double a_;
  double b_;
};

struct NvAngles {
  double theta;
  double theta_dot;
  double mu_dot;
  double alpha;
  double alpha_dot;
};

/// Pointwise schedule values; α by direct quadrature from 0.
inline NvAngles nv_schedules(double s, double a, double b) {
  require_unit_interval(s, "nv_schedules");
  const NvSchedule sched(a, b);
  const auto integrand = [&](double u) { return 2.0 * sched.mu_dot(u) * std::cos(sched.theta(u)); };
  NvAngles out;
  out.theta = sched.theta(s);
  out.theta_dot = sched.theta_dot(s);
  out.mu_dot = sched.mu_dot(s);
  out.alpha = std::numbers::pi - quad::integrate(integrand, 0.0, s, 1e-12);
  out.alpha_dot = -2.0 * out.mu_dot * std::cos(out.theta);
  return out;
}

/// B such that ∫ 2 μ' cos θ ds = π, which brings α from π at s = 0 to 0 at s = 1.
/// cos θ = sin((A/2) s²(1-s)²) makes the constraint linear in B.
inline double solve_b(double a) {
  if (!(a > 0.0 && a < 32.0)) throw ParameterError("solve_B: A = " + std::to_string(a) + " outside (0, 32)");
  const double integral = quad::integrate(
      [a](double s) { return 2.0 * s * (1.0 - s) * std::sin(a / 2.0 * std::pow(s * (1.0 - s), 2)); }, 0.0, 1.0, 1e-12);
  if (!(integral > 0.0)) throw QuadratureError("solve_B: constraint integral is not positive");
  return std::numbers::pi / integral;
}

/// Ω̃ (design convention) -> physical pulses: Ω1 = -√2 Ω̃1, Ω2 = √2 Ω̃2.
inline double physical_omega1(double design) { return -std::numbers::sqrt2 * design; }
inline double physical_omega2(double design) { return std::numbers::sqrt2 * design; }
inline double design_omega1(double physical) { return -physical / std::numbers::sqrt2; }
inline double design_omega2(double physical) { return physical / std::numbers::sqrt2; }

struct DesignedPulses {
  ThreeLevelPulses design;
  PulsePair pulses;
  double alpha_end = 0.0;
  bool transferring = true;  // false when B misses the α(1) = 0 constraint
  std::string warning;
};

inline DesignedPulses designed_pulses(double a, double b) {
  const NvSchedule sched(a, b);
  ThreeLevelPulses design = design_spin1_beta0(sched.mu_schedule());
  PulsePair pulses;
  // pulses are off outside [0, 1]
  pulses.omega1 = [design](double s) { return (s < 0.0 || s > 1.0) ? 0.0 : physical_omega1(design.omega_x(s)); };
  pulses.omega2 = [design](double s) { return (s < 0.0 || s > 1.0) ? 0.0 : physical_omega2(design.omega_y(s)); };
  pulses.provenance = Provenance::designed;
  pulses.parameters = {{"A", a}, {"B", b}};

  DesignedPulses out{design, pulses, design.alpha(1.0), true, {}};
  const double b_star = solve_b(a);
  if (std::abs(b - b_star) > 1e-6 * b_star) {
    out.transferring = false;
    out.warning = "B = " + std::to_string(b) + " violates the alpha(1) = 0 constraint (expected " +
                  std::to_string(b_star) + "); transfer is incomplete";
  }
  return out;
}

/// max over s of max(|Ω̃1|, |Ω̃2|): 2000-point scan refined by Brent's method.
inline double max_design_amplitude(const ThreeLevelPulses& design, int grid = 2000) {
  double best = 0.0;
  double best_s = 0.0;
  int best_comp = 0;
  for (int k = 0; k <= grid; ++k) {
    const double s = static_cast<double>(k) / grid;
    const auto [o1, o2] = design.omegas(s);
    if (std::abs(o1) > best) best = std::abs(o1), best_s = s, best_comp = 0;
    if (std::abs(o2) > best) best = std::abs(o2), best_s = s, best_comp = 1;
  }
  const double h = 1.0 / grid;
  const auto neg = [&](double s) {
    const auto o = design.omegas(s);
    return -std::abs(best_comp == 0 ? o.first : o.second);
  };
  const auto [s_opt, f_opt] =
      boost::math::tools::brent_find_minima(neg, std::max(0.0, best_s - h), std::min(1.0, best_s + h), 50);
  (void)s_opt;
  return std::max(best, -f_opt);
}

/// ζ exp(-((s - τ)/σ)²).
struct GaussianParams {
  double zeta = 0.0;
  double tau = 0.0;
  double sigma = 1.0;

  double operator()(double s) const { return zeta * std::exp(-std::pow((s - tau) / sigma, 2)); }
};

struct GaussianPair {
  GaussianParams first;
  GaussianParams second;
};

/// Fitted values quoted for A = 11, B = 40.537 (design convention Ω̃).
inline constexpr GaussianPair kReferenceGaussians{{-8.283, 0.6277, 0.299}, {8.283, 0.3722, 0.299}};

namespace detail {

struct GaussianResidual {
  std::span<const double> s;
  std::span<const double> y;

  int inputs() const { return 3; }
  int values() const { return static_cast<int>(s.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t i = 0; i < s.size(); ++i) {
      r(static_cast<Eigen::Index>(i)) = GaussianParams{p(0), p(1), p(2)}(s[i]) - y[i];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double u = (s[i] - p(1)) / p(2);
      const double e = std::exp(-u * u);
      const auto row = static_cast<Eigen::Index>(i);
      jac(row, 0) = e;
      jac(row, 1) = p(0) * e * 2.0 * u / p(2);
      jac(row, 2) = p(0) * e * 2.0 * u * u / p(2);
    }
    return 0;
  }
};

}  // namespace detail

struct FittedGaussian {
  GaussianParams params;
  double relative_residual = 0.0;  // ‖fit - y‖ / ‖y‖
};

/// Unweighted least-squares Gaussian fit. Initial guess: peak value, argmax and
/// the half-width at which |y| falls to |peak|/e.
inline FittedGaussian fit_gaussian(std::span<const double> s, std::span<const double> y) {
  if (s.size() != y.size() || s.size() < 8) throw ParameterError("fit_gaussian: need matching samples (>= 8)");
  std::size_t peak = 0;
  for (std::size_t i = 1; i < y.size(); ++i) {
    if (std::abs(y[i]) > std::abs(y[peak])) peak = i;
  }
  const double level = std::abs(y[peak]) / std::numbers::e;
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && std::abs(y[lo]) > level) --lo;
  while (hi + 1 < y.size() && std::abs(y[hi]) > level) ++hi;
  const double width = std::max((s[hi] - s[lo]) / 2.0, s[1] - s[0]);

  Eigen::VectorXd p(3);
  p << y[peak], s[peak], width;
  detail::GaussianResidual functor{s, y};
  Eigen::LevenbergMarquardt<detail::GaussianResidual> lm(functor);
  lm.parameters.ftol = 1e-15;
  lm.parameters.xtol = 1e-15;
  lm.parameters.maxfev = 20000;
  lm.minimize(p);

  Eigen::VectorXd r(static_cast<Eigen::Index>(s.size()));
  functor(p, r);
  double ynorm = 0.0;
  for (double v : y) ynorm += v * v;
  FittedGaussian out{{p(0), p(1), std::abs(p(2))}, r.norm() / std::sqrt(ynorm)};
  if (!(out.relative_residual <= 0.1)) {
    throw FitError("fit_gaussian: relative residual " + std::to_string(out.relative_residual) +
                   " > 0.1 (pulse is not single-lobed)");
  }
  return out;
}

inline PulsePair gaussian_pulses(const GaussianPair& g) {
  if (!(g.first.sigma > 0.0 && g.second.sigma > 0.0)) throw ParameterError("gaussian_pulses: sigma must be > 0");
  PulsePair out;
  out.omega1 = [p = g.first](double s) { return physical_omega1(p(s)); };
  out.omega2 = [p = g.second](double s) { return physical_omega2(p(s)); };
  out.provenance = Provenance::gaussian_fit;
  out.parameters = {{"zeta1", g.first.zeta},   {"tau1", g.first.tau},   {"sigma1", g.first.sigma},
                    {"zeta2", g.second.zeta},  {"tau2", g.second.tau},  {"sigma2", g.second.sigma}};
  return out;
}

struct GaussianFit {
  GaussianPair params;
  double residual1 = 0.0;
  double residual2 = 0.0;

  PulsePair pulses() const { return gaussian_pulses(params); }
};

/// Fits each pulse in the design convention (Ω̃1 = -Ω1/√2, Ω̃2 = Ω2/√2) on a uniform grid over [0, 1].
inline GaussianFit gaussian_fit(const PulsePair& pulses, int points = 2000) {
  if (points < 1000) throw ParameterError("gaussian_fit: use at least 1000 grid points");
  std::vector<double> s(static_cast<std::size_t>(points)), y1(s.size()), y2(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = static_cast<double>(i) / (points - 1);
    y1[i] = design_omega1(pulses.omega1(s[i]));
    y2[i] = design_omega2(pulses.omega2(s[i]));
  }
  const auto f1 = fit_gaussian(s, y1);
  const auto f2 = fit_gaussian(s, y2);
  return {{f1.params, f2.params}, f1.relative_residual, f2.relative_residual};
}

/// Gaussian STIRAP pair, Ω1 (pump) centered at t1 and Ω2 (Stokes) at t2.
inline PulsePair stirap_pulses(double omega0, double t1 = 0.54, double t2 = 0.40, double tc = 0.14) {
  if (!(tc > 0.0)) throw ParameterError("stirap_pulses: tc must be > 0");
  PulsePair out;
  out.omega1 = [=](double s) { return omega0 * std::exp(-std::pow((s - t1) / tc, 2)); };
  out.omega2 = [=](double s) { return omega0 * std::exp(-std::pow((s - t2) / tc, 2)); };
  out.provenance = Provenance::stirap;
  out.parameters = {{"omega0", omega0}, {"t1", t1}, {"t2", t2}, {"tc", tc}};
  return out;
}

/// full_branching: every excited state decays to both ground levels at rate γ
/// (|e>→|g> leaves the single-excitation manifold to ψ6).
/// truncated_subspace: the emission rate γ is split evenly between the |f> and
/// |g> branches and only the |f> branch, which stays inside span{ψ1..ψ5}, is kept.
/// Cavity loss ψ3 → ψ6 at rate κ in both.
enum class DecayModel { truncated_subspace, full_branching };

inline const char* to_string(DecayModel m) {
  return m == DecayModel::truncated_subspace ? "truncated_subspace" : "full_branching";
}

inline std::vector<CollapseChannel<kDim>> collapse_channels(double kappa, double gamma, DecayModel model,
                                                            DissipatorForm form = DissipatorForm::standard) {
  const auto jump = [form](Level to, Level from, double rate) {
    Op6 op = Op6::Zero();
    op(to, from) = 1.0;
    // the printed ordering takes the raising operator |e><l| and uses its adjoint as the jump
    if (form == DissipatorForm::printed) op.transposeInPlace();
    return CollapseChannel<kDim>{op, rate};
  };
  std::vector<CollapseChannel<kDim>> out;
  if (kappa > 0.0) out.push_back(jump(psi6, psi3, kappa));
  if (gamma > 0.0) {
    if (model == DecayModel::full_branching) {
      out.push_back(jump(psi6, psi2, gamma));
      out.push_back(jump(psi1, psi2, gamma));
      out.push_back(jump(psi6, psi4, gamma));
      out.push_back(jump(psi5, psi4, gamma));
    } else {
      out.push_back(jump(psi1, psi2, gamma / 2.0));
      out.push_back(jump(psi5, psi4, gamma / 2.0));
    }
  }
  return out;
}

}  // namespace sta::nv
