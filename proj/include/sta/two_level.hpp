#pragma once

// SU(2) picture-change design for two-level systems.
//
// A drive H0 = g_x σx + g_y σy + g_z σz is viewed in the frame of
//   R = exp(iα/2 σz) exp(-iθ σy) exp(iβ/2 σz),   α = ξ-η, β = ξ+η,
// where H = R† H0 R + i (∂t R†) R. Choosing the angle schedules and
// demanding that H has a single nonzero axis fixes the g_k; the evolution
// operator then follows in closed form as U = R(t) exp(-i δ σ_k) R†(0).

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>

#include "sta/errors.hpp"
#include "sta/linalg.hpp"
#include "sta/quadrature.hpp"

namespace sta {

/// θ, α = ξ-η, β = ξ+η (radians) and their time derivatives (rad/T).
struct RotationAngles {
  double theta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double theta_dot = 0.0;
  double alpha_dot = 0.0;
  double beta_dot = 0.0;
};

using AngleSchedule = std::function<RotationAngles(double)>;

struct AxisCoefficients {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Op2 pauli_combination(const AxisCoefficients& c) {
  return c.x * pauli(Axis::x) + c.y * pauli(Axis::y) + c.z * pauli(Axis::z);
}

inline void require_unit_interval(double s, const char* what) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw RangeError(std::string(what) + ": normalized time " + std::to_string(s) + " outside [0, 1]");
  }
}

inline Op2 rotation_matrix(const RotationAngles& a) {
  const Complex p = std::exp(kI * (a.alpha / 2.0));
  const Complex q = std::exp(kI * (a.beta / 2.0));
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  // exp(iα/2 σz) exp(-iθ σy) exp(iβ/2 σz), multiplied out
  Op2 r;
  r << p * q * c, -p * std::conj(q) * s,
       std::conj(p) * q * s, std::conj(p * q) * c;
  return r;
}

/// σ-coefficients of R† H0 R + i (∂t R†) R.
inline AxisCoefficients transformed_coefficients(const AxisCoefficients& g, const RotationAngles& a) {
  const double ca = std::cos(a.alpha), sa = std::sin(a.alpha);
  const double cb = std::cos(a.beta), sb = std::sin(a.beta);
  const double c2 = std::cos(2.0 * a.theta), s2 = std::sin(2.0 * a.theta);
  const double sc = std::sin(a.theta) * std::cos(a.theta);

  AxisCoefficients h;
  h.x = g.x * (ca * cb * c2 - sa * sb) - g.y * (sa * cb * c2 + ca * sb) - g.z * cb * s2;
  h.y = g.x * (ca * sb * c2 + sa * cb) - g.y * (sa * sb * c2 - ca * cb) - g.z * sb * s2;
  h.z = g.x * ca * s2 - g.y * sa * s2 + g.z * c2;

  h.x += a.theta_dot * sb - a.alpha_dot * cb * sc;
  h.y += -a.theta_dot * cb - a.alpha_dot * sb * sc;
  h.z += a.beta_dot / 2.0 + a.alpha_dot / 2.0 * c2;
  return h;
}

namespace detail {

inline constexpr double kEndpointEps = 1e-6;

// Several recipes are 0/0 at s = 0 and s = 1. Inside [ε, 1-ε] the raw formula is
// used; the endpoint value is the linear extrapolation 2f(ε) - f(2ε), which is
// accurate to O(ε²), and [0, ε) blends linearly towards it.
inline std::function<double(double)> regularize_endpoints(std::function<double(double)> raw) {
  constexpr double eps = kEndpointEps;
  const double lo_eps = raw(eps);
  const double lo_lim = 2.0 * lo_eps - raw(2.0 * eps);
  const double hi_eps = raw(1.0 - eps);
  const double hi_lim = 2.0 * hi_eps - raw(1.0 - 2.0 * eps);
  return [raw = std::move(raw), lo_eps, lo_lim, hi_eps, hi_lim](double s) {
    if (s < eps) return lo_lim + (lo_eps - lo_lim) * (s / eps);
    if (s > 1.0 - eps) return hi_lim + (hi_eps - hi_lim) * ((1.0 - s) / eps);
    return raw(s);
  };
}

inline void check_interior(const AngleSchedule& schedule, double (*denominator)(const RotationAngles&),
                           const char* what) {
  constexpr int kGrid = 10000;
  for (int k = 1; k < kGrid; ++k) {
    if (std::abs(denominator(schedule(static_cast<double>(k) / kGrid))) < 1e-12) {
      throw SingularSchedule(std::string(what) + " vanishes at s = " +
                             std::to_string(static_cast<double>(k) / kGrid));
    }
  }
}

}  // namespace detail

/// Designed two-level drive: g(s), the single surviving picture coefficient f(s)
/// on residual_axis, and the closed-form evolution operator.
class TwoLevelPulses {
 public:
  using Scalar = std::function<double(double)>;

  TwoLevelPulses(AngleSchedule schedule, Scalar gx, Scalar gy, Scalar gz, Scalar residual, Axis residual_axis)
      : schedule_(std::move(schedule)),
        gx_(std::move(gx)),
        gy_(std::move(gy)),
        gz_(std::move(gz)),
        residual_(std::move(residual)),
        axis_(residual_axis),
        phase_(std::make_shared<const quad::CumulativeIntegral>(residual_, 0.0, 1.0, 2000)) {}

  AxisCoefficients drive(double s) const { return {gx_(s), gy_(s), gz_(s)}; }
  double residual(double s) const { return residual_(s); }
  Axis residual_axis() const { return axis_; }
  const AngleSchedule& schedule() const { return schedule_; }

  Op2 hamiltonian(double s) const { return pauli_combination(drive(s)); }

  /// ∫_0^s f(s') ds'.
  double residual_phase(double s) const {
    require_unit_interval(s, "residual_phase");
    return (*phase_)(s);
  }

  /// U_O(s) = R(s) exp(-i δ σ_k) R†(0); identity at s = 0.
  Op2 evolution_operator(double s) const {
    const Op2 picture = mat_exp_skew<2>(pauli(axis_), residual_phase(s));
    return rotation_matrix(schedule_(s)) * picture * rotation_matrix(schedule_(0.0)).adjoint();
  }

 private:
  AngleSchedule schedule_;
  Scalar gx_, gy_, gz_, residual_;
  Axis axis_;
  std::shared_ptr<const quad::CumulativeIntegral> phase_;
};

/// β = 0 polynomial family: θ from 0 to π/2, α from π/2 back to π/2.
struct Case1Schedule {
  RotationAngles operator()(double s) const {
    require_unit_interval(s, "case1_schedules");
    const double pi = std::numbers::pi;
    RotationAngles a;
    a.theta = pi / 2.0 * s * s * (10.0 - 20.0 * s + 15.0 * s * s - 4.0 * s * s * s);
    a.theta_dot = 10.0 * pi * s * std::pow(1.0 - s, 3);
    a.alpha = s * s * (0.5 - s + 0.5 * s * s) + pi / 2.0;
    a.alpha_dot = s * (1.0 - s) * (1.0 - 2.0 * s);
    return a;
  }
};

/// α = 0 polynomial family: θ from -π/4 to π/4, β = A1 s²(1-s)²/2.
class Case2Schedule {
 public:
  explicit Case2Schedule(double a1) : a1_(a1) {
    if (!(a1 > 0.0 && a1 < 30.0 * std::numbers::pi)) {
      throw ParameterError("case2_schedules: A1 = " + std::to_string(a1) + " outside (0, 30*pi)");
    }
  }

  double a1() const { return a1_; }

  RotationAngles operator()(double s) const {
    require_unit_interval(s, "case2_schedules");
    const double pi = std::numbers::pi;
    RotationAngles a;
    a.beta = a1_ * s * s * (0.5 - s + 0.5 * s * s);
    a.beta_dot = a1_ * s * (1.0 - s) * (1.0 - 2.0 * s);
    a.theta = pi * std::pow(s, 4) * (17.5 - 42.0 * s + 35.0 * s * s - 10.0 * s * s * s) - pi / 4.0;
    a.theta_dot = 70.0 * pi * std::pow(s * (1.0 - s), 3);
    return a;
  }

 private:
  double a1_;
};

inline RotationAngles case1_schedules(double s) { return Case1Schedule{}(s); }
inline RotationAngles case2_schedules(double s, double a1) { return Case2Schedule{a1}(s); }

/// Case I (β = 0, g_y = 0, H = f_z σz):
///   g_x = θ'/sin α,  g_z = θ' cot α cot 2θ - α'/2,  f_z = θ' cot α / sin 2θ.
/// For the built-in schedules every 0/0 limit at s ∈ {0, 1} is zero.
inline TwoLevelPulses design_case1(AngleSchedule schedule) {
  detail::check_interior(schedule, [](const RotationAngles& a) { return std::sin(a.alpha); }, "design_case1: sin(alpha)");
  auto gx = [schedule](double s) {
    const auto a = schedule(s);
    return a.theta_dot / std::sin(a.alpha);
  };
  auto gz = [schedule](double s) {
    const auto a = schedule(s);
    return a.theta_dot / std::tan(a.alpha) / std::tan(2.0 * a.theta) - a.alpha_dot / 2.0;
  };
  auto fz = [schedule](double s) {
    const auto a = schedule(s);
    return a.theta_dot / std::tan(a.alpha) / std::sin(2.0 * a.theta);
  };
  return TwoLevelPulses(schedule, detail::regularize_endpoints(gx), [](double) { return 0.0; },
                        detail::regularize_endpoints(gz), detail::regularize_endpoints(fz), Axis::z);
}

/// Case II (α = 0, g_y = 0, H = f_x σx):
///   g_x = θ' cos 2θ cot β - β'/2 sin 2θ,  g_z = -θ' sin 2θ cot β - β'/2 cos 2θ,  f_x = θ'/sin β.
inline TwoLevelPulses design_case2(AngleSchedule schedule) {
  detail::check_interior(schedule, [](const RotationAngles& a) { return std::sin(a.beta); }, "design_case2: sin(beta)");
  auto gx = [schedule](double s) {
    const auto a = schedule(s);
    return a.theta_dot * std::cos(2.0 * a.theta) / std::tan(a.beta) - a.beta_dot / 2.0 * std::sin(2.0 * a.theta);
  };
  auto gz = [schedule](double s) {
    const auto a = schedule(s);
    return -a.theta_dot * std::sin(2.0 * a.theta) / std::tan(a.beta) - a.beta_dot / 2.0 * std::cos(2.0 * a.theta);
  };
  auto fx = [schedule](double s) {
    const auto a = schedule(s);
    return a.theta_dot / std::sin(a.beta);
  };
  return TwoLevelPulses(schedule, detail::regularize_endpoints(gx), [](double) { return 0.0; },
                        detail::regularize_endpoints(gz), detail::regularize_endpoints(fx), Axis::x);
}

inline TwoLevelPulses design_case2(double a1) { return design_case2(Case2Schedule{a1}); }

inline Op2 evolution_operator_case1(double s, const AngleSchedule& schedule) {
  return design_case1(schedule).evolution_operator(s);
}

inline Op2 evolution_operator_case2(double s, const AngleSchedule& schedule) {
  return design_case2(schedule).evolution_operator(s);
}

}  // namespace sta
