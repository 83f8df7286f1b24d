#pragma once

// Three-level (spin-1) extension of the SU(2) design.
//
// The Λ-form H = [[0,Ωx,0],[Ωx,0,Ωy],[0,Ωy,0]] is conjugated by V into
// Ωx Jx + Ωy Jy and designed in the frame of R' = exp(iα/2 Jz) exp(-iθ Jy) exp(iβ/2 Jz).
// Only β = 0 with a pure Jz picture Hamiltonian is built here; a Jz term in
// the lab frame would become a direct 1<->3 coupling after conjugation by V.

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <utility>

#include "sta/errors.hpp"
#include "sta/linalg.hpp"
#include "sta/quadrature.hpp"
#include "sta/two_level.hpp"

namespace sta {

inline Op3 lambda_form(double omega_x, double omega_y) {
  Op3 h = Op3::Zero();
  h(0, 1) = h(1, 0) = omega_x;
  h(1, 2) = h(2, 1) = omega_y;
  return h;
}

inline Op3 rotation_spin1(double alpha, double theta, double beta) {
  Eigen::Matrix<Complex, 3, 1> left, right;
  left << std::exp(kI * (alpha / 2.0)), 1.0, std::exp(-kI * (alpha / 2.0));
  right << std::exp(kI * (beta / 2.0)), 1.0, std::exp(-kI * (beta / 2.0));
  return left.asDiagonal() * mat_exp_skew<3>(spin1(Axis::y), theta) * right.asDiagonal();
}

inline Op3 rotation_spin1(const RotationAngles& a) { return rotation_spin1(a.alpha, a.theta, a.beta); }

/// J-coefficients of R'† (Ωx Jx + Ωy Jy) R' + i (∂t R'†) R'.
inline AxisCoefficients transformed_coefficients_spin1(double omega_x, double omega_y, const RotationAngles& a) {
  const double ca = std::cos(a.alpha / 2.0), sa = std::sin(a.alpha / 2.0);
  const double cb = std::cos(a.beta / 2.0), sb = std::sin(a.beta / 2.0);
  const double ct = std::cos(a.theta), st = std::sin(a.theta);
  AxisCoefficients h;
  h.x = omega_x * (ca * cb * ct - sa * sb) - omega_y * (sa * cb * ct + ca * sb) + a.theta_dot * sb -
        a.alpha_dot / 2.0 * cb * st;
  h.y = omega_x * (ca * sb * ct + sa * cb) - omega_y * (sa * sb * ct - ca * cb) - a.theta_dot * cb -
        a.alpha_dot / 2.0 * sb * st;
  h.z = omega_x * ca * st - omega_y * sa * st + a.beta_dot / 2.0 + a.alpha_dot / 2.0 * ct;
  return h;
}

/// Direct (tan θ) form of the β = 0 recipe. Throws where cos θ vanishes.
inline std::pair<double, double> spin1_omegas_tan_form(const RotationAngles& a) {
  if (std::abs(std::cos(a.theta)) < 1e-12) {
    throw SingularSchedule("spin1 tan-form: cos(theta) vanishes");
  }
  const double t = std::tan(a.theta);
  const double ca = std::cos(a.alpha / 2.0), sa = std::sin(a.alpha / 2.0);
  return {a.theta_dot * sa + a.alpha_dot / 2.0 * ca * t, a.theta_dot * ca - a.alpha_dot / 2.0 * sa * t};
}

/// θ(s), θ'(s), μ'(s) and α(0); α is rebuilt as α(0) - ∫ 2 μ' cos θ.
struct MuSchedule {
  std::function<double(double)> theta;
  std::function<double(double)> theta_dot;
  std::function<double(double)> mu_dot;
  double alpha0 = std::numbers::pi;
};

/// θ, θ', α, α' given directly.
struct AlphaSchedule {
  std::function<double(double)> theta;
  std::function<double(double)> theta_dot;
  std::function<double(double)> alpha;
  std::function<double(double)> alpha_dot;
};

/// β = 0 spin-1 design in the singularity-free μ form:
///   Ω̃1 = θ' sin(α/2) - μ' sin θ cos(α/2),  Ω̃2 = θ' cos(α/2) + μ' sin θ sin(α/2),
///   α' = -2 μ' cos θ, residual f'_z = -μ'.
class ThreeLevelPulses {
 public:
  explicit ThreeLevelPulses(MuSchedule schedule, int cache_cells = 10000)
      : schedule_(std::move(schedule)),
        alpha_integral_(std::make_shared<const quad::CumulativeIntegral>(
            [th = schedule_.theta, mu = schedule_.mu_dot](double s) { return mu(s) * std::cos(th(s)); }, 0.0, 1.0,
            cache_cells)),
        mu_integral_(std::make_shared<const quad::CumulativeIntegral>(schedule_.mu_dot, 0.0, 1.0, cache_cells)) {}

  double theta(double s) const { return schedule_.theta(s); }
  double theta_dot(double s) const { return schedule_.theta_dot(s); }
  double mu_dot(double s) const { return schedule_.mu_dot(s); }
  double alpha(double s) const { return schedule_.alpha0 - 2.0 * (*alpha_integral_)(s); }
  double alpha_dot(double s) const { return -2.0 * mu_dot(s) * std::cos(theta(s)); }
  double residual(double s) const { return -mu_dot(s); }

  RotationAngles angles(double s) const {
    RotationAngles a;
    a.theta = theta(s);
    a.theta_dot = theta_dot(s);
    a.alpha = alpha(s);
    a.alpha_dot = alpha_dot(s);
    return a;
  }

  /// (Ω̃1, Ω̃2), the Jx and Jy coefficients.
  std::pair<double, double> omegas(double s) const {
    const double th = theta(s);
    const double half = alpha(s) / 2.0;
    const double td = theta_dot(s);
    const double md = mu_dot(s);
    return {td * std::sin(half) - md * std::sin(th) * std::cos(half),
            td * std::cos(half) + md * std::sin(th) * std::sin(half)};
  }
  double omega_x(double s) const { return omegas(s).first; }
  double omega_y(double s) const { return omegas(s).second; }

  /// Drive in the V picture, Ω̃1 Jx + Ω̃2 Jy.
  Op3 hamiltonian(double s) const {
    const auto [ox, oy] = omegas(s);
    return ox * spin1(Axis::x) + oy * spin1(Axis::y);
  }

  /// Physical three-level drive V H V†, i.e. the Λ form.
  Op3 lambda_hamiltonian(double s) const {
    const auto [ox, oy] = omegas(s);
    return lambda_form(ox, oy);
  }

  /// δ'_z = ∫ α'/cos θ = -2 ∫ μ'.
  double delta_z(double s) const {
    require_unit_interval(s, "spin1 delta_z");
    return -2.0 * (*mu_integral_)(s);
  }

  /// U'_O(s) = R'(s) exp(-i δ'_z/2 Jz); equals R'(0) at s = 0.
  Op3 evolution_operator(double s) const {
    const auto a = angles(s);
    return rotation_spin1(a.alpha, a.theta, 0.0) * mat_exp_skew<3>(spin1(Axis::z), delta_z(s) / 2.0);
  }

  /// Time-evolution operator from 0 to s in the V picture (identity at s = 0).
  Op3 propagator(double s) const {
    const auto a0 = angles(0.0);
    return evolution_operator(s) * rotation_spin1(a0.alpha, a0.theta, 0.0).adjoint();
  }

  const MuSchedule& schedule() const { return schedule_; }

 private:
  MuSchedule schedule_;
  std::shared_ptr<const quad::CumulativeIntegral> alpha_integral_;
  std::shared_ptr<const quad::CumulativeIntegral> mu_integral_;
};

inline ThreeLevelPulses design_spin1_beta0(MuSchedule schedule) { return ThreeLevelPulses(std::move(schedule)); }

/// α given directly: μ' = -α'/(2 cos θ). Where cos θ vanishes α' must vanish too,
/// and only at the endpoints, otherwise the schedule is singular.
inline ThreeLevelPulses design_spin1_beta0(const AlphaSchedule& schedule) {
  constexpr int kGrid = 10000;
  for (int k = 0; k <= kGrid; ++k) {
    const double s = static_cast<double>(k) / kGrid;
    const double c = std::cos(schedule.theta(s));
    if (std::abs(c) < 1e-9) {
      const bool endpoint = (k == 0 || k == kGrid);
      if (!endpoint || std::abs(schedule.alpha_dot(s)) > 1e-9) {
        throw SingularSchedule("design_spin1_beta0: alpha_dot/cos(theta) diverges at s = " + std::to_string(s));
      }
    }
  }
  auto mu = [th = schedule.theta, ad = schedule.alpha_dot](double s) { return -ad(s) / (2.0 * std::cos(th(s))); };
  return ThreeLevelPulses(
      MuSchedule{schedule.theta, schedule.theta_dot, detail::regularize_endpoints(mu), schedule.alpha(0.0)});
}

}  // namespace sta
