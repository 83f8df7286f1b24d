#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sta/errors.hpp"

namespace sta::quad {

/// Adaptive Gauss-Kronrod integral of f over [a, b] to an absolute tolerance.
/// The rule never samples the interval endpoints, so integrands with removable
/// 0/0 points at a or b are fine. The relative target is floored at 1e-14 and
/// the bisection depth capped, since rounding noise in f would otherwise drive
/// the recursion to its limit.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  if (a == b) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  Rule::integrate(f, a, b, 0, 0.0, &error, &l1);
  const double rel_tol = std::clamp(abs_tol / std::max(l1, 1e-300), 1e-14, 1e-2);
  const double value = Rule::integrate(f, a, b, 15, rel_tol, &error, &l1);
  if (!std::isfinite(value) || !std::isfinite(error) || error > std::max(1e3 * abs_tol, 1e-8 * l1)) {
    throw QuadratureError("quadrature failed to converge on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "] (error estimate " + std::to_string(error) + ")");
  }
  return value;
}

/// Non-adaptive 31-point Kronrod rule; for short intervals of smooth integrands.
template <class F>
double integrate_fixed(F&& f, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0);
}

/// Running integral x -> ∫_a^x f. Cell totals on a uniform grid are computed
/// once with a fixed Kronrod rule; each evaluation adds a 15-point
/// Gauss-Legendre integral over the partial cell. Both are exact to rounding
/// for smooth f on cells of width <= 1e-3.
class CumulativeIntegral {
 public:
  CumulativeIntegral(std::function<double(double)> f, double a, double b, int cells = 10000)
      : f_(std::move(f)), a_(a), b_(b), h_((b - a) / cells), nodes_(cells + 1, 0.0) {
    for (int k = 0; k < cells; ++k) {
      nodes_[k + 1] = nodes_[k] + integrate_fixed(f_, a_ + k * h_, a_ + (k + 1) * h_);
    }
  }

  double operator()(double x) const {
    if (x <= a_) return 0.0;
    if (x >= b_) return nodes_.back();
    const auto k = std::min<std::size_t>(static_cast<std::size_t>((x - a_) / h_), nodes_.size() - 2);
    const double left = a_ + static_cast<double>(k) * h_;
    if (x <= left) return nodes_[k];
    return nodes_[k] + boost::math::quadrature::gauss<double, 15>::integrate(f_, left, x);
  }

  double total() const { return nodes_.back(); }
  const std::function<double(double)>& integrand() const { return f_; }

 private:
  std::function<double(double)> f_;
  double a_;
  double b_;
  double h_;
  std::vector<double> nodes_;
};

}  // namespace sta::quad
