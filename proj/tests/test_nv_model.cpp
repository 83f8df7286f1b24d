#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <vector>

#include "sta/dynamics.hpp"
#include "sta/errors.hpp"
#include "sta/nv_model.hpp"

using namespace sta;
using namespace sta::nv;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::numbers::sqrt2;

PulsePair constant_pulses(double o1, double o2) {
  return {[o1](double) { return o1; }, [o2](double) { return o2; }, Provenance::designed, {}};
}

/// π / ∫ 2 s(1-s) sin((A/2) s²(1-s)²) ds by composite Simpson.
double b_oracle(double a) {
  constexpr int n = 20000;
  const auto f = [a](double s) { return 2 * s * (1 - s) * std::sin(a / 2 * std::pow(s * (1 - s), 2)); };
  double sum = f(0) + f(1);
  for (int k = 1; k < n; ++k) sum += (k % 2 ? 4 : 2) * f(static_cast<double>(k) / n);
  return kPi / (sum / (3.0 * n));
}

std::vector<double> uniform(int n) {
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = static_cast<double>(i) / (n - 1);
  return s;
}

}  // namespace

TEST(FullHamiltonian, CouplingStructure) {
  const Op6 h = full_hamiltonian(0.3, constant_pulses(1.5, -2.0), 30.0);
  EXPECT_LT(hermiticity_defect<6>(h), 1e-15);
  EXPECT_EQ(h(psi1, psi2), Complex(1.5));
  EXPECT_EQ(h(psi4, psi5), Complex(-2.0));
  EXPECT_EQ(h(psi2, psi3), Complex(30.0));
  EXPECT_EQ(h(psi3, psi4), Complex(30.0));
  EXPECT_EQ(h(psi1, psi5), Complex(0.0));
  EXPECT_EQ(h.row(psi6).cwiseAbs().sum(), 0.0);
  EXPECT_EQ(h.diagonal().cwiseAbs().sum(), 0.0);
}

TEST(CavityEigensystem, MatchesDenseSolver) {
  for (double lambda : {1.0, 30.0}) {
    const Op6 hc = cavity_hamiltonian(lambda);
    Eigen::SelfAdjointEigenSolver<Op6> dense(hc);
    EXPECT_NEAR(dense.eigenvalues()(0), -kSqrt2 * lambda, 1e-12);
    EXPECT_NEAR(dense.eigenvalues()(5), kSqrt2 * lambda, 1e-12);
    const auto pairs = hc_eigensystem(lambda);
    for (const auto& p : pairs) {
      EXPECT_NEAR(p.vector.norm(), 1.0, 1e-15);
      EXPECT_LT(max_abs(State6(hc * p.vector - p.value * p.vector)), 1e-12);
    }
    EXPECT_NEAR(std::abs(pairs[0].vector.dot(pairs[1].vector)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(pairs[1].vector.dot(pairs[2].vector)), 0.0, 1e-15);
  }
  EXPECT_THROW(hc_eigensystem(-1.0), ParameterError);
}

TEST(EffectiveHamiltonian, ProjectionOntoDarkSubspace) {
  const auto pulses = constant_pulses(2.3, -0.7);
  const State6 dark = hc_eigensystem(30.0)[0].vector;
  Eigen::Matrix<Complex, 6, 3> p;
  p.col(0) = ket(psi1);
  p.col(1) = dark;
  p.col(2) = ket(psi5);
  const Op3 projected = p.adjoint() * full_hamiltonian(0.0, pulses, 30.0) * p;
  EXPECT_LT(max_abs(Op3(projected - effective_hamiltonian(0.0, pulses))), 1e-15);
}

TEST(NvSchedules, ValuesAndBoundaries) {
  const double b = solve_b(11.0);
  const auto start = nv_schedules(0.0, 11.0, b);
  EXPECT_DOUBLE_EQ(start.theta, kPi / 2);
  EXPECT_DOUBLE_EQ(start.alpha, kPi);
  EXPECT_EQ(start.mu_dot, 0.0);
  const auto mid = nv_schedules(0.5, 11.0, b);
  EXPECT_NEAR(mid.theta, kPi / 2 - 11.0 / 32, 1e-15);
  EXPECT_NEAR(mid.mu_dot, b / 4, 1e-13);
  EXPECT_NEAR(mid.theta_dot, 0.0, 1e-15);
  EXPECT_NEAR(mid.alpha, kPi / 2, 1e-9);  // α is antisymmetric about s = 1/2
  EXPECT_NEAR(nv_schedules(1.0, 11.0, b).alpha, 0.0, 1e-9);
  EXPECT_THROW(nv_schedules(1.2, 11.0, b), RangeError);
  EXPECT_THROW(nv_schedules(0.5, 33.0, b), ParameterError);
}

TEST(SolveB, MatchesQuadratureOracleAndReference) {
  for (double a : {1.0, 9.5, 11.0, 12.0, 20.0}) EXPECT_NEAR(solve_b(a), b_oracle(a), 1e-8) << "A = " << a;
  const std::vector<std::pair<double, double>> table = {{9.5, 46.7738}, {10.0, 44.4844}, {10.5, 42.4155},
                                                        {11.0, 40.5370}, {11.5, 38.8242}, {12.0, 37.2564}};
  for (const auto& [a, b] : table) EXPECT_NEAR(solve_b(a), b, 0.002) << "A = " << a;
  EXPECT_THROW(solve_b(0.0), ParameterError);
}

TEST(DesignedPulses, AmplitudeEndpointsAndSupport) {
  const auto d = designed_pulses(11.0, solve_b(11.0));
  EXPECT_TRUE(d.transferring);
  EXPECT_TRUE(d.warning.empty());
  EXPECT_NEAR(d.alpha_end, 0.0, 1e-9);
  EXPECT_NEAR(max_design_amplitude(d.design), 8.188, 0.01);
  for (double s : {0.0, 1.0}) {
    EXPECT_LT(std::abs(d.pulses.omega1(s)), 1e-8);
    EXPECT_LT(std::abs(d.pulses.omega2(s)), 1e-8);
  }
  EXPECT_EQ(d.pulses.omega1(1.2), 0.0);
  EXPECT_EQ(d.pulses.omega2(-0.1), 0.0);
  // physical amplitudes are √2 times the design ones, with a sign flip on Ω1
  EXPECT_NEAR(d.pulses.omega1(0.4), -kSqrt2 * d.design.omega_x(0.4), 1e-12);
  EXPECT_NEAR(d.pulses.omega2(0.4), kSqrt2 * d.design.omega_y(0.4), 1e-12);
}

TEST(DesignedPulses, MistunedBFlagsNoTransfer) {
  const auto d = designed_pulses(11.0, 30.0);
  EXPECT_FALSE(d.transferring);
  EXPECT_FALSE(d.warning.empty());
  EXPECT_GT(std::abs(d.alpha_end), 0.1);
}

TEST(DesignedPulses, TableTrendsAreMonotone) {
  double last_b = 1e9, last_amp = 1e9;
  for (double a : {9.5, 10.0, 10.5, 11.0, 11.5, 12.0}) {
    const double b = solve_b(a);
    const double amp = max_design_amplitude(designed_pulses(a, b).design);
    EXPECT_LT(b, last_b);
    EXPECT_LT(amp, last_amp);
    last_b = b;
    last_amp = amp;
  }
}

TEST(GaussianFit, RecoversExactGaussian) {
  const auto s = uniform(2000);
  std::vector<double> y(s.size());
  const GaussianParams truth{-3.7, 0.41, 0.17};
  for (std::size_t i = 0; i < s.size(); ++i) y[i] = truth(s[i]);
  const auto fit = fit_gaussian(s, y);
  EXPECT_NEAR(fit.params.zeta, truth.zeta, 1e-8);
  EXPECT_NEAR(fit.params.tau, truth.tau, 1e-8);
  EXPECT_NEAR(fit.params.sigma, truth.sigma, 1e-8);
  EXPECT_LT(fit.relative_residual, 1e-8);
}

TEST(GaussianFit, DesignedPulsesMatchReferenceParameters) {
  const auto fit = gaussian_fit(designed_pulses(11.0, solve_b(11.0)).pulses);
  const auto close = [](double got, double want) { return std::abs(got - want) <= 0.02 * std::abs(want); };
  EXPECT_TRUE(close(fit.params.first.zeta, kReferenceGaussians.first.zeta)) << fit.params.first.zeta;
  EXPECT_TRUE(close(fit.params.first.tau, kReferenceGaussians.first.tau)) << fit.params.first.tau;
  EXPECT_TRUE(close(fit.params.first.sigma, kReferenceGaussians.first.sigma)) << fit.params.first.sigma;
  EXPECT_TRUE(close(fit.params.second.zeta, kReferenceGaussians.second.zeta)) << fit.params.second.zeta;
  EXPECT_TRUE(close(fit.params.second.tau, kReferenceGaussians.second.tau)) << fit.params.second.tau;
  EXPECT_TRUE(close(fit.params.second.sigma, kReferenceGaussians.second.sigma)) << fit.params.second.sigma;
  EXPECT_NEAR(fit.params.first.tau + fit.params.second.tau, 1.0, 1e-6);  // mirror symmetry
  EXPECT_THROW(gaussian_fit(designed_pulses(11.0, solve_b(11.0)).pulses, 500), ParameterError);
}

TEST(GaussianFit, MultiLobedInputRejected) {
  const auto s = uniform(2000);
  std::vector<double> y(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) y[i] = std::sin(6 * kPi * s[i]);
  EXPECT_THROW(fit_gaussian(s, y), FitError);
}

TEST(GaussianPulses, PeaksAndMirrorSymmetry) {
  const auto p = gaussian_pulses(kReferenceGaussians);
  EXPECT_NEAR(p.omega1(0.6277), kSqrt2 * 8.283, 1e-12);
  EXPECT_NEAR(p.omega2(0.3722), kSqrt2 * 8.283, 1e-12);
  EXPECT_NEAR(p.omega1(0.6277 + 0.1), p.omega1(0.6277 - 0.1), 1e-12);
  EXPECT_EQ(p.provenance, Provenance::gaussian_fit);
  EXPECT_THROW(gaussian_pulses({{1, 0.5, 0}, {1, 0.5, 1}}), ParameterError);
}

TEST(StirapPulses, ShapeAndOrdering) {
  const auto p = stirap_pulses(12.0);
  EXPECT_DOUBLE_EQ(p.omega1(0.54), 12.0);
  EXPECT_DOUBLE_EQ(p.omega2(0.40), 12.0);
  EXPECT_NEAR(p.omega1(0.40), 12.0 * std::exp(-1.0), 1e-12);
  EXPECT_GT(p.omega2(0.2), p.omega1(0.2));  // Stokes first
  EXPECT_THROW(stirap_pulses(1.0, 0.5, 0.4, 0.0), ParameterError);
}

TEST(CollapseChannels, Mapping) {
  const auto trunc = collapse_channels(0.3, 0.2, DecayModel::truncated_subspace);
  ASSERT_EQ(trunc.size(), 3u);
  EXPECT_EQ(trunc[0].op(psi6, psi3), Complex(1.0));
  EXPECT_DOUBLE_EQ(trunc[0].rate, 0.3);
  EXPECT_EQ(trunc[1].op(psi1, psi2), Complex(1.0));
  EXPECT_DOUBLE_EQ(trunc[1].rate, 0.1);
  EXPECT_EQ(trunc[2].op(psi5, psi4), Complex(1.0));

  const auto full = collapse_channels(0.0, 0.2, DecayModel::full_branching);
  ASSERT_EQ(full.size(), 4u);
  for (const auto& ch : full) {
    EXPECT_DOUBLE_EQ(ch.rate, 0.2);
    EXPECT_DOUBLE_EQ(ch.op.cwiseAbs().sum(), 1.0);
  }
  const auto printed = collapse_channels(0.3, 0.0, DecayModel::full_branching, DissipatorForm::printed);
  ASSERT_EQ(printed.size(), 1u);
  EXPECT_EQ(printed[0].op(psi3, psi6), Complex(1.0));
  EXPECT_TRUE(collapse_channels(0, 0, DecayModel::full_branching).empty());
}

TEST(NvConfig, Validation) {
  NvConfig c;
  EXPECT_NO_THROW(c.validate());
  c.kappa = -0.1;
  EXPECT_THROW(c.validate(), ParameterError);
  c = NvConfig{};
  c.lambda = 0.0;
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(NvDynamics, SinkStaysEmptyAndEffectiveModelAgrees) {
  const auto d = designed_pulses(11.0, solve_b(11.0));
  StateOptions<6> so;
  so.record_states = false;
  so.target = ket(psi5);
  const auto full = propagate_state<6>([&](double s) { return full_hamiltonian(s, d.pulses, 30.0); }, ket(psi1),
                                       TimeGrid{0, 1, 10000}, so);
  double sink = 0.0;
  for (const auto& p : full.populations) sink = std::max(sink, p[psi6]);
  EXPECT_LT(sink, 1e-24);
  EXPECT_LT(full.max_drift, 1e-8);

  StateOptions<3> eo;
  eo.record_states = false;
  eo.target = basis_state<3>(2);
  const auto eff = propagate_state<3>([&](double s) { return effective_hamiltonian(s, d.pulses); },
                                      basis_state<3>(0), TimeGrid{0, 1, 10000}, eo);
  EXPECT_NEAR(eff.fidelity.back(), 1.0, 1e-6);
  EXPECT_LT(std::abs(full.fidelity.back() - eff.fidelity.back()), 0.01);
  // peak dark-state population of the effective model follows from θ at s = 1/2
  double peak = 0.0;
  for (const auto& p : eff.populations) peak = std::max(peak, p[1]);
  EXPECT_NEAR(peak, std::pow(std::sin(11.0 / 32), 2), 1e-6);
}
