// Quantum state transfer between two NV centers through a whispering-gallery
// mode: design, Gaussian fit, then the ideal and lossy six-level dynamics.

#include <cstdio>

#include "sta/experiments.hpp"
#include "sta/nv_model.hpp"

int main() {
  using namespace sta;
  using namespace sta::experiments;

  const double a = 11.0;
  const double b = nv::solve_b(a);
  const auto design = nv::designed_pulses(a, b);
  std::printf("A = %.1f  B = %.4f  OmegaTilde_max T = %.3f\n", a, b, nv::max_design_amplitude(design.design));

  const auto fit = nv::gaussian_fit(design.pulses);
  for (const auto* g : {&fit.params.first, &fit.params.second}) {
    std::printf("  Gaussian: zeta = %8.4f  tau = %.4f  sigma = %.4f\n", g->zeta, g->tau, g->sigma);
  }
  const auto pulses = fit.pulses();

  nv::NvConfig config;
  const auto ideal = run_nv_unitary(pulses, config.lambda);
  std::printf("\nlambda T = %.0f, no loss\n     s      P1      P2      P3      P4      P5\n", config.lambda);
  for (int k = 0; k <= 10; ++k) {
    const auto& p = ideal.populations[k * 1000];
    std::printf("  %4.1f  %.4f  %.4f  %.4f  %.4f  %.4f\n", k / 10.0, p[0], p[1], p[2], p[3], p[4]);
  }
  std::printf("  F(T) = %.5f\n\n", ideal.fidelity.back());

  for (double r : {0.01, 0.02, 0.04}) {
    nv::NvConfig lossy = config;
    lossy.kappa = lossy.gamma = r * config.lambda;
    std::printf("kappa = gamma = %.2f lambda: F(T) = %.4f\n", r, run_nv_lindblad(pulses, lossy).fidelity.back());
  }
}
