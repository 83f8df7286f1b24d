// Designs the Case I and Case II drives and checks them by direct propagation.

#include <cstdio>
#include <numbers>

#include "sta/dynamics.hpp"
#include "sta/two_level.hpp"

int main() {
  using namespace sta;
  const TwoLevelPulses designs[] = {design_case1(Case1Schedule{}), design_case2(8.0 * std::numbers::pi)};
  const char* names[] = {"case I", "case II (A1 = 8 pi)"};

  for (int i = 0; i < 2; ++i) {
    const auto& p = designs[i];
    std::printf("%s\n     s        g_x        g_z      P2\n", names[i]);
    StateOptions<2> opt;
    opt.record_states = false;
    const auto traj = propagate_state<2>([&](double s) { return p.hamiltonian(s); }, basis_state<2>(0),
                                         TimeGrid{0.0, 1.0, 10000}, opt);
    for (int k = 0; k <= 10; ++k) {
      const double s = k / 10.0;
      const auto g = p.drive(s);
      std::printf("  %4.1f  %9.4f  %9.4f  %.6f\n", s, g.x, g.z, traj.populations[k * 1000][1]);
    }
    const double closed = std::norm(p.evolution_operator(1.0)(1, 0));
    std::printf("  closed-form P2(T) = %.10f\n\n", closed);
  }
}
