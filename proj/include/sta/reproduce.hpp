#pragma once

// End-to-end regeneration of each table and figure: data files, a manifest
// and the reference checkpoints the result is compared against.

#include <algorithm>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "sta/experiments.hpp"
#include "sta/io.hpp"
#include "sta/nv_model.hpp"

namespace sta::reproduce {

namespace fs = std::filesystem;
using experiments::Checkpoint;
using io::json;

inline const std::vector<std::string> kTargets = {"table1", "table2", "fig1", "fig2", "fig4",
                                                  "fig5a",  "fig5b",  "fig6", "fig7", "fig8"};

struct Options {
  int jobs = 1;
  int n_steps = 10000;
  int grid = 21;  // samples per axis for fig7/fig8
  double a = 11.0;
  double lambda = 30.0;
  experiments::PulseKind pulses = experiments::PulseKind::gaussian_fit;
  nv::DecayModel decay = nv::DecayModel::truncated_subspace;
};

/// Same keys as the reproduce command-line parameters.
inline json to_json(const Options& o) {
  return {{"steps", o.n_steps},
          {"grid", o.grid},
          {"A", o.a},
          {"lambdaT", o.lambda},
          {"pulses", experiments::to_string(o.pulses)},
          {"decay_model", nv::to_string(o.decay)}};
}

struct Result {
  std::string target;
  fs::path directory;
  std::vector<Checkpoint> checkpoints;
  std::vector<std::string> files;
  json extra = json::object();  // informational values, not checked

  bool passed() const { return experiments::all_passed(checkpoints); }
};

namespace detail {

inline void save(Result& r, const std::string& name, const io::CsvTable& t) {
  io::write_csv(r.directory / name, t);
  r.files.push_back(name);
}

inline nv::NvConfig base_config(const Options& o) {
  nv::NvConfig c;
  c.a = o.a;
  c.lambda = o.lambda;
  c.validate();
  return c;
}

inline experiments::NvRunOptions run_options(const Options& o) {
  experiments::NvRunOptions r;
  r.n_steps = o.n_steps;
  r.decay = o.decay;
  return r;
}

inline void table1(Result& r, const Options& o) {
  namespace ref = experiments::reference;
  const auto rows = experiments::table1(ref::kTable1A, o.jobs, o.n_steps);
  io::CsvTable t{{"A", "B", "P_Imax", "P_Imax_simulated", "OmegaTilde_max_T"}, {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    t.add_row({row.a, row.b, row.p_imax, row.p_imax_simulated, row.omega_max_t});
    const std::string tag = "A=" + io::format_number(row.a);
    r.checkpoints.push_back(experiments::within(tag + " B", row.b, ref::kTable1B[i], 0.002));
    r.checkpoints.push_back(experiments::within(tag + " P_Imax", row.p_imax, ref::kTable1PImax[i], 0.0005));
    r.checkpoints.push_back(experiments::within(tag + " OmegaTilde_max_T", row.omega_max_t, ref::kTable1OmegaMaxT[i], 0.01));
    r.checkpoints.push_back(
        experiments::within(tag + " P_Imax simulated vs analytic", row.p_imax_simulated, row.p_imax, 1e-3));
  }
  save(r, "table1.csv", t);
}

inline void table2(Result& r, const Options& o) {
  const auto pulses = experiments::shortcut_pulses(base_config(o), o.pulses);
  io::CsvTable t{{"kappa/lambda", "gamma/lambda", "F(T)", "F(T) full_branching"}, {}};
  const auto& pts = experiments::reference::kTable2;
  const auto values = experiments::parallel_map(pts.size() * 2, o.jobs, [&](std::size_t idx) {
    auto c = base_config(o);
    c.kappa = pts[idx / 2].kappa_ratio * c.lambda;
    c.gamma = pts[idx / 2].gamma_ratio * c.lambda;
    auto ro = run_options(o);
    ro.decay = idx % 2 == 0 ? o.decay : nv::DecayModel::full_branching;
    return experiments::run_nv_lindblad(pulses, c, ro).fidelity.back();
  });
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t.add_row({pts[i].kappa_ratio, pts[i].gamma_ratio, values[2 * i], values[2 * i + 1]});
    const std::string tag = "F(T) at (kappa/lambda, gamma/lambda) = (" + io::format_number(pts[i].kappa_ratio) +
                            ", " + io::format_number(pts[i].gamma_ratio) + ")";
    r.checkpoints.push_back(experiments::within(tag, values[2 * i], pts[i].fidelity, 0.005));
  }
  r.extra["pulses"] = io::to_json(pulses);
  save(r, "table2.csv", t);
}

inline void two_level(Result& r, const Options& o, experiments::TwoLevelCase which) {
  const double a1 = 8.0 * std::numbers::pi;
  auto demo = experiments::two_level_demo(which, a1, o.n_steps);
  const std::string tag = which == experiments::TwoLevelCase::I ? "case I" : "case II";
  save(r, "pulses.csv", io::two_level_pulse_table(demo.design));
  save(r, "populations.csv", io::trajectory_table(demo.trajectory));
  r.checkpoints.push_back(experiments::at_least(tag + " P2(T)", demo.trajectory.populations.back()[1], 0.9999));
  const auto g0 = demo.design.drive(0.0), g1 = demo.design.drive(1.0);
  const double edge = std::max({std::abs(g0.x), std::abs(g0.y), std::abs(g0.z), std::abs(g1.x), std::abs(g1.y),
                                std::abs(g1.z)});
  r.checkpoints.push_back({tag + " max |g_k| at the endpoints", edge, 1e-8, 0.0, Checkpoint::Kind::at_most});
  if (which == experiments::TwoLevelCase::II) r.extra["A1"] = a1;
}

inline void fig4(Result& r, const Options& o) {
  const double b = nv::solve_b(o.a);
  const auto d = nv::designed_pulses(o.a, b);
  const auto fit = nv::gaussian_fit(d.pulses);
  save(r, "designed_pulses.csv", io::nv_design_table(d.design));
  save(r, "gaussian_pulses.csv", io::pulse_pair_table(fit.pulses()));
  r.extra["B"] = b;
  r.extra["gaussian_fit"] = {{"zeta1", fit.params.first.zeta},  {"tau1", fit.params.first.tau},
                             {"sigma1", fit.params.first.sigma}, {"zeta2", fit.params.second.zeta},
                             {"tau2", fit.params.second.tau},    {"sigma2", fit.params.second.sigma},
                             {"relative_residual1", fit.residual1}, {"relative_residual2", fit.residual2}};
  if (o.a == 11.0) {
    const auto& ref = nv::kReferenceGaussians;
    const auto rel = [&](const std::string& name, double v, double expected) {
      r.checkpoints.push_back(experiments::within(name, v, expected, 0.02 * std::abs(expected)));
    };
    rel("zeta1", fit.params.first.zeta, ref.first.zeta);
    rel("tau1", fit.params.first.tau, ref.first.tau);
    rel("sigma1", fit.params.first.sigma, ref.first.sigma);
    rel("zeta2", fit.params.second.zeta, ref.second.zeta);
    rel("tau2", fit.params.second.tau, ref.second.tau);
    rel("sigma2", fit.params.second.sigma, ref.second.sigma);
    r.checkpoints.push_back(experiments::within("OmegaTilde_max_T", nv::max_design_amplitude(d.design), 8.188, 0.01));
  }
}

inline void fig5a(Result& r, const Options& o) {
  const auto pulses = experiments::shortcut_pulses(base_config(o), o.pulses);
  std::vector<double> lambdas = experiments::linspace(1.0, 60.0, 60);
  auto sweep = experiments::fidelity_vs_lambda(lambdas, pulses, o.jobs, run_options(o));
  sweep.config = base_config(o);
  save(r, "fidelity_vs_lambda.csv", io::sweep_table(sweep));
  r.extra["sweep"] = io::sweep_metadata(sweep);
  const auto f_at = [&](double lam) {
    const auto it = std::find(lambdas.begin(), lambdas.end(), lam);
    return sweep.values[static_cast<std::size_t>(it - lambdas.begin())];
  };
  r.checkpoints.push_back(experiments::at_least("F(T) at lambdaT = 20", f_at(20.0), 0.98));
  r.checkpoints.push_back(experiments::at_least("F(T) at lambdaT = 30", f_at(30.0), 0.99));
  r.checkpoints.push_back(experiments::less_than("F(T) at lambdaT = 1", f_at(1.0), 0.9));
}

inline void fig5b(Result& r, const Options& o) {
  const auto c = base_config(o);
  const auto pulses = experiments::shortcut_pulses(c, o.pulses);
  const auto traj = experiments::population_dynamics(c, pulses, run_options(o));
  save(r, "populations.csv", io::trajectory_table(traj));
  r.checkpoints.push_back(experiments::within("P1(0)", traj.populations.front()[0], 1.0, 1e-12));
  r.checkpoints.push_back(experiments::at_least("P5(T)", traj.populations.back()[4], 0.999));
  r.checkpoints.push_back(
      experiments::less_than("max_t (P2 + P3 + P4)", experiments::peak_population(traj, {1, 2, 3}), 0.12));
  r.extra["max_P2"] = experiments::peak_population(traj, {1});
  r.extra["max_P3"] = experiments::peak_population(traj, {2});
  r.extra["max_P4"] = experiments::peak_population(traj, {3});
  r.extra["model"] = io::model_export(c, pulses, o.decay);
}

inline void fig6(Result& r, const Options& o) {
  const auto pulses = experiments::shortcut_pulses(base_config(o), o.pulses);
  const std::vector<experiments::StirapCase> cases = {{12.0, 30.0}, {24.0, 60.0}, {32.0, 80.0}};
  const auto curves = experiments::stirap_comparison(cases, pulses, o.lambda, o.jobs, run_options(o));
  io::CsvTable t;
  t.header.push_back("s");
  for (const auto& c : curves) t.header.push_back("F " + c.label);
  for (std::size_t i = 0; i < curves[0].times.size(); i += 10) {
    std::vector<double> row{curves[0].times[i]};
    for (const auto& c : curves) row.push_back(c.fidelity[i]);
    t.add_row(std::move(row));
  }
  save(r, "fidelity_curves.csv", t);
  r.checkpoints.push_back(experiments::at_least("shortcut F(T)", curves[0].final(), 0.99));
  r.checkpoints.push_back(experiments::within("STIRAP (12, 30) F(T)", curves[1].final(), 0.254, 0.02));
  r.checkpoints.push_back(experiments::at_least("STIRAP (32, 80) F(T)", curves[3].final(), 0.98));
  r.extra["STIRAP (24, 60) F(T)"] = curves[2].final();
}

inline void fig7(Result& r, const Options& o) {
  const auto c = base_config(o);
  const auto pulses = experiments::shortcut_pulses(c, o.pulses);
  const auto ratios = experiments::linspace(0.0, 0.04, o.grid);
  const auto sweep = experiments::decoherence_sweep(ratios, ratios, c, pulses, o.jobs, run_options(o));
  save(r, "decoherence.csv", io::sweep_table(sweep));
  r.extra["sweep"] = io::sweep_metadata(sweep);
  table2(r, o);
}

inline void fig8(Result& r, const Options& o) {
  using experiments::RobustnessAxis;
  const auto c = base_config(o);
  const auto pulses = experiments::shortcut_pulses(c, o.pulses);
  const std::vector<std::pair<RobustnessAxis, RobustnessAxis>> panels = {
      {RobustnessAxis::dT, RobustnessAxis::dLambda},
      {RobustnessAxis::dOmega, RobustnessAxis::dLambda},
      {RobustnessAxis::dT, RobustnessAxis::dOmega}};
  const char* names[] = {"fig8a_dT_dlambda.csv", "fig8b_dOmega_dlambda.csv", "fig8c_dT_dOmega.csv"};
  json meta = json::array();
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto sweep = experiments::robustness_sweep(panels[p].first, panels[p].second, 0.1, o.grid, c, pulses,
                                                     o.jobs, run_options(o));
    save(r, names[p], io::sweep_table(sweep));
    meta.push_back(io::sweep_metadata(sweep));
  }
  r.extra["sweeps"] = meta;

  // checkpoints on exact offsets rather than interpolated grid values
  const auto run = [&](experiments::Perturbation pert) {
    auto ro = run_options(o);
    ro.perturbation = pert;
    return experiments::run_nv_unitary(pulses, c.lambda, ro).fidelity.back();
  };
  const double base = run({});
  r.checkpoints.push_back(experiments::at_least("F baseline", base, 0.99));
  r.checkpoints.push_back(experiments::at_least("F at dOmega0/Omega0 = +10%", run({0.0, 0.1, 0.0}), 0.98));
  for (double dt : {-0.1, 0.0, 0.1}) {
    for (double dl : {-0.1, 0.0, 0.1}) {
      if (dt == 0.0 && dl == 0.0) continue;
      r.checkpoints.push_back(experiments::within(
          "F at (dT/T, dlambda/lambda) = (" + io::format_number(dt) + ", " + io::format_number(dl) + ")",
          run({dt, 0.0, dl}), base, 0.01));
    }
  }
}

}  // namespace detail

inline bool is_target(const std::string& t) { return std::find(kTargets.begin(), kTargets.end(), t) != kTargets.end(); }

/// Runs one target into `dir` and writes manifest.json there.
inline Result run(const std::string& target, const fs::path& dir, const Options& o) {
  if (!is_target(target)) throw ParameterError("unknown reproduce target '" + target + "'");
  Result r;
  r.target = target;
  r.directory = dir;
  if (target == "table1") detail::table1(r, o);
  else if (target == "table2") detail::table2(r, o);
  else if (target == "fig1") detail::two_level(r, o, experiments::TwoLevelCase::I);
  else if (target == "fig2") detail::two_level(r, o, experiments::TwoLevelCase::II);
  else if (target == "fig4") detail::fig4(r, o);
  else if (target == "fig5a") detail::fig5a(r, o);
  else if (target == "fig5b") detail::fig5b(r, o);
  else if (target == "fig6") detail::fig6(r, o);
  else if (target == "fig7") detail::fig7(r, o);
  else if (target == "fig8") detail::fig8(r, o);

  json manifest = io::manifest_header("reproduce", target);
  manifest["config"] = to_json(o);
  manifest["files"] = r.files;
  json cps = json::array();
  for (const auto& c : r.checkpoints) cps.push_back(io::to_json(c));
  manifest["checkpoints"] = cps;
  manifest["passed"] = r.passed();
  manifest["results"] = r.extra;
  io::write_json(dir / "manifest.json", manifest);
  return r;
}

}  // namespace sta::reproduce
