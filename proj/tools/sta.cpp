// sta: pulse design, simulation and reproduction command-line tool.
//
// Parameter precedence: built-in defaults < --config file < command-line flags.
// The config file is either a bare JSON object of parameters or a manifest
// written by a previous run (its "config" member is used).
//
// Exit codes: 0 success, 2 usage or validation error, 3 accuracy or tolerance failure.

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sta/experiments.hpp"
#include "sta/io.hpp"
#include "sta/nv_model.hpp"
#include "sta/reproduce.hpp"
#include "sta/two_level.hpp"

namespace {

using sta::io::json;
namespace ex = sta::experiments;
namespace fs = std::filesystem;

constexpr int kExitUsage = 2;
constexpr int kExitAccuracy = 3;

struct ToleranceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parameters of one subcommand: defaults, then file values, then flags.
class Params {
 public:
  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, T fallback, const std::string& help) {
    values_[key] = fallback;
    auto store = std::make_shared<T>(fallback);
    CLI::Option* opt = app->add_option(flag, *store, help)->capture_default_str();
    overrides_.push_back([this, opt, store, key] {
      if (opt->count() > 0) values_[key] = *store;
    });
  }

  /// Merges file values (unknown keys rejected), then the flags given.
  const json& resolve(const json& file) {
    for (const auto& [key, value] : file.items()) {
      if (!values_.contains(key)) throw sta::ParameterError("unknown config key '" + key + "'");
      if (value.type_name() != std::string(values_[key].type_name()) &&
          !(value.is_number() && values_[key].is_number())) {
        throw sta::ParameterError("config key '" + key + "' has the wrong type");
      }
      values_[key] = value;
    }
    for (auto& f : overrides_) f();
    return values_;
  }

  const json& values() const { return values_; }

 private:
  json values_ = json::object();
  std::vector<std::function<void()>> overrides_;
};

struct Command {
  std::string name;  // e.g. "simulate nv"
  CLI::App* app = nullptr;
  Params params;
  std::function<int(const json&)> run;
};

struct Globals {
  std::string config_path;
  std::string out;
  int jobs = 1;
};

Globals g_globals;

double num(const json& c, const char* key) { return c.at(key).get<double>(); }
int integer(const json& c, const char* key) { return static_cast<int>(c.at(key).get<double>()); }
std::string str(const json& c, const char* key) { return c.at(key).get<std::string>(); }

/// For reproduce manifests the recorded target is carried into the config.
json load_config_file(const std::string& path, const std::string& command, const std::string& target) {
  if (path.empty()) return json::object();
  json doc = sta::io::read_json(path);
  if (!doc.is_object()) throw sta::ParameterError("config file must hold a JSON object");
  if (!(doc.contains("config") && doc["config"].is_object())) return doc;
  json config = doc["config"];
  const std::string rec_command = doc.value("command", command);
  const std::string rec_target = doc.value("target", target);
  if (rec_command != command || (!target.empty() && rec_target != target)) {
    throw sta::ParameterError("manifest was written by '" + rec_command + " " + rec_target + "', not '" + command +
                              (target.empty() ? "" : " " + target) + "'");
  }
  if (target.empty() && !config.contains("target")) config["target"] = rec_target;
  return config;
}

fs::path out_dir(const std::string& pipeline) { return sta::io::output_directory(pipeline, g_globals.out); }

json manifest(const std::string& command, const std::string& target, const json& config) {
  json m = sta::io::manifest_header(command, target);
  m["config"] = config;
  return m;
}

ex::TwoLevelCase parse_case(const std::string& s) {
  if (s == "I" || s == "1") return ex::TwoLevelCase::I;
  if (s == "II" || s == "2") return ex::TwoLevelCase::II;
  throw sta::ParameterError("--case must be I or II");
}

sta::nv::DecayModel parse_decay(const std::string& s) {
  if (s == "truncated_subspace") return sta::nv::DecayModel::truncated_subspace;
  if (s == "full_branching") return sta::nv::DecayModel::full_branching;
  throw sta::ParameterError("--decay-model must be truncated_subspace or full_branching");
}

sta::DissipatorForm parse_form(const std::string& s) {
  if (s == "standard") return sta::DissipatorForm::standard;
  if (s == "printed") return sta::DissipatorForm::printed;
  throw sta::ParameterError("--dissipator must be standard or printed");
}

sta::nv::NvConfig nv_config(const json& c) {
  sta::nv::NvConfig cfg;
  cfg.a = num(c, "A");
  if (c.at("B").is_number()) {
    cfg.b = num(c, "B");
  } else if (str(c, "B") != "auto") {
    throw sta::ParameterError("--B must be a number or 'auto'");
  }
  if (c.contains("lambdaT")) cfg.lambda = num(c, "lambdaT");
  if (c.contains("kappa_ratio")) cfg.kappa = num(c, "kappa_ratio") * cfg.lambda;
  if (c.contains("gamma_ratio")) cfg.gamma = num(c, "gamma_ratio") * cfg.lambda;
  cfg.validate();
  return cfg;
}

sta::nv::PulsePair nv_pulses(const json& c, const sta::nv::NvConfig& cfg) {
  const std::string kind = str(c, "pulses");
  if (kind == "gaussian_fit") return ex::shortcut_pulses(cfg, ex::PulseKind::gaussian_fit);
  if (kind == "designed") return ex::shortcut_pulses(cfg, ex::PulseKind::designed);
  if (kind == "stirap") return sta::nv::stirap_pulses(num(c, "stirap_omega0"));
  throw sta::ParameterError("--pulses must be gaussian_fit, designed or stirap");
}

void add_nv_design_params(Command& cmd) {
  cmd.params.add<double>(cmd.app, "--A", "A", 11.0, "schedule amplitude A, 0 < A < 32");
  cmd.params.add<std::string>(cmd.app, "--B", "B", "auto", "mu-dot amplitude B, or 'auto' to solve the constraint");
}

void add_nv_sim_params(Command& cmd) {
  add_nv_design_params(cmd);
  cmd.params.add<double>(cmd.app, "--lambdaT", "lambdaT", 30.0, "coupling lambda in units of 1/T");
  cmd.params.add<std::string>(cmd.app, "--pulses", "pulses", "gaussian_fit", "gaussian_fit | designed | stirap");
  cmd.params.add<double>(cmd.app, "--stirap-omega0", "stirap_omega0", 12.0, "STIRAP peak amplitude (1/T)");
  cmd.params.add<int>(cmd.app, "--steps", "steps", 10000, "RK4 steps per duration T");
}

// B may arrive from a flag as a numeric string
json normalize_b(json c) {
  if (c.contains("B") && c["B"].is_string() && c["B"] != "auto") {
    try {
      c["B"] = std::stod(c["B"].get<std::string>());
    } catch (const std::exception&) {
      throw sta::ParameterError("--B must be a number or 'auto'");
    }
  }
  return c;
}

// ---------------------------------------------------------------------------

int design_two_level(const json& c) {
  const auto which = parse_case(str(c, "case"));
  const double a1 = num(c, "A1");
  const auto design = which == ex::TwoLevelCase::I ? sta::design_case1(sta::Case1Schedule{}) : sta::design_case2(a1);
  const auto dir = out_dir("design-two-level");
  sta::io::write_csv(dir / "pulses.csv", sta::io::two_level_pulse_table(design, integer(c, "samples")));
  auto m = manifest("design", "two-level", c);
  m["files"] = {"pulses.csv"};
  sta::io::write_json(dir / "manifest.json", m);
  std::cout << dir.string() << "\n";
  return 0;
}

int design_nv(const json& c) {
  const auto cfg = nv_config(c);
  const double b = cfg.b.value_or(sta::nv::solve_b(cfg.a));
  const auto d = sta::nv::designed_pulses(cfg.a, b);
  if (!d.transferring) std::cerr << "sta: warning: " << d.warning << "\n";
  const auto dir = out_dir("design-nv");
  const int samples = integer(c, "samples");
  sta::io::write_csv(dir / "designed_pulses.csv", sta::io::nv_design_table(d.design, samples));
  json results{{"B", b},
               {"alpha_end", d.alpha_end},
               {"transferring", d.transferring},
               {"OmegaTilde_max_T", sta::nv::max_design_amplitude(d.design)},
               {"P_Imax", std::pow(std::sin(cfg.a / 32.0), 2)}};
  json files = {"designed_pulses.csv"};
  try {
    const auto fit = sta::nv::gaussian_fit(d.pulses);
    sta::io::write_csv(dir / "gaussian_pulses.csv", sta::io::pulse_pair_table(fit.pulses(), samples));
    files.push_back("gaussian_pulses.csv");
    results["gaussian_fit"] = {{"zeta1", fit.params.first.zeta},      {"tau1", fit.params.first.tau},
                               {"sigma1", fit.params.first.sigma},     {"zeta2", fit.params.second.zeta},
                               {"tau2", fit.params.second.tau},        {"sigma2", fit.params.second.sigma},
                               {"relative_residual1", fit.residual1}, {"relative_residual2", fit.residual2}};
  } catch (const sta::FitError& e) {
    results["gaussian_fit"] = {{"error", e.what()}};
  }
  sta::io::write_json(dir / "design.json", results);
  files.push_back("design.json");
  auto m = manifest("design", "nv", c);
  m["files"] = files;
  m["results"] = results;
  sta::io::write_json(dir / "manifest.json", m);
  std::cout << dir.string() << "\n";
  std::printf("B = %.6f  OmegaTilde_max_T = %.6f\n", b, results["OmegaTilde_max_T"].get<double>());
  return 0;
}

int simulate_two_level(const json& c) {
  const auto which = parse_case(str(c, "case"));
  const auto demo = ex::two_level_demo(which, num(c, "A1"), integer(c, "steps"));
  const auto dir = out_dir("simulate-two-level");
  sta::io::write_csv(dir / "trajectory.csv", sta::io::trajectory_table(demo.trajectory, integer(c, "stride")));
  const double p2 = demo.trajectory.populations.back()[1];
  auto m = manifest("simulate", "two-level", c);
  m["files"] = {"trajectory.csv"};
  m["results"] = {{"P2_final", p2}, {"max_norm_drift", demo.trajectory.max_drift}};
  sta::io::write_json(dir / "manifest.json", m);
  std::cout << dir.string() << "\n";
  std::printf("P2(T) = %.10f\n", p2);
  return 0;
}

int simulate_nv(const json& c) {
  const auto cfg = nv_config(c);
  const auto pulses = nv_pulses(c, cfg);
  ex::NvRunOptions ro;
  ro.n_steps = integer(c, "steps");
  ro.decay = parse_decay(str(c, "decay_model"));
  ro.form = parse_form(str(c, "dissipator"));
  ro.perturbation = {num(c, "dT"), num(c, "dOmega"), num(c, "dLambda")};

  const auto dir = out_dir("simulate-nv");
  const int stride = integer(c, "stride");
  double f_end = 0.0, p5 = 0.0, drift = 0.0, peak = 0.0;
  if (cfg.kappa == 0.0 && cfg.gamma == 0.0) {
    const auto traj = ex::run_nv_unitary(pulses, cfg.lambda, ro);
    sta::io::write_csv(dir / "trajectory.csv", sta::io::trajectory_table(traj, stride));
    f_end = traj.fidelity.back(), p5 = traj.populations.back()[4], drift = traj.max_drift;
    peak = ex::peak_population(traj, {1, 2, 3});
  } else {
    const auto traj = ex::run_nv_lindblad(pulses, cfg, ro);
    sta::io::write_csv(dir / "trajectory.csv", sta::io::trajectory_table(traj, stride));
    f_end = traj.fidelity.back(), p5 = traj.populations.back()[4], drift = traj.max_drift;
    peak = ex::peak_population(traj, {1, 2, 3});
  }
  const json model = sta::io::model_export(cfg, pulses, ro.decay);
  sta::io::write_json(dir / "model.json", model);
  auto m = manifest("simulate", "nv", c);
  m["files"] = {"trajectory.csv", "model.json"};
  m["model"] = model;
  m["results"] = {{"F_final", f_end}, {"P5_final", p5}, {"max_intermediate", peak}, {"max_drift", drift}};
  sta::io::write_json(dir / "manifest.json", m);
  std::cout << dir.string() << "\n";
  std::printf("F(T) = %.6f\n", f_end);
  return 0;
}

int reproduce(const json& c) {
  const std::string target = str(c, "target");
  std::vector<std::string> targets;
  if (target == "all") {
    targets = sta::reproduce::kTargets;
  } else if (sta::reproduce::is_target(target)) {
    targets = {target};
  } else {
    throw sta::ParameterError("unknown reproduce target '" + target + "'");
  }
  sta::reproduce::Options o;
  o.jobs = g_globals.jobs;
  o.n_steps = integer(c, "steps");
  o.grid = integer(c, "grid");
  o.decay = parse_decay(str(c, "decay_model"));
  o.a = num(c, "A");
  o.lambda = num(c, "lambdaT");
  const std::string kind = str(c, "pulses");
  if (kind == "designed") o.pulses = ex::PulseKind::designed;
  else if (kind != "gaussian_fit") throw sta::ParameterError("--pulses must be gaussian_fit or designed");
  if (o.grid < 2) throw sta::ParameterError("--grid must be at least 2");

  std::vector<std::string> failing;
  for (const auto& t : targets) {
    fs::path dir = targets.size() == 1 ? out_dir("reproduce-" + t) : out_dir("reproduce-all") / t;
    fs::create_directories(dir);
    const auto r = sta::reproduce::run(t, dir, o);
    std::cout << t << ": " << dir.string() << "\n";
    for (const auto& cp : r.checkpoints) {
      std::cout << "  [" << (cp.passed() ? "PASS" : "FAIL") << "] " << cp.describe() << "\n";
      if (!cp.passed()) failing.push_back(t + ": " + cp.name);
    }
  }
  if (!failing.empty()) {
    std::string msg = std::to_string(failing.size()) + " checkpoint(s) failed:";
    for (const auto& f : failing) msg += "\n  " + f;
    throw ToleranceFailure(msg);
  }
  return 0;
}

int write_sweep(const std::string& target, const json& c, const ex::SweepGrid& sweep) {
  const auto dir = out_dir("sweep-" + target);
  sta::io::write_csv(dir / "sweep.csv", sta::io::sweep_table(sweep));
  auto m = manifest("sweep", target, c);
  m["files"] = {"sweep.csv"};
  m["sweep"] = sta::io::sweep_metadata(sweep);
  sta::io::write_json(dir / "manifest.json", m);
  std::cout << dir.string() << "\n";
  return 0;
}

int sweep_lambda(const json& c) {
  const auto cfg = nv_config(c);
  const auto lambdas = ex::linspace(num(c, "lambda_min"), num(c, "lambda_max"), integer(c, "n"));
  ex::NvRunOptions ro;
  ro.n_steps = integer(c, "steps");
  auto sweep = ex::fidelity_vs_lambda(lambdas, nv_pulses(c, cfg), g_globals.jobs, ro);
  sweep.config = cfg;
  return write_sweep("lambda", c, sweep);
}

int sweep_decoherence(const json& c) {
  const auto cfg = nv_config(c);
  const int n = integer(c, "n");
  ex::NvRunOptions ro;
  ro.n_steps = integer(c, "steps");
  ro.decay = parse_decay(str(c, "decay_model"));
  const auto sweep = ex::decoherence_sweep(ex::linspace(0.0, num(c, "kappa_max"), n),
                                           ex::linspace(0.0, num(c, "gamma_max"), n), cfg, nv_pulses(c, cfg),
                                           g_globals.jobs, ro);
  return write_sweep("decoherence", c, sweep);
}

int sweep_robustness(const json& c) {
  const auto cfg = nv_config(c);
  ex::NvRunOptions ro;
  ro.n_steps = integer(c, "steps");
  const auto sweep = ex::robustness_sweep(ex::parse_robustness_axis(str(c, "axis1")),
                                          ex::parse_robustness_axis(str(c, "axis2")), num(c, "range"),
                                          integer(c, "n"), cfg, nv_pulses(c, cfg), g_globals.jobs, ro);
  return write_sweep("robustness", c, sweep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shortcut-to-adiabaticity pulse design and simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", g_globals.config_path, "JSON config or manifest; flags override its values");
  app.add_option("--out", g_globals.out,
                 "output directory (default: $STA_OUTPUT_ROOT or ./sta-output, plus <pipeline>-<timestamp>)");
  app.add_option("--jobs", g_globals.jobs, "worker threads for sweeps (0: all cores)")->capture_default_str();

  std::vector<std::unique_ptr<Command>> commands;
  auto make = [&](CLI::App* parent, const std::string& group, const std::string& name, const std::string& help,
                  std::function<int(const json&)> run) -> Command& {
    auto cmd = std::make_unique<Command>();
    cmd->name = group + " " + name;
    cmd->app = parent->add_subcommand(name, help);
    cmd->run = std::move(run);
    commands.push_back(std::move(cmd));
    return *commands.back();
  };

  auto* design = app.add_subcommand("design", "inverse-engineer pulses");
  design->require_subcommand(1);
  auto* simulate = app.add_subcommand("simulate", "propagate a designed protocol");
  simulate->require_subcommand(1);
  auto* sweep = app.add_subcommand("sweep", "parameter sweeps");
  sweep->require_subcommand(1);

  {
    auto& c = make(design, "design", "two-level", "Case I / Case II two-level pulses", design_two_level);
    c.params.add<std::string>(c.app, "--case", "case", "I", "I or II");
    c.params.add<double>(c.app, "--A1", "A1", 8.0 * std::numbers::pi, "Case II amplitude, 0 < A1 < 30 pi");
    c.params.add<int>(c.app, "--samples", "samples", 1001, "rows in the pulse table");
  }
  {
    auto& c = make(design, "design", "nv", "NV-WGM three-level pulses, B and Gaussian fit", design_nv);
    add_nv_design_params(c);
    c.params.add<int>(c.app, "--samples", "samples", 1001, "rows in the pulse tables");
  }
  {
    auto& c = make(simulate, "simulate", "two-level", "two-level transfer from |1>", simulate_two_level);
    c.params.add<std::string>(c.app, "--case", "case", "I", "I or II");
    c.params.add<double>(c.app, "--A1", "A1", 8.0 * std::numbers::pi, "Case II amplitude, 0 < A1 < 30 pi");
    c.params.add<int>(c.app, "--steps", "steps", 10000, "RK4 steps");
    c.params.add<int>(c.app, "--stride", "stride", 10, "write every n-th sample");
  }
  {
    auto& c = make(simulate, "simulate", "nv", "NV-WGM transfer psi1 -> psi5", simulate_nv);
    add_nv_sim_params(c);
    c.params.add<double>(c.app, "--kappa-ratio", "kappa_ratio", 0.0, "cavity decay kappa/lambda");
    c.params.add<double>(c.app, "--gamma-ratio", "gamma_ratio", 0.0, "NV decay gamma/lambda");
    c.params.add<std::string>(c.app, "--decay-model", "decay_model", "truncated_subspace",
                              "truncated_subspace | full_branching");
    c.params.add<std::string>(c.app, "--dissipator", "dissipator", "standard", "standard | printed");
    c.params.add<double>(c.app, "--dT", "dT", 0.0, "relative duration error dT/T");
    c.params.add<double>(c.app, "--dOmega", "dOmega", 0.0, "relative amplitude error");
    c.params.add<double>(c.app, "--dLambda", "dLambda", 0.0, "relative coupling error");
    c.params.add<int>(c.app, "--stride", "stride", 10, "write every n-th sample");
  }
  Command* reproduce_cmd = nullptr;
  {
    auto cmd = std::make_unique<Command>();
    cmd->name = "reproduce";
    cmd->app = app.add_subcommand("reproduce", "regenerate a table or figure and check it");
    cmd->run = reproduce;
    cmd->params.add<std::string>(cmd->app, "target", "target", "",
                                 "table1 table2 fig1 fig2 fig4 fig5a fig5b fig6 fig7 fig8 | all");
    cmd->params.add<int>(cmd->app, "--steps", "steps", 10000, "RK4 steps per duration T");
    cmd->params.add<int>(cmd->app, "--grid", "grid", 21, "samples per axis for fig7/fig8");
    cmd->params.add<double>(cmd->app, "--A", "A", 11.0, "schedule amplitude A for the NV targets");
    cmd->params.add<double>(cmd->app, "--lambdaT", "lambdaT", 30.0, "coupling lambda in units of 1/T");
    cmd->params.add<std::string>(cmd->app, "--pulses", "pulses", "gaussian_fit", "gaussian_fit | designed");
    cmd->params.add<std::string>(cmd->app, "--decay-model", "decay_model", "truncated_subspace",
                                 "truncated_subspace | full_branching");
    reproduce_cmd = cmd.get();
    commands.push_back(std::move(cmd));
  }
  {
    auto& c = make(sweep, "sweep", "lambda", "F(T) versus lambdaT", sweep_lambda);
    add_nv_sim_params(c);
    c.params.add<double>(c.app, "--lambda-min", "lambda_min", 1.0, "smallest lambdaT");
    c.params.add<double>(c.app, "--lambda-max", "lambda_max", 60.0, "largest lambdaT");
    c.params.add<int>(c.app, "--n", "n", 60, "samples");
  }
  {
    auto& c = make(sweep, "sweep", "decoherence", "F(T) versus kappa/lambda and gamma/lambda", sweep_decoherence);
    add_nv_sim_params(c);
    c.params.add<double>(c.app, "--kappa-max", "kappa_max", 0.04, "largest kappa/lambda");
    c.params.add<double>(c.app, "--gamma-max", "gamma_max", 0.04, "largest gamma/lambda");
    c.params.add<int>(c.app, "--n", "n", 21, "samples per axis");
    c.params.add<std::string>(c.app, "--decay-model", "decay_model", "truncated_subspace",
                              "truncated_subspace | full_branching");
  }
  {
    auto& c = make(sweep, "sweep", "robustness", "F(T) versus two parameter offsets", sweep_robustness);
    add_nv_sim_params(c);
    c.params.add<std::string>(c.app, "--axis1", "axis1", "dT", "dT | dOmega | dLambda");
    c.params.add<std::string>(c.app, "--axis2", "axis2", "dLambda", "dT | dOmega | dLambda");
    c.params.add<double>(c.app, "--range", "range", 0.1, "offsets span [-range, range], range <= 0.2");
    c.params.add<int>(c.app, "--n", "n", 21, "samples per axis");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    for (auto& cmd : commands) {
      if (!cmd->app->parsed()) continue;
      const auto space = cmd->name.find(' ');
      const std::string group = cmd->name.substr(0, space);
      const std::string target = space == std::string::npos ? std::string() : cmd->name.substr(space + 1);
      json resolved = normalize_b(cmd->params.resolve(load_config_file(g_globals.config_path, group, target)));
      if (cmd.get() == reproduce_cmd && resolved["target"] == "") {
        throw sta::ParameterError("reproduce needs a target");
      }
      return cmd->run(resolved);
    }
    throw sta::ParameterError("no command given");
  } catch (const ToleranceFailure& e) {
    std::cerr << "sta: " << e.what() << "\n";
    return kExitAccuracy;
  } catch (const std::invalid_argument& e) {  // ParameterError, SingularSchedule
    std::cerr << "sta: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::logic_error& e) {  // RangeError and other precondition failures
    std::cerr << "sta: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "sta: error: " << e.what() << "\n";
    return kExitAccuracy;
  }
}
