#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include <unistd.h>

#include "sta/experiments.hpp"
#include "sta/io.hpp"

using namespace sta;
using namespace sta::experiments;
namespace fs = std::filesystem;

namespace {

NvRunOptions quick(int steps = 2000) {
  NvRunOptions o;
  o.n_steps = steps;
  return o;
}

const nv::PulsePair& reference_pulses() {
  static const nv::PulsePair p = nv::gaussian_pulses(nv::kReferenceGaussians);
  return p;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sta-test-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST(ParallelMap, KeepsIndexOrder) {
  for (int jobs : {1, 4}) {
    const auto out = parallel_map(100, jobs, [](std::size_t i) { return static_cast<int>(i * i); });
    ASSERT_EQ(out.size(), 100u);
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  }
  EXPECT_TRUE(parallel_map(0, 4, [](std::size_t) { return 1.0; }).empty());
}

TEST(ParallelMap, RethrowsWorkerException) {
  const auto boom = [](std::size_t i) -> double {
    if (i == 7) throw std::runtime_error("seven");
    return 1.0;
  };
  EXPECT_THROW(parallel_map(20, 3, boom), std::runtime_error);
}

TEST(Linspace, Endpoints) {
  const auto v = linspace(-0.1, 0.1, 5);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_DOUBLE_EQ(v.front(), -0.1);
  EXPECT_DOUBLE_EQ(v[2], 0.0);
  EXPECT_DOUBLE_EQ(v.back(), 0.1);
  EXPECT_EQ(linspace(2.0, 3.0, 1).front(), 2.0);
  EXPECT_THROW(linspace(0, 1, 0), ParameterError);
}

TEST(SweepGrid, Validation) {
  SweepGrid g;
  EXPECT_THROW(g.validate(), ParameterError);
  g.axes = {{"a", {1, 2}}, {"b", {1, 2, 3}}};
  g.values = {0.1, 0.2};
  EXPECT_THROW(g.validate(), ParameterError);
  g.values = {0.1, 0.2, 0.3, 0.4, 0.5, 1.2};
  EXPECT_THROW(g.validate(), AccuracyError);
  g.values.back() = 0.6;
  EXPECT_NO_THROW(g.validate());
  EXPECT_DOUBLE_EQ(g.at(1, 2), 0.6);
}

TEST(Pipelines, ShortcutPulsesFromConfig) {
  const auto fitted = shortcut_pulses(nv::NvConfig{});
  EXPECT_EQ(fitted.provenance, nv::Provenance::gaussian_fit);
  EXPECT_NEAR(fitted.omega1(0.6277), std::numbers::sqrt2 * 8.283, 0.02 * 8.283 * std::numbers::sqrt2);
  const auto designed = shortcut_pulses(nv::NvConfig{}, PulseKind::designed);
  EXPECT_EQ(designed.provenance, nv::Provenance::designed);
  nv::NvConfig bad;
  bad.lambda = -1;
  EXPECT_THROW(shortcut_pulses(bad), ParameterError);
}

TEST(Pipelines, Table1RowMatchesClosedForm) {
  const auto rows = table1({11.0});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].b, 40.537, 0.001);
  EXPECT_NEAR(rows[0].p_imax, std::pow(std::sin(11.0 / 32), 2), 1e-15);
  EXPECT_NEAR(rows[0].p_imax_simulated, rows[0].p_imax, 1e-6);
  EXPECT_NEAR(rows[0].omega_max_t, 8.188, 0.01);
}

TEST(Pipelines, FidelityVersusLambda) {
  const auto g = fidelity_vs_lambda({5.0, 30.0}, reference_pulses(), 2, quick());
  EXPECT_LT(g.at(0), g.at(1));
  EXPECT_GT(g.at(1), 0.99);
  EXPECT_THROW(fidelity_vs_lambda({0.0}, reference_pulses(), 1, quick()), ParameterError);
}

TEST(Pipelines, StirapComparisonOrdering) {
  const auto curves = stirap_comparison({{12, 30}}, reference_pulses(), 30.0, 2, quick());
  ASSERT_EQ(curves.size(), 2u);
  EXPECT_EQ(curves[0].label, "shortcut");
  EXPECT_EQ(curves[1].label, "stirap_O12_L30");
  EXPECT_GT(curves[0].final(), 0.99);
  EXPECT_NEAR(curves[1].final(), 0.254, 0.01);
  EXPECT_EQ(curves[1].times.size(), curves[1].fidelity.size());
}

TEST(Pipelines, DecoherenceSweepLimitsAndTrend) {
  nv::NvConfig c;
  const auto g = decoherence_sweep({0.0, 0.02}, {0.0, 0.02}, c, reference_pulses(), 2, quick());
  const double unitary = run_nv_unitary(reference_pulses(), c.lambda, quick()).fidelity.back();
  EXPECT_NEAR(g.at(0, 0), unitary, 1e-9);
  EXPECT_LT(g.at(1, 0), g.at(0, 0));
  EXPECT_LT(g.at(0, 1), g.at(0, 0));
  EXPECT_LT(g.at(1, 1), g.at(1, 0));
  EXPECT_THROW(decoherence_sweep({-0.1}, {0.0}, c, reference_pulses()), ParameterError);
}

TEST(Pipelines, RobustnessSweepCenterIsBaseline) {
  nv::NvConfig c;
  const auto g = robustness_sweep(RobustnessAxis::dOmega, RobustnessAxis::dLambda, 0.1, 3, c, reference_pulses(), 2,
                                  quick());
  const double baseline = run_nv_unitary(reference_pulses(), c.lambda, quick()).fidelity.back();
  EXPECT_EQ(g.at(1, 1), baseline);
  EXPECT_EQ(g.axes[0].label, "dOmega0/Omega0");
  EXPECT_THROW(robustness_sweep(RobustnessAxis::dT, RobustnessAxis::dT, 0.1, 3, c, reference_pulses()),
               ParameterError);
  EXPECT_THROW(robustness_sweep(RobustnessAxis::dT, RobustnessAxis::dOmega, 0.3, 3, c, reference_pulses()),
               ParameterError);
  EXPECT_THROW(parse_robustness_axis("dX"), ParameterError);
  EXPECT_EQ(parse_robustness_axis("dLambda"), RobustnessAxis::dLambda);
}

TEST(Pipelines, TimeOffsetExtendsTheGrid) {
  NvRunOptions o = quick();
  o.perturbation.d_t = 0.1;
  const auto grid = nv_grid(o);
  EXPECT_DOUBLE_EQ(grid.t_end, 1.1);
  EXPECT_EQ(grid.n_steps, 2200);
  o.perturbation.d_t = -1.0;
  EXPECT_THROW(nv_grid(o), ParameterError);
}

TEST(Pipelines, SweepOutputIsDeterministicAcrossThreadCounts) {
  nv::NvConfig c;
  const auto a = robustness_sweep(RobustnessAxis::dT, RobustnessAxis::dOmega, 0.05, 3, c, reference_pulses(), 1,
                                  quick(1000));
  const auto b = robustness_sweep(RobustnessAxis::dT, RobustnessAxis::dOmega, 0.05, 3, c, reference_pulses(), 4,
                                  quick(1000));
  EXPECT_EQ(io::sweep_table(a).str(), io::sweep_table(b).str());
}

TEST(Pipelines, TwoLevelDemos) {
  EXPECT_GE(two_level_demo(TwoLevelCase::I).trajectory.fidelity.back(), 0.9999);
  EXPECT_GE(two_level_demo(TwoLevelCase::II, 8 * std::numbers::pi).trajectory.fidelity.back(), 0.9999);
}

TEST(Checkpoints, Kinds) {
  EXPECT_TRUE(within("x", 1.0004, 1.0, 5e-4).passed());
  EXPECT_FALSE(within("x", 1.0006, 1.0, 5e-4).passed());
  EXPECT_TRUE(at_least("F", 0.99, 0.99).passed());
  EXPECT_FALSE(less_than("P", 0.12, 0.12).passed());
  EXPECT_EQ(at_least("F", 0.995, 0.99).describe(), "F = 0.995 (expected >= 0.99)");
  EXPECT_FALSE(all_passed({within("a", 0, 0, 0), less_than("b", 1, 0)}));
}

TEST(Io, NumberFormatting) {
  EXPECT_EQ(io::format_number(0.0), "0");
  EXPECT_EQ(io::format_number(-0.0), "0");
  EXPECT_EQ(io::format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(io::format_number(-2.5e-20), "-2.5e-20");
  EXPECT_EQ(io::format_number(40.0), "40");
}

TEST(Io, CsvQuotingAndLineEndings) {
  EXPECT_EQ(io::csv_field("plain"), "plain");
  EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  io::CsvTable t{{"s", "dOmega0/Omega0", "k,x"}, {}};
  t.add_row({0.5, 1.0, 0.0});
  EXPECT_EQ(t.str(), "s,dOmega0/Omega0,\"k,x\"\r\n0.5,1,0\r\n");
  EXPECT_THROW(t.add_row({1.0}), ParameterError);
}

TEST(Io, TrajectoryTableKeepsFinalRow) {
  const auto demo = two_level_demo(TwoLevelCase::I, 0, 1000);
  const auto t = io::trajectory_table(demo.trajectory, 300);
  ASSERT_EQ(t.rows.size(), 5u);  // 0, 300, 600, 900, 1000
  EXPECT_EQ(t.header, (std::vector<std::string>{"s", "P1", "P2", "F"}));
  EXPECT_DOUBLE_EQ(t.rows.back()[0], 1.0);
  EXPECT_DOUBLE_EQ(t.rows.back()[3], demo.trajectory.fidelity.back());
}

TEST(Io, SweepTableLongFormat) {
  SweepGrid g;
  g.axes = {{"x", {1, 2}}, {"y", {3, 4}}};
  g.values = {0.1, 0.2, 0.3, 0.4};
  const auto t = io::sweep_table(g);
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[2], (std::vector<double>{2, 3, 0.3}));
  EXPECT_EQ(t.header.back(), "F(T)");
}

TEST(Io, JsonRoundTripAndErrors) {
  const fs::path dir = scratch("json");
  nv::NvConfig c;
  c.b = 40.537;
  const auto doc = io::to_json(c);
  io::write_json(dir / "c.json", doc);
  EXPECT_EQ(io::read_json(dir / "c.json"), doc);
  EXPECT_EQ(io::to_json(nv::NvConfig{})["B"], "auto");
  io::write_text(dir / "bad.json", "{ nope");
  EXPECT_THROW(io::read_json(dir / "bad.json"), ParameterError);
  EXPECT_THROW(io::read_json(dir / "missing.json"), ParameterError);
  const auto model = io::model_export(c, reference_pulses(), nv::DecayModel::full_branching);
  EXPECT_EQ(model["basis"].size(), 6u);
  EXPECT_EQ(model["decay_model"], "full_branching");
  EXPECT_EQ(model["pulses"]["provenance"], "gaussian_fit");
  fs::remove_all(dir);
}

TEST(Io, OutputDirectoryHonoursEnvironment) {
  const fs::path root = scratch("out");
  ::setenv("STA_OUTPUT_ROOT", root.c_str(), 1);
  const auto first = io::output_directory("sweep");
  const auto second = io::output_directory("sweep");
  ::unsetenv("STA_OUTPUT_ROOT");
  EXPECT_EQ(first.parent_path(), root);
  EXPECT_NE(first, second);
  EXPECT_TRUE(fs::is_directory(second));
  EXPECT_EQ(first.filename().string().rfind("sweep-", 0), 0u);
  EXPECT_EQ(io::output_directory("x", (root / "explicit").string()), root / "explicit");
  fs::remove_all(root);
}
