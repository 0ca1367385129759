#include "attsync/scenario.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace attsync;

namespace {

const char* kTwoAgent = R"(# two agents, linear kernel
[scenario]
name = pair

[graph]
nodes = 2
edges = 1-2

[kernel]
name = linear_cos
gain = 1

[sim]
t_end = 10
dt = 0.001
record_every = 10

[initial]
vectors = 1 0 0; 0.70710678118654757 0.70710678118654746 0

[checks]
synchronized = 1e-4
min_rate = 1.0
)";

std::string without_line(std::string text, const std::string& line) {
  const auto pos = text.find(line);
  if (pos != std::string::npos) text.erase(pos, line.size() + 1);
  return text;
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ParseScenario, Fields) {
  const Scenario sc = parse_scenario(kTwoAgent);
  EXPECT_EQ(sc.name, "pair");
  EXPECT_EQ(sc.nodes, 2u);
  ASSERT_EQ(sc.edges.size(), 1u);
  EXPECT_EQ(sc.edges[0], (std::pair<std::size_t, std::size_t>{1, 2}));
  EXPECT_EQ(sc.kernel.name, "linear_cos");
  EXPECT_EQ(sc.dt, 1e-3);
  EXPECT_EQ(sc.record_every, 10u);
  ASSERT_EQ(sc.vectors.size(), 2u);
  ASSERT_EQ(sc.checks.size(), 2u);
  EXPECT_EQ(sc.checks[1].kind, CheckKind::MinRate);
}

TEST(ParseScenario, RoundTrip) {
  std::vector<Scenario> all = builtin_scenarios();
  all.push_back(parse_scenario(kTwoAgent));
  Scenario seeded = builtin_scenario("tree_exponential");
  seeded.vectors.clear();
  seeded.seed = 12345678901234ULL;
  seeded.edge_kernels[2] = {"quadratic", 0.3};
  seeded.edge_kernels[4] = {"arccos_sqrt", 1.0};
  all.push_back(seeded);
  for (const auto& sc : all) {
    const std::string text = serialize_scenario(sc);
    const Scenario back = parse_scenario(text);
    EXPECT_EQ(back, sc) << text;
    EXPECT_EQ(serialize_scenario(back), text);
  }
}

TEST(ParseScenario, MissingDtNamesTheField) {
  const std::string msg = error_of(without_line(kTwoAgent, "dt = 0.001"));
  EXPECT_NE(msg.find("'dt'"), std::string::npos) << msg;
}

TEST(ParseScenario, BadValueReportsLineAndField) {
  std::string text = kTwoAgent;
  text.replace(text.find("t_end = 10"), 10, "t_end = ten");
  const std::string msg = error_of(text);
  EXPECT_NE(msg.find("line 14"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'t_end'"), std::string::npos) << msg;
}

TEST(ParseScenario, RejectsInconsistentInput) {
  EXPECT_NE(error_of(std::string(kTwoAgent) + "[initial]\nseed = 3\n"), "");
  EXPECT_NE(error_of(std::string(kTwoAgent) + "[checks]\nmin_rate = 2\n"), "");
  EXPECT_NE(error_of(std::string(kTwoAgent) + "[checks]\nbogus = 2\n"), "");
  EXPECT_NE(error_of(std::string(kTwoAgent) + "[mystery]\n"), "");
  EXPECT_NE(error_of("nodes = 2\n"), "");
}

TEST(ScenarioConfig, InvalidGraphReportsInvariant) {
  std::string text = kTwoAgent;
  text.replace(text.find("edges = 1-2"), 11, "edges = 1-1");
  const Scenario sc = parse_scenario(text);
  try {
    (void)sc.simulation_config();
    FAIL();
  } catch (const GraphError& e) {
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
  }
}

TEST(ScenarioConfig, UnknownKernelRejected) {
  std::string text = kTwoAgent;
  text.replace(text.find("name = linear_cos"), 17, "name = nonsense");
  const std::string msg = error_of(text);
  EXPECT_NE(msg.find("line 10, field 'name'"), std::string::npos) << msg;
}

TEST(ScenarioConfig, PerEdgeKernels) {
  Scenario sc = builtin_scenario("tree_exponential");
  sc.edge_kernels[3] = {"arccos_sqrt", 1.0};
  const auto cfg = sc.simulation_config();
  EXPECT_EQ(cfg.kernels[0].name(), "linear_cos");
  EXPECT_EQ(cfg.kernels[2].name(), "arccos_sqrt");
  sc.edge_kernels[9] = {"linear_cos", 1.0};
  EXPECT_THROW((void)sc.simulation_config(), ConfigError);
}

TEST(RunScenario, TwoAgentFile) {
  const auto out = run_scenario(parse_scenario(kTwoAgent));
  EXPECT_TRUE(out.ok());
  ASSERT_TRUE(out.report.exp_rate.has_value());
  EXPECT_GE(out.report.exp_rate->rate, 1.0);
}

TEST(RunScenario, SynchronizedStartEndsAtZero) {
  Scenario sc = parse_scenario(kTwoAgent);
  sc.vectors = {Vec3(0, 0, 1), Vec3(0, 0, 1)};
  sc.checks = {{CheckKind::MaxFinalV, 0.0}};
  const auto out = run_scenario(sc);
  EXPECT_TRUE(out.ok());
  EXPECT_EQ(out.trace.V.back(), 0.0);
}

TEST(RunScenario, FailingCheckMakesOutcomeFail) {
  Scenario sc = parse_scenario(kTwoAgent);
  sc.checks = {{CheckKind::MinRate, 5.0}};
  EXPECT_FALSE(run_scenario(sc).ok());
}

TEST(RunScenario, BuiltinsPass) {
  for (const auto& sc : builtin_scenarios()) {
    const auto out = run_scenario(sc);
    EXPECT_TRUE(out.ok()) << sc.name;
  }
  EXPECT_THROW(builtin_scenario("nope"), ConfigError);
}

TEST(RunScenario, SeededCsvIsByteIdentical) {
  Scenario sc = builtin_scenario("tree_exponential");
  sc.vectors.clear();
  sc.seed = 99;
  sc.t_end = 2.0;
  auto csv = [&] {
    std::ostringstream out;
    write_trace_csv(out, run_scenario(sc).trace);
    return out.str();
  };
  EXPECT_EQ(csv(), csv());
}
