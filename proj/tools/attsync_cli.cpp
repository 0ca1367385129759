// attsync: command-line front end for the synchronization library.
//
//   attsync simulate --config FILE [--out trace.csv] [--seed N] [--dt X] [--t-end X]
//   attsync simulate --scenario NAME ...
//   attsync graph EDGE_LIST
//   attsync kernel NAME [--gain A]
//   attsync acceptance [--parallel]

#include "attsync/acceptance.hpp"
#include "attsync/attsync.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

namespace {

using namespace attsync;

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SimulateArgs {
  std::string config;
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> t_end;
};

int cmd_simulate(const SimulateArgs& a) {
  Scenario sc;
  try {
    if (!a.scenario.empty()) {
      sc = builtin_scenario(a.scenario);
    } else {
      sc = parse_scenario(read_file(a.config));
    }
    if (a.seed) {
      sc.seed = *a.seed;
      sc.vectors.clear();
    }
    if (a.dt) sc.dt = *a.dt;
    if (a.t_end) sc.t_end = *a.t_end;
    (void)sc.simulation_config();
  } catch (const std::exception& e) {
    std::cerr << "attsync simulate: " << e.what() << '\n';
    return 2;
  }

  ScenarioOutcome outcome;
  try {
    outcome = run_scenario(sc);
  } catch (const std::exception& e) {
    std::cerr << "attsync simulate: " << e.what() << '\n';
    return 3;
  }

  if (!a.out.empty()) {
    std::ofstream csv(a.out);
    if (!csv) {
      std::cerr << "attsync simulate: cannot write '" << a.out << "'\n";
      return 2;
    }
    write_trace_csv(csv, outcome.trace);
  }

  const auto& tr = outcome.trace;
  const auto& rep = outcome.report;
  std::cout << "scenario " << sc.name << ": " << tr.samples() << " samples to t=" << tr.times.back()
            << ", V " << tr.V.front() << " -> " << tr.V.back() << ", spread " << rep.final_spread << " rad";
  if (rep.exp_rate) std::cout << ", |e| rate " << rep.exp_rate->rate << " (r2 " << rep.exp_rate->r_squared << ")";
  std::cout << '\n';
  if (!tr.valid) std::cout << "trace flagged: " << tr.failure << '\n';
  for (const auto& c : outcome.checks) {
    std::cout << (c.passed ? "  pass " : "  FAIL ") << to_string(c.spec.kind) << ": observed "
              << c.observed << ", threshold " << c.spec.threshold << '\n';
  }
  std::cout << "RESULT status=" << (outcome.ok() ? "ok" : "fail") << " final_V=" << g17(tr.V.back())
            << " spread=" << g17(rep.final_spread)
            << " rate=" << (rep.exp_rate ? g17(rep.exp_rate->rate) : std::string("nan"))
            << " r2=" << (rep.exp_rate ? g17(rep.exp_rate->r_squared) : std::string("nan"))
            << " valid=" << (tr.valid ? 1 : 0) << '\n';
  return outcome.ok() ? 0 : 1;
}

int cmd_graph(const std::string& path) {
  NetworkGraph g(1, {});
  try {
    g = parse_edge_list(read_file(path));
    g.require_connected();
  } catch (const std::exception& e) {
    std::cerr << "attsync graph: " << e.what() << '\n';
    return 2;
  }
  const IncidenceMatrix b = incidence(g);
  const CycleBasisReport rep = cycle_null_space(g);
  std::cout << "N " << g.n_nodes() << "\nM " << g.n_edges() << "\ntree " << (is_tree(g) ? "yes" : "no") << '\n';
  if (g.n_edges() > 0) std::cout << "lambda_min(BtB) " << lambda_min_BtB(b) << '\n';
  std::cout << "classification " << to_string(rep.classification) << "\nincidence\n";
  for (std::size_t r = 0; r < b.rows(); ++r) {
    std::cout << ' ';
    for (std::size_t c = 0; c < b.cols(); ++c) std::cout << ' ' << (b(r, c) >= 0 ? " " : "") << b(r, c);
    std::cout << '\n';
  }
  std::cout << "null_space " << rep.null_space_basis.size() << '\n';
  for (const auto& v : rep.null_space_basis) {
    std::cout << ' ';
    for (Eigen::Index k = 0; k < v.size(); ++k) std::cout << ' ' << v(k);
    std::cout << '\n';
  }
  return 0;
}

int cmd_kernel(const std::string& name, double gain) {
  DistanceKernel k = linear_cos_kernel();
  try {
    k = builtin_kernel(name, gain);
  } catch (const std::exception& e) {
    std::cerr << "attsync kernel: " << e.what() << "; known kernels:";
    for (const auto& n : builtin_kernel_names()) std::cerr << ' ' << n;
    std::cerr << '\n';
    return 2;
  }
  const ClassLimits lim = class_limits(k);
  auto show = [](const LimitEstimate& e) { return e.divergent ? std::string("divergent") : g17(e.value); };
  const SandwichReport sw = verify_sandwich(k, std::numbers::pi / 2.0, 100000);

  double residual = 0.0;
  const CounterRng rng(17);
  for (std::uint64_t p = 0; p < 10000; ++p) {
    const UnitVector3 n1 = rng.unit_vector(2 * p);
    const UnitVector3 n2 = rng.unit_vector(2 * p + 1);
    residual = std::max(residual, pde_residual(k, n1, n2).norm());
  }
  std::cout << "kernel " << k.name() << " (declared class " << to_string(k.declared_class()) << ")\n"
            << "lim s->0+ f'(s)sqrt(s)   " << show(lim.at_zero) << '\n'
            << "lim s->2- f'(s)sqrt(2-s) " << show(lim.at_two) << '\n'
            << "sandwich on [0, pi/2]    [" << sw.alpha_lower << ", " << sw.alpha_upper << "]"
            << (sw.holds ? "" : " (does not hold)") << '\n'
            << "max pde residual         " << residual << " over 10000 pairs\n"
            << "f' vs finite difference  " << derivative_mismatch(k) << " max relative error\n";
  std::cout << "RESULT lim0=" << show(lim.at_zero) << " lim2=" << show(lim.at_two)
            << " alpha_lower=" << g17(sw.alpha_lower) << " alpha_upper=" << g17(sw.alpha_upper)
            << " residual=" << g17(residual) << '\n';
  return 0;
}

int cmd_acceptance(bool parallel) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto results = acceptance::run_all(parallel);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return acceptance::report(std::cout, results, wall) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attitude synchronization on the sphere: simulation and diagnostics"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run a closed-loop scenario and export its trace");
  auto* cfg_opt = s->add_option("--config", sim.config, "Scenario file");
  auto* scen_opt = s->add_option("--scenario", sim.scenario, "Built-in scenario name");
  cfg_opt->excludes(scen_opt);
  s->add_option("--out", sim.out, "Write the trace CSV here");
  s->add_option("--seed", sim.seed, "Replace the initial state by a seeded random draw");
  s->add_option("--dt", sim.dt, "Override the time step");
  s->add_option("--t-end", sim.t_end, "Override the final time");

  std::string edge_list;
  auto* g = app.add_subcommand("graph", "Incidence matrix, tree test and cycle space of an edge list");
  g->add_option("edge_list", edge_list, "File with 'N M' then M lines 'i j'")->required();

  std::string kname;
  double gain = 1.0;
  auto* k = app.add_subcommand("kernel", "Endpoint limits, sandwich constants and residuals of a kernel");
  k->add_option("name", kname, "linear_cos, arccos_sqrt or quadratic")->required();
  k->add_option("--gain", gain, "Gain for linear_cos and quadratic");

  bool parallel = false;
  auto* acc = app.add_subcommand("acceptance", "Run the acceptance criteria");
  acc->add_flag("--parallel", parallel, "Run criteria concurrently");

  CLI11_PARSE(app, argc, argv);

  if (s->parsed()) {
    if (sim.config.empty() && sim.scenario.empty()) {
      std::cerr << "attsync simulate: give --config FILE or --scenario NAME\n";
      return 2;
    }
    return cmd_simulate(sim);
  }
  if (g->parsed()) return cmd_graph(edge_list);
  if (k->parsed()) return cmd_kernel(kname, gain);
  if (acc->parsed()) return cmd_acceptance(parallel);
  return 2;
}
