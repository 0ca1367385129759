#pragma once

// Scenario files: a flat key = value format with [graph], [kernel], [sim],
// [initial] and [checks] sections.
//
//   [graph]
//   nodes = 3
//   edges = 1-2, 2-3
//   [kernel]
//   name = linear_cos
//   gain = 1
//   edge.2 = arccos_sqrt          # per-edge override, "name" or "name:gain"
//   [sim]
//   t_end = 10
//   dt = 0.001
//   record_every = 100
//   [initial]
//   seed = 7                      # or: vectors = 1 0 0; 0 1 0; 0 0 1
//   [checks]
//   synchronized = 1e-4
//   min_rate = 1.0

#include "attsync/controller.hpp"
#include "attsync/graph.hpp"
#include "attsync/kernels.hpp"
#include "attsync/simulator.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace attsync {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct KernelSpec {
  std::string name = "linear_cos";
  double gain = 1.0;

  DistanceKernel build() const { return builtin_kernel(name, gain); }
  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

enum class CheckKind {
  Synchronized,       // final spread below threshold
  MinRate,            // fitted |e| rate at least threshold
  MinRSquared,        // r^2 of that fit at least threshold
  MaxFinalV,          // V(t_end) at most threshold
  ConstantLimit,      // tail drift below threshold
  InitialStationary,  // max |omega_i| at t = 0 below threshold
};

struct CheckSpec {
  CheckKind kind;
  double threshold;
  friend bool operator==(const CheckSpec&, const CheckSpec&) = default;
};

inline const std::vector<std::pair<std::string, CheckKind>>& check_names() {
  static const std::vector<std::pair<std::string, CheckKind>> names{
      {"synchronized", CheckKind::Synchronized},
      {"min_rate", CheckKind::MinRate},
      {"min_r_squared", CheckKind::MinRSquared},
      {"max_final_V", CheckKind::MaxFinalV},
      {"constant_limit", CheckKind::ConstantLimit},
      {"initial_stationary", CheckKind::InitialStationary},
  };
  return names;
}

inline std::string to_string(CheckKind k) {
  for (const auto& [name, kind] : check_names()) {
    if (kind == k) return name;
  }
  return "?";
}

struct Scenario {
  std::string name = "custom";
  std::size_t nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // 1-based as written
  KernelSpec kernel;
  std::map<std::size_t, KernelSpec> edge_kernels;  // 1-based edge index
  double t_end = 50.0;
  double dt = 1e-3;
  std::size_t record_every = 100;
  std::optional<std::uint64_t> seed;
  std::vector<Vec3> vectors;
  std::vector<CheckSpec> checks;

  friend bool operator==(const Scenario&, const Scenario&) = default;

  NetworkGraph graph() const {
    std::vector<std::pair<std::size_t, std::size_t>> zero_based;
    for (const auto& [i, j] : edges) {
      if (i == 0 || j == 0) throw GraphError("edge endpoints are 1-based");
      zero_based.emplace_back(i - 1, j - 1);
    }
    return NetworkGraph(nodes, zero_based);
  }

  SimulationConfig simulation_config() const {
    SimulationConfig cfg;
    cfg.graph = graph();
    for (std::size_t k = 1; k <= cfg.graph.n_edges(); ++k) {
      const auto it = edge_kernels.find(k);
      cfg.kernels.push_back(it == edge_kernels.end() ? kernel.build() : it->second.build());
    }
    for (const auto& [k, spec] : edge_kernels) {
      if (k < 1 || k > cfg.graph.n_edges()) {
        throw ConfigError("kernel override for edge " + std::to_string(k) + " but graph has " +
                          std::to_string(cfg.graph.n_edges()) + " edges");
      }
    }
    if (seed) {
      cfg.initial.seed = seed;
    } else {
      for (const auto& v : vectors) cfg.initial.vectors.emplace_back(v);
    }
    cfg.t_end = t_end;
    cfg.dt = dt;
    cfg.record_every = record_every;
    cfg.validate();
    return cfg;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class FieldReader {
public:
  FieldReader(std::size_t line, std::string field) : line_(line), field_(std::move(field)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line_) + ", field '" + field_ + "': " + what);
  }

  double real(const std::string& text) const {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) fail("expected a real number, got '" + text + "'");
    return v;
  }

  std::uint64_t count(const std::string& text) const {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || p != end) fail("expected a non-negative integer, got '" + text + "'");
    return v;
  }

  KernelSpec kernel(const std::string& text) const {
    const auto parts = split(text, ':');
    if (parts.empty() || parts.size() > 2) fail("expected 'name' or 'name:gain'");
    KernelSpec k{parts[0], parts.size() == 2 ? real(parts[1]) : 1.0};
    try {
      (void)k.build();
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    return k;
  }

private:
  std::size_t line_;
  std::string field_;
};

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::string section;
  std::map<std::string, std::size_t> seen;  // "section.key" -> line
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "graph" && section != "kernel" && section != "sim" &&
          section != "initial" && section != "checks") {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const detail::FieldReader rd(line_no, key);
    if (!seen.emplace(section + "." + key, line_no).second) rd.fail("duplicate key");

    if (section == "scenario") {
      if (key == "name") sc.name = value;
      else rd.fail("unknown key in [scenario]");
    } else if (section == "graph") {
      if (key == "nodes") {
        sc.nodes = static_cast<std::size_t>(rd.count(value));
      } else if (key == "edges") {
        for (const auto& item : detail::split(value, ',')) {
          const auto ends = detail::split(item, '-');
          if (ends.size() != 2) rd.fail("expected edges as 'i-j, k-l, ...'");
          sc.edges.emplace_back(static_cast<std::size_t>(rd.count(ends[0])),
                                static_cast<std::size_t>(rd.count(ends[1])));
        }
      } else {
        rd.fail("unknown key in [graph]");
      }
    } else if (section == "kernel") {
      if (key == "name") {
        sc.kernel.name = value;
        (void)rd.kernel(value);
      } else if (key == "gain") {
        sc.kernel.gain = rd.real(value);
      } else if (key.rfind("edge.", 0) == 0) {
        const auto k = static_cast<std::size_t>(rd.count(key.substr(5)));
        if (k == 0) rd.fail("edge indices are 1-based");
        sc.edge_kernels[k] = rd.kernel(value);
      } else {
        rd.fail("unknown key in [kernel]");
      }
    } else if (section == "sim") {
      if (key == "t_end") sc.t_end = rd.real(value);
      else if (key == "dt") sc.dt = rd.real(value);
      else if (key == "record_every") sc.record_every = static_cast<std::size_t>(rd.count(value));
      else rd.fail("unknown key in [sim]");
    } else if (section == "initial") {
      if (key == "seed") {
        sc.seed = rd.count(value);
      } else if (key == "vectors") {
        for (const auto& triple : detail::split(value, ';')) {
          std::istringstream vs(triple);
          std::string a, b, c, extra;
          if (!(vs >> a >> b >> c) || (vs >> extra)) rd.fail("expected 'x y z; x y z; ...'");
          const Vec3 v(rd.real(a), rd.real(b), rd.real(c));
          if (v.norm() == 0.0) rd.fail("zero vector");
          sc.vectors.push_back(v);
        }
      } else {
        rd.fail("unknown key in [initial]");
      }
    } else if (section == "checks") {
      bool known = false;
      for (const auto& [name, kind] : check_names()) {
        if (name == key) {
          sc.checks.push_back({kind, rd.real(value)});
          known = true;
        }
      }
      if (!known) rd.fail("unknown check kind");
    }
  }

  auto require = [&](const char* key, const char* where) {
    if (!seen.count(key)) {
      throw ConfigError(std::string("missing required field '") + where + "' in [" +
                        std::string(key).substr(0, std::string(key).find('.')) + "]");
    }
  };
  require("graph.nodes", "nodes");
  require("graph.edges", "edges");
  require("kernel.name", "name");
  require("sim.t_end", "t_end");
  require("sim.dt", "dt");
  if (!seen.count("initial.seed") && !seen.count("initial.vectors")) {
    throw ConfigError("missing required field 'seed' or 'vectors' in [initial]");
  }
  if (seen.count("initial.seed") && seen.count("initial.vectors")) {
    throw ConfigError("line " + std::to_string(seen["initial.vectors"]) +
                      ": give either 'seed' or 'vectors' in [initial], not both");
  }
  if (sc.dt <= 0.0) throw ConfigError("line " + std::to_string(seen["sim.dt"]) + ", field 'dt': must be positive");
  if (sc.t_end < sc.dt) throw ConfigError("line " + std::to_string(seen["sim.t_end"]) + ", field 't_end': must be >= dt");
  if (sc.record_every < 1) throw ConfigError("field 'record_every': must be >= 1");
  if (!seen.count("initial.seed") && sc.vectors.size() != sc.nodes) {
    throw ConfigError("line " + std::to_string(seen["initial.vectors"]) + ", field 'vectors': got " +
                      std::to_string(sc.vectors.size()) + " vectors for " + std::to_string(sc.nodes) + " nodes");
  }
  return sc;
}

inline std::string serialize_scenario(const Scenario& sc) {
  using detail::fmt;
  std::ostringstream out;
  out << "[scenario]\nname = " << sc.name << "\n\n";
  out << "[graph]\nnodes = " << sc.nodes << "\nedges = ";
  for (std::size_t k = 0; k < sc.edges.size(); ++k) {
    out << (k ? ", " : "") << sc.edges[k].first << '-' << sc.edges[k].second;
  }
  out << "\n\n[kernel]\nname = " << sc.kernel.name << "\ngain = " << fmt(sc.kernel.gain) << '\n';
  for (const auto& [k, spec] : sc.edge_kernels) {
    out << "edge." << k << " = " << spec.name << ':' << fmt(spec.gain) << '\n';
  }
  out << "\n[sim]\nt_end = " << fmt(sc.t_end) << "\ndt = " << fmt(sc.dt)
      << "\nrecord_every = " << sc.record_every << "\n\n[initial]\n";
  if (sc.seed) {
    out << "seed = " << *sc.seed << '\n';
  } else {
    out << "vectors = ";
    for (std::size_t i = 0; i < sc.vectors.size(); ++i) {
      out << (i ? "; " : "") << fmt(sc.vectors[i].x()) << ' ' << fmt(sc.vectors[i].y()) << ' '
          << fmt(sc.vectors[i].z());
    }
    out << '\n';
  }
  if (!sc.checks.empty()) {
    out << "\n[checks]\n";
    for (const auto& c : sc.checks) out << to_string(c.kind) << " = " << fmt(c.threshold) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Running a scenario

struct CheckResult {
  CheckSpec spec;
  bool passed = false;
  double observed = 0.0;
};

struct ScenarioOutcome {
  SimulationTrace trace;
  ConvergenceReport report;
  std::vector<CheckResult> checks;

  bool ok() const {
    if (!trace.valid) return false;
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
};

inline ScenarioOutcome run_scenario(const Scenario& sc) {
  const SimulationConfig cfg = sc.simulation_config();
  ScenarioOutcome out;

  double initial_omega = 0.0;
  {
    const auto c = kinematic_control(cfg.initial_state(), cfg.graph, cfg.kernels);
    for (const auto& w : c.omegas) initial_omega = std::max(initial_omega, w.w.norm());
  }

  out.trace = simulate(cfg);
  ConvergenceOptions opt;
  for (const auto& c : sc.checks) {
    if (c.kind == CheckKind::Synchronized) opt.sync_tol = c.threshold;
    if (c.kind == CheckKind::ConstantLimit) opt.limit_tol = c.threshold;
  }
  out.report = convergence_report(out.trace, opt);

  for (const auto& c : sc.checks) {
    CheckResult r{c, false, 0.0};
    switch (c.kind) {
      case CheckKind::Synchronized:
        r.observed = out.report.final_spread;
        r.passed = r.observed < c.threshold;
        break;
      case CheckKind::MinRate:
        r.observed = out.report.exp_rate ? out.report.exp_rate->rate : 0.0;
        r.passed = out.report.exp_rate && r.observed >= c.threshold;
        break;
      case CheckKind::MinRSquared:
        r.observed = out.report.exp_rate ? out.report.exp_rate->r_squared : 0.0;
        r.passed = out.report.exp_rate && r.observed >= c.threshold;
        break;
      case CheckKind::MaxFinalV:
        r.observed = out.trace.V.back();
        r.passed = r.observed <= c.threshold;
        break;
      case CheckKind::ConstantLimit:
        r.observed = out.report.tail_drift;
        r.passed = r.observed < c.threshold;
        break;
      case CheckKind::InitialStationary:
        r.observed = initial_omega;
        r.passed = r.observed < c.threshold;
        break;
    }
    out.checks.push_back(r);
  }
  return out;
}

/// Scenarios that can be run by name from the command line.
inline std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> out;
  const double q = 0.78539816339744828;  // pi/4

  Scenario two_exp;
  two_exp.name = "two_agent_exponential";
  two_exp.nodes = 2;
  two_exp.edges = {{1, 2}};
  two_exp.t_end = 10.0;
  two_exp.record_every = 10;
  two_exp.vectors = {Vec3(1, 0, 0), Vec3(std::cos(q), std::sin(q), 0)};
  two_exp.checks = {{CheckKind::Synchronized, 1e-4}, {CheckKind::MinRate, 1.0}};
  out.push_back(two_exp);

  Scenario arccot = two_exp;
  arccot.name = "two_agent_arccot";
  arccot.kernel = {"arccos_sqrt", 1.0};
  arccot.t_end = 100.0;
  arccot.record_every = 100;
  arccot.checks = {{CheckKind::MaxFinalV, 1e-3}};
  out.push_back(arccot);

  Scenario tree;
  tree.name = "tree_exponential";
  tree.nodes = 5;
  tree.edges = {{1, 2}, {2, 3}, {2, 4}, {4, 5}};
  tree.vectors = {Vec3(1, 0, 0), Vec3(0.8, 0.6, 0), Vec3(0.8, 0, 0.6), Vec3(0.6, 0.6, 0.52915026221291817),
                  Vec3(0.9, -0.3, 0.3)};
  tree.checks = {{CheckKind::Synchronized, 1e-4},
                 {CheckKind::MinRate, 1e-3},
                 {CheckKind::MinRSquared, 0.999},
                 {CheckKind::ConstantLimit, 1e-4}};
  out.push_back(tree);

  Scenario cyc;
  cyc.name = "cycle_equilibrium";
  cyc.nodes = 4;
  cyc.edges = {{1, 2}, {2, 3}, {3, 4}, {1, 4}};
  cyc.t_end = 1.0;
  cyc.record_every = 100;
  cyc.vectors = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(0, -1, 0)};
  cyc.checks = {{CheckKind::InitialStationary, 1e-10}, {CheckKind::ConstantLimit, 1e-10}};
  out.push_back(cyc);
  return out;
}

inline Scenario builtin_scenario(const std::string& name) {
  for (auto& s : builtin_scenarios()) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown scenario '" + name + "'");
}

}  // namespace attsync
