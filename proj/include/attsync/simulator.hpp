#pragma once

// Closed-loop time marching, trace capture and convergence diagnostics.

#include "attsync/controller.hpp"
#include "attsync/graph.hpp"
#include "attsync/kernels.hpp"
#include "attsync/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace attsync {

class SimulationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic sampling

/// Counter-based generator: draw k for a given seed is a pure function of
/// (seed, k), so any sample can be regenerated independently.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t counter) const { return mix(mix(seed_) ^ mix(counter + 1)); }

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const {
    return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on draws (2k, 2k+1) and (2k+2, ...).
  double normal(std::uint64_t index) const {
    const std::uint64_t pair = index / 2;
    const double r = std::sqrt(-2.0 * std::log(uniform(2 * pair)));
    const double a = 2.0 * std::numbers::pi * uniform(2 * pair + 1);
    return index % 2 == 0 ? r * std::cos(a) : r * std::sin(a);
  }

  /// Uniform point on S^2 from three independent normals.
  UnitVector3 unit_vector(std::uint64_t index) const {
    return UnitVector3(Vec3(normal(4 * index), normal(4 * index + 1), normal(4 * index + 2)));
  }

private:
  std::uint64_t seed_;
};

inline NetworkState random_state(std::size_t n_agents, std::uint64_t seed) {
  if (n_agents == 0) throw std::invalid_argument("random_state: need at least one agent");
  const CounterRng rng(seed);
  NetworkState s;
  for (std::size_t i = 0; i < n_agents; ++i) s.vectors.push_back(rng.unit_vector(i));
  return s;
}

/// Uniform samples restricted to the cap of the given half-angle around a
/// random axis, by rejection. Pairwise angles are below twice the half-angle.
inline NetworkState random_state_in_cap(std::size_t n_agents, std::uint64_t seed,
                                        double half_angle) {
  if (n_agents == 0) throw std::invalid_argument("random_state_in_cap: need at least one agent");
  const CounterRng rng(seed);
  const UnitVector3 axis = rng.unit_vector(0);
  NetworkState s;
  for (std::uint64_t k = 1; s.vectors.size() < n_agents; ++k) {
    const UnitVector3 v = rng.unit_vector(k);
    if (geodesic_angle(axis, v) < half_angle) s.vectors.push_back(v);
  }
  return s;
}

/// Labelled tree on n nodes decoded from a seeded Pruefer sequence.
inline NetworkGraph random_tree(std::size_t n, std::uint64_t seed) {
  if (n < 2) return NetworkGraph(std::max<std::size_t>(n, 1), {});
  const CounterRng rng(seed);
  std::vector<std::size_t> code(n - 2);
  for (std::size_t i = 0; i < code.size(); ++i) {
    code[i] = static_cast<std::size_t>(rng.bits(1000 + i) % n);
  }
  std::vector<std::size_t> degree(n, 1);
  for (auto c : code) ++degree[c];
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (auto c : code) {
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
      if (degree[leaf] == 1) {
        edges.emplace_back(leaf, c);
        --degree[leaf];
        --degree[c];
        break;
      }
    }
  }
  std::vector<std::size_t> last;
  for (std::size_t v = 0; v < n; ++v) {
    if (degree[v] == 1) last.push_back(v);
  }
  edges.emplace_back(last.at(0), last.at(1));
  return NetworkGraph(n, edges);
}

/// Single cycle through all n nodes in a seeded random order.
inline NetworkGraph random_cycle(std::size_t n, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("random_cycle: need at least three nodes");
  const CounterRng rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.bits(2000 + i) % (i + 1)]);
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) edges.emplace_back(order[i], order[(i + 1) % n]);
  return NetworkGraph(n, edges);
}

// ---------------------------------------------------------------------------
// Simulation

struct InitialState {
  std::vector<UnitVector3> vectors;    // used when no seed is given
  std::optional<std::uint64_t> seed;   // seeded uniform draw otherwise
};

struct SimulationConfig {
  NetworkGraph graph{1, {}};
  KernelSet kernels;
  InitialState initial;
  double t_end = 50.0;
  double dt = 1e-3;
  std::size_t record_every = 100;

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    if (!(t_end >= dt) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be >= dt");
    if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
    if (kernels.size() != graph.n_edges()) {
      throw std::invalid_argument("need one kernel per edge");
    }
    if (!initial.seed && initial.vectors.size() != graph.n_nodes()) {
      throw std::invalid_argument("initial state has " + std::to_string(initial.vectors.size()) +
                                  " vectors for " + std::to_string(graph.n_nodes()) + " nodes");
    }
  }

  NetworkState initial_state() const {
    if (initial.seed) return random_state(graph.n_nodes(), *initial.seed);
    return NetworkState{initial.vectors, 0.0};
  }
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<NetworkState> states;
  std::vector<double> V;
  std::vector<double> Vdot;
  std::vector<std::vector<double>> omega_norms;       // [agent][sample]
  std::vector<std::vector<double>> edge_error_norms;  // [edge][sample]
  bool valid = true;
  std::string failure;
  double dt = 0.0;  // integration step; 0 when not produced by simulate()

  std::size_t samples() const { return times.size(); }

  /// Stacked |e| per sample.
  std::vector<double> stacked_error_norms() const {
    std::vector<double> out(times.size(), 0.0);
    for (const auto& series : edge_error_norms) {
      for (std::size_t m = 0; m < out.size(); ++m) out[m] += series[m] * series[m];
    }
    for (auto& v : out) v = std::sqrt(v);
    return out;
  }
};

/// Tolerance on V growth between consecutive samples.
inline double lyapunov_tolerance(double v0) { return 1e-10 * (1.0 + v0); }

/// One exponential-midpoint step of the closed loop.
inline NetworkState closed_loop_step(const NetworkState& s, const NetworkGraph& g,
                                     const KernelSet& kernels, double h) {
  const ControlOutput c0 = kinematic_control(s, g, kernels);
  NetworkState half = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    half.vectors[i] = rotate_step(s.vectors[i], c0.omegas[i], 0.5 * h);
  }
  const ControlOutput c1 = kinematic_control(half, g, kernels);
  NetworkState next = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    next.vectors[i] = rotate_step(s.vectors[i], c1.omegas[i], h);
  }
  next.time = s.time + h;
  return next;
}

namespace detail {
inline void record(SimulationTrace& tr, const NetworkState& s, const NetworkGraph& g,
                   const KernelSet& kernels) {
  const ControlOutput c = kinematic_control(s, g, kernels);
  tr.times.push_back(s.time);
  tr.states.push_back(s);
  tr.V.push_back(lyapunov_value(s, g, kernels));
  tr.Vdot.push_back(lyapunov_rate(c, g));
  for (std::size_t i = 0; i < c.omegas.size(); ++i) tr.omega_norms[i].push_back(c.omegas[i].w.norm());
  for (std::size_t k = 0; k < c.edge_errors.size(); ++k) {
    tr.edge_error_norms[k].push_back(c.edge_errors[k].vector.norm());
  }
}
}  // namespace detail

/// Runs the closed loop from t = 0 to t_end. Samples are taken every
/// `record_every` steps plus the final step. A V increase beyond
/// lyapunov_tolerance marks the trace invalid and stops the run; a
/// non-finite state throws.
inline SimulationTrace simulate(const SimulationConfig& cfg) {
  cfg.validate();
  const auto& g = cfg.graph;
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  const double h = cfg.t_end / static_cast<double>(steps);

  SimulationTrace tr;
  tr.dt = h;
  tr.omega_norms.assign(g.n_nodes(), {});
  tr.edge_error_norms.assign(g.n_edges(), {});

  NetworkState s = cfg.initial_state();
  s.time = 0.0;
  const double v0 = lyapunov_value(s, g, cfg.kernels);
  const double tol = lyapunov_tolerance(v0);
  double v_prev = v0;
  detail::record(tr, s, g, cfg.kernels);

  for (std::size_t step = 1; step <= steps; ++step) {
    try {
      s = closed_loop_step(s, g, cfg.kernels, h);
    } catch (const std::invalid_argument& e) {
      throw SimulationError("step at t=" + std::to_string(s.time) + " failed: " + e.what());
    }
    s.time = step == steps ? cfg.t_end : static_cast<double>(step) * h;
    for (const auto& n : s.vectors) {
      if (!n.vec().allFinite()) {
        throw SimulationError("non-finite state at t=" + std::to_string(s.time));
      }
    }
    const double v = lyapunov_value(s, g, cfg.kernels);
    if (v > v_prev + tol) {
      detail::record(tr, s, g, cfg.kernels);
      tr.valid = false;
      std::ostringstream msg;
      msg.precision(17);
      msg << "Lyapunov function increased from " << v_prev << " to " << v << " at t=" << s.time;
      tr.failure = msg.str();
      return tr;
    }
    v_prev = v;
    if (step % cfg.record_every == 0 || step == steps) detail::record(tr, s, g, cfg.kernels);
  }
  return tr;
}

/// Wraps a single driven vector as a one-agent trace, for the limit checks.
inline SimulationTrace trace_from_trajectory(const std::vector<TimedVector>& traj) {
  SimulationTrace tr;
  tr.omega_norms.assign(1, {});
  for (const auto& p : traj) {
    tr.times.push_back(p.t);
    tr.states.push_back(NetworkState{{p.n}, p.t});
    tr.V.push_back(0.0);
    tr.Vdot.push_back(0.0);
    tr.omega_norms[0].push_back(0.0);
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Two-agent scalar reduction

struct ScalarTrajectory {
  std::vector<double> times;
  std::vector<double> theta;
};

/// Classical RK4 on theta' = -2 f'(1 - cos theta) sin theta.
inline ScalarTrajectory two_agent_scalar(const DistanceKernel& k, double theta0, double t_end,
                                         double dt) {
  if (!(theta0 >= 0.0 && theta0 < std::numbers::pi)) {
    throw std::invalid_argument("two_agent_scalar: theta0 must lie in [0, pi)");
  }
  if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("two_agent_scalar: bad time grid");

  auto rhs = [&k](double th) {
    const double fp = k.f_prime(1.0 - std::cos(th));
    if (!std::isfinite(fp)) throw std::domain_error("two_agent_scalar: non-finite f'");
    return -2.0 * fp * std::sin(th);
  };

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(steps);
  ScalarTrajectory out;
  out.times.reserve(steps + 1);
  out.theta.reserve(steps + 1);
  out.times.push_back(0.0);
  out.theta.push_back(theta0);
  double th = theta0;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double k1 = rhs(th);
    const double k2 = rhs(th + 0.5 * h * k1);
    const double k3 = rhs(th + 0.5 * h * k2);
    const double k4 = rhs(th + h * k3);
    th += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.times.push_back(i == steps ? t_end : static_cast<double>(i) * h);
    out.theta.push_back(th);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

inline constexpr double kLogFloor = 1e-14;

/// Level below which a closed-loop run of step h stalls: rotations of size
/// |omega| h under half an ulp of 1 no longer move the stored vectors, so
/// |e| flattens out near eps / h instead of decaying.
inline double resolution_floor(double h) {
  return h > 0.0 ? std::max(kLogFloor, 10.0 * std::numeric_limits<double>::epsilon() / h) : kLogFloor;
}

struct RateFit {
  double rate = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

/// Least-squares slope of log(series) against time; rate = -slope.
/// Usable samples are those before the series first drops to `floor` or
/// below; the fit covers the last `window` fraction of them.
inline RateFit fit_exponential_rate(const std::vector<double>& times,
                                    const std::vector<double>& values, double window,
                                    double floor = kLogFloor) {
  if (times.size() != values.size()) throw std::invalid_argument("fit_exponential_rate: length mismatch");
  if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("fit_exponential_rate: window in (0, 1]");

  std::size_t usable = 0;
  while (usable < values.size() && std::isfinite(values[usable]) && values[usable] > floor) {
    ++usable;
  }
  const auto count = static_cast<std::size_t>(std::ceil(window * static_cast<double>(usable)));
  if (count < 10) {
    throw std::invalid_argument("fit_exponential_rate: fewer than 10 usable samples");
  }
  const std::size_t first = usable - count;

  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = first; i < usable; ++i) {
    mt += times[i];
    my += std::log(values[i]);
  }
  mt /= static_cast<double>(count);
  my /= static_cast<double>(count);
  double stt = 0.0;
  double sty = 0.0;
  double syy = 0.0;
  for (std::size_t i = first; i < usable; ++i) {
    const double dt = times[i] - mt;
    const double dy = std::log(values[i]) - my;
    stt += dt * dt;
    sty += dt * dy;
    syy += dy * dy;
  }
  if (stt == 0.0) throw std::invalid_argument("fit_exponential_rate: degenerate time axis");
  RateFit fit;
  const double slope = sty / stt;
  fit.rate = -slope;
  fit.r_squared = syy == 0.0 ? 1.0 : (sty * sty) / (stt * syy);
  fit.samples = count;
  return fit;
}

struct AgentLimit {
  bool constant_limit = false;
  double tail_drift = 0.0;
};

/// For each agent, the largest angle between n_i(t) and n_i(t_end) over the
/// last `tail` fraction of samples.
inline std::vector<AgentLimit> constant_limit_check(const SimulationTrace& tr, double tail, double tol) {
  if (tr.samples() == 0) throw std::invalid_argument("constant_limit_check: empty trace");
  const auto count = static_cast<std::size_t>(std::floor(tail * static_cast<double>(tr.samples())));
  if (count < 1) throw std::invalid_argument("constant_limit_check: empty tail window");
  const std::size_t first = tr.samples() - count;
  const auto& last = tr.states.back();
  std::vector<AgentLimit> out(last.size());
  for (std::size_t i = 0; i < last.size(); ++i) {
    double drift = 0.0;
    for (std::size_t m = first; m < tr.samples(); ++m) {
      drift = std::max(drift, geodesic_angle(tr.states[m].vectors[i], last.vectors[i]));
    }
    out[i] = {drift < tol, drift};
  }
  return out;
}

inline double max_pairwise_angle(const NetworkState& s) {
  double spread = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      spread = std::max(spread, geodesic_angle(s.vectors[i], s.vectors[j]));
    }
  }
  return spread;
}

struct ConvergenceOptions {
  double sync_tol = 1e-4;
  double rate_window = 0.5;
  double tail = 0.2;
  double limit_tol = 1e-4;
};

struct ConvergenceReport {
  bool synchronized = false;
  double final_spread = 0.0;
  std::optional<RateFit> exp_rate;
  bool constant_limit = false;
  std::optional<UnitVector3> limit_vector;
  double tail_drift = 0.0;
};

inline ConvergenceReport convergence_report(const SimulationTrace& tr,
                                            const ConvergenceOptions& opt = {}) {
  if (tr.samples() == 0) throw std::invalid_argument("convergence_report: empty trace");
  ConvergenceReport r;
  const auto& last = tr.states.back();
  r.final_spread = max_pairwise_angle(last);
  r.synchronized = r.final_spread < opt.sync_tol;
  try {
    r.exp_rate = fit_exponential_rate(tr.times, tr.stacked_error_norms(), opt.rate_window,
                                      resolution_floor(tr.dt));
  } catch (const std::invalid_argument&) {
    r.exp_rate.reset();
  }
  const auto limits = constant_limit_check(tr, opt.tail, opt.limit_tol);
  r.constant_limit = true;
  for (const auto& l : limits) {
    r.tail_drift = std::max(r.tail_drift, l.tail_drift);
    r.constant_limit = r.constant_limit && l.constant_limit;
  }
  if (r.synchronized) {
    Vec3 mean = Vec3::Zero();
    for (const auto& n : last.vectors) mean += n.vec();
    r.limit_vector = UnitVector3(mean);
  }
  return r;
}

// ---------------------------------------------------------------------------
// CSV export

/// Header t,V,Vdot,omega_norm_1..N,edge_err_1..M,nx_1,ny_1,nz_1,...; values
/// use 17 significant digits.
inline void write_trace_csv(std::ostream& out, const SimulationTrace& tr) {
  const std::size_t n = tr.omega_norms.size();
  const std::size_t m = tr.edge_error_norms.size();
  out << "t,V,Vdot";
  for (std::size_t i = 1; i <= n; ++i) out << ",omega_norm_" << i;
  for (std::size_t k = 1; k <= m; ++k) out << ",edge_err_" << k;
  for (std::size_t i = 1; i <= n; ++i) out << ",nx_" << i << ",ny_" << i << ",nz_" << i;
  out << '\n';

  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (std::size_t s = 0; s < tr.samples(); ++s) {
    put(tr.times[s]);
    out << ',';
    put(tr.V[s]);
    out << ',';
    put(tr.Vdot[s]);
    for (std::size_t i = 0; i < n; ++i) {
      out << ',';
      put(tr.omega_norms[i][s]);
    }
    for (std::size_t k = 0; k < m; ++k) {
      out << ',';
      put(tr.edge_error_norms[k][s]);
    }
    for (const auto& v : tr.states[s].vectors) {
      for (int c = 0; c < 3; ++c) {
        out << ',';
        put(v.vec()[c]);
      }
    }
    out << '\n';
  }
}

}  // namespace attsync
