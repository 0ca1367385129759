#pragma once

// Kinematic synchronization law: per-edge errors mapped to per-agent angular
// velocities through the incidence structure, plus the edge-distance
// Lyapunov function.
//
// Everything is expressed in the inertial frame. The body-frame command is
// the same vector rotated by the agent attitude, so norms and V are unchanged.

#include "attsync/graph.hpp"
#include "attsync/kernels.hpp"
#include "attsync/sphere.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace attsync {

struct NetworkState {
  std::vector<UnitVector3> vectors;
  double time = 0.0;

  std::size_t size() const { return vectors.size(); }
};

struct ControlOutput {
  std::vector<AngularVelocity> omegas;
  std::vector<EdgeError> edge_errors;
};

using KernelSet = std::vector<DistanceKernel>;

inline KernelSet uniform_kernels(const DistanceKernel& k, std::size_t n_edges) {
  return KernelSet(n_edges, k);
}

namespace detail {
inline void check_sizes(const NetworkState& s, const NetworkGraph& g, const KernelSet& k) {
  if (s.size() != g.n_nodes()) {
    throw std::invalid_argument("state has " + std::to_string(s.size()) + " agents, graph has " +
                                std::to_string(g.n_nodes()) + " nodes");
  }
  if (k.size() != g.n_edges()) {
    throw std::invalid_argument("got " + std::to_string(k.size()) + " kernels for " +
                                std::to_string(g.n_edges()) + " edges");
  }
}
}  // namespace detail

/// Edge k = (i, j), i < j, has tail n_i and head n_j.
inline std::vector<EdgeError> compute_edge_errors(const NetworkState& s, const NetworkGraph& g,
                                                  const KernelSet& kernels) {
  detail::check_sizes(s, g, kernels);
  std::vector<EdgeError> out;
  out.reserve(g.n_edges());
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const auto& e = g.edge(k);
    out.push_back(edge_error(kernels[k], s.vectors[e.i], s.vectors[e.j], k));
  }
  return out;
}

/// omega_i = sum_k B(i,k) e_k, applied column by column without forming B (x) I.
inline ControlOutput kinematic_control(const NetworkState& s, const NetworkGraph& g,
                                       const KernelSet& kernels) {
  ControlOutput out;
  out.edge_errors = compute_edge_errors(s, g, kernels);
  out.omegas.assign(g.n_nodes(), AngularVelocity{});
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const auto& e = g.edge(k);
    out.omegas[e.i].w += out.edge_errors[k].vector;
    out.omegas[e.j].w -= out.edge_errors[k].vector;
  }
  return out;
}

inline double lyapunov_value(const NetworkState& s, const NetworkGraph& g, const KernelSet& kernels) {
  detail::check_sizes(s, g, kernels);
  double v = 0.0;
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const auto& e = g.edge(k);
    v += distance(kernels[k], s.vectors[e.i], s.vectors[e.j]);
  }
  return v;
}

/// dV/dt = -|(B (x) I) e|^2 = -sum_i |omega_i|^2.
inline double lyapunov_rate(const ControlOutput& c, const NetworkGraph& g) {
  if (c.omegas.size() != g.n_nodes()) {
    throw std::invalid_argument("lyapunov_rate: control output does not match graph");
  }
  double r = 0.0;
  for (const auto& w : c.omegas) r -= w.w.squaredNorm();
  return r;
}

/// |e| of the stacked edge errors.
inline double stacked_error_norm(const std::vector<EdgeError>& errors) {
  double sq = 0.0;
  for (const auto& e : errors) sq += e.vector.squaredNorm();
  return std::sqrt(sq);
}

}  // namespace attsync
