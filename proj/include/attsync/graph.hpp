#pragma once

// Undirected graphs with oriented incidence matrices and their cycle spaces.
//
// Nodes are 0-based in the API and 1-based in the edge-list text format.
// Edge k joining i < j gets +1 at row i and -1 at row j of B.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace attsync {

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class GraphError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NetworkGraph {
public:
  /// Edges may be given in either orientation; they are stored with i < j
  /// in the order given.
  NetworkGraph(std::size_t n_nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
      : n_(n_nodes) {
    if (n_nodes == 0) throw GraphError("graph needs at least one node");
    std::set<Edge> seen;
    for (const auto& [a, b] : edges) {
      if (a == b) throw GraphError("self-loop at node " + std::to_string(a + 1));
      if (a >= n_nodes || b >= n_nodes) {
        throw GraphError("edge (" + std::to_string(a + 1) + "," + std::to_string(b + 1) +
                         ") references a node outside 1.." + std::to_string(n_nodes));
      }
      Edge e{std::min(a, b), std::max(a, b)};
      if (!seen.insert(e).second) {
        throw GraphError("duplicate edge (" + std::to_string(e.i + 1) + "," +
                         std::to_string(e.j + 1) + ")");
      }
      edges_.push_back(e);
    }
  }

  std::size_t n_nodes() const { return n_; }
  std::size_t n_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t k) const { return edges_.at(k); }

  /// Edge index of {i, j}, if present.
  std::optional<std::size_t> edge_index(std::size_t i, std::size_t j) const {
    const Edge e{std::min(i, j), std::max(i, j)};
    for (std::size_t k = 0; k < edges_.size(); ++k) {
      if (edges_[k] == e) return k;
    }
    return std::nullopt;
  }

  bool connected() const {
    std::vector<std::size_t> parent(n_);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    std::size_t components = n_;
    for (const auto& e : edges_) {
      const auto a = find(e.i);
      const auto b = find(e.j);
      if (a != b) {
        parent[a] = b;
        --components;
      }
    }
    return components == 1;
  }

  void require_connected() const {
    if (!connected()) throw GraphError("graph is not connected");
  }

  friend bool operator==(const NetworkGraph& a, const NetworkGraph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_;
  }

private:
  std::size_t n_;
  std::vector<Edge> edges_;
};

inline NetworkGraph path_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return NetworkGraph(n, e);
}

/// Cycle 1-2-...-n-1; the closing edge (1, n) is last.
inline NetworkGraph cycle_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  e.emplace_back(0, n - 1);
  return NetworkGraph(n, e);
}

inline NetworkGraph star_graph(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 1; i < n; ++i) e.emplace_back(0, i);
  return NetworkGraph(n, e);
}

// ---------------------------------------------------------------------------
// Edge-list text format: "N M" then M lines "i j", 1-based.

inline NetworkGraph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return line;
    }
    throw GraphError("edge list: unexpected end of input after line " + std::to_string(line_no));
  };

  long long n = 0;
  long long m = 0;
  {
    std::istringstream hdr(next_line());
    if (!(hdr >> n >> m) || n <= 0 || m < 0) {
      throw GraphError("edge list line " + std::to_string(line_no) + ": expected 'N M'");
    }
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (long long k = 0; k < m; ++k) {
    std::istringstream row(next_line());
    long long i = 0;
    long long j = 0;
    if (!(row >> i >> j) || i < 1 || j < 1 || i > n || j > n) {
      throw GraphError("edge list line " + std::to_string(line_no) +
                       ": expected 'i j' with 1 <= i, j <= " + std::to_string(n));
    }
    edges.emplace_back(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
  }
  return NetworkGraph(static_cast<std::size_t>(n), edges);
}

inline NetworkGraph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  return read_edge_list(in);
}

inline void write_edge_list(std::ostream& out, const NetworkGraph& g) {
  out << g.n_nodes() << ' ' << g.n_edges() << '\n';
  for (const auto& e : g.edges()) out << e.i + 1 << ' ' << e.j + 1 << '\n';
}

inline std::string format_edge_list(const NetworkGraph& g) {
  std::ostringstream out;
  write_edge_list(out, g);
  return out.str();
}

// ---------------------------------------------------------------------------
// Incidence matrices

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<int, Eigen::Dynamic, 1>;

/// N x M matrix whose columns each hold one +1 and one -1.
class IncidenceMatrix {
public:
  explicit IncidenceMatrix(IntMatrix entries) : b_(std::move(entries)) {
    for (Eigen::Index k = 0; k < b_.cols(); ++k) {
      int plus = 0;
      int minus = 0;
      for (Eigen::Index r = 0; r < b_.rows(); ++r) {
        const int v = b_(r, k);
        if (v == 1) ++plus;
        else if (v == -1) ++minus;
        else if (v != 0) throw GraphError("incidence column " + std::to_string(k + 1) +
                                          " has an entry outside {-1, 0, 1}");
      }
      if (plus != 1 || minus != 1) {
        throw GraphError("incidence column " + std::to_string(k + 1) +
                         " must hold exactly one +1 and one -1");
      }
    }
  }

  const IntMatrix& entries() const { return b_; }
  std::size_t rows() const { return static_cast<std::size_t>(b_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(b_.cols()); }
  int operator()(std::size_t r, std::size_t c) const {
    return b_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  Eigen::MatrixXd as_double() const { return b_.cast<double>(); }

  friend bool operator==(const IncidenceMatrix& a, const IncidenceMatrix& b) {
    return a.b_.rows() == b.b_.rows() && a.b_.cols() == b.b_.cols() && a.b_ == b.b_;
  }

private:
  IntMatrix b_;
};

inline IncidenceMatrix incidence(const NetworkGraph& g) {
  IntMatrix b = IntMatrix::Zero(static_cast<Eigen::Index>(g.n_nodes()),
                                static_cast<Eigen::Index>(g.n_edges()));
  for (std::size_t k = 0; k < g.n_edges(); ++k) {
    const auto& e = g.edge(k);
    b(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(k)) = 1;
    b(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(k)) = -1;
  }
  return IncidenceMatrix(std::move(b));
}

namespace detail {
inline void require_permutation(const std::vector<std::size_t>& perm, std::size_t n,
                                const char* what) {
  if (perm.size() != n) throw std::invalid_argument(std::string(what) + ": wrong length");
  std::vector<bool> hit(n, false);
  for (auto p : perm) {
    if (p >= n || hit[p]) throw std::invalid_argument(std::string(what) + ": not a bijection");
    hit[p] = true;
  }
}
}  // namespace detail

/// Swap of two 0-based indices as a permutation of size n.
inline std::vector<std::size_t> swap_permutation(std::size_t n, std::size_t a, std::size_t b) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::swap(p.at(a), p.at(b));
  return p;
}

inline std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& p) {
  std::vector<std::size_t> inv(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) inv[p[i]] = i;
  return inv;
}

/// Relabels node r as perm[r], then negates every column whose +1 now sits
/// below its -1 so the smaller node keeps the +1.
inline IncidenceMatrix permute_nodes(const IncidenceMatrix& b, const std::vector<std::size_t>& perm) {
  detail::require_permutation(perm, b.rows(), "permute_nodes");
  IntMatrix out(b.entries().rows(), b.entries().cols());
  for (std::size_t r = 0; r < b.rows(); ++r) {
    out.row(static_cast<Eigen::Index>(perm[r])) = b.entries().row(static_cast<Eigen::Index>(r));
  }
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    Eigen::Index plus = 0;
    Eigen::Index minus = 0;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      if (out(r, k) == 1) plus = r;
      if (out(r, k) == -1) minus = r;
    }
    if (plus > minus) out.col(k) *= -1;
  }
  return IncidenceMatrix(std::move(out));
}

/// Moves column k to position perm[k].
inline IncidenceMatrix permute_edges(const IncidenceMatrix& b, const std::vector<std::size_t>& perm) {
  detail::require_permutation(perm, b.cols(), "permute_edges");
  IntMatrix out(b.entries().rows(), b.entries().cols());
  for (std::size_t k = 0; k < b.cols(); ++k) {
    out.col(static_cast<Eigen::Index>(perm[k])) = b.entries().col(static_cast<Eigen::Index>(k));
  }
  return IncidenceMatrix(std::move(out));
}

inline bool is_tree(const NetworkGraph& g) { return g.n_edges() + 1 == g.n_nodes(); }

/// Smallest eigenvalue of B^T B.
inline double lambda_min_BtB(const IncidenceMatrix& b) {
  if (b.cols() == 0) throw std::invalid_argument("lambda_min_BtB: matrix has no columns");
  const Eigen::MatrixXd bd = b.as_double();
  const Eigen::MatrixXd btb = bd.transpose() * bd;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(btb, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Cycle spaces

enum class CycleClass { Tree, IndependentCycles, SharedEdgePairs, General };

inline std::string to_string(CycleClass c) {
  switch (c) {
    case CycleClass::Tree: return "tree";
    case CycleClass::IndependentCycles: return "independent_cycles";
    case CycleClass::SharedEdgePairs: return "shared_edge_pairs";
    case CycleClass::General: return "general";
  }
  return "general";
}

struct CycleBasisReport {
  std::vector<std::vector<std::size_t>> cycles;  // edge indices per cycle, sorted
  CycleClass classification = CycleClass::Tree;
  std::vector<Eigen::VectorXd> null_space_basis;
  /// Set when the basis is the exact +-1 construction.
  std::vector<IntVector> integer_basis;
};

namespace detail {

struct Adjacency {
  // (neighbour, edge index)
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out;
  explicit Adjacency(const NetworkGraph& g) : out(g.n_nodes()) {
    for (std::size_t k = 0; k < g.n_edges(); ++k) {
      out[g.edge(k).i].emplace_back(g.edge(k).j, k);
      out[g.edge(k).j].emplace_back(g.edge(k).i, k);
    }
  }
};

/// Biconnected blocks as lists of edge indices (Hopcroft-Tarjan).
inline std::vector<std::vector<std::size_t>> edge_blocks(const NetworkGraph& g) {
  const Adjacency adj(g);
  const std::size_t n = g.n_nodes();
  std::vector<std::size_t> disc(n, 0);
  std::vector<std::size_t> low(n, 0);
  std::size_t timer = 0;
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> blocks;

  std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t u, std::size_t via) {
    disc[u] = low[u] = ++timer;
    for (const auto& [v, k] : adj.out[u]) {
      if (k == via) continue;
      if (disc[v] == 0) {
        stack.push_back(k);
        dfs(v, k);
        low[u] = std::min(low[u], low[v]);
        if (low[v] >= disc[u]) {
          std::vector<std::size_t> block;
          std::size_t top;
          do {
            top = stack.back();
            stack.pop_back();
            block.push_back(top);
          } while (top != k);
          std::sort(block.begin(), block.end());
          blocks.push_back(std::move(block));
        }
      } else if (disc[v] < disc[u]) {
        stack.push_back(k);
        low[u] = std::min(low[u], disc[v]);
      }
    }
  };
  for (std::size_t s = 0; s < n; ++s) {
    if (disc[s] == 0) dfs(s, static_cast<std::size_t>(-1));
  }
  return blocks;
}

/// Signed indicator of a closed walk given as a node sequence (first node
/// not repeated). Traversing edge (i,j) from i to j contributes +1, so
/// B v telescopes to zero. Normalized so the lowest edge index carries +1.
inline IntVector cycle_vector(const NetworkGraph& g, const std::vector<std::size_t>& walk) {
  IntVector v = IntVector::Zero(static_cast<Eigen::Index>(g.n_edges()));
  for (std::size_t p = 0; p < walk.size(); ++p) {
    const std::size_t u = walk[p];
    const std::size_t w = walk[(p + 1) % walk.size()];
    const auto k = g.edge_index(u, w);
    if (!k) throw std::logic_error("cycle_vector: walk uses a missing edge");
    v(static_cast<Eigen::Index>(*k)) = (g.edge(*k).i == u) ? 1 : -1;
  }
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) != 0) {
      if (v(k) < 0) v = -v;
      break;
    }
  }
  return v;
}

/// Node walk around a block that is a simple cycle.
inline std::vector<std::size_t> walk_cycle(const NetworkGraph& g,
                                           const std::vector<std::size_t>& block) {
  std::map<std::size_t, std::vector<std::pair<std::size_t, std::size_t>>> nbr;
  for (auto k : block) {
    nbr[g.edge(k).i].emplace_back(g.edge(k).j, k);
    nbr[g.edge(k).j].emplace_back(g.edge(k).i, k);
  }
  const std::size_t start = nbr.begin()->first;
  std::vector<std::size_t> walk{start};
  // Head toward the smaller-indexed neighbour first for a stable orientation.
  std::size_t prev_edge = static_cast<std::size_t>(-1);
  std::size_t cur = start;
  auto first = std::min(nbr[start][0], nbr[start][1]);
  cur = first.first;
  prev_edge = first.second;
  while (cur != start) {
    walk.push_back(cur);
    const auto& opts = nbr[cur];
    const auto& next = opts[0].second == prev_edge ? opts[1] : opts[0];
    prev_edge = next.second;
    cur = next.first;
  }
  return walk;
}

/// Kernel of B by SVD, rank cut at 1e-10 of the largest singular value.
inline std::vector<Eigen::VectorXd> numerical_kernel(const IncidenceMatrix& b) {
  std::vector<Eigen::VectorXd> basis;
  if (b.cols() == 0) return basis;
  const Eigen::MatrixXd bd = b.as_double();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(bd, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-10 * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  for (Eigen::Index c = rank; c < bd.cols(); ++c) basis.emplace_back(svd.matrixV().col(c));
  return basis;
}

}  // namespace detail

/// Builds a cycle-space basis. Graphs whose blocks are all bridges, simple
/// cycles, or pairs of cycles joined along one edge get an exact +-1 basis;
/// anything else falls back to an orthonormal SVD kernel.
inline CycleBasisReport cycle_null_space(const NetworkGraph& g) {
  g.require_connected();
  CycleBasisReport report;
  bool general = false;
  bool shared = false;

  for (const auto& block : detail::edge_blocks(g)) {
    if (block.size() == 1) continue;  // bridge
    std::map<std::size_t, std::size_t> degree;
    for (auto k : block) {
      ++degree[g.edge(k).i];
      ++degree[g.edge(k).j];
    }
    const std::size_t vertices = degree.size();
    if (block.size() == vertices) {
      report.cycles.push_back(block);
      report.integer_basis.push_back(detail::cycle_vector(g, detail::walk_cycle(g, block)));
      continue;
    }
    // Two cycles sharing exactly one edge: a theta graph whose two branch
    // vertices are joined directly.
    std::vector<std::size_t> branch;
    for (const auto& [v, d] : degree) {
      if (d == 3) branch.push_back(v);
      else if (d != 2) branch.push_back(static_cast<std::size_t>(-1));
    }
    const bool theta = block.size() == vertices + 1 && branch.size() == 2 &&
                       branch[0] != static_cast<std::size_t>(-1) &&
                       branch[1] != static_cast<std::size_t>(-1);
    const auto chord = theta ? g.edge_index(branch[0], branch[1]) : std::nullopt;
    if (!chord || !std::binary_search(block.begin(), block.end(), *chord)) {
      general = true;
      report.cycles.push_back(block);
      continue;
    }
    shared = true;
    // Removing the chord leaves one cycle through both branch vertices; split
    // it into the two arcs and close each with the chord.
    std::vector<std::size_t> ring;
    for (auto k : block) {
      if (k != *chord) ring.push_back(k);
    }
    auto walk = detail::walk_cycle(g, ring);
    const auto a = std::find(walk.begin(), walk.end(), branch[0]);
    std::rotate(walk.begin(), a, walk.end());
    const auto bpos = static_cast<std::size_t>(
        std::find(walk.begin(), walk.end(), branch[1]) - walk.begin());
    std::vector<std::size_t> arc1(walk.begin(), walk.begin() + static_cast<long>(bpos) + 1);
    std::vector<std::size_t> arc2{walk.front()};
    for (std::size_t p = walk.size() - 1; p >= bpos; --p) arc2.push_back(walk[p]);
    for (const auto& arc : {arc1, arc2}) {
      std::vector<std::size_t> edges;
      for (std::size_t p = 0; p < arc.size(); ++p) {
        edges.push_back(*g.edge_index(arc[p], arc[(p + 1) % arc.size()]));
      }
      std::sort(edges.begin(), edges.end());
      report.cycles.push_back(std::move(edges));
      report.integer_basis.push_back(detail::cycle_vector(g, arc));
    }
  }

  if (general) {
    report.classification = CycleClass::General;
    report.integer_basis.clear();
    report.null_space_basis = detail::numerical_kernel(incidence(g));
    return report;
  }
  if (report.integer_basis.empty()) {
    report.classification = CycleClass::Tree;
  } else {
    report.classification = shared ? CycleClass::SharedEdgePairs : CycleClass::IndependentCycles;
  }
  for (const auto& v : report.integer_basis) report.null_space_basis.emplace_back(v.cast<double>());
  return report;
}

/// Largest principal angle between span(a) and span(b), computed from sines
/// so that angles near zero keep full precision. Returns pi/2 when the
/// dimensions differ.
inline double max_principal_angle(const std::vector<Eigen::VectorXd>& a,
                                  const std::vector<Eigen::VectorXd>& b) {
  if (a.size() != b.size()) return 1.5707963267948966;
  if (a.empty()) return 0.0;
  auto orth = [](const std::vector<Eigen::VectorXd>& vs) {
    Eigen::MatrixXd m(vs.front().size(), static_cast<Eigen::Index>(vs.size()));
    for (std::size_t c = 0; c < vs.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = vs[c];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  };
  const Eigen::MatrixXd qa = orth(a);
  const Eigen::MatrixXd qb = orth(b);
  const Eigen::MatrixXd residual = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  const double s = std::min(1.0, svd.singularValues().maxCoeff());
  return std::asin(s);
}

}  // namespace attsync
