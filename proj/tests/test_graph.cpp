#include "attsync/acceptance.hpp"
#include "attsync/graph.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace attsync;
using acceptance::int_matrix;

namespace {

NetworkGraph triangle() { return NetworkGraph(3, {{0, 1}, {1, 2}, {0, 2}}); }

const IncidenceMatrix kB1(int_matrix({{1, 0, 1}, {-1, 1, 0}, {0, -1, -1}}));
const IncidenceMatrix kB2(int_matrix({{1, 1, 0}, {-1, 0, 1}, {0, -1, -1}}));
const IncidenceMatrix kB3(int_matrix({{0, 1, 1}, {1, 0, -1}, {-1, -1, 0}}));

/// Every graph on n labeled nodes, one per subset of the complete edge set.
template <class F>
void for_each_graph(std::size_t n, F&& f) {
  std::vector<std::pair<std::size_t, std::size_t>> all;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(i, j);
  for (std::uint32_t mask = 0; mask < (1u << all.size()); ++mask) {
    std::vector<std::pair<std::size_t, std::size_t>> e;
    for (std::size_t b = 0; b < all.size(); ++b)
      if (mask & (1u << b)) e.emplace_back(all[b]);
    f(NetworkGraph(n, e));
  }
}

Eigen::Index rank_of(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return (s.array() > 1e-10 * s(0)).count();
}

}  // namespace

TEST(NetworkGraph, StoresOrientedEdges) {
  const NetworkGraph g(3, {{1, 0}, {2, 1}});
  EXPECT_EQ(g.edge(0), (Edge{0, 1}));
  EXPECT_EQ(g.edge(1), (Edge{1, 2}));
  EXPECT_EQ(g.edge_index(2, 1), 1u);
  EXPECT_FALSE(g.edge_index(0, 2).has_value());
}

TEST(NetworkGraph, RejectsInvalidEdges) {
  EXPECT_THROW(NetworkGraph(3, {{1, 1}}), GraphError);
  EXPECT_THROW(NetworkGraph(3, {{0, 3}}), GraphError);
  EXPECT_THROW(NetworkGraph(3, {{0, 1}, {1, 0}}), GraphError);
  EXPECT_THROW(NetworkGraph(0, {}), GraphError);
}

TEST(NetworkGraph, Connectivity) {
  EXPECT_TRUE(path_graph(4).connected());
  EXPECT_TRUE(NetworkGraph(1, {}).connected());
  const NetworkGraph split(4, {{0, 1}, {2, 3}});
  EXPECT_FALSE(split.connected());
  EXPECT_THROW(split.require_connected(), GraphError);
  EXPECT_THROW(cycle_null_space(split), GraphError);
}

TEST(EdgeList, RoundTripIsExact) {
  for (const auto& g : {triangle(), path_graph(6), star_graph(5), acceptance::shared_edge_cycles_graph()}) {
    const std::string text = format_edge_list(g);
    const NetworkGraph back = parse_edge_list(text);
    EXPECT_EQ(back, g);
    EXPECT_EQ(format_edge_list(back), text);
  }
}

TEST(EdgeList, CommentsAndBlankLines) {
  const auto g = parse_edge_list("# triangle\n\n3 3\n1 2\n  # middle\n2 3\n1 3\n");
  EXPECT_EQ(g, triangle());
}

TEST(EdgeList, ErrorsCarryLineNumbers) {
  try {
    parse_edge_list("3 2\n1 2\n2 9\n");
    FAIL() << "expected GraphError";
  } catch (const GraphError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_edge_list("3 3\n1 2\n"), GraphError);
  EXPECT_THROW(parse_edge_list("x y\n"), GraphError);
  EXPECT_THROW(parse_edge_list("2 1\n1 1\n"), GraphError);
}

TEST(Incidence, TriangleMatrix) { EXPECT_EQ(incidence(triangle()), kB1); }

TEST(Incidence, SingleEdgeAndPath) {
  EXPECT_EQ(incidence(path_graph(2)), IncidenceMatrix(int_matrix({{1}, {-1}})));
  EXPECT_EQ(incidence(path_graph(3)), IncidenceMatrix(int_matrix({{1, 0}, {-1, 1}, {0, -1}})));
}

TEST(Incidence, RejectsMalformedColumns) {
  EXPECT_THROW(IncidenceMatrix(int_matrix({{1, 0}, {1, 1}, {-1, -1}})), GraphError);
  EXPECT_THROW(IncidenceMatrix(int_matrix({{2}, {-1}})), GraphError);
}

TEST(Permutation, NodeSwapGivesB2) {
  EXPECT_EQ(permute_nodes(kB1, swap_permutation(3, 0, 1)), kB2);
  EXPECT_EQ(permute_nodes(kB1, {0, 1, 2}), kB1);
  EXPECT_EQ(permute_nodes(permute_nodes(kB1, swap_permutation(3, 0, 1)), swap_permutation(3, 0, 1)), kB1);
}

TEST(Permutation, EdgeSwapGivesB3) {
  EXPECT_EQ(permute_edges(kB2, swap_permutation(3, 0, 2)), kB3);
  EXPECT_EQ(permute_edges(kB2, {0, 1, 2}), kB2);
  EXPECT_EQ(permute_edges(permute_edges(kB2, swap_permutation(3, 0, 2)), swap_permutation(3, 0, 2)), kB2);
}

TEST(Permutation, InverseRoundTrips) {
  const IncidenceMatrix b = incidence(acceptance::shared_edge_cycles_graph());
  const std::vector<std::size_t> node_perm{3, 5, 0, 1, 4, 2};
  const std::vector<std::size_t> edge_perm{7, 2, 5, 0, 1, 6, 3, 4};
  EXPECT_EQ(permute_nodes(permute_nodes(b, node_perm), inverse_permutation(node_perm)), b);
  EXPECT_EQ(permute_edges(permute_edges(b, edge_perm), inverse_permutation(edge_perm)), b);
}

TEST(Permutation, RejectsNonBijections) {
  EXPECT_THROW(permute_nodes(kB1, {0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(permute_edges(kB1, {0, 1}), std::invalid_argument);
}

TEST(IsTree, Examples) {
  EXPECT_TRUE(is_tree(path_graph(3)));
  EXPECT_FALSE(is_tree(triangle()));
  EXPECT_TRUE(is_tree(star_graph(5)));
}

TEST(LambdaMin, Examples) {
  EXPECT_NEAR(lambda_min_BtB(incidence(path_graph(2))), 2.0, 1e-14);
  EXPECT_NEAR(lambda_min_BtB(incidence(path_graph(3))), 1.0, 1e-14);
  EXPECT_NEAR(lambda_min_BtB(incidence(triangle())), 0.0, 1e-14);
  EXPECT_THROW(lambda_min_BtB(incidence(NetworkGraph(1, {}))), std::invalid_argument);
}

TEST(LambdaMin, PositiveExactlyOnTreesUpToFiveNodes) {
  std::size_t connected = 0;
  std::size_t trees = 0;
  for (std::size_t n = 2; n <= 5; ++n) {
    for_each_graph(n, [&](const NetworkGraph& g) {
      if (!g.connected()) return;
      ++connected;
      trees += is_tree(g) ? 1 : 0;
      const double lam = lambda_min_BtB(incidence(g));
      ASSERT_EQ(lam > 1e-10, is_tree(g)) << format_edge_list(g) << "lambda=" << lam;
    });
  }
  // Labeled connected graphs on 2..5 nodes: 1 + 4 + 38 + 728; labeled trees n^(n-2): 1 + 3 + 16 + 125.
  EXPECT_EQ(connected, 771u);
  EXPECT_EQ(trees, 145u);
}

TEST(CycleNullSpace, TreeHasEmptyBasis) {
  for (const auto& g : {path_graph(5), star_graph(6)}) {
    const auto rep = cycle_null_space(g);
    EXPECT_EQ(rep.classification, CycleClass::Tree);
    EXPECT_TRUE(rep.null_space_basis.empty());
  }
}

TEST(CycleNullSpace, TriangleVector) {
  const auto rep = cycle_null_space(triangle());
  EXPECT_EQ(rep.classification, CycleClass::IndependentCycles);
  ASSERT_EQ(rep.integer_basis.size(), 1u);
  EXPECT_EQ(rep.integer_basis[0], (IntVector(3) << 1, 1, -1).finished());
}

TEST(CycleNullSpace, TwoIndependentCyclesGraph) {
  const auto rep = cycle_null_space(acceptance::two_independent_cycles_graph());
  EXPECT_EQ(rep.classification, CycleClass::IndependentCycles);
  ASSERT_EQ(rep.integer_basis.size(), 2u);
  EXPECT_EQ(rep.integer_basis[0], (IntVector(6) << 1, 1, -1, 0, 0, 0).finished());
  EXPECT_EQ(rep.integer_basis[1], (IntVector(6) << 0, 0, 0, 1, -1, 1).finished());
}

TEST(CycleNullSpace, SharedEdgeGraph) {
  const NetworkGraph g = acceptance::shared_edge_cycles_graph();
  const auto rep = cycle_null_space(g);
  EXPECT_EQ(rep.classification, CycleClass::SharedEdgePairs);
  ASSERT_EQ(rep.null_space_basis.size(), 3u);
  const auto listed = acceptance::as_vectors(
      {{1, 1, -1, 0, 0, 0, 0, 0}, {0, 0, 1, 0, 0, 0, -1, 1}, {0, 0, 0, 1, -1, 1, 0, 0}});
  EXPECT_LT(max_principal_angle(rep.null_space_basis, listed), 1e-10);
  const IntMatrix b = incidence(g).entries();
  for (const auto& v : rep.integer_basis) EXPECT_TRUE((b * v).isZero(0));
}

TEST(CycleNullSpace, GeneralFallbackOnK4) {
  NetworkGraph k4(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  const auto rep = cycle_null_space(k4);
  EXPECT_EQ(rep.classification, CycleClass::General);
  ASSERT_EQ(rep.null_space_basis.size(), 3u);
  const Eigen::MatrixXd b = incidence(k4).as_double();
  for (const auto& v : rep.null_space_basis) EXPECT_LT((b * v).norm(), 1e-10);
}

TEST(PrincipalAngle, DetectsDifferentSpans) {
  const auto a = acceptance::as_vectors({{1, 0, 0}});
  const auto b = acceptance::as_vectors({{std::cos(1e-6), std::sin(1e-6), 0}});
  EXPECT_NEAR(max_principal_angle(a, b), 1e-6, 1e-15);
  EXPECT_NEAR(max_principal_angle(a, acceptance::as_vectors({{0, 0, 1}})), std::numbers::pi / 2, 1e-15);
  EXPECT_EQ(max_principal_angle(a, acceptance::as_vectors({{1, 0, 0}, {0, 1, 0}})), std::numbers::pi / 2);
}

// Every connected graph on up to six nodes: the reported basis is a kernel
// certificate of the right dimension, and wherever the exact construction is
// used it spans the same subspace as the SVD kernel.
TEST(CycleNullSpace, ExhaustiveUpToSixNodes) {
  std::size_t independent = 0;
  for (std::size_t n = 2; n <= 6; ++n) {
    for_each_graph(n, [&](const NetworkGraph& g) {
      if (!g.connected()) return;
      const IncidenceMatrix b = incidence(g);
      ASSERT_EQ(rank_of(b.as_double()), static_cast<Eigen::Index>(n - 1));
      const auto rep = cycle_null_space(g);
      const std::size_t dim = g.n_edges() + 1 - n;
      ASSERT_EQ(rep.null_space_basis.size(), dim) << format_edge_list(g);
      ASSERT_EQ(is_tree(g), rep.classification == CycleClass::Tree);
      for (const auto& v : rep.integer_basis) ASSERT_TRUE((b.entries() * v).isZero(0)) << format_edge_list(g);
      for (const auto& v : rep.null_space_basis) ASSERT_LT((b.as_double() * v).norm(), 1e-10);
      if (rep.classification == CycleClass::IndependentCycles) {
        ++independent;
        ASSERT_EQ(rep.integer_basis.size(), dim);
        // Edge-disjoint supports, each a closed walk of length >= 3.
        Eigen::VectorXi used = Eigen::VectorXi::Zero(static_cast<Eigen::Index>(g.n_edges()));
        for (const auto& v : rep.integer_basis) {
          ASSERT_GE(v.cwiseAbs().sum(), 3);
          used += v.cwiseAbs();
        }
        ASSERT_LE(used.maxCoeff(), 1) << format_edge_list(g);
        ASSERT_LT(max_principal_angle(rep.null_space_basis, attsync::detail::numerical_kernel(b)), 1e-10);
      }
    });
  }
  EXPECT_GT(independent, 1000u);
}
