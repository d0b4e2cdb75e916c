#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "physarum/io.hpp"
#include "physarum/oracle.hpp"

using namespace physarum;
using namespace physarum::testing;

namespace {

double bfs_cost(const Digraph& g, const BasicSolution& s) {
  double c = 0.0;
  for (ArcId a = 0; a < g.arc_count(); ++a) c += g.arc(a).length * s.flow[static_cast<size_t>(a)];
  return c;
}

// Residual graph of the witness must admit no negative-cost directed cycle.
bool has_negative_residual_cycle(const Digraph& g, const ArcVector& flow) {
  const int n = g.node_count();
  std::vector<double> dist(static_cast<size_t>(n), 0.0);
  for (int round = 0; round <= n; ++round) {
    bool changed = false;
    for (ArcId a = 0; a < g.arc_count(); ++a) {
      const Arc& e = g.arc(a);
      if (dist[static_cast<size_t>(e.tail)] + e.length < dist[static_cast<size_t>(e.head)] - 1e-9) {
        dist[static_cast<size_t>(e.head)] = dist[static_cast<size_t>(e.tail)] + e.length;
        changed = true;
      }
      if (flow[static_cast<size_t>(a)] > 1e-9 &&
          dist[static_cast<size_t>(e.head)] - e.length < dist[static_cast<size_t>(e.tail)] - 1e-9) {
        dist[static_cast<size_t>(e.tail)] = dist[static_cast<size_t>(e.head)] - e.length;
        changed = true;
      }
    }
    if (!changed) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("solve_exact on the canonical instances") {
  {
    auto [g, b] = t1();
    OptimalSet opt = solve_exact(g, b);
    CHECK(opt.z_star == 2.0);
    CHECK(opt.witness_flow == ArcVector{1.0});
    CHECK(opt.arcs_in_h_hat == std::vector<ArcId>{0});
  }
  {
    auto [g, b] = t2();
    OptimalSet opt = solve_exact(g, b);
    CHECK(opt.z_star == 2.0);
    CHECK(opt.witness_flow == ArcVector{0.0, 1.0, 1.0});
    CHECK(opt.arcs_in_h_hat == std::vector<ArcId>{1, 2});
    // The direct arc has strictly positive reduced cost.
    double rc = g.arc(0).length - opt.pi[0] + opt.pi[2];
    CHECK(rc == doctest::Approx(1.0));
  }
  {
    auto [g, b] = diamond();
    OptimalSet opt = solve_exact(g, b);
    CHECK(opt.z_star == 2.0);
    CHECK(opt.arcs_in_h_hat == std::vector<ArcId>{0, 1, 2, 3});
  }
}

TEST_CASE("solve_exact rejects infeasible problems") {
  auto [g, b] = reversed_arc();
  CHECK_THROWS_AS(solve_exact(g, b), std::runtime_error);
}

TEST_CASE("enumerate_bfs on the canonical instances") {
  {
    auto [g, b] = t1();
    auto bfs = enumerate_bfs(g, b);
    REQUIRE(bfs.size() == 1);
    CHECK(bfs[0].flow == ArcVector{1.0});
  }
  {
    auto [g, b] = t2();
    auto bfs = enumerate_bfs(g, b);
    REQUIRE(bfs.size() == 2);
    std::vector<double> costs;
    for (const auto& s : bfs) costs.push_back(bfs_cost(g, s));
    std::sort(costs.begin(), costs.end());
    CHECK(costs == std::vector<double>{2.0, 3.0});
  }
  {
    auto [g, b] = reversed_arc();
    CHECK(enumerate_bfs(g, b).empty());
  }
  {
    std::vector<Arc> arcs;
    for (int i = 0; i < 17; ++i) arcs.push_back(Arc{i, i + 1, 1.0});
    Digraph chain(18, arcs);
    NodeVector bb(18, 0.0);
    bb[0] = 1.0;
    bb[17] = -1.0;
    CHECK_THROWS_AS(enumerate_bfs(chain, SourceVector(bb)), std::invalid_argument);
  }
}

TEST_CASE("bfs enumeration is the brute-force oracle for solve_exact") {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    InstanceFile inst = random_instance({seed, 5, 8, 10, 3});
    OptimalSet opt = solve_exact(inst.graph, inst.sources);
    auto bfs = enumerate_bfs(inst.graph, inst.sources);
    REQUIRE(!bfs.empty());
    double best = bfs_cost(inst.graph, bfs[0]);
    for (const auto& s : bfs) best = std::min(best, bfs_cost(inst.graph, s));
    CHECK(opt.z_star == best);  // exact on integer data

    // Certificate: nonnegative reduced costs, tight exactly on H_hat.
    for (ArcId a = 0; a < inst.graph.arc_count(); ++a) {
      const Arc& e = inst.graph.arc(a);
      double rc = e.length - opt.pi[static_cast<size_t>(e.tail)] + opt.pi[static_cast<size_t>(e.head)];
      CHECK(rc >= -1e-9);
      if (std::binary_search(opt.arcs_in_h_hat.begin(), opt.arcs_in_h_hat.end(), a))
        CHECK(std::abs(rc) <= 1e-9);
    }

    // H_hat equals the union of supports of optimal basic solutions.
    std::vector<char> in_some(static_cast<size_t>(inst.graph.arc_count()), 0);
    for (const auto& s : bfs) {
      if (bfs_cost(inst.graph, s) > best + 1e-9) continue;
      for (ArcId a = 0; a < inst.graph.arc_count(); ++a)
        if (s.flow[static_cast<size_t>(a)] > 1e-9) in_some[static_cast<size_t>(a)] = 1;
    }
    std::vector<ArcId> expected;
    for (ArcId a = 0; a < inst.graph.arc_count(); ++a)
      if (in_some[static_cast<size_t>(a)]) expected.push_back(a);
    CHECK(opt.arcs_in_h_hat == expected);

    CHECK_FALSE(has_negative_residual_cycle(inst.graph, opt.witness_flow));

    // Witness is a flow of the reported cost with support inside H_hat.
    CHECK(is_flow(inst.graph, opt.witness_flow, inst.sources, 1e-9));
    for (ArcId a = 0; a < inst.graph.arc_count(); ++a)
      if (opt.witness_flow[static_cast<size_t>(a)] > 1e-9)
        CHECK(std::binary_search(opt.arcs_in_h_hat.begin(), opt.arcs_in_h_hat.end(), a));
  }
}

TEST_CASE("basic solutions satisfy the cut bounds on their support") {
  for (uint64_t seed = 50; seed <= 70; ++seed) {
    InstanceFile inst = random_instance({seed, 5, 8, 10, 3});
    CutBounds cb = cut_bounds(inst.graph, inst.sources);
    for (const auto& s : enumerate_bfs(inst.graph, inst.sources)) {
      for (double f : s.flow) {
        if (f <= 0.0) continue;
        CHECK(f >= cb.b_star_min - 1e-9);
        CHECK(f <= cb.b_star_max + 1e-9);
      }
    }
  }
}

TEST_CASE("dual potential on the optimal set") {
  {
    auto [g, b] = t2();
    OptimalSet opt = solve_exact(g, b);
    OptimalDual dual = dual_on_optimal_set(g, opt);
    CHECK(dual.connected);
    CHECK(dual.p_hat[0] == doctest::Approx(2.0));
    CHECK(dual.p_hat[1] == doctest::Approx(1.0));
    CHECK(dual.p_hat[2] == doctest::Approx(0.0));
  }
  {
    auto [g, b] = t1();
    OptimalSet opt = solve_exact(g, b);
    OptimalDual dual = dual_on_optimal_set(g, opt);
    CHECK(dual.connected);
    CHECK(dual.p_hat[0] == doctest::Approx(2.0));
    CHECK(dual.p_hat[1] == doctest::Approx(0.0));
  }
  {
    auto [g, b] = two_pairs();
    OptimalSet opt = solve_exact(g, b);
    CHECK(opt.arcs_in_h_hat == std::vector<ArcId>{0, 1});
    OptimalDual dual = dual_on_optimal_set(g, opt);
    CHECK_FALSE(dual.connected);
    CHECK(dual.p_hat[0] == doctest::Approx(1.0));
    CHECK(dual.p_hat[1] == doctest::Approx(0.0));
    CHECK(dual.p_hat[2] == doctest::Approx(1.0));
    CHECK(dual.p_hat[3] == doctest::Approx(0.0));
  }
  {
    auto [g, b] = t1();
    OptimalSet empty;
    empty.witness_flow = {0.0};
    empty.pi = {0.0, 0.0};
    CHECK_THROWS_AS(dual_on_optimal_set(g, empty), std::invalid_argument);
  }
}

TEST_CASE("dual field is one on the optimal set") {
  for (uint64_t seed = 100; seed <= 120; ++seed) {
    InstanceFile inst = random_instance({seed, 6, 10, 10, 3});
    OptimalSet opt = solve_exact(inst.graph, inst.sources);
    OptimalDual dual = dual_on_optimal_set(inst.graph, opt);
    for (ArcId a : opt.arcs_in_h_hat) {
      const Arc& e = inst.graph.arc(a);
      double psi = (dual.p_hat[static_cast<size_t>(e.tail)] - dual.p_hat[static_cast<size_t>(e.head)]) /
                   e.length;
      CHECK(psi == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}
