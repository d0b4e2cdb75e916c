#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "physarum/dual_harmonic.hpp"
#include "physarum/io.hpp"
#include "physarum/oracle.hpp"

using namespace physarum;
using namespace physarum::testing;

namespace {

HarmonicExtension extension_of(const Digraph& g, const SourceVector& b) {
  OptimalSet opt = solve_exact(g, b);
  OptimalDual dual = dual_on_optimal_set(g, opt);
  REQUIRE(dual.connected);
  return build_extension(g, opt.arcs_in_h_hat, dual.p_hat);
}

// Every arc of a level set must lie on a directed path inside the level set
// whose endpoints are sources/sinks or nodes of higher level sets.
bool level_set_paths_ok(const Digraph& g, const HarmonicExtension& ext, const SourceVector& b) {
  std::vector<char> anchor(static_cast<size_t>(g.node_count()), 0);
  for (NodeId v : b.support()) anchor[static_cast<size_t>(v)] = 1;
  for (size_t level = 0; level < ext.level_sets.size(); ++level) {
    const auto& arcs = ext.level_sets[level].second;
    std::vector<char> in_level(static_cast<size_t>(g.arc_count()), 0);
    for (ArcId a : arcs) in_level[static_cast<size_t>(a)] = 1;
    auto reaches_anchor = [&](NodeId start, bool forward) {
      std::vector<char> seen(static_cast<size_t>(g.node_count()), 0);
      std::vector<NodeId> stack{start};
      seen[static_cast<size_t>(start)] = 1;
      while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        if (anchor[static_cast<size_t>(u)]) return true;
        const auto& inc = forward ? g.out_arcs(u) : g.in_arcs(u);
        for (ArcId a : inc) {
          if (!in_level[static_cast<size_t>(a)]) continue;
          NodeId v = forward ? g.arc(a).head : g.arc(a).tail;
          if (!seen[static_cast<size_t>(v)]) {
            seen[static_cast<size_t>(v)] = 1;
            stack.push_back(v);
          }
        }
      }
      return false;
    };
    for (ArcId a : arcs) {
      if (!reaches_anchor(g.arc(a).head, true)) return false;
      if (!reaches_anchor(g.arc(a).tail, false)) return false;
    }
    // Nodes of this and higher levels anchor the next one.
    for (ArcId a : arcs) {
      anchor[static_cast<size_t>(g.arc(a).tail)] = 1;
      anchor[static_cast<size_t>(g.arc(a).head)] = 1;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("max_slope_trajectory on t2 finds the direct arc") {
  auto [g, b] = t2();
  NodeVector p_hat{2.0, 1.0, 0.0};
  auto traj = max_slope_trajectory(g, {1, 2}, p_hat);
  REQUIRE(traj.has_value());
  CHECK(traj->arcs == std::vector<ArcId>{0});
  CHECK(traj->slope == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("max_slope_trajectory returns none without exterior routes") {
  auto [g, b] = t1();
  CHECK_FALSE(max_slope_trajectory(g, {0}, {2.0, 0.0}).has_value());
}

TEST_CASE("max_slope_trajectory routes through the exterior node of the star") {
  auto [g, b] = star();
  auto traj = max_slope_trajectory(g, {0}, {1.0, 0.0, 0.0});
  REQUIRE(traj.has_value());
  CHECK(traj->arcs == std::vector<ArcId>{1, 2});
  CHECK(traj->slope == doctest::Approx(0.5));
}

TEST_CASE("build_extension on t2") {
  auto [g, b] = t2();
  HarmonicExtension ext = extension_of(g, b);
  CHECK(ext.h_star == std::vector<ArcId>{0, 1, 2});
  CHECK(ext.p_star[0] == doctest::Approx(2.0));
  CHECK(ext.p_star[1] == doctest::Approx(1.0));
  CHECK(ext.p_star[2] == doctest::Approx(0.0));
  REQUIRE(ext.slopes.size() == 2);
  CHECK(ext.slopes[0] == doctest::Approx(1.0));
  CHECK(ext.slopes[1] == doctest::Approx(2.0 / 3.0));
  REQUIRE(ext.level_sets.size() == 2);
  CHECK(ext.level_sets[0].second == std::vector<ArcId>{1, 2});
  CHECK(ext.level_sets[1].second == std::vector<ArcId>{0});
  CHECK(ext.uncovered_nodes.empty());
}

TEST_CASE("build_extension on the star interpolates the exterior node") {
  auto [g, b] = star();
  HarmonicExtension ext = extension_of(g, b);
  CHECK(ext.h_star == std::vector<ArcId>{0, 1, 2});
  CHECK(ext.p_star[0] == doctest::Approx(1.0));
  CHECK(ext.p_star[1] == doctest::Approx(0.0));
  CHECK(ext.p_star[2] == doctest::Approx(0.5));
  REQUIRE(ext.slopes.size() == 2);
  CHECK(ext.slopes[1] == doctest::Approx(0.5));
}

TEST_CASE("build_extension is trivial when the optimal set spans everything") {
  auto [g, b] = diamond();
  HarmonicExtension ext = extension_of(g, b);
  CHECK(ext.h_star == std::vector<ArcId>{0, 1, 2, 3});
  CHECK(ext.slopes == std::vector<double>{1.0});
  CHECK(ext.p_star[0] == doctest::Approx(2.0));
  CHECK(ext.p_star[3] == doctest::Approx(0.0));
}

TEST_CASE("build_extension rejects a disconnected optimal set") {
  auto [g, b] = two_pairs();
  OptimalSet opt = solve_exact(g, b);
  OptimalDual dual = dual_on_optimal_set(g, opt);
  CHECK_FALSE(dual.connected);
  CHECK_THROWS_AS(build_extension(g, opt.arcs_in_h_hat, dual.p_hat), std::invalid_argument);
}

TEST_CASE("check_inf_harmonic") {
  auto [g, b] = t2();
  HarmonicExtension ext = extension_of(g, b);
  HarmonicCheck hc = check_inf_harmonic(g, ext.h_star, ext.p_star, {0, 2});
  CHECK(hc.violators.empty());

  // Bidirected path with constant potential: all fields zero, no violation.
  Digraph bi(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
  HarmonicCheck flat = check_inf_harmonic(bi, {0, 1, 2, 3}, {5.0, 5.0, 5.0}, {0, 2});
  CHECK(flat.violators.empty());
  CHECK(flat.skipped.empty());

  // p = (2, 0, 1) on s->a->t: in-max 2, out-max -1 at the middle node.
  Digraph path(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  HarmonicCheck bad = check_inf_harmonic(path, {0, 1}, {2.0, 0.0, 1.0}, {0, 2});
  CHECK(bad.violators == std::vector<NodeId>{1});

  // Endpoints lack in- or out-arcs and are reported as skipped when not excluded.
  HarmonicCheck ends = check_inf_harmonic(path, {0, 1}, {2.0, 1.0, 0.0}, {});
  CHECK(ends.skipped == std::vector<NodeId>{0, 2});
  CHECK(ends.violators.empty());
}

TEST_CASE("dual convergence gap on converged runs") {
  {
    auto [g, b] = t2();
    HarmonicExtension ext = extension_of(g, b);
    RunResult res = run(g, b, {1.0, 1.0, 1.0}, SolverConfig{});
    REQUIRE(res.status == RunStatus::converged);
    CHECK(dual_convergence_gap(res, ext) <= 1e-4);
  }
  {
    // Fixpoint start: the potential is already the harmonic limit.
    auto [g, b] = t1();
    HarmonicExtension ext = extension_of(g, b);
    RunResult res = run(g, b, {1.0}, SolverConfig{});
    CHECK(dual_convergence_gap(res, ext) <= 1e-10);
  }
  {
    auto [g, b] = star();
    HarmonicExtension ext = extension_of(g, b);
    RunResult res = run(g, b, {1.0, 1.0, 1.0}, SolverConfig{});
    REQUIRE(res.status == RunStatus::converged);
    CHECK(dual_convergence_gap(res, ext) <= 1e-4);
  }
}

TEST_CASE("extension properties on random instances with connected optimal set") {
  int built = 0;
  for (uint64_t seed = 1; seed <= 60 && built < 25; ++seed) {
    InstanceFile inst = random_instance({seed, 6, 9, 10, 3});
    OptimalSet opt = solve_exact(inst.graph, inst.sources);
    OptimalDual dual = dual_on_optimal_set(inst.graph, opt);
    if (!dual.connected) continue;
    ++built;
    HarmonicExtension ext = build_extension(inst.graph, opt.arcs_in_h_hat, dual.p_hat);

    // Slopes are strictly decreasing from 1 and stay positive.
    REQUIRE(!ext.slopes.empty());
    CHECK(ext.slopes[0] == doctest::Approx(1.0));
    for (size_t k = 1; k < ext.slopes.size(); ++k) {
      CHECK(ext.slopes[k] < ext.slopes[k - 1]);
      CHECK(ext.slopes[k] > 0.0);
      CHECK(ext.slopes[k] < 1.0);
    }

    // Dual feasibility of p* among nodes of V(H*).
    for (ArcId a = 0; a < inst.graph.arc_count(); ++a) {
      const Arc& e = inst.graph.arc(a);
      if (!ext.in_v_star[static_cast<size_t>(e.tail)] || !ext.in_v_star[static_cast<size_t>(e.head)])
        continue;
      double psi = (ext.p_star[static_cast<size_t>(e.tail)] - ext.p_star[static_cast<size_t>(e.head)]) /
                   e.length;
      CHECK(psi <= 1.0 + 1e-9);
    }

    CHECK(std::abs(*std::min_element(ext.p_star.begin(), ext.p_star.end())) <= 1e-12);

    HarmonicCheck hc =
        check_inf_harmonic(inst.graph, ext.h_star, ext.p_star, inst.sources.support());
    CHECK(hc.violators.empty());

    CHECK(level_set_paths_ok(inst.graph, ext, inst.sources));
  }
  CHECK(built >= 10);
}

TEST_CASE("time reversal flips the extension potential") {
  for (auto make : {t2, star, diamond}) {
    auto [g, b] = make();
    std::vector<Arc> reversed;
    for (const Arc& e : g.arcs()) reversed.push_back(Arc{e.head, e.tail, e.length});
    NodeVector neg;
    for (double v : b.values()) neg.push_back(-v);
    Digraph gr(g.node_count(), reversed);
    SourceVector br(neg);

    HarmonicExtension fwd = extension_of(g, b);
    HarmonicExtension rev = extension_of(gr, br);
    CHECK(fwd.h_star == rev.h_star);
    double top = *std::max_element(fwd.p_star.begin(), fwd.p_star.end());
    for (NodeId v = 0; v < g.node_count(); ++v) {
      if (!fwd.in_v_star[static_cast<size_t>(v)]) continue;
      CHECK(rev.p_star[static_cast<size_t>(v)] ==
            doctest::Approx(top - fwd.p_star[static_cast<size_t>(v)]).epsilon(1e-9));
    }
  }
}

TEST_CASE("dual_convergence_gap validates sizes") {
  auto [g, b] = t2();
  HarmonicExtension ext = extension_of(g, b);
  RunResult res = run(g, b, {1.0, 1.0, 1.0}, SolverConfig{});
  ext.in_v_star.pop_back();
  CHECK_THROWS_AS(dual_convergence_gap(res, ext), std::invalid_argument);
}
