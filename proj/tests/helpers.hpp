#pragma once

#include <cmath>
#include <random>

#include "physarum/graph.hpp"

namespace physarum::testing {

struct Instance {
  Digraph g;
  SourceVector b;
};

// Single arc s->t with length 2, one unit shipped.
inline Instance t1() { return {Digraph(2, {{0, 1, 2.0}}), SourceVector({1.0, -1.0})}; }

// Nodes s=0, a=1, t=2; arcs s->t (l=3), s->a (l=1), a->t (l=1).
inline Instance t2() {
  return {Digraph(3, {{0, 2, 3.0}, {0, 1, 1.0}, {1, 2, 1.0}}), SourceVector({1.0, 0.0, -1.0})};
}

// Nodes s=0, t=1, w=2; direct arc s->t (l=1) plus detour s->w->t (l=1 each).
inline Instance star() {
  return {Digraph(3, {{0, 1, 1.0}, {0, 2, 1.0}, {2, 1, 1.0}}), SourceVector({1.0, -1.0, 0.0})};
}

// Two parallel unit-length s->t paths of total length 2 each.
inline Instance diamond() {
  return {Digraph(4, {{0, 1, 1.0}, {1, 3, 1.0}, {0, 2, 1.0}, {2, 3, 1.0}}),
          SourceVector({1.0, 0.0, 0.0, -1.0})};
}

// Only arc points the wrong way; infeasible.
inline Instance reversed_arc() { return {Digraph(2, {{1, 0, 1.0}}), SourceVector({1.0, -1.0})}; }

// Undirected single edge as a doubled-arc pair.
inline Instance doubled_pair() {
  return {Digraph(2, {{0, 1, 1.0}, {1, 0, 1.0}}), SourceVector({1.0, -1.0})};
}

// Two supply/demand pairs whose optimal arcs share no nodes; the bridge arc is
// never used, so the optimal set is disconnected.
inline Instance two_pairs() {
  return {Digraph(4, {{0, 1, 1.0}, {2, 3, 1.0}, {1, 2, 10.0}}),
          SourceVector({1.0, -1.0, 1.0, -1.0})};
}

inline int rand_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

// Arbitrary digraph with balanced integer sources; may be infeasible or even
// disconnected, for exercising the combinatorial checks.
inline Instance random_any_instance(std::mt19937_64& rng, int max_nodes = 6) {
  int n = rand_int(rng, 2, max_nodes);
  int mmax = std::min(n * (n - 1), 10);
  int m = rand_int(rng, 1, mmax);
  std::vector<Arc> arcs;
  std::vector<std::vector<char>> present(static_cast<size_t>(n),
                                         std::vector<char>(static_cast<size_t>(n), 0));
  int guard = 0;
  while (static_cast<int>(arcs.size()) < m && guard++ < 1000) {
    int u = rand_int(rng, 0, n - 1), v = rand_int(rng, 0, n - 1);
    if (u == v || present[static_cast<size_t>(u)][static_cast<size_t>(v)]) continue;
    present[static_cast<size_t>(u)][static_cast<size_t>(v)] = 1;
    arcs.push_back(Arc{u, v, static_cast<double>(rand_int(rng, 1, 5))});
  }
  NodeVector b(static_cast<size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    int i = rand_int(rng, 0, n - 1), j = rand_int(rng, 0, n - 1);
    if (i == j) continue;
    b[static_cast<size_t>(i)] += 1.0;
    b[static_cast<size_t>(j)] -= 1.0;
  }
  return {Digraph(n, std::move(arcs)), SourceVector(std::move(b))};
}

// Feasibility by definition: every cut with positive requirement must have a
// leaving arc.
inline bool feasible_by_cuts(const Digraph& g, const SourceVector& b) {
  const int n = g.node_count();
  for (uint64_t mask = 1; mask + 1 < (uint64_t{1} << n); ++mask) {
    double bs = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (uint64_t{1} << i)) bs += b[i];
    if (bs <= 1e-12) continue;
    bool leaving = false;
    for (const Arc& e : g.arcs()) {
      bool tail_in = mask & (uint64_t{1} << e.tail);
      bool head_in = mask & (uint64_t{1} << e.head);
      if (tail_in && !head_in) {
        leaving = true;
        break;
      }
    }
    if (!leaving) return false;
  }
  return true;
}

// Least-squares slope of log(values) against times.
inline double fit_log_slope(const std::vector<double>& times, const std::vector<double>& values) {
  double n = static_cast<double>(times.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i = 0; i < times.size(); ++i) {
    double y = std::log(values[i]);
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

}  // namespace physarum::testing
