#include "physarum/dual_harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace physarum {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlopeEps = 1e-12;

struct Subgraph {
  std::vector<char> in_h;  // arc mask
  std::vector<char> in_v;  // node mask
  std::vector<NodeId> nodes;
};

Subgraph make_subgraph(const Digraph& g, const std::vector<ArcId>& h) {
  Subgraph s;
  s.in_h.assign(static_cast<size_t>(g.arc_count()), 0);
  s.in_v.assign(static_cast<size_t>(g.node_count()), 0);
  for (ArcId a : h) {
    if (a < 0 || a >= g.arc_count())
      throw std::invalid_argument("dual_harmonic: arc id out of range");
    s.in_h[static_cast<size_t>(a)] = 1;
    s.in_v[static_cast<size_t>(g.arc(a).tail)] = 1;
    s.in_v[static_cast<size_t>(g.arc(a).head)] = 1;
  }
  for (NodeId i = 0; i < g.node_count(); ++i)
    if (s.in_v[static_cast<size_t>(i)]) s.nodes.push_back(i);
  return s;
}

bool underlying_connected(const Digraph& g, const Subgraph& s) {
  if (s.nodes.empty()) return false;
  std::vector<char> seen(static_cast<size_t>(g.node_count()), 0);
  std::vector<NodeId> stack{s.nodes.front()};
  seen[static_cast<size_t>(s.nodes.front())] = 1;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    auto visit = [&](ArcId a, NodeId v) {
      if (s.in_h[static_cast<size_t>(a)] && !seen[static_cast<size_t>(v)]) {
        seen[static_cast<size_t>(v)] = 1;
        stack.push_back(v);
      }
    };
    for (ArcId a : g.out_arcs(u)) visit(a, g.arc(a).head);
    for (ArcId a : g.in_arcs(u)) visit(a, g.arc(a).tail);
  }
  return std::all_of(s.nodes.begin(), s.nodes.end(),
                     [&](NodeId v) { return seen[static_cast<size_t>(v)] != 0; });
}

// Trajectory search for one ordered endpoint pair: a shortest exterior path
// maximizes the slope for fixed endpoints. Arcs may leave a, enter b, and
// otherwise touch only exterior nodes; a direct a->b arc counts unless it
// already belongs to h.
struct PairSearch {
  const Digraph& g;
  const Subgraph& s;
  NodeId a, b;

  bool arc_allowed(ArcId arc) const {
    const Arc& e = g.arc(arc);
    bool tail_ok = e.tail == a || !s.in_v[static_cast<size_t>(e.tail)];
    bool head_ok = e.head == b || !s.in_v[static_cast<size_t>(e.head)];
    if (!tail_ok || !head_ok) return false;
    if (e.tail == a && e.head == b && s.in_h[static_cast<size_t>(arc)]) return false;
    return true;
  }

  // Shortest path lengths from a (forward) or to b (backward).
  NodeVector distances(bool forward) const {
    NodeVector dist(static_cast<size_t>(g.node_count()), kInf);
    NodeId start = forward ? a : b;
    dist[static_cast<size_t>(start)] = 0.0;
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, start);
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[static_cast<size_t>(u)] + 1e-15) continue;
      if (forward && u == b) continue;  // b is a sink, never internal
      if (!forward && u == a) continue;
      const auto& arcs = forward ? g.out_arcs(u) : g.in_arcs(u);
      for (ArcId arc : arcs) {
        if (!arc_allowed(arc)) continue;
        NodeId v = forward ? g.arc(arc).head : g.arc(arc).tail;
        double nd = d + g.arc(arc).length;
        if (nd < dist[static_cast<size_t>(v)] - 1e-15) {
          dist[static_cast<size_t>(v)] = nd;
          pq.emplace(nd, v);
        }
      }
    }
    return dist;
  }

  // Lexicographically smallest arc sequence among shortest a->b paths.
  std::vector<ArcId> lex_shortest(const NodeVector& from_a, const NodeVector& to_b,
                                  double total) const {
    const double tol = 1e-9 * std::max(1.0, total);
    std::vector<ArcId> path;
    NodeId u = a;
    while (u != b) {
      ArcId best = -1;
      NodeId best_next = -1;
      for (ArcId arc : g.out_arcs(u)) {
        if (!arc_allowed(arc)) continue;
        NodeId v = g.arc(arc).head;
        if (from_a[static_cast<size_t>(u)] + g.arc(arc).length + to_b[static_cast<size_t>(v)] <=
            total + tol) {
          if (best < 0 || arc < best) {
            best = arc;
            best_next = v;
          }
        }
      }
      if (best < 0) throw std::runtime_error("dual_harmonic: shortest-path reconstruction failed");
      path.push_back(best);
      u = best_next;
    }
    return path;
  }
};

}  // namespace

std::optional<Trajectory> max_slope_trajectory(const Digraph& g, const std::vector<ArcId>& h,
                                               const NodeVector& p) {
  if (static_cast<int>(p.size()) != g.node_count())
    throw std::invalid_argument("max_slope_trajectory: potential size mismatch");
  Subgraph s = make_subgraph(g, h);

  std::optional<Trajectory> best;
  for (NodeId a : s.nodes) {
    for (NodeId b : s.nodes) {
      if (a == b) continue;
      const double drop = p[static_cast<size_t>(a)] - p[static_cast<size_t>(b)];
      if (drop <= kSlopeEps) continue;
      PairSearch search{g, s, a, b};
      NodeVector from_a = search.distances(true);
      const double len = from_a[static_cast<size_t>(b)];
      if (len == kInf) continue;
      const double slope = drop / len;
      if (slope <= kSlopeEps) continue;
      const double tie_tol = 1e-9 * std::max(1.0, std::abs(slope));
      if (best && slope < best->slope - tie_tol) continue;
      NodeVector to_b = search.distances(false);
      std::vector<ArcId> path = search.lex_shortest(from_a, to_b, len);
      if (!best || slope > best->slope + tie_tol ||
          (std::abs(slope - best->slope) <= tie_tol && path < best->arcs)) {
        best = Trajectory{std::move(path), slope};
      }
    }
  }
  return best;
}

HarmonicExtension build_extension(const Digraph& g, const std::vector<ArcId>& h_hat,
                                  const NodeVector& p_hat) {
  if (static_cast<int>(p_hat.size()) != g.node_count())
    throw std::invalid_argument("build_extension: potential size mismatch");
  if (h_hat.empty()) throw std::invalid_argument("build_extension: empty optimal set");
  {
    Subgraph s = make_subgraph(g, h_hat);
    if (!underlying_connected(g, s))
      throw std::invalid_argument("build_extension: optimal set is not connected");
  }

  std::vector<ArcId> h = h_hat;
  NodeVector p = p_hat;

  while (true) {
    std::optional<Trajectory> traj = max_slope_trajectory(g, h, p);
    if (!traj) break;
    // Constant slope along the accepted path fixes p at its interior nodes.
    NodeId u = g.arc(traj->arcs.front()).tail;
    double pu = p[static_cast<size_t>(u)];
    for (size_t k = 0; k < traj->arcs.size(); ++k) {
      const Arc& e = g.arc(traj->arcs[k]);
      pu -= traj->slope * e.length;
      if (k + 1 < traj->arcs.size()) p[static_cast<size_t>(e.head)] = pu;
      h.push_back(traj->arcs[k]);
    }
  }

  std::sort(h.begin(), h.end());
  HarmonicExtension ext;
  ext.h_star = std::move(h);
  Subgraph s = make_subgraph(g, ext.h_star);
  ext.in_v_star = s.in_v;
  ext.p_star.assign(static_cast<size_t>(g.node_count()), 0.0);
  for (NodeId v : s.nodes) ext.p_star[static_cast<size_t>(v)] = p[static_cast<size_t>(v)];
  for (NodeId v = 0; v < g.node_count(); ++v)
    if (!s.in_v[static_cast<size_t>(v)]) ext.uncovered_nodes.push_back(v);

  // Group the field values on H* into level sets.
  std::vector<std::pair<double, ArcId>> by_slope;
  for (ArcId a : ext.h_star) {
    const Arc& e = g.arc(a);
    double psi = (ext.p_star[static_cast<size_t>(e.tail)] - ext.p_star[static_cast<size_t>(e.head)]) /
                 e.length;
    by_slope.emplace_back(psi, a);
  }
  std::sort(by_slope.begin(), by_slope.end(),
            [](const auto& x, const auto& y) {
              return x.first != y.first ? x.first > y.first : x.second < y.second;
            });
  for (const auto& [psi, a] : by_slope) {
    if (ext.level_sets.empty() ||
        ext.level_sets.back().first - psi > 1e-9 * std::max(1.0, std::abs(psi))) {
      ext.level_sets.emplace_back(psi, std::vector<ArcId>{});
      ext.slopes.push_back(psi);
    }
    ext.level_sets.back().second.push_back(a);
  }
  return ext;
}

HarmonicCheck check_inf_harmonic(const Digraph& g, const std::vector<ArcId>& h_star,
                                 const NodeVector& p, const std::vector<NodeId>& excluded,
                                 double tol) {
  if (static_cast<int>(p.size()) != g.node_count())
    throw std::invalid_argument("check_inf_harmonic: potential size mismatch");
  Subgraph s = make_subgraph(g, h_star);
  std::vector<char> skip(static_cast<size_t>(g.node_count()), 0);
  for (NodeId v : excluded) skip[static_cast<size_t>(v)] = 1;

  HarmonicCheck result;
  for (NodeId v : s.nodes) {
    if (skip[static_cast<size_t>(v)]) continue;
    double max_in = -kInf, max_out = -kInf;
    for (ArcId a : g.in_arcs(v))
      if (s.in_h[static_cast<size_t>(a)]) {
        const Arc& e = g.arc(a);
        max_in = std::max(max_in,
                          (p[static_cast<size_t>(e.tail)] - p[static_cast<size_t>(e.head)]) / e.length);
      }
    for (ArcId a : g.out_arcs(v))
      if (s.in_h[static_cast<size_t>(a)]) {
        const Arc& e = g.arc(a);
        max_out = std::max(max_out,
                           (p[static_cast<size_t>(e.tail)] - p[static_cast<size_t>(e.head)]) / e.length);
      }
    if (max_in == -kInf || max_out == -kInf) {
      result.skipped.push_back(v);
      continue;
    }
    if (std::abs(max_in - max_out) > tol || max_out < -tol) result.violators.push_back(v);
  }
  return result;
}

double dual_convergence_gap(const RunResult& run_result, const HarmonicExtension& extension) {
  const NodeVector& p_run = run_result.solution.potential;
  if (p_run.size() != extension.in_v_star.size() || p_run.size() != extension.p_star.size())
    throw std::invalid_argument("dual_convergence_gap: vertex set mismatch");

  double min_run = kInf, min_star = kInf;
  for (size_t v = 0; v < p_run.size(); ++v) {
    if (!extension.in_v_star[v]) continue;
    min_run = std::min(min_run, p_run[v]);
    min_star = std::min(min_star, extension.p_star[v]);
  }
  if (min_run == kInf) throw std::invalid_argument("dual_convergence_gap: empty extension");

  double gap = 0.0;
  for (size_t v = 0; v < p_run.size(); ++v) {
    if (!extension.in_v_star[v]) continue;
    gap = std::max(gap, std::abs((p_run[v] - min_run) - (extension.p_star[v] - min_star)));
  }
  return gap;
}

}  // namespace physarum
