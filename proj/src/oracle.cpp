#include "physarum/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace physarum {

namespace {

constexpr double kEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Residual network for successive shortest paths. Original arcs are
// uncapacitated; a super source/sink carries the supplies and demands.
struct Residual {
  struct Edge {
    int to;
    double cost;
    double cap;  // kInf for forward copies of original arcs
    int pair;    // index of the reverse edge
    ArcId orig;  // original arc id, -1 for super edges
    int dir;     // +1 forward, -1 backward
  };

  int n;
  std::vector<std::vector<int>> adj;
  std::vector<Edge> edges;

  explicit Residual(int nodes) : n(nodes), adj(static_cast<size_t>(nodes)) {}

  void add(int u, int v, double cost, double cap, ArcId orig) {
    int a = static_cast<int>(edges.size());
    edges.push_back({v, cost, cap, a + 1, orig, +1});
    edges.push_back({u, -cost, 0.0, a, orig, -1});
    adj[static_cast<size_t>(u)].push_back(a);
    adj[static_cast<size_t>(v)].push_back(a + 1);
  }
};

}  // namespace

OptimalSet solve_exact(const Digraph& g, const SourceVector& b) {
  if (b.size() != g.node_count())
    throw std::invalid_argument("solve_exact: source vector size mismatch");
  if (!is_feasible(g, b)) throw std::runtime_error("solve_exact: infeasible problem");

  const int n = g.node_count();
  const int src = n, snk = n + 1, nn = n + 2;
  Residual r(nn);
  for (ArcId a = 0; a < g.arc_count(); ++a)
    r.add(g.arc(a).tail, g.arc(a).head, g.arc(a).length, kInf, a);
  double total_supply = 0.0;
  for (NodeId i = 0; i < n; ++i) {
    if (b[i] > 0.0) {
      r.add(src, i, 0.0, b[i], -1);
      total_supply += b[i];
    } else if (b[i] < 0.0) {
      r.add(i, snk, 0.0, -b[i], -1);
    }
  }

  // First phase: Bellman-Ford from the super source over the zero-flow
  // residual network seeds the potentials; later phases run Dijkstra on
  // reduced costs.
  std::vector<double> pot(static_cast<size_t>(nn), 0.0);
  {
    std::vector<double> dist(static_cast<size_t>(nn), kInf);
    dist[static_cast<size_t>(src)] = 0.0;
    for (int round = 0; round < nn; ++round) {
      bool changed = false;
      for (int u = 0; u < nn; ++u) {
        if (dist[static_cast<size_t>(u)] == kInf) continue;
        for (int ei : r.adj[static_cast<size_t>(u)]) {
          const auto& e = r.edges[static_cast<size_t>(ei)];
          if (e.cap <= kEps) continue;
          double nd = dist[static_cast<size_t>(u)] + e.cost;
          if (nd < dist[static_cast<size_t>(e.to)] - 1e-15) {
            dist[static_cast<size_t>(e.to)] = nd;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    double dmax = 0.0;
    for (double d : dist)
      if (d != kInf) dmax = std::max(dmax, d);
    for (int u = 0; u < nn; ++u)
      pot[static_cast<size_t>(u)] = -std::min(dist[static_cast<size_t>(u)], dmax);
  }

  double shipped = 0.0;
  std::vector<double> dist(static_cast<size_t>(nn));
  std::vector<int> prev_edge(static_cast<size_t>(nn));
  const int max_phases = 64 * (nn + static_cast<int>(total_supply) + 16);
  for (int phase = 0;; ++phase) {
    if (phase > max_phases)
      throw std::runtime_error("solve_exact: augmentation did not terminate");
    // Dijkstra on reduced costs cost - pot[u] + pot[v] >= 0.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev_edge.begin(), prev_edge.end(), -1);
    dist[static_cast<size_t>(src)] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, src);
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[static_cast<size_t>(u)] + 1e-15) continue;
      for (int ei : r.adj[static_cast<size_t>(u)]) {
        const auto& e = r.edges[static_cast<size_t>(ei)];
        if (e.cap <= kEps) continue;
        double rc = e.cost - pot[static_cast<size_t>(u)] + pot[static_cast<size_t>(e.to)];
        double nd = d + std::max(rc, 0.0);
        if (nd < dist[static_cast<size_t>(e.to)] - 1e-15) {
          dist[static_cast<size_t>(e.to)] = nd;
          prev_edge[static_cast<size_t>(e.to)] = ei;
          pq.emplace(nd, e.to);
        }
      }
    }
    if (dist[static_cast<size_t>(snk)] == kInf) break;

    const double dt = dist[static_cast<size_t>(snk)];
    for (int u = 0; u < nn; ++u)
      pot[static_cast<size_t>(u)] -= std::min(dist[static_cast<size_t>(u)], dt);

    double delta = kInf;
    for (int v = snk; v != src;) {
      const auto& e = r.edges[static_cast<size_t>(prev_edge[static_cast<size_t>(v)])];
      delta = std::min(delta, e.cap);
      v = r.edges[static_cast<size_t>(e.pair)].to;
    }
    for (int v = snk; v != src;) {
      auto& e = r.edges[static_cast<size_t>(prev_edge[static_cast<size_t>(v)])];
      e.cap -= delta;
      r.edges[static_cast<size_t>(e.pair)].cap += delta;
      v = r.edges[static_cast<size_t>(e.pair)].to;
    }
    shipped += delta;
    if (shipped >= total_supply - 1e-9 * std::max(1.0, total_supply)) break;
  }
  if (shipped < total_supply - 1e-9 * std::max(1.0, total_supply))
    throw std::runtime_error("solve_exact: could not ship all supply");

  OptimalSet out;
  out.witness_flow.assign(static_cast<size_t>(g.arc_count()), 0.0);
  for (const auto& e : r.edges)
    if (e.orig >= 0 && e.dir < 0 && e.cap > 0.0) out.witness_flow[static_cast<size_t>(e.orig)] = e.cap;
  out.z_star = 0.0;
  for (ArcId a = 0; a < g.arc_count(); ++a)
    out.z_star += g.arc(a).length * out.witness_flow[static_cast<size_t>(a)];
  out.pi.assign(pot.begin(), pot.begin() + n);
  out.arcs_in_h_hat = compute_optimal_set(g, b, out);
  return out;
}

namespace {

// Iterative Tarjan SCC over an adjacency list.
std::vector<int> strongly_connected_components(int n, const std::vector<std::vector<int>>& adj) {
  std::vector<int> index(static_cast<size_t>(n), -1), low(static_cast<size_t>(n), 0),
      comp(static_cast<size_t>(n), -1);
  std::vector<char> on_stack(static_cast<size_t>(n), 0);
  std::vector<int> stk;
  int next_index = 0, next_comp = 0;

  struct Frame {
    int v;
    size_t child;
  };
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<size_t>(root)] != -1) continue;
    std::vector<Frame> call;
    call.push_back({root, 0});
    index[static_cast<size_t>(root)] = low[static_cast<size_t>(root)] = next_index++;
    stk.push_back(root);
    on_stack[static_cast<size_t>(root)] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& out = adj[static_cast<size_t>(f.v)];
      if (f.child < out.size()) {
        int w = out[f.child++];
        if (index[static_cast<size_t>(w)] == -1) {
          index[static_cast<size_t>(w)] = low[static_cast<size_t>(w)] = next_index++;
          stk.push_back(w);
          on_stack[static_cast<size_t>(w)] = 1;
          call.push_back({w, 0});
        } else if (on_stack[static_cast<size_t>(w)]) {
          low[static_cast<size_t>(f.v)] = std::min(low[static_cast<size_t>(f.v)], index[static_cast<size_t>(w)]);
        }
      } else {
        if (low[static_cast<size_t>(f.v)] == index[static_cast<size_t>(f.v)]) {
          while (true) {
            int w = stk.back();
            stk.pop_back();
            on_stack[static_cast<size_t>(w)] = 0;
            comp[static_cast<size_t>(w)] = next_comp;
            if (w == f.v) break;
          }
          ++next_comp;
        }
        int v = f.v;
        call.pop_back();
        if (!call.empty())
          low[static_cast<size_t>(call.back().v)] =
              std::min(low[static_cast<size_t>(call.back().v)], low[static_cast<size_t>(v)]);
      }
    }
  }
  return comp;
}

}  // namespace

std::vector<ArcId> compute_optimal_set(const Digraph& g, const SourceVector& b,
                                       const OptimalSet& witness) {
  (void)b;
  const int n = g.node_count();
  if (static_cast<int>(witness.pi.size()) != n ||
      static_cast<int>(witness.witness_flow.size()) != g.arc_count())
    throw std::invalid_argument("compute_optimal_set: witness size mismatch");

  auto reduced_cost = [&](ArcId a) {
    const Arc& e = g.arc(a);
    return e.length - witness.pi[static_cast<size_t>(e.tail)] + witness.pi[static_cast<size_t>(e.head)];
  };

  // Residual graph restricted to zero-reduced-cost arcs: forward copies of
  // tight arcs, backward copies of arcs carrying witness flow.
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (ArcId a = 0; a < g.arc_count(); ++a) {
    const Arc& e = g.arc(a);
    if (std::abs(reduced_cost(a)) <= kEps) adj[static_cast<size_t>(e.tail)].push_back(e.head);
    if (witness.witness_flow[static_cast<size_t>(a)] > kEps)
      adj[static_cast<size_t>(e.head)].push_back(e.tail);
  }
  std::vector<int> scc = strongly_connected_components(n, adj);

  std::vector<ArcId> h_hat;
  for (ArcId a = 0; a < g.arc_count(); ++a) {
    const Arc& e = g.arc(a);
    if (witness.witness_flow[static_cast<size_t>(a)] > kEps) {
      h_hat.push_back(a);
    } else if (std::abs(reduced_cost(a)) <= kEps &&
               scc[static_cast<size_t>(e.tail)] == scc[static_cast<size_t>(e.head)]) {
      h_hat.push_back(a);
    }
  }
  return h_hat;
}

std::vector<BasicSolution> enumerate_bfs(const Digraph& g, const SourceVector& b, int arc_cap) {
  const int m = g.arc_count();
  const int n = g.node_count();
  if (b.size() != n) throw std::invalid_argument("enumerate_bfs: source vector size mismatch");
  if (m > arc_cap)
    throw std::invalid_argument("enumerate_bfs: arc count " + std::to_string(m) +
                                " exceeds enumeration cap " + std::to_string(arc_cap));

  double scale = 1.0;
  for (double v : b.values()) scale = std::max(scale, std::abs(v));
  const double eps = 1e-12 * scale;

  std::vector<BasicSolution> out;
  std::vector<int> degree(static_cast<size_t>(n));
  std::vector<double> need(static_cast<size_t>(n));
  std::vector<ArcId> chosen;

  for (uint32_t mask = 0; mask < (uint32_t{1} << m); ++mask) {
    chosen.clear();
    for (ArcId a = 0; a < m; ++a)
      if (mask & (uint32_t{1} << a)) chosen.push_back(a);

    if (chosen.empty()) {
      if (b.is_zero()) out.push_back(BasicSolution{ArcVector(static_cast<size_t>(m), 0.0)});
      continue;
    }

    // Forest check on the underlying undirected graph.
    bool forest = true;
    {
      std::vector<int> parent(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) parent[static_cast<size_t>(i)] = i;
      auto find = [&](int x) {
        while (parent[static_cast<size_t>(x)] != x) {
          parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
          x = parent[static_cast<size_t>(x)];
        }
        return x;
      };
      for (ArcId a : chosen) {
        int ru = find(g.arc(a).tail), rv = find(g.arc(a).head);
        if (ru == rv) {
          forest = false;
          break;
        }
        parent[static_cast<size_t>(ru)] = rv;
      }
    }
    if (!forest) continue;

    // The flow on a forest is forced by conservation: strip leaves.
    std::fill(degree.begin(), degree.end(), 0);
    for (NodeId i = 0; i < n; ++i) need[static_cast<size_t>(i)] = b[i];
    std::vector<std::vector<ArcId>> incident(static_cast<size_t>(n));
    for (ArcId a : chosen) {
      ++degree[static_cast<size_t>(g.arc(a).tail)];
      ++degree[static_cast<size_t>(g.arc(a).head)];
      incident[static_cast<size_t>(g.arc(a).tail)].push_back(a);
      incident[static_cast<size_t>(g.arc(a).head)].push_back(a);
    }

    bool valid = true;
    for (NodeId i = 0; i < n && valid; ++i)
      if (degree[static_cast<size_t>(i)] == 0 && std::abs(need[static_cast<size_t>(i)]) > eps)
        valid = false;
    if (!valid) continue;

    ArcVector flow(static_cast<size_t>(m), 0.0);
    std::vector<char> removed(static_cast<size_t>(m), 0);
    std::vector<NodeId> leaves;
    for (NodeId i = 0; i < n; ++i)
      if (degree[static_cast<size_t>(i)] == 1) leaves.push_back(i);

    size_t processed = 0;
    while (!leaves.empty() && valid) {
      NodeId v = leaves.back();
      leaves.pop_back();
      if (degree[static_cast<size_t>(v)] != 1) continue;
      ArcId a = -1;
      for (ArcId cand : incident[static_cast<size_t>(v)])
        if (!removed[static_cast<size_t>(cand)]) {
          a = cand;
          break;
        }
      if (a < 0) break;
      const Arc& e = g.arc(a);
      double f;
      NodeId other;
      if (e.tail == v) {
        f = need[static_cast<size_t>(v)];
        other = e.head;
        need[static_cast<size_t>(other)] += f;
      } else {
        f = -need[static_cast<size_t>(v)];
        other = e.tail;
        need[static_cast<size_t>(other)] -= f;
      }
      if (f <= eps) {
        valid = false;  // zero or negative flow: support would not be the whole subset
        break;
      }
      flow[static_cast<size_t>(a)] = f;
      removed[static_cast<size_t>(a)] = 1;
      need[static_cast<size_t>(v)] = 0.0;
      --degree[static_cast<size_t>(v)];
      --degree[static_cast<size_t>(other)];
      if (degree[static_cast<size_t>(other)] == 1) leaves.push_back(other);
      ++processed;
    }
    if (!valid || processed != chosen.size()) continue;
    // Remaining requirements must be settled (tree roots balance out).
    for (NodeId i = 0; i < n && valid; ++i)
      if (std::abs(need[static_cast<size_t>(i)]) > eps) valid = false;
    if (!valid) continue;

    out.push_back(BasicSolution{std::move(flow)});
  }
  return out;
}

OptimalDual dual_on_optimal_set(const Digraph& g, const OptimalSet& optimal) {
  if (optimal.arcs_in_h_hat.empty())
    throw std::invalid_argument("dual_on_optimal_set: empty optimal set");
  const int n = g.node_count();

  std::vector<std::vector<std::pair<ArcId, int>>> adj(static_cast<size_t>(n));
  std::vector<char> on(static_cast<size_t>(n), 0);
  for (ArcId a : optimal.arcs_in_h_hat) {
    const Arc& e = g.arc(a);
    adj[static_cast<size_t>(e.tail)].emplace_back(a, +1);
    adj[static_cast<size_t>(e.head)].emplace_back(a, -1);
    on[static_cast<size_t>(e.tail)] = on[static_cast<size_t>(e.head)] = 1;
  }

  double scale = 1.0;
  for (ArcId a : optimal.arcs_in_h_hat) scale = std::max(scale, g.arc(a).length);

  OptimalDual out;
  out.p_hat.assign(static_cast<size_t>(n), 0.0);
  out.on_h_hat = on;
  std::vector<char> seen(static_cast<size_t>(n), 0);
  int components = 0;

  for (NodeId root = 0; root < n; ++root) {
    if (!on[static_cast<size_t>(root)] || seen[static_cast<size_t>(root)]) continue;
    ++components;
    // Propagate p along arcs with slope one: p_tail - p_head = length.
    std::vector<NodeId> order;
    std::vector<NodeId> stack{root};
    seen[static_cast<size_t>(root)] = 1;
    out.p_hat[static_cast<size_t>(root)] = 0.0;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      order.push_back(u);
      for (auto [a, dir] : adj[static_cast<size_t>(u)]) {
        const Arc& e = g.arc(a);
        NodeId v = dir > 0 ? e.head : e.tail;
        double pv = dir > 0 ? out.p_hat[static_cast<size_t>(u)] - e.length
                            : out.p_hat[static_cast<size_t>(u)] + e.length;
        if (!seen[static_cast<size_t>(v)]) {
          seen[static_cast<size_t>(v)] = 1;
          out.p_hat[static_cast<size_t>(v)] = pv;
          stack.push_back(v);
        } else if (std::abs(out.p_hat[static_cast<size_t>(v)] - pv) > 1e-9 * scale) {
          throw std::runtime_error(
              "dual_on_optimal_set: inconsistent slopes on the optimal set (nonzero-cost "
              "oriented cycle)");
        }
      }
    }
    double lo = std::numeric_limits<double>::infinity();
    for (NodeId u : order) lo = std::min(lo, out.p_hat[static_cast<size_t>(u)]);
    for (NodeId u : order) out.p_hat[static_cast<size_t>(u)] -= lo;
  }
  out.connected = components == 1;
  return out;
}

}  // namespace physarum
