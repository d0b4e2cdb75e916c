#include "physarum/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>

namespace physarum {

Digraph::Digraph(int node_count, std::vector<Arc> arcs)
    : node_count_(node_count), arcs_(std::move(arcs)) {
  if (node_count_ < 0) throw std::invalid_argument("digraph: negative node count");
  std::map<std::pair<NodeId, NodeId>, ArcId> seen;
  out_.resize(static_cast<size_t>(node_count_));
  in_.resize(static_cast<size_t>(node_count_));
  for (ArcId a = 0; a < arc_count(); ++a) {
    const Arc& e = arcs_[static_cast<size_t>(a)];
    if (e.tail < 0 || e.tail >= node_count_ || e.head < 0 || e.head >= node_count_)
      throw std::invalid_argument("digraph: arc endpoint out of range");
    if (e.tail == e.head)
      throw std::invalid_argument("digraph: self-loop at node " + std::to_string(e.tail));
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      throw std::invalid_argument("digraph: arc length must be positive and finite");
    if (!seen.emplace(std::make_pair(e.tail, e.head), a).second)
      throw std::invalid_argument("digraph: duplicate arc " + std::to_string(e.tail) + "->" +
                                  std::to_string(e.head));
    out_[static_cast<size_t>(e.tail)].push_back(a);
    in_[static_cast<size_t>(e.head)].push_back(a);
  }
}

std::optional<ArcId> Digraph::find_arc(NodeId tail, NodeId head) const {
  if (tail < 0 || tail >= node_count_) return std::nullopt;
  for (ArcId a : out_[static_cast<size_t>(tail)])
    if (arcs_[static_cast<size_t>(a)].head == head) return a;
  return std::nullopt;
}

double Digraph::total_length() const {
  double s = 0.0;
  for (const Arc& e : arcs_) s += e.length;
  return s;
}

SourceVector::SourceVector(NodeVector values, double balance_tol) : b_(std::move(values)) {
  double sum = 0.0;
  for (double v : b_) {
    if (!std::isfinite(v)) throw std::invalid_argument("source vector: non-finite entry");
    sum += v;
  }
  if (std::abs(sum) > balance_tol)
    throw std::invalid_argument("source vector: entries sum to " + std::to_string(sum) +
                                ", expected zero");
}

bool SourceVector::is_zero() const {
  return std::all_of(b_.begin(), b_.end(), [](double v) { return v == 0.0; });
}

double SourceVector::supply_total() const {
  double s = 0.0;
  for (double v : b_)
    if (v > 0.0) s += v;
  return s;
}

std::vector<NodeId> SourceVector::support() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < size(); ++i)
    if (b_[static_cast<size_t>(i)] != 0.0) out.push_back(i);
  return out;
}

NodeVector divergence(const Digraph& g, const ArcVector& x) {
  if (static_cast<int>(x.size()) != g.arc_count())
    throw std::invalid_argument("divergence: arc vector size " + std::to_string(x.size()) +
                                " does not match arc count " + std::to_string(g.arc_count()));
  NodeVector d(static_cast<size_t>(g.node_count()), 0.0);
  for (ArcId a = 0; a < g.arc_count(); ++a) {
    const Arc& e = g.arc(a);
    d[static_cast<size_t>(e.tail)] += x[static_cast<size_t>(a)];
    d[static_cast<size_t>(e.head)] -= x[static_cast<size_t>(a)];
  }
  return d;
}

bool is_flow(const Digraph& g, const ArcVector& x, const SourceVector& b, double tol) {
  if (tol < 0.0) throw std::invalid_argument("is_flow: negative tolerance");
  if (b.size() != g.node_count())
    throw std::invalid_argument("is_flow: source vector size mismatch");
  NodeVector d = divergence(g, x);
  for (NodeId i = 0; i < g.node_count(); ++i)
    if (std::abs(d[static_cast<size_t>(i)] - b[i]) > tol) return false;
  return true;
}

double cut_value(const Digraph& g, const SourceVector& b, const std::vector<NodeId>& s_set) {
  if (b.size() != g.node_count())
    throw std::invalid_argument("cut_value: source vector size mismatch");
  double v = 0.0;
  for (NodeId i : s_set) {
    if (i < 0 || i >= g.node_count()) throw std::invalid_argument("cut_value: node id out of range");
    v += b[i];
  }
  return v;
}

namespace {

double nonzero_threshold(const SourceVector& b) {
  double norm1 = 0.0;
  for (double v : b.values()) norm1 += std::abs(v);
  return 1e-12 * std::max(1.0, norm1);
}

}  // namespace

CutBounds cut_bounds(const Digraph& g, const SourceVector& b, int node_cap) {
  const int n = g.node_count();
  if (b.size() != n) throw std::invalid_argument("cut_bounds: source vector size mismatch");
  if (n > node_cap)
    throw std::invalid_argument("cut_bounds: node count " + std::to_string(n) +
                                " exceeds enumeration cap " + std::to_string(node_cap));
  if (b.is_zero()) throw std::invalid_argument("cut_bounds: degenerate source vector (b = 0)");
  const double zero_tol = nonzero_threshold(b);
  double bmax = 0.0;
  double bmin = std::numeric_limits<double>::infinity();
  for (uint64_t mask = 1; mask + 1 < (uint64_t{1} << n); ++mask) {
    double v = 0.0;
    for (int i = 0; i < n; ++i)
      if (mask & (uint64_t{1} << i)) v += b[i];
    double av = std::abs(v);
    if (av > bmax) bmax = av;
    if (av > zero_tol && av < bmin) bmin = av;
  }
  return CutBounds{bmax, bmin};
}

CutBounds cut_bounds_fast(const Digraph& g, const SourceVector& b, int node_cap) {
  if (b.is_zero()) return CutBounds{0.0, 0.0};
  if (g.node_count() <= node_cap) return cut_bounds(g, b, node_cap);
  double bmin = std::numeric_limits<double>::infinity();
  for (double v : b.values())
    if (v != 0.0) bmin = std::min(bmin, std::abs(v));
  return CutBounds{b.supply_total(), bmin};
}

namespace {

// Dinic max-flow on doubles; used only for the exact feasibility test, where
// capacities are the integer-ish supplies plus an "infinite" bound.
class MaxFlow {
public:
  explicit MaxFlow(int n) : head_(static_cast<size_t>(n), -1) {}

  void add_edge(int u, int v, double cap) {
    edges_.push_back({v, head_[static_cast<size_t>(u)], cap});
    head_[static_cast<size_t>(u)] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({u, head_[static_cast<size_t>(v)], 0.0});
    head_[static_cast<size_t>(v)] = static_cast<int>(edges_.size()) - 1;
  }

  double solve(int s, int t) {
    constexpr double eps = 1e-12;
    double total = 0.0;
    while (bfs(s, t, eps)) {
      iter_ = head_;
      double f;
      while ((f = dfs(s, t, std::numeric_limits<double>::infinity(), eps)) > eps) total += f;
    }
    return total;
  }

private:
  struct Edge {
    int to;
    int next;
    double cap;
  };

  bool bfs(int s, int t, double eps) {
    level_.assign(head_.size(), -1);
    std::queue<int> q;
    level_[static_cast<size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int e = head_[static_cast<size_t>(u)]; e != -1; e = edges_[static_cast<size_t>(e)].next) {
        int v = edges_[static_cast<size_t>(e)].to;
        if (edges_[static_cast<size_t>(e)].cap > eps && level_[static_cast<size_t>(v)] < 0) {
          level_[static_cast<size_t>(v)] = level_[static_cast<size_t>(u)] + 1;
          q.push(v);
        }
      }
    }
    return level_[static_cast<size_t>(t)] >= 0;
  }

  double dfs(int u, int t, double limit, double eps) {
    if (u == t) return limit;
    for (int& e = iter_[static_cast<size_t>(u)]; e != -1; e = edges_[static_cast<size_t>(e)].next) {
      Edge& ed = edges_[static_cast<size_t>(e)];
      if (ed.cap > eps && level_[static_cast<size_t>(ed.to)] == level_[static_cast<size_t>(u)] + 1) {
        double f = dfs(ed.to, t, std::min(limit, ed.cap), eps);
        if (f > eps) {
          ed.cap -= f;
          edges_[static_cast<size_t>(e ^ 1)].cap += f;
          return f;
        }
      }
    }
    return 0.0;
  }

  std::vector<int> head_, iter_, level_;
  std::vector<Edge> edges_;
};

}  // namespace

bool is_feasible(const Digraph& g, const SourceVector& b) {
  if (b.size() != g.node_count())
    throw std::invalid_argument("is_feasible: source vector size mismatch");
  const double supply = b.supply_total();
  if (supply == 0.0) return true;
  const int n = g.node_count();
  const int s = n, t = n + 1;
  const double inf_cap = supply + 1.0;
  MaxFlow mf(n + 2);
  for (NodeId i = 0; i < n; ++i) {
    if (b[i] > 0.0) mf.add_edge(s, i, b[i]);
    if (b[i] < 0.0) mf.add_edge(i, t, -b[i]);
  }
  for (const Arc& e : g.arcs()) mf.add_edge(e.tail, e.head, inf_cap);
  return mf.solve(s, t) >= supply - 1e-9 * std::max(1.0, supply);
}

namespace {

struct CycleSearch {
  const Digraph& g;
  double tol;
  // incident[v] lists (arc, sign, other endpoint); sign +1 traverses the arc
  // tail->head, -1 head->tail.
  std::vector<std::vector<std::tuple<ArcId, int, NodeId>>> incident;
  std::vector<char> in_sub, used, visited;
  std::vector<std::pair<ArcId, int>> path;
  std::vector<ArcVector> found;
  ArcId anchor = 0;
  NodeId start_node = 0;

  CycleSearch(const Digraph& graph, double t)
      : g(graph),
        tol(t),
        incident(static_cast<size_t>(graph.node_count())),
        in_sub(static_cast<size_t>(graph.arc_count()), 0),
        used(static_cast<size_t>(graph.arc_count()), 0),
        visited(static_cast<size_t>(graph.node_count()), 0) {}

  void emit() {
    double cost = 0.0;
    for (auto [a, sign] : path) cost += sign * g.arc(a).length;
    if (std::abs(cost) > tol) return;
    ArcVector gamma(static_cast<size_t>(g.arc_count()), 0.0);
    for (auto [a, sign] : path) gamma[static_cast<size_t>(a)] = sign;
    found.push_back(std::move(gamma));
  }

  void dfs(NodeId at) {
    for (const auto& [a, sign, next] : incident[static_cast<size_t>(at)]) {
      if (a <= anchor || used[static_cast<size_t>(a)] || !in_sub[static_cast<size_t>(a)]) continue;
      if (next == start_node) {
        path.emplace_back(a, sign);
        emit();
        path.pop_back();
        continue;
      }
      if (visited[static_cast<size_t>(next)]) continue;
      used[static_cast<size_t>(a)] = 1;
      visited[static_cast<size_t>(next)] = 1;
      path.emplace_back(a, sign);
      dfs(next);
      path.pop_back();
      visited[static_cast<size_t>(next)] = 0;
      used[static_cast<size_t>(a)] = 0;
    }
  }
};

}  // namespace

std::vector<ArcVector> find_directed_cycles_zero_cost(const Digraph& g,
                                                      const std::vector<ArcId>& sub, double tol) {
  CycleSearch cs(g, tol);
  for (ArcId a : sub) {
    if (a < 0 || a >= g.arc_count())
      throw std::invalid_argument("find_directed_cycles_zero_cost: arc id out of range");
    cs.in_sub[static_cast<size_t>(a)] = 1;
    const Arc& e = g.arc(a);
    cs.incident[static_cast<size_t>(e.tail)].emplace_back(a, +1, e.head);
    cs.incident[static_cast<size_t>(e.head)].emplace_back(a, -1, e.tail);
  }
  // Anchor each cycle at its smallest arc index, traversed forward, so every
  // undirected cycle is produced exactly once with a fixed orientation.
  for (ArcId a0 : sub) {
    const Arc& e = g.arc(a0);
    cs.anchor = a0;
    cs.start_node = e.tail;
    cs.used[static_cast<size_t>(a0)] = 1;
    cs.visited[static_cast<size_t>(e.tail)] = 1;
    cs.visited[static_cast<size_t>(e.head)] = 1;
    cs.path.emplace_back(a0, +1);
    cs.dfs(e.head);
    cs.path.pop_back();
    cs.visited[static_cast<size_t>(e.tail)] = 0;
    cs.visited[static_cast<size_t>(e.head)] = 0;
    cs.used[static_cast<size_t>(a0)] = 0;
  }
  return cs.found;
}

}  // namespace physarum
