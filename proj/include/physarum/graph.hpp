#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace physarum {

using NodeId = int;
using ArcId = int;
using NodeVector = std::vector<double>;
using ArcVector = std::vector<double>;

struct Arc {
  NodeId tail = 0;
  NodeId head = 0;
  double length = 1.0;
};

// Immutable weighted digraph. Arc order is construction (file) order and is
// the tie-break order used everywhere else in the library. Self-loops and
// duplicate (tail, head) pairs are rejected; antiparallel pairs are allowed
// so undirected problems can be modelled as doubled arcs.
class Digraph {
public:
  Digraph() : node_count_(0) {}
  Digraph(int node_count, std::vector<Arc> arcs);

  int node_count() const { return node_count_; }
  int arc_count() const { return static_cast<int>(arcs_.size()); }
  const Arc& arc(ArcId a) const { return arcs_[static_cast<size_t>(a)]; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<ArcId>& out_arcs(NodeId i) const { return out_[static_cast<size_t>(i)]; }
  const std::vector<ArcId>& in_arcs(NodeId i) const { return in_[static_cast<size_t>(i)]; }
  std::optional<ArcId> find_arc(NodeId tail, NodeId head) const;
  double total_length() const;

private:
  int node_count_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<ArcId>> out_, in_;
};

// Prescribed net out-flow per node; supplies are positive, demands negative,
// and the entries must balance to zero.
class SourceVector {
public:
  SourceVector() = default;
  explicit SourceVector(NodeVector values, double balance_tol = 1e-12);

  const NodeVector& values() const { return b_; }
  double operator[](NodeId i) const { return b_[static_cast<size_t>(i)]; }
  int size() const { return static_cast<int>(b_.size()); }
  bool is_zero() const;
  double supply_total() const;  // sum of positive entries, equals max_S b(S)
  std::vector<NodeId> support() const;

private:
  NodeVector b_;
};

struct CutBounds {
  double b_star_max = 0.0;
  double b_star_min = 0.0;
};

// Bp: net out-flow per node induced by the arc vector x.
NodeVector divergence(const Digraph& g, const ArcVector& x);

bool is_flow(const Digraph& g, const ArcVector& x, const SourceVector& b, double tol);

// b(S) = sum of b over the node set S.
double cut_value(const Digraph& g, const SourceVector& b, const std::vector<NodeId>& s_set);

// Exact extreme nonzero cut values by enumerating all 2^|V| subsets.
CutBounds cut_bounds(const Digraph& g, const SourceVector& b, int node_cap = 20);

// b_star_max is always exact (= sum of supplies); b_star_min falls back to the
// smallest nonzero |b_i| when the graph is too large to enumerate.
CutBounds cut_bounds_fast(const Digraph& g, const SourceVector& b, int node_cap = 20);

// Exact combinatorial feasibility: max-flow from a super-source over
// uncapacitated arc copies must ship the whole supply.
bool is_feasible(const Digraph& g, const SourceVector& b);

// All simple oriented cycles inside the given arc set whose signed cost
// sum(gamma_ij * l_ij) vanishes. Each undirected cycle is reported once, with
// its lowest-index arc traversed forward.
std::vector<ArcVector> find_directed_cycles_zero_cost(const Digraph& g,
                                                      const std::vector<ArcId>& sub,
                                                      double tol = 1e-9);

}  // namespace physarum
