#pragma once

#include "physarum/graph.hpp"

namespace physarum {

// Exact reference solution: optimal cost, one optimal flow, a dual certificate
// pi with nonnegative reduced costs l_ij - pi_i + pi_j, and the optimal set
// H_hat of arcs carried by some minimum-cost flow.
struct OptimalSet {
  double z_star = 0.0;
  ArcVector witness_flow;
  std::vector<ArcId> arcs_in_h_hat;  // sorted ascending
  NodeVector pi;
};

// Nonnegative flow supported on a forest; extreme point of the flow polyhedron.
struct BasicSolution {
  ArcVector flow;
};

// Potential with field identically 1 on H_hat, normalized to min zero per
// component of U(H_hat).
struct OptimalDual {
  NodeVector p_hat;               // zero outside V(H_hat)
  std::vector<char> on_h_hat;     // node mask for V(H_hat)
  bool connected = false;
};

// Successive shortest paths with node potentials; exact on integer data.
OptimalSet solve_exact(const Digraph& g, const SourceVector& b);

// Arcs lying in the support of some optimal flow: positive witness flow, or
// zero reduced cost on a directed cycle of the zero-reduced-cost residual
// graph (decided via strongly connected components).
std::vector<ArcId> compute_optimal_set(const Digraph& g, const SourceVector& b,
                                       const OptimalSet& witness);

// Every forest-supported nonnegative flow for b, by subset enumeration.
std::vector<BasicSolution> enumerate_bfs(const Digraph& g, const SourceVector& b,
                                         int arc_cap = 16);

OptimalDual dual_on_optimal_set(const Digraph& g, const OptimalSet& optimal);

}  // namespace physarum
