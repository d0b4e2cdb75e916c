#pragma once

#include "physarum/dynamics.hpp"

namespace physarum {

// Directed path whose endpoints lie in the current subgraph and whose
// internal nodes are outside it, together with its potential slope
// (p_a - p_b) / l(path).
struct Trajectory {
  std::vector<ArcId> arcs;
  double slope = 0.0;
};

// Extension (H*, p*) of the optimal set built by repeatedly adjoining the
// maximum-slope trajectory and interpolating the potential along it.
struct HarmonicExtension {
  std::vector<ArcId> h_star;                              // sorted, contains H_hat
  NodeVector p_star;                                      // zero outside V(H*)
  std::vector<char> in_v_star;                            // node mask for V(H*)
  std::vector<double> slopes;                             // distinct, descending
  std::vector<std::pair<double, std::vector<ArcId>>> level_sets;  // slope -> F_r
  std::vector<NodeId> uncovered_nodes;                    // nodes never reached
};

// Highest-slope trajectory to (h, p); ties resolved toward the
// lexicographically smallest arc-index sequence. Returns nullopt when no
// positive-slope trajectory exists.
std::optional<Trajectory> max_slope_trajectory(const Digraph& g, const std::vector<ArcId>& h,
                                               const NodeVector& p);

HarmonicExtension build_extension(const Digraph& g, const std::vector<ArcId>& h_hat,
                                  const NodeVector& p_hat);

struct HarmonicCheck {
  std::vector<NodeId> violators;
  std::vector<NodeId> skipped;  // nodes lacking in- or out-arcs inside h_star
};

// Discrete infinity-harmonic test max-in-field == max-out-field >= 0 at every
// node of V(h_star) outside the excluded set.
HarmonicCheck check_inf_harmonic(const Digraph& g, const std::vector<ArcId>& h_star,
                                 const NodeVector& p, const std::vector<NodeId>& excluded,
                                 double tol = 1e-9);

// ||p(t_final) - p*||_inf over V(H*) after renormalizing both to min zero on
// that vertex set.
double dual_convergence_gap(const RunResult& run_result, const HarmonicExtension& extension);

}  // namespace physarum
