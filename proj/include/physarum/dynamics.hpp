#pragma once

#include <optional>
#include <utility>

#include "physarum/kirchhoff.hpp"

namespace physarum {

enum class Integrator { log_euler, euler };
enum class RunStatus { converged, max_time, divergence_detected };

struct SolverConfig {
  double step = 0.05;
  Integrator integrator = Integrator::log_euler;
  double t_max = 200.0;
  double stop_tol = 1e-8;
  double support_tol = 1e-9;   // tau_supp: support threshold factor vs b*_max
  double divergence_potential_cap = 0.0;  // <= 0 selects default_potential_cap
  double exponent_clamp = 20.0;           // per-arc clamp on |h*(psi-1)|
  bool strict_feasibility = false;
  bool record_mean_field = false;
};

// Snapshot of the conductivity evolution at one time.
struct ConductivityState {
  double t = 0.0;
  ArcVector sigma;
  ArcVector sigma0;
};

struct TraceRecord {
  double t = 0.0;
  double kilter_residual = 0.0;
  double max_psi_violation = 0.0;  // max (psi-1)_+ over supported arcs
  double flow_gap = 0.0;           // ||phi - sigma||_inf over all arcs
  double cost = 0.0;               // l^T sigma
  double potential_norm = 0.0;     // ||p||_inf
  ArcVector flow;
  ArcVector sigma;
  std::optional<ArcVector> mean_field;  // running time-average of psi
};

struct RunResult {
  ConductivityState state;
  ElectricalSolution solution;
  std::vector<TraceRecord> trace;
  RunStatus status = RunStatus::max_time;
};

// Heuristic blow-up threshold: 1e3 * sum(l) * ||b||_1 / min sigma(0).
double default_potential_cap(const Digraph& g, const SourceVector& b, const ArcVector& sigma0);

// Distance from the kilter line over the surviving arcs: max |psi - 1| (the
// Ohm-relative gap |phi - sigma|/sigma) on arcs with sigma > tau * b*_max.
// Zero exactly at optimal fixpoints.
double kilter_residual(const ElectricalSolution& sol, const ArcVector& sigma,
                       const CutBounds& bounds, double tau);

// One integrator step; the returned record is evaluated at the pre-step state.
std::pair<ConductivityState, TraceRecord> step(const Digraph& g, const SourceVector& b,
                                               const ConductivityState& state,
                                               const SolverConfig& cfg);

RunResult run(const Digraph& g, const SourceVector& b, const ArcVector& sigma0,
              const SolverConfig& cfg);

struct RateFit {
  double slope = 0.0;
  double r_squared = 0.0;
  int samples = 0;
};

// Least-squares fit of log ||flow(t) - reference||_inf over the trace tail:
// records with error above err_floor are kept and the last tail_fraction of
// them are regressed.
RateFit convergence_rate(const std::vector<TraceRecord>& trace, const ArcVector& reference_flow,
                         double err_floor = 1e-12, double tail_fraction = 0.5);

}  // namespace physarum
