#include "physarum/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace physarum {

namespace {

void check_state(const Digraph& g, const ConductivityState& state) {
  if (static_cast<int>(state.sigma.size()) != g.arc_count() ||
      static_cast<int>(state.sigma0.size()) != g.arc_count())
    throw std::invalid_argument("dynamics: sigma size mismatch");
  for (double s : state.sigma)
    if (!(s > 0.0) || !std::isfinite(s))
      throw std::invalid_argument("dynamics: sigma must stay positive");
}

// The kilter residual is the per-arc Ohm-relative gap |psi - 1| = |phi -
// sigma|/sigma over arcs above the support threshold. Arcs below it count as
// removed; on the survivors psi = 1 is exactly the kilter line, and an
// absolute |phi - sigma| gap would vanish on decaying arcs long before they
// leave the support, stalling the support/optimal-set match.
TraceRecord evaluate(const Digraph& g, const ElectricalSolution& sol, const ArcVector& sigma,
                     const CutBounds& bounds, double tau, double t) {
  TraceRecord rec;
  rec.t = t;
  const double support = tau * bounds.b_star_max;
  double psi_viol = 0.0, relative_gap = 0.0, gap_all = 0.0, cost = 0.0;
  for (ArcId a = 0; a < g.arc_count(); ++a) {
    const double s = sigma[static_cast<size_t>(a)];
    const double psi = sol.field[static_cast<size_t>(a)];
    gap_all = std::max(gap_all, std::abs(sol.current[static_cast<size_t>(a)] - s));
    if (s > support) {
      psi_viol = std::max(psi_viol, psi - 1.0);
      relative_gap = std::max(relative_gap, std::abs(psi - 1.0));
    }
    cost += g.arc(a).length * s;
  }
  rec.max_psi_violation = std::max(psi_viol, 0.0);
  rec.flow_gap = gap_all;
  rec.kilter_residual = std::max(rec.max_psi_violation, relative_gap);
  rec.cost = cost;
  for (double p : sol.potential) rec.potential_norm = std::max(rec.potential_norm, std::abs(p));
  rec.flow = sol.current;
  rec.sigma = sigma;
  return rec;
}

void check_finite(const ElectricalSolution& sol) {
  for (double v : sol.field)
    if (!std::isfinite(v)) throw std::runtime_error("dynamics: non-finite field");
  for (double v : sol.potential)
    if (!std::isfinite(v)) throw std::runtime_error("dynamics: non-finite potential");
}

ArcVector advance(const Digraph& g, const ConductivityState& state, const ElectricalSolution& sol,
                  const SolverConfig& cfg) {
  const double h = cfg.step;
  ArcVector next = state.sigma;
  if (cfg.integrator == Integrator::log_euler) {
    for (ArcId a = 0; a < g.arc_count(); ++a) {
      double e = h * (sol.field[static_cast<size_t>(a)] - 1.0);
      e = std::clamp(e, -cfg.exponent_clamp, cfg.exponent_clamp);
      next[static_cast<size_t>(a)] *= std::exp(e);
    }
  } else {
    double floor = cfg.support_tol * *std::min_element(state.sigma0.begin(), state.sigma0.end());
    for (ArcId a = 0; a < g.arc_count(); ++a) {
      double s = state.sigma[static_cast<size_t>(a)];
      s += h * (sol.current[static_cast<size_t>(a)] - s);
      next[static_cast<size_t>(a)] = std::max(s, floor);
    }
  }
  return next;
}

}  // namespace

double default_potential_cap(const Digraph& g, const SourceVector& b, const ArcVector& sigma0) {
  double b1 = 0.0;
  for (double v : b.values()) b1 += std::abs(v);
  double smin = std::numeric_limits<double>::infinity();
  for (double s : sigma0) smin = std::min(smin, s);
  if (!(smin > 0.0)) throw std::invalid_argument("dynamics: sigma0 must be positive");
  return 1e3 * g.total_length() * std::max(b1, 1.0) / smin;
}

double kilter_residual(const ElectricalSolution& sol, const ArcVector& sigma,
                       const CutBounds& bounds, double tau) {
  if (sol.field.size() != sigma.size() || sol.current.size() != sigma.size())
    throw std::invalid_argument("kilter_residual: size mismatch");
  const double support = tau * bounds.b_star_max;
  double worst = 0.0;
  for (size_t a = 0; a < sigma.size(); ++a)
    if (sigma[a] > support) worst = std::max(worst, std::abs(sol.field[a] - 1.0));
  return worst;
}

std::pair<ConductivityState, TraceRecord> step(const Digraph& g, const SourceVector& b,
                                               const ConductivityState& state,
                                               const SolverConfig& cfg) {
  check_state(g, state);
  if (!(cfg.step > 0.0)) throw std::invalid_argument("dynamics: step must be positive");
  CutBounds bounds = cut_bounds_fast(g, b);
  ElectricalSolution sol = solve_neumann(g, state.sigma, b);
  check_finite(sol);
  TraceRecord rec = evaluate(g, sol, state.sigma, bounds, cfg.support_tol, state.t);
  ConductivityState next{state.t + cfg.step, advance(g, state, sol, cfg), state.sigma0};
  return {std::move(next), std::move(rec)};
}

RunResult run(const Digraph& g, const SourceVector& b, const ArcVector& sigma0,
              const SolverConfig& cfg) {
  if (static_cast<int>(sigma0.size()) != g.arc_count())
    throw std::invalid_argument("run: sigma0 size mismatch");
  for (double s : sigma0)
    if (!(s > 0.0) || !std::isfinite(s))
      throw std::invalid_argument("run: sigma0 must be positive on every arc");
  if (!(cfg.step > 0.0) || !(cfg.stop_tol > 0.0))
    throw std::invalid_argument("run: step and stop_tol must be positive");
  if (cfg.strict_feasibility && !is_feasible(g, b))
    throw std::invalid_argument("run: infeasible problem rejected in strict mode");

  const CutBounds bounds = cut_bounds_fast(g, b);
  const double cap = cfg.divergence_potential_cap > 0.0 ? cfg.divergence_potential_cap
                                                        : default_potential_cap(g, b, sigma0);
  const double h = cfg.step;

  RunResult result;
  result.state = ConductivityState{0.0, sigma0, sigma0};
  result.status = RunStatus::max_time;

  // Trapezoid accumulation of the time-averaged field.
  ArcVector psi_integral(static_cast<size_t>(g.arc_count()), 0.0);
  ArcVector psi_prev;

  while (true) {
    ElectricalSolution sol = solve_neumann(g, result.state.sigma, b);
    check_finite(sol);
    TraceRecord rec =
        evaluate(g, sol, result.state.sigma, bounds, cfg.support_tol, result.state.t);
    if (cfg.record_mean_field) {
      if (!psi_prev.empty())
        for (size_t a = 0; a < psi_integral.size(); ++a)
          psi_integral[a] += 0.5 * h * (psi_prev[a] + sol.field[a]);
      psi_prev = sol.field;
      if (result.state.t > 0.0) {
        ArcVector mean = psi_integral;
        for (double& v : mean) v /= result.state.t;
        rec.mean_field = std::move(mean);
      }
    }
    result.trace.push_back(std::move(rec));
    const TraceRecord& last = result.trace.back();

    // Divergence first: an infeasible run can push every arc below the
    // support threshold, which would look like a trivially satisfied kilter.
    if (last.potential_norm > cap) {
      result.status = RunStatus::divergence_detected;
      result.solution = std::move(sol);
      break;
    }
    if (last.kilter_residual <= cfg.stop_tol) {
      result.status = RunStatus::converged;
      result.solution = std::move(sol);
      break;
    }
    if (result.state.t >= cfg.t_max - 1e-12) {
      result.status = RunStatus::max_time;
      result.solution = std::move(sol);
      break;
    }
    result.state.sigma = advance(g, result.state, sol, cfg);
    result.state.t += h;
  }
  return result;
}

RateFit convergence_rate(const std::vector<TraceRecord>& trace, const ArcVector& reference_flow,
                         double err_floor, double tail_fraction) {
  std::vector<std::pair<double, double>> pts;  // (t, log err)
  for (const TraceRecord& rec : trace) {
    if (rec.flow.size() != reference_flow.size())
      throw std::invalid_argument("convergence_rate: reference flow size mismatch");
    double err = 0.0;
    for (size_t a = 0; a < reference_flow.size(); ++a)
      err = std::max(err, std::abs(rec.flow[a] - reference_flow[a]));
    if (err > err_floor) pts.emplace_back(rec.t, std::log(err));
  }
  size_t tail = static_cast<size_t>(std::ceil(tail_fraction * static_cast<double>(pts.size())));
  if (tail < 10)
    throw std::runtime_error("convergence_rate: insufficient samples above the error floor (" +
                             std::to_string(tail) + ")");
  pts.erase(pts.begin(), pts.end() - static_cast<ptrdiff_t>(tail));

  double n = static_cast<double>(pts.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
  for (auto [t, y] : pts) {
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    syy += y * y;
  }
  double det = n * stt - st * st;
  if (det <= 0.0) throw std::runtime_error("convergence_rate: degenerate time values");
  RateFit fit;
  fit.samples = static_cast<int>(pts.size());
  fit.slope = (n * sty - st * sy) / det;
  double ss_tot = syy - sy * sy / n;
  double intercept = (sy - fit.slope * st) / n;
  double ss_res = 0.0;
  for (auto [t, y] : pts) {
    double e = y - (intercept + fit.slope * t);
    ss_res += e * e;
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace physarum
