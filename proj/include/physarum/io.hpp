#pragma once

#include <iosfwd>
#include <optional>

#include "physarum/dynamics.hpp"
#include "physarum/oracle.hpp"

namespace physarum {

enum class InstanceFormat { dimacs, native };

struct InstanceFile {
  InstanceFormat format = InstanceFormat::native;
  Digraph graph;
  SourceVector sources;
  std::string name;
  std::vector<std::string> comments;
  std::vector<std::string> warnings;  // e.g. ignored DIMACS capacities
};

InstanceFile parse_instance(const std::string& bytes, InstanceFormat format);

// Sniffs DIMACS ("c"/"p" lines) versus the native edge-list format.
InstanceFile parse_instance_auto(const std::string& bytes, const std::string& name = "");

// Canonical form; parse(serialize(x)) reproduces x and serialize is a fixed
// point on canonical inputs.
std::string serialize_instance(const InstanceFile& instance);

InstanceFile load_instance(const std::string& path,
                           std::optional<InstanceFormat> format = std::nullopt);

struct RandomSpec {
  uint64_t seed = 1;
  int nodes = 5;
  int arcs = 8;
  int lmax = 10;
  int bmax = 3;
};

// Deterministic connected feasible instance: spanning-tree skeleton plus
// random extra arcs, integer lengths in [1, lmax], balanced integer sources
// with ||b||_inf <= bmax, rejection-sampled until feasible.
InstanceFile random_instance(const RandomSpec& spec);

// Integers bare, otherwise the shortest round-trip decimal form.
std::string format_number(double v);

// Fixed schema: t,kilter_residual,max_psi_violation,flow_gap,cost,potential_norm
void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace);

struct RunReport {
  std::string instance;
  bool feasible = true;
  RunStatus status = RunStatus::max_time;
  double t_final = 0.0;
  double cost = 0.0;    // l^T phi at the final state
  double z_star = 0.0;
  double rel_gap = 0.0;
  double kilter_residual = 0.0;
  std::vector<ArcId> support;  // arcs with sigma above the support threshold
  std::vector<ArcId> h_hat;
  bool support_match = false;
  bool dual_connected = false;
  std::optional<double> dual_gap;
  std::optional<RateFit> rate;
};

RunReport build_report(const Digraph& g, const SourceVector& b, const RunResult& run_result,
                       const OptimalSet& oracle, double support_tol);

std::string report_text(const RunReport& report);
std::string report_json(const RunReport& report);

}  // namespace physarum
