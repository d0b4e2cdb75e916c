#include "physarum/cli.hpp"

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "physarum/dual_harmonic.hpp"
#include "physarum/io.hpp"
#include "physarum/log.hpp"

namespace physarum {

namespace {

struct SolveOptions {
  std::string file;
  std::string format;  // auto|dimacs|native
  double step = 0.05;
  double t_max = 200.0;
  double stop_tol = 1e-8;
  std::string integrator = "log-euler";
  std::string trace_path;
  std::string sigma0_path;
  bool json = false;
  bool strict = false;
  int jobs = 1;
};

void add_dynamics_flags(CLI::App* cmd, SolveOptions& o) {
  cmd->add_option("--step", o.step, "integrator step size");
  cmd->add_option("--t-max", o.t_max, "maximum dynamics time");
  cmd->add_option("--stop-tol", o.stop_tol, "kilter residual stopping tolerance");
  cmd->add_option("--integrator", o.integrator, "integrator: log-euler or euler")
      ->check(CLI::IsMember({"log-euler", "euler"}));
  cmd->add_option("--trace", o.trace_path, "write the trace CSV to this path");
  cmd->add_option("--sigma0", o.sigma0_path, "file with one positive sigma(0) per arc");
  cmd->add_flag("--json", o.json, "emit JSON instead of key=value text");
  cmd->add_flag("--strict", o.strict, "reject infeasible instances before integrating");
}

InstanceFile load_with_format(const SolveOptions& o) {
  if (o.format == "dimacs") return load_instance(o.file, InstanceFormat::dimacs);
  if (o.format == "native") return load_instance(o.file, InstanceFormat::native);
  return load_instance(o.file);
}

SolverConfig config_of(const SolveOptions& o) {
  SolverConfig cfg;
  cfg.step = o.step;
  cfg.t_max = o.t_max;
  cfg.stop_tol = o.stop_tol;
  cfg.integrator = o.integrator == "euler" ? Integrator::euler : Integrator::log_euler;
  cfg.strict_feasibility = o.strict;
  return cfg;
}

ArcVector initial_sigma(const InstanceFile& instance, const std::string& sigma0_path) {
  if (sigma0_path.empty())
    return ArcVector(static_cast<size_t>(instance.graph.arc_count()), 1.0);
  std::ifstream in(sigma0_path);
  if (!in) throw std::runtime_error("cannot open sigma0 file: " + sigma0_path);
  ArcVector sigma0;
  double v;
  while (in >> v) sigma0.push_back(v);
  if (static_cast<int>(sigma0.size()) != instance.graph.arc_count())
    throw std::invalid_argument("sigma0 file holds " + std::to_string(sigma0.size()) +
                                " values, expected " +
                                std::to_string(instance.graph.arc_count()));
  return sigma0;
}

int exit_code_for(const RunReport& rep) {
  if (!rep.feasible || rep.status == RunStatus::divergence_detected) return 2;
  if (rep.status == RunStatus::converged && rep.support_match) return 0;
  return 1;
}

int cmd_solve(const SolveOptions& o, std::ostream& out) {
  InstanceFile instance = load_with_format(o);
  RunReport rep;
  rep.instance = instance.name;
  if (!is_feasible(instance.graph, instance.sources)) {
    rep.feasible = false;
    out << (o.json ? report_json(rep) : report_text(rep));
    return 2;
  }
  SolverConfig cfg = config_of(o);
  ArcVector sigma0 = initial_sigma(instance, o.sigma0_path);
  RunResult result = run(instance.graph, instance.sources, sigma0, cfg);
  OptimalSet oracle = solve_exact(instance.graph, instance.sources);
  rep = build_report(instance.graph, instance.sources, result, oracle, cfg.support_tol);
  rep.instance = instance.name;
  if (!o.trace_path.empty()) {
    std::ofstream trace(o.trace_path);
    if (!trace) throw std::runtime_error("cannot open trace file: " + o.trace_path);
    write_trace_csv(trace, result.trace);
  }
  out << (o.json ? report_json(rep) : report_text(rep));
  return exit_code_for(rep);
}

int cmd_oracle(const SolveOptions& o, std::ostream& out) {
  InstanceFile instance = load_with_format(o);
  OptimalSet oracle = solve_exact(instance.graph, instance.sources);
  if (o.json) {
    nlohmann::json j;
    j["instance"] = instance.name;
    j["z_star"] = oracle.z_star;
    j["flow"] = oracle.witness_flow;
    j["h_hat"] = oracle.arcs_in_h_hat;
    j["pi"] = oracle.pi;
    out << j.dump(2) << "\n";
  } else {
    out << "instance=" << instance.name << "\n";
    out << "z_star=" << format_number(oracle.z_star) << "\n";
    out << "flow=";
    for (size_t a = 0; a < oracle.witness_flow.size(); ++a)
      out << (a ? "," : "") << format_number(oracle.witness_flow[a]);
    out << "\nh_hat=";
    for (size_t i = 0; i < oracle.arcs_in_h_hat.size(); ++i)
      out << (i ? "," : "") << oracle.arcs_in_h_hat[i];
    out << "\npi=";
    for (size_t i = 0; i < oracle.pi.size(); ++i)
      out << (i ? "," : "") << format_number(oracle.pi[i]);
    out << "\n";
  }
  return 0;
}

struct CompareOutcome {
  std::string text;
  bool ok = false;
};

CompareOutcome compare_one(const SolveOptions& o, const std::string& file) {
  SolveOptions local = o;
  local.file = file;
  std::ostringstream out;
  InstanceFile instance = load_with_format(local);
  out << "instance=" << instance.name << "\n";
  if (!is_feasible(instance.graph, instance.sources)) {
    out << "check_feasible=fail\n";
    return {out.str(), false};
  }
  SolverConfig cfg = config_of(local);
  ArcVector sigma0 = initial_sigma(instance, local.sigma0_path);
  RunResult result = run(instance.graph, instance.sources, sigma0, cfg);
  OptimalSet oracle = solve_exact(instance.graph, instance.sources);
  RunReport rep = build_report(instance.graph, instance.sources, result, oracle, cfg.support_tol);

  bool ok = true;
  auto check = [&](const std::string& label, bool pass) {
    out << "check_" << label << "=" << (pass ? "pass" : "fail") << "\n";
    ok = ok && pass;
  };
  check("converged", result.status == RunStatus::converged);
  check("cost_gap", rep.rel_gap <= 1e-6);
  check("support_match", rep.support_match);
  double max_psi = 0.0;
  const double threshold = cfg.support_tol * cut_bounds_fast(instance.graph, instance.sources).b_star_max;
  for (ArcId a = 0; a < instance.graph.arc_count(); ++a)
    if (result.state.sigma[static_cast<size_t>(a)] > threshold)
      max_psi = std::max(max_psi, result.solution.field[static_cast<size_t>(a)]);
  check("dual_feasible", max_psi <= 1.0 + 1e-6);
  if (rep.dual_connected && rep.dual_gap) {
    out << "dual_gap=" << format_number(*rep.dual_gap) << "\n";
  }
  out << "result=" << (ok ? "pass" : "fail") << "\n";
  return {out.str(), ok};
}

int cmd_compare(const SolveOptions& o, const std::vector<std::string>& files, std::ostream& out) {
  std::vector<CompareOutcome> outcomes(files.size());
  if (o.jobs > 1) {
    std::vector<std::future<CompareOutcome>> fut;
    fut.reserve(files.size());
    for (const std::string& f : files)
      fut.push_back(std::async(std::launch::async, compare_one, o, f));
    for (size_t i = 0; i < fut.size(); ++i) outcomes[i] = fut[i].get();
  } else {
    for (size_t i = 0; i < files.size(); ++i) outcomes[i] = compare_one(o, files[i]);
  }
  bool all_ok = true;
  for (const CompareOutcome& oc : outcomes) {
    out << oc.text;
    all_ok = all_ok && oc.ok;
  }
  return all_ok ? 0 : 1;
}

int cmd_dual(const SolveOptions& o, std::ostream& out) {
  InstanceFile instance = load_with_format(o);
  OptimalSet oracle = solve_exact(instance.graph, instance.sources);
  OptimalDual dual = dual_on_optimal_set(instance.graph, oracle);
  if (!dual.connected) {
    out << "dual_connected=false\n";
    out << "p_hat=";
    for (size_t i = 0; i < dual.p_hat.size(); ++i)
      out << (i ? "," : "") << (dual.on_h_hat[i] ? format_number(dual.p_hat[i]) : "-");
    out << "\n";
    return 1;
  }
  HarmonicExtension ext = build_extension(instance.graph, oracle.arcs_in_h_hat, dual.p_hat);
  if (o.json) {
    nlohmann::json j;
    j["instance"] = instance.name;
    j["h_star"] = ext.h_star;
    j["p_star"] = ext.p_star;
    j["slopes"] = ext.slopes;
    j["uncovered_nodes"] = ext.uncovered_nodes;
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& [r, arcs] : ext.level_sets) levels.push_back({{"slope", r}, {"arcs", arcs}});
    j["level_sets"] = levels;
    std::vector<NodeId> supp = instance.sources.support();
    HarmonicCheck hc = check_inf_harmonic(instance.graph, ext.h_star, ext.p_star, supp);
    j["violators"] = hc.violators;
    j["skipped"] = hc.skipped;
    out << j.dump(2) << "\n";
  } else {
    out << "instance=" << instance.name << "\n";
    out << "dual_connected=true\n";
    out << "h_star=";
    for (size_t i = 0; i < ext.h_star.size(); ++i) out << (i ? "," : "") << ext.h_star[i];
    out << "\np_star=";
    for (size_t i = 0; i < ext.p_star.size(); ++i)
      out << (i ? "," : "") << (ext.in_v_star[i] ? format_number(ext.p_star[i]) : "-");
    out << "\nslopes=";
    for (size_t i = 0; i < ext.slopes.size(); ++i)
      out << (i ? "," : "") << format_number(ext.slopes[i]);
    out << "\ncoverage=" << (instance.graph.node_count() - static_cast<int>(ext.uncovered_nodes.size()))
        << "/" << instance.graph.node_count() << "\n";
    std::vector<NodeId> supp = instance.sources.support();
    HarmonicCheck hc = check_inf_harmonic(instance.graph, ext.h_star, ext.p_star, supp);
    out << "violators=";
    for (size_t i = 0; i < hc.violators.size(); ++i) out << (i ? "," : "") << hc.violators[i];
    out << "\n";
  }
  return 0;
}

int cmd_check(const SolveOptions& o, std::ostream& out) {
  InstanceFile instance = load_with_format(o);
  bool feasible = is_feasible(instance.graph, instance.sources);
  out << "instance=" << instance.name << "\n";
  out << "feasible=" << (feasible ? "true" : "false") << "\n";
  return feasible ? 0 : 2;
}

int cmd_random(uint64_t seed, int nodes, int arcs, int lmax, int bmax, const std::string& out_path,
               std::ostream& out) {
  RandomSpec spec{seed, nodes, arcs, lmax, bmax};
  InstanceFile instance = random_instance(spec);
  std::string text = serialize_instance(instance);
  if (out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(out_path);
    if (!f) throw std::runtime_error("cannot open output file: " + out_path);
    f << text;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"non-symmetric physarum dynamics for the linear transshipment problem"};
  app.require_subcommand(1);

  SolveOptions solve_opts, oracle_opts, compare_opts, dual_opts, check_opts;
  std::vector<std::string> compare_files;
  uint64_t seed = 1;
  int rnd_nodes = 5, rnd_arcs = 8, rnd_lmax = 10, rnd_bmax = 3;
  std::string rnd_out;

  auto add_format = [](CLI::App* cmd, SolveOptions& o) {
    cmd->add_option("--format", o.format, "instance format: auto, dimacs or native")
        ->check(CLI::IsMember({"auto", "dimacs", "native"}));
  };

  CLI::App* solve = app.add_subcommand("solve", "integrate the dynamics and report against the oracle");
  solve->add_option("file", solve_opts.file, "instance file")->required();
  add_format(solve, solve_opts);
  add_dynamics_flags(solve, solve_opts);

  CLI::App* oracle = app.add_subcommand("oracle", "exact minimum-cost flow and optimal set");
  oracle->add_option("file", oracle_opts.file, "instance file")->required();
  add_format(oracle, oracle_opts);
  oracle->add_flag("--json", oracle_opts.json, "emit JSON");

  CLI::App* compare = app.add_subcommand("compare", "run dynamics and oracle, assert agreement");
  compare->add_option("files", compare_files, "instance files")->required();
  add_format(compare, compare_opts);
  add_dynamics_flags(compare, compare_opts);
  compare->add_option("--jobs", compare_opts.jobs, "run this many instances concurrently");

  CLI::App* dual = app.add_subcommand("dual", "infinity-harmonic dual extension of the optimal set");
  dual->add_option("file", dual_opts.file, "instance file")->required();
  add_format(dual, dual_opts);
  dual->add_flag("--json", dual_opts.json, "emit JSON");

  CLI::App* random = app.add_subcommand("random", "generate a deterministic feasible instance");
  random->add_option("--seed", seed, "generator seed");
  random->add_option("--nodes", rnd_nodes, "node count");
  random->add_option("--arcs", rnd_arcs, "arc count");
  random->add_option("--lmax", rnd_lmax, "maximum integer length");
  random->add_option("--bmax", rnd_bmax, "maximum |b| per node");
  random->add_option("-o,--output", rnd_out, "write to this file instead of stdout");

  CLI::App* check = app.add_subcommand("check", "exact combinatorial feasibility check");
  check->add_option("file", check_opts.file, "instance file")->required();
  add_format(check, check_opts);

  std::vector<char*> argv;
  std::vector<std::string> argv_storage;
  argv_storage.push_back("physarum");
  for (const std::string& a : args) argv_storage.push_back(a);
  for (std::string& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_opts, out);
    if (oracle->parsed()) return cmd_oracle(oracle_opts, out);
    if (compare->parsed()) return cmd_compare(compare_opts, compare_files, out);
    if (dual->parsed()) return cmd_dual(dual_opts, out);
    if (random->parsed()) return cmd_random(seed, rnd_nodes, rnd_arcs, rnd_lmax, rnd_bmax, rnd_out, out);
    if (check->parsed()) return cmd_check(check_opts, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}

}  // namespace physarum
