#include "physarum/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "physarum/dual_harmonic.hpp"
#include "physarum/log.hpp"

namespace physarum {

std::string format_number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<long long>(v));
    return std::string(buf, ptr);
  }
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string> split_lines(const std::string& bytes) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : bytes) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

double parse_real(const std::string& tok, int lineno) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw std::invalid_argument("parse: bad number '" + tok + "' on line " +
                                std::to_string(lineno));
  return v;
}

long long parse_int(const std::string& tok, int lineno) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw std::invalid_argument("parse: bad integer '" + tok + "' on line " +
                                std::to_string(lineno));
  return v;
}

InstanceFile parse_dimacs(const std::string& bytes) {
  InstanceFile out;
  out.format = InstanceFormat::dimacs;
  int n = -1;
  long long m_declared = -1;
  std::vector<Arc> arcs;
  NodeVector b;
  std::vector<char> node_seen;
  bool cap_warned = false;

  int lineno = 0;
  for (const std::string& line : split_lines(bytes)) {
    ++lineno;
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    const std::string& kind = toks[0];
    if (kind == "c") {
      out.comments.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    if (kind == "p") {
      if (n >= 0) throw std::invalid_argument("parse: repeated problem line (line " +
                                              std::to_string(lineno) + ")");
      if (toks.size() != 4 || toks[1] != "min")
        throw std::invalid_argument("parse: expected 'p min N M' on line " +
                                    std::to_string(lineno));
      n = static_cast<int>(parse_int(toks[2], lineno));
      m_declared = parse_int(toks[3], lineno);
      if (n < 0 || m_declared < 0)
        throw std::invalid_argument("parse: negative sizes on line " + std::to_string(lineno));
      b.assign(static_cast<size_t>(n), 0.0);
      node_seen.assign(static_cast<size_t>(n), 0);
      continue;
    }
    if (n < 0)
      throw std::invalid_argument("parse: '" + kind + "' before the problem line (line " +
                                  std::to_string(lineno) + ")");
    if (kind == "n") {
      if (toks.size() != 3)
        throw std::invalid_argument("parse: expected 'n id b' on line " + std::to_string(lineno));
      long long id = parse_int(toks[1], lineno);
      if (id < 1 || id > n)
        throw std::invalid_argument("parse: node id out of range on line " +
                                    std::to_string(lineno));
      if (node_seen[static_cast<size_t>(id - 1)])
        throw std::invalid_argument("parse: repeated node line for id " + std::to_string(id));
      node_seen[static_cast<size_t>(id - 1)] = 1;
      b[static_cast<size_t>(id - 1)] = parse_real(toks[2], lineno);
      continue;
    }
    if (kind == "a") {
      if (toks.size() != 6)
        throw std::invalid_argument("parse: expected 'a u v low cap cost' on line " +
                                    std::to_string(lineno));
      long long u = parse_int(toks[1], lineno), v = parse_int(toks[2], lineno);
      double low = parse_real(toks[3], lineno);
      double cap = parse_real(toks[4], lineno);
      double cost = parse_real(toks[5], lineno);
      if (u < 1 || u > n || v < 1 || v > n)
        throw std::invalid_argument("parse: arc endpoint out of range on line " +
                                    std::to_string(lineno));
      if (low != 0.0)
        throw std::invalid_argument("parse: nonzero lower bound unsupported (line " +
                                    std::to_string(lineno) + ")");
      if (cap != 0.0 && !cap_warned) {
        out.warnings.push_back("arc capacities are ignored (uncapacitated problem)");
        log::warn(out.warnings.back());
        cap_warned = true;
      }
      if (cost <= 0.0)
        throw std::invalid_argument("parse: arc cost must be positive (line " +
                                    std::to_string(lineno) + ")");
      arcs.push_back(Arc{static_cast<NodeId>(u - 1), static_cast<NodeId>(v - 1), cost});
      continue;
    }
    throw std::invalid_argument("parse: unknown line kind '" + kind + "' on line " +
                                std::to_string(lineno));
  }
  if (n < 0) throw std::invalid_argument("parse: missing problem line");
  if (static_cast<long long>(arcs.size()) != m_declared)
    throw std::invalid_argument("parse: expected " + std::to_string(m_declared) + " arcs, got " +
                                std::to_string(arcs.size()));
  out.graph = Digraph(n, std::move(arcs));
  out.sources = SourceVector(std::move(b));
  return out;
}

InstanceFile parse_native(const std::string& bytes) {
  InstanceFile out;
  out.format = InstanceFormat::native;
  std::vector<Arc> arcs;
  std::vector<std::pair<NodeId, double>> nodes;
  std::vector<NodeId> node_ids_seen;
  NodeId max_id = -1;

  int lineno = 0;
  for (const std::string& line : split_lines(bytes)) {
    ++lineno;
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (toks[0][0] == '#') {
      out.comments.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    if (toks[0] == "node") {
      if (toks.size() != 2 && toks.size() != 3)
        throw std::invalid_argument("parse: expected 'node id [b]' on line " +
                                    std::to_string(lineno));
      NodeId id = static_cast<NodeId>(parse_int(toks[1], lineno));
      if (id < 0) throw std::invalid_argument("parse: negative node id on line " +
                                              std::to_string(lineno));
      double bv = toks.size() == 3 ? parse_real(toks[2], lineno) : 0.0;
      for (const auto& [seen, unused] : nodes)
        if (seen == id)
          throw std::invalid_argument("parse: repeated node line for id " + std::to_string(id));
      nodes.emplace_back(id, bv);
      max_id = std::max(max_id, id);
      continue;
    }
    if (toks[0] == "arc") {
      if (toks.size() != 4)
        throw std::invalid_argument("parse: expected 'arc u v length' on line " +
                                    std::to_string(lineno));
      NodeId u = static_cast<NodeId>(parse_int(toks[1], lineno));
      NodeId v = static_cast<NodeId>(parse_int(toks[2], lineno));
      double len = parse_real(toks[3], lineno);
      if (u < 0 || v < 0)
        throw std::invalid_argument("parse: negative node id on line " + std::to_string(lineno));
      if (len <= 0.0)
        throw std::invalid_argument("parse: arc length must be positive (line " +
                                    std::to_string(lineno) + ")");
      arcs.push_back(Arc{u, v, len});
      max_id = std::max({max_id, u, v});
      continue;
    }
    throw std::invalid_argument("parse: unknown line kind '" + toks[0] + "' on line " +
                                std::to_string(lineno));
  }
  const int n = max_id + 1;
  NodeVector b(static_cast<size_t>(n), 0.0);
  for (const auto& [id, bv] : nodes) b[static_cast<size_t>(id)] = bv;
  out.graph = Digraph(n, std::move(arcs));
  out.sources = SourceVector(std::move(b));
  return out;
}

}  // namespace

InstanceFile parse_instance(const std::string& bytes, InstanceFormat format) {
  return format == InstanceFormat::dimacs ? parse_dimacs(bytes) : parse_native(bytes);
}

InstanceFile parse_instance_auto(const std::string& bytes, const std::string& name) {
  InstanceFormat format = InstanceFormat::native;
  for (const std::string& line : split_lines(bytes)) {
    auto toks = tokens_of(line);
    if (toks.empty()) continue;
    if (toks[0] == "c" || toks[0] == "p" || toks[0] == "n" || toks[0] == "a")
      format = InstanceFormat::dimacs;
    break;
  }
  InstanceFile out = parse_instance(bytes, format);
  out.name = name;
  return out;
}

std::string serialize_instance(const InstanceFile& instance) {
  std::ostringstream out;
  const Digraph& g = instance.graph;
  if (instance.format == InstanceFormat::dimacs) {
    for (const std::string& c : instance.comments) out << (c.empty() ? "c" : "c " + c) << "\n";
    out << "p min " << g.node_count() << " " << g.arc_count() << "\n";
    for (NodeId i = 0; i < g.node_count(); ++i)
      if (instance.sources[i] != 0.0)
        out << "n " << (i + 1) << " " << format_number(instance.sources[i]) << "\n";
    for (const Arc& e : g.arcs())
      out << "a " << (e.tail + 1) << " " << (e.head + 1) << " 0 0 " << format_number(e.length)
          << "\n";
  } else {
    for (const std::string& c : instance.comments) out << (c.empty() ? "#" : "# " + c) << "\n";
    for (NodeId i = 0; i < g.node_count(); ++i)
      out << "node " << i << " " << format_number(instance.sources[i]) << "\n";
    for (const Arc& e : g.arcs())
      out << "arc " << e.tail << " " << e.head << " " << format_number(e.length) << "\n";
  }
  return out.str();
}

InstanceFile load_instance(const std::string& path, std::optional<InstanceFormat> format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string name = path;
  if (auto pos = name.find_last_of('/'); pos != std::string::npos) name = name.substr(pos + 1);
  if (format) {
    InstanceFile out = parse_instance(buf.str(), *format);
    out.name = name;
    return out;
  }
  return parse_instance_auto(buf.str(), name);
}

namespace {

// Deterministic helpers on top of mt19937_64; std::uniform_int_distribution is
// implementation-defined, so draw with modulo instead.
int rand_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
}

}  // namespace

InstanceFile random_instance(const RandomSpec& spec) {
  const int n = spec.nodes;
  const int m = spec.arcs;
  if (n < 2) throw std::invalid_argument("random_instance: need at least two nodes");
  if (m < n - 1) throw std::invalid_argument("random_instance: need at least n-1 arcs");
  if (m > n * (n - 1)) throw std::invalid_argument("random_instance: too many arcs for simple digraph");
  if (spec.lmax < 1 || spec.bmax < 1)
    throw std::invalid_argument("random_instance: lmax and bmax must be at least 1");

  std::mt19937_64 rng(spec.seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    // Spanning-tree skeleton with random orientations keeps U(G) connected.
    std::vector<Arc> arcs;
    std::vector<std::vector<char>> present(static_cast<size_t>(n),
                                           std::vector<char>(static_cast<size_t>(n), 0));
    for (int i = 1; i < n; ++i) {
      int j = rand_int(rng, 0, i - 1);
      int u = i, v = j;
      if (rng() & 1) std::swap(u, v);
      arcs.push_back(Arc{u, v, static_cast<double>(rand_int(rng, 1, spec.lmax))});
      present[static_cast<size_t>(u)][static_cast<size_t>(v)] = 1;
    }
    int guard = 0;
    while (static_cast<int>(arcs.size()) < m && guard++ < 100000) {
      int u = rand_int(rng, 0, n - 1), v = rand_int(rng, 0, n - 1);
      if (u == v || present[static_cast<size_t>(u)][static_cast<size_t>(v)]) continue;
      present[static_cast<size_t>(u)][static_cast<size_t>(v)] = 1;
      arcs.push_back(Arc{u, v, static_cast<double>(rand_int(rng, 1, spec.lmax))});
    }
    if (static_cast<int>(arcs.size()) != m) continue;
    Digraph g(n, arcs);

    for (int btry = 0; btry < 200; ++btry) {
      NodeVector b(static_cast<size_t>(n), 0.0);
      int units = rand_int(rng, 1, std::max(1, n * spec.bmax / 2));
      for (int u = 0; u < units; ++u) {
        int i = rand_int(rng, 0, n - 1), j = rand_int(rng, 0, n - 1);
        if (i == j) continue;
        if (b[static_cast<size_t>(i)] < spec.bmax && b[static_cast<size_t>(j)] > -spec.bmax) {
          b[static_cast<size_t>(i)] += 1.0;
          b[static_cast<size_t>(j)] -= 1.0;
        }
      }
      SourceVector sources(b);
      if (sources.is_zero()) continue;
      if (!is_feasible(g, sources)) continue;
      InstanceFile out;
      out.format = InstanceFormat::native;
      out.graph = std::move(g);
      out.sources = std::move(sources);
      out.name = "random-s" + std::to_string(spec.seed) + "-n" + std::to_string(n) + "-m" +
                 std::to_string(m);
      return out;
    }
  }
  throw std::runtime_error("random_instance: generation cap exceeded");
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << "t,kilter_residual,max_psi_violation,flow_gap,cost,potential_norm\n";
  for (const TraceRecord& rec : trace) {
    out << format_number(rec.t) << "," << format_number(rec.kilter_residual) << ","
        << format_number(rec.max_psi_violation) << "," << format_number(rec.flow_gap) << ","
        << format_number(rec.cost) << "," << format_number(rec.potential_norm) << "\n";
  }
}

RunReport build_report(const Digraph& g, const SourceVector& b, const RunResult& run_result,
                       const OptimalSet& oracle, double support_tol) {
  RunReport rep;
  rep.status = run_result.status;
  rep.t_final = run_result.state.t;
  rep.kilter_residual =
      run_result.trace.empty() ? 0.0 : run_result.trace.back().kilter_residual;

  rep.cost = 0.0;
  for (ArcId a = 0; a < g.arc_count(); ++a)
    rep.cost += g.arc(a).length * run_result.solution.current[static_cast<size_t>(a)];
  rep.z_star = oracle.z_star;
  rep.rel_gap = oracle.z_star != 0.0 ? std::abs(rep.cost - oracle.z_star) / std::abs(oracle.z_star)
                                     : std::abs(rep.cost);

  const double threshold = support_tol * cut_bounds_fast(g, b).b_star_max;
  for (ArcId a = 0; a < g.arc_count(); ++a)
    if (run_result.state.sigma[static_cast<size_t>(a)] > threshold) rep.support.push_back(a);
  rep.h_hat = oracle.arcs_in_h_hat;
  rep.support_match = rep.support == rep.h_hat;

  if (run_result.trace.size() >= 2) {
    try {
      rep.rate = convergence_rate(run_result.trace, run_result.solution.current, 1e-11);
    } catch (const std::exception& e) {
      log::debug(std::string("rate fit skipped: ") + e.what());
    }
  }

  try {
    OptimalDual dual = dual_on_optimal_set(g, oracle);
    rep.dual_connected = dual.connected;
    if (dual.connected && run_result.status == RunStatus::converged) {
      HarmonicExtension ext = build_extension(g, oracle.arcs_in_h_hat, dual.p_hat);
      rep.dual_gap = dual_convergence_gap(run_result, ext);
    }
  } catch (const std::exception& e) {
    log::warn(std::string("dual extension skipped: ") + e.what());
  }
  return rep;
}

namespace {

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_time: return "max_time";
    case RunStatus::divergence_detected: return "divergence_detected";
  }
  return "unknown";
}

std::string join_arcs(const std::vector<ArcId>& arcs) {
  std::string s;
  for (size_t i = 0; i < arcs.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(arcs[i]);
  }
  return s;
}

}  // namespace

std::string report_text(const RunReport& report) {
  std::ostringstream out;
  if (!report.instance.empty()) out << "instance=" << report.instance << "\n";
  if (!report.feasible) {
    out << "status=infeasible\n";
    out << "reason=infeasible\n";
    return out.str();
  }
  out << "status=" << status_name(report.status) << "\n";
  out << "t_final=" << format_number(report.t_final) << "\n";
  out << "cost=" << format_number(report.cost) << "\n";
  out << "z_star=" << format_number(report.z_star) << "\n";
  out << "rel_gap=" << format_number(report.rel_gap) << "\n";
  out << "kilter_residual=" << format_number(report.kilter_residual) << "\n";
  out << "support=" << join_arcs(report.support) << "\n";
  out << "h_hat=" << join_arcs(report.h_hat) << "\n";
  out << "support_match=" << (report.support_match ? "true" : "false") << "\n";
  out << "dual_connected=" << (report.dual_connected ? "true" : "false") << "\n";
  if (report.dual_gap) out << "dual_gap=" << format_number(*report.dual_gap) << "\n";
  if (report.rate) {
    out << "rate_slope=" << format_number(report.rate->slope) << "\n";
    out << "rate_r2=" << format_number(report.rate->r_squared) << "\n";
  }
  return out.str();
}

std::string report_json(const RunReport& report) {
  nlohmann::json j;
  j["instance"] = report.instance;
  if (!report.feasible) {
    j["status"] = "infeasible";
    return j.dump(2) + "\n";
  }
  j["status"] = status_name(report.status);
  j["t_final"] = report.t_final;
  j["cost"] = report.cost;
  j["z_star"] = report.z_star;
  j["rel_gap"] = report.rel_gap;
  j["kilter_residual"] = report.kilter_residual;
  j["support"] = report.support;
  j["h_hat"] = report.h_hat;
  j["support_match"] = report.support_match;
  j["dual_connected"] = report.dual_connected;
  if (report.dual_gap) j["dual_gap"] = *report.dual_gap;
  if (report.rate) {
    j["rate_slope"] = report.rate->slope;
    j["rate_r2"] = report.rate->r_squared;
  }
  return j.dump(2) + "\n";
}

}  // namespace physarum
