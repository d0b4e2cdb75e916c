#include "physarum/kirchhoff.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace physarum {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
};

void check_sigma(const Digraph& g, const ArcVector& sigma) {
  if (static_cast<int>(sigma.size()) != g.arc_count())
    throw std::invalid_argument("kirchhoff: sigma size mismatch");
  for (double s : sigma) {
    if (!std::isfinite(s) || s < 0.0)
      throw std::invalid_argument("kirchhoff: sigma must be finite and nonnegative");
  }
}

// Component label per node of the support graph {a : sigma_a > tol}.
std::vector<int> support_components(const Digraph& g, const ArcVector& sigma, double tol,
                                    int* component_count) {
  UnionFind uf(g.node_count());
  for (ArcId a = 0; a < g.arc_count(); ++a)
    if (sigma[static_cast<size_t>(a)] > tol) uf.unite(g.arc(a).tail, g.arc(a).head);
  std::vector<int> label(static_cast<size_t>(g.node_count()), -1);
  int next = 0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    int r = uf.find(i);
    if (label[static_cast<size_t>(r)] < 0) label[static_cast<size_t>(r)] = next++;
    label[static_cast<size_t>(i)] = label[static_cast<size_t>(r)];
  }
  *component_count = next;
  return label;
}

Eigen::MatrixXd assemble_laplacian(const Digraph& g, const ArcVector& sigma, double tol) {
  const int n = g.node_count();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (ArcId a = 0; a < g.arc_count(); ++a) {
    if (sigma[static_cast<size_t>(a)] <= tol) continue;
    const Arc& e = g.arc(a);
    const double c = sigma[static_cast<size_t>(a)] / e.length;
    L(e.tail, e.tail) += c;
    L(e.head, e.head) += c;
    L(e.tail, e.head) -= c;
    L(e.head, e.tail) -= c;
  }
  return L;
}

ElectricalSolution finish(const Digraph& g, const ArcVector& sigma, NodeVector p) {
  ElectricalSolution sol;
  sol.field = field_of(g, p);
  sol.current.resize(sigma.size());
  for (size_t a = 0; a < sigma.size(); ++a) sol.current[a] = sigma[a] * sol.field[a];
  sol.potential = std::move(p);
  return sol;
}

}  // namespace

ArcVector field_of(const Digraph& g, const NodeVector& p) {
  if (static_cast<int>(p.size()) != g.node_count())
    throw std::invalid_argument("field_of: potential size mismatch");
  ArcVector psi(static_cast<size_t>(g.arc_count()));
  for (ArcId a = 0; a < g.arc_count(); ++a) {
    const Arc& e = g.arc(a);
    psi[static_cast<size_t>(a)] =
        (p[static_cast<size_t>(e.tail)] - p[static_cast<size_t>(e.head)]) / e.length;
  }
  return psi;
}

ElectricalSolution solve_neumann(const Digraph& g, const ArcVector& sigma, const SourceVector& b,
                                 double support_tol) {
  check_sigma(g, sigma);
  const int n = g.node_count();
  if (b.size() != n) throw std::invalid_argument("solve_neumann: source vector size mismatch");

  int ncomp = 0;
  std::vector<int> comp = support_components(g, sigma, support_tol, &ncomp);

  double bnorm = 0.0;
  for (double v : b.values()) bnorm = std::max(bnorm, std::abs(v));
  std::vector<double> comp_sum(static_cast<size_t>(ncomp), 0.0);
  for (NodeId i = 0; i < n; ++i) comp_sum[static_cast<size_t>(comp[static_cast<size_t>(i)])] += b[i];
  for (int c = 0; c < ncomp; ++c) {
    if (std::abs(comp_sum[static_cast<size_t>(c)]) > 1e-9 * std::max(1.0, bnorm))
      throw std::invalid_argument(
          "solve_neumann: inconsistent source, support component has net supply " +
          std::to_string(comp_sum[static_cast<size_t>(c)]));
  }

  // Ground the first node of each component and solve the reduced SPD system.
  std::vector<int> reduced_index(static_cast<size_t>(n), -1);
  std::vector<char> grounded(static_cast<size_t>(ncomp), 0);
  int nr = 0;
  for (NodeId i = 0; i < n; ++i) {
    int c = comp[static_cast<size_t>(i)];
    if (!grounded[static_cast<size_t>(c)]) {
      grounded[static_cast<size_t>(c)] = 1;
    } else {
      reduced_index[static_cast<size_t>(i)] = nr++;
    }
  }

  Eigen::MatrixXd L = assemble_laplacian(g, sigma, support_tol);
  NodeVector p(static_cast<size_t>(n), 0.0);
  if (nr > 0) {
    Eigen::MatrixXd Lr(nr, nr);
    Eigen::VectorXd br(nr);
    for (NodeId i = 0; i < n; ++i) {
      int ri = reduced_index[static_cast<size_t>(i)];
      if (ri < 0) continue;
      br(ri) = b[i];
      for (NodeId j = 0; j < n; ++j) {
        int rj = reduced_index[static_cast<size_t>(j)];
        if (rj >= 0) Lr(ri, rj) = L(i, j);
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Lr);
    Eigen::VectorXd pr = ldlt.solve(br);

    auto residual_norm = [&](const Eigen::VectorXd& x) {
      return (br - Lr * x).lpNorm<Eigen::Infinity>();
    };
    const double scale = std::max(1.0, bnorm);
    if (residual_norm(pr) > 1e-10 * scale) {
      // One step of iterative refinement before giving up.
      pr += ldlt.solve(br - Lr * pr);
    }
    const double res = residual_norm(pr);
    if (!pr.allFinite() || res > 1e-6 * scale)
      throw std::runtime_error("solve_neumann: reduced system solve failed, residual " +
                               std::to_string(res));
    for (NodeId i = 0; i < n; ++i) {
      int ri = reduced_index[static_cast<size_t>(i)];
      if (ri >= 0) p[static_cast<size_t>(i)] = pr(ri);
    }
  }

  // Lowest potential in each support component is zero.
  std::vector<double> comp_min(static_cast<size_t>(ncomp),
                               std::numeric_limits<double>::infinity());
  for (NodeId i = 0; i < n; ++i) {
    auto& m = comp_min[static_cast<size_t>(comp[static_cast<size_t>(i)])];
    m = std::min(m, p[static_cast<size_t>(i)]);
  }
  for (NodeId i = 0; i < n; ++i) p[static_cast<size_t>(i)] -= comp_min[static_cast<size_t>(comp[static_cast<size_t>(i)])];

  return finish(g, sigma, std::move(p));
}

ElectricalSolution solve_dirichlet(const Digraph& g, const ArcVector& sigma,
                                   const std::map<NodeId, double>& boundary, double support_tol) {
  check_sigma(g, sigma);
  const int n = g.node_count();
  if (boundary.empty()) throw std::invalid_argument("solve_dirichlet: empty boundary set");

  std::vector<char> is_boundary(static_cast<size_t>(n), 0);
  for (const auto& [node, value] : boundary) {
    if (node < 0 || node >= n) throw std::invalid_argument("solve_dirichlet: boundary node out of range");
    if (!std::isfinite(value)) throw std::invalid_argument("solve_dirichlet: non-finite boundary value");
    is_boundary[static_cast<size_t>(node)] = 1;
  }

  int ncomp = 0;
  std::vector<int> comp = support_components(g, sigma, support_tol, &ncomp);
  std::vector<char> touched(static_cast<size_t>(ncomp), 0);
  for (const auto& [node, value] : boundary) touched[static_cast<size_t>(comp[static_cast<size_t>(node)])] = 1;
  for (NodeId i = 0; i < n; ++i)
    if (!touched[static_cast<size_t>(comp[static_cast<size_t>(i)])])
      throw std::invalid_argument(
          "solve_dirichlet: underdetermined, support component of node " + std::to_string(i) +
          " contains no boundary node");

  std::vector<int> interior_index(static_cast<size_t>(n), -1);
  int ni = 0;
  for (NodeId i = 0; i < n; ++i)
    if (!is_boundary[static_cast<size_t>(i)]) interior_index[static_cast<size_t>(i)] = ni++;

  NodeVector p(static_cast<size_t>(n), 0.0);
  for (const auto& [node, value] : boundary) p[static_cast<size_t>(node)] = value;

  if (ni > 0) {
    Eigen::MatrixXd L = assemble_laplacian(g, sigma, support_tol);
    Eigen::MatrixXd Lii(ni, ni);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ni);
    for (NodeId i = 0; i < n; ++i) {
      int ii = interior_index[static_cast<size_t>(i)];
      if (ii < 0) continue;
      for (NodeId j = 0; j < n; ++j) {
        int ij = interior_index[static_cast<size_t>(j)];
        if (ij >= 0)
          Lii(ii, ij) = L(i, j);
        else
          rhs(ii) -= L(i, j) * p[static_cast<size_t>(j)];
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Lii);
    Eigen::VectorXd pi = ldlt.solve(rhs);
    pi += ldlt.solve(rhs - Lii * pi);
    if (!pi.allFinite()) throw std::runtime_error("solve_dirichlet: interior solve failed");
    for (NodeId i = 0; i < n; ++i) {
      int ii = interior_index[static_cast<size_t>(i)];
      if (ii >= 0) p[static_cast<size_t>(i)] = pi(ii);
    }
  }

  return finish(g, sigma, std::move(p));
}

}  // namespace physarum
