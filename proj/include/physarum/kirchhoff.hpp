#pragma once

#include <map>

#include "physarum/graph.hpp"

namespace physarum {

// Potentials, fields and currents for one conductivity vector. The field is
// psi_ij = (p_i - p_j) / l_ij and the current obeys Ohm's law phi = sigma*psi.
// Within each connected component of the support graph the lowest potential
// is normalized to zero (Neumann case).
struct ElectricalSolution {
  NodeVector potential;
  ArcVector field;
  ArcVector current;
};

// Conductivities at or below this value are left out of the Laplacian; the
// support graph used for component analysis ignores them as well. Every
// positive conductance is kept by default: dropping decayed arcs too early
// disconnects their endpoints and zeroes potentials that the dual limit
// still constrains. The diagonally pivoted LDLT copes with the resulting
// spread of magnitudes at desk scale.
inline constexpr double kAssemblySupportTol = 0.0;

// Solve L(sigma) p = b where L(sigma) = B diag(sigma/l) B^T. Every connected
// component of the support graph must carry a balanced slice of b.
ElectricalSolution solve_neumann(const Digraph& g, const ArcVector& sigma, const SourceVector& b,
                                 double support_tol = kAssemblySupportTol);

// Solve (L(sigma) p)|_{V \ S} = 0 with p fixed on the boundary set S. Every
// support component must contain a boundary node.
ElectricalSolution solve_dirichlet(const Digraph& g, const ArcVector& sigma,
                                   const std::map<NodeId, double>& boundary,
                                   double support_tol = kAssemblySupportTol);

// psi = (B^T p) / l.
ArcVector field_of(const Digraph& g, const NodeVector& p);

}  // namespace physarum
