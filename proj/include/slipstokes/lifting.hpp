#pragma once

#include <functional>

#include "slipstokes/operators.hpp"
#include "slipstokes/scenario.hpp"

namespace slipstokes {

/// Divergence-free extension G0 of the wall data into the domain.
struct LiftingField {
  Vector G0;  // full velocity numbering
  double norm_l2 = 0.0;
  double norm_h1 = 0.0;
  double divergence_residual = 0.0;  // ||B G0||
  double boundary_flux = 0.0;        // int over the boundary of g . n
};

/// Wall data at every boundary P2 node (full numbering, zero elsewhere).
/// Nodes on several parts take the lateral value first, then Gamma1, then Gamma0.
Vector wall_data_interpolant(const FunctionSpacePair& spaces, const WallData& wall,
                             const std::function<double(const Point&)>& height);

/// Net flux of g through the boundary (facet Gauss quadrature).
double wall_data_flux(const Mesh& mesh, const WallData& wall, const std::function<double(const Point&)>& height);

/// Auxiliary steady Stokes solve with g imposed on the whole boundary.
/// Throws IncompatibleDataError when |flux| exceeds 1e-10 ||g||_{L1}.
LiftingField build_lifting(const DiscreteOperators& ops, const WallData& wall,
                           const std::function<double(const Point&)>& height);

/// Wraps a given lifting vector and fills in its norms.
LiftingField lifting_from_vector(const DiscreteOperators& ops, Vector G0);

}  // namespace slipstokes
