#pragma once

#include <vector>

#include "slipstokes/types.hpp"

namespace slipstokes {

/// Quadrature rule on a reference domain. Points are stored in reference
/// coordinates (first `dim` components used).
struct QuadratureRule {
  int dim = 0;
  std::vector<Point> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

/// n-point Gauss-Legendre rule on [0, 1].
QuadratureRule gauss_legendre_unit(int n);

/// Collapsed (Duffy) Gauss rule on the reference simplex of dimension 1, 2
/// or 3 with `n` points per direction. The 1-simplex is [0, 1].
QuadratureRule simplex_rule(int dim, int n);

/// Simplex rule refined by uniform subdivision: each edge split `levels`
/// times by halving (4^levels sub-triangles in 2D, 8^levels sub-tets in 3D).
QuadratureRule subdivided_simplex_rule(int dim, int n, int levels);

}  // namespace slipstokes
