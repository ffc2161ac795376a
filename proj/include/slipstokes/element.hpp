#pragma once

#include <array>
#include <vector>

#include "slipstokes/mesh.hpp"
#include "slipstokes/types.hpp"

namespace slipstokes {

using Barycentric = Eigen::Vector4d;

/// Affine map of one simplex cell.
struct CellGeometry {
  int dim = 2;
  Point origin = Point::Zero();
  Eigen::Matrix3d jacobian = Eigen::Matrix3d::Identity();  // columns x_k - x_0
  Eigen::Matrix3d inverse = Eigen::Matrix3d::Identity();
  double volume = 0.0;
  std::array<Point, 4> grad_lambda{};  // physical gradients of barycentrics

  Point to_physical(const Point& ref) const { return origin + jacobian * ref; }
  Barycentric barycentric_of_reference(const Point& ref) const;
  Barycentric barycentric(const Point& x) const;
};

CellGeometry cell_geometry(const Mesh& mesh, int cell);

/// Local edges of the reference simplex, in the order used for P2 edge nodes.
const std::vector<std::array<int, 2>>& simplex_edges(int dim);

inline int p1_local_count(int dim) { return dim + 1; }
inline int p2_local_count(int dim) { return dim == 2 ? 6 : 10; }

/// P2 Lagrange basis values: vertex nodes first, then edge midpoints.
void p2_values(int dim, const Barycentric& lambda, double* out);
void p2_gradients(int dim, const Barycentric& lambda, const std::array<Point, 4>& grad_lambda, Point* out);

}  // namespace slipstokes
