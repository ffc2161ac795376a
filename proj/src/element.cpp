#include "slipstokes/element.hpp"

#include <cmath>

namespace slipstokes {

Barycentric CellGeometry::barycentric_of_reference(const Point& ref) const {
  Barycentric l = Barycentric::Zero();
  double s = 0.0;
  for (int k = 0; k < dim; ++k) {
    l(k + 1) = ref(k);
    s += ref(k);
  }
  l(0) = 1.0 - s;
  return l;
}

Barycentric CellGeometry::barycentric(const Point& x) const {
  return barycentric_of_reference(inverse * (x - origin));
}

CellGeometry cell_geometry(const Mesh& mesh, int cell) {
  CellGeometry g;
  const int d = mesh.dim;
  g.dim = d;
  const auto& c = mesh.cells[cell];
  g.origin = mesh.vertices[c[0]];
  for (int k = 0; k < d; ++k) g.jacobian.col(k) = mesh.vertices[c[k + 1]] - g.origin;
  if (d == 2) g.jacobian(2, 2) = 1.0;
  const double det = g.jacobian.determinant();
  g.inverse = g.jacobian.inverse();
  g.volume = std::abs(det) / (d == 2 ? 2.0 : 6.0);
  // Rows of J^{-1} are the gradients of lambda_1..lambda_d.
  Point sum = Point::Zero();
  for (int k = 0; k < d; ++k) {
    Point gk = g.inverse.row(k).transpose();
    if (d == 2) gk(2) = 0.0;
    g.grad_lambda[k + 1] = gk;
    sum += gk;
  }
  g.grad_lambda[0] = -sum;
  return g;
}

const std::vector<std::array<int, 2>>& simplex_edges(int dim) {
  static const std::vector<std::array<int, 2>> tri{{0, 1}, {1, 2}, {2, 0}};
  static const std::vector<std::array<int, 2>> tet{{0, 1}, {1, 2}, {2, 0}, {0, 3}, {1, 3}, {2, 3}};
  return dim == 2 ? tri : tet;
}

void p2_values(int dim, const Barycentric& l, double* out) {
  for (int i = 0; i <= dim; ++i) out[i] = l(i) * (2.0 * l(i) - 1.0);
  const auto& edges = simplex_edges(dim);
  for (std::size_t e = 0; e < edges.size(); ++e) out[dim + 1 + e] = 4.0 * l(edges[e][0]) * l(edges[e][1]);
}

void p2_gradients(int dim, const Barycentric& l, const std::array<Point, 4>& gl, Point* out) {
  for (int i = 0; i <= dim; ++i) out[i] = (4.0 * l(i) - 1.0) * gl[i];
  const auto& edges = simplex_edges(dim);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int a = edges[e][0], b = edges[e][1];
    out[dim + 1 + e] = 4.0 * (l(a) * gl[b] + l(b) * gl[a]);
  }
}

}  // namespace slipstokes
