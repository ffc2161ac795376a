#include "slipstokes/lifting.hpp"

#include <cmath>
#include <cstdio>

#include "slipstokes/errors.hpp"
#include "slipstokes/quadrature.hpp"
#include "slipstokes/saddle.hpp"

namespace slipstokes {

namespace {

BoundaryTag node_priority_tag(const FunctionSpacePair& s, int n) {
  if (s.has_tag(n, BoundaryTag::GammaL)) return BoundaryTag::GammaL;
  if (s.has_tag(n, BoundaryTag::Gamma1)) return BoundaryTag::Gamma1;
  return BoundaryTag::Gamma0;
}

Point tangential_part(const Point& x, int d) {
  Point xp = Point::Zero();
  for (int k = 0; k < d - 1; ++k) xp(k) = x(k);
  return xp;
}

}  // namespace

Vector wall_data_interpolant(const FunctionSpacePair& s, const WallData& wall,
                             const std::function<double(const Point&)>& height) {
  const int d = s.dim;
  Vector g = Vector::Zero(s.num_velocity_full());
  for (int n = 0; n < s.num_nodes(); ++n) {
    if (!s.on_boundary(n)) continue;
    const Point x = s.nodes[n];
    const Point val = wall.value(node_priority_tag(s, n), x, height(tangential_part(x, d)), d);
    for (int c = 0; c < d; ++c) g(s.velocity_dof(n, c)) = val(c);
  }
  return g;
}

double wall_data_flux(const Mesh& mesh, const WallData& wall, const std::function<double(const Point&)>& height) {
  const int d = mesh.dim;
  const QuadratureRule rule = simplex_rule(d - 1, 4);
  const double ref_measure = d == 2 ? 1.0 : 0.5;
  double flux = 0.0;
  for (int f = 0; f < static_cast<int>(mesh.facets.size()); ++f) {
    const auto& facet = mesh.facets[f];
    const Point n = boundary_normal(mesh, f);
    const double meas = mesh.facet_measure(f) / ref_measure;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      Point x = mesh.vertices[facet.vertices[0]];
      for (int k = 0; k < d - 1; ++k)
        x += rule.points[q](k) * (mesh.vertices[facet.vertices[k + 1]] - mesh.vertices[facet.vertices[0]]);
      flux += rule.weights[q] * meas * wall.value(facet.tag, x, height(tangential_part(x, d)), d).dot(n);
    }
  }
  return flux;
}

LiftingField lifting_from_vector(const DiscreteOperators& ops, Vector G0) {
  LiftingField L;
  L.G0 = std::move(G0);
  L.norm_l2 = std::sqrt(std::max(0.0, L.G0.dot(ops.mass_full * L.G0)));
  L.norm_h1 = std::sqrt(std::max(0.0, L.G0.dot((ops.mass_full + ops.h1_full) * L.G0)));
  L.divergence_residual = (ops.divergence_full * L.G0).norm();
  return L;
}

LiftingField build_lifting(const DiscreteOperators& ops, const WallData& wall,
                           const std::function<double(const Point&)>& height) {
  const FunctionSpacePair& s = ops.space();
  const Mesh& mesh = *s.mesh;
  const int d = s.dim;

  // L1 norm of g for the flux tolerance.
  double scale = 0.0;
  {
    const QuadratureRule rule = simplex_rule(d - 1, 4);
    const double ref_measure = d == 2 ? 1.0 : 0.5;
    for (int f = 0; f < static_cast<int>(mesh.facets.size()); ++f) {
      const auto& facet = mesh.facets[f];
      const double meas = mesh.facet_measure(f) / ref_measure;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        Point x = mesh.vertices[facet.vertices[0]];
        for (int k = 0; k < d - 1; ++k)
          x += rule.points[q](k) * (mesh.vertices[facet.vertices[k + 1]] - mesh.vertices[facet.vertices[0]]);
        scale += rule.weights[q] * meas * wall.value(facet.tag, x, height(tangential_part(x, d)), d).norm();
      }
    }
  }
  const double flux = wall_data_flux(mesh, wall, height);
  if (std::abs(flux) > 1e-10 * scale) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.6e", flux);
    throw IncompatibleDataError(std::string("boundary data has net flux ") + buf + " through the boundary", flux);
  }

  const Vector g = wall_data_interpolant(s, wall, height);
  LiftingField L;
  if (g.isZero(0.0)) {
    L = lifting_from_vector(ops, g);
    L.boundary_flux = flux;
    return L;
  }

  // Interior dofs are the unknowns; every boundary node is prescribed.
  std::vector<int> interior;
  for (int n = 0; n < s.num_nodes(); ++n)
    if (!s.on_boundary(n))
      for (int c = 0; c < d; ++c) interior.push_back(s.velocity_dof(n, c));
  std::vector<Triplet> t;
  for (int i = 0; i < static_cast<int>(interior.size()); ++i) t.emplace_back(interior[i], i, 1.0);
  SparseMatrix P(s.num_velocity_full(), static_cast<int>(interior.size()));
  P.setFromTriplets(t.begin(), t.end());
  const SparseMatrix Pt = P.transpose();
  const SparseMatrix Aii = Pt * ops.viscous_full * P;
  const SparseMatrix Bi = ops.divergence_full * P;

  SaddleSolver solver(Aii, Bi, ops.pressure_mean);
  Vector rhs = Vector::Zero(solver.size());
  rhs.head(Aii.rows()) = -(Pt * (ops.viscous_full * g));
  rhs.segment(Aii.rows(), Bi.rows()) = -(ops.divergence_full * g);
  const Vector x = solver.solve(rhs);
  Vector G0 = g + P * x.head(Aii.rows());
  L = lifting_from_vector(ops, std::move(G0));
  L.boundary_flux = flux;
  return L;
}

}  // namespace slipstokes
