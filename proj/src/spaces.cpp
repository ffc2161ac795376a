#include "slipstokes/spaces.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "slipstokes/errors.hpp"
#include "slipstokes/quadrature.hpp"

namespace slipstokes {

double Gamma0Quadrature::measure() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

Vector FunctionSpacePair::expand(const Vector& free) const {
  Vector full = Vector::Zero(num_velocity_full());
  for (int i = 0; i < num_velocity_free(); ++i) full(full_of_free[i]) = free(i);
  return full;
}

Vector FunctionSpacePair::restrict_to_free(const Vector& full) const {
  Vector free(num_velocity_free());
  for (int i = 0; i < num_velocity_free(); ++i) free(i) = full(full_of_free[i]);
  return free;
}

Point FunctionSpacePair::evaluate_velocity(const Vector& full, int cell, const Barycentric& lambda) const {
  double phi[10];
  p2_values(dim, lambda, phi);
  Point v = Point::Zero();
  const int n = p2_local_count(dim);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < dim; ++c) v(c) += phi[a] * full(velocity_dof(cell_nodes[cell][a], c));
  return v;
}

Eigen::Matrix3d FunctionSpacePair::velocity_gradient(const Vector& full, int cell, const Barycentric& lambda) const {
  const CellGeometry g = cell_geometry(*mesh, cell);
  Point grad[10];
  p2_gradients(dim, lambda, g.grad_lambda, grad);
  Eigen::Matrix3d du = Eigen::Matrix3d::Zero();
  const int n = p2_local_count(dim);
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < dim; ++c) du.row(c) += full(velocity_dof(cell_nodes[cell][a], c)) * grad[a].transpose();
  return du;
}

double FunctionSpacePair::evaluate_pressure(const Vector& p, int cell, const Barycentric& lambda) const {
  double v = 0.0;
  for (int a = 0; a <= dim; ++a) v += lambda(a) * p(mesh->cells[cell][a]);
  return v;
}

FunctionSpacePair build_spaces(std::shared_ptr<const Mesh> mesh_ptr) {
  const Mesh& mesh = *mesh_ptr;
  const int d = mesh.dim;
  bool has_gamma0 = false;
  for (const auto& f : mesh.facets) has_gamma0 = has_gamma0 || f.tag == BoundaryTag::Gamma0;
  if (!has_gamma0) throw ConfigurationError("mesh has no Gamma0 facet: the friction surface is absent");

  FunctionSpacePair s;
  s.mesh = mesh_ptr;
  s.dim = d;
  s.nodes = mesh.vertices;

  std::map<std::array<int, 2>, int> edge_node;
  const auto& edges = simplex_edges(d);
  s.cell_nodes.resize(mesh.cells.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    auto& cn = s.cell_nodes[c];
    cn.fill(-1);
    for (int k = 0; k <= d; ++k) cn[k] = mesh.cells[c][k];
    for (std::size_t e = 0; e < edges.size(); ++e) {
      int a = mesh.cells[c][edges[e][0]], b = mesh.cells[c][edges[e][1]];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_node.try_emplace({a, b}, static_cast<int>(s.nodes.size()));
      if (inserted) s.nodes.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
      cn[d + 1 + e] = it->second;
    }
  }

  const int nn = s.num_nodes();
  s.node_tags.assign(nn, 0);
  auto facet_nodes = [&](const BoundaryFacet& f) {
    std::vector<int> out(f.vertices.begin(), f.vertices.begin() + d);
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) {
        int u = f.vertices[a], v = f.vertices[b];
        if (u > v) std::swap(u, v);
        out.push_back(edge_node.at({u, v}));
      }
    }
    return out;
  };
  for (const auto& f : mesh.facets)
    for (int n : facet_nodes(f)) s.node_tags[n] |= static_cast<std::uint8_t>(1u << static_cast<int>(f.tag));

  s.node_kind.assign(nn, NodeKind::Interior);
  for (int n = 0; n < nn; ++n) {
    if (s.has_tag(n, BoundaryTag::Gamma1) || s.has_tag(n, BoundaryTag::GammaL))
      s.node_kind[n] = NodeKind::Dirichlet;
    else if (s.has_tag(n, BoundaryTag::Gamma0))
      s.node_kind[n] = NodeKind::Gamma0;
  }

  s.free_of_full.assign(s.num_velocity_full(), -1);
  for (int n = 0; n < nn; ++n) {
    for (int c = 0; c < d; ++c) {
      const bool free = s.node_kind[n] == NodeKind::Interior ||
                        (s.node_kind[n] == NodeKind::Gamma0 && c < d - 1);
      if (free) {
        s.free_of_full[s.velocity_dof(n, c)] = static_cast<int>(s.full_of_free.size());
        s.full_of_free.push_back(s.velocity_dof(n, c));
      }
    }
  }

  // Gamma0 quadrature, facets ordered by centroid so point ids follow x'.
  std::vector<int> bottom;
  for (int f = 0; f < static_cast<int>(mesh.facets.size()); ++f)
    if (mesh.facets[f].tag == BoundaryTag::Gamma0) bottom.push_back(f);
  auto centroid = [&](int f) {
    Point c = Point::Zero();
    for (int k = 0; k < d; ++k) c += mesh.vertices[mesh.facets[f].vertices[k]];
    return Point(c / d);
  };
  std::stable_sort(bottom.begin(), bottom.end(), [&](int a, int b) {
    const Point ca = centroid(a), cb = centroid(b);
    if (d == 3 && ca(1) != cb(1)) return ca(1) < cb(1);
    return ca(0) < cb(0);
  });

  const QuadratureRule rule = simplex_rule(d - 1, 3);
  s.gamma0.dim = d;
  for (int f : bottom) {
    const auto& facet = mesh.facets[f];
    const auto& cell = mesh.cells[facet.cell];
    const double meas = mesh.facet_measure(f) * (d == 2 ? 1.0 : 2.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      // Facet-local barycentrics.
      std::array<double, 3> w{};
      if (d == 2) {
        w = {1.0 - rule.points[q](0), rule.points[q](0), 0.0};
      } else {
        w = {1.0 - rule.points[q](0) - rule.points[q](1), rule.points[q](0), rule.points[q](1)};
      }
      Point x = Point::Zero();
      Barycentric lambda = Barycentric::Zero();
      for (int k = 0; k < d; ++k) {
        x += w[k] * mesh.vertices[facet.vertices[k]];
        for (int j = 0; j <= d; ++j)
          if (cell[j] == facet.vertices[k]) lambda(j) = w[k];
      }
      x(d - 1) = 0.0;
      s.gamma0.points.push_back(x);
      s.gamma0.weights.push_back(rule.weights[q] * meas);
      s.gamma0.cells.push_back(facet.cell);
      s.gamma0.lambdas.push_back(lambda);
      s.gamma0.facets.push_back(f);
    }
  }
  return s;
}

}  // namespace slipstokes
