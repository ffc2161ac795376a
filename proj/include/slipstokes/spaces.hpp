#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "slipstokes/element.hpp"
#include "slipstokes/mesh.hpp"

namespace slipstokes {

/// Quadrature on the friction wall Gamma0. Thresholds, slip and traction
/// fields all live on these points.
struct Gamma0Quadrature {
  int dim = 2;
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<int> cells;
  std::vector<Barycentric> lambdas;  // barycentric coordinates in `cells`
  std::vector<int> facets;

  int size() const { return static_cast<int>(weights.size()); }
  int tangential() const { return dim - 1; }
  double measure() const;
};

enum class NodeKind : std::uint8_t {
  Interior,   // all components free
  Gamma0,     // normal (x_d) component eliminated
  Dirichlet,  // on the closure of Gamma1 or GammaL: all components fixed
};

/// Continuous P2 velocity / P1 pressure pair on a mesh. Velocity dofs are
/// numbered node * dim + component over all P2 nodes ("full" numbering);
/// the constrained space V0 keeps the free subset.
struct FunctionSpacePair {
  std::shared_ptr<const Mesh> mesh;
  int dim = 2;

  std::vector<Point> nodes;                   // P2 nodes: mesh vertices, then edge midpoints
  std::vector<std::array<int, 10>> cell_nodes;
  std::vector<NodeKind> node_kind;
  std::vector<std::uint8_t> node_tags;        // bit k set when on a facet tagged BoundaryTag(k)

  std::vector<int> free_of_full;              // -1 for constrained dofs
  std::vector<int> full_of_free;

  Gamma0Quadrature gamma0;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_velocity_full() const { return num_nodes() * dim; }
  int num_velocity_free() const { return static_cast<int>(full_of_free.size()); }
  int num_pressure() const { return static_cast<int>(mesh->vertices.size()); }
  int velocity_dof(int node, int component) const { return node * dim + component; }
  bool on_boundary(int node) const { return node_tags[node] != 0; }
  bool has_tag(int node, BoundaryTag tag) const {
    return (node_tags[node] >> static_cast<int>(tag)) & 1u;
  }

  /// Scatter free coefficients into the full numbering (zeros elsewhere).
  Vector expand(const Vector& free) const;
  /// Gather the free entries of a full vector.
  Vector restrict_to_free(const Vector& full) const;
  /// Evaluate a full-numbering velocity field at a point of a cell.
  Point evaluate_velocity(const Vector& full, int cell, const Barycentric& lambda) const;
  /// Velocity gradient (row i = gradient of component i) in a cell.
  Eigen::Matrix3d velocity_gradient(const Vector& full, int cell, const Barycentric& lambda) const;
  double evaluate_pressure(const Vector& p, int cell, const Barycentric& lambda) const;
  /// Nodal interpolation of a vector function into the full numbering.
  template <class F>
  Vector interpolate(F&& fn) const {
    Vector v = Vector::Zero(num_velocity_full());
    for (int n = 0; n < num_nodes(); ++n) {
      const Point val = fn(nodes[n]);
      for (int c = 0; c < dim; ++c) v(velocity_dof(n, c)) = val(c);
    }
    return v;
  }
};

/// Builds the P2/P1 pair. Throws ConfigurationError when the mesh has no
/// Gamma0 facet.
FunctionSpacePair build_spaces(std::shared_ptr<const Mesh> mesh);

}  // namespace slipstokes
