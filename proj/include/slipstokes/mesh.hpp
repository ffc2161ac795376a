#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slipstokes/types.hpp"

namespace slipstokes {

/// Boundary parts of the channel: the sliding bottom wall {x_d = 0}, the
/// fixed top wall {x_d = h(x')} and the lateral part.
enum class BoundaryTag { Gamma0, Gamma1, GammaL };

std::string_view to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(std::string_view name);

/// Channel Omega = {(x', x_d) : x' in omega, 0 < x_d < h(x')} with omega a box.
struct DomainSpec {
  int dimension = 2;
  /// Bounds of omega per tangential axis; only the first dimension-1 are used.
  std::array<std::array<double, 2>, 2> omega{{{0.0, 1.0}, {0.0, 1.0}}};
  /// Height h(x'); the argument is a Point whose first dimension-1 entries are x'.
  std::function<double(const Point&)> height = [](const Point&) { return 1.0; };
  double lipschitz = 0.0;
  double h_min = 1.0;
  double h_max = 1.0;

  /// Checks dimension, box bounds and h_min > 0; samples h on a 65^(d-1)
  /// grid and checks it against [h_min, h_max].
  void validate() const;
  /// Measure of omega (length in 2D, area in 3D).
  double omega_measure() const;
};

struct BoundaryFacet {
  std::array<int, 3> vertices{-1, -1, -1};  // first `dim` entries used
  BoundaryTag tag = BoundaryTag::GammaL;
  int cell = -1;  // owning cell
};

/// Conforming simplicial mesh with tagged boundary facets. Immutable once built.
struct Mesh {
  int dim = 2;
  std::vector<Point> vertices;
  std::vector<std::array<int, 4>> cells;  // first dim+1 entries used
  std::vector<BoundaryFacet> facets;

  int vertices_per_cell() const { return dim + 1; }
  double cell_volume(int cell) const;
  double facet_measure(int facet) const;
  /// Index of the boundary facet with this vertex set (any order), if any.
  std::optional<int> find_boundary_facet(const std::vector<int>& facet_vertices) const;
  /// Total measure of the facets carrying `tag`.
  double boundary_measure(BoundaryTag tag) const;
  /// Mean edge length over all cells.
  double mean_edge_length() const;
};

/// Structured mesh: omega split into a box grid, each column mapped
/// vertically by h(x'), quads split into two triangles and hexes into six
/// tetrahedra. `resolution` holds cells per axis (x_1, [x_2,] x_d).
Mesh build_mesh(const DomainSpec& spec, const std::vector<int>& resolution);

/// Unit outward normal of a boundary facet. Exactly -e_d on Gamma0.
Point boundary_normal(const Mesh& mesh, int boundary_facet);
/// Same, addressing the facet by its vertices; throws UsageError when the
/// vertex set is not a boundary facet.
Point boundary_normal(const Mesh& mesh, const std::vector<int>& facet_vertices);

/// ASCII dump: `MESH v1 dim=<d>`, vertices, cells, tagged facets.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

/// Re-derives owning cells of the facets and checks conformity; throws
/// GeometryError on degenerate cells or non-conforming facets.
void check_mesh(Mesh& mesh);

}  // namespace slipstokes
