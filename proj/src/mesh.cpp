#include "slipstokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "slipstokes/errors.hpp"

namespace slipstokes {

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Gamma0: return "Gamma0";
    case BoundaryTag::Gamma1: return "Gamma1";
    case BoundaryTag::GammaL: return "GammaL";
  }
  return "GammaL";
}

BoundaryTag boundary_tag_from_string(std::string_view name) {
  if (name == "Gamma0") return BoundaryTag::Gamma0;
  if (name == "Gamma1") return BoundaryTag::Gamma1;
  if (name == "GammaL") return BoundaryTag::GammaL;
  throw UsageError("unknown boundary tag '" + std::string(name) + "'");
}

namespace {

std::string format_point(const Point& x, int n) {
  std::ostringstream os;
  os << "(";
  for (int k = 0; k < n; ++k) os << (k ? ", " : "") << x(k);
  os << ")";
  return os.str();
}

// Signed measure factor: det of the edge matrix.
double simplex_det(const Mesh& mesh, const std::array<int, 4>& c) {
  const int d = mesh.dim;
  Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
  for (int k = 0; k < d; ++k)
    j.col(k).head(d) = (mesh.vertices[c[k + 1]] - mesh.vertices[c[0]]).head(d);
  if (d == 2) return j.topLeftCorner<2, 2>().determinant();
  return j.determinant();
}

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

using FacetKey = std::array<int, 3>;

FacetKey make_key(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  FacetKey k{-1, -1, -1};
  for (std::size_t i = 0; i < v.size(); ++i) k[i] = v[i];
  return k;
}

struct FacetUse {
  int count = 0;
  int cell = -1;
  std::vector<int> vertices;
};

std::map<FacetKey, FacetUse> collect_facets(const Mesh& mesh) {
  std::map<FacetKey, FacetUse> facets;
  const int nv = mesh.vertices_per_cell();
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    for (int skip = 0; skip < nv; ++skip) {
      std::vector<int> v;
      for (int k = 0; k < nv; ++k)
        if (k != skip) v.push_back(mesh.cells[c][k]);
      auto& use = facets[make_key(v)];
      if (use.count == 0) {
        use.cell = c;
        use.vertices = v;
      }
      ++use.count;
    }
  }
  return facets;
}

}  // namespace

void DomainSpec::validate() const {
  if (dimension != 2 && dimension != 3)
    throw GeometryError("dimension must be 2 or 3, got " + std::to_string(dimension));
  for (int k = 0; k < dimension - 1; ++k)
    if (!(omega[k][1] > omega[k][0])) throw GeometryError("omega box has empty extent on axis " + std::to_string(k));
  if (!(h_min > 0.0)) throw GeometryError("h_min must be positive");
  if (h_max < h_min) throw GeometryError("h_max must not be below h_min");
  if (!height) throw GeometryError("height function missing");
  const int n = 64;
  const int n2 = dimension == 3 ? n : 0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n2; ++j) {
      Point x = Point::Zero();
      x(0) = omega[0][0] + (omega[0][1] - omega[0][0]) * i / n;
      if (dimension == 3) x(1) = omega[1][0] + (omega[1][1] - omega[1][0]) * j / n;
      const double h = height(x);
      if (!(h > 0.0))
        throw GeometryError("non-positive height h=" + std::to_string(h) + " at x'=" +
                            format_point(x, dimension - 1));
      const double slack = 1e-12 * h_max;
      if (h < h_min - slack || h > h_max + slack)
        throw GeometryError("height h=" + std::to_string(h) + " at x'=" + format_point(x, dimension - 1) +
                            " outside declared [h_min, h_max]");
    }
  }
}

double DomainSpec::omega_measure() const {
  double m = 1.0;
  for (int k = 0; k < dimension - 1; ++k) m *= omega[k][1] - omega[k][0];
  return m;
}

double Mesh::cell_volume(int cell) const {
  return std::abs(simplex_det(*this, cells[cell])) / factorial(dim);
}

double Mesh::facet_measure(int facet) const {
  const auto& f = facets[facet];
  if (dim == 2) return (vertices[f.vertices[1]] - vertices[f.vertices[0]]).norm();
  const Point a = vertices[f.vertices[1]] - vertices[f.vertices[0]];
  const Point b = vertices[f.vertices[2]] - vertices[f.vertices[0]];
  return 0.5 * a.cross(b).norm();
}

std::optional<int> Mesh::find_boundary_facet(const std::vector<int>& facet_vertices) const {
  if (static_cast<int>(facet_vertices.size()) != dim) return std::nullopt;
  const FacetKey key = make_key(facet_vertices);
  for (int f = 0; f < static_cast<int>(facets.size()); ++f) {
    std::vector<int> v(facets[f].vertices.begin(), facets[f].vertices.begin() + dim);
    if (make_key(v) == key) return f;
  }
  return std::nullopt;
}

double Mesh::boundary_measure(BoundaryTag tag) const {
  double m = 0.0;
  for (int f = 0; f < static_cast<int>(facets.size()); ++f)
    if (facets[f].tag == tag) m += facet_measure(f);
  return m;
}

double Mesh::mean_edge_length() const {
  double sum = 0.0;
  long count = 0;
  const int nv = vertices_per_cell();
  for (const auto& c : cells) {
    for (int a = 0; a < nv; ++a) {
      for (int b = a + 1; b < nv; ++b) {
        sum += (vertices[c[a]] - vertices[c[b]]).norm();
        ++count;
      }
    }
  }
  return count ? sum / count : 0.0;
}

void check_mesh(Mesh& mesh) {
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c)
    if (!(mesh.cell_volume(c) > 0.0)) throw GeometryError("degenerate cell " + std::to_string(c));
  const auto uses = collect_facets(mesh);
  for (const auto& [key, use] : uses)
    if (use.count > 2) throw GeometryError("non-conforming mesh: facet shared by more than two cells");
  for (auto& f : mesh.facets) {
    std::vector<int> v(f.vertices.begin(), f.vertices.begin() + mesh.dim);
    auto it = uses.find(make_key(v));
    if (it == uses.end() || it->second.count != 1)
      throw GeometryError("tagged facet is not on the boundary");
    f.cell = it->second.cell;
  }
  int boundary = 0;
  for (const auto& [key, use] : uses) boundary += use.count == 1;
  if (boundary != static_cast<int>(mesh.facets.size()))
    throw GeometryError("untagged boundary facets present");
}

Mesh build_mesh(const DomainSpec& spec, const std::vector<int>& resolution) {
  spec.validate();
  const int d = spec.dimension;
  if (static_cast<int>(resolution.size()) != d)
    throw UsageError("resolution needs one entry per axis (" + std::to_string(d) + ")");
  for (int r : resolution)
    if (r < 2) throw UsageError("resolution must be at least 2 per axis");

  Mesh mesh;
  mesh.dim = d;
  const int nx = resolution[0];
  const int ny = d == 3 ? resolution[1] : 1;
  const int nz = resolution[d - 1];

  // Vertex (i, j, k): i along x_1, j along x_2 (3D only), k vertical.
  auto vid = [&](int i, int j, int k) { return (k * (ny + (d == 3 ? 1 : 0)) + (d == 3 ? j : 0)) * (nx + 1) + i; };
  const int nyv = d == 3 ? ny + 1 : 1;
  mesh.vertices.resize(static_cast<std::size_t>(nx + 1) * nyv * (nz + 1));
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j < nyv; ++j) {
      for (int i = 0; i <= nx; ++i) {
        Point x = Point::Zero();
        x(0) = spec.omega[0][0] + (spec.omega[0][1] - spec.omega[0][0]) * i / nx;
        if (d == 3) x(1) = spec.omega[1][0] + (spec.omega[1][1] - spec.omega[1][0]) * j / ny;
        const double h = spec.height(x);
        if (!(h > 0.0))
          throw GeometryError("non-positive height h=" + std::to_string(h) + " at x'=" + format_point(x, d - 1));
        x(d - 1) = (k == nz) ? h : h * k / nz;
        mesh.vertices[vid(i, j, k)] = x;
      }
    }
  }

  if (d == 2) {
    for (int k = 0; k < nz; ++k) {
      for (int i = 0; i < nx; ++i) {
        const int a = vid(i, 0, k), b = vid(i + 1, 0, k), c = vid(i + 1, 0, k + 1), e = vid(i, 0, k + 1);
        // Diagonal through the nearest domain corner, so no triangle has all
        // vertices on the boundary.
        const bool slash = (2 * i < nx) == (2 * k < nz);
        if (slash) {
          mesh.cells.push_back({a, b, c, -1});
          mesh.cells.push_back({a, c, e, -1});
        } else {
          mesh.cells.push_back({a, b, e, -1});
          mesh.cells.push_back({b, c, e, -1});
        }
      }
    }
  } else {
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k < nz; ++k) {
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
          for (const auto& p : perms) {
            std::array<int, 3> at{i, j, k};
            std::array<int, 4> tet{};
            tet[0] = vid(at[0], at[1], at[2]);
            for (int s = 0; s < 3; ++s) {
              ++at[p[s]];
              tet[s + 1] = vid(at[0], at[1], at[2]);
            }
            mesh.cells.push_back(tet);
          }
        }
      }
    }
  }
  for (auto& c : mesh.cells)
    if (simplex_det(mesh, c) < 0.0) std::swap(c[0], c[1]);

  const double tol = 1e-10 * spec.h_max;
  for (const auto& [key, use] : collect_facets(mesh)) {
    if (use.count > 2) throw GeometryError("non-conforming mesh");
    if (use.count != 1) continue;
    BoundaryFacet f;
    for (int k = 0; k < d; ++k) f.vertices[k] = use.vertices[k];
    f.cell = use.cell;
    bool bottom = true, top = true;
    for (int k = 0; k < d; ++k) {
      const Point& x = mesh.vertices[f.vertices[k]];
      bottom = bottom && std::abs(x(d - 1)) <= tol;
      top = top && std::abs(x(d - 1) - spec.height(x)) <= tol;
    }
    f.tag = bottom ? BoundaryTag::Gamma0 : (top ? BoundaryTag::Gamma1 : BoundaryTag::GammaL);
    mesh.facets.push_back(f);
  }
  return mesh;
}

Point boundary_normal(const Mesh& mesh, int boundary_facet) {
  if (boundary_facet < 0 || boundary_facet >= static_cast<int>(mesh.facets.size()))
    throw UsageError("boundary_normal: facet index out of range");
  const int d = mesh.dim;
  const auto& f = mesh.facets[boundary_facet];
  if (f.tag == BoundaryTag::Gamma0) return -Point::Unit(d - 1);
  const Point& x0 = mesh.vertices[f.vertices[0]];
  Point n = Point::Zero();
  if (d == 2) {
    const Point t = mesh.vertices[f.vertices[1]] - x0;
    n = Point(-t.y(), t.x(), 0.0);
  } else {
    n = (mesh.vertices[f.vertices[1]] - x0).cross(mesh.vertices[f.vertices[2]] - x0);
  }
  n.normalize();
  // Orient away from the vertex of the owning cell not on the facet.
  const auto& cell = mesh.cells[f.cell];
  for (int k = 0; k <= d; ++k) {
    const int v = cell[k];
    if (std::find(f.vertices.begin(), f.vertices.begin() + d, v) == f.vertices.begin() + d) {
      if (n.dot(mesh.vertices[v] - x0) > 0.0) n = -n;
      break;
    }
  }
  return n;
}

Point boundary_normal(const Mesh& mesh, const std::vector<int>& facet_vertices) {
  const auto f = mesh.find_boundary_facet(facet_vertices);
  if (!f) throw UsageError("boundary_normal: facet is not a boundary facet");
  return boundary_normal(mesh, *f);
}

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
  const int d = mesh.dim;
  out << "MESH v1 dim=" << d << "\n";
  out << mesh.vertices.size() << "\n";
  for (const auto& x : mesh.vertices) {
    for (int k = 0; k < d; ++k) out << (k ? " " : "") << fmt17(x(k));
    out << "\n";
  }
  out << mesh.cells.size() << "\n";
  for (const auto& c : mesh.cells) {
    for (int k = 0; k <= d; ++k) out << (k ? " " : "") << c[k];
    out << "\n";
  }
  out << mesh.facets.size() << "\n";
  for (const auto& f : mesh.facets) {
    for (int k = 0; k < d; ++k) out << f.vertices[k] << " ";
    out << to_string(f.tag) << "\n";
  }
}

Mesh read_mesh(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("mesh: empty input");
  int d = 0;
  if (std::sscanf(line.c_str(), "MESH v1 dim=%d", &d) != 1 || (d != 2 && d != 3))
    throw IoError("mesh: bad header '" + line + "'");
  Mesh mesh;
  mesh.dim = d;
  std::size_t n = 0;
  if (!(in >> n)) throw IoError("mesh: missing vertex count");
  mesh.vertices.assign(n, Point::Zero());
  for (auto& x : mesh.vertices) {
    for (int k = 0; k < d; ++k) {
      std::string tok;
      if (!(in >> tok)) throw IoError("mesh: truncated vertex block");
      x(k) = std::strtod(tok.c_str(), nullptr);
    }
  }
  if (!(in >> n)) throw IoError("mesh: missing cell count");
  mesh.cells.assign(n, {-1, -1, -1, -1});
  for (auto& c : mesh.cells)
    for (int k = 0; k <= d; ++k)
      if (!(in >> c[k])) throw IoError("mesh: truncated cell block");
  if (!(in >> n)) throw IoError("mesh: missing facet count");
  mesh.facets.resize(n);
  for (auto& f : mesh.facets) {
    for (int k = 0; k < d; ++k)
      if (!(in >> f.vertices[k])) throw IoError("mesh: truncated facet block");
    std::string tag;
    if (!(in >> tag)) throw IoError("mesh: missing facet tag");
    f.tag = boundary_tag_from_string(tag);
  }
  for (const auto& c : mesh.cells)
    for (int k = 0; k <= d; ++k)
      if (c[k] < 0 || c[k] >= static_cast<int>(mesh.vertices.size())) throw IoError("mesh: vertex index out of range");
  check_mesh(mesh);
  return mesh;
}

}  // namespace slipstokes
