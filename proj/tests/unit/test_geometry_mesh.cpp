#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "slipstokes/errors.hpp"
#include "slipstokes/mesh.hpp"
#include "support.hpp"

using namespace slipstokes;

namespace {

DomainSpec channel(std::function<double(double)> h, double h_min, double h_max, int dim = 2) {
  DomainSpec s;
  s.dimension = dim;
  s.height = [h](const Point& x) { return h(x(0)); };
  s.h_min = h_min;
  s.h_max = h_max;
  return s;
}

}  // namespace

TEST(GeometryMesh, FlatChannelGamma0MeasureIsExact) {
  const Mesh m = build_mesh(channel([](double) { return 1.0; }, 1.0, 1.0), {4, 4});
  EXPECT_DOUBLE_EQ(m.boundary_measure(BoundaryTag::Gamma0), 1.0);
  EXPECT_DOUBLE_EQ(m.boundary_measure(BoundaryTag::Gamma1), 1.0);
  EXPECT_DOUBLE_EQ(m.boundary_measure(BoundaryTag::GammaL), 2.0);
  double vol = 0.0;
  for (std::size_t c = 0; c < m.cells.size(); ++c) vol += m.cell_volume(static_cast<int>(c));
  EXPECT_NEAR(vol, 1.0, 1e-14);
}

TEST(GeometryMesh, SlopedTopArcLengthMatchesQuadratureOracle) {
  auto h = [](double x) { return 1.0 + 0.1 * x; };
  const double oracle = testing_support::adaptive_simpson([](double) { return std::sqrt(1.0 + 0.01); }, 0.0, 1.0);
  for (int n : {4, 8, 16}) {
    const Mesh m = build_mesh(channel(h, 1.0, 1.1), {n, n});
    EXPECT_NEAR(m.boundary_measure(BoundaryTag::Gamma1), oracle, 1e-12) << "n=" << n;
  }
  EXPECT_NEAR(oracle, 1.004987562112089, 1e-12);
}

TEST(GeometryMesh, CurvedTopArcLengthConverges) {
  const double pi = std::acos(-1.0);
  auto h = [pi](double x) { return 1.0 + 0.1 * std::sin(pi * x); };
  const double oracle = testing_support::adaptive_simpson(
      [pi](double x) {
        const double d = 0.1 * pi * std::cos(pi * x);
        return std::sqrt(1.0 + d * d);
      },
      0.0, 1.0, 1e-14);
  double prev = 1.0;
  for (int n : {4, 8, 16, 32}) {
    const Mesh m = build_mesh(channel(h, 1.0, 1.1), {n, 4});
    const double err = std::abs(m.boundary_measure(BoundaryTag::Gamma1) - oracle);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(GeometryMesh, NonPositiveHeightIsRejected) {
  EXPECT_THROW(build_mesh(channel([](double) { return -1.0; }, 0.5, 1.0), {4, 4}), GeometryError);
  DomainSpec s = channel([](double x) { return x < 0.5 ? 1.0 : -1.0; }, 0.5, 1.0);
  try {
    build_mesh(s, {4, 4});
    FAIL() << "expected GeometryError";
  } catch (const GeometryError& e) {
    EXPECT_NE(std::string(e.what()).find("x'="), std::string::npos) << e.what();
  }
}

TEST(GeometryMesh, ResolutionBelowTwoIsRejected) {
  EXPECT_THROW(build_mesh(channel([](double) { return 1.0; }, 1.0, 1.0), {1, 4}), UsageError);
}

TEST(GeometryMesh, BoundaryNormals) {
  const Mesh m = build_mesh(channel([](double) { return 1.0; }, 1.0, 1.0), {4, 4});
  int left = 0;
  for (int f = 0; f < static_cast<int>(m.facets.size()); ++f) {
    const Point n = boundary_normal(m, f);
    switch (m.facets[f].tag) {
      case BoundaryTag::Gamma0:
        EXPECT_EQ(n(0), 0.0);
        EXPECT_EQ(n(1), -1.0);
        break;
      case BoundaryTag::Gamma1:
        EXPECT_NEAR(n(0), 0.0, 1e-15);
        EXPECT_NEAR(n(1), 1.0, 1e-15);
        break;
      case BoundaryTag::GammaL: {
        const Point a = m.vertices[m.facets[f].vertices[0]];
        if (a(0) == 0.0) {
          ++left;
          EXPECT_NEAR(n(0), -1.0, 1e-15);
          EXPECT_NEAR(n(1), 0.0, 1e-15);
        }
        break;
      }
    }
  }
  EXPECT_EQ(left, 4);
}

TEST(GeometryMesh, Gamma0NormalExactOnSlopedChannel3D) {
  DomainSpec s = channel([](double x) { return 1.0 + 0.2 * x; }, 1.0, 1.2, 3);
  const Mesh m = build_mesh(s, {2, 2, 2});
  int count = 0;
  for (int f = 0; f < static_cast<int>(m.facets.size()); ++f) {
    if (m.facets[f].tag != BoundaryTag::Gamma0) continue;
    const Point n = boundary_normal(m, f);
    EXPECT_EQ(n(0), 0.0);
    EXPECT_EQ(n(1), 0.0);
    EXPECT_EQ(n(2), -1.0);
    ++count;
  }
  EXPECT_EQ(count, 8);
  EXPECT_NEAR(m.boundary_measure(BoundaryTag::Gamma0), 1.0, 1e-14);
}

TEST(GeometryMesh, InteriorFacetNormalIsUsageError) {
  const Mesh m = build_mesh(channel([](double) { return 1.0; }, 1.0, 1.0), {4, 4});
  // Two vertices of one cell that are not both on the boundary.
  for (const auto& c : m.cells) {
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        const std::vector<int> fv{c[a], c[b]};
        if (!m.find_boundary_facet(fv)) {
          EXPECT_THROW(boundary_normal(m, fv), UsageError);
          return;
        }
      }
    }
  }
  FAIL() << "no interior facet found";
}

TEST(GeometryMesh, DivergenceIdentityOnConstants) {
  const double pi = std::acos(-1.0);
  for (int dim : {2, 3}) {
    DomainSpec s = channel([pi](double x) { return 1.0 + 0.1 * std::sin(pi * x); }, 1.0, 1.1, dim);
    const Mesh m = build_mesh(s, dim == 2 ? std::vector<int>{8, 8} : std::vector<int>{3, 3, 3});
    Point sum = Point::Zero();
    double area = 0.0;
    for (int f = 0; f < static_cast<int>(m.facets.size()); ++f) {
      sum += boundary_normal(m, f) * m.facet_measure(f);
      area += m.facet_measure(f);
    }
    EXPECT_LT(sum.norm(), 1e-12 * area) << "dim=" << dim;
  }
}

TEST(GeometryMesh, HausdorffDistanceHalvesUnderRefinement) {
  const double pi = std::acos(-1.0);
  auto h = [pi](double x) { return 1.0 + 0.1 * std::sin(pi * x); };
  auto distance = [&](int n) {
    const Mesh m = build_mesh(channel(h, 1.0, 1.1), {n, 4});
    double worst = 0.0;
    for (const auto& f : m.facets) {
      if (f.tag != BoundaryTag::Gamma1) continue;
      const Point a = m.vertices[f.vertices[0]], b = m.vertices[f.vertices[1]];
      for (int k = 0; k <= 64; ++k) {
        const Point x = a + (b - a) * (k / 64.0);
        worst = std::max(worst, std::abs(x(1) - h(x(0))));
      }
    }
    return worst;
  };
  double prev = distance(4);
  for (int n : {8, 16, 32}) {
    const double d = distance(n);
    EXPECT_LE(d, prev / 2.0) << "n=" << n;
    prev = d;
  }
}

TEST(GeometryMesh, DumpRoundTripIsBitExact) {
  const double pi = std::acos(-1.0);
  for (int dim : {2, 3}) {
    DomainSpec s = channel([pi](double x) { return 1.0 + 0.1 * std::sin(pi * x); }, 1.0, 1.1, dim);
    const Mesh m = build_mesh(s, dim == 2 ? std::vector<int>{5, 3} : std::vector<int>{2, 3, 2});
    std::ostringstream a;
    write_mesh(a, m);
    EXPECT_EQ(a.str().rfind("MESH v1 dim=" + std::to_string(dim), 0), 0u);
    std::istringstream in(a.str());
    const Mesh r = read_mesh(in);
    ASSERT_EQ(r.vertices.size(), m.vertices.size());
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
      for (int c = 0; c < dim; ++c) EXPECT_EQ(r.vertices[i](c), m.vertices[i](c));
    EXPECT_EQ(r.cells, m.cells);
    ASSERT_EQ(r.facets.size(), m.facets.size());
    for (std::size_t f = 0; f < m.facets.size(); ++f) EXPECT_EQ(r.facets[f].tag, m.facets[f].tag);
    std::ostringstream b;
    write_mesh(b, r);
    EXPECT_EQ(a.str(), b.str());
  }
}

TEST(GeometryMesh, TagNamesRoundTrip) {
  for (BoundaryTag t : {BoundaryTag::Gamma0, BoundaryTag::Gamma1, BoundaryTag::GammaL})
    EXPECT_EQ(boundary_tag_from_string(to_string(t)), t);
  EXPECT_THROW(boundary_tag_from_string("Gamma7"), UsageError);
}
