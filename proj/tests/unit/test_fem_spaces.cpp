#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "slipstokes/errors.hpp"
#include "slipstokes/lifting.hpp"
#include "slipstokes/operators.hpp"

using namespace slipstokes;

namespace {

struct Discrete {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const FunctionSpacePair> spaces;
  DiscreteOperators ops;
};

DomainSpec box(double width, double height) {
  DomainSpec s;
  s.omega[0] = {0.0, width};
  s.height = [height](const Point&) { return height; };
  s.h_min = s.h_max = height;
  return s;
}

Discrete make(int n, double mu = 1.0, DomainSpec spec = box(1.0, 1.0)) {
  Discrete s;
  s.mesh = std::make_shared<const Mesh>(build_mesh(spec, {n, n}));
  s.spaces = std::make_shared<const FunctionSpacePair>(build_spaces(s.mesh));
  s.ops = assemble_operators(s.spaces, mu);
  return s;
}

double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
  const SparseMatrix d = a - b;
  double m = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

double max_abs(const SparseMatrix& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

}  // namespace

TEST(FemSpaces, Gamma0NodesKeepOnlyTangentialDofs) {
  const Discrete s = make(4);
  const FunctionSpacePair& sp = *s.spaces;
  int gamma0_nodes = 0;
  for (int n = 0; n < sp.num_nodes(); ++n) {
    const bool bottom = sp.nodes[n](1) == 0.0;
    const bool side = sp.nodes[n](0) == 0.0 || sp.nodes[n](0) == 1.0 || sp.nodes[n](1) == 1.0;
    if (bottom && !side) {
      ++gamma0_nodes;
      EXPECT_EQ(sp.node_kind[n], NodeKind::Gamma0);
      EXPECT_GE(sp.free_of_full[sp.velocity_dof(n, 0)], 0);
      EXPECT_EQ(sp.free_of_full[sp.velocity_dof(n, 1)], -1);
    } else if (side) {
      EXPECT_EQ(sp.free_of_full[sp.velocity_dof(n, 0)], -1);
      EXPECT_EQ(sp.free_of_full[sp.velocity_dof(n, 1)], -1);
    } else {
      EXPECT_GE(sp.free_of_full[sp.velocity_dof(n, 0)], 0);
      EXPECT_GE(sp.free_of_full[sp.velocity_dof(n, 1)], 0);
    }
  }
  EXPECT_EQ(gamma0_nodes, 7);  // 2 * 4 - 1 interior P2 nodes on the bottom edge
  EXPECT_EQ(sp.num_pressure(), 25);
}

TEST(FemSpaces, InfSupConstantDoesNotDegenerate) {
  std::vector<double> beta;
  for (int n : {2, 4, 8}) beta.push_back(inf_sup_constant(make(n).ops));
  for (double b : beta) EXPECT_GT(b, 1e-3);
  EXPECT_GT(beta.back(), 0.5 * beta.front());
}

TEST(FemSpaces, MeshWithoutGamma0IsConfigurationError) {
  Mesh m = build_mesh(box(1.0, 1.0), {4, 4});
  for (auto& f : m.facets)
    if (f.tag == BoundaryTag::Gamma0) f.tag = BoundaryTag::GammaL;
  EXPECT_THROW(build_spaces(std::make_shared<const Mesh>(m)), ConfigurationError);
}

TEST(FemSpaces, TranslationHasZeroViscousEnergy) {
  const Discrete s = make(4);
  const Vector u = s.spaces->interpolate([](const Point&) { return Point(1.0, 0.0, 0.0); });
  EXPECT_NEAR(u.dot(s.ops.viscous_full * u), 0.0, 1e-12);
  const Vector w = s.spaces->interpolate([](const Point&) { return Point(0.3, -0.7, 0.0); });
  EXPECT_NEAR(w.dot(s.ops.viscous_full * w), 0.0, 1e-12);
}

TEST(FemSpaces, ShearFieldEnergyMatchesHandIntegration) {
  // u = (x_2, 0): D12 = 1/2, so a(u, u) = int 2 mu * 2 * (1/4) = mu meas(Omega).
  for (double mu : {1.0, 2.5}) {
    const Discrete s = make(4, mu);
    const Vector u = s.spaces->interpolate([](const Point& x) { return Point(x(1), 0.0, 0.0); });
    EXPECT_NEAR(u.dot(s.ops.viscous_full * u), mu, 1e-12);
    EXPECT_NEAR(u.dot(s.ops.h1_full * u), 1.0, 1e-12);
    EXPECT_NEAR(u.dot(s.ops.mass_full * u), 1.0 / 3.0, 1e-12);
  }
}

TEST(FemSpaces, StretchedShearScalesWithArea) {
  // Same field on (0,2) x (0,2): a(u,u) = mu * 4.
  const Discrete s = make(4, 1.0, box(2.0, 2.0));
  const Vector u = s.spaces->interpolate([](const Point& x) { return Point(x(1), 0.0, 0.0); });
  EXPECT_NEAR(u.dot(s.ops.viscous_full * u), 4.0, 1e-11);
}

TEST(FemSpaces, ViscousMatrixIsLinearInMu) {
  const Discrete a = make(4, 1.0), b = make(4, 2.0);
  const SparseMatrix twice = 2.0 * a.ops.viscous_full;
  EXPECT_LE(max_abs_diff(b.ops.viscous_full, twice), 1e-14 * max_abs(twice));
}

TEST(FemSpaces, MatricesSymmetricAndDefinite) {
  const Discrete s = make(6);
  const SparseMatrix At = s.ops.viscous.transpose();
  EXPECT_LE(max_abs_diff(s.ops.viscous, At), 1e-12 * max_abs(s.ops.viscous));
  const SparseMatrix Mt = s.ops.mass.transpose();
  EXPECT_LE(max_abs_diff(s.ops.mass, Mt), 1e-12 * max_abs(s.ops.mass));
  Eigen::SimplicialLLT<SparseMatrix> chol(s.ops.mass);
  EXPECT_EQ(chol.info(), Eigen::Success);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(s.ops.viscous.rows());
    for (int i = 0; i < x.size(); ++i) x(i) = N(rng);
    EXPECT_GE(x.dot(s.ops.viscous * x), 0.0);
  }
}

TEST(FemSpaces, DivergenceOfQuadraticFieldIsExact) {
  // u = (x1^2, x1 x2): div u = 3 x1 lies in the pressure space, so B u = -Mp q.
  const Discrete s = make(4);
  const Vector u = s.spaces->interpolate([](const Point& x) { return Point(x(0) * x(0), x(0) * x(1), 0.0); });
  Vector q(s.spaces->num_pressure());
  for (int i = 0; i < q.size(); ++i) q(i) = 3.0 * s.mesh->vertices[i](0);
  const Vector r = s.ops.divergence_full * u + s.ops.pressure_mass * q;
  EXPECT_LT(r.norm(), 1e-13);
  // A divergence-free field.
  const Vector w = s.spaces->interpolate([](const Point& x) { return Point(x(0) * x(0), -2.0 * x(0) * x(1), 0.0); });
  EXPECT_LT((s.ops.divergence_full * w).norm(), 1e-13);
}

TEST(FemSpaces, CouetteLiftingIsTheShearProfile) {
  const Discrete s = make(6);
  WallData wall;
  wall.s = 1.0;
  wall.lateral = WallData::Lateral::Linear;
  wall.lateral_value = 1.0;
  const LiftingField G = build_lifting(s.ops, wall, [](const Point&) { return 1.0; });
  const Vector exact = s.spaces->interpolate([](const Point& x) { return Point(1.0 - x(1), 0.0, 0.0); });
  EXPECT_LT((G.G0 - exact).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(G.divergence_residual, 1e-10);
  EXPECT_NEAR(G.norm_h1 * G.norm_h1, 1.0 + 1.0 / 3.0, 1e-10);  // |grad|^2 + |u|^2
}

TEST(FemSpaces, ZeroDataGivesZeroLifting) {
  const Discrete s = make(4);
  const LiftingField G = build_lifting(s.ops, WallData{}, [](const Point&) { return 1.0; });
  EXPECT_EQ(G.G0.cwiseAbs().maxCoeff(), 0.0);
}

TEST(FemSpaces, NetInflowIsIncompatible) {
  // h = 1 + x: the lateral shear profile carries 0.5 in and 1.0 out.
  DomainSpec spec;
  spec.height = [](const Point& x) { return 1.0 + x(0); };
  spec.h_min = 1.0;
  spec.h_max = 2.0;
  const Discrete s = make(4, 1.0, spec);
  WallData wall;
  wall.lateral = WallData::Lateral::Linear;
  wall.lateral_value = 1.0;
  try {
    build_lifting(s.ops, wall, spec.height);
    FAIL() << "expected IncompatibleDataError";
  } catch (const IncompatibleDataError& e) {
    EXPECT_NEAR(std::abs(e.flux()), 0.5, 1e-12);
  }
}

TEST(FemSpaces, KornConstantBoundsAndScaling) {
  const double a1 = korn_coercivity_estimate(make(4, 1.0).ops);
  EXPECT_GT(a1, 0.0);
  EXPECT_LE(a1, 2.0);
  const double a2 = korn_coercivity_estimate(make(4, 2.0).ops);
  EXPECT_NEAR(a2, 2.0 * a1, 1e-8 * a1);
}

TEST(FemSpaces, KornConstantStabilizesUnderRefinement) {
  std::vector<double> a;
  for (int n : {4, 8, 16}) a.push_back(korn_coercivity_estimate(make(n).ops));
  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  EXPECT_LT((*hi - *lo) / *hi, 0.2);
}

TEST(FemSpaces, TripletExportHeader) {
  const Discrete s = make(2);
  std::ostringstream out;
  write_triplets(out, s.ops.mass, "M");
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "% M rows=" + std::to_string(s.ops.mass.rows()) + " cols=" + std::to_string(s.ops.mass.cols()) +
                        " nnz=" + std::to_string(s.ops.mass.nonZeros()));
  int r, c;
  double v, sum = 0.0;
  int count = 0;
  while (in >> r >> c >> v) {
    sum += v;
    ++count;
  }
  EXPECT_EQ(count, s.ops.mass.nonZeros());
  EXPECT_NEAR(sum, s.ops.mass.sum(), 1e-14);
}

TEST(FemSpaces, BoundaryTraceReproducesTangentialValues) {
  const Discrete s = make(4);
  const Vector u = s.spaces->interpolate([](const Point& x) { return Point(x(0) * x(0), 0.0, 0.0); });
  const Vector vt = s.ops.boundary_trace_full * u;
  const auto& g = s.spaces->gamma0;
  for (int q = 0; q < g.size(); ++q) EXPECT_NEAR(vt(q), g.points[q](0) * g.points[q](0), 1e-14);
  EXPECT_NEAR(s.ops.boundary_mass.sum(), 1.0, 1e-14);
}
