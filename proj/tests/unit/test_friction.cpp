#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "slipstokes/errors.hpp"
#include "slipstokes/friction.hpp"
#include "support.hpp"

using namespace slipstokes;

namespace {

// Gamma0 of the unit square: n facets, 3-point Gauss each.
std::shared_ptr<const FunctionSpacePair> unit_spaces(int n) {
  DomainSpec s;
  auto mesh = std::make_shared<const Mesh>(build_mesh(s, {n, 2}));
  return std::make_shared<const FunctionSpacePair>(build_spaces(mesh));
}

Vector weights_of(const Gamma0Quadrature& g) { return Eigen::Map<const Vector>(g.weights.data(), g.size()); }

Vector random_field(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> N(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = N(rng);
  return v;
}

}  // namespace

TEST(Friction, EnergyOfConstantSlip) {
  auto sp = unit_spaces(4);
  const Vector w = weights_of(sp->gamma0);
  const int nq = sp->gamma0.size();
  EXPECT_NEAR(friction_energy(Vector::Constant(nq, 3.0), Vector::Constant(nq, 2.0), w, 1, 0.0), 6.0, 1e-14);
  EXPECT_NEAR(friction_energy(Vector::Zero(nq), Vector::Constant(nq, 2.0), w, 1, 1.0), 2.0, 1e-14);
}

TEST(Friction, EnergyOfSmoothSlipMatchesAdaptiveQuadrature) {
  const double pi = std::acos(-1.0), eps = 0.1;
  const double oracle = testing_support::adaptive_simpson(
      [&](double x) { return std::sqrt(eps * eps + std::pow(std::sin(pi * x), 2)); }, 0.0, 1.0, 1e-14);
  auto sp = unit_spaces(64);
  const auto& g = sp->gamma0;
  Vector vt(g.size());
  for (int q = 0; q < g.size(); ++q) vt(q) = std::sin(pi * g.points[q](0));
  const double e = friction_energy(vt, Vector::Ones(g.size()), weights_of(g), 1, eps);
  EXPECT_NEAR(e, oracle, 1e-8);
}

TEST(Friction, LayoutMismatchIsUsageError) {
  const Vector w = Vector::Ones(4);
  EXPECT_THROW(friction_energy(Vector::Zero(5), Vector::Ones(4), w, 1, 0.1), UsageError);
  EXPECT_THROW(friction_energy(Vector::Zero(4), Vector::Ones(4), Vector::Ones(3), 1, 0.1), UsageError);
  EXPECT_THROW(friction_force(Vector::Zero(7), Vector::Ones(4), 2, 0.1), UsageError);
}

TEST(Friction, ForceAtZeroSlipAndBound) {
  const Vector ell = Vector::Ones(3);
  EXPECT_EQ(friction_force(Vector::Zero(3), ell, 1, 1e-3).cwiseAbs().maxCoeff(), 0.0);
  const double eps = 1e-3;
  const Vector f = friction_force(Vector::Constant(3, 100.0 * eps), ell, 1, eps);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(f(i), 100.0 / std::sqrt(10001.0), 1e-14);
    EXPECT_LT(f(i), 1.0);
  }
  EXPECT_THROW(friction_force(Vector::Zero(3), ell, 1, 0.0), UsageError);
  EXPECT_THROW(friction_jacobian(Vector::Zero(3), ell, 1, 0.0), UsageError);
}

TEST(Friction, ForceIsBoundedPointwise) {
  std::mt19937_64 rng(11);
  for (int k : {1, 2}) {
    const int nq = 50;
    const Vector v = random_field(rng, nq * k, 1e-2);
    const Vector ell = random_field(rng, nq, 1.0).cwiseAbs();
    const double eps = 1e-3;
    const Vector f = friction_force(v, ell, k, eps);
    for (int q = 0; q < nq; ++q) {
      const double r = v.segment(q * k, k).norm();
      EXPECT_LE(f.segment(q * k, k).norm(), ell(q) * r / std::sqrt(eps * eps + r * r) * (1 + 1e-14));
      EXPECT_LT(f.segment(q * k, k).norm(), ell(q));
    }
  }
}

TEST(Friction, ForceIsTheGradientOfTheEnergy) {
  std::mt19937_64 rng(3);
  for (int k : {1, 2}) {
    const int nq = 30;
    const Vector v = random_field(rng, nq * k, 0.05);
    const Vector ell = random_field(rng, nq, 1.0).cwiseAbs();
    const Vector w = random_field(rng, nq, 1.0).cwiseAbs();
    const Vector dir = random_field(rng, nq * k, 1.0);
    const double eps = 1e-2;
    Vector wk(nq * k);
    for (int q = 0; q < nq; ++q) wk.segment(q * k, k).setConstant(w(q));
    const double exact = wk.cwiseProduct(friction_force(v, ell, k, eps)).dot(dir);
    // Directional difference at step 1e-7.
    const double h = 1e-7;
    const double fd = (friction_energy(v + h * dir, ell, w, k, eps) - friction_energy(v - h * dir, ell, w, k, eps)) /
                      (2 * h);
    EXPECT_NEAR(fd, exact, 1e-6 * std::abs(exact));
    // Second order: halving the step divides the central-difference error by about 4.
    auto err = [&](double s) {
      return std::abs((friction_energy(v + s * dir, ell, w, k, eps) - friction_energy(v - s * dir, ell, w, k, eps)) /
                          (2 * s) -
                      exact);
    };
    const double e1 = err(1e-3), e2 = err(5e-4);
    EXPECT_GT(e1 / e2, 3.5);
    EXPECT_LT(e1 / e2, 4.5);
  }
}

TEST(Friction, JacobianAtZeroIsScaledIdentity) {
  const double ell = 2.0, eps = 1e-3;
  const Matrix J = friction_jacobian_block(Vector::Zero(2), ell, eps);
  EXPECT_NEAR((J - ell / eps * Matrix::Identity(2, 2)).norm(), 0.0, 1e-9);
}

TEST(Friction, JacobianEigenvaluesBracketed) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector v = random_field(rng, 2, 1e-2);
    const double ell = 0.5 + trial * 0.01, eps = 1e-3;
    const Matrix J = friction_jacobian_block(v, ell, eps);
    EXPECT_LE((J - J.transpose()).norm(), 1e-12 * J.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> es(J);
    const double r2 = eps * eps + v.squaredNorm();
    const double lo = ell * eps * eps / std::pow(r2, 1.5), hi = ell / std::sqrt(r2);
    EXPECT_GE(es.eigenvalues().minCoeff(), lo * (1 - 1e-10));
    EXPECT_LE(es.eigenvalues().maxCoeff(), hi * (1 + 1e-10));
    EXPECT_NEAR(es.eigenvalues().minCoeff(), lo, 1e-8 * hi);
    EXPECT_NEAR(es.eigenvalues().maxCoeff(), hi, 1e-8 * hi);
  }
}

TEST(Friction, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (int k : {1, 2}) {
    const int nq = 20;
    const Vector v = random_field(rng, nq * k, 0.02);
    const Vector ell = random_field(rng, nq, 1.0).cwiseAbs();
    const double eps = 1e-2;
    const Matrix J = Matrix(friction_jacobian(v, ell, k, eps));
    Matrix fd(nq * k, nq * k);
    const double h = 1e-7;
    for (int j = 0; j < nq * k; ++j) {
      Vector p = v, m = v;
      p(j) += h;
      m(j) -= h;
      fd.col(j) = (friction_force(p, ell, k, eps) - friction_force(m, ell, k, eps)) / (2 * h);
    }
    EXPECT_LE((fd - J).norm(), 1e-5 * J.norm());
  }
}

TEST(Friction, EnergyIsConvex) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + trial % 2, nq = 12;
    const Vector u = random_field(rng, nq * k, 1.0), v = random_field(rng, nq * k, 1.0);
    const Vector ell = random_field(rng, nq, 1.0).cwiseAbs();
    const Vector w = random_field(rng, nq, 1.0).cwiseAbs();
    const double eps = trial % 3 == 0 ? 0.0 : 1e-2;
    const double mid = friction_energy(0.5 * (u + v), ell, w, k, eps);
    const double mean = 0.5 * (friction_energy(u, ell, w, k, eps) + friction_energy(v, ell, w, k, eps));
    EXPECT_LE(mid, mean * (1 + 1e-14));
  }
}

TEST(Friction, RegularizationGapIsBoundedByEpsTimesThreshold) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + trial % 2, nq = 10;
    const Vector v = random_field(rng, nq * k, trial % 5 == 0 ? 0.0 : 0.1);
    const Vector ell = random_field(rng, nq, 1.0).cwiseAbs();
    const Vector w = random_field(rng, nq, 1.0).cwiseAbs();
    const double eps = std::pow(10.0, -(trial % 5));
    const double gap = friction_energy(v, ell, w, k, eps) - friction_energy(v, ell, w, k, 0.0);
    EXPECT_GE(gap, 0.0);
    EXPECT_LE(gap, eps * w.dot(ell) * (1 + 1e-12));
  }
}

TEST(Friction, ComplementarityBranches) {
  const int nq = 4;
  const Vector w = Vector::Constant(nq, 0.25), ell = Vector::Constant(nq, 0.5);
  // Slip branch: sigma_t = -ell slip / |slip|.
  Vector slip(nq);
  slip << 0.3, -0.2, 1.0, -2.0;
  Vector sigma(nq);
  for (int q = 0; q < nq; ++q) sigma(q) = -ell(q) * slip(q) / std::abs(slip(q));
  Complementarity c = complementarity_residual(sigma, slip, ell, w, 1);
  EXPECT_NEAR(c.infeasibility, 0.0, 1e-15);
  EXPECT_NEAR(c.alignment, 0.0, 1e-15);
  // Stick branch.
  c = complementarity_residual(Vector::Constant(nq, 0.25), Vector::Zero(nq), ell, w, 1);
  EXPECT_EQ(c.infeasibility, 0.0);
  EXPECT_EQ(c.alignment, 0.0);
  // Over the bound.
  c = complementarity_residual(Vector::Constant(nq, 1.0), Vector::Zero(nq), ell, w, 1);
  EXPECT_NEAR(c.infeasibility, 0.5, 1e-15);
}

TEST(Friction, ThresholdCsvRoundTripAndValidation) {
  auto sp = unit_spaces(4);
  const auto grid = uniform_time_grid(0.25, 4);
  ASSERT_EQ(grid.size(), 5u);
  EXPECT_EQ(grid.back(), 1.0);
  ThresholdField f = make_threshold(grid, sp->gamma0.size(), [](double t) { return 0.1 + t / 3.0; });
  f.validate();
  std::ostringstream out;
  write_threshold_csv(out, f, sp->gamma0);
  std::istringstream in(out.str());
  const ThresholdField r = read_threshold_csv(in, sp->gamma0);
  EXPECT_EQ(r.time_grid, f.time_grid);
  EXPECT_EQ((r.values - f.values).cwiseAbs().maxCoeff(), 0.0);
  f.values(2, 3) = -1e-3;
  EXPECT_THROW(f.validate(), DataError);
}
