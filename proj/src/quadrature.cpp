#include "slipstokes/quadrature.hpp"

#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "slipstokes/errors.hpp"

namespace slipstokes {

QuadratureRule gauss_legendre_unit(int n) {
  if (n < 1) throw UsageError("gauss_legendre_unit: n must be positive");
  // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
  Matrix jacobi = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  QuadratureRule rule;
  rule.dim = 1;
  for (int k = 0; k < n; ++k) {
    const double x = eig.eigenvalues()(k);
    const double v = eig.eigenvectors()(0, k);
    rule.points.push_back(Point(0.5 * (x + 1.0), 0.0, 0.0));
    rule.weights.push_back(v * v);  // 2 v^2 on [-1,1], halved on [0,1]
  }
  return rule;
}

QuadratureRule simplex_rule(int dim, int n) {
  const QuadratureRule g = gauss_legendre_unit(n);
  QuadratureRule rule;
  rule.dim = dim;
  if (dim == 1) {
    return QuadratureRule{1, g.points, g.weights};
  }
  if (dim == 2) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double u = g.points[i].x();
        const double v = g.points[j].x();
        rule.points.push_back(Point(u, v * (1.0 - u), 0.0));
        rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
      }
    }
    return rule;
  }
  if (dim == 3) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const double u = g.points[i].x();
          const double v = g.points[j].x();
          const double w = g.points[k].x();
          rule.points.push_back(Point(u, v * (1.0 - u), w * (1.0 - u) * (1.0 - v)));
          rule.weights.push_back(g.weights[i] * g.weights[j] * g.weights[k] *
                                 (1.0 - u) * (1.0 - u) * (1.0 - v));
        }
      }
    }
    return rule;
  }
  throw UsageError("simplex_rule: dimension must be 1, 2 or 3");
}

namespace {

using Simplex = std::vector<Point>;

std::vector<Simplex> refine(const Simplex& s) {
  auto mid = [&](int a, int b) -> Point { return 0.5 * (s[a] + s[b]); };
  if (s.size() == 3) {
    const Point m01 = mid(0, 1), m12 = mid(1, 2), m02 = mid(0, 2);
    return {{s[0], m01, m02}, {m01, s[1], m12}, {m02, m12, s[2]}, {m01, m12, m02}};
  }
  const Point m01 = mid(0, 1), m02 = mid(0, 2), m03 = mid(0, 3);
  const Point m12 = mid(1, 2), m13 = mid(1, 3), m23 = mid(2, 3);
  return {{s[0], m01, m02, m03}, {m01, s[1], m12, m13}, {m02, m12, s[2], m23},
          {m03, m13, m23, s[3]},  {m01, m02, m03, m13}, {m01, m02, m12, m13},
          {m02, m03, m13, m23},   {m02, m12, m13, m23}};
}

}  // namespace

QuadratureRule subdivided_simplex_rule(int dim, int n, int levels) {
  if (dim != 2 && dim != 3) throw UsageError("subdivided_simplex_rule: dimension must be 2 or 3");
  const QuadratureRule base = simplex_rule(dim, n);
  Simplex ref;
  ref.push_back(Point::Zero());
  for (int k = 0; k < dim; ++k) ref.push_back(Point::Unit(k));
  std::vector<Simplex> pieces{ref};
  for (int l = 0; l < levels; ++l) {
    std::vector<Simplex> next;
    for (const auto& p : pieces) {
      auto r = refine(p);
      next.insert(next.end(), r.begin(), r.end());
    }
    pieces = std::move(next);
  }
  const double scale = std::pow(2.0, -dim * levels);
  QuadratureRule rule;
  rule.dim = dim;
  for (const auto& p : pieces) {
    for (std::size_t q = 0; q < base.size(); ++q) {
      Point x = p[0];
      for (int k = 0; k < dim; ++k) x += base.points[q](k) * (p[k + 1] - p[0]);
      rule.points.push_back(x);
      rule.weights.push_back(base.weights[q] * scale);
    }
  }
  return rule;
}

}  // namespace slipstokes
