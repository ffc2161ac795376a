#include "slipstokes/friction.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "slipstokes/errors.hpp"

namespace slipstokes {

namespace {

void check_layout(const Vector& vt, const Vector& ell, int k, const char* who) {
  if (k < 1 || vt.size() != ell.size() * k)
    throw UsageError(std::string(who) + ": tangential field has " + std::to_string(vt.size()) + " entries, expected " +
                     std::to_string(ell.size() * k));
}

}  // namespace

void ThresholdField::validate() const {
  if (static_cast<int>(values.rows()) != num_times()) throw UsageError("threshold: values/time grid size mismatch");
  for (int n = 1; n < num_times(); ++n)
    if (!(time_grid[n] > time_grid[n - 1])) throw UsageError("threshold: time grid not strictly increasing");
  if (values.size() > 0 && values.minCoeff() < 0.0) throw DataError("threshold values must be nonnegative");
}

std::vector<double> uniform_time_grid(double dt, int steps) {
  std::vector<double> g(steps + 1);
  for (int n = 0; n <= steps; ++n) g[n] = n * dt;
  return g;
}

void write_threshold_csv(std::ostream& out, const ThresholdField& ell, const Gamma0Quadrature& quad) {
  if (ell.num_points() != quad.size()) throw UsageError("write_threshold_csv: quadrature layout mismatch");
  const int k = quad.tangential();
  out << "time,quad_point_id,x1" << (k == 2 ? ",x2" : "") << ",value\n";
  char buf[256];
  for (int n = 0; n < ell.num_times(); ++n) {
    for (int q = 0; q < quad.size(); ++q) {
      if (k == 1)
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g\n", ell.time_grid[n], q, quad.points[q](0),
                      ell.values(n, q));
      else
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g\n", ell.time_grid[n], q, quad.points[q](0),
                      quad.points[q](1), ell.values(n, q));
      out << buf;
    }
  }
}

ThresholdField read_threshold_csv(std::istream& in, const Gamma0Quadrature& quad) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("threshold CSV: empty input");
  const int k = quad.tangential();
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 3 + k) throw IoError("threshold CSV: bad row '" + line + "'");
    const double t = std::stod(cells[0]);
    const int q = std::stoi(cells[1]);
    if (q < 0 || q >= quad.size()) throw IoError("threshold CSV: quad point id out of range");
    if (times.empty() || t != times.back()) {
      times.push_back(t);
      rows.emplace_back(quad.size(), std::nan(""));
    }
    rows.back()[q] = std::stod(cells.back());
  }
  ThresholdField f;
  f.time_grid = times;
  f.values.resize(static_cast<int>(times.size()), quad.size());
  for (std::size_t n = 0; n < rows.size(); ++n)
    for (int q = 0; q < quad.size(); ++q) {
      if (std::isnan(rows[n][q])) throw IoError("threshold CSV: missing value");
      f.values(static_cast<int>(n), q) = rows[n][q];
    }
  f.validate();
  return f;
}

double friction_energy(const Vector& vt, const Vector& ell, const Vector& weights, int k, double eps) {
  check_layout(vt, ell, k, "friction_energy");
  if (weights.size() != ell.size()) throw UsageError("friction_energy: weights layout mismatch");
  if (eps < 0.0) throw UsageError("friction_energy: eps must be nonnegative");
  double e = 0.0;
  for (int q = 0; q < ell.size(); ++q) {
    const double v2 = vt.segment(q * k, k).squaredNorm();
    e += weights(q) * ell(q) * std::sqrt(eps * eps + v2);
  }
  return e;
}

Vector friction_force(const Vector& vt, const Vector& ell, int k, double eps) {
  check_layout(vt, ell, k, "friction_force");
  if (!(eps > 0.0)) throw UsageError("friction_force: eps must be positive");
  Vector f(vt.size());
  for (int q = 0; q < ell.size(); ++q) {
    const auto v = vt.segment(q * k, k);
    f.segment(q * k, k) = ell(q) / std::sqrt(eps * eps + v.squaredNorm()) * v;
  }
  return f;
}

Matrix friction_jacobian_block(const Vector& v, double ell, double eps) {
  if (!(eps > 0.0)) throw UsageError("friction_jacobian: eps must be positive");
  const double r2 = eps * eps + v.squaredNorm();
  const double r = std::sqrt(r2);
  return ell * (Matrix::Identity(v.size(), v.size()) / r - v * v.transpose() / (r2 * r));
}

SparseMatrix friction_jacobian(const Vector& vt, const Vector& ell, int k, double eps) {
  check_layout(vt, ell, k, "friction_jacobian");
  std::vector<Triplet> t;
  t.reserve(vt.size() * k);
  for (int q = 0; q < ell.size(); ++q) {
    const Matrix b = friction_jacobian_block(vt.segment(q * k, k), ell(q), eps);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) t.emplace_back(q * k + i, q * k + j, b(i, j));
  }
  SparseMatrix J(vt.size(), vt.size());
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

Complementarity complementarity_residual(const Vector& sigma_t, const Vector& slip, const Vector& ell,
                                         const Vector& weights, int k) {
  check_layout(sigma_t, ell, k, "complementarity_residual");
  check_layout(slip, ell, k, "complementarity_residual");
  Complementarity c;
  for (int q = 0; q < ell.size(); ++q) {
    const auto s = sigma_t.segment(q * k, k);
    const auto v = slip.segment(q * k, k);
    c.infeasibility = std::max(c.infeasibility, s.norm() - ell(q));
    c.alignment += weights(q) * std::abs(s.dot(v) + ell(q) * v.norm());
  }
  c.infeasibility = std::max(0.0, c.infeasibility);
  return c;
}

}  // namespace slipstokes
