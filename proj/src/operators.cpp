#include "slipstokes/operators.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "slipstokes/errors.hpp"
#include "slipstokes/parallel.hpp"
#include "slipstokes/quadrature.hpp"

namespace slipstokes {

namespace {

struct CellTriplets {
  std::vector<Triplet> mass, viscous, h1, divergence, pressure_mass;
  std::vector<std::pair<int, double>> mean;
};

void assemble_cell(const FunctionSpacePair& s, const QuadratureRule& rule, double mu, int cell, CellTriplets& out) {
  const int d = s.dim;
  const int n2 = p2_local_count(d);
  const int n1 = d + 1;
  const CellGeometry g = cell_geometry(*s.mesh, cell);
  const double jac = g.volume * (d == 2 ? 2.0 : 6.0);
  const auto& nodes = s.cell_nodes[cell];
  const auto& verts = s.mesh->cells[cell];

  Matrix mloc = Matrix::Zero(n2, n2);
  Matrix kloc = Matrix::Zero(n2, n2);
  // vloc(a*d+c, b*d+e)
  Matrix vloc = Matrix::Zero(n2 * d, n2 * d);
  Matrix bloc = Matrix::Zero(n1, n2 * d);
  Matrix ploc = Matrix::Zero(n1, n1);
  Vector mean = Vector::Zero(n1);

  double phi[10];
  Point grad[10];
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Barycentric l = g.barycentric_of_reference(rule.points[q]);
    const double w = rule.weights[q] * jac;
    p2_values(d, l, phi);
    p2_gradients(d, l, g.grad_lambda, grad);
    for (int a = 0; a < n2; ++a) {
      for (int b = 0; b < n2; ++b) {
        const double gg = grad[a].dot(grad[b]);
        mloc(a, b) += w * phi[a] * phi[b];
        kloc(a, b) += w * gg;
        for (int c = 0; c < d; ++c) {
          for (int e = 0; e < d; ++e) {
            double v = grad[a](e) * grad[b](c);
            if (c == e) v += gg;
            vloc(a * d + c, b * d + e) += w * v;
          }
        }
      }
    }
    for (int k = 0; k < n1; ++k) {
      mean(k) += w * l(k);
      for (int j = 0; j < n1; ++j) ploc(k, j) += w * l(k) * l(j);
      for (int b = 0; b < n2; ++b)
        for (int e = 0; e < d; ++e) bloc(k, b * d + e) -= w * l(k) * grad[b](e);
    }
  }

  for (int a = 0; a < n2; ++a) {
    for (int b = 0; b < n2; ++b) {
      for (int c = 0; c < d; ++c) {
        const int ra = s.velocity_dof(nodes[a], c);
        out.mass.emplace_back(ra, s.velocity_dof(nodes[b], c), mloc(a, b));
        out.h1.emplace_back(ra, s.velocity_dof(nodes[b], c), kloc(a, b));
        for (int e = 0; e < d; ++e)
          out.viscous.emplace_back(ra, s.velocity_dof(nodes[b], e), mu * vloc(a * d + c, b * d + e));
      }
    }
  }
  for (int k = 0; k < n1; ++k) {
    out.mean.emplace_back(verts[k], mean(k));
    for (int j = 0; j < n1; ++j) out.pressure_mass.emplace_back(verts[k], verts[j], ploc(k, j));
    for (int b = 0; b < n2; ++b)
      for (int e = 0; e < d; ++e) out.divergence.emplace_back(verts[k], s.velocity_dof(nodes[b], e), bloc(k, b * d + e));
  }
}

SparseMatrix from_triplets(int rows, int cols, const std::vector<CellTriplets>& chunks,
                           std::vector<Triplet> CellTriplets::*member) {
  std::vector<Triplet> all;
  for (const auto& c : chunks) all.insert(all.end(), (c.*member).begin(), (c.*member).end());
  SparseMatrix m(rows, cols);
  m.setFromTriplets(all.begin(), all.end());
  m.makeCompressed();
  return m;
}

// Deterministic uniform samples in [-1, 1).
Matrix seeded_block(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix x(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) x(i, j) = 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
  return x;
}

}  // namespace

DiscreteOperators assemble_operators(std::shared_ptr<const FunctionSpacePair> spaces, double mu) {
  if (!(mu > 0.0)) throw UsageError("assemble_operators: mu must be positive");
  const FunctionSpacePair& s = *spaces;
  const int d = s.dim;
  const int ncells = static_cast<int>(s.mesh->cells.size());
  const QuadratureRule rule = simplex_rule(d, 4);

  std::vector<CellTriplets> chunks(kReductionChunks);
  for_each_chunk(ncells, kReductionChunks, [&](int chunk, int begin, int end) {
    for (int c = begin; c < end; ++c) assemble_cell(s, rule, mu, c, chunks[chunk]);
  });

  DiscreteOperators ops;
  ops.spaces = spaces;
  ops.mu = mu;
  const int nf = s.num_velocity_full();
  const int np = s.num_pressure();
  ops.mass_full = from_triplets(nf, nf, chunks, &CellTriplets::mass);
  ops.viscous_full = from_triplets(nf, nf, chunks, &CellTriplets::viscous);
  ops.h1_full = from_triplets(nf, nf, chunks, &CellTriplets::h1);
  ops.divergence_full = from_triplets(np, nf, chunks, &CellTriplets::divergence);
  ops.pressure_mass = from_triplets(np, np, chunks, &CellTriplets::pressure_mass);
  ops.pressure_mean = Vector::Zero(np);
  for (const auto& c : chunks)
    for (const auto& [k, v] : c.mean) ops.pressure_mean(k) += v;

  std::vector<Triplet> sel;
  for (int i = 0; i < s.num_velocity_free(); ++i) sel.emplace_back(s.full_of_free[i], i, 1.0);
  ops.selection.resize(nf, s.num_velocity_free());
  ops.selection.setFromTriplets(sel.begin(), sel.end());
  const SparseMatrix selT = ops.selection.transpose();
  ops.mass = selT * ops.mass_full * ops.selection;
  ops.viscous = selT * ops.viscous_full * ops.selection;
  ops.h1 = selT * ops.h1_full * ops.selection;
  ops.divergence = ops.divergence_full * ops.selection;

  const auto& g0 = s.gamma0;
  const int k = d - 1;
  std::vector<Triplet> tr;
  double phi[10];
  for (int q = 0; q < g0.size(); ++q) {
    p2_values(d, g0.lambdas[q], phi);
    const auto& nodes = s.cell_nodes[g0.cells[q]];
    for (int a = 0; a < p2_local_count(d); ++a) {
      if (phi[a] == 0.0) continue;
      for (int c = 0; c < k; ++c) tr.emplace_back(q * k + c, s.velocity_dof(nodes[a], c), phi[a]);
    }
  }
  ops.boundary_trace_full.resize(g0.size() * k, nf);
  ops.boundary_trace_full.setFromTriplets(tr.begin(), tr.end());
  ops.boundary_trace = ops.boundary_trace_full * ops.selection;
  ops.boundary_mass = Eigen::Map<const Vector>(g0.weights.data(), g0.size());
  return ops;
}

Vector assemble_load(const FunctionSpacePair& s, const std::function<Point(const Point&)>& f) {
  const int d = s.dim;
  const QuadratureRule rule = simplex_rule(d, 4);
  const int ncells = static_cast<int>(s.mesh->cells.size());
  std::vector<std::vector<std::pair<int, double>>> chunks(kReductionChunks);
  for_each_chunk(ncells, kReductionChunks, [&](int chunk, int begin, int end) {
    double phi[10];
    for (int cell = begin; cell < end; ++cell) {
      const CellGeometry g = cell_geometry(*s.mesh, cell);
      const double jac = g.volume * (d == 2 ? 2.0 : 6.0);
      Eigen::Matrix<double, 10, 3> loc = Eigen::Matrix<double, 10, 3>::Zero();
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Barycentric l = g.barycentric_of_reference(rule.points[q]);
        const Point fx = f(g.to_physical(rule.points[q]));
        p2_values(d, l, phi);
        for (int a = 0; a < p2_local_count(d); ++a) loc.row(a) += rule.weights[q] * jac * phi[a] * fx.transpose();
      }
      for (int a = 0; a < p2_local_count(d); ++a)
        for (int c = 0; c < d; ++c) chunks[chunk].emplace_back(s.velocity_dof(s.cell_nodes[cell][a], c), loc(a, c));
    }
  });
  Vector b = Vector::Zero(s.num_velocity_full());
  for (const auto& c : chunks)
    for (const auto& [i, v] : c) b(i) += v;
  return b;
}

double korn_coercivity_estimate(const DiscreteOperators& ops) {
  const SparseMatrix& a = ops.viscous;
  const SparseMatrix h = ops.mass + ops.h1;
  const int n = static_cast<int>(a.rows());
  if (n == 0) throw SolverError("korn_coercivity_estimate: empty velocity space");
  Eigen::SimplicialLDLT<SparseMatrix> solver(a);
  if (solver.info() != Eigen::Success) throw SolverError("korn_coercivity_estimate: viscous matrix not factorizable");

  const int block = std::min(8, n);
  Matrix x = seeded_block(n, block, 0x5eedULL);
  double previous = 0.0;
  int stable = 0;
  for (int it = 0; it < 5000; ++it) {
    Matrix y = solver.solve(h * x);
    const Matrix ar = y.transpose() * (a * y);
    const Matrix br = y.transpose() * (h * y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ritz(0.5 * (ar + ar.transpose()), 0.5 * (br + br.transpose()));
    if (ritz.info() != Eigen::Success) throw SolverError("korn_coercivity_estimate: Rayleigh-Ritz step failed");
    x = y * ritz.eigenvectors();
    const double theta = ritz.eigenvalues()(0);
    if (!(theta > 0.0)) throw SolverError("korn_coercivity_estimate: non-positive Ritz value");
    if (it > 0 && std::abs(theta - previous) <= 1e-14 * theta) {
      if (++stable >= 3) return theta;
    } else {
      stable = 0;
    }
    previous = theta;
  }
  throw SolverError("korn_coercivity_estimate: subspace iteration did not converge");
}

double inf_sup_constant(const DiscreteOperators& ops) {
  const SparseMatrix h = ops.mass + ops.h1;
  Eigen::SimplicialLDLT<SparseMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw SolverError("inf_sup_constant: H1 matrix not factorizable");
  const Matrix bt = Matrix(ops.divergence.transpose());
  const Matrix x = solver.solve(bt);
  Matrix schur = ops.divergence * x;
  schur = 0.5 * (schur + schur.transpose());
  const Matrix mp = Matrix(ops.pressure_mass);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(schur, mp);
  if (eig.info() != Eigen::Success) throw SolverError("inf_sup_constant: eigen-solver failure");
  const Vector& ev = eig.eigenvalues();
  // The constant pressure is in the kernel of B^T; skip it.
  const double top = ev(ev.size() - 1);
  int first = 0;
  while (first < ev.size() - 1 && ev(first) <= 1e-10 * top) ++first;
  if (first != 1) throw SolverError("inf_sup_constant: expected exactly one pressure kernel mode, found " + std::to_string(first));
  return std::sqrt(ev(first));
}

void write_triplets(std::ostream& out, const SparseMatrix& m, const std::string& name) {
  out << "% " << name << " rows=" << m.rows() << " cols=" << m.cols() << " nnz=" << m.nonZeros() << "\n";
  char buf[64];
  for (int k = 0; k < m.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << it.row() << " " << it.col() << " " << buf << "\n";
    }
  }
}

}  // namespace slipstokes
