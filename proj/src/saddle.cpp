#include "slipstokes/saddle.hpp"

#include "slipstokes/errors.hpp"

namespace slipstokes {

SaddleSolver::SaddleSolver(const SparseMatrix& V, const SparseMatrix& B, const Vector& m)
    : nv_(static_cast<int>(V.rows())), np_(static_cast<int>(B.rows())) {
  if (V.cols() != nv_ || B.cols() != nv_ || m.size() != np_) throw UsageError("SaddleSolver: block sizes do not match");
  std::vector<Triplet> t;
  t.reserve(V.nonZeros() + 2 * B.nonZeros() + 2 * np_);
  for (int k = 0; k < V.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(V, k); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(B, k); it; ++it) {
      t.emplace_back(nv_ + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), nv_ + it.row(), it.value());
    }
  }
  for (int q = 0; q < np_; ++q) {
    t.emplace_back(nv_ + q, nv_ + np_, m(q));
    t.emplace_back(nv_ + np_, nv_ + q, m(q));
  }
  K_.resize(size(), size());
  K_.setFromTriplets(t.begin(), t.end());
  K_.makeCompressed();
  lu_ = std::make_shared<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(K_);
  lu_->factorize(K_);
  if (lu_->info() != Eigen::Success) throw SolverError("saddle-point factorization failed: " + lu_->lastErrorMessage());
}

Vector SaddleSolver::solve(const Vector& rhs) const {
  if (rhs.size() != size()) throw UsageError("SaddleSolver::solve: right-hand side has wrong length");
  Vector x = lu_->solve(rhs);
  const Vector r = rhs - K_ * x;
  x += lu_->solve(r);
  return x;
}

Matrix SaddleSolver::solve(const Matrix& rhs) const {
  if (rhs.rows() != size()) throw UsageError("SaddleSolver::solve: right-hand side has wrong length");
  Matrix x = lu_->solve(rhs);
  const Matrix r = rhs - K_ * x;
  x += lu_->solve(r);
  return x;
}

}  // namespace slipstokes
