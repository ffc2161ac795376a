#pragma once

#include <memory>

#include <Eigen/SparseLU>

#include "slipstokes/types.hpp"

namespace slipstokes {

/// Sparse direct solver for
///   [ V  B^T  0 ] [u]   [a]
///   [ B  0    m ] [p] = [b]
///   [ 0  m^T  0 ] [l]   [0]
/// The scalar multiplier l enforces m . p = 0 (zero-mean pressure).
class SaddleSolver {
 public:
  SaddleSolver(const SparseMatrix& V, const SparseMatrix& B, const Vector& m);

  int velocity_size() const { return nv_; }
  int pressure_size() const { return np_; }
  int size() const { return nv_ + np_ + 1; }
  const SparseMatrix& matrix() const { return K_; }

  /// Solves for a full right-hand side (length size()) with one step of
  /// iterative refinement.
  Vector solve(const Vector& rhs) const;
  Matrix solve(const Matrix& rhs) const;

 private:
  int nv_ = 0, np_ = 0;
  SparseMatrix K_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
};

}  // namespace slipstokes
