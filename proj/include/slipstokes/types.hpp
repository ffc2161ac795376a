#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace slipstokes {

/// Spatial point. Only the first `dim` components are meaningful; the
/// remaining ones are kept at zero.
using Point = Eigen::Vector3d;
using Tensor = Eigen::Matrix3d;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Number of worker threads used by assembly and trace evaluation.
/// Results never depend on this value.
void set_num_threads(int n);
int num_threads();

}  // namespace slipstokes
