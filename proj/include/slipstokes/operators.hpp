#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "slipstokes/spaces.hpp"

namespace slipstokes {

/// Assembled matrices of the weak form. The `*_full` matrices act on the
/// full velocity numbering (needed to apply the lifting); the unsuffixed
/// ones are restricted to the free dofs of V0.
struct DiscreteOperators {
  std::shared_ptr<const FunctionSpacePair> spaces;
  double mu = 1.0;

  SparseMatrix mass_full;        // (u, v)
  SparseMatrix viscous_full;     // a(u, v) = int 2 mu D(u) : D(v)
  SparseMatrix h1_full;          // int grad u : grad v
  SparseMatrix divergence_full;  // B_{q,j} = -int psi_q div(phi_j)

  SparseMatrix selection;        // full x free, injection of V0
  SparseMatrix mass;
  SparseMatrix viscous;
  SparseMatrix h1;
  SparseMatrix divergence;

  SparseMatrix pressure_mass;
  Vector pressure_mean;          // int psi_q, the zero-mean constraint row

  /// Tangential values at Gamma0 quadrature points: row q * (d-1) + c.
  SparseMatrix boundary_trace;       // acting on free dofs
  SparseMatrix boundary_trace_full;  // acting on full dofs
  /// Gamma0 mass matrix for scalar fields sampled at the quadrature points
  /// (diagonal: the quadrature weights).
  Vector boundary_mass;

  const FunctionSpacePair& space() const { return *spaces; }
};

DiscreteOperators assemble_operators(std::shared_ptr<const FunctionSpacePair> spaces, double mu);

/// Load vector int f . phi_i over the full velocity numbering.
Vector assemble_load(const FunctionSpacePair& spaces, const std::function<Point(const Point&)>& f);

/// Smallest generalized eigenvalue of (A, M + K) on V0: the discrete Korn
/// constant alpha with alpha ||u||_{H1}^2 <= a(u, u).
double korn_coercivity_estimate(const DiscreteOperators& ops);

/// Discrete inf-sup constant of the pair with the H1 velocity norm and the
/// L2 pressure norm on zero-mean pressures (dense; for small meshes).
double inf_sup_constant(const DiscreteOperators& ops);

/// Coordinate (row col value) triplet dump with a one-line header.
void write_triplets(std::ostream& out, const SparseMatrix& m, const std::string& name);

}  // namespace slipstokes
