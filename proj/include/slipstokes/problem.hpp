#pragma once

#include <memory>
#include <string>
#include <vector>

#include "slipstokes/lifting.hpp"
#include "slipstokes/operators.hpp"
#include "slipstokes/scenario.hpp"

namespace slipstokes {

/// A scenario together with its mesh, spaces, operators and lifting.
struct Problem {
  Scenario scenario;
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const FunctionSpacePair> spaces;
  std::shared_ptr<const DiscreteOperators> ops;
  LiftingField lifting;
  std::vector<std::string> warnings;

  int dim() const { return spaces->dim; }
  int num_quad() const { return spaces->gamma0.size(); }
  int tangential() const { return dim() - 1; }

  /// Load vector (f(t), phi) in the full numbering.
  Vector load_full(double t) const;
  /// F(t) = (f, phi) - zeta a(G0, phi) - zeta' (G0, phi) on the free dofs.
  Vector rhs_free(double t) const;
  /// v = v_tilde + G0 zeta(t) in the full numbering.
  Vector full_velocity(const Vector& v_tilde, double t) const;

 private:
  friend Problem setup_problem(const Scenario&);
  friend Problem setup_problem(const Scenario&, std::shared_ptr<const DiscreteOperators>);
  Vector constant_load_;  // set when the force is constant in space and time
  Vector lift_viscous_;   // S^T A_full G0
  Vector lift_mass_;      // S^T M_full G0
};

/// Builds mesh, spaces, operators and lifting; runs the data checks
/// (throws DataError / IncompatibleDataError / GeometryError).
Problem setup_problem(const Scenario& scenario);
/// Reuses assembled operators (same mesh and mu).
Problem setup_problem(const Scenario& scenario, std::shared_ptr<const DiscreteOperators> ops);

}  // namespace slipstokes
