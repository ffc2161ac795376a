#include "slipstokes/problem.hpp"

#include <cmath>
#include <cstdio>

#include "slipstokes/errors.hpp"

namespace slipstokes {

namespace {

// Largest |d v_t / d x_d| over the Gamma0 quadrature points.
double normal_derivative_on_gamma0(const FunctionSpacePair& s, const Vector& v) {
  double m = 0.0;
  const auto& g = s.gamma0;
  for (int q = 0; q < g.size(); ++q) {
    const Eigen::Matrix3d du = s.velocity_gradient(v, g.cells[q], g.lambdas[q]);
    for (int c = 0; c < s.dim - 1; ++c) m = std::max(m, std::abs(du(c, s.dim - 1)));
  }
  return m;
}

}  // namespace

Vector Problem::load_full(double t) const {
  if (constant_load_.size() > 0) return constant_load_;
  if (scenario.force_is_zero()) return Vector::Zero(spaces->num_velocity_full());
  return assemble_load(*spaces, [&](const Point& x) { return scenario.body_force(x, t); });
}

Vector Problem::rhs_free(double t) const {
  Vector F = ops->selection.transpose() * load_full(t);
  const double z = scenario.zeta(t), dz = scenario.zeta.derivative(t);
  if (z != 0.0) F -= z * lift_viscous_;
  if (dz != 0.0) F -= dz * lift_mass_;
  return F;
}

Vector Problem::full_velocity(const Vector& v_tilde, double t) const {
  return spaces->expand(v_tilde) + scenario.zeta(t) * lifting.G0;
}

Problem setup_problem(const Scenario& scenario) {
  Scenario sc = scenario;
  if (!sc.domain.height) sc.sync_domain();
  sc.validate();
  auto mesh = std::make_shared<const Mesh>(build_mesh(sc.domain, sc.discretization.resolution));
  auto spaces = std::make_shared<const FunctionSpacePair>(build_spaces(mesh));
  auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(spaces, sc.mu));
  return setup_problem(sc, ops);
}

Problem setup_problem(const Scenario& scenario, std::shared_ptr<const DiscreteOperators> ops) {
  Problem P;
  P.scenario = scenario;
  if (!P.scenario.domain.height) P.scenario.sync_domain();
  P.scenario.validate();
  if (ops->mu != P.scenario.mu) throw UsageError("setup_problem: operators assembled with a different mu");
  P.ops = ops;
  P.spaces = ops->spaces;
  P.mesh = P.spaces->mesh;
  P.lifting = build_lifting(*ops, P.scenario.wall, P.scenario.domain.height);

  const FunctionSpacePair& s = *P.spaces;
  if (!P.scenario.force_fn) {
    P.constant_load_ = P.scenario.force_is_zero()
                           ? Vector::Zero(s.num_velocity_full())
                           : assemble_load(s, [&](const Point& x) { return P.scenario.body_force(x, 0.0); });
  }
  const SparseMatrix St = ops->selection.transpose();
  P.lift_viscous_ = St * (ops->viscous_full * P.lifting.G0);
  P.lift_mass_ = St * (ops->mass_full * P.lifting.G0);

  const double gnorm = P.lifting.norm_h1;
  if (P.lifting.divergence_residual > 1e-8 * (1.0 + gnorm))
    P.warnings.push_back("lifting divergence residual " + std::to_string(P.lifting.divergence_residual));
  if (P.scenario.compatibility) {
    if (P.scenario.v0 == Scenario::InitialVelocity::Zero && !P.lifting.G0.isZero(0.0))
      throw DataError("v0 = 0 does not match non-zero boundary data g");
    const double dn = normal_derivative_on_gamma0(s, P.lifting.G0);
    if (P.scenario.v0 == Scenario::InitialVelocity::Lifting && dn > 1e-8 * (1.0 + gnorm)) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "v0 has non-zero normal derivative of its tangential part on Gamma0 (max %.3e)", dn);
      P.warnings.push_back(buf);
    }
  }
  return P;
}

}  // namespace slipstokes
