#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "slipstokes/errors.hpp"
#include "slipstokes/stress.hpp"
#include "support.hpp"

using testing_support::adaptive_simpson;
using namespace slipstokes;

namespace {

const double kPi = std::acos(-1.0);

// Own bump, independent of the library's mollifier code.
struct Bump {
  double rho, c;
  explicit Bump(double r) : rho(r) {
    c = 1.0 / adaptive_simpson([r](double x) { return raw(x * x / (r * r)); }, -r, r, 1e-15);
  }
  static double raw(double s) { return s >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - s)); }
  double value(double x, double y) const { return c * raw((x * x + y * y) / (rho * rho)); }
  // d/dx_k of the bump.
  double grad(double x, double y, int k) const {
    const double s = (x * x + y * y) / (rho * rho);
    if (s >= 1.0) return 0.0;
    const double g = c * raw(s) * (-1.0 / ((1.0 - s) * (1.0 - s)));
    return g * 2.0 * (k == 0 ? x : y) / (rho * rho);
  }
};

// int over the half disk {y > 0} of fn(x, y) centred at the origin.
double half_disk(double rho, const std::function<double(double, double)>& fn) {
  return adaptive_simpson(
      [&](double x) {
        const double top = std::sqrt(std::max(0.0, rho * rho - x * x));
        return adaptive_simpson([&](double y) { return fn(x, y); }, 0.0, top, 1e-13);
      },
      -rho, rho, 1e-12);
}

std::shared_ptr<const Mesh> unit_mesh(int n) {
  DomainSpec s;
  return std::make_shared<const Mesh>(build_mesh(s, {n, n}));
}

int nearest(const Gamma0Quadrature& g, double x) {
  int best = 0;
  for (int q = 1; q < g.size(); ++q)
    if (std::abs(g.points[q](0) - x) < std::abs(g.points[best](0) - x)) best = q;
  return best;
}

}  // namespace

TEST(StressRecovery, PurePressureGivesMinusIdentity) {
  const Problem P = setup_problem(couette_scenario(4, 0.0, 1.0, 0.0, 1.0, 0.5));
  const StressField s = compute_stress(*P.spaces, Vector::Zero(P.spaces->num_velocity_full()),
                                       Vector::Ones(P.spaces->num_pressure()), 1.0);
  const Tensor t = s.at(3, Barycentric(0.2, 0.3, 0.5, 0.0));
  EXPECT_NEAR((t.topLeftCorner(2, 2) + Eigen::Matrix2d::Identity()).norm(), 0.0, 1e-15);
}

TEST(StressRecovery, CouetteStickStress) {
  const Problem P = setup_problem(couette_scenario(8, 1.0, 2.0, 1.0, 1.0, 0.5));
  const SteadyResult st = run_to_steady(P, 0.5, 2.0, 1e-10, 200);
  ASSERT_TRUE(st.converged);
  const StressField s = compute_stress(P, st.state);
  for (int c = 0; c < static_cast<int>(P.mesh->cells.size()); c += 7) {
    const Tensor t = s.at(c, Barycentric(0.25, 0.25, 0.5, 0.0));
    EXPECT_NEAR(t(0, 1), -1.0, 1e-4);
    EXPECT_EQ(t(0, 1), t(1, 0));
    // trace(sigma) = -d p + 2 mu div v, with div v from the velocity gradient.
    const Barycentric l(0.25, 0.25, 0.5, 0.0);
    const double p = P.spaces->evaluate_pressure(st.state.p, c, l);
    const Eigen::Matrix3d du = P.spaces->velocity_gradient(P.full_velocity(st.state.v_tilde, st.state.t), c, l);
    EXPECT_NEAR(t(0, 0) + t(1, 1), -2.0 * p + 2.0 * du.trace(), 1e-12);
    EXPECT_LT(std::abs(du.trace()), 1e-3);
    EXPECT_NEAR(p, 0.0, 1e-3);
  }
}

TEST(StressRecovery, PressureShiftIsExact) {
  const Problem P = setup_problem(couette_scenario(6, 1.0, 0.5, 0.5, 0.25, 0.125));
  const Trajectory traj = run_tresca(P, tresca_threshold(P), RunOptions{step_options(P.scenario)});
  const Vector v = P.full_velocity(traj.states.back().v_tilde, traj.states.back().t);
  const Vector& p = traj.states.back().p;
  const StressField a = compute_stress(*P.spaces, v, p, 1.0);
  const StressField b = compute_stress(*P.spaces, v, 2.0 * p, 1.0);
  for (int c = 0; c < static_cast<int>(P.mesh->cells.size()); c += 5) {
    const Barycentric l(0.1, 0.6, 0.3, 0.0);
    const double pc = P.spaces->evaluate_pressure(p, c, l);
    const Tensor d = b.at(c, l) - a.at(c, l);
    EXPECT_NEAR((d.topLeftCorner(2, 2) + pc * Eigen::Matrix2d::Identity()).norm(), 0.0, 1e-13);
  }
}

TEST(StressRecovery, DivStressOfSteadyStateVanishes) {
  const Problem P = setup_problem(couette_scenario(8, 1.0, 2.0, 1.0, 4.0, 0.5));
  const Trajectory traj = run_tresca(P, tresca_threshold(P), RunOptions{step_options(P.scenario)});
  const int N = traj.num_steps();
  const Vector d = momentum_residual_div_stress(P, traj.states[N - 1], traj.states[N], 0.5);
  EXPECT_LT(d.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_THROW(momentum_residual_div_stress(P, traj.states[0], traj.states[2], 0.125), UsageError);
}

TEST(StressRecovery, DivStressOfManufacturedFlow) {
  // v = t q with q = (x^2, -2 x y), p = x + 2 y, f = q - mu t Lap q + grad p.
  const double mu = 1.5, dt = 0.1;
  Scenario sc = testing_support::zero_flow_scenario(4, 1.0, 0.2, dt);
  sc.mu = mu;
  sc.force_fn = [mu](const Point& x, double t) {
    return Point(x(0) * x(0) - 2.0 * mu * t + 1.0, -2.0 * x(0) * x(1) + 2.0, 0.0);
  };
  const Problem P = setup_problem(sc);
  const FunctionSpacePair& sp = *P.spaces;
  State a = initial_state(P), b = a;
  b.step = 1;
  b.t = dt;
  b.v_tilde = sp.restrict_to_free(sp.interpolate([dt](const Point& x) {
    return Point(dt * x(0) * x(0), -2.0 * dt * x(0) * x(1), 0.0);
  }));
  const Vector d = momentum_residual_div_stress(P, a, b, dt);
  // Exact: mu Lap v - grad p = (2 mu t - 1, -2).
  int checked = 0;
  for (int n = 0; n < sp.num_nodes(); ++n) {
    if (sp.node_kind[n] != NodeKind::Interior) continue;
    EXPECT_NEAR(d(sp.velocity_dof(n, 0)), 2.0 * mu * dt - 1.0, 1e-12);
    EXPECT_NEAR(d(sp.velocity_dof(n, 1)), -2.0, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(StressRecovery, ForceShiftShiftsDivStress) {
  Scenario sc = couette_scenario(6, 1.0, 0.5, 0.5, 0.25, 0.125);
  const Problem P = setup_problem(sc);
  const Trajectory traj = run_tresca(P, tresca_threshold(P), RunOptions{step_options(sc)});
  sc.force = {0.7, -1.3};
  const Problem Q = setup_problem(sc, P.ops);
  const Vector a = momentum_residual_div_stress(P, traj.states[0], traj.states[1], 0.125);
  const Vector b = momentum_residual_div_stress(Q, traj.states[0], traj.states[1], 0.125);
  const Vector shift = P.spaces->interpolate([](const Point&) { return Point(-0.7, 1.3, 0.0); });
  EXPECT_LE((b - a - shift).cwiseAbs().maxCoeff(), 4e-16);
}

TEST(StressRecovery, MollifierProfile) {
  for (int dim : {2, 3}) {
    const Mollifier f(dim, 0.3);
    const Point c = Point::Zero();
    EXPECT_EQ(f.value(Point(0.3, 0.0, 0.0), c), 0.0);
    EXPECT_EQ(f.value(Point(0.25, 0.2, 0.0), c), 0.0);
    EXPECT_GT(f.value(Point(0.1, 0.1, 0.0), c), 0.0);
    EXPECT_EQ(f.gradient(Point(0.4, 0.0, 0.0), c).norm(), 0.0);
  }
  // Unit mass on the wall hyperplane.
  const Mollifier f2(2, 0.3);
  EXPECT_NEAR(adaptive_simpson([&](double x) { return f2.value(Point(x, 0, 0), Point::Zero()); }, -0.3, 0.3, 1e-14),
              1.0, 1e-10);
  const Mollifier f3(3, 0.3);
  const double disk = adaptive_simpson(
      [&](double r) { return 2.0 * kPi * r * f3.value(Point(r, 0, 0), Point::Zero()); }, 0.0, 0.3, 1e-14);
  EXPECT_NEAR(disk, 1.0, 1e-10);
}

TEST(StressRecovery, TraceIsLinearAndVanishesOnZero) {
  auto mesh = unit_mesh(16);
  const Mollifier f(2, 0.2);
  const Point xp(0.5, 0.0, 0.0);
  auto zero_row = [](const Point&) { return Point(Point::Zero()); };
  auto zero_div = [](const Point&) { return 0.0; };
  EXPECT_EQ(regularized_normal_trace(*mesh, zero_row, zero_div, f, xp), 0.0);
  auto row = [](const Point& x) { return Point(std::sin(x(0)) * x(1), 1.0 + x(0) * x(1), 0.0); };
  auto div = [](const Point& x) { return std::cos(x(0)) * x(1) + x(0); };
  const double r1 = regularized_normal_trace(*mesh, row, div, f, xp);
  const double r3 = regularized_normal_trace(
      *mesh, [&](const Point& x) { return Point(-2.5 * row(x)); }, [&](const Point& x) { return -2.5 * div(x); }, f, xp);
  EXPECT_NEAR(r3, -2.5 * r1, 1e-14 * std::abs(r1));
}

TEST(StressRecovery, ConstantRowMatchesBumpGradientQuadrature) {
  const double rho = 0.2;
  const Bump bump(rho);
  const double gx = half_disk(rho, [&](double x, double y) { return bump.grad(x, y, 0); });
  const double gy = half_disk(rho, [&](double x, double y) { return bump.grad(x, y, 1); });
  const Point row(0.7, -1.9, 0.0);
  const double oracle = row(0) * gx + row(1) * gy;
  auto mesh = unit_mesh(16);
  const double r = regularized_normal_trace(
      *mesh, [&](const Point&) { return row; }, [](const Point&) { return 0.0; }, Mollifier(2, rho),
      Point(0.5, 0.0, 0.0));
  EXPECT_NEAR(r, oracle, 1e-8);
}

TEST(StressRecovery, GreenConsistencyAndContinuity) {
  // Row (sigma_21, sigma_22) with trace sigma . n = -sigma_22(x', 0) on Gamma0.
  auto row = [](const Point& x) { return Point(std::sin(x(0)) * x(1), 1.0 + x(0) * x(0) + 0.5 * x(1), 0.0); };
  auto div = [](const Point& x) { return std::cos(x(0)) * x(1) + 0.5; };
  const double xq = 0.5;
  const double exact = -(1.0 + xq * xq);
  auto mesh = unit_mesh(32);
  // L2 norms on the unit square by nested adaptive quadrature.
  auto l2 = [](const std::function<double(double, double)>& g) {
    return std::sqrt(adaptive_simpson(
        [&](double x) { return adaptive_simpson([&](double y) { return g(x, y); }, 0.0, 1.0, 1e-12); }, 0.0, 1.0,
        1e-11));
  };
  const double row_norm = l2([&](double x, double y) { return row(Point(x, y, 0)).squaredNorm(); });
  const double div_norm = l2([&](double x, double y) { return std::pow(div(Point(x, y, 0)), 2); });
  double prev = 1e300;
  for (double rho : {0.2, 0.1, 0.05}) {
    const Mollifier f(2, rho);
    const Point xp(xq, 0.0, 0.0);
    const double r = regularized_normal_trace(*mesh, row, div, f, xp);
    const double err = std::abs(r - exact);
    EXPECT_LT(err, prev) << "rho=" << rho;
    prev = err;
    const double cr = trace_continuity_constant(*mesh, f, xp);
    EXPECT_LE(std::abs(r), cr * (row_norm + div_norm)) << "rho=" << rho;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(StressRecovery, TraceOperatorMatchesPointwiseEvaluation) {
  const Problem P = setup_problem(couette_scenario(8, 1.0, 0.5, 0.5, 0.25, 0.125));
  const Trajectory traj = run_tresca(P, tresca_threshold(P), RunOptions{step_options(P.scenario)});
  const Mollifier f(2, default_mollifier_radius(*P.mesh));
  const TraceOperator R(*P.spaces, f);
  const StressField s = compute_stress(P, traj.states[2]);
  const Vector div = momentum_residual_div_stress(P, traj.states[1], traj.states[2], 0.125);
  const Vector r = R.apply(s, div);
  const auto& g = P.spaces->gamma0;
  for (int q : {0, nearest(g, 0.5), g.size() - 1})
    EXPECT_NEAR(r(q), regularized_normal_trace(*P.spaces, s, div, f, g.points[q]), 1e-12 * (1 + std::abs(r(q))));
  EXPECT_GT(R.continuity_constant(), 0.0);
}

TEST(StressRecovery, TraceHistoryRecordsAndCsvRoundTrip) {
  const Problem P = setup_problem(couette_scenario(6, 1.0, 0.5, 0.5, 0.25, 0.125));
  Trajectory traj = run_tresca(P, tresca_threshold(P), RunOptions{step_options(P.scenario)});
  const TraceOperator R(*P.spaces, Mollifier(2, default_mollifier_radius(*P.mesh)));
  compute_trace_history(P, R, traj);
  ASSERT_EQ(traj.boundary_history.size(), traj.states.size());
  EXPECT_EQ(traj.boundary_history[0], traj.boundary_history[1]);
  for (const Vector& h : traj.boundary_history) EXPECT_GE(h.minCoeff(), 0.0);
  std::ostringstream out;
  write_trace_history_csv(out, traj, P.spaces->gamma0);
  std::istringstream in(out.str());
  const auto back = read_trace_history_csv(in, P.spaces->gamma0);
  ASSERT_EQ(back.size(), traj.boundary_history.size());
  for (std::size_t n = 0; n < back.size(); ++n) EXPECT_EQ(back[n], traj.boundary_history[n]);
}
