#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "slipstokes/verification.hpp"
#include "support.hpp"

using namespace slipstokes;

namespace {

Trajectory run(const Problem& P) {
  return run_tresca(P, tresca_threshold(P), RunOptions{step_options(P.scenario)});
}

}  // namespace

TEST(Verification, CouetteOracleStick) {
  // Wall and fluid move together; the linear profile from s to 0 over h gives mu s / h.
  const CouetteOracle o = couette_oracle(2.0, 0.5, 1.0, 5.0);
  EXPECT_EQ(o.regime, CouetteOracle::Regime::Stick);
  EXPECT_DOUBLE_EQ(o.wall_speed, 1.0);
  EXPECT_DOUBLE_EQ(o.shear_stress, 4.0);
}

TEST(Verification, CouetteOracleSlip) {
  // Shear saturates at ell; the fluid wall speed w then satisfies mu w / h = ell.
  const CouetteOracle o = couette_oracle(2.0, 0.5, 1.0, 3.0);
  EXPECT_EQ(o.regime, CouetteOracle::Regime::Slip);
  EXPECT_DOUBLE_EQ(o.wall_speed, 0.75);
  EXPECT_DOUBLE_EQ(o.shear_stress, 3.0);
  const CouetteOracle n = couette_oracle(1.0, 1.0, -1.0, 0.5);
  EXPECT_DOUBLE_EQ(n.wall_speed, -0.5);
  EXPECT_DOUBLE_EQ(n.shear_stress, 0.5);
}

TEST(Verification, CouetteOracleThresholdIsStick) {
  EXPECT_EQ(couette_oracle(1.0, 1.0, 1.0, 1.0).regime, CouetteOracle::Regime::Stick);
}

TEST(Verification, ZeroFlowEnergyBudgetVanishes) {
  const Problem P = setup_problem(testing_support::zero_flow_scenario(6, 0.5, 0.5, 0.125));
  const Trajectory t = run(P);
  const EnergyBudget e = energy_budget(P, t, korn_coercivity_estimate(*P.ops));
  EXPECT_EQ(e.C1_prime, 0.0);
  for (double m : e.measured) EXPECT_EQ(m, 0.0);
  EXPECT_TRUE(e.bound_holds);
  EXPECT_TRUE(e.steps_hold);
}

TEST(Verification, CouetteConstantIsLiftingTerm) {
  const Scenario sc = couette_scenario(6, 1.0, 2.0, 1.0, 0.75, 0.125);
  const Problem P = setup_problem(sc);
  const double alpha = korn_coercivity_estimate(*P.ops);
  const EnergyBudget e = energy_budget(P, run(P), alpha);
  const double g = P.lifting.norm_h1;
  EXPECT_NEAR(e.C1_prime, 2.0 / alpha * g * g * 0.75, 1e-12 * e.C1_prime);
  EXPECT_EQ(e.terms[0], 0.0);
  EXPECT_EQ(e.terms[1], 0.0);
  EXPECT_EQ(e.terms[3], 0.0);
  EXPECT_TRUE(e.bound_holds);
  EXPECT_TRUE(e.steps_hold);
}

TEST(Verification, ForceTermScalesQuadratically) {
  Scenario sc = couette_scenario(4, 1.0, 2.0, 1.0, 0.5, 0.125);
  sc.force = {1.0, 0.0};
  const Problem P = setup_problem(sc);
  const double alpha = korn_coercivity_estimate(*P.ops);
  const EnergyBudget e1 = energy_budget(P, run(P), alpha);
  // 1/2 |f|^2 |Omega| T on the unit square.
  EXPECT_NEAR(e1.terms[1], 0.25, 1e-13);
  sc.force = {10.0, 0.0};
  const Problem Q = setup_problem(sc, P.ops);
  const EnergyBudget e10 = energy_budget(Q, run(Q), alpha);
  EXPECT_NEAR(e10.terms[1], 100.0 * e1.terms[1], 1e-11);
  EXPECT_TRUE(e10.bound_holds);
  EXPECT_TRUE(e10.steps_hold);
}

TEST(Verification, ZeroThresholdHasNoGap) {
  const Scenario sc = couette_scenario(6, 1.0, 0.0, 0.0, 0.25, 0.125);
  const Problem P = setup_problem(sc);
  const ThresholdField ell = tresca_threshold(P);
  const Trajectory t = run(P);
  EXPECT_EQ(threshold_integral(P, ell), 0.0);
  EXPECT_EQ(friction_gap(P, t, ell, 1e-3), 0.0);
}

TEST(Verification, ThresholdIntegralOfConstant) {
  const Problem P = setup_problem(couette_scenario(6, 1.0, 0.5, 0.5, 0.5, 0.125));
  EXPECT_NEAR(threshold_integral(P, tresca_threshold(P)), 0.5 * 1.0 * 0.5, 1e-14);
}

TEST(Verification, GapBoundedByEpsTimesThreshold) {
  Scenario sc = couette_scenario(8, 1.0, 0.5, 0.5, 0.5, 0.0625);
  sc.discretization.eps_schedule = {1e-2, 1e-3};
  const Problem P = setup_problem(sc);
  const ThresholdField ell = tresca_threshold(P);
  const double gap = friction_gap(P, run(P), ell, 1e-3);
  EXPECT_GT(gap, 0.0);
  EXPECT_LE(gap, 1e-3 * threshold_integral(P, ell));
}

TEST(Verification, EpsStudyRowsAreBoundedAndMonotone) {
  const Problem P = setup_problem(couette_scenario(8, 1.0, 0.5, 0.5, 0.5, 0.0625));
  const auto rows = eps_convergence_study(P, tresca_threshold(P), {1e-2, 1e-3, 1e-4});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(std::isnan(rows[0].order));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_LE(rows[i].gap, rows[i].bound);
    if (i > 0) EXPECT_LT(rows[i].gap, rows[i - 1].gap);
  }
}

TEST(Verification, TraceNormMatchesDenseEigenproblem) {
  const Problem P = setup_problem(couette_scenario(3, 1.0, 1.0, 1.0, 0.25, 0.125));
  const DiscreteOperators& ops = *P.ops;
  const Eigen::MatrixXd Tm = Eigen::MatrixXd(ops.boundary_trace);
  Eigen::VectorXd w(Tm.rows());
  const int k = P.tangential();
  for (int r = 0; r < Tm.rows(); ++r) w(r) = ops.boundary_mass(r / k);
  const Eigen::MatrixXd A = Tm.transpose() * w.asDiagonal() * Tm;
  const Eigen::MatrixXd B = Eigen::MatrixXd(ops.mass) + Eigen::MatrixXd(ops.h1);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  const double oracle = std::sqrt(es.eigenvalues().maxCoeff());
  EXPECT_NEAR(trace_norm_estimate(P), oracle, 1e-6 * oracle);
}

TEST(Verification, ReportTokensAndOverallLine) {
  VerificationReport r;
  r.add("energy", "bound", 0.5, 1.0, true, "ok");
  r.info("energy", "alpha", 0.3);
  r.add("divergence", "relative", 2.0, 1.0, false);
  const std::string text = r.to_text();
  EXPECT_NE(text.find("[energy]"), std::string::npos);
  EXPECT_NE(text.find("[divergence]"), std::string::npos);
  EXPECT_NE(text.find("PASS bound"), std::string::npos);
  EXPECT_NE(text.find("INFO alpha"), std::string::npos);
  EXPECT_NE(text.find("FAIL relative"), std::string::npos);
  EXPECT_FALSE(r.all_pass());
  EXPECT_NE(text.find("OVERALL FAIL"), std::string::npos);
  r.entries.pop_back();
  EXPECT_TRUE(r.all_pass());
  EXPECT_NE(r.to_text().find("OVERALL PASS"), std::string::npos);
}

TEST(Verification, VerifyIsPureAndPassesOnSlipCouette) {
  Scenario sc = couette_scenario(16, 1.0, 0.5, 0.5, 0.25, 0.0625);
  sc.discretization.eps_schedule = {1e-2, 1e-3, 1e-4, 1e-5};
  const Problem P = setup_problem(sc);
  const VerifyOutcome a = verify_scenario(P);
  const VerifyOutcome b = verify_scenario(P);
  EXPECT_EQ(a.report.to_text(), b.report.to_text());
  EXPECT_TRUE(a.report.all_pass()) << a.report.to_text();
  EXPECT_NE(a.report.to_text().find("[couette]"), std::string::npos);
}
