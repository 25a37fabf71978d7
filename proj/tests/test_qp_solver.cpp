#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "pushmpc/qp_solver.hpp"

using namespace pushmpc;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

QpProblem random_qp(std::mt19937& rng, int n, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> upos(0.05, 1.0);
  QpProblem prob;
  MatX half = MatX::NullaryExpr(n, n, [&]() { return u(rng); });
  prob.p = half.transpose() * half / n + 0.4 * MatX::Identity(n, n);
  prob.q = VecX::NullaryExpr(n, [&]() { return 2.0 * u(rng); });
  prob.lo = VecX::NullaryExpr(n, [&]() { return -1.0 - std::abs(u(rng)); });
  prob.hi = VecX::NullaryExpr(n, [&]() { return 1.0 + std::abs(u(rng)); });
  prob.g = MatX::NullaryExpr(m, n, [&]() { return u(rng); });
  const VecX interior = 0.5 * (prob.lo + prob.hi);
  prob.h.resize(m);
  for (int i = 0; i < m; ++i)
    prob.h[i] = prob.g.row(i).dot(interior) + upos(rng);
  return prob;
}

}  // namespace

TEST_SUITE("qp_solver") {

TEST_CASE("scalar problem with an active inequality") {
  QpProblem prob;
  prob.p = MatX::Constant(1, 1, 2.0);
  prob.q = VecX::Constant(1, -6.0);
  prob.g = MatX::Constant(1, 1, 1.0);
  prob.h = VecX::Constant(1, 1.0);
  prob.lo = VecX::Constant(1, -kInf);
  prob.hi = VecX::Constant(1, kInf);
  const QpSolution sol = solve_qp(prob);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.z[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.duals[0] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(sol.objective == doctest::Approx(0.5 * 2.0 - 6.0).epsilon(1e-7));
  CHECK(kkt_residuals(prob, sol.z, sol.duals).max() <= 1e-6);
}

TEST_CASE("unconstrained quadratic hits the analytic minimizer") {
  QpProblem prob;
  prob.p.resize(2, 2);
  prob.p << 4.0, 1.0, 1.0, 3.0;
  prob.q.resize(2);
  prob.q << -1.0, 2.0;
  prob.g.resize(0, 2);
  prob.h.resize(0);
  prob.lo = VecX::Constant(2, -kInf);
  prob.hi = VecX::Constant(2, kInf);
  const QpSolution sol = solve_qp(prob);
  REQUIRE(sol.status == QpStatus::optimal);
  const VecX expected = -prob.p.ldlt().solve(prob.q);
  CHECK((sol.z - expected).norm() < 1e-7);
}

TEST_CASE("box-only problem clamps the unconstrained optimum") {
  QpProblem prob;
  prob.p = MatX::Identity(3, 3);
  prob.q.resize(3);
  prob.q << -5.0, 0.3, -0.1;  // minimizer (5, -0.3, 0.1)
  prob.g.resize(0, 3);
  prob.h.resize(0);
  prob.lo = VecX::Constant(3, -1.0);
  prob.hi = VecX::Constant(3, 1.0);
  const QpSolution sol = solve_qp(prob);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.z[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(sol.z[1] == doctest::Approx(-0.3).epsilon(1e-8));
  CHECK(sol.z[2] == doctest::Approx(0.1).epsilon(1e-8));
}

TEST_CASE("random problems match the projected-gradient oracle") {
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> pick_n(2, 20), pick_m(0, 8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = pick_n(rng), m = pick_m(rng);
    const QpProblem prob = random_qp(rng, n, m);
    const QpSolution sol = solve_qp(prob);
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(kkt_residuals(prob, sol.z, sol.duals).max() <= 1e-6);
    const oracle::PgResult pg = oracle::projected_gradient_qp(
        prob.p, prob.q, prob.g, prob.h, prob.lo, prob.hi, 60000, 1e-11);
    REQUIRE(pg.prox_residual <= 1e-11);
    CHECK((sol.z - pg.z).norm() <= 1e-6 * (1.0 + pg.z.norm()));
  }
}

TEST_CASE("solution is invariant to problem scaling") {
  std::mt19937 rng(103);
  const QpProblem prob = random_qp(rng, 8, 4);
  const QpSolution base = solve_qp(prob);
  REQUIRE(base.status == QpStatus::optimal);

  QpProblem scaled = prob;
  scaled.p *= 1000.0;
  scaled.q *= 1000.0;
  const QpSolution cost_scaled = solve_qp(scaled);
  REQUIRE(cost_scaled.status == QpStatus::optimal);
  CHECK((cost_scaled.z - base.z).norm() < 1e-6 * (1.0 + base.z.norm()));

  QpProblem row_scaled = prob;
  row_scaled.g.row(0) *= 50.0;
  row_scaled.h[0] *= 50.0;
  const QpSolution rs = solve_qp(row_scaled);
  REQUIRE(rs.status == QpStatus::optimal);
  CHECK((rs.z - base.z).norm() < 1e-6 * (1.0 + base.z.norm()));
}

TEST_CASE("identical inputs give bit-identical results") {
  std::mt19937 rng(107);
  const QpProblem prob = random_qp(rng, 10, 5);
  const QpSolution a = solve_qp(prob);
  const QpSolution b = solve_qp(prob);
  REQUIRE(a.z.size() == b.z.size());
  for (int i = 0; i < a.z.size(); ++i) CHECK(a.z[i] == b.z[i]);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("resubmitting a solved problem warm started is free") {
  std::mt19937 rng(109);
  const QpProblem prob = random_qp(rng, 12, 6);
  const QpSolution cold = solve_qp(prob);
  REQUIRE(cold.status == QpStatus::optimal);
  const QpSolution warm = solve_qp(prob, {}, &cold.z);
  REQUIRE(warm.status == QpStatus::optimal);
  CHECK(warm.iterations == 0);
  CHECK(warm.iterations <= cold.iterations);
  CHECK((warm.z - cold.z).norm() < 1e-7 * (1.0 + cold.z.norm()));
}

TEST_CASE("polish terminates well below the requested tolerance") {
  std::mt19937 rng(113);
  const QpProblem prob = random_qp(rng, 10, 6);
  const QpSolution sol = solve_qp(prob);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(kkt_residuals(prob, sol.z, sol.duals).max() <= 1e-8);
}

TEST_CASE("contradictory inequalities are flagged infeasible") {
  QpProblem prob;
  prob.p = MatX::Identity(1, 1);
  prob.q = VecX::Zero(1);
  prob.g = MatX::Constant(1, 1, 1.0);
  prob.h = VecX::Constant(1, -1.0);  // z <= -1
  prob.lo = VecX::Constant(1, 1.0);  // z >= 1
  prob.hi = VecX::Constant(1, kInf);
  const QpSolution sol = solve_qp(prob);
  CHECK(sol.status == QpStatus::infeasible);
  CHECK(sol.z.allFinite());
}

TEST_CASE("iteration cap returns the best iterate") {
  std::mt19937 rng(127);
  const QpProblem prob = random_qp(rng, 8, 4);
  QpSettings st;
  st.tol = 0.0;
  st.max_iters = 50;
  const QpSolution sol = solve_qp(prob, st);
  CHECK(sol.status == QpStatus::max_iters);
  CHECK(sol.iterations == 50);
  CHECK(sol.z.allFinite());
  CHECK(kkt_residuals(prob, sol.z, sol.duals).max() < 1.0);
}

TEST_CASE("singular cost stays bounded through the constraints") {
  QpProblem prob;
  prob.p = MatX::Zero(2, 2);
  prob.p(0, 0) = 1.0;
  prob.q.resize(2);
  prob.q << 0.0, 1.0;
  prob.g.resize(0, 2);
  prob.h.resize(0);
  prob.lo = VecX::Constant(2, -1.0);
  prob.hi = VecX::Constant(2, 1.0);
  const QpSolution sol = solve_qp(prob);
  REQUIRE(sol.status == QpStatus::optimal);
  CHECK(sol.z[0] == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(sol.z[1] == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("asymmetric cost input is symmetrized") {
  QpProblem prob;
  prob.p.resize(2, 2);
  prob.p << 2.0, 1.4, 0.6, 2.0;  // symmetrization has off-diagonal 1.0
  prob.q.resize(2);
  prob.q << -1.0, -1.0;
  prob.g.resize(0, 2);
  prob.h.resize(0);
  prob.lo = VecX::Constant(2, -kInf);
  prob.hi = VecX::Constant(2, kInf);
  QpProblem sym = prob;
  sym.p << 2.0, 1.0, 1.0, 2.0;
  const QpSolution a = solve_qp(prob);
  const QpSolution b = solve_qp(sym);
  REQUIRE(a.status == QpStatus::optimal);
  CHECK((a.z - b.z).norm() < 1e-9);
}

TEST_CASE("kkt residual reports a violated constraint") {
  QpProblem prob;
  prob.p = MatX::Identity(1, 1);
  prob.q = VecX::Zero(1);
  prob.g = MatX::Constant(1, 1, 1.0);
  prob.h = VecX::Constant(1, 0.5);
  prob.lo = VecX::Constant(1, -kInf);
  prob.hi = VecX::Constant(1, kInf);
  VecX z = VecX::Constant(1, 0.8);
  VecX duals = VecX::Zero(3);
  const KktResiduals r = kkt_residuals(prob, z, duals);
  CHECK(r.primal == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("kkt complementarity reacts to moving off an active bound") {
  QpProblem prob;
  prob.p = 2.0 * MatX::Identity(1, 1);
  prob.q = VecX::Constant(1, -6.0);
  prob.g.resize(0, 1);
  prob.h.resize(0);
  prob.lo = VecX::Constant(1, -kInf);
  prob.hi = VecX::Constant(1, 1.0);
  const QpSolution sol = solve_qp(prob);
  REQUIRE(sol.status == QpStatus::optimal);
  VecX z = sol.z;
  z[0] -= 0.05;
  const KktResiduals r = kkt_residuals(prob, z, sol.duals);
  CHECK(r.complementarity >= 0.05 * sol.duals[2] * 0.99);
  CHECK(r.complementarity > 0.1);
}

}  // TEST_SUITE
