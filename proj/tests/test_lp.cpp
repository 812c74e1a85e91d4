#include <doctest.h>

#include <cmath>

#include "rskit/lp.hpp"

using namespace rskit;

TEST_CASE("textbook maximization") {
  // max 3x + 5y  s.t.  x <= 4, 2y <= 12, 3x + 2y <= 18  (slacks added)
  LinearProgram lp;
  lp.A.resize(3, 5);
  lp.A << 1, 0, 1, 0, 0,
          0, 2, 0, 1, 0,
          3, 2, 0, 0, 1;
  lp.b = Eigen::Vector3d(4, 12, 18);
  lp.c = Eigen::VectorXd::Zero(5);
  lp.c(0) = 3;
  lp.c(1) = 5;
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(36.0));
  CHECK(r.x(0) == doctest::Approx(2.0));
  CHECK(r.x(1) == doctest::Approx(6.0));
  CHECK((lp.A * r.x - lp.b).norm() < 1e-10);
}

TEST_CASE("equality constraints needing phase one") {
  // min x1 + 2 x2 + 3 x3 with x1 + x2 + x3 = 1 and x1 - x3 = 0.2
  LinearProgram lp;
  lp.A.resize(2, 3);
  lp.A << 1, 1, 1, 1, 0, -1;
  lp.b = Eigen::Vector2d(1.0, 0.2);
  lp.c = -Eigen::Vector3d(1, 2, 3);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::optimal);
  // x2 = 0 is best: x1 = 0.6, x3 = 0.4, cost 1.8
  CHECK(-r.value == doctest::Approx(1.8));
}

TEST_CASE("negative right-hand sides") {
  LinearProgram lp;
  lp.A.resize(1, 2);
  lp.A << -1, -1;
  lp.b = Eigen::VectorXd::Constant(1, -2.0);
  lp.c = Eigen::Vector2d(-1.0, -3.0);
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(-2.0));
}

TEST_CASE("infeasible and unbounded problems") {
  LinearProgram infeasible;
  infeasible.A.resize(2, 2);
  infeasible.A << 1, 1, 1, 1;
  infeasible.b = Eigen::Vector2d(1, 2);
  infeasible.c = Eigen::Vector2d(1, 1);
  CHECK(solve_lp(infeasible).status == LpStatus::infeasible);

  LinearProgram unbounded;
  unbounded.A.resize(1, 2);
  unbounded.A << 1, -1;
  unbounded.b = Eigen::VectorXd::Constant(1, 1.0);
  unbounded.c = Eigen::Vector2d(1, 0);
  CHECK(solve_lp(unbounded).status == LpStatus::unbounded);
}

TEST_CASE("degenerate assignment problem terminates") {
  // 4x4 assignment polytope is highly degenerate; optimum of a permutation cost.
  const int n = 4;
  LinearProgram lp;
  lp.A = Eigen::MatrixXd::Zero(2 * n, n * n);
  lp.b = Eigen::VectorXd::Ones(2 * n);
  lp.c.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      lp.A(i, i * n + j) = 1;
      lp.A(n + j, i * n + j) = 1;
      lp.c(i * n + j) = -std::abs(i - ((j + 1) % n));
    }
  const LpResult r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(std::abs(r.value) < 1e-12);
  CHECK(r.pivots < 1000);
}
