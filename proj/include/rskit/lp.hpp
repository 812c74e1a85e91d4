#ifndef RSKIT_LP_HPP
#define RSKIT_LP_HPP

#include <Eigen/Dense>

namespace rskit {

/// maximize c.x  subject to  A x = b,  x >= 0
struct LinearProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
  LpStatus status = LpStatus::iteration_limit;
  double value = 0.0;
  Eigen::VectorXd x;
  int pivots = 0;
};

/// Dense two-phase tableau simplex. Dantzig pricing, switching to Bland's
/// rule after a run of degenerate pivots so that it cannot cycle. Meant for
/// verification-sized problems (a few hundred columns), not for speed.
LpResult solve_lp(const LinearProgram& lp, int max_pivots = 100000);

}  // namespace rskit

#endif  // RSKIT_LP_HPP
