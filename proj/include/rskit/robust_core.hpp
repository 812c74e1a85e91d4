#ifndef RSKIT_ROBUST_CORE_HPP
#define RSKIT_ROBUST_CORE_HPP

#include <Eigen/Dense>

#include "rskit/distributions.hpp"
#include "rskit/losses.hpp"
#include "rskit/transport.hpp"

namespace rskit {

/// Finite stand-in for the observation space. Rows of candidate_support are
/// joint points (u, y) and must include every atom of the empirical
/// distribution being evaluated.
struct RobustEvalContext {
  Eigen::MatrixXd candidate_support;
  CostSpec cost;
  LossSpec loss = LossSpec::l1();
  Task task = Task::regression;

  void validate() const;
};

/// sum_i w_i max_z [h(x, z) - k c(xi_i, z)] over the candidate support.
/// Pairs at infinite cost are skipped when k > 0.
double reformulated_objective(const Eigen::VectorXd& x, double k, const DiscreteDistribution& p_hat,
                              const RobustEvalContext& ctx);

/// Continuum version for linear models: the empirical loss when
/// k >= observation_lipschitz(x), +inf otherwise. Available for the
/// feature_only cost and for regression under the joint costs.
double reformulated_objective_closed_form(const Eigen::VectorXd& x, double k, const DiscreteDistribution& p_hat,
                                          const LossSpec& loss, Task task, CostVariant cost);

struct WorstCase {
  double value;
  DiscreteDistribution argmax;
};

/// max_P E_P[h(x, .)] - k d_W(P, p_hat) over P supported on the candidate
/// support, solved as one LP over couplings with p_hat's marginal fixed.
WorstCase worst_case_lp(const Eigen::VectorXd& x, double k, const DiscreteDistribution& p_hat,
                        const RobustEvalContext& ctx);

/// Smallest k >= 0 with reformulated_objective(x, k) <= tau, by bisection on
/// [0, Lip (||x|| + 1) + 1] to 1e-8. +inf when even the top of the bracket
/// fails.
double fragility(const Eigen::VectorXd& x, const DiscreteDistribution& p_hat, double tau,
                 const RobustEvalContext& ctx);

double fragility_closed_form(const Eigen::VectorXd& x, const DiscreteDistribution& p_hat, double tau,
                             const LossSpec& loss, Task task, CostVariant cost);

/// Lipschitz constant of xi -> h(x, xi) under the cost:
/// Lip(L) ||x|| for feature_only, Lip(L) ||(x, -1)|| for the joint costs
/// (regression only).
double observation_lipschitz(const Eigen::VectorXd& x, const LossSpec& loss, Task task, CostVariant cost);

}  // namespace rskit

#endif  // RSKIT_ROBUST_CORE_HPP
