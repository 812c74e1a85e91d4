#ifndef RSKIT_SOLVERS_HPP
#define RSKIT_SOLVERS_HPP

#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "rskit/distributions.hpp"
#include "rskit/kernels.hpp"
#include "rskit/losses.hpp"

namespace rskit {

/// Which norm regularizes x: ||x|| pairs with the feature_only cost,
/// ||(x, -1)|| with the full joint l2 cost.
enum class NormVariant { x_only, augmented };

enum class StepRule { decaying, polyak };

/// newton: smoothing continuation (|t| -> sqrt(t^2 + mu^2), mu -> 1e-9)
/// with damped Newton steps; accurate to ~1e-9 in objective.
/// subgradient: full-batch subgradient descent with iterate averaging.
enum class SolverMethod { newton, subgradient };

struct SolverOptions {
  int max_iters = 400;
  StepRule step_rule = StepRule::decaying;
  double rel_tol = 1e-7;
  double constraint_tol = 1e-6;
  double ridge_tiebreak = 1e-8;
  SolverMethod method = SolverMethod::newton;

  void validate() const;
};

struct SolveDiagnostics {
  int iterations = 0;         // Newton or subgradient steps, summed over inner solves
  int inner_solves = 0;       // regularized problems solved
  double residual = 0.0;      // last optimality measure
  double constraint_gap = 0.0;  // tau - empirical loss at the returned point (RS only)
  bool zero_feasible = false;   // RS: x = 0 already met the reference value
};

struct ErmResult {
  Eigen::VectorXd x;
  double min_loss = 0.0;
  SolveDiagnostics diagnostics;
};

struct ReferenceValue {
  double tau;
  double erm_min_loss;
};

/// Result of min norm(x) s.t. empirical loss <= tau.
struct RsSolution {
  Eigen::VectorXd x_hat;
  double k_tau = 0.0;
  double lambda_hat = 0.0;
  double tau = 0.0;
  double epsilon = 0.0;
  double erm_min_loss = 0.0;
  double empirical_loss = 0.0;
  NormVariant norm_variant = NormVariant::x_only;
  SolveDiagnostics diagnostics;
};

struct DroSolution {
  Eigen::VectorXd x_hat;
  double radius = 0.0;
  double objective = 0.0;
  SolveDiagnostics diagnostics;
};

double norm_of(const Eigen::VectorXd& x, NormVariant variant);

double empirical_loss(const Dataset& data, const LossSpec& loss, Task task, const Eigen::VectorXd& x);

/// Minimizes sum_i w_i L(.) + lambda * norm(x) + ridge * ||x||^2 on a
/// prepared risk. `warm` seeds the iteration when non-empty.
ErmResult minimize_regularized(const LinearRisk& risk, const LossSpec& loss, double lambda, NormVariant variant,
                               const SolverOptions& opts, const Eigen::VectorXd& warm = {});

ErmResult solve_erm(const Dataset& data, const LossSpec& loss, Task task, const SolverOptions& opts = {});

Eigen::VectorXd solve_regularized(const Dataset& data, const LossSpec& loss, Task task, double lambda,
                                  NormVariant variant, const SolverOptions& opts = {});

/// tau = (1 + epsilon) * min_x empirical loss.
ReferenceValue reference_value(const Dataset& data, const LossSpec& loss, Task task, double epsilon,
                               const SolverOptions& opts = {});

/// Bisection on the multiplier of the regularization path: lambda_hat is the
/// largest lambda whose regularized minimizer still meets tau, and
/// x_hat = x(lambda_hat). k_tau = Lip(L) * norm(x_hat).
RsSolution solve_rs(const Dataset& data, const LossSpec& loss, Task task, double epsilon, NormVariant variant,
                    const SolverOptions& opts = {});

DroSolution solve_dro(const Dataset& data, const LossSpec& loss, Task task, double radius, NormVariant variant,
                      const SolverOptions& opts = {});

/// min_x E_P[h(x, xi)] for a finitely supported P over joint points (u, y).
ErmResult minimize_expected_loss(const DiscreteDistribution& dist, const LossSpec& loss, Task task,
                                 const SolverOptions& opts = {});

double expected_loss(const DiscreteDistribution& dist, const LossSpec& loss, Task task, const Eigen::VectorXd& x);

std::string to_string(NormVariant v);
NormVariant norm_variant_from_name(std::string_view name);
std::string to_string(StepRule r);
StepRule step_rule_from_name(std::string_view name);
std::string to_string(SolverMethod m);
SolverMethod solver_method_from_name(std::string_view name);

}  // namespace rskit

#endif  // RSKIT_SOLVERS_HPP
