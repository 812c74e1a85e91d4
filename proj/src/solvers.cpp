#include "rskit/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rskit/errors.hpp"

namespace rskit {

namespace {

constexpr double kMuCold = 1e-1;
constexpr double kMuWarm = 1e-3;
constexpr double kMuFinal = 1e-9;
constexpr int kStageIters = 80;

struct Penalty {
  double lambda;
  NormVariant variant;
  double ridge;
};

void add_penalty(RiskModel& m, const Eigen::VectorXd& x, const Penalty& pen, double mu, Order order) {
  const Eigen::Index d = x.size();
  if (pen.lambda > 0.0) {
    const double sq = x.squaredNorm();
    const double n = pen.variant == NormVariant::augmented ? std::sqrt(sq + 1.0) : std::sqrt(sq + mu * mu);
    m.value += pen.lambda * n;
    if (order != Order::value && n > 0.0) m.gradient += (pen.lambda / n) * x;
    if (order == Order::hessian && n > 0.0)
      m.hessian += (pen.lambda / n) * (Eigen::MatrixXd::Identity(d, d) - x * x.transpose() / (n * n));
  }
  if (pen.ridge > 0.0) {
    m.value += pen.ridge * x.squaredNorm();
    if (order != Order::value) m.gradient += 2.0 * pen.ridge * x;
    if (order == Order::hessian) m.hessian.diagonal().array() += 2.0 * pen.ridge;
  }
}

double exact_objective(const LinearRisk& risk, const LossSpec& loss, const Penalty& pen, const Eigen::VectorXd& x) {
  return risk_value(risk, loss, x) + pen.lambda * norm_of(x, pen.variant) + pen.ridge * x.squaredNorm();
}

ErmResult newton_continuation(const LinearRisk& risk, const LossSpec& loss, const Penalty& pen,
                              const SolverOptions& opts, const Eigen::VectorXd& warm) {
  const Eigen::Index d = risk.dim();
  Eigen::VectorXd x = warm.size() == d ? warm : Eigen::VectorXd::Zero(d);
  int iterations = 0;
  double residual = 0.0;
  for (double mu = warm.size() == d ? kMuWarm : kMuCold;; mu *= 0.1) {
    const bool last = mu <= kMuFinal * 1.0001;
    const double stage_tol = last ? 1e-20 : 1e-3 * mu;
    for (int it = 0; it < kStageIters; ++it) {
      RiskModel m = risk_model(risk, loss, x, mu, Order::hessian);
      add_penalty(m, x, pen, mu, Order::hessian);
      Eigen::VectorXd step;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(m.hessian);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) step = -ldlt.solve(m.gradient);
      if (step.size() != d || !step.allFinite() || m.gradient.dot(step) >= 0.0) step = -m.gradient;
      const double decrement = -m.gradient.dot(step);
      residual = decrement;
      if (++iterations > opts.max_iters)
        throw ConvergenceError("newton continuation exceeded " + std::to_string(opts.max_iters) + " iterations",
                               residual);
      if (decrement <= stage_tol * (1.0 + std::abs(m.value))) break;

      bool accepted = false;
      for (double t = 1.0; t > 1e-12; t *= 0.5) {
        const Eigen::VectorXd trial = x + t * step;
        RiskModel trial_model = risk_model(risk, loss, trial, mu, Order::value);
        add_penalty(trial_model, trial, pen, mu, Order::value);
        if (trial_model.value <= m.value - 0.25 * t * decrement) {
          x = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;  // no representable descent left at this smoothing level
    }
    if (last) break;
  }
  ErmResult out;
  out.x = std::move(x);
  out.min_loss = risk_value(risk, loss, out.x);
  out.diagnostics.iterations = iterations;
  out.diagnostics.inner_solves = 1;
  out.diagnostics.residual = residual;
  return out;
}

Eigen::VectorXd penalty_subgradient(const Eigen::VectorXd& x, const Penalty& pen) {
  Eigen::VectorXd g = 2.0 * pen.ridge * x;
  if (pen.lambda > 0.0) {
    const double n = norm_of(x, pen.variant);
    if (n > 0.0) g += (pen.lambda / n) * x;
  }
  return g;
}

ErmResult subgradient_descent(const LinearRisk& risk, const LossSpec& loss, const Penalty& pen,
                              const SolverOptions& opts, const Eigen::VectorXd& warm) {
  const Eigen::Index d = risk.dim();
  Eigen::VectorXd x = warm.size() == d ? warm : Eigen::VectorXd::Zero(d);
  double mean_row_norm = 0.0;
  for (Eigen::Index i = 0; i < risk.size(); ++i) mean_row_norm += risk.coef.row(i).norm();
  mean_row_norm /= static_cast<double>(risk.size());
  const double base_step = 1.0 / (loss.lipschitz() * std::max(mean_row_norm, 1e-12));

  Eigen::VectorXd best = x, average = Eigen::VectorXd::Zero(d);
  double best_value = exact_objective(risk, loss, pen, x);
  double weight_sum = 0.0, polyak_scale = -1.0;
  double value = best_value, best_at_checkpoint = best_value;
  const int checkpoint = std::max(1, opts.max_iters * 9 / 10);
  int t = 1;
  for (; t <= opts.max_iters; ++t) {
    const Eigen::VectorXd g = risk_subgradient(risk, loss, x) + penalty_subgradient(x, pen);
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) break;
    double step = base_step / std::sqrt(static_cast<double>(t));
    if (opts.step_rule == StepRule::polyak) {
      // Polyak step towards a target that approaches the best value.
      if (polyak_scale < 0.0) polyak_scale = base_step * g2;
      step = (value - best_value + polyak_scale / std::sqrt(static_cast<double>(t))) / g2;
    }
    x -= step * g;
    average += step * x;
    weight_sum += step;
    value = exact_objective(risk, loss, pen, x);
    if (value < best_value) {
      best_value = value;
      best = x;
    }
    if (t == checkpoint) best_at_checkpoint = best_value;
  }
  if (weight_sum > 0.0) {
    const Eigen::VectorXd averaged = average / weight_sum;
    const double averaged_value = exact_objective(risk, loss, pen, averaged);
    if (averaged_value < best_value) {
      best_value = averaged_value;
      best = averaged;
    }
  }
  const double residual = t > opts.max_iters ? best_at_checkpoint - best_value : 0.0;
  if (residual > opts.rel_tol * (1.0 + std::abs(best_value)))
    throw ConvergenceError("subgradient descent still improving after " + std::to_string(opts.max_iters) +
                               " iterations",
                           residual);
  ErmResult out;
  out.x = std::move(best);
  out.min_loss = risk_value(risk, loss, out.x);
  out.diagnostics.iterations = std::min(t, opts.max_iters);
  out.diagnostics.inner_solves = 1;
  out.diagnostics.residual = residual;
  return out;
}

void accumulate(SolveDiagnostics& total, const SolveDiagnostics& part) {
  total.iterations += part.iterations;
  total.inner_solves += part.inner_solves;
  total.residual = part.residual;
}

}  // namespace

void SolverOptions::validate() const {
  if (max_iters < 1) throw ParameterError("max_iters must be positive");
  if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw ParameterError("rel_tol must lie in (0, 1e-2]");
  if (!(constraint_tol > 0.0 && constraint_tol <= 1e-2))
    throw ParameterError("constraint_tol must lie in (0, 1e-2]");
  if (!(ridge_tiebreak >= 0.0)) throw ParameterError("ridge_tiebreak must be nonnegative");
}

double norm_of(const Eigen::VectorXd& x, NormVariant variant) {
  return variant == NormVariant::augmented ? std::sqrt(x.squaredNorm() + 1.0) : x.norm();
}

double empirical_loss(const Dataset& data, const LossSpec& loss, Task task, const Eigen::VectorXd& x) {
  return risk_value(LinearRisk::from_dataset(data, task), loss, x);
}

ErmResult minimize_regularized(const LinearRisk& risk, const LossSpec& loss, double lambda, NormVariant variant,
                               const SolverOptions& opts, const Eigen::VectorXd& warm) {
  opts.validate();
  require_lipschitz(loss);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("regularization weight must be >= 0");
  const Penalty pen{lambda, variant, opts.ridge_tiebreak};
  return opts.method == SolverMethod::newton ? newton_continuation(risk, loss, pen, opts, warm)
                                             : subgradient_descent(risk, loss, pen, opts, warm);
}

ErmResult solve_erm(const Dataset& data, const LossSpec& loss, Task task, const SolverOptions& opts) {
  return minimize_regularized(LinearRisk::from_dataset(data, task), loss, 0.0, NormVariant::x_only, opts);
}

Eigen::VectorXd solve_regularized(const Dataset& data, const LossSpec& loss, Task task, double lambda,
                                  NormVariant variant, const SolverOptions& opts) {
  return minimize_regularized(LinearRisk::from_dataset(data, task), loss, lambda, variant, opts).x;
}

ReferenceValue reference_value(const Dataset& data, const LossSpec& loss, Task task, double epsilon,
                               const SolverOptions& opts) {
  if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be nonnegative");
  const ErmResult erm = solve_erm(data, loss, task, opts);
  return {(1.0 + epsilon) * erm.min_loss, erm.min_loss};
}

RsSolution solve_rs(const Dataset& data, const LossSpec& loss, Task task, double epsilon, NormVariant variant,
                    const SolverOptions& opts) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ParameterError("epsilon must be nonnegative");
  opts.validate();
  require_lipschitz(loss);
  const LinearRisk risk = LinearRisk::from_dataset(data, task);
  const Eigen::Index d = risk.dim();
  const double lip = loss.lipschitz();

  RsSolution sol;
  sol.epsilon = epsilon;
  sol.norm_variant = variant;
  const ErmResult erm = minimize_regularized(risk, loss, 0.0, variant, opts);
  accumulate(sol.diagnostics, erm.diagnostics);
  sol.erm_min_loss = erm.min_loss;
  sol.tau = (1.0 + epsilon) * erm.min_loss;

  double max_row = 0.0;
  for (Eigen::Index i = 0; i < risk.size(); ++i) max_row = std::max(max_row, risk.coef.row(i).norm());
  const double upper = lip * max_row + 1.0;

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
  const double zero_loss = risk_value(risk, loss, zero);
  if (zero_loss <= sol.tau) {
    // The unconstrained norm minimizer is feasible; every lambda past the
    // bracket top reproduces it.
    sol.x_hat = zero;
    sol.lambda_hat = upper;
    sol.empirical_loss = zero_loss;
    sol.diagnostics.zero_feasible = true;
  } else {
    double lo = 0.0, hi = upper;
    Eigen::VectorXd x_lo = erm.x, x_hi = zero;
    double loss_lo = erm.min_loss;
    if (variant == NormVariant::augmented) {
      // x(lambda) only tends to zero, so grow the bracket until it is infeasible.
      int doublings = 0;
      for (;;) {
        const ErmResult r = minimize_regularized(risk, loss, hi, variant, opts, x_lo);
        accumulate(sol.diagnostics, r.diagnostics);
        if (r.min_loss > sol.tau) {
          x_hi = r.x;
          break;
        }
        lo = hi;
        x_lo = r.x;
        loss_lo = r.min_loss;
        hi *= 2.0;
        if (++doublings > 60)
          throw ConvergenceError("solve_rs: could not bracket the multiplier", hi);
      }
    }
    while (hi - lo > opts.rel_tol * (1.0 + lo)) {
      const double mid = 0.5 * (lo + hi);
      const ErmResult r = minimize_regularized(risk, loss, mid, variant, opts, x_lo);
      accumulate(sol.diagnostics, r.diagnostics);
      if (r.min_loss <= sol.tau) {
        lo = mid;
        x_lo = r.x;
        loss_lo = r.min_loss;
      } else {
        hi = mid;
        x_hi = r.x;
      }
    }
    // With a polyhedral loss the minimizers at lambda_hat can form a segment
    // on a ray, and the path jumps across it. The constrained optimum then
    // sits on the segment between the two bracket ends; the loss is convex
    // along it, so bisect for the last feasible point.
    double t_lo = 0.0, t_hi = 1.0;
    const Eigen::VectorXd dir = x_hi - x_lo;
    if (dir.norm() > 0.0) {
      for (int it = 0; it < 60 && t_hi - t_lo > 1e-14; ++it) {
        const double t = 0.5 * (t_lo + t_hi);
        (risk_value(risk, loss, x_lo + t * dir) <= sol.tau ? t_lo : t_hi) = t;
      }
      if (t_lo > 0.0) {
        x_lo += t_lo * dir;
        loss_lo = risk_value(risk, loss, x_lo);
      }
    }
    sol.x_hat = std::move(x_lo);
    sol.lambda_hat = lo;
    sol.empirical_loss = loss_lo;
  }
  sol.k_tau = lip * norm_of(sol.x_hat, variant);
  sol.diagnostics.constraint_gap = sol.tau - sol.empirical_loss;
  return sol;
}

DroSolution solve_dro(const Dataset& data, const LossSpec& loss, Task task, double radius, NormVariant variant,
                      const SolverOptions& opts) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw ParameterError("radius must be nonnegative");
  const LinearRisk risk = LinearRisk::from_dataset(data, task);
  const ErmResult r = minimize_regularized(risk, loss, radius, variant, opts);
  DroSolution sol;
  sol.x_hat = r.x;
  sol.radius = radius;
  sol.objective = r.min_loss + radius * norm_of(r.x, variant);
  sol.diagnostics = r.diagnostics;
  return sol;
}

ErmResult minimize_expected_loss(const DiscreteDistribution& dist, const LossSpec& loss, Task task,
                                 const SolverOptions& opts) {
  const LinearRisk risk = LinearRisk::from_weighted(dist.as_dataset(), dist.weights(), task);
  return minimize_regularized(risk, loss, 0.0, NormVariant::x_only, opts);
}

double expected_loss(const DiscreteDistribution& dist, const LossSpec& loss, Task task, const Eigen::VectorXd& x) {
  return risk_value(LinearRisk::from_weighted(dist.as_dataset(), dist.weights(), task), loss, x);
}

std::string to_string(NormVariant v) { return v == NormVariant::x_only ? "x_only" : "augmented"; }

NormVariant norm_variant_from_name(std::string_view name) {
  if (name == "x_only") return NormVariant::x_only;
  if (name == "augmented") return NormVariant::augmented;
  throw ParameterError("unknown norm variant '" + std::string(name) + "'");
}

std::string to_string(StepRule r) { return r == StepRule::decaying ? "decaying" : "polyak"; }

StepRule step_rule_from_name(std::string_view name) {
  if (name == "decaying") return StepRule::decaying;
  if (name == "polyak") return StepRule::polyak;
  throw ParameterError("unknown step rule '" + std::string(name) + "'");
}

std::string to_string(SolverMethod m) { return m == SolverMethod::newton ? "newton" : "subgradient"; }

SolverMethod solver_method_from_name(std::string_view name) {
  if (name == "newton") return SolverMethod::newton;
  if (name == "subgradient") return SolverMethod::subgradient;
  throw ParameterError("unknown solver method '" + std::string(name) + "'");
}

}  // namespace rskit
