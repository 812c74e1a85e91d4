#include "rskit/robust_core.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "rskit/errors.hpp"
#include "rskit/lp.hpp"
#include "rskit/solvers.hpp"

namespace rskit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::span<const double> row_span(const Eigen::MatrixXd& rowmajor_copy, Eigen::Index i, Eigen::Index cols) {
  return {rowmajor_copy.data() + i * cols, static_cast<std::size_t>(cols)};
}

// Row-major copy so rows can be handed out as contiguous spans.
Eigen::MatrixXd row_major(const Eigen::MatrixXd& m) { return m.transpose(); }

double loss_at(const Eigen::VectorXd& x, std::span<const double> point, const LossSpec& loss, Task task) {
  const std::size_t d = point.size() - 1;
  return pointwise_loss(loss, task, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                        point.first(d), point[d]);
}

struct Tables {
  Eigen::VectorXd h;     // h(x, z_j)
  Eigen::MatrixXd cost;  // c(xi_i, z_j)
};

Tables build_tables(const Eigen::VectorXd& x, const DiscreteDistribution& p_hat, const RobustEvalContext& ctx) {
  ctx.validate();
  if (p_hat.dim() != ctx.candidate_support.cols())
    throw ShapeError("empirical distribution and candidate support differ in dimension");
  if (x.size() + 1 != ctx.candidate_support.cols()) throw ShapeError("decision vector does not match support");

  const Eigen::Index m = ctx.candidate_support.cols();
  const Eigen::MatrixXd support = row_major(ctx.candidate_support);
  for (Eigen::Index i = 0; i < p_hat.size(); ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < ctx.candidate_support.rows() && !found; ++j)
      found = (ctx.candidate_support.row(j).array() == p_hat.points().row(i).array()).all();
    if (!found)
      throw ValidationError("empirical atom " + std::to_string(i) + " is not in the candidate support");
  }

  Tables t;
  t.h.resize(ctx.candidate_support.rows());
  for (Eigen::Index j = 0; j < t.h.size(); ++j) t.h[j] = loss_at(x, row_span(support, j, m), ctx.loss, ctx.task);
  t.cost = cost_matrix(ctx.cost, p_hat.points(), ctx.candidate_support);
  return t;
}

double reward(double h, double k, double c) {
  if (k == 0.0) return h;
  return std::isinf(c) ? -kInf : h - k * c;
}

}  // namespace

void RobustEvalContext::validate() const {
  if (candidate_support.rows() == 0 || candidate_support.cols() < 2)
    throw ValidationError("candidate support must hold at least one joint point (u, y)");
  if (!candidate_support.allFinite()) throw ValidationError("candidate support has non-finite entries");
}

double reformulated_objective(const Eigen::VectorXd& x, double k, const DiscreteDistribution& p_hat,
                              const RobustEvalContext& ctx) {
  if (!(k >= 0.0)) throw ParameterError("k must be nonnegative");
  const Tables t = build_tables(x, p_hat, ctx);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p_hat.size(); ++i) {
    double best = -kInf;
    for (Eigen::Index j = 0; j < t.h.size(); ++j) best = std::max(best, reward(t.h[j], k, t.cost(i, j)));
    total += p_hat.weights()[i] * best;
  }
  return total;
}

double observation_lipschitz(const Eigen::VectorXd& x, const LossSpec& loss, Task task, CostVariant cost) {
  require_lipschitz(loss);
  if (cost == CostVariant::feature_only) return loss.lipschitz() * x.norm();
  if (task == Task::classification)
    throw ParameterError("classification losses are not Lipschitz in the label under a joint cost");
  return loss.lipschitz() * std::sqrt(x.squaredNorm() + 1.0);
}

double reformulated_objective_closed_form(const Eigen::VectorXd& x, double k, const DiscreteDistribution& p_hat,
                                          const LossSpec& loss, Task task, CostVariant cost) {
  if (!(k >= 0.0)) throw ParameterError("k must be nonnegative");
  if (k < observation_lipschitz(x, loss, task, cost)) return kInf;
  return expected_loss(p_hat, loss, task, x);
}

WorstCase worst_case_lp(const Eigen::VectorXd& x, double k, const DiscreteDistribution& p_hat,
                        const RobustEvalContext& ctx) {
  if (!(k >= 0.0)) throw ParameterError("k must be nonnegative");
  const Tables t = build_tables(x, p_hat, ctx);
  const Eigen::Index n = p_hat.size(), s = t.h.size();

  // Columns: one per admissible pair (i, j), then the target masses P_j.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      if (std::isfinite(reward(t.h[j], k, t.cost(i, j)))) pairs.emplace_back(i, j);
  const Eigen::Index np = static_cast<Eigen::Index>(pairs.size());

  LinearProgram lp;
  lp.A = Eigen::MatrixXd::Zero(n + s, np + s);
  lp.b = Eigen::VectorXd::Zero(n + s);
  lp.c = Eigen::VectorXd::Zero(np + s);
  for (Eigen::Index col = 0; col < np; ++col) {
    const auto [i, j] = pairs[static_cast<std::size_t>(col)];
    lp.A(i, col) = 1.0;
    lp.A(n + j, col) = 1.0;
    lp.c[col] = k == 0.0 ? 0.0 : -k * t.cost(i, j);
  }
  for (Eigen::Index j = 0; j < s; ++j) {
    lp.A(n + j, np + j) = -1.0;
    lp.c[np + j] = t.h[j];
  }
  lp.b.head(n) = p_hat.weights();

  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::optimal) throw ConvergenceError("worst-case LP did not reach optimality", res.pivots);

  Eigen::VectorXd mass = res.x.tail(s).cwiseMax(0.0);
  mass /= mass.sum();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < s; ++j)
    if (mass[j] > 1e-12) keep.push_back(j);  // drop simplex round-off residue
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(keep.size()), ctx.candidate_support.cols());
  Eigen::VectorXd w(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    pts.row(static_cast<Eigen::Index>(r)) = ctx.candidate_support.row(keep[r]);
    w[static_cast<Eigen::Index>(r)] = mass[keep[r]];
  }
  w /= w.sum();
  return {res.value, DiscreteDistribution(std::move(pts), std::move(w))};
}

double fragility(const Eigen::VectorXd& x, const DiscreteDistribution& p_hat, double tau,
                 const RobustEvalContext& ctx) {
  require_lipschitz(ctx.loss);
  double lo = 0.0, hi = ctx.loss.lipschitz() * (x.norm() + 1.0) + 1.0;
  if (reformulated_objective(x, lo, p_hat, ctx) <= tau) return 0.0;
  if (reformulated_objective(x, hi, p_hat, ctx) > tau) return kInf;
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (reformulated_objective(x, mid, p_hat, ctx) <= tau)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double fragility_closed_form(const Eigen::VectorXd& x, const DiscreteDistribution& p_hat, double tau,
                             const LossSpec& loss, Task task, CostVariant cost) {
  const double lip = observation_lipschitz(x, loss, task, cost);
  return expected_loss(p_hat, loss, task, x) <= tau ? lip : kInf;
}

}  // namespace rskit
