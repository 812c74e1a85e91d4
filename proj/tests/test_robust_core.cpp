#include <doctest.h>

#include <cmath>
#include <random>

#include "rskit/distributions.hpp"
#include "rskit/errors.hpp"
#include "rskit/robust_core.hpp"
#include "rskit/solvers.hpp"
#include "rskit/transport.hpp"

using namespace rskit;

namespace {

// p_hat from a small synthetic sample plus extra random candidate points.
struct Instance {
  DiscreteDistribution p_hat;
  RobustEvalContext ctx;
};

Instance make_instance(std::mt19937_64& gen, int n, int extra, CostVariant cost) {
  const Dataset data = generate_synthetic(SyntheticConfig{}, n, gen());
  Instance inst{empirical_distribution(data), RobustEvalContext{}};
  std::normal_distribution<double> noise(0.0, 0.7);
  Eigen::MatrixXd support(inst.p_hat.size() + extra, 3);
  support.topRows(inst.p_hat.size()) = inst.p_hat.points();
  for (int j = 0; j < extra; ++j) {
    support.row(inst.p_hat.size() + j) = inst.p_hat.points().row(j % inst.p_hat.size());
    support(inst.p_hat.size() + j, 0) += noise(gen);
    support(inst.p_hat.size() + j, 1) += noise(gen);
    if (cost != CostVariant::feature_only) support(inst.p_hat.size() + j, 2) += noise(gen);
  }
  inst.ctx.candidate_support = support;
  inst.ctx.cost = CostSpec{cost};
  return inst;
}

double h(const RobustEvalContext& ctx, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  return pointwise_loss(ctx.loss, ctx.task, std::span<const double>(x.data(), x.size()),
                        std::span<const double>(z.data(), z.size() - 1), z(z.size() - 1));
}

}  // namespace

TEST_CASE("LP worst case equals the reformulated objective") {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> coord(-3.0, 3.0), kdist(0.0, 4.0);
  for (int trial = 0; trial < 60; ++trial) {
    const CostVariant cost = trial % 2 ? CostVariant::full_l2 : CostVariant::feature_only;
    Instance inst = make_instance(gen, 3 + trial % 6, 2 + trial % 9, cost);
    if (trial % 3 == 0) inst.ctx.loss = LossSpec::huber(0.7);
    const Eigen::Vector2d x(coord(gen), coord(gen));
    const double k = kdist(gen);
    const WorstCase wc = worst_case_lp(x, k, inst.p_hat, inst.ctx);
    const double ref = reformulated_objective(x, k, inst.p_hat, inst.ctx);
    CAPTURE(trial);
    CHECK(std::abs(wc.value - ref) <= 1e-7 * (1.0 + std::abs(ref)));
    // The worst-case distribution attains the value: E_P[h] - k d_W(P, p_hat).
    double e = 0.0;
    for (Eigen::Index j = 0; j < wc.argmax.size(); ++j) e += wc.argmax.weights()(j) * h(inst.ctx, x, wc.argmax.point(j));
    const double d = wasserstein(wc.argmax, inst.p_hat, inst.ctx.cost).distance;
    CHECK(e - k * d >= wc.value - 1e-7 * (1.0 + std::abs(wc.value)));
  }
}

TEST_CASE("limiting values of the worst case") {
  std::mt19937_64 gen(11);
  const Instance inst = make_instance(gen, 5, 5, CostVariant::full_l2);
  const Eigen::Vector2d x(1.5, -0.5);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < inst.ctx.candidate_support.rows(); ++j)
    worst = std::max(worst, h(inst.ctx, x, inst.ctx.candidate_support.row(j).transpose()));
  CHECK(reformulated_objective(x, 0.0, inst.p_hat, inst.ctx) == doctest::Approx(worst));
  const WorstCase at_zero = worst_case_lp(x, 0.0, inst.p_hat, inst.ctx);
  CHECK(at_zero.value == doctest::Approx(worst));
  CHECK(at_zero.argmax.size() == 1);

  const double emp = expected_loss(inst.p_hat, inst.ctx.loss, inst.ctx.task, x);
  CHECK(reformulated_objective(x, 1e6, inst.p_hat, inst.ctx) == doctest::Approx(emp));
  const WorstCase at_big = worst_case_lp(x, 1e6, inst.p_hat, inst.ctx);
  CHECK(at_big.value == doctest::Approx(emp));
  CHECK(wasserstein(at_big.argmax, inst.p_hat).distance <= 1e-12);
}

TEST_CASE("closed form threshold") {
  const Dataset data = generate_synthetic(SyntheticConfig{}, 25, 3);
  const DiscreteDistribution p = empirical_distribution(data);
  const Eigen::Vector2d x(1.2, -0.7);
  const double nx = x.norm();
  CHECK(std::isinf(reformulated_objective_closed_form(x, 0.9 * nx, p, LossSpec::l1(), Task::regression,
                                                      CostVariant::feature_only)));
  CHECK(reformulated_objective_closed_form(x, 1.1 * nx, p, LossSpec::l1(), Task::regression,
                                           CostVariant::feature_only) ==
        doctest::Approx(empirical_loss(data, LossSpec::l1(), Task::regression, x)));
  CHECK(observation_lipschitz(x, LossSpec::pinball(0.25), Task::regression, CostVariant::full_l2) ==
        doctest::Approx(0.75 * std::sqrt(nx * nx + 1.0)));
  CHECK_THROWS_AS(observation_lipschitz(x, LossSpec::hinge(), Task::classification, CostVariant::full_l2),
                  ParameterError);
}

TEST_CASE("fragility bisection certificate") {
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = make_instance(gen, 5, 6, CostVariant::full_l2);
    const Eigen::Vector2d x(2.0 + 0.1 * trial, -1.0);
    const double emp = expected_loss(inst.p_hat, inst.ctx.loss, inst.ctx.task, x);
    const double tau = emp + 0.05;
    const double k = fragility(x, inst.p_hat, tau, inst.ctx);
    REQUIRE(std::isfinite(k));
    CHECK(worst_case_lp(x, k, inst.p_hat, inst.ctx).value <= tau + 1e-6);
    if (k > 1e-3) CHECK(worst_case_lp(x, k - 1e-3, inst.p_hat, inst.ctx).value > tau);
    CHECK(k <= observation_lipschitz(x, inst.ctx.loss, inst.ctx.task, CostVariant::full_l2) + 1e-8);
    CHECK(std::isinf(fragility(x, inst.p_hat, emp - 1e-3, inst.ctx)));
  }
}

TEST_CASE("closed-form fragility") {
  const Dataset data = generate_synthetic(SyntheticConfig{}, 30, 4);
  const DiscreteDistribution p = empirical_distribution(data);
  const Eigen::Vector2d x(1.9, -0.8);
  const double emp = empirical_loss(data, LossSpec::l1(), Task::regression, x);
  CHECK(fragility_closed_form(x, p, emp + 0.01, LossSpec::l1(), Task::regression, CostVariant::feature_only) ==
        doctest::Approx(x.norm()));
  CHECK(std::isinf(
      fragility_closed_form(x, p, emp - 0.01, LossSpec::l1(), Task::regression, CostVariant::feature_only)));
}

TEST_CASE("RS fragility never exceeds the observation Lipschitz constant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset data = generate_synthetic(SyntheticConfig{}, 60, 500 + seed);
    for (const LossSpec& loss : {LossSpec::l1(), LossSpec::huber(0.5), LossSpec::pinball(0.3)}) {
      const RsSolution rs = solve_rs(data, loss, Task::regression, 0.1, NormVariant::x_only);
      CHECK(rs.k_tau <= observation_lipschitz(rs.x_hat, loss, Task::regression, CostVariant::feature_only) + 1e-8);
    }
  }
}

TEST_CASE("RS constraint holds against perturbed distributions") {
  std::mt19937_64 gen(13);
  const Dataset data = generate_synthetic(SyntheticConfig{}, 15, 77);
  const DiscreteDistribution p_hat = empirical_distribution(data);
  const RsSolution rs = solve_rs(data, LossSpec::l1(), Task::regression, 0.2, NormVariant::augmented);
  std::normal_distribution<double> noise(0.0, 0.5);
  std::uniform_real_distribution<double> mass(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd pts = p_hat.points();
    Eigen::VectorXd w(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      for (int j = 0; j < 3; ++j) pts(i, j) += noise(gen);
      w(i) = mass(gen) + 1e-3;
    }
    w /= w.sum();
    w(w.size() - 1) = 1.0 - w.head(w.size() - 1).sum();
    const DiscreteDistribution p(pts, w);
    const double lhs = expected_loss(p, LossSpec::l1(), Task::regression, rs.x_hat) - rs.tau;
    const double rhs = rs.k_tau * wasserstein(p, p_hat).distance;
    CHECK(lhs <= rhs + 1e-6);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("context validation") {
  std::mt19937_64 gen(14);
  const Instance inst = make_instance(gen, 4, 0, CostVariant::full_l2);
  RobustEvalContext missing = inst.ctx;
  missing.candidate_support = inst.ctx.candidate_support.topRows(2);
  CHECK_THROWS_AS(reformulated_objective(Eigen::Vector2d(1, 1), 1.0, inst.p_hat, missing), ValidationError);
}
