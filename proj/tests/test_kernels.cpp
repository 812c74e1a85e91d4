#include <doctest.h>

#include <omp.h>

#include "rskit/distributions.hpp"
#include "rskit/errors.hpp"
#include "rskit/kernels.hpp"

using namespace rskit;

namespace {

const LossSpec kLosses[] = {LossSpec::l1(), LossSpec::hinge(), LossSpec::huber(0.5), LossSpec::pinball(0.3),
                            LossSpec::insensitive(0.1), LossSpec::logistic()};

}  // namespace

TEST_CASE("parallel kernels agree with the serial reference") {
  SyntheticConfig cfg;
  cfg.m_u = 3;
  cfg.x_star = Eigen::Vector3d(1.0, -2.0, 0.5);
  const Eigen::Vector3d x(0.3, -1.1, 2.0);
  for (Eigen::Index n : {1, 255, 256, 257, 5000}) {
    const Dataset data = generate_synthetic(cfg, n, 4);
    for (Task task : {Task::regression, Task::classification}) {
      Dataset d = data;
      if (task == Task::classification) d.labels = d.labels.array().sign();
      const LinearRisk risk = LinearRisk::from_dataset(d, task);
      for (const LossSpec& loss : kLosses) {
        CAPTURE(n);
        CAPTURE(loss.name());
        const double scale = 1.0 + std::abs(risk_value_serial(risk, loss, x));
        CHECK(std::abs(risk_value(risk, loss, x) - risk_value_serial(risk, loss, x)) <= 1e-12 * scale);
        for (double mu : {0.0, 1e-2}) {
          const RiskModel par = risk_model(risk, loss, x, mu, Order::hessian);
          const RiskModel ser = risk_model_serial(risk, loss, x, mu, Order::hessian);
          CHECK(std::abs(par.value - ser.value) <= 1e-12 * scale);
          CHECK((par.gradient - ser.gradient).norm() <= 1e-11 * (1.0 + ser.gradient.norm()));
          CHECK((par.hessian - ser.hessian).norm() <= 1e-10 * (1.0 + ser.hessian.norm()));
        }
      }
    }
    CHECK(mean_squared_error(data.features, data.labels, x) ==
          doctest::Approx(mean_squared_error_serial(data.features, data.labels, x)).epsilon(1e-12));
  }
}

TEST_CASE("results do not depend on the thread count") {
  const Dataset data = generate_synthetic(SyntheticConfig{}, 3000, 8);
  const LinearRisk risk = LinearRisk::from_dataset(data, Task::regression);
  const Eigen::Vector2d x(1.0, 0.5);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const RiskModel one = risk_model(risk, LossSpec::l1(), x, 1e-3, Order::hessian);
  const double mse_one = mean_squared_error(data.features, data.labels, x);
  omp_set_num_threads(4);
  const RiskModel four = risk_model(risk, LossSpec::l1(), x, 1e-3, Order::hessian);
  const double mse_four = mean_squared_error(data.features, data.labels, x);
  omp_set_num_threads(saved);
  CHECK(one.value == four.value);
  CHECK(one.gradient == four.gradient);
  CHECK(one.hessian == four.hessian);
  CHECK(mse_one == mse_four);
}

TEST_CASE("risk subgradient matches finite differences away from kinks") {
  const Dataset data = generate_synthetic(SyntheticConfig{}, 50, 9);
  const LinearRisk risk = LinearRisk::from_dataset(data, Task::regression);
  const Eigen::Vector2d x(0.7, 0.2);
  const Eigen::VectorXd g = risk_subgradient(risk, LossSpec::l1(), x);
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(j) = 1e-7;
    const double fd = (risk_value(risk, LossSpec::l1(), x + e) - risk_value(risk, LossSpec::l1(), x - e)) / 2e-7;
    CHECK(g(j) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("shape checks") {
  const Dataset data = generate_synthetic(SyntheticConfig{}, 10, 1);
  const LinearRisk risk = LinearRisk::from_dataset(data, Task::regression);
  CHECK_THROWS_AS(risk_value(risk, LossSpec::l1(), Eigen::Vector3d::Zero()), ShapeError);
  CHECK_THROWS_AS(mean_squared_error(data.features, data.labels, Eigen::Vector3d::Zero()), ShapeError);
  CHECK_THROWS_AS(LinearRisk::from_weighted(data, Eigen::VectorXd::Ones(3), Task::regression), ShapeError);
}
