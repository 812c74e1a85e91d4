#ifndef RSKIT_KERNELS_HPP
#define RSKIT_KERNELS_HPP

#include <optional>

#include <Eigen/Dense>

#include "rskit/distributions.hpp"
#include "rskit/losses.hpp"

namespace rskit {

/// Weighted linear-argument risk  sum_i w_i L(offset_i + coef_i . x).
/// Regression: offset = y, coef = -u. Classification: offset = 0, coef = y u.
struct LinearRisk {
  Eigen::MatrixXd coef;
  Eigen::VectorXd offset;
  Eigen::VectorXd weight;

  static LinearRisk from_dataset(const Dataset& data, Task task);
  static LinearRisk from_weighted(const Dataset& data, const Eigen::VectorXd& weights, Task task);

  Eigen::Index size() const noexcept { return offset.size(); }
  Eigen::Index dim() const noexcept { return coef.cols(); }
};

enum class Order { value, gradient, hessian };

struct RiskModel {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Rows are processed in fixed blocks of this size; blocks are summed in
/// index order, so results do not depend on the thread count.
inline constexpr Eigen::Index kKernelBlock = 256;

// Parallel kernels: blocked, OpenMP over blocks, deterministic.
double risk_value(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x);
RiskModel risk_model(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x, double mu,
                     Order order);
/// Exact subgradient of the risk (midpoint convention at kinks).
Eigen::VectorXd risk_subgradient(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x);
/// mean (y_i - u_i . x)^2
double mean_squared_error(const Eigen::MatrixXd& u, const Eigen::VectorXd& y, const Eigen::VectorXd& x);

// Serial references: one row at a time, plain loops. Kept for testing the
// kernels above and as the benchmark baseline.
double risk_value_serial(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x);
RiskModel risk_model_serial(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x, double mu,
                            Order order);
double mean_squared_error_serial(const Eigen::MatrixXd& u, const Eigen::VectorXd& y, const Eigen::VectorXd& x);

}  // namespace rskit

#endif  // RSKIT_KERNELS_HPP
