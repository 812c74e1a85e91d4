#include "rskit/kernels.hpp"

#include <vector>

#include <omp.h>

#include "rskit/errors.hpp"

namespace rskit {

namespace {

Eigen::Index block_count(Eigen::Index n) { return (n + kKernelBlock - 1) / kKernelBlock; }

void check_dim(const LinearRisk& risk, const Eigen::VectorXd& x) {
  if (x.size() != risk.dim())
    throw ShapeError("risk: parameter has " + std::to_string(x.size()) + " entries, data has " +
                     std::to_string(risk.dim()) + " features");
}

RiskModel block_model(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x, double mu,
                      Order order, Eigen::Index start, Eigen::Index len) {
  const auto coef = risk.coef.middleRows(start, len);
  const Eigen::VectorXd z = risk.offset.segment(start, len) + coef * x;
  Eigen::VectorXd slope(len), curvature(len);
  RiskModel out;
  for (Eigen::Index i = 0; i < len; ++i) {
    const double w = risk.weight(start + i);
    const LossTaylor t = loss.smoothed(z(i), mu);
    out.value += w * t.value;
    slope(i) = w * t.slope;
    curvature(i) = w * t.curvature;
  }
  if (order != Order::value) out.gradient = coef.transpose() * slope;
  if (order == Order::hessian) out.hessian = coef.transpose() * curvature.asDiagonal() * coef;
  return out;
}

}  // namespace

LinearRisk LinearRisk::from_dataset(const Dataset& data, Task task) {
  const Eigen::Index n = data.size();
  return from_weighted(data, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)), task);
}

LinearRisk LinearRisk::from_weighted(const Dataset& data, const Eigen::VectorXd& weights, Task task) {
  data.validate();
  if (weights.size() != data.size()) throw ShapeError("one weight per sample required");
  LinearRisk r;
  r.weight = weights;
  if (task == Task::regression) {
    r.coef = -data.features;
    r.offset = data.labels;
  } else {
    r.coef = data.labels.asDiagonal() * data.features;
    r.offset = Eigen::VectorXd::Zero(data.size());
  }
  return r;
}

double risk_value(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x) {
  check_dim(risk, x);
  const Eigen::Index blocks = block_count(risk.size());
  const auto block_value = [&](Eigen::Index b) {
    const Eigen::Index start = b * kKernelBlock;
    const Eigen::Index len = std::min(kKernelBlock, risk.size() - start);
    const Eigen::VectorXd z = risk.offset.segment(start, len) + risk.coef.middleRows(start, len) * x;
    double s = 0.0;
    for (Eigen::Index i = 0; i < len; ++i) s += risk.weight(start + i) * loss.value(z(i));
    return s;
  };
  if (blocks == 1) return block_value(0);  // skip the parallel-region setup for small problems
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) partial[static_cast<std::size_t>(b)] = block_value(b);
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

RiskModel risk_model(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x, double mu,
                     Order order) {
  check_dim(risk, x);
  const Eigen::Index blocks = block_count(risk.size());
  if (blocks == 1) return block_model(risk, loss, x, mu, order, 0, risk.size());
  std::vector<RiskModel> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index start = b * kKernelBlock;
    partial[static_cast<std::size_t>(b)] =
        block_model(risk, loss, x, mu, order, start, std::min(kKernelBlock, risk.size() - start));
  }
  RiskModel total = std::move(partial.front());
  for (std::size_t b = 1; b < partial.size(); ++b) {
    total.value += partial[b].value;
    if (order != Order::value) total.gradient += partial[b].gradient;
    if (order == Order::hessian) total.hessian += partial[b].hessian;
  }
  return total;
}

Eigen::VectorXd risk_subgradient(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x) {
  check_dim(risk, x);
  const Eigen::VectorXd z = risk.offset + risk.coef * x;
  Eigen::VectorXd s(risk.size());
  for (Eigen::Index i = 0; i < risk.size(); ++i) s(i) = risk.weight(i) * loss.subgradient(z(i));
  return risk.coef.transpose() * s;
}

double mean_squared_error(const Eigen::MatrixXd& u, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  if (u.cols() != x.size() || u.rows() != y.size()) throw ShapeError("mean_squared_error: shape mismatch");
  const Eigen::Index n = y.size();
  const Eigen::Index blocks = block_count(n);
  const auto block_sum = [&](Eigen::Index b) {
    const Eigen::Index start = b * kKernelBlock;
    const Eigen::Index len = std::min(kKernelBlock, n - start);
    return (y.segment(start, len) - u.middleRows(start, len) * x).squaredNorm();
  };
  if (blocks == 1) return block_sum(0) / static_cast<double>(n);
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) partial[static_cast<std::size_t>(b)] = block_sum(b);
  double total = 0.0;
  for (double s : partial) total += s;
  return total / static_cast<double>(n);
}

double risk_value_serial(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x) {
  check_dim(risk, x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < risk.size(); ++i) {
    double z = risk.offset(i);
    for (Eigen::Index j = 0; j < risk.dim(); ++j) z += risk.coef(i, j) * x(j);
    total += risk.weight(i) * loss.value(z);
  }
  return total;
}

RiskModel risk_model_serial(const LinearRisk& risk, const LossSpec& loss, const Eigen::VectorXd& x, double mu,
                            Order order) {
  check_dim(risk, x);
  const Eigen::Index d = risk.dim();
  RiskModel out;
  out.gradient = Eigen::VectorXd::Zero(d);
  out.hessian = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < risk.size(); ++i) {
    double z = risk.offset(i);
    for (Eigen::Index j = 0; j < d; ++j) z += risk.coef(i, j) * x(j);
    const LossTaylor t = loss.smoothed(z, mu);
    const double w = risk.weight(i);
    out.value += w * t.value;
    if (order == Order::value) continue;
    for (Eigen::Index j = 0; j < d; ++j) out.gradient(j) += w * t.slope * risk.coef(i, j);
    if (order != Order::hessian) continue;
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k) out.hessian(j, k) += w * t.curvature * risk.coef(i, j) * risk.coef(i, k);
  }
  if (order == Order::value) {
    out.gradient.resize(0);
    out.hessian.resize(0, 0);
  } else if (order == Order::gradient) {
    out.hessian.resize(0, 0);
  }
  return out;
}

double mean_squared_error_serial(const Eigen::MatrixXd& u, const Eigen::VectorXd& y, const Eigen::VectorXd& x) {
  if (u.cols() != x.size() || u.rows() != y.size()) throw ShapeError("mean_squared_error: shape mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double r = y(i);
    for (Eigen::Index j = 0; j < x.size(); ++j) r -= u(i, j) * x(j);
    total += r * r;
  }
  return total / static_cast<double>(y.size());
}

}  // namespace rskit
