#include "rskit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rskit/errors.hpp"

namespace rskit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sqrt(t^2 + mu^2) and its first two derivatives.
struct SoftAbs {
  double value, slope, curvature;
};

SoftAbs soft_abs(double t, double mu) noexcept {
  const double sign = t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0);
  if (mu == 0.0 || std::abs(t) > 1e100) return {std::abs(t), sign, 0.0};
  const double s = std::sqrt(t * t + mu * mu);
  return {s, t / s, mu * mu / (s * s * s)};
}

double softplus(double t) noexcept {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) noexcept {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

LossSpec LossSpec::squared(std::optional<double> domain_bound) {
  if (domain_bound && !(*domain_bound > 0.0 && std::isfinite(*domain_bound)))
    throw ParameterError("squared loss domain bound must be positive and finite");
  return LossSpec(LossKind::squared, 1.0, domain_bound);
}

LossSpec LossSpec::huber(double delta) {
  if (!(delta > 0.0 && std::isfinite(delta))) throw ParameterError("huber delta must be positive");
  return LossSpec(LossKind::huber, delta);
}

LossSpec LossSpec::insensitive(double delta) {
  if (!(delta > 0.0 && std::isfinite(delta)))
    throw ParameterError("insensitive delta must be positive");
  return LossSpec(LossKind::insensitive, delta);
}

LossSpec LossSpec::pinball(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("pinball delta must lie in (0, 1)");
  return LossSpec(LossKind::pinball, delta);
}

LossSpec LossSpec::from_name(std::string_view name, double delta, std::optional<double> domain_bound) {
  if (name == "hinge") return hinge();
  if (name == "smooth_hinge") return smooth_hinge();
  if (name == "logistic") return logistic();
  if (name == "l1") return l1();
  if (name == "squared") return squared(domain_bound);
  if (name == "huber") return huber(delta);
  if (name == "insensitive") return insensitive(delta);
  if (name == "pinball") return pinball(delta);
  throw ParameterError("unknown loss '" + std::string(name) + "'");
}

std::string LossSpec::name() const {
  switch (kind_) {
    case LossKind::hinge: return "hinge";
    case LossKind::smooth_hinge: return "smooth_hinge";
    case LossKind::logistic: return "logistic";
    case LossKind::l1: return "l1";
    case LossKind::squared: return "squared";
    case LossKind::huber: return "huber";
    case LossKind::insensitive: return "insensitive";
    case LossKind::pinball: return "pinball";
  }
  return "unknown";
}

double LossSpec::value(double z) const {
  switch (kind_) {
    case LossKind::hinge: return std::max(0.0, 1.0 - z);
    case LossKind::smooth_hinge:
      if (z <= 0.0) return 0.5 - z;
      if (z < 1.0) return 0.5 * (1.0 - z) * (1.0 - z);
      return 0.0;
    case LossKind::logistic: return softplus(-z);
    case LossKind::l1: return std::abs(z);
    case LossKind::squared: return z * z;
    case LossKind::huber: {
      const double a = std::abs(z);
      return a <= delta_ ? 0.5 * z * z : delta_ * (a - 0.5 * delta_);
    }
    case LossKind::insensitive: return std::max(0.0, std::abs(z) - delta_);
    case LossKind::pinball: return std::max(-delta_ * z, (1.0 - delta_) * z);
  }
  return 0.0;
}

double LossSpec::subgradient(double z) const {
  switch (kind_) {
    case LossKind::hinge:
      if (z < 1.0) return -1.0;
      if (z > 1.0) return 0.0;
      return -0.5;
    case LossKind::smooth_hinge:
      if (z <= 0.0) return -1.0;
      if (z < 1.0) return z - 1.0;
      return 0.0;
    case LossKind::logistic: return -sigmoid(-z);
    case LossKind::l1: return z > 0 ? 1.0 : (z < 0 ? -1.0 : 0.0);
    case LossKind::squared: return 2.0 * z;
    case LossKind::huber: return std::clamp(z, -delta_, delta_);
    case LossKind::insensitive:
      if (z > delta_) return 1.0;
      if (z < -delta_) return -1.0;
      if (z == delta_) return 0.5;
      if (z == -delta_) return -0.5;
      return 0.0;
    case LossKind::pinball:
      if (z > 0) return 1.0 - delta_;
      if (z < 0) return -delta_;
      return 0.5 - delta_;
  }
  return 0.0;
}

double LossSpec::lipschitz() const noexcept {
  switch (kind_) {
    case LossKind::hinge:
    case LossKind::smooth_hinge:
    case LossKind::logistic:
    case LossKind::l1:
    case LossKind::insensitive: return 1.0;
    case LossKind::huber: return delta_;
    case LossKind::pinball: return std::max(delta_, 1.0 - delta_);
    case LossKind::squared: return bound_ ? 2.0 * *bound_ : kInf;
  }
  return kInf;
}

bool LossSpec::has_finite_lipschitz() const noexcept { return std::isfinite(lipschitz()); }

LossTaylor LossSpec::smoothed(double z, double mu) const noexcept {
  switch (kind_) {
    case LossKind::hinge: {
      // max{0, 1-z} = ((1-z) + |1-z|) / 2
      const SoftAbs a = soft_abs(1.0 - z, mu);
      return {0.5 * ((1.0 - z) + a.value), 0.5 * (-1.0 - a.slope), 0.5 * a.curvature};
    }
    case LossKind::smooth_hinge:
      if (z <= 0.0) return {0.5 - z, -1.0, 0.0};
      if (z < 1.0) return {0.5 * (1.0 - z) * (1.0 - z), z - 1.0, 1.0};
      return {0.0, 0.0, 0.0};
    case LossKind::logistic: {
      const double p = sigmoid(-z);
      return {softplus(-z), -p, p * (1.0 - p)};
    }
    case LossKind::l1: {
      const SoftAbs a = soft_abs(z, mu);
      return {a.value, a.slope, a.curvature};
    }
    case LossKind::squared: return {z * z, 2.0 * z, 2.0};
    case LossKind::huber:
      if (std::abs(z) <= delta_) return {0.5 * z * z, z, 1.0};
      return {delta_ * (std::abs(z) - 0.5 * delta_), z > 0 ? delta_ : -delta_, 0.0};
    case LossKind::insensitive: {
      // max{0, |z|-d} = (|z| - d + ||z| - d|) / 2, both absolute values smoothed.
      const SoftAbs a = soft_abs(z, mu);
      const SoftAbs b = soft_abs(a.value - delta_, mu);
      const double slope = 0.5 * (a.slope + b.slope * a.slope);
      const double curvature =
          0.5 * (a.curvature + b.curvature * a.slope * a.slope + b.slope * a.curvature);
      return {0.5 * (a.value - delta_ + b.value), slope, curvature};
    }
    case LossKind::pinball: {
      // max{-d z, (1-d) z} = (1-2d) z / 2 + |z| / 2
      const SoftAbs a = soft_abs(z, mu);
      const double tilt = 0.5 * (1.0 - 2.0 * delta_);
      return {tilt * z + 0.5 * a.value, tilt + 0.5 * a.slope, 0.5 * a.curvature};
    }
  }
  return {0.0, 0.0, 0.0};
}

Task LossSpec::natural_task() const noexcept {
  switch (kind_) {
    case LossKind::hinge:
    case LossKind::smooth_hinge:
    case LossKind::logistic: return Task::classification;
    default: return Task::regression;
  }
}

double loss_value(const LossSpec& loss, double z) { return loss.value(z); }
double loss_subgradient(const LossSpec& loss, double z) { return loss.subgradient(z); }
double lipschitz_constant(const LossSpec& loss) noexcept { return loss.lipschitz(); }

double loss_argument(Task task, double score, double y) noexcept {
  return task == Task::regression ? y - score : y * score;
}

double pointwise_loss(const LossSpec& loss, Task task, std::span<const double> x,
                      std::span<const double> u, double y) {
  if (x.size() != u.size())
    throw ShapeError("pointwise_loss: dim(x)=" + std::to_string(x.size()) +
                     " but dim(u)=" + std::to_string(u.size()));
  double score = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) score += x[j] * u[j];
  return loss.value(loss_argument(task, score, y));
}

void require_lipschitz(const LossSpec& loss) {
  if (!loss.has_finite_lipschitz())
    throw ParameterError("loss '" + loss.name() +
                         "' has no finite Lipschitz constant; declare a domain bound");
}

std::string to_string(Task task) {
  return task == Task::regression ? "regression" : "classification";
}

Task task_from_name(std::string_view name) {
  if (name == "regression") return Task::regression;
  if (name == "classification") return Task::classification;
  throw ParameterError("unknown task '" + std::string(name) + "'");
}

}  // namespace rskit
