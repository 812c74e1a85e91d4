#ifndef RSKIT_LOSSES_HPP
#define RSKIT_LOSSES_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace rskit {

enum class LossKind { hinge, smooth_hinge, logistic, l1, squared, huber, insensitive, pinball };

enum class Task { regression, classification };

/// Value, first and second derivative of a (possibly smoothed) scalar loss.
struct LossTaylor {
  double value;
  double slope;
  double curvature;
};

/// A scalar convex loss L(z) from the classical catalog.
///
/// `delta` is the width parameter of huber / insensitive and the quantile
/// level of pinball; it is ignored by the other kinds. Squared loss is only
/// Lipschitz on a bounded domain |z| <= B, so it carries an optional bound.
class LossSpec {
 public:
  static LossSpec hinge() { return LossSpec(LossKind::hinge); }
  static LossSpec smooth_hinge() { return LossSpec(LossKind::smooth_hinge); }
  static LossSpec logistic() { return LossSpec(LossKind::logistic); }
  static LossSpec l1() { return LossSpec(LossKind::l1); }
  static LossSpec squared(std::optional<double> domain_bound = std::nullopt);
  static LossSpec huber(double delta);
  static LossSpec insensitive(double delta);
  static LossSpec pinball(double delta);

  /// Parses a catalog name (`hinge`, `smooth_hinge`, `logistic`, `l1`,
  /// `squared`, `huber`, `insensitive`, `pinball`).
  static LossSpec from_name(std::string_view name, double delta = 1.0,
                            std::optional<double> domain_bound = std::nullopt);

  LossKind kind() const noexcept { return kind_; }
  double delta() const noexcept { return delta_; }
  std::optional<double> domain_bound() const noexcept { return bound_; }
  std::string name() const;

  double value(double z) const;
  /// Element of the subdifferential; the midpoint of the interval at kinks.
  double subgradient(double z) const;
  /// Smallest global Lipschitz constant; +inf for squared loss without a bound.
  double lipschitz() const noexcept;
  bool has_finite_lipschitz() const noexcept;

  /// Second-order model of a smooth surrogate that over-approximates L by at
  /// most `mu` per kink (|t| is replaced by sqrt(t^2 + mu^2)). mu = 0 gives
  /// the exact value with a one-sided derivative and zero curvature at kinks.
  LossTaylor smoothed(double z, double mu) const noexcept;

  /// Task spec name of the natural use of this loss (classification for the
  /// margin losses, regression otherwise).
  Task natural_task() const noexcept;

 private:
  explicit LossSpec(LossKind kind, double delta = 1.0, std::optional<double> bound = std::nullopt)
      : kind_(kind), delta_(delta), bound_(bound) {}

  LossKind kind_;
  double delta_;
  std::optional<double> bound_;
};

double loss_value(const LossSpec& loss, double z);
double loss_subgradient(const LossSpec& loss, double z);
double lipschitz_constant(const LossSpec& loss) noexcept;

/// The scalar argument fed to L: y - x.u for regression, y * (x.u) for
/// classification.
double loss_argument(Task task, double score, double y) noexcept;

/// h(x, (u, y)) = L(loss_argument(task, x.u, y)).
double pointwise_loss(const LossSpec& loss, Task task, std::span<const double> x,
                      std::span<const double> u, double y);

/// Throws ParameterError unless the loss has a finite Lipschitz constant.
void require_lipschitz(const LossSpec& loss);

std::string to_string(Task task);
Task task_from_name(std::string_view name);

}  // namespace rskit

#endif  // RSKIT_LOSSES_HPP
