#ifndef RSKIT_TRANSPORT_HPP
#define RSKIT_TRANSPORT_HPP

#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "rskit/distributions.hpp"

namespace rskit {

enum class CostVariant { full_l2, feature_only, augmented_l2 };

/// Ground cost on joint points (u, y); the label is the last coordinate.
///
/// full_l2 and augmented_l2 are both the Euclidean distance on the joint
/// vector; augmented_l2 exists as a separate name because it is the cost that
/// pairs with the ||(x, -1)|| regularizer. feature_only charges the feature
/// distance when labels agree exactly and +inf otherwise.
struct CostSpec {
  CostVariant variant = CostVariant::full_l2;

  double operator()(std::span<const double> a, std::span<const double> b) const;
  std::string name() const;
  static CostSpec from_name(std::string_view name);
};

/// +inf is represented by IEEE infinity, never by a large finite number.
double cost(const CostSpec& spec, std::span<const double> a, std::span<const double> b);

/// Pairwise ground costs between the rows of `from` and `to`.
Eigen::MatrixXd cost_matrix(const CostSpec& spec, const Eigen::MatrixXd& from, const Eigen::MatrixXd& to);

struct TransportPlan {
  Eigen::MatrixXd coupling;  // rows index p's atoms, columns q's atoms
  double objective = 0.0;
  int pivots = 0;
};

/// Exact balanced transportation problem by the primal transportation simplex
/// (spanning-tree basis, u-v potentials, Dantzig pricing). Costs must be finite.
TransportPlan solve_transport(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                              const Eigen::MatrixXd& cost);

struct WassersteinResult {
  double distance;
  TransportPlan plan;
};

/// Type-1 Wasserstein distance and an optimal coupling. Returns +inf (with an
/// empty coupling) when the feature_only cost admits no finite plan.
WassersteinResult wasserstein(const DiscreteDistribution& p, const DiscreteDistribution& q,
                              const CostSpec& spec = {});

/// Closed-form 1-D distance through the quantile coupling. Independent of the
/// LP route and used to check it.
double wasserstein_1d(const DiscreteDistribution& p, const DiscreteDistribution& q);

}  // namespace rskit

#endif  // RSKIT_TRANSPORT_HPP
