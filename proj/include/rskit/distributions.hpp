#ifndef RSKIT_DISTRIBUTIONS_HPP
#define RSKIT_DISTRIBUTIONS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rskit {

/// N labelled samples: features is N x m_u, labels has N entries.
struct Dataset {
  Eigen::MatrixXd features;
  Eigen::VectorXd labels;

  Dataset() = default;
  Dataset(Eigen::MatrixXd u, Eigen::VectorXd y);

  Eigen::Index size() const noexcept { return labels.size(); }
  Eigen::Index feature_dim() const noexcept { return features.cols(); }
  /// Throws ValidationError on N = 0, mismatched sizes or non-finite entries.
  void validate() const;
};

/// A finitely supported probability measure on R^m. Support points are rows
/// of `points`; duplicates are merged on construction (bitwise equality).
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  /// Throws ValidationError when weights are negative or do not sum to one
  /// within 1e-12.
  DiscreteDistribution(Eigen::MatrixXd points, Eigen::VectorXd weights);

  /// Uniform weights over the given rows.
  static DiscreteDistribution uniform(Eigen::MatrixXd points);

  Eigen::Index size() const noexcept { return weights_.size(); }
  Eigen::Index dim() const noexcept { return points_.cols(); }
  const Eigen::MatrixXd& points() const noexcept { return points_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  Eigen::VectorXd point(Eigen::Index i) const { return points_.row(i).transpose(); }

  /// Splits joint points (u, y) into a weighted dataset view.
  Dataset as_dataset() const;

 private:
  Eigen::MatrixXd points_;
  Eigen::VectorXd weights_;
};

/// Synthetic linear-Gaussian data: u ~ N(feature_mean 1, feature_var I),
/// y = u . x_param + e with e ~ N(0, noise_var), where x_param is x_star
/// shifted by `degree`.
struct SyntheticConfig {
  int m_u = 2;
  Eigen::VectorXd x_star = Eigen::Vector2d(2.0, -1.0);
  double degree = 0.0;
  double noise_var = 0.1;
  double feature_mean = 0.5;
  double feature_var = 0.5;

  void validate() const;
  /// x_star shifted by degree (identity when degree == 0).
  Eigen::VectorXd parameter() const;
  /// [2, -1, 2, -1, ...] of length m_u.
  static Eigen::VectorXd alternating_truth(int m_u);
};

/// x_star + degree * [-0.05, 0.025]. Only defined for two features.
Eigen::VectorXd shift_parameter(const Eigen::VectorXd& x_star, double degree);

/// Draws n samples from stream (seed, substream).
Dataset generate_synthetic(const SyntheticConfig& config, Eigen::Index n, std::uint64_t seed,
                           std::uint64_t substream = 0);

DiscreteDistribution empirical_distribution(const Dataset& data);

/// A finite-support stand-in for the sampling distribution: support_size
/// joint points drawn from the synthetic process, uniform weights.
DiscreteDistribution discrete_ground_truth(const SyntheticConfig& config, Eigen::Index support_size,
                                           std::uint64_t seed);

/// I.i.d. draws from a discrete distribution (inverse-CDF sampling).
Dataset sample_discrete(const DiscreteDistribution& dist, Eigen::Index n, std::uint64_t seed,
                        std::uint64_t substream = 0);

/// Joins features and labels into joint points (u, y).
Eigen::MatrixXd joint_points(const Dataset& data);

}  // namespace rskit

#endif  // RSKIT_DISTRIBUTIONS_HPP
