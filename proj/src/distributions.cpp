#include "rskit/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <string>

#include "rskit/errors.hpp"
#include "rskit/rng.hpp"

namespace rskit {

namespace {

// Bitwise lexicographic order on rows so that merging is exact.
struct RowBits {
  std::vector<std::uint64_t> bits;
  bool operator<(const RowBits& other) const { return bits < other.bits; }
};

RowBits row_bits(const Eigen::MatrixXd& m, Eigen::Index i) {
  RowBits key;
  key.bits.resize(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double v = m(i, j);
    if (v == 0.0) v = 0.0;  // fold -0 into +0
    std::memcpy(&key.bits[static_cast<std::size_t>(j)], &v, sizeof v);
  }
  return key;
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd u, Eigen::VectorXd y) : features(std::move(u)), labels(std::move(y)) {
  validate();
}

void Dataset::validate() const {
  if (labels.size() < 1) throw ValidationError("dataset must contain at least one sample");
  if (features.rows() != labels.size())
    throw ValidationError("dataset has " + std::to_string(features.rows()) + " feature rows but " +
                          std::to_string(labels.size()) + " labels");
  if (!features.allFinite() || !labels.allFinite())
    throw ValidationError("dataset contains non-finite entries");
}

DiscreteDistribution::DiscreteDistribution(Eigen::MatrixXd points, Eigen::VectorXd weights) {
  if (points.rows() != weights.size() || weights.size() == 0)
    throw ValidationError("distribution needs one weight per support point");
  if ((weights.array() < 0.0).any() || !weights.allFinite())
    throw ValidationError("distribution weights must be nonnegative");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw ValidationError("distribution weights sum to " + std::to_string(weights.sum()));

  // First-occurrence order is preserved so callers can index atoms predictably.
  std::map<RowBits, Eigen::Index> seen;
  std::vector<Eigen::Index> keep;
  std::vector<double> merged;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    auto [it, inserted] = seen.emplace(row_bits(points, i), static_cast<Eigen::Index>(keep.size()));
    if (inserted) {
      keep.push_back(i);
      merged.push_back(weights(i));
    } else {
      merged[static_cast<std::size_t>(it->second)] += weights(i);
    }
  }
  points_.resize(static_cast<Eigen::Index>(keep.size()), points.cols());
  weights_.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    points_.row(static_cast<Eigen::Index>(k)) = points.row(keep[k]);
    weights_(static_cast<Eigen::Index>(k)) = merged[k];
  }
}

DiscreteDistribution DiscreteDistribution::uniform(Eigen::MatrixXd points) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw ValidationError("uniform distribution over an empty support");
  return DiscreteDistribution(std::move(points), Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
}

Dataset DiscreteDistribution::as_dataset() const {
  if (dim() < 1) throw ShapeError("distribution points have no label coordinate");
  Dataset d;
  d.features = points_.leftCols(dim() - 1);
  d.labels = points_.col(dim() - 1);
  return d;
}

void SyntheticConfig::validate() const {
  if (m_u < 1) throw ParameterError("m_u must be positive");
  if (x_star.size() != m_u)
    throw ShapeError("x_star has " + std::to_string(x_star.size()) + " entries, m_u is " +
                     std::to_string(m_u));
  if (!(noise_var > 0.0)) throw ParameterError("noise variance must be positive");
  if (!(feature_var >= 0.0)) throw ParameterError("feature variance must be nonnegative");
  if (degree < 0.0) throw ParameterError("shift degree must be nonnegative");
}

Eigen::VectorXd SyntheticConfig::parameter() const {
  if (degree == 0.0) return x_star;
  return shift_parameter(x_star, degree);
}

Eigen::VectorXd SyntheticConfig::alternating_truth(int m_u) {
  Eigen::VectorXd x(m_u);
  for (int j = 0; j < m_u; ++j) x(j) = (j % 2 == 0) ? 2.0 : -1.0;
  return x;
}

Eigen::VectorXd shift_parameter(const Eigen::VectorXd& x_star, double degree) {
  if (x_star.size() != 2)
    throw ParameterError("the shift rule is only defined for two features, got " +
                         std::to_string(x_star.size()));
  if (degree < 0.0) throw ParameterError("shift degree must be nonnegative");
  return x_star + degree * Eigen::Vector2d(-0.05, 0.025);
}

Dataset generate_synthetic(const SyntheticConfig& config, Eigen::Index n, std::uint64_t seed,
                           std::uint64_t substream) {
  config.validate();
  if (n < 1) throw ParameterError("sample size must be positive");
  const Eigen::VectorXd x_param = config.parameter();
  const double feature_sd = std::sqrt(config.feature_var);
  const double noise_sd = std::sqrt(config.noise_var);
  RandomStream rng(seed, substream);
  Dataset data;
  data.features.resize(n, config.m_u);
  data.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < config.m_u; ++j) data.features(i, j) = config.feature_mean + feature_sd * rng.normal();
    const double noise = noise_sd * rng.normal();
    data.labels(i) = data.features.row(i).dot(x_param) + noise;
  }
  return data;
}

Eigen::MatrixXd joint_points(const Dataset& data) {
  Eigen::MatrixXd joint(data.size(), data.feature_dim() + 1);
  joint.leftCols(data.feature_dim()) = data.features;
  joint.col(data.feature_dim()) = data.labels;
  return joint;
}

DiscreteDistribution empirical_distribution(const Dataset& data) {
  data.validate();
  return DiscreteDistribution::uniform(joint_points(data));
}

DiscreteDistribution discrete_ground_truth(const SyntheticConfig& config, Eigen::Index support_size,
                                           std::uint64_t seed) {
  if (support_size < 2) throw ParameterError("ground-truth support needs at least two atoms");
  return empirical_distribution(generate_synthetic(config, support_size, seed));
}

Dataset sample_discrete(const DiscreteDistribution& dist, Eigen::Index n, std::uint64_t seed,
                        std::uint64_t substream) {
  if (n < 1) throw ParameterError("sample size must be positive");
  std::vector<double> cdf(static_cast<std::size_t>(dist.size()));
  std::partial_sum(dist.weights().begin(), dist.weights().end(), cdf.begin());
  RandomStream rng(seed, substream);
  Eigen::MatrixXd rows(n, dist.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto atom = std::min<std::ptrdiff_t>(it - cdf.begin(), dist.size() - 1);
    rows.row(i) = dist.points().row(atom);
  }
  Dataset d;
  d.features = rows.leftCols(dist.dim() - 1);
  d.labels = rows.col(dist.dim() - 1);
  return d;
}

}  // namespace rskit
