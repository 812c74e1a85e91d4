#ifndef RSKIT_EXPERIMENTS_HPP
#define RSKIT_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rskit/distributions.hpp"
#include "rskit/solvers.hpp"

namespace rskit {

enum class Scenario { sample_size, shift, correspondence, sensitivity_dro, sensitivity_rs, coverage };

/// Monte Carlo settings. Every scenario trains with the l1 loss, the
/// feature-only cost and the ||x|| regularizer, except coverage, which uses
/// the joint l2 cost with ||(x, -1)|| so that distances to the finite ground
/// truth stay finite.
struct ExperimentConfig {
  Scenario scenario = Scenario::sample_size;
  SyntheticConfig synthetic;
  long long n_train = 100;
  std::vector<long long> n_grid = {30, 50, 100, 200, 400, 800};
  std::vector<double> epsilon_grid = {0.05, 0.1, 0.2, 0.3};
  std::vector<double> radius_grid;
  std::vector<double> degree_grid = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  /// Shift of the evaluation target in the sensitivity and coverage scenarios.
  double target_degree = 4.0;
  /// Atoms of the finite ground truth in the coverage scenario.
  long long support_size = 20;
  int replications = 200;
  long long n_test = 10000;
  std::uint64_t seed = 0;
  /// Worker threads for the replication loop; 0 uses the OpenMP default.
  int jobs = 0;
  SolverOptions solver;

  void validate() const;
  /// Scenario-specific defaults (dimensions, grids).
  static ExperimentConfig defaults(Scenario scenario);
};

struct SweepRow {
  double grid_value = 0.0;
  std::string method;
  double metric_mean = 0.0;
  double metric_se = 0.0;  // sample stdev / sqrt(replications)
  int replications = 0;    // successful replications behind the mean
  int failures = 0;
};

struct SweepResult {
  Scenario scenario = Scenario::sample_size;
  std::vector<SweepRow> rows;
  /// One line per failed cell or violated check, with seed and residuals.
  std::vector<std::string> notes;

  /// First row with the given grid value and method; throws if absent.
  const SweepRow& find(double grid_value, std::string_view method) const;
};

/// Mean (y - u.x)^2 over n_test fresh draws from the synthetic target.
double evaluate_mse(const Eigen::VectorXd& x, const SyntheticConfig& target, long long n_test, std::uint64_t seed,
                    std::uint64_t substream = 0);
/// Exact mean squared error under a finite-support target.
double evaluate_mse(const Eigen::VectorXd& x, const DiscreteDistribution& target);

SweepResult run_sample_size_sweep(const ExperimentConfig& cfg);
SweepResult run_shift_sweep(const ExperimentConfig& cfg);
SweepResult run_correspondence(const ExperimentConfig& cfg);
SweepResult run_sensitivity(const ExperimentConfig& cfg);
SweepResult run_coverage(const ExperimentConfig& cfg);
SweepResult run_experiment(const ExperimentConfig& cfg);

/// Method tags used in SweepResult rows.
std::string rs_tag(double epsilon);
std::string correspondence_tag(int m_u);

std::string to_string(Scenario s);
Scenario scenario_from_name(std::string_view name);

}  // namespace rskit

#endif  // RSKIT_EXPERIMENTS_HPP
