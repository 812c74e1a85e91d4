#ifndef RSKIT_CLI_HPP
#define RSKIT_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rskit/experiments.hpp"
#include "rskit/inference.hpp"
#include "rskit/losses.hpp"
#include "rskit/solvers.hpp"
#include "rskit/transport.hpp"

namespace rskit {

/// Every setting the command line understands. Enumerations are kept as
/// names and converted (and validated) when used. Unset optionals fall back
/// to the owning module's default.
struct RunConfig {
  // global
  std::uint64_t seed = 0;
  std::string out;
  std::string format;  // empty: json for single results, csv for sweeps
  std::string data;
  int jobs = 0;

  // solver
  int max_iters = SolverOptions{}.max_iters;
  std::string step_rule = "decaying";
  double rel_tol = SolverOptions{}.rel_tol;
  double constraint_tol = SolverOptions{}.constraint_tol;
  double ridge_tiebreak = SolverOptions{}.ridge_tiebreak;
  std::string method = "newton";

  // problem
  std::string loss = "l1";
  std::optional<double> delta;  // huber 1, insensitive 0.1, pinball 0.5 when unset
  std::optional<double> bound;  // squared-loss domain bound
  std::string task;             // empty: the loss's natural task
  double epsilon = 0.1;
  double radius = 0.1;
  std::string norm = "x_only";
  std::string cost;  // empty: feature_only for x_only, full_l2 for augmented
  std::optional<double> tau;
  std::vector<double> x;
  std::string p, q, support;
  std::string mode = "closed_form";

  // remainder schedule
  std::string beta_kind = "constant";
  double beta = RemainderSchedule{}.parameter;
  double c1 = RemainderSchedule{}.c1;
  double c2 = RemainderSchedule{}.c2;
  double a = RemainderSchedule{}.a;
  std::optional<int> m;      // default: features + 1
  std::optional<long long> n;  // default: number of samples

  // synthetic data and experiments (scenario defaults when unset)
  std::optional<int> m_u;
  std::optional<std::vector<double>> x_star;
  std::optional<double> degree, noise_var, feature_mean, feature_var;
  std::optional<long long> n_train, n_test, support_size;
  std::optional<std::vector<long long>> n_grid;
  std::optional<std::vector<double>> epsilon_grid, radius_grid, degree_grid;
  std::optional<double> target_degree;
  std::optional<int> replications;

  SolverOptions solver_options() const;
  LossSpec loss_spec() const;
  Task task_spec() const;
  NormVariant norm_variant() const;
  CostVariant cost_variant() const;
  ExperimentConfig experiment(Scenario scenario) const;

  nlohmann::json to_json() const;
};

/// Applies a parsed config document. Unknown sections or keys and values of
/// the wrong type throw ValidationError naming the field.
void apply_config(RunConfig& cfg, const nlohmann::json& doc);

/// Parses a config file, reporting syntax errors with line and column.
nlohmann::json load_config(const std::string& path);

/// Runs one command line (arguments without the program name). Exit status:
/// 0 success, 1 invalid input or configuration, 2 solver non-convergence.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace rskit

#endif  // RSKIT_CLI_HPP
