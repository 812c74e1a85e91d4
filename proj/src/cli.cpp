#include "rskit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <type_traits>

#include <CLI11.hpp>

#include "rskit/errors.hpp"
#include "rskit/io.hpp"
#include "rskit/robust_core.hpp"
#include "rskit/transport.hpp"

namespace rskit {

namespace {

using nlohmann::json;

// ---- value parsing -------------------------------------------------------

template <class T>
struct is_optional : std::false_type {};
template <class T>
struct is_optional<std::optional<T>> : std::true_type {};

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
T parse_scalar(const std::string& text, const std::string& field) {
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else {
    T v{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end)
      throw ValidationError(field + ": cannot parse '" + text + "'");
    return v;
  }
}

template <class T>
T parse_text(const std::string& text, const std::string& field) {
  if constexpr (is_optional<T>::value) {
    return parse_text<typename T::value_type>(text, field);
  } else if constexpr (is_vector<T>::value) {
    T out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) out.push_back(parse_scalar<typename T::value_type>(item, field));
    return out;
  } else {
    return parse_scalar<T>(text, field);
  }
}

template <class T>
T scalar_from_json(const json& j, const std::string& field) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) throw ValidationError("config field '" + field + "': expected a string");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw ValidationError("config field '" + field + "': expected a number");
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!j.is_number_unsigned()) throw ValidationError("config field '" + field + "': expected a nonnegative integer");
  } else {
    if (!j.is_number_integer()) throw ValidationError("config field '" + field + "': expected an integer");
  }
  return j.get<T>();
}

template <class T>
T value_from_json(const json& j, const std::string& field) {
  if constexpr (is_optional<T>::value) {
    return value_from_json<typename T::value_type>(j, field);
  } else if constexpr (is_vector<T>::value) {
    if (!j.is_array()) throw ValidationError("config field '" + field + "': expected an array");
    T out;
    for (const auto& e : j) out.push_back(scalar_from_json<typename T::value_type>(e, field));
    return out;
  } else {
    return scalar_from_json<T>(j, field);
  }
}

template <class T>
json value_to_json(const T& v) {
  if constexpr (is_optional<T>::value) {
    return v ? json(*v) : json(nullptr);
  } else {
    return json(v);
  }
}

// ---- settings registry ---------------------------------------------------

struct Setting {
  std::string section;  // empty for top-level keys
  std::string key;
  std::string flag;
  std::string help;
  virtual ~Setting() = default;
  virtual void from_json(RunConfig& cfg, const json& j) const = 0;
  virtual void from_text(RunConfig& cfg, const std::string& text) const = 0;
  virtual json dump(const RunConfig& cfg) const = 0;
  std::string path() const { return section.empty() ? key : section + "." + key; }
};

template <class T>
struct Field : Setting {
  T RunConfig::*member;
  void from_json(RunConfig& cfg, const json& j) const override { cfg.*member = value_from_json<T>(j, path()); }
  void from_text(RunConfig& cfg, const std::string& text) const override {
    cfg.*member = parse_text<T>(text, flag);
  }
  json dump(const RunConfig& cfg) const override { return value_to_json(cfg.*member); }
};

template <class T>
std::unique_ptr<Setting> field(std::string section, std::string key, T RunConfig::*member, std::string help) {
  auto f = std::make_unique<Field<T>>();
  f->section = std::move(section);
  f->flag = "--" + key;
  std::replace(f->flag.begin(), f->flag.end(), '_', '-');
  f->key = std::move(key);
  f->help = std::move(help);
  f->member = member;
  return f;
}

const std::vector<std::unique_ptr<Setting>>& settings() {
  static const std::vector<std::unique_ptr<Setting>> all = [] {
    std::vector<std::unique_ptr<Setting>> s;
    s.push_back(field("", "seed", &RunConfig::seed, "random seed (falls back to RSKIT_SEED)"));
    s.push_back(field("", "out", &RunConfig::out, "output file (stdout when omitted)"));
    s.push_back(field("", "format", &RunConfig::format, "csv or json"));
    s.push_back(field("", "data", &RunConfig::data, "dataset CSV with header u1,...,um,y"));
    s.push_back(field("", "jobs", &RunConfig::jobs, "worker threads for experiments (0: all cores)"));

    s.push_back(field("solver", "max_iters", &RunConfig::max_iters, "iteration cap per inner solve"));
    s.push_back(field("solver", "step_rule", &RunConfig::step_rule, "decaying or polyak (subgradient method)"));
    s.push_back(field("solver", "rel_tol", &RunConfig::rel_tol, "relative tolerance"));
    s.push_back(field("solver", "constraint_tol", &RunConfig::constraint_tol, "constraint tolerance"));
    s.push_back(field("solver", "ridge_tiebreak", &RunConfig::ridge_tiebreak, "min-norm tie-break weight"));
    s.push_back(field("solver", "method", &RunConfig::method, "newton or subgradient"));

    s.push_back(field("problem", "loss", &RunConfig::loss, "loss name"));
    s.push_back(field("problem", "delta", &RunConfig::delta, "loss parameter (huber, insensitive, pinball)"));
    s.push_back(field("problem", "bound", &RunConfig::bound, "domain bound for the squared loss"));
    s.push_back(field("problem", "task", &RunConfig::task, "regression or classification"));
    s.push_back(field("problem", "epsilon", &RunConfig::epsilon, "tolerance rate"));
    s.push_back(field("problem", "radius", &RunConfig::radius, "DRO radius"));
    s.push_back(field("problem", "norm", &RunConfig::norm, "x_only or augmented"));
    s.push_back(field("problem", "cost", &RunConfig::cost, "full_l2, feature_only or augmented_l2"));
    s.push_back(field("problem", "tau", &RunConfig::tau, "reference value (fragility)"));
    s.push_back(field("problem", "x", &RunConfig::x, "decision vector, comma separated"));
    s.push_back(field("problem", "p", &RunConfig::p, "first distribution CSV"));
    s.push_back(field("problem", "q", &RunConfig::q, "second distribution CSV"));
    s.push_back(field("problem", "support", &RunConfig::support, "extra candidate support CSV (oracle mode)"));
    s.push_back(field("problem", "mode", &RunConfig::mode, "closed_form or oracle"));

    s.push_back(field("schedule", "beta_kind", &RunConfig::beta_kind, "constant, exp_sqrt or polynomial"));
    s.push_back(field("schedule", "beta", &RunConfig::beta, "beta, gamma or alpha for the chosen schedule"));
    s.push_back(field("schedule", "c1", &RunConfig::c1, "concentration constant c1 (placeholder)"));
    s.push_back(field("schedule", "c2", &RunConfig::c2, "concentration constant c2 (placeholder)"));
    s.push_back(field("schedule", "a", &RunConfig::a, "light-tail exponent a > 1"));
    s.push_back(field("schedule", "m", &RunConfig::m, "observation dimension"));
    s.push_back(field("schedule", "n", &RunConfig::n, "sample size"));

    s.push_back(field("synthetic", "m_u", &RunConfig::m_u, "feature dimension"));
    s.push_back(field("synthetic", "x_star", &RunConfig::x_star, "true parameter"));
    s.push_back(field("synthetic", "degree", &RunConfig::degree, "shift degree of the sampling distribution"));
    s.push_back(field("synthetic", "noise_var", &RunConfig::noise_var, "noise variance"));
    s.push_back(field("synthetic", "feature_mean", &RunConfig::feature_mean, "feature mean"));
    s.push_back(field("synthetic", "feature_var", &RunConfig::feature_var, "feature variance"));

    s.push_back(field("experiment", "n_train", &RunConfig::n_train, "training sample size"));
    s.push_back(field("experiment", "n_test", &RunConfig::n_test, "test sample size"));
    s.push_back(field("experiment", "support_size", &RunConfig::support_size, "ground-truth atoms (coverage)"));
    s.push_back(field("experiment", "n_grid", &RunConfig::n_grid, "sample sizes"));
    s.push_back(field("experiment", "epsilon_grid", &RunConfig::epsilon_grid, "tolerance rates"));
    s.push_back(field("experiment", "radius_grid", &RunConfig::radius_grid, "DRO radii"));
    s.push_back(field("experiment", "degree_grid", &RunConfig::degree_grid, "shift degrees"));
    s.push_back(field("experiment", "target_degree", &RunConfig::target_degree, "shift of the evaluation target"));
    s.push_back(field("experiment", "replications", &RunConfig::replications, "Monte Carlo replications"));
    return s;
  }();
  return all;
}

// ---- helpers -------------------------------------------------------------

double default_delta(const std::string& loss) {
  if (loss == "insensitive") return 0.1;
  if (loss == "pinball") return 0.5;
  return 1.0;
}

Dataset require_data(const RunConfig& cfg, const char* command) {
  if (cfg.data.empty()) throw ValidationError(std::string(command) + " needs --data");
  return read_dataset(cfg.data);
}

std::string render(const json& j, Format format) {
  return format == Format::json ? j.dump(2) + "\n" : flat_csv(j);
}

Format resolve_format(const RunConfig& cfg, Format fallback) {
  return cfg.format.empty() ? fallback : format_from_name(cfg.format);
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

constexpr const char* kPlaceholderWarning =
    "warning: c1 and c2 are placeholder constants; the remainder carries no coverage guarantee";

// ---- commands ------------------------------------------------------------

int cmd_solve_erm(const RunConfig& cfg, std::ostream& out) {
  const Dataset data = require_data(cfg, "solve-erm");
  const ErmResult r = solve_erm(data, cfg.loss_spec(), cfg.task_spec(), cfg.solver_options());
  emit(cfg.out, render(to_json(r), resolve_format(cfg, Format::json)), out);
  return 0;
}

int cmd_solve_rs(const RunConfig& cfg, std::ostream& out) {
  const Dataset data = require_data(cfg, "solve-rs");
  const RsSolution s =
      solve_rs(data, cfg.loss_spec(), cfg.task_spec(), cfg.epsilon, cfg.norm_variant(), cfg.solver_options());
  emit(cfg.out, render(to_json(s), resolve_format(cfg, Format::json)), out);
  return 0;
}

int cmd_solve_dro(const RunConfig& cfg, std::ostream& out) {
  const Dataset data = require_data(cfg, "solve-dro");
  const DroSolution s =
      solve_dro(data, cfg.loss_spec(), cfg.task_spec(), cfg.radius, cfg.norm_variant(), cfg.solver_options());
  emit(cfg.out, render(to_json(s), resolve_format(cfg, Format::json)), out);
  return 0;
}

int cmd_fragility(const RunConfig& cfg, std::ostream& out) {
  const Dataset data = require_data(cfg, "fragility");
  if (static_cast<Eigen::Index>(cfg.x.size()) != data.feature_dim())
    throw ValidationError("--x needs " + std::to_string(data.feature_dim()) + " comma-separated values");
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(cfg.x.data(), static_cast<Eigen::Index>(cfg.x.size()));
  const LossSpec loss = cfg.loss_spec();
  const Task task = cfg.task_spec();
  const double tau =
      cfg.tau ? *cfg.tau : reference_value(data, loss, task, cfg.epsilon, cfg.solver_options()).tau;
  const DiscreteDistribution p_hat = empirical_distribution(data);
  double k = 0.0;
  if (cfg.mode == "closed_form") {
    k = fragility_closed_form(x, p_hat, tau, loss, task, cfg.cost_variant());
  } else if (cfg.mode == "oracle") {
    RobustEvalContext ctx;
    ctx.cost = CostSpec{cfg.cost_variant()};
    ctx.loss = loss;
    ctx.task = task;
    Eigen::MatrixXd support = p_hat.points();
    if (!cfg.support.empty()) {
      const Eigen::MatrixXd extra = read_distribution(cfg.support).points();
      if (extra.cols() != support.cols()) throw ValidationError("--support has the wrong dimension");
      Eigen::MatrixXd both(support.rows() + extra.rows(), support.cols());
      both << support, extra;
      support = std::move(both);
    }
    ctx.candidate_support = std::move(support);
    k = fragility(x, p_hat, tau, ctx);
  } else {
    throw ValidationError("--mode must be closed_form or oracle");
  }
  const json j = {{"k_tau", number(k)}, {"tau", number(tau)}, {"mode", cfg.mode}, {"cost", CostSpec{cfg.cost_variant()}.name()}};
  emit(cfg.out, render(j, resolve_format(cfg, Format::json)), out);
  return 0;
}

int cmd_interval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Dataset data = require_data(cfg, "interval");
  const LossSpec loss = cfg.loss_spec();
  const Task task = cfg.task_spec();
  const RsSolution rs = solve_rs(data, loss, task, cfg.epsilon, cfg.norm_variant(), cfg.solver_options());

  RemainderSchedule schedule;
  schedule.kind = beta_kind_from_name(cfg.beta_kind);
  schedule.parameter = cfg.beta;
  schedule.c1 = cfg.c1;
  schedule.c2 = cfg.c2;
  schedule.a = cfg.a;
  schedule.m = cfg.m ? *cfg.m : static_cast<int>(data.feature_dim() + 1);
  const long long n = cfg.n ? *cfg.n : static_cast<long long>(data.size());
  const Remainder rem = remainder(schedule, n);
  const double l_h = observation_lipschitz(rs.x_hat, loss, task, cfg.cost_variant());

  err << kPlaceholderWarning << '\n';
  if (rem.dimension_caveat) err << "warning: m = 2 lies outside the stated concentration result\n";
  json j = {{"rs", to_json(rs)}, {"remainder", to_json(rem)}, {"l_h", number(l_h)}, {"n", n}, {"m", schedule.m},
            {"warning", kPlaceholderWarning}};
  if (rem.degenerate) {
    j["theorem1"] = nullptr;
    j["corollary1"] = nullptr;
  } else {
    const double level = 1.0 - rem.beta;
    j["theorem1"] = to_json(confidence_interval(rs, l_h, rem.value, IntervalVariant::theorem1, level));
    j["corollary1"] = to_json(confidence_interval(rs, l_h, rem.value, IntervalVariant::corollary1, level));
  }
  emit(cfg.out, render(j, resolve_format(cfg, Format::json)), out);
  return 0;
}

int cmd_wasserstein(const RunConfig& cfg, std::ostream& out) {
  if (cfg.p.empty() || cfg.q.empty()) throw ValidationError("wasserstein needs --p and --q");
  const DiscreteDistribution p = read_distribution(cfg.p);
  const DiscreteDistribution q = read_distribution(cfg.q);
  if (p.dim() != q.dim()) throw ValidationError("--p and --q have different dimensions");
  const CostSpec cost{cfg.cost.empty() ? CostVariant::full_l2 : CostSpec::from_name(cfg.cost).variant};
  const WassersteinResult w = wasserstein(p, q, cost);
  json coupling = json::array();
  for (Eigen::Index i = 0; i < w.plan.coupling.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < w.plan.coupling.cols(); ++k) row.push_back(w.plan.coupling(i, k));
    coupling.push_back(std::move(row));
  }
  const json j = {{"distance", number(w.distance)}, {"cost", cost.name()}, {"coupling", coupling}};
  emit(cfg.out, render(j, resolve_format(cfg, Format::json)), out);
  return 0;
}

int cmd_experiment(const RunConfig& cfg, const std::string& scenario, std::ostream& out, std::ostream& err) {
  const ExperimentConfig ec = cfg.experiment(scenario_from_name(scenario));
  const SweepResult r = run_experiment(ec);
  for (const auto& note : r.notes) err << "note: " << note << '\n';
  const Format f = resolve_format(cfg, Format::csv);
  emit(cfg.out, f == Format::csv ? sweep_csv(r) : to_json(r).dump(2) + "\n", out);
  return 0;
}

std::size_t line_of(const std::string& text, std::size_t byte, std::size_t& column) {
  std::size_t line = 1, start = 0;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
    if (text[i] == '\n') {
      ++line;
      start = i + 1;
    }
  column = byte >= start ? byte - start : 0;
  return line;
}

}  // namespace

// ---- RunConfig -----------------------------------------------------------

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.max_iters = max_iters;
  o.step_rule = step_rule_from_name(step_rule);
  o.rel_tol = rel_tol;
  o.constraint_tol = constraint_tol;
  o.ridge_tiebreak = ridge_tiebreak;
  o.method = solver_method_from_name(method);
  o.validate();
  return o;
}

LossSpec RunConfig::loss_spec() const { return LossSpec::from_name(loss, delta ? *delta : default_delta(loss), bound); }

Task RunConfig::task_spec() const { return task.empty() ? loss_spec().natural_task() : task_from_name(task); }

NormVariant RunConfig::norm_variant() const { return norm_variant_from_name(norm); }

CostVariant RunConfig::cost_variant() const {
  if (!cost.empty()) return CostSpec::from_name(cost).variant;
  return norm_variant() == NormVariant::x_only ? CostVariant::feature_only : CostVariant::full_l2;
}

ExperimentConfig RunConfig::experiment(Scenario scenario) const {
  ExperimentConfig c = ExperimentConfig::defaults(scenario);
  c.seed = seed;
  c.jobs = jobs;
  c.solver = solver_options();
  if (m_u) {
    c.synthetic.m_u = *m_u;
    if (!x_star) c.synthetic.x_star = SyntheticConfig::alternating_truth(*m_u);
  }
  if (x_star) c.synthetic.x_star = Eigen::Map<const Eigen::VectorXd>(x_star->data(), static_cast<Eigen::Index>(x_star->size()));
  if (degree) c.synthetic.degree = *degree;
  if (noise_var) c.synthetic.noise_var = *noise_var;
  if (feature_mean) c.synthetic.feature_mean = *feature_mean;
  if (feature_var) c.synthetic.feature_var = *feature_var;
  if (n_train) c.n_train = *n_train;
  if (n_test) c.n_test = *n_test;
  if (support_size) c.support_size = *support_size;
  if (n_grid) c.n_grid = *n_grid;
  if (epsilon_grid) c.epsilon_grid = *epsilon_grid;
  if (radius_grid) c.radius_grid = *radius_grid;
  if (degree_grid) c.degree_grid = *degree_grid;
  if (target_degree) c.target_degree = *target_degree;
  if (replications) c.replications = *replications;
  c.validate();
  return c;
}

json RunConfig::to_json() const {
  json doc = json::object();
  for (const auto& s : settings()) {
    if (s->section.empty())
      doc[s->key] = s->dump(*this);
    else
      doc[s->section][s->key] = s->dump(*this);
  }
  return doc;
}

void apply_config(RunConfig& cfg, const json& doc) {
  if (!doc.is_object()) throw ValidationError("config: top level must be an object");
  const auto& all = settings();
  const auto find = [&](const std::string& section, const std::string& key) -> const Setting* {
    for (const auto& s : all)
      if (s->section == section && s->key == key) return s.get();
    return nullptr;
  };
  const auto is_section = [&](const std::string& name) {
    return std::any_of(all.begin(), all.end(), [&](const auto& s) { return s->section == name; });
  };
  for (const auto& [key, value] : doc.items()) {
    if (const Setting* s = find("", key)) {
      s->from_json(cfg, value);
      continue;
    }
    if (!is_section(key)) throw ValidationError("config: unknown key '" + key + "'");
    if (!value.is_object()) throw ValidationError("config: section '" + key + "' must be an object");
    for (const auto& [inner, v] : value.items()) {
      const Setting* s = find(key, inner);
      if (!s) throw ValidationError("config: unknown key '" + key + "." + inner + "'");
      if (v.is_null() && s->dump(cfg).is_null()) continue;  // explicit null keeps an optional unset
      s->from_json(cfg, v);
    }
  }
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t column = 0;
    const std::size_t line = line_of(text, e.byte == 0 ? 0 : e.byte - 1, column);
    throw ValidationError("config " + path + ":" + std::to_string(line) + ":" + std::to_string(column + 1) +
                          ": syntax error");
  }
}

// ---- dispatch ------------------------------------------------------------

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust satisficing, DRO and ERM for Lipschitz-loss linear models"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");
  std::vector<std::string> texts(settings().size());
  std::vector<CLI::Option*> options(settings().size());
  for (std::size_t i = 0; i < settings().size(); ++i)
    options[i] = app.add_option(settings()[i]->flag, texts[i], settings()[i]->help);

  const auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };
  CLI::App* erm = sub("solve-erm", "empirical risk minimization");
  CLI::App* rs = sub("solve-rs", "robust satisficing solve");
  CLI::App* dro = sub("solve-dro", "Wasserstein DRO (regularized form)");
  CLI::App* frag = sub("fragility", "fragility k_tau(x) of a decision");
  CLI::App* interval = sub("interval", "confidence intervals for the optimal loss");
  CLI::App* wass = sub("wasserstein", "type-1 Wasserstein distance between two distributions");
  CLI::App* experiment = sub("experiment", "Monte Carlo scenario");
  std::string scenario;
  experiment->add_option("scenario", scenario, "sample_size, shift, correspondence, sensitivity_dro, sensitivity_rs, coverage")
      ->required();
  CLI::App* show = sub("show-config", "print the resolved configuration");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (const char* env = std::getenv("RSKIT_SEED"); env && *env)
      cfg.seed = parse_text<std::uint64_t>(env, "RSKIT_SEED");
    if (!config_path.empty()) apply_config(cfg, load_config(config_path));
    for (std::size_t i = 0; i < settings().size(); ++i)
      if (options[i]->count() > 0) settings()[i]->from_text(cfg, texts[i]);

    if (*erm) return cmd_solve_erm(cfg, out);
    if (*rs) return cmd_solve_rs(cfg, out);
    if (*dro) return cmd_solve_dro(cfg, out);
    if (*frag) return cmd_fragility(cfg, out);
    if (*interval) return cmd_interval(cfg, out, err);
    if (*wass) return cmd_wasserstein(cfg, out);
    if (*experiment) return cmd_experiment(cfg, scenario, out, err);
    if (*show) {
      emit(cfg.out, cfg.to_json().dump(2) + "\n", out);
      return 0;
    }
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace rskit
