#include "rskit/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rskit/errors.hpp"

namespace rskit {

namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& raw, const std::string& source, std::size_t row, std::size_t col) {
  const std::string cell = trim(raw);
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc() || ptr != end)
    throw ValidationError(source + ": row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                          ": '" + cell + "' is not a number");
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(std::istream& in, const std::string& source) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(source + ": empty file");
  for (auto& h : split_line(line)) t.header.push_back(trim(h));
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != t.header.size())
      throw ValidationError(source + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, header has " + std::to_string(t.header.size()));
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) values[c] = parse_cell(cells[c], source, row, c);
    t.rows.push_back(std::move(values));
  }
  if (t.rows.empty()) throw ValidationError(source + ": no data rows");
  return t;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return in;
}

Eigen::MatrixXd to_matrix(const Table& t, std::size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.rows[r][c];
  return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// JSON has no representation for non-finite numbers; they are spelled out.
json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError("expected a number, got " + j.dump());
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "_" + std::to_string(i + 1), out);
  } else if (j.is_number_float()) {
    out.emplace_back(prefix, format_double(j.get<double>()));
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

}  // namespace

Format format_from_name(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ParameterError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Dataset parse_dataset(std::istream& in, const std::string& source) {
  const Table t = read_table(in, source);
  if (t.header.empty() || t.header.back() != "y")
    throw ValidationError(source + ": missing column 'y' (expected header u1,...,um,y)");
  const std::size_t m = t.header.size() - 1;
  if (m == 0) throw ValidationError(source + ": no feature columns before 'y'");
  for (std::size_t c = 0; c < m; ++c)
    if (t.header[c] != "u" + std::to_string(c + 1))
      throw ValidationError(source + ": column " + std::to_string(c + 1) + " is '" + t.header[c] + "', expected 'u" +
                            std::to_string(c + 1) + "'");
  const Eigen::MatrixXd all = to_matrix(t, m + 1);
  Dataset d(all.leftCols(static_cast<Eigen::Index>(m)), all.col(static_cast<Eigen::Index>(m)));
  d.validate();
  return d;
}

Dataset read_dataset(const std::string& path) {
  auto in = open_input(path);
  return parse_dataset(in, path);
}

void write_dataset(const std::string& path, const Dataset& data) {
  data.validate();
  std::ostringstream os;
  for (Eigen::Index c = 0; c < data.feature_dim(); ++c) os << 'u' << c + 1 << ',';
  os << "y\n";
  for (Eigen::Index r = 0; r < data.size(); ++r) {
    for (Eigen::Index c = 0; c < data.feature_dim(); ++c) os << format_double(data.features(r, c)) << ',';
    os << format_double(data.labels(r)) << '\n';
  }
  emit(path, os.str(), std::cout);
}

DiscreteDistribution parse_distribution(std::istream& in, const std::string& source) {
  const Table t = read_table(in, source);
  const bool weighted = t.header.back() == "weight";
  const std::size_t dim = weighted ? t.header.size() - 1 : t.header.size();
  if (dim == 0) throw ValidationError(source + ": no coordinate columns");
  const Eigen::MatrixXd all = to_matrix(t, t.header.size());
  Eigen::MatrixXd points = all.leftCols(static_cast<Eigen::Index>(dim));
  if (!points.allFinite()) throw ValidationError(source + ": non-finite coordinates");
  if (!weighted) return DiscreteDistribution::uniform(std::move(points));
  return DiscreteDistribution(std::move(points), all.col(static_cast<Eigen::Index>(dim)));
}

DiscreteDistribution read_distribution(const std::string& path) {
  auto in = open_input(path);
  return parse_distribution(in, path);
}

void write_distribution(const std::string& path, const DiscreteDistribution& dist) {
  std::ostringstream os;
  for (Eigen::Index c = 0; c < dist.dim(); ++c) os << 'x' << c + 1 << ',';
  os << "weight\n";
  for (Eigen::Index r = 0; r < dist.size(); ++r) {
    for (Eigen::Index c = 0; c < dist.dim(); ++c) os << format_double(dist.points()(r, c)) << ',';
    os << format_double(dist.weights()(r)) << '\n';
  }
  emit(path, os.str(), std::cout);
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "grid_value,method,metric_mean,metric_se,replications,failures\n";
  for (const auto& r : result.rows)
    os << format_double(r.grid_value) << ',' << r.method << ',' << format_double(r.metric_mean) << ','
       << format_double(r.metric_se) << ',' << r.replications << ',' << r.failures << '\n';
  return os.str();
}

SweepResult parse_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "grid_value,method,metric_mean,metric_se,replications,failures")
    throw ValidationError("sweep CSV: unexpected header");
  SweepResult result;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != 6) throw ValidationError("sweep CSV: row " + std::to_string(row) + " is ragged");
    SweepRow r;
    r.grid_value = parse_cell(cells[0], "sweep CSV", row, 0);
    r.method = trim(cells[1]);
    r.metric_mean = parse_cell(cells[2], "sweep CSV", row, 2);
    r.metric_se = parse_cell(cells[3], "sweep CSV", row, 3);
    r.replications = static_cast<int>(parse_cell(cells[4], "sweep CSV", row, 4));
    r.failures = static_cast<int>(parse_cell(cells[5], "sweep CSV", row, 5));
    result.rows.push_back(std::move(r));
  }
  return result;
}

json to_json(const SolveDiagnostics& d) {
  return {{"iterations", d.iterations},
          {"inner_solves", d.inner_solves},
          {"residual", number_json(d.residual)},
          {"constraint_gap", number_json(d.constraint_gap)},
          {"zero_feasible", d.zero_feasible}};
}

json to_json(const ErmResult& r) {
  return {{"x", vector_json(r.x)}, {"min_loss", number_json(r.min_loss)}, {"diagnostics", to_json(r.diagnostics)}};
}

json to_json(const RsSolution& s) {
  return {{"x_hat", vector_json(s.x_hat)},
          {"k_tau", number_json(s.k_tau)},
          {"lambda_hat", number_json(s.lambda_hat)},
          {"tau", number_json(s.tau)},
          {"epsilon", number_json(s.epsilon)},
          {"erm_min_loss", number_json(s.erm_min_loss)},
          {"empirical_loss", number_json(s.empirical_loss)},
          {"norm_variant", to_string(s.norm_variant)},
          {"diagnostics", to_json(s.diagnostics)}};
}

json to_json(const DroSolution& s) {
  return {{"x_hat", vector_json(s.x_hat)},
          {"radius", number_json(s.radius)},
          {"objective", number_json(s.objective)},
          {"diagnostics", to_json(s.diagnostics)}};
}

json to_json(const ConfidenceInterval& ci) {
  return {{"lower", number_json(ci.lower)},
          {"upper", number_json(ci.upper)},
          {"level", number_json(ci.level)},
          {"variant", to_string(ci.variant)}};
}

json to_json(const Remainder& r) {
  return {{"r_n", number_json(r.value)},
          {"beta", number_json(r.beta)},
          {"small_regime", r.small_regime},
          {"degenerate", r.degenerate},
          {"dimension_caveat", r.dimension_caveat}};
}

json to_json(const SweepResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"grid_value", number_json(row.grid_value)},
                    {"method", row.method},
                    {"metric_mean", number_json(row.metric_mean)},
                    {"metric_se", number_json(row.metric_se)},
                    {"replications", row.replications},
                    {"failures", row.failures}});
  return {{"scenario", to_string(r.scenario)}, {"rows", rows}, {"notes", r.notes}};
}

SweepResult sweep_from_json(const json& j) {
  SweepResult r;
  r.scenario = scenario_from_name(j.at("scenario").get<std::string>());
  for (const auto& row : j.at("rows"))
    r.rows.push_back({number_from_json(row.at("grid_value")), row.at("method").get<std::string>(),
                      number_from_json(row.at("metric_mean")), number_from_json(row.at("metric_se")),
                      row.at("replications").get<int>(), row.at("failures").get<int>()});
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

std::string flat_csv(const json& object) {
  std::vector<std::pair<std::string, std::string>> cells;
  flatten(object, "", cells);
  std::ostringstream os;
  os << "key,value\n";
  for (const auto& [k, v] : cells) os << k << ',' << v << '\n';
  return os.str();
}

void emit(const std::string& path, const std::string& content, std::ostream& fallback) {
  const bool newline = !content.empty() && content.back() == '\n';
  if (path.empty()) {
    fallback << content << (newline ? "" : "\n");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << content << (newline ? "" : "\n");
  if (!out) throw ValidationError("failed while writing '" + path + "'");
}

}  // namespace rskit
