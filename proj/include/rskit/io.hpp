#ifndef RSKIT_IO_HPP
#define RSKIT_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rskit/distributions.hpp"
#include "rskit/experiments.hpp"
#include "rskit/inference.hpp"
#include "rskit/solvers.hpp"
#include "rskit/transport.hpp"

namespace rskit {

enum class Format { csv, json };

Format format_from_name(std::string_view name);

/// Header `u1,...,u{m},y`; values parsed to full double precision.
/// Throws ValidationError naming the row or column on malformed input.
Dataset read_dataset(const std::string& path);
Dataset parse_dataset(std::istream& in, const std::string& source = "<stream>");
/// Writes with 17 significant digits, so read_dataset gives back the same bits.
void write_dataset(const std::string& path, const Dataset& data);

/// Joint points, one per row. When the last header column is `weight` the
/// rows are weighted atoms; otherwise the file is read as the empirical
/// distribution of its rows.
DiscreteDistribution read_distribution(const std::string& path);
DiscreteDistribution parse_distribution(std::istream& in, const std::string& source = "<stream>");
void write_distribution(const std::string& path, const DiscreteDistribution& dist);

/// Sweep CSV: grid_value,method,metric_mean,metric_se,replications,failures
std::string sweep_csv(const SweepResult& result);
SweepResult parse_sweep_csv(std::istream& in);

nlohmann::json to_json(const SolveDiagnostics& d);
nlohmann::json to_json(const ErmResult& r);
nlohmann::json to_json(const RsSolution& s);
nlohmann::json to_json(const DroSolution& s);
nlohmann::json to_json(const ConfidenceInterval& ci);
nlohmann::json to_json(const Remainder& r);
nlohmann::json to_json(const SweepResult& r);
SweepResult sweep_from_json(const nlohmann::json& j);

/// Flat `key,value` CSV of a JSON object; arrays become key_1, key_2, ...
std::string flat_csv(const nlohmann::json& object);

/// Writes `content` to `path` (stdout when empty), adding a final newline if
/// missing. Throws ValidationError when the file cannot be written.
void emit(const std::string& path, const std::string& content, std::ostream& fallback);

std::string format_double(double v);

}  // namespace rskit

#endif  // RSKIT_IO_HPP
