#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rskit/cli.hpp"
#include "rskit/distributions.hpp"
#include "rskit/io.hpp"

using namespace rskit;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rskit_cli_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

std::string write_file(const std::string& name, const std::string& content) {
  const std::string path = scratch(name);
  std::ofstream(path) << content;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sample_data() {
  const std::string path = scratch("data.csv");
  write_dataset(path, generate_synthetic(SyntheticConfig{}, 60, 5));
  return path;
}

// One entry per setting: a value set through the config file and a
// different one given as a flag.
struct Probe {
  std::string section, key;
  json from_config;
  std::string flag_text;
  json from_flag;
};

std::vector<Probe> probes() {
  return {
      {"", "seed", 11, "12", 12},
      {"", "out", scratch("a.json"), scratch("b.json"), scratch("b.json")},
      {"", "format", "csv", "json", "json"},
      {"", "data", "a.csv", "b.csv", "b.csv"},
      {"", "jobs", 2, "3", 3},
      {"solver", "max_iters", 50, "60", 60},
      {"solver", "step_rule", "polyak", "decaying", "decaying"},
      {"solver", "rel_tol", 1e-5, "1e-6", 1e-6},
      {"solver", "constraint_tol", 1e-5, "1e-4", 1e-4},
      {"solver", "ridge_tiebreak", 0.0, "1e-9", 1e-9},
      {"solver", "method", "subgradient", "newton", "newton"},
      {"problem", "loss", "huber", "pinball", "pinball"},
      {"problem", "delta", 0.3, "0.4", 0.4},
      {"problem", "bound", 2.0, "3", 3.0},
      {"problem", "task", "classification", "regression", "regression"},
      {"problem", "epsilon", 0.3, "0.4", 0.4},
      {"problem", "radius", 0.3, "0.4", 0.4},
      {"problem", "norm", "augmented", "x_only", "x_only"},
      {"problem", "cost", "full_l2", "feature_only", "feature_only"},
      {"problem", "tau", 0.5, "0.6", 0.6},
      {"problem", "x", json::array({1.0, 2.0}), "3,4", json::array({3.0, 4.0})},
      {"problem", "p", "p1.csv", "p2.csv", "p2.csv"},
      {"problem", "q", "q1.csv", "q2.csv", "q2.csv"},
      {"problem", "support", "s1.csv", "s2.csv", "s2.csv"},
      {"problem", "mode", "oracle", "closed_form", "closed_form"},
      {"schedule", "beta_kind", "exp_sqrt", "polynomial", "polynomial"},
      {"schedule", "beta", 0.1, "0.2", 0.2},
      {"schedule", "c1", 3.0, "4", 4.0},
      {"schedule", "c2", 3.0, "4", 4.0},
      {"schedule", "a", 3.0, "4", 4.0},
      {"schedule", "m", 4, "5", 5},
      {"schedule", "n", 400, "500", 500},
      {"synthetic", "m_u", 3, "4", 4},
      {"synthetic", "x_star", json::array({1.0}), "2,3", json::array({2.0, 3.0})},
      {"synthetic", "degree", 1.0, "2", 2.0},
      {"synthetic", "noise_var", 0.2, "0.3", 0.3},
      {"synthetic", "feature_mean", 0.2, "0.3", 0.3},
      {"synthetic", "feature_var", 0.2, "0.3", 0.3},
      {"experiment", "n_train", 50, "60", 60},
      {"experiment", "n_test", 50, "60", 60},
      {"experiment", "support_size", 10, "12", 12},
      {"experiment", "n_grid", json::array({10, 20}), "30,40", json::array({30, 40})},
      {"experiment", "epsilon_grid", json::array({0.1}), "0.2,0.3", json::array({0.2, 0.3})},
      {"experiment", "radius_grid", json::array({0.1}), "0.2,0.3", json::array({0.2, 0.3})},
      {"experiment", "degree_grid", json::array({1.0}), "2,3", json::array({2.0, 3.0})},
      {"experiment", "target_degree", 1.0, "2", 2.0},
      {"experiment", "replications", 10, "20", 20},
  };
}

std::string flag_of(const std::string& key) {
  std::string f = "--" + key;
  for (char& c : f)
    if (c == '_') c = '-';
  return f;
}

const json& at(const json& doc, const Probe& p) { return p.section.empty() ? doc.at(p.key) : doc.at(p.section).at(p.key); }

}  // namespace

TEST_CASE("probe table covers every setting") {
  const Run r = run({"show-config"});
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  std::size_t leaves = 0;
  for (const auto& [k, v] : doc.items()) leaves += v.is_object() ? v.size() : 1;
  CHECK(leaves == probes().size());
}

TEST_CASE("precedence: defaults < config file < flags for every setting") {
  unsetenv("RSKIT_SEED");
  const json defaults = json::parse(run({"show-config"}).out);
  for (const Probe& p : probes()) {
    CAPTURE(p.key);
    json doc = json::object();
    if (p.section.empty())
      doc[p.key] = p.from_config;
    else
      doc[p.section][p.key] = p.from_config;
    const std::string cfg = write_file("probe.json", doc.dump());

    // --out redirects the document itself.
    const auto document = [&](const Run& r, const json& out_path) {
      return json::parse(p.key == "out" ? slurp(out_path.get<std::string>()) : r.out);
    };
    const json with_config = document(run({"--config", cfg, "show-config"}), p.from_config);
    CHECK(at(with_config, p) == p.from_config);
    CHECK(at(with_config, p) != at(defaults, p));
    const Run flagged = run({"--config", cfg, flag_of(p.key) + "=" + p.flag_text, "show-config"});
    REQUIRE(flagged.code == 0);
    CHECK(at(document(flagged, p.from_flag), p) == p.from_flag);
    // Flags after the subcommand are accepted too.
    const Run after = run({"show-config", flag_of(p.key) + "=" + p.flag_text});
    CHECK(at(document(after, p.from_flag), p) == p.from_flag);
  }
}

TEST_CASE("seed environment variable sits below the config file") {
  setenv("RSKIT_SEED", "77", 1);
  CHECK(json::parse(run({"show-config"}).out)["seed"] == 77);
  const std::string cfg = write_file("seed.json", R"({"seed": 5})");
  CHECK(json::parse(run({"--config", cfg, "show-config"}).out)["seed"] == 5);
  CHECK(json::parse(run({"--config", cfg, "--seed", "6", "show-config"}).out)["seed"] == 6);
  setenv("RSKIT_SEED", "not-a-number", 1);
  CHECK(run({"show-config"}).code == 1);
  unsetenv("RSKIT_SEED");
}

TEST_CASE("config errors") {
  const Run unknown = run({"--config", write_file("unknown.json", R"({"solver": {"max_iter": 3}})"), "show-config"});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("solver.max_iter") != std::string::npos);
  const Run section = run({"--config", write_file("section.json", R"({"plot": {}})"), "show-config"});
  CHECK(section.code == 1);
  const Run type = run({"--config", write_file("type.json", R"({"problem": {"epsilon": "big"}})"), "show-config"});
  CHECK(type.code == 1);
  CHECK(type.err.find("problem.epsilon") != std::string::npos);
  const Run syntax = run({"--config", write_file("syntax.json", "{\n  \"seed\": 1,\n  oops\n}"), "show-config"});
  CHECK(syntax.code == 1);
  CHECK(syntax.err.find(":3:") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"solve-rs"}).code == 1);  // no data
  const std::string data = sample_data();
  CHECK(run({"solve-rs", "--data", data, "--loss", "squared"}).code == 1);
  CHECK(run({"solve-rs", "--data", data, "--max-iters", "2"}).code == 2);
  CHECK(run({"solve-rs", "--data", data, "--epsilon", "-1"}).code == 1);
}

TEST_CASE("solve commands") {
  const std::string data = sample_data();
  const Run rs = run({"solve-rs", "--data", data, "--loss", "l1", "--epsilon", "0.2"});
  REQUIRE(rs.code == 0);
  const json j = json::parse(rs.out);
  for (const char* key : {"x_hat", "k_tau", "lambda_hat", "tau", "epsilon"}) CHECK(j.contains(key));
  CHECK(j["epsilon"] == 0.2);

  const Run dro = run({"solve-dro", "--data", data, "--radius", std::to_string(j["lambda_hat"].get<double>())});
  REQUIRE(dro.code == 0);
  const json d = json::parse(dro.out);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(d["x_hat"][i].get<double>() - j["x_hat"][i].get<double>()) < 1e-4);

  const Run erm = run({"solve-erm", "--data", data, "--format", "csv"});
  REQUIRE(erm.code == 0);
  CHECK(erm.out.rfind("key,value\n", 0) == 0);

  const Run frag = run({"fragility", "--data", data, "--x=2,-1", "--epsilon", "0.5"});
  REQUIRE(frag.code == 0);
  CHECK(json::parse(frag.out)["k_tau"].get<double>() == doctest::Approx(std::sqrt(5.0)));
  const Run oracle = run({"fragility", "--data", data, "--x=2,-1", "--epsilon", "0.5", "--mode", "oracle",
                          "--cost", "full_l2"});
  REQUIRE(oracle.code == 0);
  CHECK(json::parse(oracle.out)["k_tau"].get<double>() <= std::sqrt(6.0) + 1e-8);
}

TEST_CASE("interval command") {
  const std::string data = sample_data();
  const Run r = run({"interval", "--data", data, "--epsilon", "0.2", "--beta", "0.05", "--c1", "2", "--c2", "1",
                     "--a", "2", "--m", "3", "--n", "500"});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("placeholder") != std::string::npos);
  const json j = json::parse(r.out);
  CHECK(j["theorem1"]["lower"].get<double>() <= j["theorem1"]["upper"].get<double>());
  CHECK(j["corollary1"]["upper"].get<double>() >= j["theorem1"]["upper"].get<double>());
  const Run degenerate = run({"interval", "--data", data, "--c1", "0.01"});
  REQUIRE(degenerate.code == 0);
  CHECK(json::parse(degenerate.out)["theorem1"].is_null());
}

TEST_CASE("wasserstein command on the two-atom example") {
  const std::string p = write_file("p.csv", "x1\n0\n1\n");
  const std::string q = write_file("q.csv", "x1\n0.5\n1.5\n");
  const Run r = run({"wasserstein", "--p", p, "--q", q, "--cost", "full_l2"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["distance"].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("experiment output is byte-identical across reruns") {
  const std::string out = scratch("sweep.csv");
  const std::vector<std::string> args = {"experiment", "shift",          "--replications", "3",   "--n-test",
                                         "200",        "--degree-grid",  "0,6",            "--seed", "4",
                                         "--out",      out};
  REQUIRE(run(args).code == 0);
  const std::string first = slurp(out);
  CHECK(first.rfind("grid_value,method,metric_mean,metric_se,replications,failures\n", 0) == 0);
  REQUIRE(run(args).code == 0);
  CHECK(slurp(out) == first);
  std::vector<std::string> jobs = args;
  jobs.insert(jobs.end(), {"--jobs", "2"});
  REQUIRE(run(jobs).code == 0);
  CHECK(slurp(out) == first);
}

TEST_CASE("installed binary") {
  const std::string cli = RSKIT_CLI_PATH;
  const std::string out = scratch("bin.json");
  CHECK(std::system((cli + " show-config --seed 3 --out " + out).c_str()) == 0);
  CHECK(json::parse(slurp(out))["seed"] == 3);
  const int bad = std::system((cli + " solve-rs > /dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(bad) == 1);
}
