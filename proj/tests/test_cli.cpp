#include "doctest.h"

#include "hypodiff/cli.hpp"

#include <string>

using namespace hypodiff;
using namespace hypodiff::cli;

namespace {

json abs_config(const std::string& method) {
  json doc = json::parse(R"({
    "schema": "hypodiff-config/1", "name": "t", "dimension": 1,
    "expression": {"op": "abs"}, "x0": [1.0],
    "known": {"f_star": 0.0, "x_star": [0.0]},
    "constants": {"R": 1.0},
    "stop": {"eps_dist": 1e-8, "max_iters": 50}, "seed": 3})");
  doc["solver"] = {{"method", method}};
  return doc;
}

// all messages of a ConfigError joined, or "" if parsing succeeded
std::string config_errors(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    std::string s;
    for (const std::string& m : e.errors()) s += m + "\n";
    return s;
  }
  return "";
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  const ProblemConfig cfg = parse_config(abs_config("mhd_exact_step"));
  CHECK(cfg.f->dim() == 1);
  CHECK(cfg.f_star.value() == 0.0);
  CHECK(cfg.constants.radius.value() == 1.0);
  CHECK(cfg.seed == 3);
  CHECK(parse_config(abs_config("mhd_exact_step"), ParseOptions{99, {}}).seed == 99);

  json bad = abs_config("mhd_constant");
  bad["constants"]["L"] = 1.0;
  bad["solver"]["params"] = {{"alpha", 3.0}};
  CHECK(config_errors(bad).find("alpha >= 2/L") != std::string::npos);

  json mismatch = abs_config("mhd_exact_step");
  mismatch["dimension"] = 2;
  mismatch["x0"] = {1.0, 0.0};
  mismatch["expression"] = json::parse(R"({"op": "conic", "params": {"weights": [1, 1]},
    "args": [{"op": "abs"}, {"op": "dist_orthant", "params": {"dim": 2}}]})");
  const std::string msg = config_errors(mismatch);
  CHECK(msg.find("$.expression.args[") != std::string::npos);

  json unknown = abs_config("mhd_exact_step");
  unknown["colour"] = "blue";
  CHECK(config_errors(unknown).find("colour") != std::string::npos);

  json tight = abs_config("mhd_exact_step");
  tight["solver"]["params"] = {{"tol_sub", 1e-6}};
  CHECK(config_errors(tight).find("tol_sub") != std::string::npos);
}

TEST_CASE("solve abs with exact steps") {
  const RunOutput r = solve(parse_config(abs_config("mhd_exact_step")));
  CHECK(r.exit_code == kOk);
  CHECK(count_lines(r.csv) == 3);  // header, k = 0, k = 1
  CHECK(r.csv.rfind("k,f,gap_to_fstar,dist0,alpha,subproblem_iters,wall_ms\n", 0) == 0);
  CHECK(r.summary["outcome"] == "finite termination");
  CHECK(r.summary["certified"] == true);
  CHECK(r.summary["x_final"][0].get<double>() == 0.0);
}

TEST_CASE("solve abs with the accelerated method certifies the rate") {
  const RunOutput r = solve(parse_config(abs_config("aphd")));
  CHECK(r.exit_code == kOk);
  bool rate = false;
  for (const json& c : r.summary["certification"]) {
    if (c["name"] == "rate:aphd") rate = c["passed"].get<bool>();
  }
  CHECK(rate);
}

TEST_CASE("trace CSV round trip through certify") {
  const ProblemConfig cfg = parse_config(abs_config("mhd_exact_step"));
  const RunOutput r = solve(cfg);
  const SolverTrace tr = parse_trace_csv(r.csv, "mhd_exact_step");
  REQUIRE(tr.rows.size() == 2);
  CHECK(tr.rows[0].f == 1.0);
  CHECK(certify(cfg, r.csv).exit_code == kOk);

  // a tampered trace (f_1 raised from 0 to 0.9) breaks the rate certificate
  const std::size_t row1 = r.csv.find("\n1,") + 1;
  const std::size_t f_end = r.csv.find(',', row1 + 2);
  const std::size_t gap_end = r.csv.find(',', f_end + 1);
  const std::string bad = r.csv.substr(0, row1) + "1,0.9,0.9" + r.csv.substr(gap_end);
  CHECK(certify(cfg, bad).exit_code == kCertificationFailure);
}

TEST_CASE("method requirements are checked when parsing") {
  json cfg = abs_config("mhd_exact_step");
  cfg["expression"] = json::parse(R"({"op": "quadratic", "params": {"Q": [[1]], "c": [0], "r": 0}})");
  CHECK(config_errors(cfg).find("needs an exact hypodifferential") != std::string::npos);
  cfg["solver"]["method"] = "aphd";
  CHECK(config_errors(cfg).empty());
}
