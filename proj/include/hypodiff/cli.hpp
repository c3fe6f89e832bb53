#pragma once

// Problem configurations (JSON), expression-tree construction and the
// solve / verify / certify runners behind the command-line tool.

#include "hypodiff/verify.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hypodiff::cli {

using json = nlohmann::json;

inline constexpr const char* kSchema = "hypodiff-config/1";

enum ExitCode : int { kOk = 0, kConfigError = 1, kSolverFailure = 2, kCertificationFailure = 3, kIoError = 4 };

/// Schema violations, each prefixed with the JSON path of the offending node.
class ConfigError : public InputError {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

struct Constants {
  std::optional<double> lip_l, lip_k, bound_c, radius;
  double epsilon = 1.0;
};

struct SolverConfig {
  std::string method;  // mhd_constant, mhd_exact_step, mhd_line_search, phd, aphd; empty for verify-only
  std::optional<double> alpha;  // constant step (mhd_constant, phd)
  double alpha0 = 0.5;          // aphd
  std::optional<double> gamma;  // phd; defaults to L
  double tol_sub = 1e-10;
  double tol_ls = 1e-10;
};

struct VerifyConfig {
  std::optional<BoxConstraint> domain;  // defaults to [-5, 5]^d
  long samples = 1000;
  std::vector<std::string> checks;  // empty: every applicable check
};

struct ProblemConfig {
  std::string name;
  std::string source;  // file the config came from
  json expression;
  std::optional<HypoFunction> f;  // always set by parse_config
  Vec x0;
  BoxConstraint box;
  std::optional<double> f_star;
  std::optional<Vec> x_star;
  Constants constants;
  SolverConfig solver;
  StopRule stop;
  VerifyConfig verify;
  std::uint64_t seed = 0;
};

struct ParseOptions {
  std::optional<std::uint64_t> seed;    // overrides the config seed
  std::optional<double> default_tol;    // tol_sub when the config gives none (HYPODIFF_TOL)
};

/// Builds a HypoFunction from {"op": ..., "args": [...], "params": {...}}.
HypoFunction build_expression(const json& node, const std::string& path = "expression");

/// Names of the builtin atoms and combinators with one-line descriptions.
std::vector<std::pair<std::string, std::string>> builtin_ops();

ProblemConfig parse_config(const json& doc, const ParseOptions& opts = {});
ProblemConfig parse_config_file(const std::string& path, const ParseOptions& opts = {});

struct RunOutput {
  int exit_code = kOk;
  std::string csv;  // empty when no solver ran
  json summary;
};

struct RunOptions {
  bool timings = false;  // record wall-clock times (breaks byte-identical output)
};

/// Runs the configured solver and certifies the trace when f_* is known.
RunOutput solve(const ProblemConfig& cfg, const RunOptions& opts = {});

/// Runs the definitional property checks on the configured function.
RunOutput verify(const ProblemConfig& cfg);

/// Re-checks a stored CSV trace against the bounds for the configured problem.
RunOutput certify(const ProblemConfig& cfg, const std::string& csv);

std::string trace_csv(const SolverTrace& trace, std::optional<double> f_star, bool timings);
SolverTrace parse_trace_csv(const std::string& csv, const std::string& method);

json report_json(const verify::CheckReport& r);

/// Throws IoError.
void write_file(const std::string& path, const std::string& text);

}  // namespace hypodiff::cli
