// hypodiff: solve, verify and certify problems given as JSON configs.

#include "hypodiff/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <fstream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace hypodiff;
using namespace hypodiff::cli;

namespace {

struct Common {
  std::vector<std::string> configs;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int parallel = 1;
  bool timings = false;
};

// Directories expand to their *.json files in name order.
std::vector<std::string> expand(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const std::string& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path().string());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

ParseOptions parse_options(const Common& c) {
  ParseOptions po;
  po.seed = c.seed;
  if (const char* env = std::getenv("HYPODIFF_TOL")) {
    char* end = nullptr;
    const double t = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(t > 0.0)) throw ConfigError({"HYPODIFF_TOL: expected a positive number, got '" + std::string(env) + "'"});
    po.default_tol = t;
  }
  return po;
}

struct Job {
  std::string path;
  int code = kOk;
  std::string message;  // printed to stderr
};

// Runs fn over the configs with up to n threads; results stay in input order.
template <class Fn>
int run_all(const Common& c, Fn fn) {
  const std::vector<std::string> paths = expand(c.configs);
  if (paths.empty()) {
    std::cerr << "no config files given\n";
    return kConfigError;
  }
  ParseOptions po;
  try {
    po = parse_options(c);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  }
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) {
    std::cerr << "cannot create output directory '" << c.out << "': " << ec.message() << "\n";
    return kIoError;
  }
  std::vector<Job> jobs(paths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Job& j = jobs[i];
      j.path = paths[i];
      try {
        const ProblemConfig cfg = parse_config_file(j.path, po);
        j.code = fn(cfg, j.message);
      } catch (const ConfigError& e) {
        j.code = kConfigError;
        for (const std::string& m : e.errors()) j.message += j.path + ": " + m + "\n";
      } catch (const IoError& e) {
        j.code = kIoError;
        j.message = j.path + ": " + e.what() + "\n";
      } catch (const std::exception& e) {
        j.code = kSolverFailure;
        j.message = j.path + ": " + e.what() + "\n";
      }
    }
  };
  const int n = std::max(1, std::min<int>(c.parallel, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int code = kOk;
  for (const Job& j : jobs) {
    std::cerr << j.message;
    code = std::max(code, j.code);
  }
  return code;
}

std::string stem(const ProblemConfig& cfg) {
  return cfg.name.empty() ? fs::path(cfg.source).stem().string() : cfg.name;
}

void add_common(CLI::App* app, Common& c, bool many) {
  auto* opt = app->add_option("--config", c.configs, "config file or directory of *.json (repeatable)")->required();
  if (!many) opt->expected(1);
  app->add_option("--out", c.out, "output directory")->capture_default_str();
  app->add_option("--seed", c.seed, "override the sampling seed of every config");
  app->add_option("--parallel", c.parallel, "number of configs run concurrently")->check(CLI::PositiveNumber)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypodiff: hypodifferential descent solvers and property checks"};
  app.require_subcommand(1);

  Common solve_c, verify_c, certify_c;
  std::string trace_path;

  CLI::App* solve_cmd = app.add_subcommand("solve", "run the configured solver, write <name>.csv and <name>.json");
  add_common(solve_cmd, solve_c, true);
  solve_cmd->add_flag("--timings", solve_c.timings, "record wall-clock times (output is then not reproducible)");

  CLI::App* verify_cmd = app.add_subcommand("verify", "run the property checks, write <name>.verify.json");
  add_common(verify_cmd, verify_c, true);

  CLI::App* certify_cmd = app.add_subcommand("certify", "re-check a stored trace against the rate bounds");
  add_common(certify_cmd, certify_c, false);
  certify_cmd->add_option("--trace", trace_path, "trace CSV written by solve")->required();

  CLI::App* atoms_cmd = app.add_subcommand("atoms", "list builtin atoms and combinators");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  if (atoms_cmd->parsed()) {
    for (const auto& [name, desc] : builtin_ops()) std::cout << name << "\t" << desc << "\n";
    return kOk;
  }

  if (solve_cmd->parsed()) {
    return run_all(solve_c, [&](const ProblemConfig& cfg, std::string& msg) {
      RunOutput r = cli::solve(cfg, RunOptions{solve_c.timings});
      const fs::path base = fs::path(solve_c.out) / stem(cfg);
      r.summary["exit_code"] = r.exit_code;
      if (!r.csv.empty()) write_file(base.string() + ".csv", r.csv);
      write_file(base.string() + ".json", r.summary.dump(2) + "\n");
      msg += cfg.source + ": " + (r.exit_code == kOk ? "ok" : "exit " + std::to_string(r.exit_code)) +
             (r.summary.contains("error") ? " (" + r.summary["error"].get<std::string>() + ")" : "") + "\n";
      return r.exit_code;
    });
  }

  if (verify_cmd->parsed()) {
    return run_all(verify_c, [&](const ProblemConfig& cfg, std::string& msg) {
      RunOutput r = cli::verify(cfg);
      r.summary["exit_code"] = r.exit_code;
      write_file((fs::path(verify_c.out) / (stem(cfg) + ".verify.json")).string(), r.summary.dump(2) + "\n");
      msg += cfg.source + ": " + (r.exit_code == kOk ? "all checks passed" : "exit " + std::to_string(r.exit_code)) + "\n";
      return r.exit_code;
    });
  }

  return run_all(certify_c, [&](const ProblemConfig& cfg, std::string& msg) {
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) throw IoError("cannot open trace '" + trace_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    RunOutput r = certify(cfg, ss.str());
    r.summary["exit_code"] = r.exit_code;
    const std::string text = r.summary.dump(2) + "\n";
    write_file((fs::path(certify_c.out) / (stem(cfg) + ".certify.json")).string(), text);
    std::cout << text;
    msg += cfg.source + ": " + (r.exit_code == kOk ? "certified" : "exit " + std::to_string(r.exit_code)) + "\n";
    return r.exit_code;
  });
}
