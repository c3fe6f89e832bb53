#include "hypodiff/cli.hpp"

#include "hypodiff/atoms.hpp"
#include "hypodiff/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace hypodiff::cli {

namespace {

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError({path + ": " + msg}); }

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>()))
    fail(path, "expected an integer");
  return static_cast<long>(j.get<double>());
}

// null, "inf" and "-inf" are accepted for box bounds
double get_bound(const json& j, const std::string& path, double if_null) {
  if (j.is_null()) return if_null;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    fail(path, "expected a number, null, \"inf\" or \"-inf\"");
  }
  return get_number(j, path);
}

Vec get_vec(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Mat get_mat(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) fail(path, "expected a non-empty array of rows");
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    const Vec row = get_vec(j[r], rp);
    if (static_cast<std::size_t>(row.size()) != cols) fail(rp, "row length " + std::to_string(row.size()) + ", expected " + std::to_string(cols));
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

const json& param(const json& params, const char* key, const std::string& path) {
  if (!params.contains(key)) fail(path + ".params", std::string("missing parameter '") + key + "'");
  return params.at(key);
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path,
                std::vector<std::string>& errors) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) errors.push_back(path + "." + it.key() + ": unknown key");
}

BoxConstraint get_box(const json& j, Eigen::Index d, const std::string& path) {
  if (!j.is_object() || !j.contains("lower") || !j.contains("upper")) fail(path, "expected {\"lower\": [...], \"upper\": [...]}");
  const double inf = std::numeric_limits<double>::infinity();
  auto side = [&](const char* key, double if_null) {
    const json& a = j.at(key);
    const std::string p = path + "." + key;
    if (!a.is_array()) fail(p, "expected an array");
    if (static_cast<Eigen::Index>(a.size()) != d) fail(p, "length " + std::to_string(a.size()) + ", expected " + std::to_string(d));
    Vec v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = get_bound(a[static_cast<std::size_t>(i)], p + "[" + std::to_string(i) + "]", if_null);
    return v;
  };
  try {
    return BoxConstraint::make(side("lower", -inf), side("upper", inf));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

SmoothOuter outer_by_name(const std::string& name, Eigen::Index n, const std::string& path) {
  if (name == "sum") return outer_sum(n);
  if (name == "logsumexp") return outer_logsumexp(n);
  if (name == "exp") {
    if (n != 1) fail(path, "outer 'exp' takes exactly one argument");
    return outer_exp();
  }
  if (name == "identity") {
    if (n != 1) fail(path, "outer 'identity' takes exactly one argument");
    return outer_identity();
  }
  fail(path, "unknown outer function '" + name + "' (sum, logsumexp, exp, identity)");
}

HypoFunction build_node(const json& node, const std::string& path) {
  if (!node.is_object()) fail(path, "expected an object {\"op\": ..., \"args\": [...], \"params\": {...}}");
  if (!node.contains("op") || !node.at("op").is_string()) fail(path, "missing string field 'op'");
  for (auto it = node.begin(); it != node.end(); ++it)
    if (it.key() != "op" && it.key() != "args" && it.key() != "params") fail(path + "." + it.key(), "unknown key");
  const std::string op = node.at("op").get<std::string>();
  const json args = node.value("args", json::array());
  const json params = node.value("params", json::object());
  if (!args.is_array()) fail(path + ".args", "expected an array");
  if (!params.is_object()) fail(path + ".params", "expected an object");
  const std::string pp = path + ".params";

  auto nargs = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) {
      fail(path + ".args", "'" + op + "' takes " + (lo == hi ? std::to_string(lo) : std::to_string(lo) + ".." + (hi == SIZE_MAX ? std::string("n") : std::to_string(hi))) +
                               " argument(s), got " + std::to_string(args.size()));
    }
  };
  auto children = [&]() {
    std::vector<HypoFunction> out;
    for (std::size_t i = 0; i < args.size(); ++i) out.push_back(build_node(args[i], path + ".args[" + std::to_string(i) + "]"));
    return out;
  };
  auto same_dim = [&](const std::vector<HypoFunction>& fs) {
    for (std::size_t i = 1; i < fs.size(); ++i)
      if (fs[i].dim() != fs[0].dim()) {
        fail(path + ".args[" + std::to_string(i) + "]", "dimension " + std::to_string(fs[i].dim()) + " does not match dimension " +
                                                            std::to_string(fs[0].dim()) + " of args[0]");
      }
  };

  try {
    if (op == "abs") {
      nargs(0, 0);
      return atom_abs();
    }
    if (op == "polyhedral") {
      nargs(0, 0);
      return atom_polyhedral(PolyhedralSpec{get_vec(param(params, "offsets", path), pp + ".offsets"),
                                            get_mat(param(params, "slopes", path), pp + ".slopes")});
    }
    if (op == "sublinear") {
      nargs(0, 0);
      // one slope vector per entry
      return atom_sublinear(geometry::Polytope(Mat(get_mat(param(params, "slopes", path), pp + ".slopes").transpose())));
    }
    if (op == "norm_affine") {
      nargs(0, 0);
      return atom_norm_affine(get_mat(param(params, "A", path), pp + ".A"), get_vec(param(params, "b", path), pp + ".b"));
    }
    if (op == "max_eigenvalue") {
      nargs(0, 0);
      return atom_max_eigenvalue(static_cast<int>(get_int(param(params, "order", path), pp + ".order")));
    }
    if (op == "dist_orthant") {
      nargs(0, 0);
      return atom_dist_orthant(static_cast<int>(get_int(param(params, "dim", path), pp + ".dim")));
    }
    if (op == "quadratic") {
      nargs(0, 0);
      const double r = params.contains("r") ? get_number(params.at("r"), pp + ".r") : 0.0;
      return atom_quadratic(get_mat(param(params, "Q", path), pp + ".Q"), get_vec(param(params, "c", path), pp + ".c"), r);
    }
    if (op == "bundle") {
      nargs(1, 1);
      const HypoFunction base = children()[0];
      const json& pts = param(params, "points", path);
      if (!pts.is_array() || pts.empty()) fail(pp + ".points", "expected a non-empty array of points");
      // values and subgradients come from the argument; (0, v) elements of
      // a normalised consistent map carry subgradients
      auto subgrad = [base](const Vec& y) { return base.hypo(y).support(1.0, Vec::Zero(base.dim())).v; };
      Bundle b;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const Vec p = get_vec(pts[i], pp + ".points[" + std::to_string(i) + "]");
        if (p.size() != base.dim()) fail(pp + ".points[" + std::to_string(i) + "]", "dimension mismatch with args[0]");
        b.points.push_back(p);
        b.values.push_back(base.value(p));
        b.subgradients.push_back(subgrad(p));
      }
      const bool with_oracle = params.value("subgradient_oracle", true);
      std::optional<double> lip;
      if (params.contains("lip_f")) lip = get_number(params.at("lip_f"), pp + ".lip_f");
      return bundle_hypodiff(b, [base](const Vec& x) { return base.value(x); },
                             with_oracle ? SubgradientFn(subgrad) : SubgradientFn{}, lip);
    }
    if (op == "conic") {
      nargs(1, SIZE_MAX);
      const std::vector<HypoFunction> fs = children();
      same_dim(fs);
      const Vec w = get_vec(param(params, "weights", path), pp + ".weights");
      if (static_cast<std::size_t>(w.size()) != fs.size()) fail(pp + ".weights", "one weight per argument expected");
      return conic_combination(fs, std::vector<double>(w.data(), w.data() + w.size()));
    }
    if (op == "max") {
      nargs(1, SIZE_MAX);
      const std::vector<HypoFunction> fs = children();
      same_dim(fs);
      return finite_max(fs);
    }
    if (op == "affine") {
      nargs(1, 1);
      const HypoFunction f = children()[0];
      const Mat a = get_mat(param(params, "A", path), pp + ".A");
      if (a.rows() != f.dim()) fail(pp + ".A", "needs " + std::to_string(f.dim()) + " rows (dimension of args[0]), got " + std::to_string(a.rows()));
      const Vec b = params.contains("b") ? get_vec(params.at("b"), pp + ".b") : Vec(Vec::Zero(f.dim()));
      return affine_precompose(f, a, b);
    }
    if (op == "compose") {
      nargs(1, SIZE_MAX);
      const std::vector<HypoFunction> fs = children();
      same_dim(fs);
      const json& outer = param(params, "outer", path);
      if (!outer.is_string()) fail(pp + ".outer", "expected a name");
      return outer_compose(outer_by_name(outer.get<std::string>(), static_cast<Eigen::Index>(fs.size()), pp + ".outer"), fs);
    }
    if (op == "positive_power") {
      nargs(1, 1);
      return positive_power(children()[0], get_number(param(params, "p", path), pp + ".p"));
    }
    if (op == "as_oracle") {
      nargs(1, 1);
      return as_oracle(children()[0]);
    }
    if (op == "with_bound_C") {
      nargs(1, 1);
      return with_bound_C(children()[0], get_number(param(params, "C", path), pp + ".C"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
  fail(path + ".op", "unknown op '" + op + "'");
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

verify::RateConstants rate_constants(const ProblemConfig& cfg, std::vector<std::string>& skipped) {
  verify::RateConstants c;
  c.f_star = cfg.f_star;
  c.x_star = cfg.x_star;
  c.radius = cfg.constants.radius;
  const HypoMeta& m = cfg.f->meta();
  c.lip_l = m.lip_approx_L;
  const std::string& method = cfg.solver.method;
  if (method == "mhd_constant") c.alpha = cfg.solver.alpha;
  if (method == "mhd_line_search" && !m.exact) {
    // compare with the best admissible constant step
    if (m.lip_approx_L && *m.lip_approx_L > 0.0) c.alpha = 1.0 / *m.lip_approx_L;
    else skipped.push_back("rate: line search on a non-exact map needs L > 0");
  }
  if (method == "aphd") c.gamma0 = *m.lip_approx_L * cfg.solver.alpha0 * cfg.solver.alpha0;
  return c;
}

bool needs_radius(const std::string& method) {
  return method == "mhd_constant" || method == "mhd_exact_step" || method == "mhd_line_search";
}

// Certification of a trace; returns false if any report failed.
bool certify_trace(const ProblemConfig& cfg, const SolverTrace& tr, json& summary) {
  json certs = json::array();
  std::vector<std::string> skipped;
  bool ok = true;
  auto add = [&](const verify::CheckReport& r) {
    certs.push_back(report_json(r));
    ok = ok && r.passed;
  };
  const std::string& method = cfg.solver.method;
  if (!cfg.f_star) {
    skipped.push_back("rate: f_star unknown");
  } else if (needs_radius(method) && !cfg.constants.radius) {
    skipped.push_back("rate: constant R missing");
  } else if (method == "aphd" && !cfg.x_star) {
    skipped.push_back("rate: x_star unknown");
  } else {
    const verify::RateConstants c = rate_constants(cfg, skipped);
    if (skipped.empty()) add(verify::rate_certify(tr, method, c));
  }
  if (method == "aphd") add(verify::alpha_recurrence_check(tr));
  // a descent run stopped on dist0 <= eps certifies f - f_* <= eps (1 + R)
  if (needs_radius(method) && cfg.f_star && cfg.constants.radius && tr.stop_reason == "dist0") {
    verify::CheckReport r;
    r.name = "optimality_certificate";
    r.tolerance = 100.0 * cfg.solver.tol_sub * (1.0 + std::abs(*cfg.f_star));
    r.worst_violation = (tr.f_final - *cfg.f_star) - tr.rows.back().dist0 * (1.0 + *cfg.constants.radius);
    r.witness = tr.x_final;
    r.samples = 1;
    r.passed = r.worst_violation <= r.tolerance;
    r.note = "f - f_star <= dist0 (1 + R)";
    add(r);
  }
  if (cfg.x_star) add(verify::optimality_check(*cfg.f, *cfg.x_star));
  summary["certification"] = certs;
  if (!skipped.empty()) summary["certification_skipped"] = skipped;
  summary["certified"] = ok;
  return ok;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : InputError("invalid config: " + join(errors, "; ")), errors_(std::move(errors)) {}

HypoFunction build_expression(const json& node, const std::string& path) { return build_node(node, path); }

std::vector<std::pair<std::string, std::string>> builtin_ops() {
  return {
      {"abs", "atom |x| on R"},
      {"polyhedral", "atom max_i (offsets_i + <slopes_i, x>); params offsets, slopes (rows)"},
      {"sublinear", "atom max_j <s_j, x>; params slopes (one vector per entry)"},
      {"norm_affine", "atom |A x + b|; params A, b"},
      {"max_eigenvalue", "atom largest eigenvalue of a symmetric matrix in scaled vector form; params order"},
      {"dist_orthant", "atom distance to the nonnegative orthant; params dim"},
      {"quadratic", "atom 0.5 x'Qx + c'x + r; params Q, c, r"},
      {"bundle", "bundle hypodifferential of args[0] at params points; optional subgradient_oracle, lip_f"},
      {"conic", "sum_i w_i f_i; params weights"},
      {"max", "max_i f_i"},
      {"affine", "f(A y + b); params A (dim f rows), b"},
      {"compose", "g(f_1, ..., f_n) for smooth nondecreasing g; params outer = sum | logsumexp | exp | identity"},
      {"positive_power", "max(0, f)^p; params p > 1"},
      {"as_oracle", "serve the hypodifferential through a support oracle"},
      {"with_bound_C", "declare the bound C; params C"},
  };
}

ProblemConfig parse_config(const json& doc, const ParseOptions& opts) {
  std::vector<std::string> errors;
  auto guard = [&](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      errors.insert(errors.end(), e.errors().begin(), e.errors().end());
    }
  };
  if (!doc.is_object()) throw ConfigError({"$: expected a JSON object"});
  check_keys(doc, {"schema", "name", "dimension", "expression", "x0", "box", "known", "constants", "solver", "stop", "verify", "seed"},
             "$", errors);
  if (!doc.contains("schema") || doc.at("schema") != kSchema)
    errors.push_back(std::string("$.schema: expected \"") + kSchema + "\"");

  ProblemConfig cfg;
  cfg.name = doc.value("name", std::string("problem"));
  long dim = -1;
  guard([&] {
    if (!doc.contains("dimension")) fail("$.dimension", "required");
    dim = get_int(doc.at("dimension"), "$.dimension");
    if (dim < 1) fail("$.dimension", "must be >= 1");
  });
  guard([&] {
    if (!doc.contains("expression")) fail("$.expression", "required");
    cfg.expression = doc.at("expression");
    cfg.f = build_node(cfg.expression, "$.expression");
    if (dim >= 1 && cfg.f->dim() != dim)
      fail("$.expression", "has dimension " + std::to_string(cfg.f->dim()) + " but $.dimension is " + std::to_string(dim));
  });
  if (!errors.empty()) throw ConfigError(errors);
  const Eigen::Index d = dim;

  guard([&] {
    cfg.box = doc.contains("box") ? get_box(doc.at("box"), d, "$.box") : BoxConstraint::whole(d);
  });
  guard([&] {
    if (!doc.contains("known")) return;
    const json& k = doc.at("known");
    check_keys(k, {"f_star", "x_star"}, "$.known", errors);
    if (k.contains("f_star")) cfg.f_star = get_number(k.at("f_star"), "$.known.f_star");
    if (k.contains("x_star")) {
      cfg.x_star = get_vec(k.at("x_star"), "$.known.x_star");
      if (cfg.x_star->size() != d) fail("$.known.x_star", "length " + std::to_string(cfg.x_star->size()) + ", expected " + std::to_string(d));
    }
  });
  guard([&] {
    if (!doc.contains("constants")) return;
    const json& c = doc.at("constants");
    check_keys(c, {"L", "K", "C", "R", "epsilon"}, "$.constants", errors);
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!c.contains(key)) return std::nullopt;
      const double v = get_number(c.at(key), std::string("$.constants.") + key);
      if (!(v >= 0.0)) fail(std::string("$.constants.") + key, "must be nonnegative");
      return v;
    };
    cfg.constants.lip_l = opt("L");
    cfg.constants.lip_k = opt("K");
    cfg.constants.bound_c = opt("C");
    cfg.constants.radius = opt("R");
    if (auto e = opt("epsilon")) {
      if (!(*e > 0.0)) fail("$.constants.epsilon", "must be positive");
      cfg.constants.epsilon = *e;
    }
  });
  // declared constants override the propagated metadata
  if (cfg.f && (cfg.constants.lip_l || cfg.constants.lip_k || cfg.constants.bound_c)) {
    HypoMeta m = cfg.f->meta();
    if (cfg.constants.lip_l) m.lip_approx_L = cfg.constants.lip_l;
    if (cfg.constants.lip_k) m.lip_map_K = cfg.constants.lip_k;
    if (cfg.constants.bound_c) m.bound_C = cfg.constants.bound_c;
    cfg.f = cfg.f->with_meta(m);
  }

  cfg.solver.tol_sub = opts.default_tol.value_or(1e-10);
  guard([&] {
    if (!doc.contains("solver")) return;
    const json& s = doc.at("solver");
    check_keys(s, {"method", "params"}, "$.solver", errors);
    if (!s.contains("method") || !s.at("method").is_string()) fail("$.solver.method", "required string");
    cfg.solver.method = s.at("method").get<std::string>();
    static const std::set<std::string> methods{"mhd_constant", "mhd_exact_step", "mhd_line_search", "phd", "aphd"};
    if (!methods.count(cfg.solver.method))
      fail("$.solver.method", "unknown method '" + cfg.solver.method + "' (mhd_constant, mhd_exact_step, mhd_line_search, phd, aphd)");
    const json p = s.value("params", json::object());
    check_keys(p, {"alpha", "alpha0", "gamma", "tol_sub", "tol_ls"}, "$.solver.params", errors);
    if (p.contains("alpha")) cfg.solver.alpha = get_number(p.at("alpha"), "$.solver.params.alpha");
    if (p.contains("alpha0")) cfg.solver.alpha0 = get_number(p.at("alpha0"), "$.solver.params.alpha0");
    if (p.contains("gamma")) cfg.solver.gamma = get_number(p.at("gamma"), "$.solver.params.gamma");
    if (p.contains("tol_sub")) cfg.solver.tol_sub = get_number(p.at("tol_sub"), "$.solver.params.tol_sub");
    if (p.contains("tol_ls")) cfg.solver.tol_ls = get_number(p.at("tol_ls"), "$.solver.params.tol_ls");
  });
  guard([&] {
    if (!doc.contains("stop")) return;
    const json& s = doc.at("stop");
    check_keys(s, {"eps_value", "eps_dist", "max_iters"}, "$.stop", errors);
    if (s.contains("eps_value")) cfg.stop.eps_value = get_number(s.at("eps_value"), "$.stop.eps_value");
    if (s.contains("eps_dist")) cfg.stop.eps_dist = get_number(s.at("eps_dist"), "$.stop.eps_dist");
    if (s.contains("max_iters")) cfg.stop.max_iters = get_int(s.at("max_iters"), "$.stop.max_iters");
    if (cfg.stop.max_iters < 0) fail("$.stop.max_iters", "must be >= 0");
    if (cfg.stop.eps_value && !(*cfg.stop.eps_value > 0)) fail("$.stop.eps_value", "must be positive");
    if (cfg.stop.eps_dist && !(*cfg.stop.eps_dist > 0)) fail("$.stop.eps_dist", "must be positive");
  });
  guard([&] {
    if (!doc.contains("verify")) return;
    const json& v = doc.at("verify");
    check_keys(v, {"domain", "samples", "checks"}, "$.verify", errors);
    if (v.contains("domain")) {
      cfg.verify.domain = get_box(v.at("domain"), d, "$.verify.domain");
      if (!cfg.verify.domain->lower.allFinite() || !cfg.verify.domain->upper.allFinite())
        fail("$.verify.domain", "must be bounded");
    }
    if (v.contains("samples")) cfg.verify.samples = get_int(v.at("samples"), "$.verify.samples");
    if (cfg.verify.samples < 1) fail("$.verify.samples", "must be positive");
    if (v.contains("checks")) {
      static const std::set<std::string> known{"fd", "consistency", "lip_approx", "lip_map", "optimality"};
      for (std::size_t i = 0; i < v.at("checks").size(); ++i) {
        const json& c = v.at("checks")[i];
        if (!c.is_string() || !known.count(c.get<std::string>()))
          fail("$.verify.checks[" + std::to_string(i) + "]", "unknown check (fd, consistency, lip_approx, lip_map, optimality)");
        cfg.verify.checks.push_back(c.get<std::string>());
      }
    }
  });
  guard([&] {
    if (doc.contains("seed")) {
      const json& s = doc.at("seed");
      if (!s.is_number_unsigned()) fail("$.seed", "expected a nonnegative integer");
      cfg.seed = s.get<std::uint64_t>();
    }
  });
  if (opts.seed) cfg.seed = *opts.seed;

  // cross-field requirements of the chosen solver
  const std::string& method = cfg.solver.method;
  if (!method.empty() && errors.empty()) {
    const HypoMeta& m = cfg.f->meta();
    guard([&] {
      if (!doc.contains("x0")) fail("$.x0", "required when a solver is configured");
      cfg.x0 = get_vec(doc.at("x0"), "$.x0");
      if (cfg.x0.size() != d) fail("$.x0", "length " + std::to_string(cfg.x0.size()) + ", expected " + std::to_string(d));
      if ((method == "phd" || method == "aphd") && !cfg.box.contains(cfg.x0)) fail("$.x0", "not inside $.box");
      if (method != "phd" && method != "aphd" && !cfg.box.is_whole())
        fail("$.box", "descent method '" + method + "' is unconstrained; use phd or aphd with a box");
    });
    guard([&] {
      const double t = cfg.solver.tol_sub;
      if (!(t > 0.0)) fail("$.solver.params.tol_sub", "must be positive");
      if (cfg.stop.eps_value && t > *cfg.stop.eps_value / 100.0) fail("$.solver.params.tol_sub", "must be <= stop.eps_value / 100");
      if (cfg.stop.eps_dist && t > *cfg.stop.eps_dist / 100.0) fail("$.solver.params.tol_sub", "must be <= stop.eps_dist / 100");
    });
    guard([&] {
      if (method == "mhd_constant") {
        if (!cfg.solver.alpha) fail("$.solver.params.alpha", "required for mhd_constant");
        if (!m.lip_approx_L) fail("$.constants.L", "required for mhd_constant (not derivable from the expression)");
        const double a = *cfg.solver.alpha, l = *m.lip_approx_L;
        if (!(a > 0.0)) fail("$.solver.params.alpha", "must be positive");
        if (l > 0.0 && a >= 2.0 / l) fail("$.solver.params.alpha", "alpha >= 2/L (alpha = " + num(a) + ", L = " + num(l) + ")");
        const double cap = mhd_step_cap(m, cfg.constants.epsilon);
        if (a >= cap) fail("$.solver.params.alpha", "alpha >= min{2/L, min{1, eps}/C} = " + num(cap));
        if (!m.consistent) fail("$.expression", "mhd_constant needs a consistent hypodifferential");
      } else if (method == "mhd_exact_step") {
        if (!m.exact) fail("$.expression", "mhd_exact_step needs an exact hypodifferential");
      } else if (method == "mhd_line_search") {
        if (!m.consistent) fail("$.expression", "mhd_line_search needs a consistent hypodifferential");
      } else if (method == "phd") {
        if (!cfg.solver.gamma && !m.lip_approx_L) fail("$.solver.params.gamma", "required when L is unknown");
        if (!m.consistent) fail("$.expression", "phd needs a consistent hypodifferential");
        const double g = cfg.solver.gamma.value_or(m.lip_approx_L.value_or(0.0));
        if (!(g > 0.0)) fail("$.solver.params.gamma", "must be positive");
        const double a = cfg.solver.alpha.value_or(1.0);
        if (!(a > 0.0 && a <= 1.0)) fail("$.solver.params.alpha", "must be in (0, 1]");
      } else if (method == "aphd") {
        if (!m.lip_approx_L || !(*m.lip_approx_L > 0.0)) fail("$.constants.L", "aphd requires L > 0");
        if (!(cfg.solver.alpha0 > 0.0 && cfg.solver.alpha0 < 1.0)) fail("$.solver.params.alpha0", "must be in (0, 1)");
        if (!m.consistent) fail("$.expression", "aphd needs a consistent hypodifferential");
      }
    });
  }
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

ProblemConfig parse_config_file(const std::string& path, const ParseOptions& opts) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({path + ": malformed JSON: " + e.what()});
  }
  ProblemConfig cfg = parse_config(doc, opts);
  cfg.source = path;
  return cfg;
}

json report_json(const verify::CheckReport& r) {
  json j;
  j["name"] = r.name;
  j["passed"] = r.passed;
  j["worst_violation"] = r.worst_violation;
  j["tolerance"] = r.tolerance;
  j["samples"] = r.samples;
  j["witness"] = vec_json(r.witness);
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

std::string trace_csv(const SolverTrace& tr, std::optional<double> f_star, bool timings) {
  std::string out = "k,f,gap_to_fstar,dist0,alpha,subproblem_iters,wall_ms\n";
  for (const TraceRow& r : tr.rows) {
    out += std::to_string(r.k) + "," + num(r.f) + "," + (f_star ? num(r.f - *f_star) : "nan") + "," + num(r.dist0) + "," +
           num(r.alpha) + "," + std::to_string(r.subproblem_iters) + "," + num(timings ? r.wall_ms : 0.0) + "\n";
  }
  return out;
}

SolverTrace parse_trace_csv(const std::string& csv, const std::string& method) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw InputError("trace: empty file");
  std::vector<std::string> head;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) head.push_back(cell);
  }
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return i;
    throw InputError("trace: missing column '" + name + "'");
  };
  const std::size_t ck = col("k"), cf = col("f"), cd = col("dist0"), ca = col("alpha"), cs = col("subproblem_iters");
  SolverTrace tr;
  tr.method = method;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != head.size()) throw InputError("trace: line " + std::to_string(lineno) + " has the wrong number of cells");
    try {
      TraceRow r;
      r.k = std::stol(cells[ck]);
      r.f = std::stod(cells[cf]);
      r.dist0 = std::stod(cells[cd]);
      r.alpha = std::stod(cells[ca]);
      r.subproblem_iters = std::stol(cells[cs]);
      tr.rows.push_back(r);
    } catch (const std::logic_error&) {
      throw InputError("trace: unparsable number on line " + std::to_string(lineno));
    }
  }
  if (tr.rows.empty()) throw InputError("trace: no rows");
  tr.f_final = tr.rows.back().f;
  return tr;
}

RunOutput solve(const ProblemConfig& cfg, const RunOptions& opts) {
  RunOutput out;
  json& s = out.summary;
  s["name"] = cfg.name;
  s["method"] = cfg.solver.method;
  if (cfg.solver.method.empty()) {
    s["error"] = "no solver configured";
    out.exit_code = kConfigError;
    return out;
  }
  const HypoFunction& f = *cfg.f;
  const std::string& method = cfg.solver.method;
  SolverTrace tr;
  try {
    DescentOptions dopt;
    dopt.tol_sub = cfg.solver.tol_sub;
    dopt.tol_ls = cfg.solver.tol_ls;
    dopt.epsilon = cfg.constants.epsilon;
    if (method == "mhd_constant") tr = mhd_constant(f, cfg.x0, *cfg.solver.alpha, cfg.stop, dopt);
    else if (method == "mhd_exact_step") tr = mhd_exact_step(f, cfg.x0, cfg.stop, dopt);
    else if (method == "mhd_line_search") tr = mhd_line_search(f, cfg.x0, cfg.stop, dopt);
    else if (method == "phd")
      tr = phd(f, cfg.x0, cfg.solver.gamma.value_or(f.meta().lip_approx_L.value_or(0.0)),
               constant_steps(cfg.solver.alpha.value_or(1.0)), cfg.box, cfg.stop, cfg.solver.tol_sub);
    else tr = aphd(f, cfg.x0, cfg.solver.alpha0, cfg.box, cfg.stop, cfg.solver.tol_sub);
  } catch (const InputError& e) {
    s["error"] = e.what();
    out.exit_code = kConfigError;
    return out;
  } catch (const std::exception& e) {
    s["error"] = e.what();
    out.exit_code = kSolverFailure;
    return out;
  }
  out.csv = trace_csv(tr, cfg.f_star, opts.timings);
  s["stop_reason"] = tr.stop_reason;
  s["iterations"] = static_cast<long>(tr.rows.size()) - 1;
  s["x_final"] = vec_json(tr.x_final);
  s["f_final"] = tr.f_final;
  if (cfg.f_star) {
    s["f_star"] = *cfg.f_star;
    s["gap_final"] = tr.f_final - *cfg.f_star;
  }
  const bool descent = needs_radius(method);
  if (tr.stop_reason == "dist0" && descent && tr.rows.back().dist0 <= 1e-12) s["outcome"] = "finite termination";
  else if (tr.stop_reason == "max_iters") s["outcome"] = "iteration limit";
  else s["outcome"] = "converged";
  if (method == "aphd") {
    s["gamma0"] = tr.gamma0;
    s["L"] = tr.lip_L;
  }
  if (opts.timings) {
    double total = 0.0;
    for (const TraceRow& r : tr.rows) total += r.wall_ms;
    s["wall_ms"] = total;
  }
  if (!certify_trace(cfg, tr, s)) out.exit_code = kCertificationFailure;
  return out;
}

RunOutput verify(const ProblemConfig& cfg) {
  RunOutput out;
  json& s = out.summary;
  s["name"] = cfg.name;
  const HypoFunction& f = *cfg.f;
  const BoxConstraint dom = cfg.verify.domain.value_or(
      BoxConstraint::make(Vec::Constant(f.dim(), -5.0), Vec::Constant(f.dim(), 5.0)));
  const verify::SampleOptions so{cfg.verify.samples, cfg.seed};
  auto wanted = [&](const char* name) {
    return cfg.verify.checks.empty() ||
           std::find(cfg.verify.checks.begin(), cfg.verify.checks.end(), name) != cfg.verify.checks.end();
  };
  const HypoMeta& m = f.meta();
  json checks = json::array();
  std::vector<std::string> skipped;
  bool ok = true;
  auto add = [&](const verify::CheckReport& r) {
    checks.push_back(report_json(r));
    ok = ok && r.passed;
  };
  try {
    if (wanted("fd")) add(verify::fd_check(f, dom, so));
    if (wanted("consistency")) {
      if (m.consistent) add(verify::consistency_check(f, dom, so));
      else skipped.push_back("consistency: map not flagged consistent");
    }
    if (wanted("lip_approx")) {
      if (m.lip_approx_L) add(verify::lip_approx_check(f, dom, *m.lip_approx_L, so));
      else skipped.push_back("lip_approx: no L declared");
    }
    if (wanted("lip_map")) {
      if (m.lip_map_K) add(verify::lip_map_check(f, dom, *m.lip_map_K, so));
      else skipped.push_back("lip_map: no K declared");
    }
    if (wanted("optimality")) {
      if (cfg.x_star) add(verify::optimality_check(f, *cfg.x_star));
      else skipped.push_back("optimality: no x_star");
    }
  } catch (const std::exception& e) {
    s["error"] = e.what();
    out.exit_code = kSolverFailure;
    return out;
  }
  s["checks"] = checks;
  if (!skipped.empty()) s["skipped"] = skipped;
  s["passed"] = ok;
  out.exit_code = ok ? kOk : kCertificationFailure;
  return out;
}

RunOutput certify(const ProblemConfig& cfg, const std::string& csv) {
  RunOutput out;
  json& s = out.summary;
  s["name"] = cfg.name;
  s["method"] = cfg.solver.method;
  if (cfg.solver.method.empty()) {
    s["error"] = "no solver configured";
    out.exit_code = kConfigError;
    return out;
  }
  SolverTrace tr;
  try {
    tr = parse_trace_csv(csv, cfg.solver.method);
  } catch (const InputError& e) {
    s["error"] = e.what();
    out.exit_code = kConfigError;
    return out;
  }
  tr.rows.front().x = cfg.x0;
  if (cfg.solver.method == "aphd") {
    tr.lip_L = *cfg.f->meta().lip_approx_L;
    tr.gamma0 = tr.lip_L * cfg.solver.alpha0 * cfg.solver.alpha0;
  }
  tr.stop_reason = "";  // not recorded in the CSV
  tr.x_final = Vec();
  s["rows"] = tr.rows.size();
  if (!certify_trace(cfg, tr, s)) out.exit_code = kCertificationFailure;
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

}  // namespace hypodiff::cli
