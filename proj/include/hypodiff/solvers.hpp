#pragma once

// Hypodifferential descent (constant, exact and line-search steps), proximal
// hypodifferential descent and its accelerated variant.

#include "hypodiff/subproblems.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hypodiff {

struct StopRule {
  std::optional<double> eps_value;  // |f(x_k) - f(x_{k-1})| <= eps_value
  std::optional<double> eps_dist;   // dist0 <= eps_dist
  long max_iters = 1000;
};

struct TraceRow {
  long k = 0;
  Vec x;
  double f = 0.0;
  double dist0 = 0.0;  // |(a_k, v_k)| for descent, |z - x| (or |z - y|) for proximal methods
  double alpha = std::numeric_limits<double>::quiet_NaN();  // step taken from this row; NaN on the last row
  double gamma = std::numeric_limits<double>::quiet_NaN();  // proximal parameter, accelerated method only
  double alpha_residual = std::numeric_limits<double>::quiet_NaN();  // |α_{k}^2 - (1-α_{k})α_{k-1}^2|
  long subproblem_iters = 0;
  double wall_ms = 0.0;
};

struct SolverTrace {
  std::string method;
  std::vector<TraceRow> rows;
  std::string stop_reason;  // "dist0", "value_change" or "max_iters"
  Vec x_final;
  double f_final = 0.0;
  // accelerated method only
  double gamma0 = std::numeric_limits<double>::quiet_NaN();
  double lip_L = std::numeric_limits<double>::quiet_NaN();
};

struct DescentOptions {
  double tol_sub = 1e-10;
  double epsilon = 1.0;   // inflation radius entering the constant-step cap
  double tol_ls = 1e-10;  // line-search interval tolerance
};

/// Largest admissible constant step: min{2/L, min{1, eps}/C} (C term only when known).
double mhd_step_cap(const HypoMeta& meta, double epsilon);

SolverTrace mhd_constant(const HypoFunction& f, const Vec& x0, double alpha, const StopRule& stop,
                         const DescentOptions& opts = {});
SolverTrace mhd_exact_step(const HypoFunction& f, const Vec& x0, const StopRule& stop, const DescentOptions& opts = {});
SolverTrace mhd_line_search(const HypoFunction& f, const Vec& x0, const StopRule& stop,
                            const DescentOptions& opts = {});

using StepSchedule = std::function<double(long k)>;
StepSchedule constant_steps(double alpha);

SolverTrace phd(const HypoFunction& f, const Vec& x0, double gamma, const StepSchedule& steps, const BoxConstraint& q,
                const StopRule& stop, double tol_sub = 1e-10);

SolverTrace aphd(const HypoFunction& f, const Vec& x0, double alpha0, const BoxConstraint& q, const StopRule& stop,
                 double tol_sub = 1e-10);

/// Root in (0,1) of t^2 = (1 - t) alpha^2, by bisection to 1e-14.
double alpha_recurrence(double alpha);

}  // namespace hypodiff
