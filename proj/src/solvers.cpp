#include "hypodiff/solvers.hpp"

#include <chrono>
#include <cmath>

namespace hypodiff {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void check_stop_rule(const StopRule& stop, double tol_sub) {
  if (stop.max_iters < 0) throw InputError("StopRule: max_iters must be >= 0");
  if (stop.eps_value && !(*stop.eps_value > 0.0)) throw InputError("StopRule: eps_value must be positive");
  if (stop.eps_dist && !(*stop.eps_dist > 0.0)) throw InputError("StopRule: eps_dist must be positive");
  if (!(tol_sub > 0.0)) throw InputError("solver: tol_sub must be positive");
  // subproblems must be solved well below the stopping thresholds
  if (stop.eps_value && tol_sub > *stop.eps_value / 100.0)
    throw InputError("solver: tol_sub must be <= eps_value / 100");
  if (stop.eps_dist && tol_sub > *stop.eps_dist / 100.0) throw InputError("solver: tol_sub must be <= eps_dist / 100");
}

// Returns the stop reason if the freshly recorded last row triggers one.
std::optional<std::string> should_stop(const SolverTrace& tr, const StopRule& stop) {
  const TraceRow& r = tr.rows.back();
  if (stop.eps_dist && r.dist0 <= *stop.eps_dist) return "dist0";
  if (stop.eps_value && tr.rows.size() >= 2 && std::abs(r.f - tr.rows[tr.rows.size() - 2].f) <= *stop.eps_value)
    return "value_change";
  if (r.k >= stop.max_iters) return "max_iters";
  return std::nullopt;
}

void guard_monotone(const char* method, double f_prev, double f_next, double tol_sub, long k) {
  const double slack = 100.0 * tol_sub;
  if (f_next > f_prev + 10.0 * slack * (1.0 + std::abs(f_prev))) {
    throw MetadataError(std::string(method) + ": objective increased from " + std::to_string(f_prev) + " to " +
                        std::to_string(f_next) + " at iteration " + std::to_string(k) +
                        "; the declared L or exactness flag is wrong");
  }
}

void finish(SolverTrace& tr, std::string reason) {
  tr.stop_reason = std::move(reason);
  tr.x_final = tr.rows.back().x;
  tr.f_final = tr.rows.back().f;
}

// Shared loop of the three descent variants; `step` maps the min-norm element
// to a step length.
template <class StepRule>
SolverTrace descent_loop(const char* method, const HypoFunction& f, const Vec& x0, const StopRule& stop,
                         const DescentOptions& opts, StepRule step) {
  require_dim(x0.size(), f.dim(), method);
  require_finite(x0, method);
  check_stop_rule(stop, opts.tol_sub);
  SolverTrace tr;
  tr.method = method;
  Vec x = x0;
  double fx = f.value(x);
  for (long k = 0;; ++k) {
    const auto t0 = Clock::now();
    const MinNormHypoResult mn = min_norm_hypo(f.hypo(x), opts.tol_sub);
    TraceRow row;
    row.k = k;
    row.x = x;
    row.f = fx;
    row.dist0 = mn.element.norm();
    row.subproblem_iters = mn.iterations;
    tr.rows.push_back(row);
    if (auto reason = should_stop(tr, stop)) {
      tr.rows.back().wall_ms = elapsed_ms(t0);
      finish(tr, *reason);
      return tr;
    }
    const double alpha = step(mn.element, x, k);
    const Vec next = x - alpha * mn.element.v;
    const double fnext = f.value(next);
    guard_monotone(method, fx, fnext, opts.tol_sub, k);
    tr.rows.back().alpha = alpha;
    tr.rows.back().wall_ms = elapsed_ms(t0);
    x = next;
    fx = fnext;
  }
}

}  // namespace

double mhd_step_cap(const HypoMeta& meta, double epsilon) {
  double cap = std::numeric_limits<double>::infinity();
  if (meta.lip_approx_L && *meta.lip_approx_L > 0.0) cap = 2.0 / *meta.lip_approx_L;
  if (meta.bound_C && *meta.bound_C > 0.0) cap = std::min(cap, std::min(1.0, epsilon) / *meta.bound_C);
  return cap;
}

SolverTrace mhd_constant(const HypoFunction& f, const Vec& x0, double alpha, const StopRule& stop,
                         const DescentOptions& opts) {
  if (!f.meta().consistent) throw InputError("mhd_constant: hypodifferential must be consistent");
  if (!f.meta().lip_approx_L) throw InputError("mhd_constant: requires the approximation constant L");
  if (!(alpha > 0.0)) throw InputError("mhd_constant: alpha must be positive");
  if (!(opts.epsilon > 0.0)) throw InputError("mhd_constant: epsilon must be positive");
  const double l = *f.meta().lip_approx_L;
  if (l > 0.0 && alpha >= 2.0 / l) {
    throw InputError("mhd_constant: alpha >= 2/L (alpha = " + std::to_string(alpha) + ", L = " + std::to_string(l) + ")");
  }
  const double cap = mhd_step_cap(f.meta(), opts.epsilon);
  if (alpha >= cap) {
    throw InputError("mhd_constant: alpha >= min{2/L, min{1, eps}/C} = " + std::to_string(cap));
  }
  return descent_loop("mhd_constant", f, x0, stop, opts, [alpha](const HypoElement&, const Vec&, long) { return alpha; });
}

SolverTrace mhd_exact_step(const HypoFunction& f, const Vec& x0, const StopRule& stop, const DescentOptions& opts) {
  if (!f.meta().exact) throw InputError("mhd_exact_step: hypodifferential must be exact");
  return descent_loop("mhd_exact_step", f, x0, stop, opts, [](const HypoElement& e, const Vec&, long k) {
    if (e.a < -1e-12) return 1.0 / std::abs(e.a);
    if (e.v.norm() > 1e-8) {
      throw MetadataError("mhd_exact_step: min-norm element has a = 0 but |v| = " + std::to_string(e.v.norm()) +
                          " at iteration " + std::to_string(k) + "; the hypodifferential is not exact here");
    }
    return 1.0;
  });
}

SolverTrace mhd_line_search(const HypoFunction& f, const Vec& x0, const StopRule& stop, const DescentOptions& opts) {
  if (!f.meta().consistent) throw InputError("mhd_line_search: hypodifferential must be consistent");
  if (!(opts.tol_ls > 0.0)) throw InputError("mhd_line_search: tol_ls must be positive");
  return descent_loop("mhd_line_search", f, x0, stop, opts, [&f, &opts](const HypoElement& e, const Vec& x, long) {
    auto phi = [&](double t) { return f.value(x - t * e.v); };
    const double f0 = phi(0.0);
    const double guess = e.a < -1e-12 ? 1.0 / std::abs(e.a) : 1.0;
    if (e.v.norm() == 0.0) return guess;
    double lo = 0.0, mid = guess, hi = guess;
    double fmid = phi(mid);
    if (fmid >= f0) {
      // minimum lies in [0, guess]
      hi = guess;
      mid = 0.5 * guess;
      fmid = phi(mid);
    } else {
      hi = 2.0 * mid;
      double fhi = phi(hi);
      while (fhi < fmid) {
        lo = mid;
        mid = hi;
        fmid = fhi;
        hi *= 2.0;
        if (hi > 1e12) throw DivergenceError("mhd_line_search: bracket exceeded 1e12; f may be unbounded below");
        fhi = phi(hi);
      }
    }
    // golden section on [lo, hi]
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = phi(c), fd = phi(d);
    while (b - a > opts.tol_ls * (1.0 + a)) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - r * (b - a);
        fc = phi(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + r * (b - a);
        fd = phi(d);
      }
    }
    double best = fc <= fd ? c : d;
    double fbest = std::min(fc, fd);
    for (double t : {guess, mid}) {
      const double ft = phi(t);
      if (ft < fbest) {
        fbest = ft;
        best = t;
      }
    }
    return best;
  });
}

StepSchedule constant_steps(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("constant_steps: alpha must be in (0, 1]");
  return [alpha](long) { return alpha; };
}

SolverTrace phd(const HypoFunction& f, const Vec& x0, double gamma, const StepSchedule& steps, const BoxConstraint& q,
                const StopRule& stop, double tol_sub) {
  require_dim(x0.size(), f.dim(), "phd");
  require_finite(x0, "phd");
  check_stop_rule(stop, tol_sub);
  if (!f.meta().consistent) throw InputError("phd: hypodifferential must be consistent");
  if (!(gamma > 0.0)) throw InputError("phd: gamma must be positive");
  if (!q.contains(x0)) throw InputError("phd: x0 is not in Q");
  if (!steps) throw InputError("phd: no step schedule");
  SolverTrace tr;
  tr.method = "phd";
  Vec x = x0;
  double fx = f.value(x);
  ProximalOptions po;
  po.tol = tol_sub;
  for (long k = 0;; ++k) {
    const auto t0 = Clock::now();
    const ProximalSolution s = proximal_step(f, x, gamma, q, po);
    TraceRow row;
    row.k = k;
    row.x = x;
    row.f = fx;
    row.dist0 = (s.z - x).norm();
    row.gamma = gamma;
    row.subproblem_iters = s.iterations;
    tr.rows.push_back(row);
    if (auto reason = should_stop(tr, stop)) {
      tr.rows.back().wall_ms = elapsed_ms(t0);
      finish(tr, *reason);
      return tr;
    }
    const double alpha = steps(k);
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("phd: step " + std::to_string(k) + " outside (0, 1]");
    // keep the iterate inside the box despite rounding of the convex combination
    const Vec next = q.clamp(x + alpha * (s.z - x));
    const double fnext = f.value(next);
    guard_monotone("phd", fx, fnext, tol_sub, k);
    tr.rows.back().alpha = alpha;
    tr.rows.back().wall_ms = elapsed_ms(t0);
    x = next;
    fx = fnext;
  }
}

double alpha_recurrence(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha_recurrence: alpha must be in (0, 1)");
  const double a2 = alpha * alpha;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (mid * mid - (1.0 - mid) * a2 > 0.0) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

SolverTrace aphd(const HypoFunction& f, const Vec& x0, double alpha0, const BoxConstraint& q, const StopRule& stop,
                 double tol_sub) {
  require_dim(x0.size(), f.dim(), "aphd");
  require_finite(x0, "aphd");
  check_stop_rule(stop, tol_sub);
  if (!f.meta().consistent) throw InputError("aphd: hypodifferential must be consistent");
  if (!f.meta().lip_approx_L) throw InputError("aphd: requires the approximation constant L");
  const double l = *f.meta().lip_approx_L;
  if (!(l > 0.0)) throw InputError("aphd: requires L > 0");
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw InputError("aphd: alpha0 must be in (0, 1)");
  if (!q.contains(x0)) throw InputError("aphd: x0 is not in Q");

  SolverTrace tr;
  tr.method = "aphd";
  tr.lip_L = l;
  tr.gamma0 = l * alpha0 * alpha0;
  ProximalOptions po;
  po.tol = tol_sub;
  po.require_inside = false;

  Vec x = x0, y = x0;
  double fx = f.value(x);
  double alpha = alpha0, gamma = tr.gamma0;
  double residual = 0.0;
  for (long k = 0;; ++k) {
    const auto t0 = Clock::now();
    const ProximalSolution s = proximal_step(f.hypo(y), y, l, q, po);
    TraceRow row;
    row.k = k;
    row.x = x;
    row.f = fx;
    row.dist0 = (s.z - y).norm();
    row.gamma = gamma;
    row.alpha_residual = k == 0 ? 0.0 : residual;
    row.subproblem_iters = s.iterations;
    tr.rows.push_back(row);
    if (auto reason = should_stop(tr, stop)) {
      tr.rows.back().wall_ms = elapsed_ms(t0);
      finish(tr, *reason);
      if (*reason == "dist0") {
        // the proximal point at y_k is the next iterate; report it if better
        const double fz = f.value(s.z);
        if (fz < tr.f_final) {
          tr.x_final = s.z;
          tr.f_final = fz;
        }
      }
      return tr;
    }
    tr.rows.back().alpha = alpha;
    const Vec x_next = s.z;
    const double a_next = alpha_recurrence(alpha);
    residual = std::abs(a_next * a_next - (1.0 - a_next) * alpha * alpha);
    y = x_next + (a_next * (1.0 - alpha) / alpha) * (x_next - x);
    gamma = l * alpha * alpha;  // gamma_{k+1}
    x = x_next;
    fx = f.value(x);
    alpha = a_next;
    tr.rows.back().wall_ms = elapsed_ms(t0);
  }
}

}  // namespace hypodiff
