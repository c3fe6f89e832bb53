#include "hypodiff/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hypodiff::verify {

namespace {

void record(CheckReport& r, double violation, const Vec& at) {
  if (violation > r.worst_violation || r.witness.size() == 0) {
    r.worst_violation = std::max(r.worst_violation, violation);
    r.witness = at;
  }
}

void close(CheckReport& r) {
  if (!std::isfinite(r.worst_violation) && r.worst_violation < 0.0) r.worst_violation = 0.0;
  r.passed = r.worst_violation <= r.tolerance;
}

Vec stack(const Vec& x, const Vec& y) {
  Vec s(x.size() + y.size());
  s << x, y;
  return s;
}

void require_bounded(const BoxConstraint& box, const char* who) {
  if (!box.lower.allFinite() || !box.upper.allFinite()) throw InputError(std::string(who) + ": sampling box must be bounded");
}

Vec random_unit(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vec u(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) u(i) = n01(rng);
  } while (u.norm() == 0.0);
  return u / u.norm();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Polytope used for Hausdorff distances: vertex lists as they are, oracles
// through the support points at the mesh weights plus the seed.
geometry::Polytope as_polytope(const Hypodifferential& h, const std::vector<Vec>& mesh) {
  if (h.is_polytope()) return h.as_polytope().vertices;
  std::vector<Vec> pts{h.as_oracle().seed.stacked()};
  const geometry::Polytope inner = to_polytope(h, mesh);
  for (Eigen::Index j = 0; j < inner.size(); ++j) pts.push_back(inner.vertex(j));
  return geometry::Polytope(pts);
}

using PairSource = std::function<std::pair<Vec, Vec>(std::mt19937_64&)>;

CheckReport lip_map_impl(const HypoFunction& f, const PairSource& pairs, double lip_k, const SampleOptions& opts,
                         const MeshOptions& mesh) {
  if (!(lip_k >= 0.0)) throw InputError("lip_map_check: K must be nonnegative");
  CheckReport r;
  r.name = "lip_map";
  r.tolerance = 0.0;
  std::mt19937_64 rng(opts.seed);
  const std::vector<Vec> coarse = direction_mesh(f.dim(), mesh.coarse, opts.seed + 1);
  const std::vector<Vec> fine = direction_mesh(f.dim(), mesh.fine, opts.seed + 2);
  bool used_oracle = false;
  double worst_slack = 0.0, worst_majorant = -std::numeric_limits<double>::infinity();
  for (long s = 0; s < opts.samples; ++s) {
    const auto [x, y] = pairs(rng);
    const Hypodifferential hx = f.hypo(x), hy = f.hypo(y);
    const double dist = (x - y).norm();
    double dph, slack = 0.0;
    if (hx.is_polytope() && hy.is_polytope()) {
      dph = geometry::hausdorff_polytope(hx.as_polytope().vertices, hy.as_polytope().vertices);
    } else {
      used_oracle = true;
      const geometry::Polytope px = as_polytope(hx, coarse), py = as_polytope(hy, coarse);
      const geometry::Polytope fx = as_polytope(hx, fine), fy = as_polytope(hy, fine);
      dph = geometry::hausdorff_polytope(px, py);
      slack = geometry::hausdorff_polytope(px, fx) + geometry::hausdorff_polytope(py, fy);
      worst_slack = std::max(worst_slack, slack);
    }
    double violation = dph - lip_k * dist - slack - 1e-10 * (1.0 + dph);
    if (f.meta().consistent) {
      // one-sided consequence of a K-Lipschitz map
      const double fx0 = f.value(x), fy0 = f.value(y);
      const double gap = fy0 - fx0 - model_value(hx, y - x);
      const double m = gap - lip_k * dist * (1.0 + dist) - 1e-10 * (1.0 + std::abs(fx0) + std::abs(fy0));
      worst_majorant = std::max(worst_majorant, m);
      violation = std::max(violation, m);
    }
    record(r, violation, stack(x, y));
    ++r.samples;
  }
  close(r);
  if (used_oracle) {
    r.note = "inner-approximation certificate; mesh slack up to " + fmt(worst_slack);
  }
  if (f.meta().consistent) {
    r.note += std::string(r.note.empty() ? "" : "; ") + "majorant bound worst " + fmt(worst_majorant);
  }
  return r;
}

}  // namespace

Vec sample_box(const BoxConstraint& box, std::mt19937_64& rng) {
  Vec x(box.dim());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::uniform_real_distribution<double> u(box.lower(i), box.upper(i));
    x(i) = box.lower(i) == box.upper(i) ? box.lower(i) : u(rng);
  }
  return x;
}

std::vector<Vec> direction_mesh(Eigen::Index d, int count, std::uint64_t seed) {
  if (count < 1) throw InputError("direction_mesh: count must be positive");
  std::vector<Vec> out;
  if (d == 1) {
    for (int i = 0; i < count; ++i) {
      const double t = 2.0 * M_PI * i / count;
      Vec w(2);
      w << std::cos(t), std::sin(t);
      out.push_back(w);
    }
    return out;
  }
  std::mt19937_64 rng(seed);
  // coordinate directions first so every face normal of a box-like set is hit
  for (Eigen::Index k = 0; k <= d && static_cast<int>(out.size()) < count; ++k) {
    out.push_back(Vec::Unit(d + 1, k));
    if (static_cast<int>(out.size()) < count) out.push_back(-Vec::Unit(d + 1, k));
  }
  while (static_cast<int>(out.size()) < count) out.push_back(random_unit(d + 1, rng));
  return out;
}

std::vector<double> default_alphas() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}; }

CheckReport fd_check(const HypoFunction& f, const Vec& x, const Vec& d, const std::vector<double>& alphas) {
  require_dim(x.size(), f.dim(), "fd_check");
  require_dim(d.size(), f.dim(), "fd_check: direction");
  require_finite(x, "fd_check");
  require_finite(d, "fd_check: direction");
  if (alphas.empty()) throw InputError("fd_check: empty step grid");
  CheckReport r;
  r.name = "fd";
  const double fx = f.value(x);
  const Hypodifferential h = f.hypo(x);
  const double dn2 = d.squaredNorm();
  std::vector<double> raw, scales;
  for (double a : alphas) {
    if (!(a > 0.0)) throw InputError("fd_check: steps must be positive");
    const double fy = f.value(x + a * d);
    raw.push_back(std::abs(fy - fx - model_value(h, a * d)));
    scales.push_back(1.0 + std::abs(fx) + std::abs(fy));
    ++r.samples;
  }
  const Vec wit = stack(x, d);
  if (f.meta().exact) {
    r.tolerance = 1e-12;
    for (std::size_t i = 0; i < raw.size(); ++i) record(r, raw[i] / scales[i], wit);
    r.note = "exact: raw residual relative to scale";
  } else if (f.meta().lip_approx_L) {
    r.tolerance = 1e-12;
    const double l = *f.meta().lip_approx_L;
    for (std::size_t i = 0; i < raw.size(); ++i)
      record(r, (raw[i] - 0.5 * l * alphas[i] * alphas[i] * dn2) / scales[i], wit);
    r.note = "residual against (L/2) alpha^2 |d|^2";
  } else {
    // log-log slope of e(α) = raw/α over the points above the rounding floor
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] > 1e-13 * scales[i]) {
        lx.push_back(std::log(alphas[i]));
        ly.push_back(std::log(raw[i] / alphas[i]));
      }
    }
    r.tolerance = 0.0;
    if (lx.size() < 2) {
      record(r, 0.0, wit);
      r.note = "residual at rounding level";
    } else {
      const double n = static_cast<double>(lx.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
      }
      const double denom = n * sxx - sx * sx;
      const double slope = denom > 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
      record(r, 0.5 - slope, wit);
      r.note = "log-log slope " + fmt(slope);
    }
  }
  close(r);
  return r;
}

CheckReport fd_check(const HypoFunction& f, const BoxConstraint& box, const SampleOptions& opts) {
  require_dim(box.dim(), f.dim(), "fd_check: box");
  require_bounded(box, "fd_check");
  std::mt19937_64 rng(opts.seed);
  CheckReport all;
  all.name = "fd";
  for (long s = 0; s < opts.samples; ++s) {
    const Vec x = sample_box(box, rng);
    const Vec d = random_unit(f.dim(), rng);
    CheckReport one = fd_check(f, x, d);
    all.tolerance = one.tolerance;
    all.samples += one.samples;
    if (one.worst_violation > all.worst_violation || all.witness.size() == 0) {
      all.worst_violation = one.worst_violation;
      all.witness = one.witness;
      all.note = one.note;
    }
  }
  close(all);
  return all;
}

CheckReport consistency_check(const HypoFunction& f, const BoxConstraint& box, const SampleOptions& opts) {
  require_dim(box.dim(), f.dim(), "consistency_check: box");
  require_bounded(box, "consistency_check");
  CheckReport r;
  r.name = "consistency";
  r.tolerance = 1e-10;
  if (!f.meta().consistent) r.note = "map is not flagged consistent";
  std::mt19937_64 rng(opts.seed);
  for (long s = 0; s < opts.samples; ++s) {
    const Vec x = sample_box(box, rng), y = sample_box(box, rng);
    const double fx = f.value(x), fy = f.value(y);
    // the worst vertex of the minorant inequality is the model maximiser
    const double v = model_value(f.hypo(x), y - x) - (fy - fx);
    record(r, v / (1.0 + std::abs(fx) + std::abs(fy)), stack(x, y));
    ++r.samples;
  }
  close(r);
  return r;
}

CheckReport lip_approx_check(const HypoFunction& f, const BoxConstraint& box, double lip_l,
                             const SampleOptions& opts) {
  require_dim(box.dim(), f.dim(), "lip_approx_check: box");
  require_bounded(box, "lip_approx_check");
  if (!(lip_l >= 0.0)) throw InputError("lip_approx_check: L must be nonnegative");
  CheckReport r;
  r.name = "lip_approx";
  r.tolerance = 1e-10;
  std::mt19937_64 rng(opts.seed);
  for (long s = 0; s < opts.samples; ++s) {
    const Vec x = sample_box(box, rng), y = sample_box(box, rng);
    const double fx = f.value(x), fy = f.value(y);
    const double res = std::abs(fy - fx - model_value(f.hypo(x), y - x));
    const double v = res - 0.5 * lip_l * (y - x).squaredNorm();
    record(r, v / (1.0 + std::abs(fx) + std::abs(fy)), stack(x, y));
    ++r.samples;
  }
  close(r);
  return r;
}

CheckReport lip_map_check(const HypoFunction& f, const BoxConstraint& box, double lip_k, const SampleOptions& opts,
                          const MeshOptions& mesh) {
  require_dim(box.dim(), f.dim(), "lip_map_check: box");
  require_bounded(box, "lip_map_check");
  return lip_map_impl(
      f, [&box](std::mt19937_64& rng) { return std::pair<Vec, Vec>(sample_box(box, rng), sample_box(box, rng)); },
      lip_k, opts, mesh);
}

CheckReport lip_map_check(const HypoFunction& f, const std::vector<Vec>& points, double lip_k,
                          const SampleOptions& opts, const MeshOptions& mesh) {
  if (points.size() < 2) throw InputError("lip_map_check: need at least two points");
  for (const Vec& p : points) require_dim(p.size(), f.dim(), "lip_map_check: point");
  return lip_map_impl(
      f,
      [&points](std::mt19937_64& rng) {
        std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
        const std::size_t i = pick(rng);
        std::size_t j = pick(rng);
        if (j == i) j = (i + 1) % points.size();
        return std::pair<Vec, Vec>(points[i], points[j]);
      },
      lip_k, opts, mesh);
}

namespace {

double need(const std::optional<double>& v, const char* what, const std::string& method) {
  if (!v) throw InputError("rate_certify(" + method + "): missing constant " + what);
  return *v;
}

}  // namespace

CheckReport rate_certify(const SolverTrace& trace, const std::string& method, const RateConstants& c) {
  if (trace.rows.empty()) throw InputError("rate_certify: empty trace");
  CheckReport r;
  r.name = "rate:" + method;
  const double f_star = need(c.f_star, "f_star", method);
  const double d0 = trace.rows.front().f - f_star;
  r.tolerance = c.slack_rel * (1.0 + std::abs(d0));
  const std::size_t n = trace.rows.size();
  auto delta = [&](std::size_t k) { return trace.rows[k].f - f_star; };
  auto at = [&](std::size_t k) { return trace.rows[k].x; };

  if (method == "mhd_constant" || (method == "mhd_line_search" && c.alpha)) {
    const double l = need(c.lip_l, "L", method);
    const double rad = need(c.radius, "R", method);
    double alpha = c.alpha ? *c.alpha : trace.rows.front().alpha;
    if (!std::isfinite(alpha)) throw InputError("rate_certify(" + method + "): missing constant alpha");
    const double eta = alpha - 0.5 * l * alpha * alpha;
    if (!(eta > 0.0)) throw InputError("rate_certify: alpha - L alpha^2 / 2 must be positive");
    const double r2 = (1.0 + rad) * (1.0 + rad);
    for (std::size_t k = 0; k < n; ++k) {
      const double bound = d0 * r2 / (r2 + d0 * eta * static_cast<double>(k));
      record(r, delta(k) - bound, at(k));
      record(r, delta(k) - (1.0 + rad) * trace.rows[k].dist0, at(k));
      if (k + 1 < n && method == "mhd_constant") {
        const double dist = trace.rows[k].dist0;
        record(r, trace.rows[k + 1].f - (trace.rows[k].f - eta * dist * dist), at(k));
      }
      ++r.samples;
    }
    r.note = "envelope (1+R)^2 Delta0 / ((1+R)^2 + Delta0 eta k), eta = " + fmt(eta);
  } else if (method == "mhd_exact_step" || method == "mhd_line_search") {
    const double rad = need(c.radius, "R", method);
    const double q = 1.0 - 1.0 / (1.0 + rad);
    for (std::size_t k = 0; k < n; ++k) {
      record(r, delta(k) - d0 * std::pow(q, static_cast<double>(k)), at(k));
      record(r, delta(k) - (1.0 + rad) * trace.rows[k].dist0, at(k));
      if (k + 1 < n) record(r, trace.rows[k].dist0 - (delta(k) - delta(k + 1)), at(k));
      ++r.samples;
    }
    r.note = "envelope Delta0 q^k, q = " + fmt(q);
  } else if (method == "aphd") {
    const double l = c.lip_l ? *c.lip_l : trace.lip_L;
    const double g0 = c.gamma0 ? *c.gamma0 : trace.gamma0;
    if (!std::isfinite(l) || !std::isfinite(g0)) throw InputError("rate_certify(aphd): missing L or gamma0");
    if (!c.x_star) throw InputError("rate_certify(aphd): missing constant x_star");
    require_dim(c.x_star->size(), trace.rows.front().x.size(), "rate_certify: x_star");
    const double start = d0 + 0.5 * g0 * (trace.rows.front().x - *c.x_star).squaredNorm();
    r.tolerance = c.slack_rel * (1.0 + std::abs(start));
    for (std::size_t k = 0; k < n; ++k) {
      const double den = 2.0 * std::sqrt(l) + static_cast<double>(k) * std::sqrt(g0);
      record(r, delta(k) - 4.0 * l / (den * den) * start, at(k));
      ++r.samples;
    }
    r.note = "envelope 4L/(2 sqrt(L) + k sqrt(gamma0))^2 * " + fmt(start);
  } else if (method == "phd") {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      record(r, trace.rows[k + 1].f - trace.rows[k].f, at(k + 1));
      ++r.samples;
    }
    r.note = "monotone values";
  } else {
    throw InputError("rate_certify: unknown method '" + method + "'");
  }
  close(r);
  return r;
}

CheckReport exact_dist_envelope_check(const SolverTrace& trace, const RateConstants& c) {
  if (trace.rows.empty()) throw InputError("exact_dist_envelope_check: empty trace");
  const double f_star = need(c.f_star, "f_star", "exact_dist_envelope");
  const double rad = need(c.radius, "R", "exact_dist_envelope");
  const double q = 1.0 - 1.0 / (1.0 + rad);
  const double d0 = trace.rows.front().f - f_star;
  CheckReport r;
  r.name = "exact_dist_envelope";
  r.tolerance = c.slack_rel * (1.0 + std::abs(d0));
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    record(r, trace.rows[k].dist0 - d0 * (1.0 - q) * std::pow(q, static_cast<double>(k)), trace.rows[k].x);
    ++r.samples;
  }
  close(r);
  r.note = "dist0_k <= Delta0 (1 - q) q^k";
  return r;
}

CheckReport alpha_recurrence_check(const SolverTrace& trace, double tol) {
  CheckReport r;
  r.name = "alpha_recurrence";
  r.tolerance = tol;
  for (std::size_t k = 0; k + 1 < trace.rows.size(); ++k) {
    const double a = trace.rows[k].alpha, b = trace.rows[k + 1].alpha;
    if (!std::isfinite(a) || !std::isfinite(b)) continue;
    record(r, std::abs(b * b - (1.0 - b) * a * a), trace.rows[k + 1].x);
    ++r.samples;
  }
  close(r);
  return r;
}

CheckReport optimality_check(const HypoFunction& f, const Vec& x, double tol) {
  require_dim(x.size(), f.dim(), "optimality_check");
  CheckReport r;
  r.name = "optimality";
  r.tolerance = tol;
  // any iterate of the min-norm solver bounds the distance from above
  double dist;
  try {
    dist = min_norm_hypo(f.hypo(x), 1e-20).element.norm();
  } catch (const ConvergenceError& e) {
    dist = e.last_iterate().norm();
  }
  record(r, dist, x);
  r.samples = 1;
  close(r);
  r.note = "dist(0, hypodifferential) = " + fmt(dist);
  return r;
}

}  // namespace hypodiff::verify
