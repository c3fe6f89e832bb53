#include "hypodiff/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hypodiff {

BoxConstraint BoxConstraint::whole(Eigen::Index d) {
  const double inf = std::numeric_limits<double>::infinity();
  return BoxConstraint{Vec::Constant(d, -inf), Vec::Constant(d, inf)};
}

BoxConstraint BoxConstraint::make(Vec lower, Vec upper) {
  require_dim(upper.size(), lower.size(), "BoxConstraint");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i))) throw InputError("BoxConstraint: NaN bound");
    if (lower(i) == std::numeric_limits<double>::infinity() || upper(i) == -std::numeric_limits<double>::infinity())
      throw InputError("BoxConstraint: lower bound +inf or upper bound -inf");
    if (lower(i) > upper(i)) throw InputError("BoxConstraint: empty box (lower > upper at " + std::to_string(i) + ")");
  }
  return BoxConstraint{std::move(lower), std::move(upper)};
}

bool BoxConstraint::is_whole() const {
  return (lower.array() == -std::numeric_limits<double>::infinity()).all() &&
         (upper.array() == std::numeric_limits<double>::infinity()).all();
}

bool BoxConstraint::contains(const Vec& x, double tol) const {
  require_dim(x.size(), dim(), "BoxConstraint::contains");
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
  return true;
}

Vec BoxConstraint::clamp(const Vec& x) const {
  require_dim(x.size(), dim(), "BoxConstraint::clamp");
  return x.cwiseMax(lower).cwiseMin(upper);
}

namespace {

MinNormHypoResult min_norm_oracle(const Hypodifferential& h, double tol) {
  const Eigen::Index n = h.dim() + 1;
  std::vector<Vec> pts{h.as_oracle().seed.stacked(), h.support(1.0, Vec::Zero(h.dim())).stacked()};
  const long cap = 10000;
  for (long it = 1; it <= cap; ++it) {
    const geometry::Polytope poly(pts);
    const geometry::MinNormResult r = geometry::min_norm_point(poly, 0.1 * tol);
    const Vec& p = r.point;
    const HypoElement s = h.support(-p(0), -p.tail(n - 1));
    const double gap = p.squaredNorm() - p.dot(s.stacked());
    if (gap <= tol) return MinNormHypoResult{HypoElement::from_stacked(p), std::max(gap, 0.0), it};
    // fully corrective: keep only the vertices carrying weight, then add s
    std::vector<Vec> next;
    for (Eigen::Index j = 0; j < poly.size(); ++j)
      if (r.weights.lambda(j) > 0.0) next.push_back(poly.vertex(j));
    next.push_back(s.stacked());
    pts = std::move(next);
    if (it == cap) throw ConvergenceError("min_norm_hypo: iteration cap on oracle hypodifferential", p, gap);
  }
  throw ConvergenceError("min_norm_hypo: unreachable", Vec(), 0.0);
}

// Dual of the proximal subproblem over an explicit vertex set.
struct ProxDual {
  const Mat& v;  // d x m slopes
  const Vec& a;  // m offsets
  const Vec& x;
  double gamma;
  Vec lo, hi;  // bounds on u = z - x

  Vec step_of(const Vec& lam) const {
    const Vec vbar = v * lam;
    return (-vbar / gamma).cwiseMax(lo).cwiseMin(hi);
  }
  // -1 clamped at lower, +1 at upper, 0 free
  std::vector<int> states(const Vec& lam) const {
    const Vec t = -(v * lam) / gamma;
    std::vector<int> s(static_cast<std::size_t>(t.size()), 0);
    for (Eigen::Index j = 0; j < t.size(); ++j) s[static_cast<std::size_t>(j)] = t(j) < lo(j) ? -1 : (t(j) > hi(j) ? 1 : 0);
    return s;
  }
  struct Eval {
    Vec u, grad;
    double primal, dual, gap;
  };
  Eval eval(const Vec& lam) const {
    Eval e;
    e.u = step_of(lam);
    e.grad = a + v.transpose() * e.u;
    const double prox = 0.5 * gamma * e.u.squaredNorm();
    e.primal = e.grad.maxCoeff() + prox;
    e.dual = lam.dot(e.grad) + prox;
    e.gap = e.primal - e.dual;
    return e;
  }
};

ProximalSolution solve_explicit(const Mat& stacked, const Vec& x, double gamma, const BoxConstraint& q,
                                const ProximalOptions& opts) {
  const Eigen::Index m = stacked.cols(), d = x.size();
  const Vec a = stacked.row(0).transpose();
  const Mat v = stacked.bottomRows(d);
  ProxDual dual{v, a, x, gamma, q.lower - x, q.upper - x};

  Vec lam = Vec::Zero(m);
  if (opts.warm_start && opts.warm_start->size() == m && opts.warm_start->allFinite()) {
    lam = geometry::simplex_project(*opts.warm_start).lambda;
  } else {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < m; ++i)
      if (a(i) > a(best)) best = i;
    lam(best) = 1.0;
  }

  long iters = 0;
  const double qp_tol = 0.5 * opts.tol;
  const double inv_sqrt_gamma = 1.0 / std::sqrt(gamma);

  // Fix the clamp pattern of u(lam), solve the resulting simplex QP, repeat
  // until the pattern is reproduced. Returns true once the gap is certified.
  auto active_set_rounds = [&](int rounds) {
    for (int r = 0; r < rounds; ++r) {
      const std::vector<int> st = dual.states(lam);
      std::vector<Eigen::Index> free_rows;
      Vec fixed_u = Vec::Zero(d);
      for (Eigen::Index j = 0; j < d; ++j) {
        const int s = st[static_cast<std::size_t>(j)];
        if (s == 0) free_rows.push_back(j);
        else fixed_u(j) = s < 0 ? dual.lo(j) : dual.hi(j);
      }
      Mat pj(static_cast<Eigen::Index>(free_rows.size()), m);
      for (std::size_t k = 0; k < free_rows.size(); ++k)
        pj.row(static_cast<Eigen::Index>(k)) = v.row(free_rows[k]) * inv_sqrt_gamma;
      const Vec c = -(a + v.transpose() * fixed_u);
      geometry::QpOptions qo;
      qo.tol = qp_tol;
      qo.warm_start = lam;
      const geometry::QpResult res = geometry::simplex_qp_gram(pj, c, qo);
      iters += res.iterations;
      lam = res.weights.lambda;
      if (dual.eval(lam).gap <= opts.tol) return true;
      if (dual.states(lam) == st) return false;  // stable pattern but gap still open
    }
    return false;
  };

  bool done = dual.eval(lam).gap <= opts.tol || active_set_rounds(q.is_whole() ? 1 : 50);
  if (!done) {
    // projected gradient ascent on the dual, retrying the active set now and then
    const double vinf = (v.transpose() * v).cwiseAbs().rowwise().sum().maxCoeff();
    double step = 1.0 / (vinf / gamma + a.cwiseAbs().maxCoeff() + 1.0);
    ProxDual::Eval cur = dual.eval(lam);
    for (long it = 0; it < opts.max_ascent_iters && !done; ++it) {
      ++iters;
      while (true) {
        const Vec cand = geometry::simplex_project(lam + step * cur.grad).lambda;
        const ProxDual::Eval ce = dual.eval(cand);
        if (ce.dual >= cur.dual) {
          lam = cand;
          cur = ce;
          step *= 1.5;
          break;
        }
        step *= 0.5;
        if (step < 1e-300) break;
      }
      if (cur.gap <= opts.tol) done = true;
      else if (it % 200 == 199) {
        done = active_set_rounds(5);
        cur = dual.eval(lam);
      }
    }
  }

  const ProxDual::Eval fin = dual.eval(lam);
  if (fin.gap > opts.tol) {
    throw ConvergenceError("proximal_step: dual ascent cap reached with gap " + std::to_string(fin.gap), x + fin.u,
                           fin.gap);
  }
  ProximalSolution sol;
  sol.z = x + fin.u;
  sol.lambda.lambda = lam;
  sol.vertices = stacked;
  sol.primal_value = fin.primal;
  sol.dual_value = fin.dual;
  sol.gap = fin.gap;
  sol.iterations = iters;
  return sol;
}

}  // namespace

MinNormHypoResult min_norm_hypo(const Hypodifferential& h, double tol) {
  if (!(tol > 0.0)) throw InputError("min_norm_hypo: tol must be positive");
  if (!h.is_polytope()) return min_norm_oracle(h, tol);
  const geometry::Polytope& poly = h.as_polytope().vertices;
  geometry::MinNormResult r;
  try {
    r = geometry::min_norm_point(poly, tol);
  } catch (const ConvergenceError& e) {
    // report the stacked point rather than the simplex weights
    throw ConvergenceError(std::string("min_norm_hypo: ") + e.what(), poly.vertices() * e.last_iterate(), e.gap());
  }
  return MinNormHypoResult{HypoElement::from_stacked(r.point), std::max(r.gap, 0.0), r.iterations};
}

ProximalSolution proximal_step(const Hypodifferential& h, const Vec& x, double gamma, const BoxConstraint& q,
                               const ProximalOptions& opts) {
  require_dim(x.size(), h.dim(), "proximal_step");
  require_dim(q.dim(), h.dim(), "proximal_step: box");
  require_finite(x, "proximal_step");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("proximal_step: gamma must be positive");
  if (!(opts.tol > 0.0)) throw InputError("proximal_step: tol must be positive");
  if (opts.require_inside && !q.contains(x)) throw InputError("proximal_step: x is not in the box");

  if (h.is_polytope()) return solve_explicit(h.as_polytope().vertices.vertices(), x, gamma, q, opts);

  // cutting planes: grow a vertex set from support queries at the candidate
  std::vector<Vec> pts{h.as_oracle().seed.stacked(), h.support(1.0, Vec::Zero(h.dim())).stacked()};
  ProximalOptions inner = opts;
  inner.tol = 0.5 * opts.tol;
  long iters = 0;
  while (true) {
    const geometry::Polytope poly(pts);
    ProximalSolution sol = solve_explicit(poly.vertices(), x, gamma, q, inner);
    iters += sol.iterations;
    const Vec u = sol.z - x;
    const HypoElement e = h.support(1.0, u);
    const double true_model = e.a + e.v.dot(u);
    const Mat& vs = poly.vertices();
    const double set_model = (vs.row(0).transpose() + vs.bottomRows(h.dim()).transpose() * u).maxCoeff();
    const double model_gap = true_model - set_model;
    if (model_gap <= 0.5 * opts.tol) {
      sol.primal_value += std::max(model_gap, 0.0);
      sol.gap = sol.primal_value - sol.dual_value;
      sol.iterations = iters;
      return sol;
    }
    if (poly.size() >= opts.vertex_budget) {
      throw ConvergenceError("proximal_step: cutting-plane vertex budget of " + std::to_string(opts.vertex_budget) +
                                 " exhausted (model gap " + std::to_string(model_gap) + ")",
                             sol.z, sol.gap + model_gap);
    }
    pts.clear();
    for (Eigen::Index j = 0; j < poly.size(); ++j) pts.push_back(poly.vertex(j));
    pts.push_back(e.stacked());
    inner.warm_start.reset();
  }
}

ProximalSolution proximal_step(const HypoFunction& f, const Vec& x, double gamma, const BoxConstraint& q,
                               const ProximalOptions& opts) {
  return proximal_step(f.hypo(x), x, gamma, q, opts);
}

}  // namespace hypodiff
