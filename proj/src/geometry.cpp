#include "hypodiff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace hypodiff::geometry {

namespace {

Mat dedup_columns(const Mat& v) {
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(v.cols()));
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    bool dup = false;
    for (Eigen::Index k : keep) {
      if ((v.col(j) - v.col(k)).norm() < kDedupDistance) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(j);
  }
  Mat out(v.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = v.col(keep[i]);
  return out;
}

Eigen::Index argmin_lowest(const Vec& g) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < g.size(); ++i)
    if (g(i) < g(best)) best = i;
  return best;
}

// Quadratic form backed by an explicit symmetric matrix.
struct DenseQuad {
  const Mat& g;
  Eigen::Index size() const { return g.rows(); }
  Vec apply(const Vec& x) const { return g * x; }
  double quad(const Vec& d) const { return d.dot(g * d); }
  double diag(Eigen::Index i) const { return g(i, i); }
  Mat block(const std::vector<Eigen::Index>& s) const {
    const auto n = static_cast<Eigen::Index>(s.size());
    Mat b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) b(i, j) = g(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]);
    return b;
  }
};

// Gram form PᵀP of a point set, never materialised.
struct GramQuad {
  const Mat& p;
  Eigen::Index size() const { return p.cols(); }
  Vec apply(const Vec& x) const { return p.transpose() * (p * x); }
  double quad(const Vec& d) const { return (p * d).squaredNorm(); }
  double diag(Eigen::Index i) const { return p.col(i).squaredNorm(); }
  Mat block(const std::vector<Eigen::Index>& s) const {
    Mat ps(p.rows(), static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) ps.col(static_cast<Eigen::Index>(i)) = p.col(s[i]);
    return ps.transpose() * ps;
  }
};

struct FaceStep {
  Vec target;  // affine minimiser on the face, or a ray direction
  bool ray = false;
};

// Minimise 0.5 yᵀH y + cᵀy over {1ᵀy = 1} restricted to the face S.
FaceStep solve_face(const Mat& gss, const Vec& cs) {
  const Eigen::Index s = gss.rows();
  FaceStep out;
  if (s == 1) {
    out.target = Vec::Ones(1);
    return out;
  }
  // y = e_last + Z t, Z = [e_i - e_last]
  Mat z = Mat::Zero(s, s - 1);
  for (Eigen::Index i = 0; i < s - 1; ++i) {
    z(i, i) = 1.0;
    z(s - 1, i) = -1.0;
  }
  Vec y0 = Vec::Zero(s);
  y0(s - 1) = 1.0;
  const Mat h = z.transpose() * gss * z;
  const Vec gv = z.transpose() * (gss * y0 + cs);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Vec& mu = es.eigenvalues();
  const Mat& u = es.eigenvectors();
  const double mu_max = std::max(mu.cwiseAbs().maxCoeff(), 0.0);
  const double thr = std::max(1e-13 * mu_max, std::numeric_limits<double>::min());

  Vec t = Vec::Zero(s - 1);
  Vec r = Vec::Zero(s - 1);
  for (Eigen::Index k = 0; k < s - 1; ++k) {
    const double proj = u.col(k).dot(gv);
    if (mu(k) > thr) {
      t -= (proj / mu(k)) * u.col(k);
    } else {
      r -= proj * u.col(k);
    }
  }
  const double scale = std::max({gv.norm(), cs.norm(), std::numeric_limits<double>::min()});
  if (r.norm() > 1e-10 * scale) {
    out.ray = true;
    out.target = z * r;
    return out;
  }
  out.target = y0 + z * t;
  return out;
}

template <class Quad>
QpResult run_simplex_qp(const Quad& q, const Vec& c, const QpOptions& opts) {
  const Eigen::Index m = q.size();
  const long d = opts.point_dim > 0 ? opts.point_dim : static_cast<long>(m);
  const long cap = opts.max_iters > 0 ? opts.max_iters : 10 * static_cast<long>(m) * d + 10000;

  Vec lam = Vec::Zero(m);
  if (opts.warm_start && opts.warm_start->size() == m && opts.warm_start->allFinite()) {
    lam = simplex_project(*opts.warm_start).lambda;
  } else {
    Eigen::Index best = 0;
    double best_val = 0.5 * q.diag(0) + c(0);
    for (Eigen::Index i = 1; i < m; ++i) {
      const double v = 0.5 * q.diag(i) + c(i);
      if (v < best_val) {
        best_val = v;
        best = i;
      }
    }
    lam(best) = 1.0;
  }

  auto support_of = [&](const Vec& l) {
    std::vector<Eigen::Index> s;
    for (Eigen::Index i = 0; i < m; ++i)
      if (l(i) > 0.0) s.push_back(i);
    return s;
  };
  std::vector<Eigen::Index> active = support_of(lam);

  QpResult res;
  long iters = 0;
  Vec grad = q.apply(lam) + c;

  auto fw_gap = [&](const Vec& l, const Vec& g) { return l.dot(g) - g.minCoeff(); };

  // One Frank-Wolfe step, toward-vertex or away-vertex, with exact line search.
  auto fw_away_step = [&]() {
    const Eigen::Index j = argmin_lowest(grad);
    Eigen::Index k = -1;
    for (Eigen::Index i = 0; i < m; ++i)
      if (lam(i) > 0.0 && (k < 0 || grad(i) > grad(k))) k = i;
    Vec dir_fw = -lam;
    dir_fw(j) += 1.0;
    Vec dir_aw = lam;
    dir_aw(k) -= 1.0;
    const double slope_fw = grad.dot(dir_fw);
    const double slope_aw = grad.dot(dir_aw);
    Vec dir;
    double tmax;
    double slope;
    if (slope_fw <= slope_aw || lam(k) >= 1.0) {
      dir = dir_fw;
      tmax = 1.0;
      slope = slope_fw;
    } else {
      dir = dir_aw;
      tmax = lam(k) / (1.0 - lam(k));
      slope = slope_aw;
    }
    if (slope >= 0.0) return;
    const double curv = q.quad(dir);
    double t = curv > 0.0 ? std::min(tmax, -slope / curv) : tmax;
    lam += t * dir;
    for (Eigen::Index i = 0; i < m; ++i)
      if (lam(i) < 1e-300) lam(i) = 0.0;
    lam /= lam.sum();
    active = support_of(lam);
  };

  while (true) {
    grad = q.apply(lam) + c;
    const double gap = fw_gap(lam, grad);
    if (gap <= opts.tol) {
      res.gap = std::max(gap, 0.0);
      break;
    }
    if (iters >= cap) {
      throw ConvergenceError("simplex_qp: iteration cap exceeded", lam, gap);
    }
    const Eigen::Index j = argmin_lowest(grad);
    const bool j_active = std::find(active.begin(), active.end(), j) != active.end();
    if (j_active) {
      // the face solve did not reach the face optimum: fall back
      fw_away_step();
      ++iters;
      continue;
    }
    active.push_back(j);

    bool fallback = false;
    bool first_minor = true;
    // minor cycles: move toward the face minimiser, dropping blocking vertices
    while (true) {
      ++iters;
      if (iters > cap) break;
      const Mat gss = q.block(active);
      Vec cs(static_cast<Eigen::Index>(active.size()));
      Vec ls(static_cast<Eigen::Index>(active.size()));
      for (std::size_t i = 0; i < active.size(); ++i) {
        cs(static_cast<Eigen::Index>(i)) = c(active[i]);
        ls(static_cast<Eigen::Index>(i)) = lam(active[i]);
      }
      const FaceStep step = solve_face(gss, cs);
      Vec dir = step.ray ? step.target : Vec(step.target - ls);
      if (!step.ray && (step.target.array() > 0.0).all()) {
        for (std::size_t i = 0; i < active.size(); ++i) lam(active[i]) = step.target(static_cast<Eigen::Index>(i));
        lam /= lam.sum();
        break;
      }
      double theta = step.ray ? std::numeric_limits<double>::infinity() : 1.0;
      for (Eigen::Index i = 0; i < ls.size(); ++i) {
        if (dir(i) < 0.0) theta = std::min(theta, ls(i) / -dir(i));
      }
      if (!std::isfinite(theta)) {
        fallback = true;
        break;
      }
      Vec moved = ls + theta * dir;
      std::vector<Eigen::Index> kept;
      for (std::size_t i = 0; i < active.size(); ++i) {
        const double val = moved(static_cast<Eigen::Index>(i));
        const bool blocking = dir(static_cast<Eigen::Index>(i)) < 0.0 &&
                              ls(static_cast<Eigen::Index>(i)) / -dir(static_cast<Eigen::Index>(i)) <= theta;
        if (blocking || val <= 0.0) {
          lam(active[i]) = 0.0;
        } else {
          lam(active[i]) = val;
          kept.push_back(active[i]);
        }
      }
      if (kept.empty()) {
        fallback = true;
        break;
      }
      lam /= lam.sum();
      const bool dropped_new = std::find(kept.begin(), kept.end(), j) == kept.end();
      active = std::move(kept);
      if (dropped_new && first_minor) {
        fallback = true;
        break;
      }
      first_minor = false;
    }
    if (fallback) {
      grad = q.apply(lam) + c;
      fw_away_step();
    }
  }

  res.weights.lambda = lam;
  res.objective = 0.5 * q.quad(lam) + c.dot(lam);
  res.iterations = iters;
  return res;
}

}  // namespace

Polytope::Polytope(const Mat& vertices) {
  if (vertices.cols() == 0) throw DimensionError("Polytope: empty vertex list");
  if (vertices.rows() == 0) throw DimensionError("Polytope: zero-dimensional vertices");
  if (!vertices.allFinite()) throw InputError("Polytope: non-finite vertex coordinate");
  vertices_ = dedup_columns(vertices);
}

Polytope::Polytope(const std::vector<Vec>& vertices) {
  if (vertices.empty()) throw DimensionError("Polytope: empty vertex list");
  const Eigen::Index dim = vertices.front().size();
  Mat m(dim, static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    require_dim(vertices[i].size(), dim, "Polytope vertex");
    m.col(static_cast<Eigen::Index>(i)) = vertices[i];
  }
  *this = Polytope(m);
}

Polytope Polytope::translated(const Vec& shift) const {
  require_dim(shift.size(), dim(), "Polytope::translated");
  Mat v = vertices_.colwise() - shift;
  return Polytope(v);
}

SimplexWeights simplex_project(const Vec& y) {
  if (y.size() == 0) throw DimensionError("simplex_project: empty vector");
  require_finite(y, "simplex_project");
  std::vector<double> u(y.data(), y.data() + y.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) tau = t;
  }
  SimplexWeights w;
  w.lambda = (y.array() - tau).max(0.0).matrix();
  const double s = w.lambda.sum();
  if (s > 0.0) {
    w.lambda /= s;
  } else {
    w.lambda.setZero();
    w.lambda(argmin_lowest(-y)) = 1.0;
  }
  return w;
}

QpResult simplex_qp(const Mat& g, const Vec& c, const QpOptions& opts) {
  if (c.size() == 0) throw DimensionError("simplex_qp: empty problem");
  if (g.rows() != c.size() || g.cols() != c.size()) throw DimensionError("simplex_qp: G and c sizes differ");
  if (!(opts.tol > 0.0)) throw InputError("simplex_qp: tol must be positive");
  if (!g.allFinite() || !c.allFinite()) throw InputError("simplex_qp: non-finite input");
  if (opts.check_psd) {
    if (!linalg::is_symmetric(g, 1e-10 * std::max(1.0, g.cwiseAbs().maxCoeff())))
      throw InputError("simplex_qp: G is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw InputError("simplex_qp: G is not positive semidefinite (min eigenvalue " +
                       std::to_string(es.eigenvalues().minCoeff()) + ")");
  }
  return run_simplex_qp(DenseQuad{g}, c, opts);
}

QpResult simplex_qp_gram(const Mat& p, const Vec& c, const QpOptions& opts) {
  if (c.size() == 0) throw DimensionError("simplex_qp_gram: empty problem");
  require_dim(p.cols(), c.size(), "simplex_qp_gram");
  if (!(opts.tol > 0.0)) throw InputError("simplex_qp_gram: tol must be positive");
  if (!p.allFinite() || !c.allFinite()) throw InputError("simplex_qp_gram: non-finite input");
  QpOptions o = opts;
  if (o.point_dim == 0) o.point_dim = static_cast<long>(p.rows());
  return run_simplex_qp(GramQuad{p}, c, o);
}

MinNormResult min_norm_point(const Polytope& p, double tol) {
  QpOptions opts;
  opts.tol = tol;
  opts.point_dim = static_cast<long>(p.dim());
  const Vec c = Vec::Zero(p.size());
  const QpResult r = run_simplex_qp(GramQuad{p.vertices()}, c, opts);
  MinNormResult out;
  out.weights = r.weights;
  out.point = p.vertices() * r.weights.lambda;
  out.gap = r.gap;
  out.iterations = r.iterations;
  return out;
}

double point_polytope_distance(const Vec& q, const Polytope& p, double tol) {
  require_dim(q.size(), p.dim(), "point_polytope_distance");
  require_finite(q, "point_polytope_distance");
  return min_norm_point(p.translated(q), tol).point.norm();
}

double hausdorff_polytope(const Polytope& a, const Polytope& b, double tol) {
  require_dim(b.dim(), a.dim(), "hausdorff_polytope");
  double h = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) h = std::max(h, point_polytope_distance(a.vertex(i), b, tol));
  for (Eigen::Index j = 0; j < b.size(); ++j) h = std::max(h, point_polytope_distance(b.vertex(j), a, tol));
  return h;
}

}  // namespace hypodiff::geometry
