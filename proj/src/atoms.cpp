#include "hypodiff/atoms.hpp"

#include <algorithm>
#include <cmath>

namespace hypodiff {

namespace {

// Exact atoms: the offsets are <= 0 mathematically; rounding may push the
// largest one a hair above, which is the value the identity says it is.
double nonpositive(double a) { return std::min(a, 0.0); }

struct SymTop {
  double value;
  Vec vector;
};

SymTop top_eigen(const Mat& a) {
  const linalg::SymmetricEigen e = linalg::jacobi_eigen(a);
  const Eigen::Index n = a.rows();
  return SymTop{e.values(n - 1), e.vectors.col(n - 1)};
}

}  // namespace

Vec sym_to_vec(const Mat& a) {
  if (a.rows() != a.cols()) throw DimensionError("sym_to_vec: matrix not square");
  const Eigen::Index l = a.rows();
  Vec v(l * (l + 1) / 2);
  Eigen::Index k = 0;
  const double s = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < l; ++i) {
    v(k++) = a(i, i);
    for (Eigen::Index j = i + 1; j < l; ++j) v(k++) = s * 0.5 * (a(i, j) + a(j, i));
  }
  return v;
}

Mat vec_to_sym(const Vec& v, int l) {
  require_dim(v.size(), static_cast<Eigen::Index>(l) * (l + 1) / 2, "vec_to_sym");
  Mat a(l, l);
  Eigen::Index k = 0;
  const double s = std::sqrt(0.5);
  for (int i = 0; i < l; ++i) {
    a(i, i) = v(k++);
    for (int j = i + 1; j < l; ++j) {
      a(i, j) = a(j, i) = s * v(k);
      ++k;
    }
  }
  return a;
}

int sym_order(Eigen::Index vec_len) {
  const int l = static_cast<int>(std::lround((std::sqrt(8.0 * static_cast<double>(vec_len) + 1.0) - 1.0) / 2.0));
  if (static_cast<Eigen::Index>(l) * (l + 1) / 2 != vec_len || l < 1) {
    throw DimensionError("sym_order: " + std::to_string(vec_len) + " is not a triangular number");
  }
  return l;
}

HypoFunction atom_abs() {
  HypoMeta m;
  m.consistent = true;
  m.exact = true;
  m.lip_approx_L = 1.0;
  m.lip_map_K = 2.0;
  m.lip_f = 1.0;
  ValueFn value = [](const Vec& x) { return std::abs(x(0)); };
  HypoFn hypo = [](const Vec& x) {
    const double t = x(0), f = std::abs(t);
    return Hypodifferential::polytope(
        {HypoElement{t - f, Vec::Constant(1, 1.0)}, HypoElement{-t - f, Vec::Constant(1, -1.0)}});
  };
  return HypoFunction("abs", 1, std::move(value), std::move(hypo), m);
}

HypoFunction atom_polyhedral(const PolyhedralSpec& spec) {
  const Eigen::Index n = spec.slopes.rows();
  if (n < 1 || spec.slopes.cols() < 1) throw DimensionError("atom_polyhedral: need at least one piece and d >= 1");
  require_dim(spec.offsets.size(), n, "atom_polyhedral: offsets");
  if (!spec.offsets.allFinite() || !spec.slopes.allFinite()) throw InputError("atom_polyhedral: non-finite data");
  const Vec a = spec.offsets;
  const Mat v = spec.slopes;
  const double vmax = v.rowwise().norm().maxCoeff();
  HypoMeta m;
  m.consistent = true;
  m.exact = true;
  m.lip_approx_L = 0.0;
  m.lip_map_K = 2.0 * vmax;
  m.lip_f = vmax;
  ValueFn value = [a, v](const Vec& x) { return (a + v * x).maxCoeff(); };
  HypoFn hypo = [a, v](const Vec& x) {
    const Vec vals = a + v * x;
    const double f = vals.maxCoeff();
    Mat pts(v.cols() + 1, v.rows());
    pts.row(0) = (vals.array() - f).matrix().transpose();
    pts.bottomRows(v.cols()) = v.transpose();
    return Hypodifferential::polytope(geometry::Polytope(pts));
  };
  return HypoFunction("polyhedral", v.cols(), std::move(value), std::move(hypo), m);
}

HypoFunction atom_sublinear(const geometry::Polytope& slopes) {
  const Mat s = slopes.vertices();
  const double smax = s.colwise().norm().maxCoeff();
  HypoMeta m;
  m.consistent = true;
  m.exact = true;
  m.lip_approx_L = 0.0;
  m.lip_map_K = 2.0 * smax;
  m.lip_f = smax;
  ValueFn value = [s](const Vec& x) { return (s.transpose() * x).maxCoeff(); };
  HypoFn hypo = [s](const Vec& x) {
    const Vec vals = s.transpose() * x;
    const double f = vals.maxCoeff();
    Mat pts(s.rows() + 1, s.cols());
    pts.row(0) = (vals.array() - f).matrix().transpose();
    pts.bottomRows(s.rows()) = s;
    return Hypodifferential::polytope(geometry::Polytope(pts));
  };
  return HypoFunction("sublinear", s.rows(), std::move(value), std::move(hypo), m);
}

HypoFunction atom_norm_affine(const Mat& a, const Vec& b) {
  require_dim(b.size(), a.rows(), "atom_norm_affine: length of b");
  if (a.cols() < 1) throw DimensionError("atom_norm_affine: A needs at least one column");
  if (!a.allFinite() || !b.allFinite()) throw InputError("atom_norm_affine: non-finite data");
  const double na = linalg::spectral_norm(a);
  HypoMeta m;
  m.consistent = true;
  m.exact = true;
  m.lip_approx_L = 0.0;
  m.lip_map_K = 2.0 * na;
  m.lip_f = na;
  ValueFn value = [a, b](const Vec& x) { return (a * x + b).norm(); };
  HypoFn hypo = [a, b](const Vec& x) {
    const Vec r = a * x + b;
    const double nr = r.norm();
    auto element = [a, r, nr](const Vec& y) { return HypoElement{nonpositive(y.dot(r) - nr), a.transpose() * y}; };
    SupportOracle sup = [a, r, element](double wa, const Vec& wv) {
      const Vec u = wa * r + a * wv;
      const double nu = u.norm();
      return element(nu > 0.0 ? Vec(u / nu) : Vec(Vec::Zero(r.size())));
    };
    const HypoElement seed = element(nr > 0.0 ? Vec(r / nr) : Vec(Vec::Zero(r.size())));
    return Hypodifferential::oracle(a.cols(), std::move(sup), seed);
  };
  return HypoFunction("norm_affine", a.cols(), std::move(value), std::move(hypo), m);
}

HypoFunction atom_max_eigenvalue(int l) {
  if (l < 1) throw DimensionError("atom_max_eigenvalue: order must be >= 1");
  const Eigen::Index d = static_cast<Eigen::Index>(l) * (l + 1) / 2;
  HypoMeta m;
  m.consistent = true;
  m.exact = true;
  m.lip_approx_L = 0.0;
  m.lip_map_K = 2.0;
  m.lip_f = 1.0;
  ValueFn value = [l](const Vec& x) { return top_eigen(vec_to_sym(x, l)).value; };
  HypoFn hypo = [l, d](const Vec& x) {
    const Mat a = vec_to_sym(x, l);
    const SymTop top = top_eigen(a);
    const double lmax = top.value;
    // unit vectors u give elements (uᵀAu - λmax, vec(uuᵀ))
    auto element = [a, lmax](const Vec& u) {
      return HypoElement{nonpositive(u.dot(a * u) - lmax), sym_to_vec(u * u.transpose())};
    };
    SupportOracle sup = [a, l, element](double wa, const Vec& wv) {
      return element(top_eigen(wa * a + vec_to_sym(wv, l)).vector);
    };
    return Hypodifferential::oracle(d, std::move(sup), element(top.vector));
  };
  return HypoFunction("max_eigenvalue", d, std::move(value), std::move(hypo), m);
}

HypoFunction atom_dist_orthant(int d) {
  if (d < 1) throw DimensionError("atom_dist_orthant: dimension must be >= 1");
  HypoMeta m;
  m.consistent = true;
  m.exact = true;
  m.lip_approx_L = 0.0;
  m.lip_map_K = 2.0;
  m.lip_f = 1.0;
  ValueFn value = [](const Vec& x) { return x.cwiseMin(0.0).norm(); };
  HypoFn hypo = [d](const Vec& x) {
    const double dist = x.cwiseMin(0.0).norm();
    auto element = [x, dist](const Vec& y) { return HypoElement{nonpositive(y.dot(x) - dist), y}; };
    auto unit_neg = [d](const Vec& c) {
      const Vec cm = c.cwiseMin(0.0);
      const double n = cm.norm();
      return n > 0.0 ? Vec(cm / n) : Vec(Vec::Zero(d));
    };
    SupportOracle sup = [x, element, unit_neg](double wa, const Vec& wv) { return element(unit_neg(wa * x + wv)); };
    return Hypodifferential::oracle(d, std::move(sup), element(unit_neg(x)));
  };
  return HypoFunction("dist_orthant", d, std::move(value), std::move(hypo), m);
}

HypoFunction atom_quadratic(const Mat& q, const Vec& c, double r) {
  if (q.rows() != q.cols() || q.rows() < 1) throw DimensionError("atom_quadratic: Q must be square, d >= 1");
  require_dim(c.size(), q.rows(), "atom_quadratic: length of c");
  if (!q.allFinite() || !c.allFinite() || !std::isfinite(r)) throw InputError("atom_quadratic: non-finite data");
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (!linalg::is_symmetric(q, 1e-10 * scale)) throw InputError("atom_quadratic: Q not symmetric");
  const Mat qs = 0.5 * (q + q.transpose());
  const Vec eig = linalg::jacobi_eigen(qs).values;
  if (eig(0) < -1e-10 * scale) throw InputError("atom_quadratic: Q not positive semidefinite");
  const double norm_q = std::max(std::abs(eig(0)), std::abs(eig(eig.size() - 1)));
  HypoMeta m;
  m.consistent = true;
  m.exact = false;
  m.lip_approx_L = norm_q;
  m.lip_map_K = norm_q;
  ValueFn value = [qs, c, r](const Vec& x) { return 0.5 * x.dot(qs * x) + c.dot(x) + r; };
  HypoFn hypo = [qs, c](const Vec& x) { return Hypodifferential::polytope({HypoElement{0.0, qs * x + c}}); };
  return HypoFunction("quadratic", q.rows(), std::move(value), std::move(hypo), m);
}

double bundle_violation(const Bundle& b) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < b.points.size(); ++i)
    for (std::size_t j = 0; j < b.points.size(); ++j) {
      const double minorant = b.values[i] + b.subgradients[i].dot(b.points[j] - b.points[i]);
      worst = std::max(worst, minorant - b.values[j]);
    }
  return worst;
}

HypoFunction bundle_hypodiff(const Bundle& bundle, ValueFn f, SubgradientFn subgradient, std::optional<double> lip_f) {
  if (!f) throw InputError("bundle_hypodiff: value oracle required");
  const std::size_t n = bundle.points.size();
  if (bundle.values.size() != n || bundle.subgradients.size() != n) {
    throw DimensionError("bundle_hypodiff: points, values and subgradients differ in length");
  }
  if (n == 0 && !subgradient) throw InputError("bundle_hypodiff: empty bundle and no subgradient oracle");
  const Eigen::Index d = n ? bundle.points.front().size() : 0;
  double gmax = 0.0, scale = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    require_dim(bundle.points[j].size(), d, "bundle point");
    require_dim(bundle.subgradients[j].size(), d, "bundle subgradient");
    gmax = std::max(gmax, bundle.subgradients[j].norm());
    scale = std::max(scale, std::abs(bundle.values[j]));
  }
  if (n && bundle_violation(bundle) > 1e-9 * scale) {
    throw InputError("bundle_hypodiff: bundle violates the subgradient inequality");
  }
  if (d == 0) throw DimensionError("bundle_hypodiff: cannot infer dimension from an empty bundle");

  HypoMeta m;
  m.consistent = true;
  m.exact = false;
  m.lip_f = lip_f ? *lip_f : gmax;
  // the appended element (0, g(y)) may jump across kinks, so K only holds
  // when every query point is a bundle point
  if (!subgradient) m.lip_map_K = 2.0 * *m.lip_f;

  HypoFn hypo = [bundle, f, subgradient](const Vec& y) {
    const double fy = f(y);
    std::vector<HypoElement> els;
    bool has_y = false;
    for (std::size_t j = 0; j < bundle.points.size(); ++j) {
      const Vec& xj = bundle.points[j];
      if ((xj - y).norm() <= 1e-12 * (1.0 + y.norm())) has_y = true;
      els.push_back(HypoElement{bundle.values[j] - fy + bundle.subgradients[j].dot(y - xj), bundle.subgradients[j]});
    }
    if (subgradient) {
      els.push_back(HypoElement{0.0, subgradient(y)});
    } else if (!has_y) {
      throw NormalizationError("bundle_hypodiff: query point is not in the bundle and no subgradient oracle was given");
    }
    return Hypodifferential::polytope(els, true);
  };
  return HypoFunction("bundle", d, std::move(f), std::move(hypo), m);
}

}  // namespace hypodiff
