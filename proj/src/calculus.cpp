#include "hypodiff/calculus.hpp"

#include <algorithm>
#include <cmath>

namespace hypodiff {

namespace {

void require_same_dims(const std::vector<HypoFunction>& fs, const char* what) {
  if (fs.empty()) throw InputError(std::string(what) + ": empty argument list");
  for (const auto& f : fs) require_dim(f.dim(), fs.front().dim(), what);
}

// Sum of optionals weighted by w; absent if any input is absent.
std::optional<double> weighted_sum(const std::vector<std::optional<double>>& xs, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!xs[i]) return std::nullopt;
    s += w[i] * *xs[i];
  }
  return s;
}

std::optional<double> max_of(const std::vector<std::optional<double>>& xs) {
  double m = 0.0;
  for (const auto& x : xs) {
    if (!x) return std::nullopt;
    m = std::max(m, *x);
  }
  return m;
}

template <class Get>
std::vector<std::optional<double>> collect(const std::vector<HypoFunction>& fs, Get get) {
  std::vector<std::optional<double>> out;
  for (const auto& f : fs) out.push_back(get(f.meta()));
  return out;
}

HypoElement seed_of(const Hypodifferential& h) {
  if (h.is_polytope()) return h.support(1.0, Vec::Zero(h.dim()));
  return h.as_oracle().seed;
}

}  // namespace

Hypodifferential scaled_sum(const std::vector<Hypodifferential>& parts, const std::vector<double>& weights) {
  if (parts.empty()) throw InputError("scaled_sum: no parts");
  if (parts.size() != weights.size()) throw DimensionError("scaled_sum: weight count mismatch");
  const Eigen::Index d = parts.front().dim();
  std::vector<std::size_t> active;
  bool any_oracle = false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    require_dim(parts[i].dim(), d, "scaled_sum");
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw InputError("scaled_sum: weights must be finite and >= 0");
    if (weights[i] == 0.0) continue;
    active.push_back(i);
    any_oracle = any_oracle || !parts[i].is_polytope();
  }
  if (active.empty()) return Hypodifferential::polytope({HypoElement{0.0, Vec::Zero(d)}});

  if (any_oracle) {
    std::vector<Hypodifferential> ps;
    std::vector<double> ws;
    HypoElement seed{0.0, Vec::Zero(d)};
    for (std::size_t i : active) {
      ps.push_back(parts[i]);
      ws.push_back(weights[i]);
      const HypoElement s = seed_of(parts[i]);
      seed.a += weights[i] * s.a;
      seed.v += weights[i] * s.v;
    }
    SupportOracle sup = [ps, ws, d](double wa, const Vec& wv) {
      HypoElement out{0.0, Vec::Zero(d)};
      for (std::size_t i = 0; i < ps.size(); ++i) {
        const HypoElement e = ps[i].support(wa, wv);
        out.a += ws[i] * e.a;
        out.v += ws[i] * e.v;
      }
      return out;
    };
    return Hypodifferential::oracle(d, std::move(sup), std::move(seed));
  }

  Mat cur = weights[active.front()] * parts[active.front()].as_polytope().vertices.vertices();
  for (std::size_t k = 1; k < active.size(); ++k) {
    const Mat next = weights[active[k]] * parts[active[k]].as_polytope().vertices.vertices();
    if (cur.cols() * next.cols() > kMinkowskiVertexCap) {
      throw VertexCapError("Minkowski sum would have " + std::to_string(cur.cols() * next.cols()) +
                           " vertices (cap " + std::to_string(kMinkowskiVertexCap) +
                           "); wrap the parts with as_oracle()");
    }
    Mat sum(d + 1, cur.cols() * next.cols());
    for (Eigen::Index i = 0; i < cur.cols(); ++i)
      for (Eigen::Index j = 0; j < next.cols(); ++j) sum.col(i * next.cols() + j) = cur.col(i) + next.col(j);
    cur = geometry::Polytope(sum).vertices();
  }
  return Hypodifferential::polytope(geometry::Polytope(cur));
}

HypoFunction as_oracle(const HypoFunction& f) {
  HypoFn hypo = [f](const Vec& x) {
    const Hypodifferential h = f.hypo(x);
    if (!h.is_polytope()) return h;
    SupportOracle sup = [h](double wa, const Vec& wv) { return h.support(wa, wv); };
    return Hypodifferential::oracle(h.dim(), std::move(sup), seed_of(h));
  };
  return HypoFunction(f.name(), f.dim(), [f](const Vec& x) { return f.value(x); }, std::move(hypo), f.meta());
}

HypoFunction with_bound_C(const HypoFunction& f, double c) {
  if (!(c >= 0.0)) throw InputError("with_bound_C: bound must be >= 0");
  HypoMeta m = f.meta();
  m.bound_C = c;
  return f.with_meta(m);
}

HypoFunction conic_combination(const std::vector<HypoFunction>& fs, const std::vector<double>& lambdas) {
  require_same_dims(fs, "conic_combination");
  if (fs.size() != lambdas.size()) throw DimensionError("conic_combination: coefficient count mismatch");
  for (double l : lambdas)
    if (!(l >= 0.0) || !std::isfinite(l)) throw InputError("conic_combination: coefficients must be finite and >= 0");

  HypoMeta m;
  m.consistent = std::all_of(fs.begin(), fs.end(), [](const HypoFunction& f) { return f.meta().consistent; });
  m.exact = std::all_of(fs.begin(), fs.end(), [](const HypoFunction& f) { return f.meta().exact; });
  m.lip_approx_L = weighted_sum(collect(fs, [](const HypoMeta& x) { return x.lip_approx_L; }), lambdas);
  m.lip_map_K = weighted_sum(collect(fs, [](const HypoMeta& x) { return x.lip_map_K; }), lambdas);
  m.bound_C = weighted_sum(collect(fs, [](const HypoMeta& x) { return x.bound_C; }), lambdas);
  m.lip_f = weighted_sum(collect(fs, [](const HypoMeta& x) { return x.lip_f; }), lambdas);

  std::string name = "conic(";
  for (std::size_t i = 0; i < fs.size(); ++i) name += (i ? "," : "") + fs[i].name();
  name += ")";

  ValueFn value = [fs, lambdas](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i)
      if (lambdas[i] != 0.0) s += lambdas[i] * fs[i].value(x);
    return s;
  };
  HypoFn hypo = [fs, lambdas](const Vec& x) {
    std::vector<Hypodifferential> parts;
    for (std::size_t i = 0; i < fs.size(); ++i)
      parts.push_back(lambdas[i] != 0.0 ? fs[i].hypo(x)
                                        : Hypodifferential::polytope({HypoElement{0.0, Vec::Zero(x.size())}}));
    return scaled_sum(parts, lambdas);
  };
  return HypoFunction(name, fs.front().dim(), std::move(value), std::move(hypo), m);
}

HypoFunction finite_max(const std::vector<HypoFunction>& fs) {
  require_same_dims(fs, "finite_max");
  if (fs.size() == 1) return fs.front();

  HypoMeta m;
  m.consistent = std::all_of(fs.begin(), fs.end(), [](const HypoFunction& f) { return f.meta().consistent; });
  m.exact = std::all_of(fs.begin(), fs.end(), [](const HypoFunction& f) { return f.meta().exact; });
  m.lip_approx_L = max_of(collect(fs, [](const HypoMeta& x) { return x.lip_approx_L; }));
  m.lip_f = max_of(collect(fs, [](const HypoMeta& x) { return x.lip_f; }));
  const auto k_max = max_of(collect(fs, [](const HypoMeta& x) { return x.lip_map_K; }));
  if (k_max && m.lip_f) m.lip_map_K = 2.0 * *m.lip_f + *k_max;

  std::string name = "max(";
  for (std::size_t i = 0; i < fs.size(); ++i) name += (i ? "," : "") + fs[i].name();
  name += ")";

  ValueFn value = [fs](const Vec& x) {
    double best = fs.front().value(x);
    for (std::size_t i = 1; i < fs.size(); ++i) best = std::max(best, fs[i].value(x));
    return best;
  };
  HypoFn hypo = [fs](const Vec& x) {
    const Eigen::Index d = x.size();
    std::vector<double> vals;
    std::vector<Hypodifferential> parts;
    bool any_oracle = false;
    for (const auto& f : fs) {
      vals.push_back(f.value(x));
      parts.push_back(f.hypo(x));
      any_oracle = any_oracle || !parts.back().is_polytope();
    }
    const double top = *std::max_element(vals.begin(), vals.end());
    std::vector<double> shift;
    for (double v : vals) shift.push_back(v - top);

    if (!any_oracle) {
      Eigen::Index total = 0;
      for (const auto& p : parts) total += p.as_polytope().vertices.size();
      Mat all(d + 1, total);
      Eigen::Index c = 0;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const Mat& v = parts[i].as_polytope().vertices.vertices();
        all.middleCols(c, v.cols()) = v;
        all.block(0, c, 1, v.cols()).array() += shift[i];
        c += v.cols();
      }
      return Hypodifferential::polytope(geometry::Polytope(all));
    }

    const std::size_t arg = static_cast<std::size_t>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    HypoElement seed = seed_of(parts[arg]);
    seed.a += shift[arg];
    SupportOracle sup = [parts, shift](double wa, const Vec& wv) {
      HypoElement best;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        HypoElement e = parts[i].support(wa, wv);
        e.a += shift[i];
        const double score = wa * e.a + wv.dot(e.v);
        if (score > best_score) {
          best_score = score;
          best = std::move(e);
        }
      }
      return best;
    };
    return Hypodifferential::oracle(d, std::move(sup), std::move(seed));
  };
  return HypoFunction(name, fs.front().dim(), std::move(value), std::move(hypo), m);
}

HypoFunction affine_precompose(const HypoFunction& f, const Mat& a, const Vec& b) {
  require_dim(a.rows(), f.dim(), "affine_precompose: rows of A");
  require_dim(b.size(), f.dim(), "affine_precompose: length of b");
  if (a.cols() < 1) throw DimensionError("affine_precompose: A needs at least one column");
  if (!a.allFinite() || !b.allFinite()) throw InputError("affine_precompose: non-finite A or b");

  const double na = linalg::spectral_norm(a);
  const double grow = std::max(1.0, na);
  HypoMeta m = f.meta();
  if (m.lip_approx_L) m.lip_approx_L = *m.lip_approx_L * na * na;
  if (m.lip_map_K) m.lip_map_K = *m.lip_map_K * na * grow;
  if (m.lip_f) m.lip_f = *m.lip_f * na;
  if (m.bound_C) m.bound_C = *m.bound_C * grow;

  ValueFn value = [f, a, b](const Vec& y) { return f.value(a * y + b); };
  HypoFn hypo = [f, a, b](const Vec& y) {
    const Hypodifferential h = f.hypo(a * y + b);
    const Eigen::Index m_dim = a.cols();
    if (h.is_polytope()) {
      const Mat& v = h.as_polytope().vertices.vertices();
      Mat out(m_dim + 1, v.cols());
      out.row(0) = v.row(0);
      out.bottomRows(m_dim) = a.transpose() * v.bottomRows(v.rows() - 1);
      return Hypodifferential::polytope(geometry::Polytope(out));
    }
    SupportOracle sup = [h, a](double wa, const Vec& wu) {
      const HypoElement e = h.support(wa, a * wu);
      return HypoElement{e.a, a.transpose() * e.v};
    };
    const HypoElement s = h.as_oracle().seed;
    return Hypodifferential::oracle(m_dim, std::move(sup), HypoElement{s.a, a.transpose() * s.v});
  };
  return HypoFunction("affine(" + f.name() + ")", a.cols(), std::move(value), std::move(hypo), m);
}

SmoothOuter outer_exp() {
  SmoothOuter g;
  g.name = "exp";
  g.n = 1;
  g.value = [](const Vec& y) { return std::exp(y(0)); };
  g.grad = [](const Vec& y) { return Vec::Constant(1, std::exp(y(0))); };
  return g;
}

SmoothOuter outer_sum(Eigen::Index n) {
  if (n < 1) throw InputError("outer_sum: arity must be >= 1");
  SmoothOuter g;
  g.name = "sum";
  g.n = n;
  g.value = [](const Vec& y) { return y.sum(); };
  g.grad = [n](const Vec&) { return Vec::Ones(n); };
  g.lip_grad = 0.0;
  g.grad_bound = std::sqrt(static_cast<double>(n));
  return g;
}

SmoothOuter outer_logsumexp(Eigen::Index n) {
  if (n < 1) throw InputError("outer_logsumexp: arity must be >= 1");
  SmoothOuter g;
  g.name = "logsumexp";
  g.n = n;
  g.value = [](const Vec& y) {
    const double m = y.maxCoeff();
    return m + std::log((y.array() - m).exp().sum());
  };
  g.grad = [](const Vec& y) {
    const double m = y.maxCoeff();
    Vec e = (y.array() - m).exp().matrix();
    return Vec(e / e.sum());
  };
  g.lip_grad = 1.0;
  g.grad_bound = 1.0;
  return g;
}

SmoothOuter outer_identity() {
  SmoothOuter g;
  g.name = "id";
  g.n = 1;
  g.value = [](const Vec& y) { return y(0); };
  g.grad = [](const Vec&) { return Vec::Ones(1); };
  g.lip_grad = 0.0;
  g.grad_bound = 1.0;
  return g;
}

HypoFunction outer_compose(const SmoothOuter& g, const std::vector<HypoFunction>& fs) {
  require_same_dims(fs, "outer_compose");
  if (static_cast<Eigen::Index>(fs.size()) != g.n) throw DimensionError("outer_compose: arity mismatch");
  if (!g.value || !g.grad) throw InputError("outer_compose: outer function incomplete");

  HypoMeta m;
  m.consistent = std::all_of(fs.begin(), fs.end(), [](const HypoFunction& f) { return f.meta().consistent; });
  m.exact = false;
  const std::vector<double> ones(fs.size(), 1.0);
  const auto sum_l = weighted_sum(collect(fs, [](const HypoMeta& x) { return x.lip_approx_L; }), ones);
  const auto sum_k = weighted_sum(collect(fs, [](const HypoMeta& x) { return x.lip_map_K; }), ones);
  const auto sum_c = weighted_sum(collect(fs, [](const HypoMeta& x) { return x.bound_C; }), ones);
  const auto lips = collect(fs, [](const HypoMeta& x) { return x.lip_f; });
  const auto sum_lip = weighted_sum(lips, ones);
  if (g.grad_bound && g.lip_grad) {
    const double cg = *g.grad_bound, lg = *g.lip_grad;
    // with a linear outer function the curvature terms vanish
    if (sum_l && (lg == 0.0 || sum_lip)) m.lip_approx_L = cg * *sum_l + (lg == 0.0 ? 0.0 : 2.0 * lg * *sum_lip * *sum_lip);
    if (sum_k && (lg == 0.0 || sum_c)) m.lip_map_K = cg * *sum_k + (lg == 0.0 ? 0.0 : lg * *sum_c);
  }
  if (g.grad_bound) {
    if (sum_c) m.bound_C = *g.grad_bound * *sum_c;
    if (sum_lip) {
      double sq = 0.0;
      for (const auto& l : lips) sq += *l * *l;
      m.lip_f = *g.grad_bound * std::sqrt(sq);
    }
  }

  std::string name = g.name + "(";
  for (std::size_t i = 0; i < fs.size(); ++i) name += (i ? "," : "") + fs[i].name();
  name += ")";

  auto inner = [fs](const Vec& x) {
    Vec y(static_cast<Eigen::Index>(fs.size()));
    for (std::size_t i = 0; i < fs.size(); ++i) y(static_cast<Eigen::Index>(i)) = fs[i].value(x);
    return y;
  };
  ValueFn value = [g, inner](const Vec& x) { return g.value(inner(x)); };
  HypoFn hypo = [g, fs, inner](const Vec& x) {
    const Vec grad = g.grad(inner(x));
    std::vector<double> w(fs.size());
    std::vector<Hypodifferential> parts;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      w[i] = grad(static_cast<Eigen::Index>(i));
      if (!(w[i] >= 0.0)) {
        throw MonotonicityError("outer_compose: partial derivative " + std::to_string(i) + " of " + g.name +
                                " is negative (" + std::to_string(w[i]) + ")");
      }
      parts.push_back(w[i] != 0.0 ? fs[i].hypo(x)
                                  : Hypodifferential::polytope({HypoElement{0.0, Vec::Zero(x.size())}}));
    }
    return scaled_sum(parts, w);
  };
  return HypoFunction(name, fs.front().dim(), std::move(value), std::move(hypo), m);
}

HypoFunction positive_power(const HypoFunction& f, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InputError("positive_power: exponent must be > 1");
  SmoothOuter g;
  g.name = "pow";
  g.n = 1;
  g.value = [p](const Vec& y) { return std::pow(std::max(0.0, y(0)), p); };
  g.grad = [p](const Vec& y) { return Vec::Constant(1, p * std::pow(std::max(0.0, y(0)), p - 1.0)); };
  return outer_compose(g, {f});
}

}  // namespace hypodiff
