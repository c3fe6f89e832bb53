#include "hypodiff/hypo.hpp"

#include <cmath>
#include <sstream>

namespace hypodiff {

Vec HypoElement::stacked() const {
  Vec p(v.size() + 1);
  p(0) = a;
  p.tail(v.size()) = v;
  return p;
}

HypoElement HypoElement::from_stacked(const Vec& p) {
  if (p.size() < 2) throw DimensionError("HypoElement: stacked vector needs at least 2 entries");
  return HypoElement{p(0), p.tail(p.size() - 1)};
}

Hypodifferential Hypodifferential::polytope(const std::vector<HypoElement>& elements, bool clamp_small_positive) {
  if (elements.empty()) throw DimensionError("Hypodifferential: empty vertex list");
  const Eigen::Index d = elements.front().dim();
  Mat m(d + 1, static_cast<Eigen::Index>(elements.size()));
  for (std::size_t i = 0; i < elements.size(); ++i) {
    require_dim(elements[i].dim(), d, "Hypodifferential vertex");
    Vec p = elements[i].stacked();
    if (!p.allFinite()) throw InputError("Hypodifferential: non-finite vertex");
    if (clamp_small_positive && p(0) > 0.0 && p(0) <= kNormalizationTol) p(0) = 0.0;
    m.col(static_cast<Eigen::Index>(i)) = p;
  }
  return polytope(geometry::Polytope(m));
}

Hypodifferential Hypodifferential::polytope(const geometry::Polytope& stacked) {
  if (stacked.dim() < 2) throw DimensionError("Hypodifferential: stacked vertices need dimension >= 2");
  return Hypodifferential(stacked.dim() - 1, PolytopeRep{stacked});
}

Hypodifferential Hypodifferential::oracle(Eigen::Index dim, SupportOracle support, HypoElement seed) {
  if (dim < 1) throw DimensionError("Hypodifferential: dimension must be >= 1");
  require_dim(seed.dim(), dim, "Hypodifferential seed");
  if (!support) throw InputError("Hypodifferential: empty support oracle");
  return Hypodifferential(dim, OracleRep{std::move(support), std::move(seed)});
}

HypoElement Hypodifferential::support(double w_a, const Vec& w_v) const {
  require_dim(w_v.size(), dim_, "support query");
  if (is_polytope()) {
    const Mat& v = as_polytope().vertices.vertices();
    Vec w(dim_ + 1);
    w(0) = w_a;
    w.tail(dim_) = w_v;
    const Vec scores = v.transpose() * w;
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i)
      if (scores(i) > scores(best)) best = i;
    return HypoElement::from_stacked(v.col(best));
  }
  HypoElement e = as_oracle().support(w_a, w_v);
  require_dim(e.dim(), dim_, "support oracle result");
  return e;
}

std::vector<HypoElement> Hypodifferential::elements() const {
  std::vector<HypoElement> out;
  if (!is_polytope()) return out;
  const Mat& v = as_polytope().vertices.vertices();
  out.reserve(static_cast<std::size_t>(v.cols()));
  for (Eigen::Index i = 0; i < v.cols(); ++i) out.push_back(HypoElement::from_stacked(v.col(i)));
  return out;
}

HypoFunction::HypoFunction(std::string name, Eigen::Index dim, ValueFn value, HypoFn hypo, HypoMeta meta)
    : name_(std::move(name)),
      dim_(dim),
      value_(std::make_shared<const ValueFn>(std::move(value))),
      hypo_(std::make_shared<const HypoFn>(std::move(hypo))),
      meta_(meta) {
  if (dim_ < 1) throw DimensionError("HypoFunction: dimension must be >= 1");
  if (meta_.exact && !meta_.consistent) throw InputError("HypoFunction: exact implies consistent");
}

double HypoFunction::value(const Vec& x) const {
  require_dim(x.size(), dim_, "HypoFunction::value");
  return (*value_)(x);
}

Hypodifferential HypoFunction::hypo(const Vec& x) const {
  require_dim(x.size(), dim_, "HypoFunction::hypo");
  Hypodifferential h = (*hypo_)(x);
  require_dim(h.dim(), dim_, "HypoFunction::hypo result");
  return h;
}

HypoFunction HypoFunction::with_meta(HypoMeta meta) const {
  HypoFunction out = *this;
  if (meta.exact && !meta.consistent) throw InputError("HypoFunction: exact implies consistent");
  out.meta_ = meta;
  return out;
}

HypoFunction HypoFunction::renamed(std::string name) const {
  HypoFunction out = *this;
  out.name_ = std::move(name);
  return out;
}

double model_value(const Hypodifferential& h, const Vec& d) {
  require_dim(d.size(), h.dim(), "model_value");
  if (h.is_polytope()) {
    const Mat& v = h.as_polytope().vertices.vertices();
    const Vec vals = v.row(0).transpose() + v.bottomRows(h.dim()).transpose() * d;
    return vals.maxCoeff();
  }
  const HypoElement e = h.support(1.0, d);
  const double val = e.a + e.v.dot(d);
  // the seed is a member too; guards against a sloppy oracle
  const HypoElement& s = h.as_oracle().seed;
  return std::max(val, s.a + s.v.dot(d));
}

ValidationReport validate(const Hypodifferential& h) {
  ValidationReport rep;
  auto fmt = [](double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
  };
  if (h.is_polytope()) {
    const Mat& v = h.as_polytope().vertices.vertices();
    rep.max_a = v.row(0).maxCoeff();
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
      if (v(0, i) > kNormalizationTol) {
        rep.violations.push_back("a = " + fmt(v(0, i)) + " > 0 at vertex " + std::to_string(i));
      }
    }
  } else {
    rep.max_a = h.support(1.0, Vec::Zero(h.dim())).a;
    rep.max_a = std::max(rep.max_a, h.as_oracle().seed.a);
    if (h.as_oracle().seed.a > kNormalizationTol) {
      rep.violations.push_back("seed a = " + fmt(h.as_oracle().seed.a) + " > 0");
    }
  }
  if (std::abs(rep.max_a) > kNormalizationTol) {
    rep.violations.push_back("max a = " + fmt(rep.max_a) + " != 0");
  }
  rep.valid = rep.violations.empty();
  return rep;
}

geometry::Polytope to_polytope(const Hypodifferential& h, const std::vector<Vec>& directions) {
  if (h.is_polytope()) return h.as_polytope().vertices;
  if (directions.empty()) throw InputError("to_polytope: no directions");
  std::vector<Vec> pts;
  pts.reserve(directions.size());
  for (const Vec& w : directions) {
    require_dim(w.size(), h.dim() + 1, "to_polytope direction");
    pts.push_back(h.support(w(0), w.tail(h.dim())).stacked());
  }
  return geometry::Polytope(pts);
}

}  // namespace hypodiff
