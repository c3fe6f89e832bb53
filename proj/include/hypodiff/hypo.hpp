#pragma once

// Hypodifferentials: convex compact sets of pairs (a, v) in R x R^d whose
// max-affine model  d -> max (a + <v, d>)  approximates f(x + d) - f(x).
// A set is stored either as an explicit vertex list or as a support oracle.

#include "hypodiff/core.hpp"
#include "hypodiff/geometry.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hypodiff {

inline constexpr double kNormalizationTol = 1e-9;

struct HypoElement {
  double a = 0.0;
  Vec v;

  Eigen::Index dim() const { return v.size(); }
  /// (a, v) stacked into R^{d+1}, offset first.
  Vec stacked() const;
  static HypoElement from_stacked(const Vec& p);
  double norm() const { return std::sqrt(a * a + v.squaredNorm()); }
};

/// Returns an element maximising w_a * a + <w_v, v> over the represented set.
/// Must be a pure function of its arguments.
using SupportOracle = std::function<HypoElement(double w_a, const Vec& w_v)>;

class Hypodifferential {
 public:
  struct PolytopeRep {
    geometry::Polytope vertices;  // columns are stacked (a, v)
  };
  struct OracleRep {
    SupportOracle support;
    HypoElement seed;
  };

  /// Vertex-list form. With clamp_small_positive, offsets in (0, 1e-9] are
  /// set to zero; larger positive offsets are kept so validate() reports them.
  static Hypodifferential polytope(const std::vector<HypoElement>& elements, bool clamp_small_positive = false);
  static Hypodifferential polytope(const geometry::Polytope& stacked);
  static Hypodifferential oracle(Eigen::Index dim, SupportOracle support, HypoElement seed);

  Eigen::Index dim() const { return dim_; }
  bool is_polytope() const { return std::holds_alternative<PolytopeRep>(rep_); }
  const PolytopeRep& as_polytope() const { return std::get<PolytopeRep>(rep_); }
  const OracleRep& as_oracle() const { return std::get<OracleRep>(rep_); }

  /// Support query; for vertex lists the lowest-index maximiser is returned.
  HypoElement support(double w_a, const Vec& w_v) const;

  std::vector<HypoElement> elements() const;  // vertices; empty for oracles

 private:
  Hypodifferential(Eigen::Index dim, std::variant<PolytopeRep, OracleRep> rep)
      : dim_(dim), rep_(std::move(rep)) {}
  Eigen::Index dim_;
  std::variant<PolytopeRep, OracleRep> rep_;
};

struct HypoMeta {
  bool consistent = false;
  bool exact = false;
  std::optional<double> lip_approx_L;  // constant in |f(y)-f(x)-Φ(y-x)| <= L/2 |y-x|^2
  std::optional<double> lip_map_K;     // Pompeiu-Hausdorff Lipschitz constant of x -> d̲f(x)
  std::optional<double> bound_C;       // |a|, |v| <= C on the declared domain
  std::optional<double> lip_f;         // Lipschitz constant of f itself
};

using ValueFn = std::function<double(const Vec&)>;
using HypoFn = std::function<Hypodifferential(const Vec&)>;

/// A convex function together with its hypodifferential mapping.
class HypoFunction {
 public:
  HypoFunction(std::string name, Eigen::Index dim, ValueFn value, HypoFn hypo, HypoMeta meta);

  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return dim_; }
  const HypoMeta& meta() const { return meta_; }

  double value(const Vec& x) const;
  Hypodifferential hypo(const Vec& x) const;

  HypoFunction with_meta(HypoMeta meta) const;
  HypoFunction renamed(std::string name) const;

 private:
  std::string name_;
  Eigen::Index dim_;
  std::shared_ptr<const ValueFn> value_;
  std::shared_ptr<const HypoFn> hypo_;
  HypoMeta meta_;
};

/// max over the set of a + <v, d>.
double model_value(const Hypodifferential& h, const Vec& d);

struct ValidationReport {
  bool valid = true;
  double max_a = 0.0;
  std::vector<std::string> violations;
};

ValidationReport validate(const Hypodifferential& h);

/// Inner polytope approximation from support points at the given weights
/// (each weight is (w_a, w_v) stacked). Vertex lists are returned unchanged.
geometry::Polytope to_polytope(const Hypodifferential& h, const std::vector<Vec>& directions);

}  // namespace hypodiff
