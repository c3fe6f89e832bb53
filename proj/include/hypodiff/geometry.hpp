#pragma once

// Finite-dimensional geometric kernel: simplex projection, simplex-constrained
// QP, minimum-norm point of a polytope and Pompeiu-Hausdorff distances.
// All norms are Euclidean.

#include "hypodiff/core.hpp"

#include <optional>

namespace hypodiff::geometry {

inline constexpr double kDefaultTol = 1e-10;
inline constexpr double kDedupDistance = 1e-14;

/// Convex hull of a finite vertex list. Vertices are stored as the columns of
/// a dim x m matrix; near-duplicates are merged on construction, redundant
/// (non-extreme) vertices are kept.
class Polytope {
 public:
  explicit Polytope(const Mat& vertices);
  explicit Polytope(const std::vector<Vec>& vertices);

  Eigen::Index dim() const { return vertices_.rows(); }
  Eigen::Index size() const { return vertices_.cols(); }
  const Mat& vertices() const { return vertices_; }
  Vec vertex(Eigen::Index i) const { return vertices_.col(i); }

  /// Same polytope shifted by -q.
  Polytope translated(const Vec& shift) const;

 private:
  Mat vertices_;
};

struct SimplexWeights {
  Vec lambda;
};

SimplexWeights simplex_project(const Vec& y);

struct QpOptions {
  double tol = kDefaultTol;
  // 0 selects the default cap 10*m*d + 10^4
  long max_iters = 0;
  long point_dim = 0;
  bool check_psd = true;
  std::optional<Vec> warm_start;
};

struct QpResult {
  SimplexWeights weights;
  double objective = 0.0;
  double gap = 0.0;  // Frank-Wolfe gap at the returned point
  long iterations = 0;
};

/// min 0.5 λᵀGλ + cᵀλ over the unit simplex, with G symmetric PSD.
/// Active-set iterations on faces of the simplex, Frank-Wolfe away steps when
/// the face solve stalls. Returns once the Frank-Wolfe gap is <= tol.
QpResult simplex_qp(const Mat& g, const Vec& c, const QpOptions& opts = {});

/// Same problem with G = PᵀP given through P (columns are points); G is
/// never formed and needs no PSD check.
QpResult simplex_qp_gram(const Mat& p, const Vec& c, const QpOptions& opts = {});

struct MinNormResult {
  Vec point;
  SimplexWeights weights;
  double gap = 0.0;
  long iterations = 0;
};

MinNormResult min_norm_point(const Polytope& p, double tol = kDefaultTol);

double point_polytope_distance(const Vec& q, const Polytope& p, double tol = kDefaultTol);

double hausdorff_polytope(const Polytope& a, const Polytope& b, double tol = kDefaultTol);

}  // namespace hypodiff::geometry
