#pragma once

// Builtin hypodifferentiable functions.

#include "hypodiff/hypo.hpp"

#include <optional>
#include <vector>

namespace hypodiff {

/// |x| on R.
HypoFunction atom_abs();

/// max_i (a_i + <v_i, x>); slopes is n x d, one piece per row.
struct PolyhedralSpec {
  Vec offsets;
  Mat slopes;
};
HypoFunction atom_polyhedral(const PolyhedralSpec& spec);

/// Support function of co(slopes): x -> max_j <s_j, x>. Slopes are columns.
HypoFunction atom_sublinear(const geometry::Polytope& slopes);

/// |A x + b| (Euclidean).
HypoFunction atom_norm_affine(const Mat& a, const Vec& b);

/// Largest eigenvalue of a symmetric l x l matrix given in scaled
/// upper-triangular vector form (see sym_to_vec).
HypoFunction atom_max_eigenvalue(int l);

/// Euclidean distance to the nonnegative orthant of R^d.
HypoFunction atom_dist_orthant(int d);

/// 0.5 xᵀQx + cᵀx + r with Q symmetric PSD.
HypoFunction atom_quadratic(const Mat& q, const Vec& c, double r);

/// Finite bundle of points with function values and subgradients.
struct Bundle {
  std::vector<Vec> points;
  std::vector<double> values;
  std::vector<Vec> subgradients;
};

using SubgradientFn = std::function<Vec(const Vec&)>;

/// Hypodifferential built from a bundle: vertices
/// (f(x_j) - f(y) + <g_j, y - x_j>, g_j). When `subgradient` is given the
/// query point is appended before construction; otherwise every query point
/// must already be in the bundle (NormalizationError if not).
HypoFunction bundle_hypodiff(const Bundle& bundle, ValueFn f, SubgradientFn subgradient = {},
                             std::optional<double> lip_f = std::nullopt);

/// Checks the subgradient inequality between every pair of bundle entries;
/// returns the worst violation (<= 0 means consistent).
double bundle_violation(const Bundle& bundle);

/// Scaled upper-triangular vectorisation: diagonal entries as-is,
/// off-diagonal (i<j) times sqrt(2), so <vec(A), vec(B)> = trace(AB).
Vec sym_to_vec(const Mat& a);
Mat vec_to_sym(const Vec& v, int l);
int sym_order(Eigen::Index vec_len);  // l with l(l+1)/2 = vec_len, or throws

}  // namespace hypodiff
