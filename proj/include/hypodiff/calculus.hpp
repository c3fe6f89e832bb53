#pragma once

// Combinators building new HypoFunctions from old ones, with propagation of
// the metadata constants. Absent constants in any input stay absent.

#include "hypodiff/hypo.hpp"

#include <string>
#include <vector>

namespace hypodiff {

inline constexpr Eigen::Index kMinkowskiVertexCap = 4096;

/// Minkowski sum of scaled sets sum_i w_i * H_i (w_i >= 0). Vertex lists are
/// combined explicitly; if any part is an oracle the result is an oracle.
/// Throws VertexCapError when the explicit vertex product exceeds the cap.
Hypodifferential scaled_sum(const std::vector<Hypodifferential>& parts, const std::vector<double>& weights);

/// Same function, hypodifferential served through a support oracle. Use this
/// before Minkowski-type combinators when vertex counts would blow up.
HypoFunction as_oracle(const HypoFunction& f);

/// Replace the bound C of the metadata (e.g. a bound valid on a known box).
HypoFunction with_bound_C(const HypoFunction& f, double c);

HypoFunction conic_combination(const std::vector<HypoFunction>& fs, const std::vector<double>& lambdas);

HypoFunction finite_max(const std::vector<HypoFunction>& fs);

/// g(y) = f(A y + b) with A of shape dim(f) x m.
HypoFunction affine_precompose(const HypoFunction& f, const Mat& a, const Vec& b);

/// Smooth, convex, componentwise nondecreasing outer function g : R^n -> R.
struct SmoothOuter {
  std::string name;
  Eigen::Index n = 1;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::optional<double> lip_grad;    // Lipschitz constant of grad g
  std::optional<double> grad_bound;  // bound on |grad g| (Euclidean)
};

SmoothOuter outer_exp();
SmoothOuter outer_sum(Eigen::Index n);
SmoothOuter outer_logsumexp(Eigen::Index n);
SmoothOuter outer_identity();

HypoFunction outer_compose(const SmoothOuter& g, const std::vector<HypoFunction>& fs);

/// max{0, f}^p for p > 1.
HypoFunction positive_power(const HypoFunction& f, double p);

}  // namespace hypodiff
