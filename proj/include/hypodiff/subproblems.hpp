#pragma once

// Per-iteration subproblems of the descent methods: the minimum-norm element
// of a hypodifferential and the proximal step over a box.

#include "hypodiff/hypo.hpp"

#include <optional>

namespace hypodiff {

/// Axis-aligned box; infinite bounds allowed. The all-infinite box is R^d.
struct BoxConstraint {
  Vec lower;
  Vec upper;

  static BoxConstraint whole(Eigen::Index d);
  static BoxConstraint make(Vec lower, Vec upper);  // validates

  Eigen::Index dim() const { return lower.size(); }
  bool is_whole() const;
  bool contains(const Vec& x, double tol = 1e-12) const;
  Vec clamp(const Vec& x) const;
};

struct MinNormHypoResult {
  HypoElement element;
  double gap = 0.0;  // |p|^2 - min over the set of <p, q>
  long iterations = 0;
};

/// Element of minimal Euclidean norm. Vertex lists go to the polytope
/// solver; oracles use a fully corrective Frank-Wolfe loop. On
/// ConvergenceError the last iterate is a stacked element of the set.
MinNormHypoResult min_norm_hypo(const Hypodifferential& h, double tol = 1e-10);

struct ProximalOptions {
  double tol = 1e-10;
  std::optional<Vec> warm_start;  // dual weights from a previous solve, ignored if sizes differ
  long max_ascent_iters = 100000;
  Eigen::Index vertex_budget = 512;
  // The accelerated method linearises at extrapolated points that may lie outside Q.
  bool require_inside = true;
};

struct ProximalSolution {
  Vec z;
  geometry::SimplexWeights lambda;  // over the columns of `vertices`
  Mat vertices;                     // stacked (a, v) elements the dual ran over
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  long iterations = 0;
};

/// argmin over z in Q of  max (a + <v, z - x>) + (gamma/2)|z - x|^2, solved
/// through its dual over the simplex; the gap is a certified duality gap.
ProximalSolution proximal_step(const Hypodifferential& h, const Vec& x, double gamma, const BoxConstraint& q,
                               const ProximalOptions& opts = {});

ProximalSolution proximal_step(const HypoFunction& f, const Vec& x, double gamma, const BoxConstraint& q,
                               const ProximalOptions& opts = {});

}  // namespace hypodiff
