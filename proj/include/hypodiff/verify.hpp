#pragma once

// Sampling checks of the defining properties of a hypodifferential map, and
// certification of solver traces against the theoretical rate envelopes.

#include "hypodiff/solvers.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace hypodiff::verify {

struct CheckReport {
  std::string name;
  bool passed = true;  // worst_violation <= tolerance
  double worst_violation = -std::numeric_limits<double>::infinity();
  Vec witness;  // input of the worst violation; pairs are stacked (x, y)
  long samples = 0;
  double tolerance = 0.0;
  std::string note;
};

struct SampleOptions {
  long samples = 1000;
  std::uint64_t seed = 1;
};

/// Uniform sample from a bounded box.
Vec sample_box(const BoxConstraint& box, std::mt19937_64& rng);

/// Deterministic unit weights in R^{d+1} for inner polytope approximations
/// of support oracles (a circle grid when d = 1).
std::vector<Vec> direction_mesh(Eigen::Index d, int count, std::uint64_t seed);

std::vector<double> default_alphas();  // 1e-1, 1e-2, ..., 1e-7

/// e(α) = |f(x+αd) - f(x) - Φ(αd)| / α over a decreasing grid. Exact maps
/// must have raw residual <= 1e-12·scale; with L declared the residual must
/// stay under (L/2)α²|d|²; otherwise the log-log slope of e must be >= 1/2.
CheckReport fd_check(const HypoFunction& f, const Vec& x, const Vec& d,
                     const std::vector<double>& alphas = default_alphas());
/// fd_check at random x in the box along random unit directions.
CheckReport fd_check(const HypoFunction& f, const BoxConstraint& box, const SampleOptions& opts = {});

/// f(y) - f(x) >= Φ_x(y - x) at sampled pairs; tolerance 1e-10 relative.
CheckReport consistency_check(const HypoFunction& f, const BoxConstraint& box, const SampleOptions& opts = {});

/// |f(y) - f(x) - Φ_x(y - x)| <= (L/2)|y - x|^2 at sampled pairs.
CheckReport lip_approx_check(const HypoFunction& f, const BoxConstraint& box, double lip_l,
                             const SampleOptions& opts = {});

struct MeshOptions {
  int coarse = 48;  // directions for the reported approximation
  int fine = 192;   // directions for the slack estimate
};

/// d_PH(d̲f(x), d̲f(y)) <= K|x - y| at sampled pairs. Oracle sets are replaced
/// by inner polytopes; the slack between the coarse and fine mesh is added
/// to the allowance and reported. For consistent maps also checks the
/// one-sided bound f(y) - f(x) - Φ_x(y - x) <= K|y - x|(1 + |y - x|).
CheckReport lip_map_check(const HypoFunction& f, const BoxConstraint& box, double lip_k,
                          const SampleOptions& opts = {}, const MeshOptions& mesh = {});
/// Same, with pairs drawn from a finite point set (e.g. a bundle).
CheckReport lip_map_check(const HypoFunction& f, const std::vector<Vec>& points, double lip_k,
                          const SampleOptions& opts = {}, const MeshOptions& mesh = {});

struct RateConstants {
  std::optional<double> f_star;
  std::optional<double> lip_l;   // defaults to the trace's L for the accelerated method
  std::optional<double> radius;  // sublevel-set radius R
  std::optional<double> alpha;   // constant step; defaults to the first recorded step
  std::optional<double> gamma0;  // defaults to the trace's gamma0
  std::optional<Vec> x_star;
  double slack_rel = 1e-8;  // allowance slack_rel * (1 + Δ0)
};

/// Max over k of Δ_k - bound_k for the method's envelope:
///  mhd_constant     Δ0(1+R)^2 / ((1+R)^2 + Δ0(α - Lα²/2)k), the per-step
///                   descent inequality and Δ_k <= (1+R) dist0_k;
///  mhd_exact_step,
///  mhd_line_search  Δ_k <= Δ0 q^k with q = 1 - 1/(1+R), dist0_k <= Δ_k - Δ_{k+1}
///                   and Δ_k <= (1+R) dist0_k;
///  aphd             4L/(2√L + k√γ0)^2 (Δ0 + (γ0/2)|x0 - x*|^2);
///  phd              monotone values.
/// Throws InputError when a required constant is missing.
CheckReport rate_certify(const SolverTrace& trace, const std::string& method, const RateConstants& c);

/// The closed-form distance envelope dist0_k <= Δ0(1 - q)q^k for exact steps.
CheckReport exact_dist_envelope_check(const SolverTrace& trace, const RateConstants& c);

/// |α_{k+1}^2 - (1 - α_{k+1})α_k^2| over an accelerated trace.
CheckReport alpha_recurrence_check(const SolverTrace& trace, double tol = 1e-12);

/// dist(0, d̲f(x)) <= tol.
CheckReport optimality_check(const HypoFunction& f, const Vec& x, double tol = 1e-9);

}  // namespace hypodiff::verify
