#pragma once

// Test problems with known minimisers, shared by the acceptance binary and
// the unit tests.

#include "hypodiff/atoms.hpp"
#include "hypodiff/calculus.hpp"

#include <random>
#include <string>
#include <vector>

namespace problems {

using hypodiff::HypoFunction;
using hypodiff::Mat;
using hypodiff::Vec;

struct Problem {
  std::string name;
  HypoFunction f;
  Vec x0;
  Vec x_star;
  double f_star = 0.0;
  double radius = 0.0;   // upper bound on the sublevel-set radius of x0
  double bound_c = 0.0;  // bound on |(a, v)| over the 1-inflated sublevel set (0 if unused)
};

Mat random_orthogonal(Eigen::Index d, std::mt19937_64& rng);

/// Sharp polyhedral function: a rotated cross-polytope of slopes active at x*
/// plus inactive pieces, 1 <= d <= max_dim, at most max_pieces pieces.
Problem random_polyhedral(std::mt19937_64& rng, int max_dim = 10, int max_pieces = 20);

/// abs with x0 = 1 and max{x, -2x} with x0 = 1.
Problem abs_problem();
Problem max_x_minus_2x_problem();

/// 0.5 (x - x*)ᵀQ(x - x*) + f* with Q positive definite, d <= max_dim.
Problem random_quadratic(std::mt19937_64& rng, int max_dim = 20);

/// Quadratic plus a sharp polyhedral term, both minimised at the same x*.
Problem random_quadratic_plus_polyhedral(std::mt19937_64& rng, int max_dim = 20);

/// Random combinator tree of depth <= max_depth over R^d with a declared L.
HypoFunction random_tree(std::mt19937_64& rng, int d, int max_depth = 3);

/// Every builtin atom with a small fixed instance; the bundle atom is built
/// from samples of a polyhedral function.
std::vector<HypoFunction> all_atoms();

}  // namespace problems
