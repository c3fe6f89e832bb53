#pragma once

// Independent reference implementations used only by tests. They are slow and
// deliberately share no code with the library solvers.

#include "hypodiff/core.hpp"

#include <functional>
#include <vector>

namespace oracle {

using hypodiff::Mat;
using hypodiff::Vec;

/// Projection onto the unit simplex by bisection on the shift threshold.
Vec simplex_project_bisect(const Vec& y);

/// Minimum-norm point of co(columns of P) by enumerating every vertex subset
/// of size <= dim+1, solving the affine-hull problem, keeping feasible ones.
Vec min_norm_faces(const Mat& p);

/// Multilevel grid minimisation of a function over a box in R^1 or R^2.
/// Starts with `coarse` spacing and refines down to `fine`; after a level with
/// spacing h the search window is the box of radius radius(h) around the best
/// point (callers derive it from strong convexity so the minimiser stays inside).
Vec grid_minimize(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi,
                  double coarse, double fine, const std::function<double(double)>& radius);

/// Root of t^2 = (1 - t) a^2 in (0,1) by plain bisection.
double alpha_root_bisect(double a);

}  // namespace oracle
