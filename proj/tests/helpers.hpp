#pragma once

#include "hypodiff/hypo.hpp"

#include <initializer_list>
#include <vector>

namespace th {

using hypodiff::HypoElement;
using hypodiff::Hypodifferential;
using hypodiff::Mat;
using hypodiff::Vec;

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Vec scalar(double x) { return Vec::Constant(1, x); }

inline HypoElement el(double a, std::initializer_list<double> v) { return HypoElement{a, vec(v)}; }

/// Hausdorff distance between a vertex-list hypodifferential and a list of points.
inline double distance_to(const Hypodifferential& h, const std::vector<HypoElement>& want) {
  std::vector<Vec> pts;
  for (const auto& e : want) pts.push_back(e.stacked());
  return hypodiff::geometry::hausdorff_polytope(h.as_polytope().vertices, hypodiff::geometry::Polytope(pts));
}

/// Dense direction mesh for to_polytope in dimension d+1 (unit circle for d = 1,
/// random unit vectors otherwise, fixed seed).
std::vector<Vec> direction_mesh(Eigen::Index d, int count, unsigned long seed = 1);

}  // namespace th
