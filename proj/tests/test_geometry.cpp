#include "doctest.h"
#include "oracles.hpp"

#include "hypodiff/geometry.hpp"

#include <cmath>
#include <random>

using namespace hypodiff;
using namespace hypodiff::geometry;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Polytope poly(std::initializer_list<std::initializer_list<double>> pts) {
  std::vector<Vec> vs;
  for (auto p : pts) vs.push_back(vec(p));
  return Polytope(vs);
}

Mat random_points(std::mt19937_64& rng, int dim, int m) {
  std::normal_distribution<double> n01;
  Mat p(dim, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < dim; ++i) p(i, j) = n01(rng);
  return p;
}

}  // namespace

TEST_CASE("simplex projection examples") {
  CHECK((simplex_project(vec({0.3, 0.7})).lambda - vec({0.3, 0.7})).norm() < 1e-15);
  CHECK((simplex_project(vec({0.8, 0.8})).lambda - vec({0.5, 0.5})).norm() < 1e-15);
  CHECK((simplex_project(vec({2.0, -1.0})).lambda - vec({1.0, 0.0})).norm() < 1e-15);
  CHECK_THROWS_AS(simplex_project(Vec()), DimensionError);
}

TEST_CASE("simplex projection agrees with bisection oracle") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 200; ++t) {
    Vec y(1 + t % 9);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = 3.0 * n01(rng);
    const Vec got = simplex_project(y).lambda;
    CHECK(got.minCoeff() >= 0.0);
    CHECK(std::abs(got.sum() - 1.0) <= 1e-12);
    CHECK((got - oracle::simplex_project_bisect(y)).norm() < 1e-10);
  }
}

TEST_CASE("simplex qp examples") {
  QpResult r = simplex_qp(Mat::Identity(2, 2), Vec::Zero(2));
  CHECK((r.weights.lambda - vec({0.5, 0.5})).norm() < 1e-9);
  CHECK(r.objective == doctest::Approx(0.25).epsilon(1e-12));
  Mat g(2, 2);
  g << 1, -1, -1, 5;
  r = simplex_qp(g, Vec::Zero(2));
  CHECK((r.weights.lambda - vec({0.75, 0.25})).norm() < 1e-9);
  CHECK(r.gap <= 1e-10);
  r = simplex_qp(Mat::Constant(1, 1, 3.0), vec({-2.0}));
  CHECK(r.weights.lambda(0) == 1.0);
  Mat bad(2, 2);
  bad << 1, 0, 0, -1;
  CHECK_THROWS_AS(simplex_qp(bad, Vec::Zero(2)), InputError);
}

TEST_CASE("min norm point examples") {
  MinNormResult r = min_norm_point(poly({{0, 1}, {-2, -1}}));
  CHECK((r.point - vec({-0.5, 0.5})).norm() < 1e-9);
  CHECK((r.weights.lambda - vec({0.75, 0.25})).norm() < 1e-9);
  r = min_norm_point(poly({{0, 1}, {0, -1}}));
  CHECK(r.point.norm() < 1e-9);
  r = min_norm_point(poly({{-3, 2}}));
  CHECK((r.point - vec({-3, 2})).norm() == 0.0);
}

TEST_CASE("min norm point matches face enumeration on random polytopes") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 100; ++t) {
    const int m = 1 + t % 6;
    Mat p = random_points(rng, 3, m);
    p.row(0).array() += 0.5 * (t % 3);  // keep some polytopes away from the origin
    const MinNormResult r = min_norm_point(Polytope(p));
    const Vec ref = oracle::min_norm_faces(p);
    CHECK((r.point - ref).norm() < 1e-8);
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const Vec q = p.col(j);
      CHECK(r.point.dot(q - r.point) >= -1e-10 * (1.0 + q.norm()));
    }
  }
}

TEST_CASE("min norm point on degenerate and larger polytopes") {
  std::mt19937_64 rng(7);
  // collinear and repeated points
  Mat p(2, 4);
  p << 1, 2, 3, 2, 1, 2, 3, 2;
  CHECK((min_norm_point(Polytope(p)).point - vec({1, 1})).norm() < 1e-9);
  // many points in a low dimensional space
  for (int t = 0; t < 20; ++t) {
    Mat q = random_points(rng, 4, 40);
    q.row(0).array() += 1.0;
    const MinNormResult r = min_norm_point(Polytope(q));
    for (Eigen::Index j = 0; j < q.cols(); ++j) CHECK(r.point.dot(Vec(q.col(j)) - r.point) >= -1e-9);
  }
}

TEST_CASE("point to polytope distance") {
  const Polytope p = poly({{0, 1}, {-2, -1}});
  CHECK(point_polytope_distance(vec({0, -1}), p) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(point_polytope_distance(vec({0, 1}), p) < 1e-12);
  CHECK(point_polytope_distance(vec({0, 0}), poly({{0, 1}, {0, -1}})) < 1e-12);
  CHECK_THROWS_AS(point_polytope_distance(vec({0, 0, 0}), p), DimensionError);
}

TEST_CASE("hausdorff distance") {
  const Polytope a = poly({{0, 1}, {-2, -1}});
  const Polytope b = poly({{0, 1}, {0, -1}});
  CHECK(hausdorff_polytope(a, b) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(hausdorff_polytope(a, a) < 1e-12);
  CHECK(hausdorff_polytope(a, a.translated(vec({-0.7, 0}))) == doctest::Approx(0.7).epsilon(1e-10));

  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const Polytope x(random_points(rng, 3, 4)), y(random_points(rng, 3, 5)), z(random_points(rng, 3, 3));
    const double xy = hausdorff_polytope(x, y), yx = hausdorff_polytope(y, x);
    CHECK(xy == yx);
    CHECK(hausdorff_polytope(x, z) <= xy + hausdorff_polytope(y, z) + 1e-9);
  }
}
