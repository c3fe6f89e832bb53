#include "doctest.h"
#include "helpers.hpp"

#include "hypodiff/atoms.hpp"
#include "hypodiff/calculus.hpp"

#include <cmath>
#include <random>

using namespace hypodiff;
using th::el;
using th::scalar;
using th::vec;

TEST_CASE("abs atom") {
  const HypoFunction f = atom_abs();
  CHECK(th::distance_to(f.hypo(scalar(1)), {el(0, {1}), el(-2, {-1})}) == 0.0);
  CHECK(th::distance_to(f.hypo(scalar(0)), {el(0, {1}), el(0, {-1})}) == 0.0);
  CHECK(th::distance_to(f.hypo(scalar(-2)), {el(-4, {1}), el(0, {-1})}) == 0.0);
  CHECK(geometry::min_norm_point(f.hypo(scalar(0)).as_polytope().vertices).point.norm() < 1e-12);
}

TEST_CASE("polyhedral atom") {
  const HypoFunction f = atom_polyhedral(PolyhedralSpec{vec({0, 0}), (Mat(2, 1) << 1, -2).finished()});
  CHECK(th::distance_to(f.hypo(scalar(1)), {el(0, {1}), el(-3, {-2})}) == 0.0);
  CHECK(*f.meta().lip_map_K == 4.0);

  const HypoFunction absp = atom_polyhedral(PolyhedralSpec{vec({0, 0}), (Mat(2, 1) << 1, -1).finished()});
  for (double x : {-3.0, -0.5, 0.0, 0.25, 2.0})
    CHECK(th::distance_to(absp.hypo(scalar(x)), atom_abs().hypo(scalar(x)).elements()) == 0.0);

  const HypoFunction aff = atom_polyhedral(PolyhedralSpec{vec({2}), (Mat(1, 2) << 1, 3).finished()});
  CHECK(th::distance_to(aff.hypo(vec({1, 1})), {el(0, {1, 3})}) == 0.0);
}

TEST_CASE("sublinear atom") {
  const HypoFunction f = atom_sublinear(geometry::Polytope(std::vector<Vec>{scalar(1), scalar(-1)}));
  for (double x : {-1.0, 0.0, 1.0})
    CHECK(th::distance_to(f.hypo(scalar(x)), atom_abs().hypo(scalar(x)).elements()) == 0.0);

  const HypoFunction lin = atom_sublinear(geometry::Polytope(std::vector<Vec>{vec({2, -1})}));
  CHECK(th::distance_to(lin.hypo(vec({4, 5})), {el(0, {2, -1})}) == 0.0);

  const HypoFunction sq = atom_sublinear(
      geometry::Polytope(std::vector<Vec>{vec({1, 1}), vec({1, -1}), vec({-1, 1}), vec({-1, -1})}));
  CHECK(sq.value(vec({1, 0})) == 1.0);
  std::vector<double> offs;
  for (const auto& e : sq.hypo(vec({1, 0})).elements()) offs.push_back(e.a);
  CHECK(offs == std::vector<double>{0, 0, -2, -2});
}

TEST_CASE("norm of an affine map atom") {
  const HypoFunction f = atom_norm_affine(Mat::Identity(1, 1), vec({0}));
  const Hypodifferential h = f.hypo(scalar(1));
  HypoElement e = h.support(1.0, scalar(0));
  CHECK(e.a == 0.0);
  CHECK(e.v(0) == 1.0);
  e = h.support(0.0, scalar(-1));
  CHECK(e.a == -2.0);
  CHECK(e.v(0) == -1.0);
  for (double x : {-2.0, 0.0, 0.5})
    for (double d = -3; d <= 3; d += 0.25)
      CHECK(std::abs(model_value(f.hypo(scalar(x)), scalar(d)) -
                     model_value(atom_abs().hypo(scalar(x)), scalar(d))) <= 1e-12);

  const Hypodifferential k = f.hypo(scalar(0));
  e = k.support(1.0, scalar(0));
  CHECK(e.a == 0.0);
  CHECK(e.v(0) == 0.0);
  CHECK(model_value(k, scalar(-2.5)) == 2.5);

  const HypoFunction g = atom_norm_affine(Mat::Identity(2, 2), vec({0, 0}));
  e = g.hypo(vec({1, 0})).support(0.0, vec({0, 1}));
  CHECK(e.a == -1.0);
  CHECK((e.v - vec({0, 1})).norm() == 0.0);
}

TEST_CASE("symmetric vectorisation preserves the trace inner product") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 20; ++t) {
    Mat a(3, 3), b(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        a(i, j) = n01(rng);
        b(i, j) = n01(rng);
      }
    a = 0.5 * (a + a.transpose()).eval();
    b = 0.5 * (b + b.transpose()).eval();
    CHECK(std::abs(sym_to_vec(a).dot(sym_to_vec(b)) - (a * b).trace()) < 1e-12);
    CHECK((vec_to_sym(sym_to_vec(a), 3) - a).norm() < 1e-14);
  }
  CHECK(sym_order(6) == 3);
  CHECK_THROWS_AS(sym_order(5), DimensionError);
}

TEST_CASE("max eigenvalue atom") {
  const HypoFunction f = atom_max_eigenvalue(2);
  const Vec a = sym_to_vec((Mat(2, 2) << 1, 0, 0, 0).finished());
  CHECK(f.value(a) == doctest::Approx(1.0).epsilon(1e-14));
  const HypoElement e = f.hypo(a).support(0.0, a);
  CHECK(std::abs(e.a) < 1e-14);
  CHECK((e.v - a).norm() < 1e-14);

  // at A = 0 every unit vector u gives the element (0, vec(uuᵀ)); the zero
  // element of the ball formulation is not a member (see README)
  const HypoElement z = f.hypo(Vec::Zero(3)).support(1.0, Vec::Zero(3));
  CHECK(z.a == 0.0);
  CHECK(z.v.norm() == doctest::Approx(1.0));

  const Vec b = sym_to_vec((Mat(2, 2) << 1, 0, 0, 3).finished());
  const Vec d = sym_to_vec((Mat(2, 2) << 0, 0, 0, -4).finished());
  CHECK(model_value(f.hypo(b), d) == doctest::Approx(-2.0).epsilon(1e-13));

  // negative definite matrix: normalisation still holds
  const Vec n = sym_to_vec((Mat(2, 2) << -3, 1, 1, -2).finished());
  CHECK(validate(f.hypo(n)).valid);
}

TEST_CASE("distance to the nonnegative orthant atom") {
  const HypoFunction f = atom_dist_orthant(2);
  CHECK(f.value(vec({-1, 1})) == 1.0);
  HypoElement e = f.hypo(vec({-1, 1})).support(1.0, Vec::Zero(2));
  CHECK(e.a == 0.0);
  CHECK((e.v - vec({-1, 0})).norm() == 0.0);

  e = f.hypo(vec({2, 0.5})).support(1.0, Vec::Zero(2));
  CHECK(e.a == 0.0);
  CHECK(e.v.norm() == 0.0);

  CHECK(f.value(vec({-3, -4})) == 5.0);
  e = f.hypo(vec({-3, -4})).support(1.0, Vec::Zero(2));
  CHECK(std::abs(e.a) < 1e-15);
  CHECK((e.v - vec({-0.6, -0.8})).norm() < 1e-15);
}

TEST_CASE("quadratic atom") {
  const HypoFunction f = atom_quadratic(Mat::Constant(1, 1, 2.0), vec({0}), 0.0);
  CHECK(th::distance_to(f.hypo(scalar(1)), {el(0, {2})}) == 0.0);
  CHECK(*f.meta().lip_approx_L == 2.0);
  for (double y = -3; y <= 3; y += 0.5) {
    const double resid = std::abs(y * y - 1 - 2 * (y - 1));
    CHECK(resid == doctest::Approx(0.5 * 2.0 * (y - 1) * (y - 1)));
  }
  const HypoFunction c = atom_quadratic(Mat::Zero(2, 2), vec({0, 0}), 4.0);
  CHECK(th::distance_to(c.hypo(vec({3, 1})), {el(0, {0, 0})}) == 0.0);
  const HypoFunction lin = atom_quadratic(Mat::Zero(2, 2), vec({1, -1}), 0.0);
  CHECK(lin.value(vec({1, 2}) + vec({0.5, 3})) - lin.value(vec({1, 2})) ==
        model_value(lin.hypo(vec({1, 2})), vec({0.5, 3})));
  CHECK_THROWS_AS(atom_quadratic((Mat(2, 2) << 1, 0, 0, -1).finished(), vec({0, 0}), 0.0), InputError);
}

TEST_CASE("bundle hypodifferential") {
  ValueFn absf = [](const Vec& x) { return std::abs(x(0)); };
  const Bundle b{{scalar(1), scalar(-0.5)}, {1.0, 0.5}, {scalar(1), scalar(-1)}};
  const HypoFunction f = bundle_hypodiff(b, absf);
  CHECK(th::distance_to(f.hypo(scalar(1)), {el(0, {1}), el(-2, {-1})}) < 1e-15);
  CHECK_THROWS_AS(f.hypo(scalar(0.3)), NormalizationError);

  const HypoFunction single = bundle_hypodiff(Bundle{{scalar(2)}, {2.0}, {scalar(1)}}, absf);
  CHECK(th::distance_to(single.hypo(scalar(2)), {el(0, {1})}) == 0.0);

  ValueFn sq = [](const Vec& x) { return x(0) * x(0); };
  const HypoFunction q = bundle_hypodiff(Bundle{{scalar(0), scalar(1)}, {0.0, 1.0}, {scalar(0), scalar(2)}}, sq);
  CHECK(th::distance_to(q.hypo(scalar(1)), {el(0, {2}), el(-1, {0})}) == 0.0);

  SubgradientFn g = [](const Vec& x) { return scalar(x(0) >= 0 ? 1.0 : -1.0); };
  const HypoFunction auto_y = bundle_hypodiff(b, absf, g);
  CHECK(validate(auto_y.hypo(scalar(0.3))).valid);

  const Bundle bad{{scalar(0), scalar(1)}, {0.0, 1.0}, {scalar(3), scalar(1)}};
  CHECK_THROWS_AS(bundle_hypodiff(bad, absf), InputError);
}
