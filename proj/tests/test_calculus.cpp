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

namespace {

HypoFunction linear(double s) {
  return atom_polyhedral(PolyhedralSpec{vec({0.0}), Mat::Constant(1, 1, s)});
}

HypoFunction square() { return atom_quadratic(Mat::Constant(1, 1, 2.0), vec({0.0}), 0.0); }

}  // namespace

TEST_CASE("conic combination examples") {
  const HypoFunction s = conic_combination({atom_abs(), square()}, {1.0, 1.0});
  CHECK(th::distance_to(s.hypo(scalar(1)), {el(0, {3}), el(-2, {1})}) < 1e-14);
  CHECK(s.value(scalar(1)) == 2.0);
  CHECK_FALSE(s.meta().exact);
  CHECK(*s.meta().lip_approx_L == 3.0);

  const HypoFunction first = conic_combination({atom_abs(), square()}, {1.0, 0.0});
  CHECK(th::distance_to(first.hypo(scalar(1)), {el(0, {1}), el(-2, {-1})}) < 1e-14);

  const HypoFunction twice = conic_combination({atom_abs()}, {2.0});
  CHECK(th::distance_to(twice.hypo(scalar(1)), {el(0, {2}), el(-4, {-2})}) < 1e-14);
  CHECK(twice.meta().exact);
  CHECK(*twice.meta().lip_map_K == 4.0);

  CHECK_THROWS_AS(conic_combination({atom_abs()}, {-1.0}), InputError);
  CHECK_THROWS_AS(conic_combination({atom_abs(), atom_dist_orthant(2)}, {1.0, 1.0}), DimensionError);
}

TEST_CASE("conic combination is additive in model values") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  PolyhedralSpec p{Vec::Random(4), Mat::Random(4, 2)};
  const HypoFunction a = atom_polyhedral(p), b = atom_norm_affine(Mat::Random(3, 2), Vec::Random(3));
  const HypoFunction s = conic_combination({a, b}, {0.7, 2.5});
  for (int t = 0; t < 100; ++t) {
    const Vec x = vec({3 * n01(rng), 3 * n01(rng)}), d = vec({n01(rng), n01(rng)});
    const double want = 0.7 * model_value(a.hypo(x), d) + 2.5 * model_value(b.hypo(x), d);
    CHECK(std::abs(model_value(s.hypo(x), d) - want) <= 1e-9);
  }
}

TEST_CASE("vertex cap directs to the oracle form") {
  PolyhedralSpec p{Vec::Zero(70), Mat::Random(70, 2)};
  p.offsets(0) = 1.0;
  const HypoFunction f = atom_polyhedral(p);
  const HypoFunction big = conic_combination({f, f}, {1.0, 1.0});
  CHECK_THROWS_AS(big.hypo(vec({0.1, 0.2})), VertexCapError);
  const HypoFunction ok = conic_combination({as_oracle(f), f}, {1.0, 1.0});
  const Vec x = vec({0.1, 0.2}), d = vec({0.5, -1.0});
  CHECK(std::abs(model_value(ok.hypo(x), d) - 2.0 * model_value(f.hypo(x), d)) < 1e-12);
}

TEST_CASE("finite max examples") {
  const HypoFunction m = finite_max({linear(1), linear(-1)});
  for (double x : {-2.0, -0.3, 0.0, 1.0, 4.5}) {
    CHECK(th::distance_to(m.hypo(scalar(x)), atom_abs().hypo(scalar(x)).elements()) <= 1e-12);
  }
  CHECK(m.meta().exact);
  CHECK(*m.meta().lip_map_K == 2.0 * 1.0 + 2.0);

  const HypoFunction one = finite_max({atom_abs()});
  CHECK(th::distance_to(one.hypo(scalar(1)), {el(0, {1}), el(-2, {-1})}) == 0.0);

  const HypoFunction q = square();
  const HypoFunction qq = finite_max({q, q});
  for (double d = -2; d <= 2; d += 0.5)
    CHECK(model_value(qq.hypo(scalar(0.3)), scalar(d)) == model_value(q.hypo(scalar(0.3)), scalar(d)));
}

TEST_CASE("finite max dominates the translated parts") {
  const HypoFunction a = atom_norm_affine(Mat::Identity(2, 2), vec({1.0, 0.0}));
  const HypoFunction b = atom_quadratic(Mat::Identity(2, 2), vec({0.0, 1.0}), -1.0);
  const HypoFunction m = finite_max({a, b});
  CHECK_FALSE(m.hypo(vec({0, 0})).is_polytope());
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 50; ++t) {
    const Vec x = vec({n01(rng), n01(rng)}), d = vec({n01(rng), n01(rng)});
    const double fm = m.value(x), mm = model_value(m.hypo(x), d);
    CHECK(mm >= a.value(x) - fm + model_value(a.hypo(x), d) - 1e-12);
    CHECK(mm >= b.value(x) - fm + model_value(b.hypo(x), d) - 1e-12);
    CHECK(validate(m.hypo(x)).valid);
  }
}

TEST_CASE("affine precomposition examples") {
  const HypoFunction g = affine_precompose(atom_abs(), Mat::Constant(1, 1, 2.0), vec({0.0}));
  CHECK(th::distance_to(g.hypo(scalar(1)), {el(0, {2}), el(-4, {-2})}) < 1e-14);
  CHECK(g.value(scalar(1)) == 2.0);
  CHECK(*g.meta().lip_approx_L == doctest::Approx(4.0));
  CHECK(*g.meta().lip_map_K == doctest::Approx(8.0));

  const HypoFunction id = affine_precompose(atom_abs(), Mat::Identity(1, 1), vec({0.0}));
  CHECK(th::distance_to(id.hypo(scalar(-0.7)), atom_abs().hypo(scalar(-0.7)).elements()) == 0.0);

  const HypoFunction zero = affine_precompose(atom_abs(), Mat::Zero(1, 2), vec({3.0}));
  const Hypodifferential h = zero.hypo(vec({1.0, -1.0}));
  for (const auto& e : h.elements()) CHECK(e.v.norm() == 0.0);
  CHECK(model_value(h, vec({5.0, 2.0})) == 0.0);

  CHECK_THROWS_AS(affine_precompose(atom_abs(), Mat::Identity(2, 2), vec({0.0, 0.0})), DimensionError);
}

TEST_CASE("affine precomposition of an oracle atom") {
  const Mat a = (Mat(2, 3) << 1, 0, 2, -1, 1, 0).finished();
  const HypoFunction f = atom_dist_orthant(2);
  const HypoFunction g = affine_precompose(f, a, vec({0.5, -1.0}));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 50; ++t) {
    const Vec y = vec({n01(rng), n01(rng), n01(rng)}), d = vec({n01(rng), n01(rng), n01(rng)});
    CHECK(std::abs(g.value(y + d) - g.value(y) - model_value(g.hypo(y), d)) <= 1e-12);
  }
}

TEST_CASE("outer composition examples") {
  const HypoFunction e = outer_compose(outer_exp(), {atom_abs()});
  const double ee = std::exp(1.0);
  CHECK(th::distance_to(e.hypo(scalar(1)), {el(0, {ee}), el(-2 * ee, {-ee})}) < 1e-14);
  CHECK_FALSE(e.meta().exact);
  CHECK(e.meta().consistent);

  const HypoFunction id = outer_compose(outer_identity(), {atom_abs()});
  CHECK(th::distance_to(id.hypo(scalar(2)), atom_abs().hypo(scalar(2)).elements()) == 0.0);

  const HypoFunction a = atom_polyhedral(PolyhedralSpec{vec({0, 1}), (Mat(2, 2) << 1, 0, 0, -1).finished()});
  const HypoFunction b = atom_quadratic(Mat::Identity(2, 2), vec({1, 0}), 0.0);
  const HypoFunction viaouter = outer_compose(outer_sum(2), {a, b});
  const HypoFunction viaconic = conic_combination({a, b}, {1.0, 1.0});
  CHECK(*viaouter.meta().lip_approx_L == doctest::Approx(std::sqrt(2.0) * 1.0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  for (int t = 0; t < 50; ++t) {
    const Vec x = vec({n01(rng), n01(rng)}), d = vec({n01(rng), n01(rng)});
    CHECK(std::abs(model_value(viaouter.hypo(x), d) - model_value(viaconic.hypo(x), d)) <= 1e-10);
  }
}

TEST_CASE("outer composition rejects decreasing outer functions") {
  SmoothOuter neg = outer_identity();
  neg.grad = [](const Vec&) { return Vec::Constant(1, -1.0); };
  const HypoFunction h = outer_compose(neg, {atom_abs()});
  CHECK_THROWS_AS(h.hypo(scalar(1)), MonotonicityError);
  CHECK_THROWS_AS(outer_compose(outer_sum(2), {atom_abs()}), DimensionError);
}

TEST_CASE("positive power examples") {
  const HypoFunction p = positive_power(atom_abs(), 2.0);
  CHECK(th::distance_to(p.hypo(scalar(1)), {el(0, {2}), el(-4, {-2})}) < 1e-14);
  const HypoFunction shifted = positive_power(atom_polyhedral(PolyhedralSpec{vec({-1.0}), Mat::Constant(1, 1, 1.0)}), 3.0);
  CHECK(th::distance_to(shifted.hypo(scalar(0.2)), {el(0, {0})}) == 0.0);  // f < 0
  CHECK(th::distance_to(shifted.hypo(scalar(1.0)), {el(0, {0})}) == 0.0);  // f = 0
  CHECK(shifted.value(scalar(0.2)) == 0.0);
  CHECK_THROWS_AS(positive_power(atom_abs(), 1.0), InputError);
}
