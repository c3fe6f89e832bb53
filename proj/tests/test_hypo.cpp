#include "doctest.h"

#include "hypodiff/hypo.hpp"

#include <cmath>
#include <random>

using namespace hypodiff;

namespace {

HypoElement el(double a, double v) { return HypoElement{a, Vec::Constant(1, v)}; }

Hypodifferential abs_at_one() { return Hypodifferential::polytope({el(0, 1), el(-2, -1)}); }

}  // namespace

TEST_CASE("model value of the abs hypodifferential at 1") {
  const Hypodifferential h = abs_at_one();
  CHECK(model_value(h, Vec::Constant(1, -1.0)) == -1.0);
  CHECK(model_value(h, Vec::Constant(1, 0.0)) == 0.0);
  CHECK(model_value(h, Vec::Constant(1, 1.0)) == 1.0);
  CHECK_THROWS_AS(model_value(h, Vec::Zero(2)), DimensionError);
}

TEST_CASE("model value is convex in the direction") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<HypoElement> els;
  els.push_back(HypoElement{0.0, Vec::Random(3)});
  for (int i = 0; i < 6; ++i) els.push_back(HypoElement{-std::abs(n01(rng)), Vec::Random(3)});
  const Hypodifferential h = Hypodifferential::polytope(els);
  CHECK(std::abs(model_value(h, Vec::Zero(3))) <= 1e-9);
  for (int t = 0; t < 100; ++t) {
    Vec d1(3), d2(3);
    for (int i = 0; i < 3; ++i) {
      d1(i) = n01(rng);
      d2(i) = n01(rng);
    }
    const double th = std::uniform_real_distribution<double>(0, 1)(rng);
    CHECK(model_value(h, th * d1 + (1 - th) * d2) <=
          th * model_value(h, d1) + (1 - th) * model_value(h, d2) + 1e-10);
  }
}

TEST_CASE("validate reports normalization violations") {
  CHECK(validate(abs_at_one()).valid);
  ValidationReport r = validate(Hypodifferential::polytope({el(-1, 1), el(-2, -1)}));
  CHECK_FALSE(r.valid);
  CHECK(r.max_a == -1.0);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].find("max a = -1") != std::string::npos);
  r = validate(Hypodifferential::polytope({el(0.5, 1)}));
  CHECK_FALSE(r.valid);
  CHECK(r.violations[0].find("a = 0.5 > 0") != std::string::npos);
}

TEST_CASE("clamping only touches tiny positive offsets") {
  const Hypodifferential h = Hypodifferential::polytope({el(5e-10, 1), el(-1, 0)}, true);
  CHECK(h.elements()[0].a == 0.0);
  const Hypodifferential k = Hypodifferential::polytope({el(1e-3, 1)}, true);
  CHECK(k.elements()[0].a == 1e-3);
}

TEST_CASE("oracle representation and inner polytope") {
  // abs at x = 1 as an oracle over |s| <= 1: element (s*x - |x|, s)
  SupportOracle sup = [](double wa, const Vec& wv) {
    const double c = wa * 1.0 + wv(0);
    const double s = c > 0 ? 1.0 : (c < 0 ? -1.0 : 0.0);
    return HypoElement{s - 1.0, Vec::Constant(1, s)};
  };
  const Hypodifferential h = Hypodifferential::oracle(1, sup, el(0, 1));
  CHECK(validate(h).valid);
  const std::vector<Vec> dirs = {(Vec(2) << 1, 0).finished(), (Vec(2) << 0, 1).finished(),
                                 (Vec(2) << 0, -1).finished()};
  const geometry::Polytope p = to_polytope(h, dirs);
  CHECK(p.size() == 2);
  CHECK(geometry::hausdorff_polytope(p, abs_at_one().as_polytope().vertices) < 1e-12);
  const Hypodifferential inner = Hypodifferential::polytope(p);
  for (double d = -3; d <= 3; d += 0.25) {
    CHECK(model_value(h, Vec::Constant(1, d)) >= model_value(inner, Vec::Constant(1, d)));
  }
  CHECK(to_polytope(abs_at_one(), {}).size() == 2);
}
