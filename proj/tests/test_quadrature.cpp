#include <catch2/catch_amalgamated.hpp>

#include "feec/quadrature.hpp"

using namespace feec;

TEST_CASE("segment rules integrate monomials exactly") {
  for (int deg = 0; deg <= 12; ++deg) {
    QuadRule rule = segment_rule(deg);
    for (int p = 0; p <= deg; ++p) {
      double s = 0.0;
      for (const auto& node : rule) s += node.weight * std::pow(node.point[0], p);
      REQUIRE(s == Catch::Approx(1.0 / (p + 1)).epsilon(1e-13));
    }
  }
}

TEST_CASE("triangle rules integrate bivariate monomials exactly") {
  auto exact = [](int a, int b) {
    // int over {x,y>=0, x+y<=1} of x^a y^b = a! b! / (a+b+2)!
    double v = 1.0;
    for (int i = 2; i <= a; ++i) v *= i;
    for (int i = 2; i <= b; ++i) v *= i;
    for (int i = 2; i <= a + b + 2; ++i) v /= i;
    return v;
  };
  for (int deg = 0; deg <= 10; ++deg) {
    QuadRule rule = triangle_rule(deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        double s = 0.0;
        for (const auto& node : rule)
          s += node.weight * std::pow(node.point[0], a) * std::pow(node.point[1], b);
        REQUIRE(s == Catch::Approx(exact(a, b)).epsilon(1e-12));
      }
  }
}

TEST_CASE("rule weights are positive and sum to the reference volume") {
  for (int dim : {1, 2}) {
    QuadRule rule = simplex_rule(dim, 6);
    double total = 0.0;
    for (const auto& node : rule) {
      REQUIRE(node.weight > 0.0);
      total += node.weight;
    }
    REQUIRE(total == Catch::Approx(dim == 1 ? 1.0 : 0.5).epsilon(1e-14));
  }
}
