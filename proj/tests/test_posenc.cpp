#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "guardband/posenc.hpp"

using namespace guardband;
using Catch::Approx;

TEST_CASE("position encoding reference values") {
  const auto p0 = encode(0);
  REQUIRE(p0[0] == 0.0);
  REQUIRE(p0[1] == 1.0);

  const auto p1 = encode(1);
  REQUIRE(p1[0] == Approx(0.841471).margin(1e-6));
  REQUIRE(p1[1] == Approx(0.540302).margin(1e-6));

  const auto p2 = encode(2);
  REQUIRE(p2[0] == Approx(0.909297).margin(1e-6));
  REQUIRE(p2[1] == Approx(-0.416147).margin(1e-6));
}

TEST_CASE("encodings sit on the unit circle") {
  for (int pos = 0; pos < 10; ++pos) {
    const auto p = encode(pos);
    REQUIRE(p[0] * p[0] + p[1] * p[1] == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("rows used by both branches get distinct encodings") {
  // 6 rows is the longest sequence (component branch); all must be
  // separable well beyond the float noise floor.
  for (int a = 0; a < 6; ++a) {
    for (int b = a + 1; b < 6; ++b) {
      const auto pa = encode(a);
      const auto pb = encode(b);
      const double dist = std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
      REQUIRE(dist > 1e-3);
    }
  }
}

TEST_CASE("base is inert at dimensionality 2") {
  PositionalEncoding custom;
  custom.base = 50.0;
  const auto a = encode(3, custom);
  const auto b = encode(3);
  REQUIRE(a[0] == b[0]);
  REQUIRE(a[1] == b[1]);
}

TEST_CASE("encoding rejects bad arguments") {
  REQUIRE_THROWS_AS(encode(-1), std::domain_error);

  PositionalEncoding wrong_dim;
  wrong_dim.dim = 4;
  REQUIRE_THROWS_AS(encode(0, wrong_dim), std::domain_error);

  PositionalEncoding bad_base;
  bad_base.base = 1.0;
  REQUIRE_THROWS_AS(encode(0, bad_base), std::domain_error);
}
