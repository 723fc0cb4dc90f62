#include <cmath>

#include "catch_amalgamated.hpp"
#include "iglab/iglab.hpp"

using namespace iglab;

TEST_CASE("rational parsing accepts fractions and integers only") {
  CHECK(parse_rational("3/4") == Rational(3, 4));
  CHECK(parse_rational("-7/2") == Rational(-7, 2));
  CHECK(parse_rational("2") == Rational(2));
  CHECK(parse_rational("0") == Rational(0));
  CHECK(parse_rational("6/8") == Rational(3, 4));
  CHECK_THROWS_AS(parse_rational("0.5"), validation_error);
  CHECK_THROWS_AS(parse_rational(""), validation_error);
  CHECK_THROWS_AS(parse_rational("a/b"), validation_error);
  CHECK_THROWS_AS(parse_rational("1/0"), validation_error);
}

TEST_CASE("doubles lift into the exact field without loss") {
  CHECK(rational_from_double(0.375) == Rational(3, 8));
  CHECK(rational_from_double(1.0) == Rational(1));
  CHECK(rational_from_double(0.0) == Rational(0));
  CHECK(rational_from_double(-2.5) == Rational(-5, 2));
  // 0.1 is a dyadic once stored; the lift reproduces that dyadic exactly.
  for (double x : {0.1, 1.0 / 3.0, 1e-17, 123456.789, 5e300}) {
    CHECK(to_double(rational_from_double(x)) == x);
  }
}

TEST_CASE("exact comparisons ignore the tolerance argument") {
  CHECK(approx_equal(Rational(1, 3), Rational(1, 3), 0.0));
  CHECK_FALSE(approx_equal(Rational(1, 3), Rational(1, 3) + Rational(1, 1000000), 1.0));
}

TEST_CASE("float comparisons are relative to the larger magnitude") {
  CHECK(approx_equal(1.0, 1.0 + 5e-13, 1e-12));
  CHECK_FALSE(approx_equal(1.0, 1.1, 1e-12));
  CHECK(approx_equal(1e6, 1e6 + 1e-7, 1e-12));
  CHECK_FALSE(approx_equal(1e6, 1e6 + 1e-5, 1e-12));
  // Near zero the absolute floor of 1 applies.
  CHECK(approx_equal(0.0, 5e-13, 1e-12));
  CHECK_FALSE(approx_equal(0.0, 5e-12, 1e-12));
}

TEST_CASE("scalar formatting round-trips both fields") {
  CHECK(format_scalar(Rational(3, 4)) == "3/4");
  CHECK(format_scalar(Rational(2)) == "2");
  CHECK(format_scalar(Rational(-1, 3)) == "-1/3");
  for (double x : {0.1, 1.0 / 3.0, 2.0, 1e-300}) {
    CHECK(std::stod(format_scalar(x)) == x);
  }
}

TEST_CASE("scalar construction mirrors the arithmetic mode") {
  CHECK(scalar_from_rational<Rational>(Rational(2, 3)) == Rational(2, 3));
  CHECK(scalar_from_rational<double>(Rational(1, 4)) == 0.25);
  CHECK(rational_from_scalar(Rational(5, 7)) == Rational(5, 7));
  CHECK(rational_from_scalar(0.25) == Rational(1, 4));
  CHECK(is_zero(Rational(0)));
  CHECK_FALSE(is_zero(Rational(1, 100)));
  CHECK(is_zero(0.0));
}

TEST_CASE("total variation distance is half the absolute difference mass") {
  const std::vector<Rational> a{Rational(8, 13), Rational(5, 13)};
  const std::vector<Rational> b{Rational(1, 2), Rational(1, 2)};
  CHECK(total_variation(a, b) == Rational(3, 26));
  CHECK(total_variation(a, a) == Rational(0));
  CHECK_THROWS_AS(total_variation(a, std::vector<Rational>{Rational(1)}), structural_error);
}

TEST_CASE("counter-based streams are reproducible and distinct") {
  SplitMix64 a = stream_for(42, 7);
  SplitMix64 b = stream_for(42, 7);
  SplitMix64 c = stream_for(42, 8);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 16; ++i) {
    const std::uint64_t va = a.next(), vb = b.next(), vc = c.next();
    all_equal = all_equal && va == vb;
    any_diff = any_diff || va != vc;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("categorical draws respect point masses and support") {
  SplitMix64 rng = stream_for(1, 0);
  const std::vector<double> point{0.0, 1.0, 0.0};
  for (int i = 0; i < 50; ++i) CHECK(rng.categorical(point) == 1);
  const std::vector<double> mix{0.5, 0.5};
  int seen[2] = {0, 0};
  for (int i = 0; i < 200; ++i) ++seen[rng.categorical(mix)];
  CHECK(seen[0] > 0);
  CHECK(seen[1] > 0);
}

TEST_CASE("content digests are stable") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("a") == fnv1a64("a"));
  CHECK(fnv1a64("a") != fnv1a64("b"));
}
