#include "catch_amalgamated.hpp"
#include "iglab/iglab.hpp"

using namespace iglab;

namespace {

SpacePtr quad_space() {
  std::vector<Coordinate> cs;
  cs.push_back(Coordinate{"y1", {"10", "11"}});
  cs.push_back(Coordinate{"y2", {"3", "5"}});
  cs.push_back(Coordinate{"y3", {"4", "6"}});
  cs.push_back(Coordinate{"y4", {"2", "9"}});
  return std::make_shared<const DataSpace>(std::move(cs));
}

SpacePtr two_binary() {
  std::vector<Coordinate> cs;
  cs.push_back(Coordinate{"a", {"0", "1"}});
  cs.push_back(Coordinate{"b", {"0", "1"}});
  return std::make_shared<const DataSpace>(std::move(cs));
}

}  // namespace

TEST_CASE("observed extraction keeps observed coordinates in order") {
  SpacePtr sp = quad_space();
  const ValueVec y{0, 0, 0, 0};  // labels (10,3,4,2)
  const Pattern m{0b1101, 4};    // second coordinate missing
  const ObservedRecord rec = extract_observed(*sp, y, m);
  CHECK(rec.k() == 3);
  CHECK(rec.observed == std::vector<int>{0, 0, 0});
  CHECK(render_observed(*sp, rec) == "(10,4,2)");
  CHECK(extract_missing(*sp, y, m) == std::vector<int>{0});
}

TEST_CASE("full pattern and empty pattern are the two extremes") {
  SpacePtr sp = quad_space();
  const ValueVec y{1, 0, 1, 0};
  const ObservedRecord full = extract_observed(*sp, y, Pattern{0b1111, 4});
  CHECK(full.k() == 4);
  CHECK(full.observed == std::vector<int>(y.begin(), y.end()));
  const ObservedRecord none = extract_observed(*sp, y, Pattern{0, 4});
  CHECK(none.k() == 0);
  CHECK(none.observed.empty());
  CHECK(compatible_indices(*sp, none).size() == sp->size());
}

TEST_CASE("enumeration strides make the last coordinate fastest") {
  SpacePtr sp = two_binary();
  REQUIRE(sp->size() == 4);
  CHECK(sp->index_of({0, 0}) == 0);
  CHECK(sp->index_of({0, 1}) == 1);
  CHECK(sp->index_of({1, 0}) == 2);
  CHECK(sp->index_of({1, 1}) == 3);
  for (std::size_t i = 0; i < sp->size(); ++i) CHECK(sp->index_of(sp->value_at(i)) == i);
}

TEST_CASE("compatibility is agreement on every observed coordinate") {
  SpacePtr sp = quad_space();
  const ValueVec y{0, 1, 0, 1};
  const Pattern m{0b0101, 4};  // y1, y3 observed
  const ObservedRecord rec = extract_observed(*sp, y, m);
  const std::vector<std::size_t> compat = compatible_indices(*sp, rec);
  // Two missing binary coordinates leave a fiber of four points.
  REQUIRE(compat.size() == 4);
  for (std::size_t idx : compat) {
    const ValueVec v = sp->value_at(idx);
    CHECK(v[0] == y[0]);
    CHECK(v[2] == y[2]);
    CHECK(compatible(*sp, v, rec));
  }
  // Points off the fiber are incompatible.
  std::size_t off = 0;
  for (std::size_t i = 0; i < sp->size(); ++i)
    if (!compatible(*sp, sp->value_at(i), rec)) ++off;
  CHECK(off == sp->size() - compat.size());
}

TEST_CASE("pattern helpers expose size and membership") {
  const Pattern m{0b1101, 4};
  CHECK(m.k() == 3);
  CHECK(m.observed(0));
  CHECK_FALSE(m.observed(1));
  CHECK(m.to_bools() == std::vector<int>{1, 0, 1, 1});
  SpacePtr sp = quad_space();
  CHECK(sp->n_patterns() == 16);
}

TEST_CASE("membership checks reject out-of-range values") {
  SpacePtr sp = two_binary();
  CHECK_THROWS_AS(sp->check_member(ValueVec{0, 2}), model_domain_error);
  CHECK_THROWS_AS(sp->check_member(ValueVec{0}), structural_error);
  CHECK_THROWS_AS(sp->check_pattern(Pattern{0, 3}), structural_error);
}

TEST_CASE("record_of reproduces extract_observed") {
  SpacePtr sp = quad_space();
  Realisation real;
  real.y = {0, 0, 0, 0};
  real.m = Pattern{0b1101, 4};
  const ObservedRecord a = record_of(*sp, real);
  const ObservedRecord b = extract_observed(*sp, real.y, real.m);
  CHECK(a.m.bits == b.m.bits);
  CHECK(a.observed == b.observed);
}

TEST_CASE("pattern splits index observed combinations consistently") {
  SpacePtr sp = quad_space();
  for (std::uint32_t bits = 0; bits < sp->n_patterns(); ++bits) {
    const Pattern m{bits, 4};
    const PatternSplit split(*sp, m);
    std::vector<int> seen(split.n_obs_combos(), 0);
    for (std::size_t i = 0; i < sp->size(); ++i) {
      const ValueVec v = sp->value_at(i);
      const std::size_t o = split.obs_index(v);
      REQUIRE(o < split.n_obs_combos());
      ++seen[o];
      // Same class exactly when the observed parts agree.
      const ObservedRecord rec = extract_observed(*sp, v, m);
      for (std::size_t j = 0; j < sp->size(); ++j) {
        const bool same = split.obs_index(sp->value_at(j)) == o;
        CHECK(same == compatible(*sp, sp->value_at(j), rec));
      }
    }
    // Classes partition the space evenly over the missing fiber.
    for (int c : seen) CHECK(c == static_cast<int>(sp->size() / split.n_obs_combos()));
  }
}
