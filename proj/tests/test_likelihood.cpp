#include "catch_amalgamated.hpp"
#include "iglab/iglab.hpp"

using namespace iglab;

namespace {

ModelBundle<Rational> canonical_two_unit() {
  const std::string path = std::string(IGLAB_REPO_DIR) + "/models/two_unit_mcar.json";
  return load_bundle<Rational>(load_json_file(path), Tolerance{});
}

}  // namespace

TEST_CASE("likelihood objects agree with direct fiber sums") {
  SplitMix64 rng = stream_for(311, 0);
  for (int i = 0; i < 50; ++i) {
    const GeneratedBundle b = random_bundle(rng, MechanismKind::free, 3);
    const ObservedRecord rec = record_of(*b.space, b.real);
    const std::vector<std::size_t> compat = compatible_indices(*b.space, rec);

    const GridFunction<Rational> l2 = ignoring_likelihood(b.dm, rec);
    REQUIRE(l2.size() == static_cast<std::size_t>(b.dm.n_theta()));
    for (int t = 0; t < b.dm.n_theta(); ++t) {
      Rational direct(0);
      for (std::size_t y : compat) direct += b.dm.f(t, y);
      CHECK(l2.values[static_cast<std::size_t>(t)] == direct);
    }

    const GridFunction<Rational> l1 = joint_likelihood(b.dm, b.mm, b.jps, rec);
    std::size_t i1 = 0;
    for (const auto& [t, p] : b.jps.members()) {
      Rational direct(0);
      for (std::size_t y : compat) direct += b.dm.f(t, y) * b.mm.g(p, rec.m, y);
      CHECK(l1.values[i1] == direct);
      ++i1;
    }

    // The profile is the phi-wise maximum of the joint object.
    const GridFunction<Rational> l4 = profile_likelihood(b.dm, b.mm, b.jps, rec);
    for (int t = 0; t < b.dm.n_theta(); ++t) {
      Rational best(0);
      bool any = false;
      std::size_t i = 0;
      for (const auto& [tt, p] : b.jps.members()) {
        if (tt == t) {
          if (!any || l1.values[i] > best) best = l1.values[i];
          any = true;
        }
        ++i;
      }
      REQUIRE(any);
      CHECK(l4.values[static_cast<std::size_t>(t)] == best);
    }

    // Fixed-phi columns are slices of the joint object.
    for (int p = 0; p < b.mm.n_phi(); ++p) {
      const GridFunction<Rational> l3 = fixed_phi_likelihood(b.dm, b.mm, b.jps, rec, p);
      for (int t = 0; t < b.dm.n_theta(); ++t) {
        Rational direct(0);
        for (std::size_t y : compat) direct += b.dm.f(t, y) * b.mm.g(p, rec.m, y);
        CHECK(l3.values[static_cast<std::size_t>(t)] == direct);
      }
    }

    const RealisationInput real = realisation_input(*b.space, b.real);
    const GridFunction<Rational> l5 = mechanism_factor(b.mm, real);
    for (int p = 0; p < b.mm.n_phi(); ++p)
      CHECK(l5.values[static_cast<std::size_t>(p)] ==
            b.mm.g(p, rec.m, b.space->index_of(b.real.y)));
  }
}

TEST_CASE("realised invariance factorises the joint likelihood on 100 instances") {
  SplitMix64 rng = stream_for(555, 1);
  int verified = 0;
  for (int i = 0; i < 400 && verified < 100; ++i) {
    const GeneratedBundle b = random_bundle(rng, MechanismKind::realised_mar, 3);
    const RealisationInput real = realisation_input(*b.space, b.real);
    const Theorem1Report<Rational> rep = verify_theorem1(b.dm, b.mm, b.jps, real, Tolerance{});
    if (!rep.hypotheses_hold()) continue;
    ++verified;
    CHECK(rep.conclusions_hold());
    CHECK(rep.factorises);
    CHECK(rep.proportional_profile);
    for (char c : rep.proportional_fixed_phi) CHECK(c == 1);

    // Independent identity check: L1(theta,phi) = g(m|y) * L2(theta) with the
    // mechanism factor read off the realisation.
    const ObservedRecord rec = real.rec;
    const GridFunction<Rational> l1 = joint_likelihood(b.dm, b.mm, b.jps, rec);
    const GridFunction<Rational> l2 = ignoring_likelihood(b.dm, rec);
    std::size_t idx = 0;
    for (const auto& [t, p] : b.jps.members()) {
      const Rational g = b.mm.g(p, rec.m, b.space->index_of(b.real.y));
      CHECK(l1.values[idx] == g * l2.values[static_cast<std::size_t>(t)]);
      ++idx;
    }
    // Reported constants are the kernel values on the realised record.
    for (int p = 0; p < b.mm.n_phi(); ++p) {
      if (!rep.constants[static_cast<std::size_t>(p)]) continue;
      CHECK(*rep.constants[static_cast<std::size_t>(p)] ==
            b.mm.g(p, rec.m, b.space->index_of(b.real.y)));
    }
  }
  CHECK(verified == 100);
}

TEST_CASE("the canonical two-unit instance reports the quarter constant") {
  const ModelBundle<Rational> b = canonical_two_unit();
  REQUIRE(b.real.has_value());
  const Theorem1Report<Rational> rep =
      verify_theorem1(b.dm, b.mm, b.jps, *b.real, Tolerance{});
  CHECK(rep.hypotheses_hold());
  CHECK(rep.conclusions_hold());
  // phi = 1/2 sits at grid index 1; the mechanism factor there is 1/4.
  REQUIRE(rep.constants.size() == 3);
  REQUIRE(rep.constants[1].has_value());
  CHECK(*rep.constants[1] == Rational(1, 4));
  REQUIRE(rep.profile_constant.has_value());
  CHECK(*rep.profile_constant == Rational(1, 4));

  const GridFunction<Rational> l2 = ignoring_likelihood(b.dm, b.real->rec);
  CHECK(l2.values == std::vector<Rational>{Rational(1, 4), Rational(1, 2), Rational(3, 4)});
  const GridFunction<Rational> l5 = mechanism_factor(b.mm, *b.real);
  CHECK(l5.values == std::vector<Rational>{Rational(3, 16), Rational(1, 4), Rational(3, 16)});
  const GridFunction<Rational> l4 = profile_likelihood(b.dm, b.mm, b.jps, b.real->rec);
  CHECK(l4.values == std::vector<Rational>{Rational(1, 16), Rational(1, 8), Rational(3, 16)});
}

TEST_CASE("a non-invariant realisation fails the hypotheses without a violation") {
  std::vector<Coordinate> cs{Coordinate{"y", {"0", "1"}}};
  SpacePtr sp = std::make_shared<const DataSpace>(std::move(cs));
  DiscreteDataModel<Rational> dm;
  dm.space = sp;
  dm.theta_grid = {{"t0", {0.25}, {Rational(1, 4)}}, {"t1", {0.75}, {Rational(3, 4)}}};
  dm.tables = {{Rational(3, 4), Rational(1, 4)}, {Rational(1, 4), Rational(3, 4)}};
  MissingnessModel<Rational> mm;
  mm.space = sp;
  mm.phi_grid = {{"p0", {0.0}, {Rational(0)}}};
  mm.kernels = {{{Rational(1, 2), Rational(1, 5)}, {Rational(1, 2), Rational(4, 5)}}};
  const JointParameterSpace jps = JointParameterSpace::full_product(2, 1);
  Realisation real;
  real.y = {0};
  real.m = Pattern{0, 1};  // nothing observed; the whole space is compatible
  const RealisationInput ri = realisation_input(*sp, real);
  const Theorem1Report<Rational> rep = verify_theorem1(dm, mm, jps, ri, Tolerance{});
  CHECK_FALSE(rep.realised_mar);
  CHECK_FALSE(rep.hypotheses_hold());
}

TEST_CASE("likelihood intervals are relative to the maximum") {
  GridFunction<Rational> gf;
  gf.push(GridPoint{0, -1}, "t0", Rational(1, 4));
  gf.push(GridPoint{1, -1}, "t1", Rational(1, 2));
  gf.push(GridPoint{2, -1}, "t2", Rational(3, 4));
  const std::vector<std::size_t> all = likelihood_interval(gf, Rational(1, 15));
  CHECK(all == std::vector<std::size_t>{0, 1, 2});
  const std::vector<std::size_t> top = likelihood_interval(gf, Rational(1, 2));
  CHECK(top == std::vector<std::size_t>{1, 2});
  GridFunction<Rational> zero;
  zero.push(GridPoint{0, -1}, "t0", Rational(0));
  CHECK_THROWS_AS(likelihood_interval(zero, Rational(1, 15)), model_domain_error);
}

TEST_CASE("grid argmax resolves ties toward the smallest index") {
  GridFunction<Rational> gf;
  gf.push(GridPoint{0, -1}, "a", Rational(1, 2));
  gf.push(GridPoint{1, -1}, "b", Rational(1, 2));
  gf.push(GridPoint{2, -1}, "c", Rational(1, 4));
  CHECK(gf.argmax() == 0);
}

TEST_CASE("conditioning restricts and renormalizes the data model") {
  std::vector<Coordinate> cs{Coordinate{"x", {"0", "1"}}, Coordinate{"y", {"0", "1"}}};
  SpacePtr sp = std::make_shared<const DataSpace>(std::move(cs));
  DiscreteDataModel<Rational> dm;
  dm.space = sp;
  dm.theta_grid = {{"t0", {0.0}, {Rational(0)}}};
  dm.tables = {{Rational(1, 8), Rational(3, 8), Rational(1, 4), Rational(1, 4)}};
  ConditioningFunction cond;
  cond.level_names = {"0", "1"};
  cond.level_of = {0, 0, 1, 1};
  const DiscreteDataModel<Rational> c0 = conditional_data_model(dm, cond, 0);
  CHECK(c0.f(0, 0) == Rational(1, 4));
  CHECK(c0.f(0, 1) == Rational(3, 4));
  CHECK(c0.f(0, 2) == Rational(0));
  CHECK(c0.f(0, 3) == Rational(0));
  const DiscreteDataModel<Rational> c1 = conditional_data_model(dm, cond, 1);
  CHECK(c1.f(0, 2) == Rational(1, 2));
  CHECK(c1.f(0, 3) == Rational(1, 2));
}
