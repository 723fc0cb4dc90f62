#include "catch_amalgamated.hpp"
#include "iglab/iglab.hpp"

using namespace iglab;

namespace {

SpacePtr one_binary() {
  std::vector<Coordinate> cs{Coordinate{"y", {"0", "1"}}};
  return std::make_shared<const DataSpace>(std::move(cs));
}

DiscreteDataModel<Rational> one_coord_model(std::vector<std::vector<Rational>> tables) {
  DiscreteDataModel<Rational> dm;
  dm.space = one_binary();
  for (std::size_t t = 0; t < tables.size(); ++t)
    dm.theta_grid.push_back({"t" + std::to_string(t), {0.0}, {Rational(0)}});
  dm.tables = std::move(tables);
  dm.validate();
  return dm;
}

}  // namespace

TEST_CASE("two independent rows separate a binary missing part") {
  const auto dm = one_coord_model({{Rational(3, 4), Rational(1, 4)},
                                   {Rational(1, 2), Rational(1, 2)}});
  const auto fact = factorize_by_pattern(dm, Pattern{0b0, 1});
  REQUIRE(fact.split.n_obs_combos() == 1);
  REQUIRE(fact.split.n_mis_combos() == 2);
  // Nothing observed: the factor over the observed part is the total mass.
  CHECK(fact.f1[0][0] == Rational(1));
  CHECK(fact.f2[0][0] == std::vector<Rational>{Rational(3, 4), Rational(1, 4)});

  const auto rep = check_grid_completeness(fact, 0);
  CHECK(rep.n_theta_rows == 2);
  CHECK(rep.n_mis == 2);
  CHECK(rep.dropped_thetas == 0);
  CHECK(rep.rank == 2);
  CHECK(rep.grid_complete);
  CHECK_FALSE(rep.trivially_complete);
  CHECK_FALSE(rep.witness.has_value());
}

TEST_CASE("a one-point grid leaves a separating direction unreached") {
  const auto dm = one_coord_model({{Rational(3, 4), Rational(1, 4)}});
  const auto fact = factorize_by_pattern(dm, Pattern{0b0, 1});
  const auto rep = check_grid_completeness(fact, 0);
  CHECK(rep.rank == 1);
  CHECK_FALSE(rep.grid_complete);
  REQUIRE(rep.witness.has_value());
  const std::vector<Rational>& h = *rep.witness;
  REQUIRE(h.size() == 2);
  bool nonzero = false;
  for (const Rational& v : h) nonzero = nonzero || v != Rational(0);
  CHECK(nonzero);
  // The witness annihilates every conditional row of the family.
  for (std::size_t t = 0; t < fact.f1.size(); ++t) {
    Rational dot(0);
    for (std::size_t mi = 0; mi < h.size(); ++mi) dot += h[mi] * fact.f2[t][0][mi];
    CHECK(dot == Rational(0));
  }

  // Duplicated rows add nothing to the rank.
  const auto dup = one_coord_model({{Rational(3, 4), Rational(1, 4)},
                                    {Rational(3, 4), Rational(1, 4)}});
  const auto rep2 = check_grid_completeness(factorize_by_pattern(dup, Pattern{0b0, 1}), 0);
  CHECK(rep2.rank == 1);
  CHECK_FALSE(rep2.grid_complete);
}

TEST_CASE("a fully observed pattern is trivially complete") {
  const auto dm = one_coord_model({{Rational(3, 4), Rational(1, 4)}});
  const auto fact = factorize_by_pattern(dm, Pattern{0b1, 1});
  CHECK(fact.split.mis_empty());
  const auto rep = check_grid_completeness(fact, 0);
  CHECK(rep.trivially_complete);
  CHECK(rep.grid_complete);
}

TEST_CASE("theta points with no mass on the observed value drop out") {
  std::vector<Coordinate> cs{Coordinate{"x", {"0", "1"}}, Coordinate{"y", {"0", "1"}}};
  SpacePtr sp = std::make_shared<const DataSpace>(std::move(cs));
  DiscreteDataModel<Rational> dm;
  dm.space = sp;
  dm.theta_grid = {{"t0", {0.0}, {Rational(0)}}, {"t1", {0.0}, {Rational(0)}}};
  // t0 lives on the x=1 fiber only; t1 is uniform.
  dm.tables = {{Rational(0), Rational(0), Rational(1, 2), Rational(1, 2)},
               {Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)}};
  dm.validate();
  const Pattern m{0b01, 2};  // x observed, y missing
  const auto fact = factorize_by_pattern(dm, m);
  REQUIRE(fact.split.n_obs_combos() == 2);

  const std::size_t at_x0 = fact.split.obs_index({0, 0});
  const auto rep = check_grid_completeness(fact, at_x0);
  CHECK(rep.dropped_thetas == 1);
  CHECK(rep.n_theta_rows == 1);
  CHECK(rep.rank == 1);
  CHECK_FALSE(rep.grid_complete);

  const std::size_t at_x1 = fact.split.obs_index({1, 0});
  CHECK(check_grid_completeness(fact, at_x1).dropped_thetas == 0);

  // When every theta point drops, the conditional family is empty.
  dm.tables[1] = dm.tables[0];
  const auto all_zero = factorize_by_pattern(dm, m);
  CHECK_THROWS_AS(check_grid_completeness(all_zero, at_x0), model_domain_error);
}

TEST_CASE("the equivalence holds across generated mechanisms") {
  SplitMix64 rng = stream_for(717, 4);
  int checked = 0, invariant_side = 0, variant_side = 0;
  for (int i = 0; i < 600 && checked < 100; ++i) {
    const GeneratedBundle b = random_bundle(rng, MechanismKind::free, 3);
    const RealisationInput real = realisation_input(*b.space, b.real);
    AppendixReport<Rational> rep;
    // A violation with hypotheses in force would throw; absence of a throw
    // is the equivalence claim on this instance.
    rep = verify_appendix_theorem(b.dm, b.mm, b.jps, real, Tolerance{});
    if (!rep.hypotheses_hold()) continue;
    ++checked;
    CHECK(rep.biconditional_holds());
    if (rep.realised_mar) {
      ++invariant_side;
      CHECK(rep.q_matches_kernel);
      for (int p = 0; p < b.mm.n_phi(); ++p) {
        REQUIRE(rep.q_values[static_cast<std::size_t>(p)].has_value());
        const std::size_t y_idx = b.space->index_of(real.require_full("test"));
        CHECK(*rep.q_values[static_cast<std::size_t>(p)] == b.mm.g(p, real.rec.m, y_idx));
      }
    } else {
      ++variant_side;
      CHECK_FALSE(rep.proportional_all_phi);
      CHECK(rep.proportionality_witness.has_value());
    }
  }
  CHECK(checked == 100);
  CHECK(invariant_side > 0);
  CHECK(variant_side > 0);
}

TEST_CASE("proportionality without invariance needs an incomplete family") {
  const SearchInstance inst = incomplete_family_instance();
  const RealisationInput real = realisation_input(*inst.bundle.space, inst.bundle.real);
  const auto rep =
      verify_appendix_theorem(inst.bundle.dm, inst.bundle.mm, inst.bundle.jps, real, Tolerance{});
  CHECK_FALSE(rep.realised_mar);
  CHECK(rep.proportional_all_phi);
  CHECK_FALSE(rep.grid_complete);
  CHECK_FALSE(rep.hypotheses_hold());
  CHECK_FALSE(rep.biconditional_holds());
  REQUIRE(rep.completeness.witness.has_value());
}

TEST_CASE("the committed panel passes the necessity check end to end") {
  const std::string path = std::string(IGLAB_REPO_DIR) + "/models/quartet_panel.json";
  const ModelBundle<Rational> b = load_bundle<Rational>(load_json_file(path), Tolerance{});
  REQUIRE(b.real.has_value());
  const auto rep = verify_appendix_theorem(b.dm, b.mm, b.jps, *b.real, Tolerance{});
  CHECK(rep.hypotheses_hold());
  CHECK(rep.realised_mar);
  CHECK(rep.proportional_all_phi);
  CHECK(rep.q_matches_kernel);
  // The constant of proportionality is the kernel value on the compatible set.
  REQUIRE(rep.q_values.size() == static_cast<std::size_t>(b.mm.n_phi()));
  for (const auto& q : rep.q_values) REQUIRE(q.has_value());
  CHECK(*rep.q_values[0] == Rational(1, 4));
}
