#include "catch_amalgamated.hpp"
#include "iglab/iglab.hpp"

using namespace iglab;

namespace {

ModelBundle<Rational> load_model(const char* name) {
  const std::string path = std::string(IGLAB_REPO_DIR) + "/models/" + name;
  return load_bundle<Rational>(load_json_file(path), Tolerance{});
}

}  // namespace

TEST_CASE("the correct conditional reweights by the realised pattern") {
  const ModelBundle<Rational> b = load_model("theorem3_contrast.json");
  REQUIRE(b.real.has_value());
  const ObservedRecord& rec = b.real->rec;
  const Statistic t = statistic_identity();

  const auto correct = correct_conditional_dist(b.dm, b.mm, 0, 0, rec.m, t);
  const auto incorrect = potentially_incorrect_dist(b.dm, 0, rec.m, t);

  // Outcome order follows the space enumeration, so the sources align.
  REQUIRE(correct.outcomes == std::vector<std::string>{"(0)", "(1)"});
  REQUIRE(incorrect.outcomes == correct.outcomes);
  CHECK(correct.probs == std::vector<Rational>{Rational(5, 13), Rational(8, 13)});
  CHECK(incorrect.probs == std::vector<Rational>{Rational(1, 2), Rational(1, 2)});
  CHECK(distribution_tv(correct, incorrect) == Rational(3, 26));

  const auto rep = verify_theorem3(b.dm, b.mm, rec, t);
  CHECK_FALSE(rep.realised_mcar);
  REQUIRE(rep.cells.size() == 1);
  CHECK(rep.skipped == 0);
  REQUIRE(rep.cells[0].tv.has_value());
  CHECK(*rep.cells[0].tv == Rational(3, 26));

  // A statistic that forgets everything collapses the gap.
  const Statistic constant{"const", [](const DataSpace&, const ObservedRecord&) {
                             return std::string("*");
                           }};
  CHECK(distribution_tv(correct_conditional_dist(b.dm, b.mm, 0, 0, rec.m, constant),
                        potentially_incorrect_dist(b.dm, 0, rec.m, constant)) == Rational(0));
}

TEST_CASE("the distributions agree wherever the pattern probability is invariant") {
  SplitMix64 rng = stream_for(909, 1);
  const Statistic t = statistic_identity();
  int verified = 0;
  for (int i = 0; i < 300 && verified < 100; ++i) {
    const GeneratedBundle b = random_bundle(rng, MechanismKind::realised_mcar, 3);
    const RealisationInput real = realisation_input(*b.space, b.real);
    const auto rep = verify_theorem3(b.dm, b.mm, real.rec, t);
    REQUIRE(rep.realised_mcar);
    bool any_positive = false;
    for (const auto& cell : rep.cells) {
      if (!cell.positivity) continue;
      any_positive = true;
      REQUIRE(cell.tv.has_value());
      CHECK(*cell.tv == Rational(0));
    }
    if (any_positive) ++verified;
  }
  CHECK(verified == 100);
}

TEST_CASE("built-in statistics label the observed record") {
  const ModelBundle<Rational> b = load_model("quartet_panel.json");
  REQUIRE(b.real.has_value());
  const ObservedRecord& rec = b.real->rec;
  CHECK(statistic_identity().label(*b.space, rec) == "(10,4,2)");
  CHECK(statistic_sum_observed().label(*b.space, rec) == "16");
  CHECK(statistic_count_observed().label(*b.space, rec) == "3");
  CHECK(builtin_statistic("sum_observed").name == "sum_observed");
  CHECK_THROWS_AS(builtin_statistic("median"), usage_error);

  // Coordinates without numeric readings cannot be summed.
  std::vector<Coordinate> cs{Coordinate{"c", {"a", "b"}, {std::nullopt, std::nullopt}}};
  DataSpace letters(std::move(cs));
  Realisation real;
  real.y = {1};
  real.m = Pattern{0b1, 1};
  const ObservedRecord letter_rec = record_of(letters, real);
  CHECK_THROWS_AS(statistic_sum_observed().label(letters, letter_rec), validation_error);
  CHECK(statistic_count_observed().label(letters, letter_rec) == "1");
}

TEST_CASE("zero-probability cells are skipped, not failed") {
  std::vector<Coordinate> cs{Coordinate{"y", {"0", "1"}}};
  SpacePtr sp = std::make_shared<const DataSpace>(std::move(cs));
  DiscreteDataModel<Rational> dm;
  dm.space = sp;
  dm.theta_grid = {{"t0", {0.0}, {Rational(0)}}, {"t1", {0.5}, {Rational(1, 2)}}};
  dm.tables = {{Rational(1), Rational(0)}, {Rational(1, 2), Rational(1, 2)}};
  dm.validate();
  MissingnessModel<Rational> mm;
  mm.space = sp;
  mm.phi_grid = {{"p0", {0.0}, {Rational(0)}}};
  // Observation happens only at y = 1, which t0 never produces.
  mm.kernels = {{{Rational(1), Rational(0)}, {Rational(0), Rational(1)}}};
  mm.validate();
  const Pattern m{0b1, 1};

  const Statistic t = statistic_identity();
  CHECK_THROWS_AS(correct_conditional_dist(dm, mm, 0, 0, m, t), model_domain_error);
  CHECK_THROWS_WITH(correct_conditional_dist(dm, mm, 0, 0, m, t),
                    Catch::Matchers::ContainsSubstring("probability zero"));

  Realisation real;
  real.y = {1};
  real.m = m;
  const auto rep = verify_theorem3(dm, mm, record_of(*sp, real), t);
  CHECK_FALSE(rep.realised_mcar);
  REQUIRE(rep.cells.size() == 2);
  CHECK(rep.skipped == 1);
  CHECK_FALSE(rep.cells[0].positivity);
  CHECK_FALSE(rep.cells[0].tv.has_value());
  REQUIRE(rep.cells[1].tv.has_value());
  // Conditioning moves all mass to y = 1 while the bare law stays uniform.
  CHECK(*rep.cells[1].tv == Rational(1, 2));
}

TEST_CASE("conditioning on a covariate restores the equality fiber-wise") {
  std::vector<Coordinate> cs{Coordinate{"x", {"0", "1"}}, Coordinate{"y", {"0", "1"}}};
  SpacePtr sp = std::make_shared<const DataSpace>(std::move(cs));
  DiscreteDataModel<Rational> dm;
  dm.space = sp;
  dm.theta_grid = {{"t0", {0.0}, {Rational(0)}}};
  dm.tables = {{Rational(1, 8), Rational(3, 8), Rational(1, 4), Rational(1, 4)}};
  dm.validate();
  MissingnessModel<Rational> mm;
  mm.space = sp;
  mm.phi_grid = {{"p0", {0.0}, {Rational(0)}}};
  // Full observation probability 3/5 on the x=0 fiber, 2/5 on x=1; constant
  // in y, so the mechanism is invariant within fibers but not across them.
  std::vector<std::vector<Rational>> k(4, std::vector<Rational>(4, Rational(0)));
  for (std::size_t u = 0; u < sp->size(); ++u) {
    const Rational obs = sp->value_at(u)[0] == 0 ? Rational(3, 5) : Rational(2, 5);
    k[0b11][u] = obs;
    k[0b01][u] = Rational(1) - obs;
  }
  mm.kernels = {k};
  mm.validate();
  const JointParameterSpace jps(1, 1, true);

  ConditioningFunction cond;
  cond.level_names = {"0", "1"};
  cond.level_of = {0, 0, 1, 1};
  Realisation real;
  real.y = {1, 0};
  real.m = Pattern{0b01, 2};
  const RealisationInput ri = realisation_input(*sp, real);

  // Unconditionally the two laws differ at the realised pattern.
  const auto flat = verify_theorem3(dm, mm, ri.rec, statistic_identity());
  CHECK_FALSE(flat.realised_mcar);
  REQUIRE(flat.cells[0].tv.has_value());
  CHECK(*flat.cells[0].tv > Rational(0));

  const auto rep = verify_theorem3_given_x(dm, mm, jps, ri, cond, statistic_identity());
  CHECK(rep.realised_mcar);
  CHECK(rep.skipped == 0);
  for (const auto& cell : rep.cells) {
    REQUIRE(cell.tv.has_value());
    CHECK(*cell.tv == Rational(0));
  }

  const auto correct =
      correct_conditional_dist_given_x(dm, mm, jps, 0, 0, ri, cond, statistic_identity());
  REQUIRE(correct.x_level.has_value());
  CHECK(*correct.x_level == 1);
  Rational total(0);
  for (const Rational& p : correct.probs) total += p;
  CHECK(total == Rational(1));
}
