#include <cmath>

#include "catch_amalgamated.hpp"
#include "iglab/iglab.hpp"

using namespace iglab;

namespace {

// One Bernoulli coordinate, three grid points, observation probability 3/4
// regardless of the value.  Small enough that the repeated-sampling law has
// a short closed form.
SimulationPlan<double> bernoulli_plan() {
  std::vector<Coordinate> cs{Coordinate{"y", {"0", "1"}, {0.0, 1.0}}};
  SpacePtr sp = std::make_shared<const DataSpace>(std::move(cs));
  SimulationPlan<double> plan;
  plan.unit_dm.space = sp;
  plan.unit_dm.theta_grid = {{"t0", {0.25}, {Rational(1, 4)}},
                             {"t1", {0.5}, {Rational(1, 2)}},
                             {"t2", {0.75}, {Rational(3, 4)}}};
  plan.unit_dm.tables = {{0.75, 0.25}, {0.5, 0.5}, {0.25, 0.75}};
  plan.unit_mm.space = sp;
  plan.unit_mm.phi_grid = {{"p0", {0.75}, {Rational(3, 4)}}};
  plan.unit_mm.kernels = {{{0.25, 0.25}, {0.75, 0.75}}};
  plan.n_units = 2;
  plan.n_replications = 20000;
  plan.seed = 4242;
  plan.true_theta = 1;
  plan.true_phi = 0;
  plan.rules = {IntervalRule::wald_observed, IntervalRule::wald_naive_expected,
                IntervalRule::likelihood};
  plan.validate();
  return plan;
}

double binom_se(double p, long n) { return std::sqrt(p * (1 - p) / static_cast<double>(n)); }

}  // namespace

TEST_CASE("exact enumeration reproduces the closed-form law") {
  const SimulationPlan<double> plan = bernoulli_plan();
  const ExactSamplingReport ex =
      exact_repeated_sampling(plan.unit_dm, plan.unit_mm, 1, 0, 2, 0);
  REQUIRE(ex.mle_distribution.size() == 3);
  CHECK(ex.mle_distribution[0] == Rational(25, 64));
  CHECK(ex.mle_distribution[1] == Rational(9, 32));
  CHECK(ex.mle_distribution[2] == Rational(21, 64));
  CHECK(ex.mean == Rational(31, 64));
  CHECK(ex.variance == Rational(183, 4096));
  CHECK(ex.tie_mass == Rational(1, 16));
  CHECK(ex.degenerate_mass == Rational(0));
  CHECK(ex.boundary_mass == Rational(23, 32));
  CHECK(ex.n_outcomes == 16);

  // The outcome count explodes as (|space| * patterns)^n_units.
  CHECK_THROWS_AS(
      exact_repeated_sampling(plan.unit_dm, plan.unit_mm, 1, 0, 4, 0, 200),
      resource_error);
}

TEST_CASE("the runner converges to the exact law") {
  const SimulationPlan<double> plan = bernoulli_plan();
  const SimulationReport rep = run_simulation(plan, 1);
  const long n = rep.n_replications;
  REQUIRE(n == 20000);
  CHECK(rep.n_degenerate == 0);
  CHECK(rep.n_estimates == n);
  CHECK(rep.true_value == 0.5);

  const double exact_mean = 31.0 / 64.0;
  const double exact_sd = std::sqrt(183.0 / 4096.0);
  CHECK(std::abs(rep.mean_estimate - exact_mean) <= 3 * rep.mc_se_mean);
  CHECK(std::abs(rep.sd_estimate - exact_sd) <= 3 * rep.mc_se_sd);
  CHECK(rep.bias == rep.mean_estimate - rep.true_value);

  const double tie_rate = static_cast<double>(rep.n_ties) / static_cast<double>(n);
  CHECK(std::abs(tie_rate - 1.0 / 16.0) <= 3 * binom_se(1.0 / 16.0, n));
  const double boundary_rate = static_cast<double>(rep.n_boundary_mle) / static_cast<double>(n);
  CHECK(std::abs(boundary_rate - 23.0 / 32.0) <= 3 * binom_se(23.0 / 32.0, n));

  // At this design every likelihood set contains the true point, and every
  // interior-MLE Wald interval is wide enough to cover as well.
  REQUIRE(rep.coverage.size() == 3);
  for (const RuleCoverage& rc : rep.coverage) {
    INFO("rule " << rc.rule);
    CHECK(rc.n > 0);
    CHECK(rc.coverage == 1.0);
  }
  const double interior_rate =
      static_cast<double>(rep.n_se_observed) / static_cast<double>(n);
  CHECK(std::abs(interior_rate - 9.0 / 32.0) <= 3 * binom_se(9.0 / 32.0, n));
}

TEST_CASE("thread counts change no bit of the report") {
  SimulationPlan<double> plan = bernoulli_plan();
  plan.n_replications = 4000;
  plan.verify_profile_consistency = true;
  plan.prior = Prior<double>::uniform(3, 1);
  const SimulationReport a = run_simulation(plan, 1);
  const SimulationReport b = run_simulation(plan, 4);

  CHECK(a.mean_estimate == b.mean_estimate);
  CHECK(a.sd_estimate == b.sd_estimate);
  CHECK(a.mc_se_mean == b.mc_se_mean);
  CHECK(a.mc_se_sd == b.mc_se_sd);
  CHECK(a.mean_se_observed == b.mean_se_observed);
  CHECK(a.mean_se_naive == b.mean_se_naive);
  CHECK(a.n_ties == b.n_ties);
  CHECK(a.n_boundary_mle == b.n_boundary_mle);
  REQUIRE(a.coverage.size() == b.coverage.size());
  for (std::size_t i = 0; i < a.coverage.size(); ++i) {
    CHECK(a.coverage[i].coverage == b.coverage[i].coverage);
    CHECK(a.coverage[i].n == b.coverage[i].n);
  }
  REQUIRE(a.bayes.has_value());
  REQUIRE(b.bayes.has_value());
  CHECK(a.bayes->mean_posterior_mean == b.bayes->mean_posterior_mean);
  CHECK(a.bayes->max_tv == b.bayes->max_tv);

  // The invariant mechanism keeps both consistency studies clean.
  CHECK(a.profile_checked > 0);
  CHECK(a.profile_agreed == a.profile_checked);
  CHECK(a.bayes->everywhere_mar);
  CHECK(a.bayes->prior_independent);
  CHECK(a.bayes->tv_exceedances == 0);
  CHECK(a.bayes->n == a.n_replications);
}

TEST_CASE("information weightings coincide exactly under full invariance") {
  const SimulationPlan<double> plan = bernoulli_plan();
  const double naive = naive_expected_information(plan.unit_dm, plan.unit_mm, 1, 0, 3, 0);
  const double correct = true_expected_information(plan.unit_dm, plan.unit_mm, 1, 0, 3, 0);
  CHECK(naive == Catch::Approx(correct).epsilon(1e-12));

  // A value-dependent kernel separates the two weightings once the observed
  // log-likelihood curves differently across observed classes.  The one
  // coordinate above cannot show this: both classes share one curvature.
  const nlohmann::json root =
      load_json_file(std::string(IGLAB_REPO_DIR) + "/models/monotone_mar_plan.json");
  const SimulationPlan<double> mar = load_plan<double>(root);
  const double naive_mar = naive_expected_information(mar.unit_dm, mar.unit_mm, mar.true_theta,
                                                      mar.true_phi, 3, mar.estimand_component);
  const double correct_mar = true_expected_information(mar.unit_dm, mar.unit_mm, mar.true_theta,
                                                       mar.true_phi, 3, mar.estimand_component);
  CHECK(std::abs(naive_mar - correct_mar) > 1e-3);

  // Boundary grid points admit no central difference.
  CHECK_THROWS_AS(naive_expected_information(plan.unit_dm, plan.unit_mm, 0, 0, 3, 0),
                  usage_error);
}

TEST_CASE("conditioning on an impossible pattern exhausts the attempt budget") {
  SimulationPlan<double> plan = bernoulli_plan();
  plan.unit_mm.kernels = {{{0.0, 0.0}, {1.0, 1.0}}};  // every unit fully observed
  plan.unit_mm.validate();
  plan.n_replications = 1;
  // The naive weighting is undefined under conditioning; keep the other rules.
  plan.rules = {IntervalRule::wald_observed, IntervalRule::likelihood};
  plan.conditioning = ConditioningMode::on_pattern;
  plan.pattern_condition = Pattern{0b0, 1};
  plan.validate();
  CHECK_THROWS_AS(run_simulation(plan, 1), resource_error);
}

TEST_CASE("single-replication runs keep the accounting consistent") {
  SimulationPlan<double> plan = bernoulli_plan();
  plan.n_replications = 1;
  const SimulationReport rep = run_simulation(plan, 1);
  CHECK(rep.n_replications == 1);
  CHECK(rep.n_estimates == 1);
  CHECK(rep.sd_estimate == 0);
  for (const RuleCoverage& rc : rep.coverage)
    if (rc.n > 0) CHECK((rc.coverage == 0.0 || rc.coverage == 1.0));
}

TEST_CASE("quantiles and rule names round-trip") {
  CHECK(normal_quantile(0.975) == Catch::Approx(1.959963985).epsilon(1e-8));
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-12));
  CHECK(normal_quantile(0.025) == Catch::Approx(-1.959963985).epsilon(1e-8));
  for (const IntervalRule r : {IntervalRule::wald_observed, IntervalRule::wald_naive_expected,
                               IntervalRule::likelihood})
    CHECK(rule_from_name(rule_name(r)) == r);
  CHECK_THROWS_AS(rule_from_name("bootstrap"), usage_error);
}

TEST_CASE("a strictly flat grid direction is rejected up front") {
  SimulationPlan<double> plan = bernoulli_plan();
  plan.unit_dm.theta_grid[2].values[0] = 0.5;  // duplicates the middle value
  CHECK_THROWS_AS(plan.validate(), validation_error);
}
