#include "catch_amalgamated.hpp"
#include "iglab/iglab.hpp"

using namespace iglab;

namespace {

ModelBundle<Rational> canonical_two_unit() {
  const std::string path = std::string(IGLAB_REPO_DIR) + "/models/two_unit_mcar.json";
  return load_bundle<Rational>(load_json_file(path), Tolerance{});
}

}  // namespace

TEST_CASE("the two posteriors coincide exactly on 100 invariant instances") {
  SplitMix64 rng = stream_for(808, 2);
  int verified = 0;
  for (int i = 0; i < 400 && verified < 100; ++i) {
    const GeneratedBundle b = random_bundle(rng, MechanismKind::realised_mar, 3);
    const RealisationInput real = realisation_input(*b.space, b.real);
    const Prior<Rational> prior =
        random_independent_prior(rng, b.dm.n_theta(), b.mm.n_phi());
    Theorem2Report<Rational> rep;
    try {
      rep = verify_theorem2(b.dm, b.mm, b.jps, real, prior, Tolerance{});
    } catch (const model_domain_error&) {
      continue;  // realisation impossible under this table draw
    }
    if (!rep.realised_mar || !rep.prior_independent) continue;
    ++verified;
    CHECK(rep.tv == Rational(0));
    REQUIRE(rep.marginal_from_joint.size() == rep.from_ignoring.size());
    for (std::size_t t = 0; t < rep.from_ignoring.size(); ++t)
      CHECK(rep.marginal_from_joint[t] == rep.from_ignoring[t]);
    // Both margins are distributions.
    Rational sum(0);
    for (const Rational& v : rep.from_ignoring) sum += v;
    CHECK(sum == Rational(1));
  }
  CHECK(verified == 100);
}

TEST_CASE("the canonical instance normalizes the grid to sixths") {
  const ModelBundle<Rational> b = canonical_two_unit();
  REQUIRE(b.real.has_value());
  const Prior<Rational> prior = Prior<Rational>::uniform(b.dm.n_theta(), b.mm.n_phi());
  const Theorem2Report<Rational> rep =
      verify_theorem2(b.dm, b.mm, b.jps, *b.real, prior, Tolerance{});
  CHECK(rep.realised_mar);
  CHECK(rep.prior_independent);
  CHECK(rep.tv == Rational(0));
  const std::vector<Rational> want{Rational(1, 6), Rational(1, 3), Rational(1, 2)};
  CHECK(rep.marginal_from_joint == want);
  CHECK(rep.from_ignoring == want);
  REQUIRE(rep.posterior_mean.has_value());
  CHECK(*rep.posterior_mean == Catch::Approx(1.0 / 24 + 1.0 / 6 + 3.0 / 8).epsilon(1e-12));
  // At the default level every grid point joins both credible sets.
  CHECK(rep.hpd.indices == std::vector<std::size_t>{0, 1, 2});
  CHECK(rep.central.indices == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("a dependent prior severs the equality") {
  const SearchOutcome so = search_counterexamples("theorem2_dependent_prior", 100, 31);
  REQUIRE_FALSE(so.hits.empty());
  for (const SearchInstance& hit : so.hits) {
    REQUIRE(hit.prior.has_value());
    const RealisationInput real = realisation_input(*hit.bundle.space, hit.bundle.real);
    const Theorem2Report<Rational> rep = verify_theorem2(
        hit.bundle.dm, hit.bundle.mm, hit.bundle.jps, real, *hit.prior, Tolerance{});
    CHECK(rep.realised_mar);
    CHECK_FALSE(rep.prior_independent);
    CHECK(rep.tv > Rational(0));
  }
}

TEST_CASE("posterior construction rejects mass outside the joint space") {
  const ModelBundle<Rational> b = canonical_two_unit();
  JointParameterSpace jps(3, 3, true);
  jps.set_member(0, 0, false);
  Prior<Rational> prior = Prior<Rational>::uniform(3, 3);
  CHECK_THROWS_AS(posterior_joint(b.dm, b.mm, jps, b.real->rec, prior, Tolerance{}),
                  validation_error);
}

TEST_CASE("priors expose margins, independence, and validation") {
  const Prior<Rational> prod = Prior<Rational>::product(
      {Rational(1, 4), Rational(3, 4)}, {Rational(1, 3), Rational(2, 3)});
  CHECK(prod.is_independent());
  CHECK(prod.theta_margin() == std::vector<Rational>{Rational(1, 4), Rational(3, 4)});
  CHECK(prod.phi_margin() == std::vector<Rational>{Rational(1, 3), Rational(2, 3)});
  prod.validate(2, 2, Tolerance{});
  CHECK_THROWS_AS(prod.validate(3, 2, Tolerance{}), validation_error);

  Prior<Rational> dep;
  dep.joint = {{Rational(1, 2), Rational(0)}, {Rational(0), Rational(1, 2)}};
  dep.validate(2, 2, Tolerance{});
  CHECK_FALSE(dep.is_independent());

  Prior<Rational> bad;
  bad.joint = {{Rational(1, 2), Rational(0)}, {Rational(0), Rational(1, 4)}};
  CHECK_THROWS_AS(bad.validate(2, 2, Tolerance{}), validation_error);
}

TEST_CASE("credible sets pick mass greedily and centrally") {
  const std::vector<Rational> probs{Rational(1, 6), Rational(1, 3), Rational(1, 2)};
  const CredibleSet<Rational> top = hpd_set(probs, Rational(1, 2));
  CHECK(top.indices == std::vector<std::size_t>{2});
  CHECK(top.achieved == Rational(1, 2));
  const CredibleSet<Rational> most = hpd_set(probs, Rational(4, 5));
  CHECK(most.indices == std::vector<std::size_t>{1, 2});
  CHECK(most.achieved == Rational(5, 6));

  // Central set at level 1/2: alpha/2 = 1/4 clips the first point only.
  const CredibleSet<Rational> mid = central_set(probs, Rational(1, 2));
  CHECK(mid.indices == std::vector<std::size_t>{1, 2});

  // Ties go to the smaller index.
  const std::vector<Rational> tied{Rational(1, 2), Rational(1, 2)};
  const CredibleSet<Rational> t = hpd_set(tied, Rational(1, 2));
  CHECK(t.indices == std::vector<std::size_t>{0});
}

TEST_CASE("evidence matches the direct sum over admissible pairs") {
  const ModelBundle<Rational> b = canonical_two_unit();
  const Prior<Rational> prior = Prior<Rational>::uniform(3, 3);
  const Posterior<Rational> post =
      posterior_joint(b.dm, b.mm, b.jps, b.real->rec, prior, Tolerance{});
  Rational direct(0);
  const std::vector<std::size_t> compat = compatible_indices(*b.space, b.real->rec);
  for (int t = 0; t < 3; ++t)
    for (int p = 0; p < 3; ++p) {
      Rational l1(0);
      for (std::size_t y : compat) l1 += b.dm.f(t, y) * b.mm.g(p, b.real->rec.m, y);
      direct += Rational(1, 9) * l1;
    }
  CHECK(post.evidence == direct);
  Rational total(0);
  for (const Rational& v : post.table.values) total += v;
  CHECK(total == Rational(1));
}
