#include "catch_amalgamated.hpp"
#include "iglab/iglab.hpp"

using namespace iglab;

namespace {

// Re-derives every advertised verdict of a hit from scratch, then round-trips
// the instance through serialization and repeats the checks on the copy.
void recheck_hit(const SearchInstance& inst) {
  const GeneratedBundle& b = inst.bundle;
  const ObservedRecord rec = record_of(*b.space, b.real);
  const Tolerance tol;

  for (const auto& [key, value] : inst.verdicts) {
    const bool expected = value == "true";
    if (key == "realised_mar")
      CHECK(classify_realised_mar(b.mm, rec, tol).holds == expected);
    else if (key == "everywhere_mar")
      CHECK(classify_everywhere_mar(b.mm, tol).holds == expected);
    else if (key == "grid_complete") {
      const auto fact = factorize_by_pattern(b.dm, rec.m);
      const auto rep = check_grid_completeness(fact, fact.split.obs_index(b.real.y));
      CHECK((rep.grid_complete && rep.dropped_thetas == 0) == expected);
    } else if (key == "proportional_all_phi") {
      bool all = true;
      const GridFunction<Rational> l2 = ignoring_likelihood(b.dm, rec);
      for (int p = 0; p < b.mm.n_phi(); ++p)
        all = all && proportional(fixed_phi_likelihood(b.dm, b.mm, b.jps, rec, p), l2, tol)
                         .proportional;
      CHECK(all == expected);
    } else if (key == "proportional_at_phi0") {
      const GridFunction<Rational> l2 = ignoring_likelihood(b.dm, rec);
      CHECK(proportional(fixed_phi_likelihood(b.dm, b.mm, b.jps, rec, inst.designated_phi), l2,
                         tol).proportional == expected);
    } else if (key == "prior_independent") {
      REQUIRE(inst.prior.has_value());
      CHECK(inst.prior->is_independent(tol) == expected);
    } else if (key == "tv_positive") {
      REQUIRE(inst.prior.has_value());
      const RealisationInput real = realisation_input(*b.space, b.real);
      const auto rep = verify_theorem2(b.dm, b.mm, b.jps, real, *inst.prior, tol);
      CHECK((rep.tv > Rational(0)) == expected);
    } else {
      FAIL("unexpected verdict key " << key);
    }
  }

  // The serialized form reproduces the classification of the original.
  const ModelBundle<Rational> loaded =
      load_bundle<Rational>(bundle_to_json(b, inst.prior), tol);
  REQUIRE(loaded.real.has_value());
  CHECK(classify_realised_mar(loaded.mm, loaded.real->rec, tol).holds ==
        classify_realised_mar(b.mm, rec, tol).holds);
  CHECK(classify_everywhere_mar(loaded.mm, tol).holds ==
        classify_everywhere_mar(b.mm, tol).holds);
}

}  // namespace

TEST_CASE("each search target certifies at least one hit") {
  struct Case {
    const char* target;
    long budget;
    std::uint64_t seed;
  };
  for (const Case& c : {Case{"realised_not_everywhere_mar", 50, 7},
                        Case{"proportional_without_mar", 60, 7},
                        Case{"lu_copas", 2500, 7},
                        Case{"theorem2_dependent_prior", 100, 31}}) {
    INFO("target " << c.target);
    const SearchOutcome out = search_counterexamples(c.target, c.budget, c.seed);
    CHECK(out.target == c.target);
    REQUIRE(!out.hits.empty());
    for (const SearchInstance& inst : out.hits) {
      CHECK(inst.target == c.target);
      CHECK_FALSE(inst.note.empty());
      recheck_hit(inst);
    }
  }
  CHECK_THROWS_AS(search_counterexamples("shortest_proof", 10, 1), usage_error);
}

TEST_CASE("the quarter-valued single-phi sweep is exhaustive") {
  const SearchOutcome out = search_counterexamples("lu_copas", 2500, 99);
  CHECK(out.searched == 2500);
  CHECK(out.exhausted);
  CHECK(out.hits.size() == 5);
  for (const SearchInstance& inst : out.hits) CHECK(inst.designated_phi == 0);
}

TEST_CASE("the exhaustive audit finds no violation on one coordinate") {
  const AppendixAuditOutcome out = exhaustive_appendix_audit(1);
  CHECK(out.searched == 100);
  CHECK(out.checked == 80);
  CHECK(out.skipped_no_positivity == 20);
  CHECK(out.skipped_incomplete == 0);
  CHECK(out.violations == 0);
  CHECK(out.proportional_and_invariant == 48);
  CHECK(out.neither == 32);
  CHECK(out.checked == out.proportional_and_invariant + out.neither + out.violations);
}

TEST_CASE("the exhaustive audit finds no violation on two coordinates") {
  const AppendixAuditOutcome out = exhaustive_appendix_audit(2);
  CHECK(out.searched == 10000);
  CHECK(out.checked == 8000);
  CHECK(out.skipped_no_positivity == 2000);
  CHECK(out.skipped_incomplete == 0);
  CHECK(out.violations == 0);
  CHECK(out.proportional_and_invariant == 2816);
  CHECK(out.neither == 5184);
  CHECK_THROWS_AS(exhaustive_appendix_audit(3), usage_error);
}

TEST_CASE("the canned observed-data instance leads its target list") {
  const SearchOutcome out = search_counterexamples("realised_not_everywhere_mar", 1, 5);
  REQUIRE(out.hits.size() == 1);
  CHECK(out.hits[0].candidate == 0);
  const SearchInstance direct = heitjan_diggle_instance();
  CHECK(out.hits[0].note == direct.note);
  CHECK(out.hits[0].bundle.real.y == direct.bundle.real.y);
}
