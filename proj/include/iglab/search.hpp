#ifndef IGLAB_SEARCH_HPP
#define IGLAB_SEARCH_HPP

#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iglab/bayes.hpp"
#include "iglab/classify.hpp"
#include "iglab/completeness.hpp"
#include "iglab/likelihood.hpp"
#include "iglab/model.hpp"
#include "iglab/rng.hpp"

namespace iglab {

// Random model builders.  All probabilities are exact rationals with small
// denominators so searched instances serialize losslessly and re-verify in
// rational mode.

inline SpacePtr random_binary_space(SplitMix64& rng, int max_coords = 3) {
  const int n = 1 + static_cast<int>(rng.next() % static_cast<std::uint64_t>(max_coords));
  std::vector<Coordinate> cs;
  cs.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    cs.push_back(Coordinate{"c" + std::to_string(j), {"0", "1"}, {0.0, 1.0}});
  return std::make_shared<const DataSpace>(std::move(cs));
}

inline std::vector<Rational> random_table(SplitMix64& rng, std::size_t n, int max_weight,
                                          bool allow_zero) {
  for (;;) {
    std::vector<long> w(n);
    long sum = 0;
    for (long& x : w) {
      x = static_cast<long>(rng.next() % static_cast<std::uint64_t>(max_weight + 1));
      if (!allow_zero && x == 0) x = 1;
      sum += x;
    }
    if (sum == 0) continue;
    std::vector<Rational> out;
    out.reserve(n);
    for (long x : w) out.emplace_back(x, sum);
    return out;
  }
}

inline DiscreteDataModel<Rational> random_data_model(SplitMix64& rng, SpacePtr space,
                                                     int n_theta) {
  DiscreteDataModel<Rational> dm;
  dm.space = space;
  for (int t = 0; t < n_theta; ++t) {
    dm.theta_grid.push_back({"t" + std::to_string(t), {static_cast<double>(t)}, {Rational(t)}});
    // Strictly positive tables keep every realisation non-degenerate.
    dm.tables.push_back(random_table(rng, space->size(), 8, false));
  }
  return dm;
}

inline MissingnessModel<Rational> random_mechanism(SplitMix64& rng, SpacePtr space, int n_phi) {
  MissingnessModel<Rational> mm;
  mm.space = space;
  const std::size_t np = space->n_patterns();
  for (int p = 0; p < n_phi; ++p) {
    mm.phi_grid.push_back({"p" + std::to_string(p), {static_cast<double>(p)}, {Rational(p)}});
    std::vector<std::vector<Rational>> k(np, std::vector<Rational>(space->size()));
    for (std::size_t y = 0; y < space->size(); ++y) {
      const std::vector<Rational> col = random_table(rng, np, 4, true);
      for (std::size_t m = 0; m < np; ++m) k[m][y] = col[m];
    }
    mm.kernels.push_back(std::move(k));
  }
  return mm;
}

// Mechanism whose m-row is a positive constant on the designated set of data
// values, per phi.  The mass left over at each y is spread over the other
// patterns.  With the set = compatibles this builds realised-invariant rows;
// with the set = the whole space, rows invariant everywhere.
inline MissingnessModel<Rational> random_mechanism_constant_on(
    SplitMix64& rng, SpacePtr space, int n_phi, const Pattern& m_tilde,
    const std::vector<std::size_t>& constant_set) {
  const std::size_t np = space->n_patterns();
  std::vector<char> in_set(space->size(), 0);
  for (std::size_t i : constant_set) in_set[i] = 1;
  MissingnessModel<Rational> mm;
  mm.space = space;
  for (int p = 0; p < n_phi; ++p) {
    mm.phi_grid.push_back({"p" + std::to_string(p), {static_cast<double>(p)}, {Rational(p)}});
    const Rational c(1 + static_cast<long>(rng.next() % 3), 4);
    std::vector<std::vector<Rational>> k(np, std::vector<Rational>(space->size(), Rational(0)));
    for (std::size_t y = 0; y < space->size(); ++y) {
      const Rational at_m = in_set[y] ? c : Rational(static_cast<long>(rng.next() % 5), 4);
      k[m_tilde.bits][y] = at_m;
      const Rational rem = Rational(1) - at_m;
      if (rem != 0) {
        std::vector<long> w(np, 0);
        long sum = 0;
        for (std::size_t m = 0; m < np; ++m) {
          if (m == m_tilde.bits) continue;
          w[m] = static_cast<long>(rng.next() % 4);
          sum += w[m];
        }
        if (sum == 0) {
          const std::size_t other = m_tilde.bits == 0 ? 1 : 0;
          w[other] = 1;
          sum = 1;
        }
        for (std::size_t m = 0; m < np; ++m)
          if (m != m_tilde.bits && w[m]) k[m][y] = rem * Rational(w[m], sum);
      }
    }
    mm.kernels.push_back(std::move(k));
  }
  return mm;
}

enum class MechanismKind { free, realised_mar, realised_mcar };

struct GeneratedBundle {
  SpacePtr space;
  DiscreteDataModel<Rational> dm;
  MissingnessModel<Rational> mm;
  JointParameterSpace jps;
  Realisation real;
};

inline GeneratedBundle random_bundle(SplitMix64& rng, MechanismKind kind, int max_coords = 3,
                                     int n_theta = 0, int n_phi = 0) {
  GeneratedBundle b;
  b.space = random_binary_space(rng, max_coords);
  if (n_theta == 0) n_theta = 2 + static_cast<int>(rng.next() % 2);
  if (n_phi == 0) n_phi = 1 + static_cast<int>(rng.next() % 2);
  b.dm = random_data_model(rng, b.space, n_theta);
  b.real.y = b.space->value_at(rng.next() % b.space->size());
  b.real.m = Pattern{static_cast<std::uint32_t>(rng.next() % b.space->n_patterns()),
                     b.space->n_coords()};
  switch (kind) {
    case MechanismKind::free:
      b.mm = random_mechanism(rng, b.space, n_phi);
      break;
    case MechanismKind::realised_mar: {
      const ObservedRecord rec = record_of(*b.space, b.real);
      b.mm = random_mechanism_constant_on(rng, b.space, n_phi, b.real.m,
                                          compatible_indices(*b.space, rec));
      break;
    }
    case MechanismKind::realised_mcar: {
      std::vector<std::size_t> all(b.space->size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      b.mm = random_mechanism_constant_on(rng, b.space, n_phi, b.real.m, all);
      break;
    }
  }
  b.jps = JointParameterSpace::full_product(n_theta, n_phi);
  return b;
}

inline Prior<Rational> random_independent_prior(SplitMix64& rng, int n_theta, int n_phi) {
  return Prior<Rational>::product(random_table(rng, static_cast<std::size_t>(n_theta), 8, false),
                                  random_table(rng, static_cast<std::size_t>(n_phi), 8, false));
}

inline Prior<Rational> random_dependent_prior(SplitMix64& rng, int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 2)
    throw usage_error("a dependent prior needs at least 2 points on each grid");
  for (;;) {
    Prior<Rational> pr;
    pr.joint.assign(static_cast<std::size_t>(n_theta), {});
    long total = 0;
    std::vector<std::vector<long>> w(static_cast<std::size_t>(n_theta),
                                     std::vector<long>(static_cast<std::size_t>(n_phi)));
    for (auto& row : w)
      for (long& x : row) {
        x = 1 + static_cast<long>(rng.next() % 8);
        total += x;
      }
    for (int t = 0; t < n_theta; ++t) {
      pr.joint[static_cast<std::size_t>(t)].reserve(static_cast<std::size_t>(n_phi));
      for (int p = 0; p < n_phi; ++p)
        pr.joint[static_cast<std::size_t>(t)].emplace_back(
            w[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)], total);
    }
    if (!pr.is_independent()) return pr;
  }
}

// A hit: the full instance plus the verdicts it advertises.  Serializable as
// a standalone model file; the verdicts go into the search summary so the
// file itself stays a plain model input.
struct SearchInstance {
  std::string target;
  std::string note;
  GeneratedBundle bundle;
  std::optional<Prior<Rational>> prior;
  int designated_phi = 0;
  std::vector<std::pair<std::string, std::string>> verdicts;
  long candidate = 0;
};

// Observation of one coordinate is decided by that coordinate's own value:
// the mechanism treats the realised record invariantly (it is fully observed)
// yet no single invariant-everywhere reading exists.
inline SearchInstance heitjan_diggle_instance() {
  SearchInstance inst;
  inst.target = "realised_not_everywhere_mar";
  inst.note = "observe-x probability depends on x; realisation fully observed";
  std::vector<Coordinate> cs{{"x", {"0", "1"}, {0.0, 1.0}}, {"y", {"0", "1"}, {0.0, 1.0}}};
  inst.bundle.space = std::make_shared<const DataSpace>(std::move(cs));
  const SpacePtr& sp = inst.bundle.space;

  DiscreteDataModel<Rational>& dm = inst.bundle.dm;
  dm.space = sp;
  dm.theta_grid = {{"t0", {0.0}, {Rational(0)}}, {"t1", {1.0}, {Rational(1)}}};
  dm.tables = {{Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)},
               {Rational(1, 8), Rational(1, 8), Rational(3, 8), Rational(3, 8)}};

  MissingnessModel<Rational>& mm = inst.bundle.mm;
  mm.space = sp;
  mm.phi_grid = {{"p0", {0.0}, {Rational(0)}}};
  const std::size_t np = sp->n_patterns();
  std::vector<std::vector<Rational>> k(np, std::vector<Rational>(sp->size(), Rational(0)));
  for (std::size_t y = 0; y < sp->size(); ++y) {
    const int x = sp->value_at(y)[0];
    const Rational pi = x == 0 ? Rational(3, 4) : Rational(1, 4);
    k[0b11][y] = pi;               // both observed
    k[0b10][y] = Rational(1) - pi; // x missing, y observed
  }
  mm.kernels = {std::move(k)};

  inst.bundle.jps = JointParameterSpace::full_product(2, 1);
  inst.bundle.real.y = {1, 1};
  inst.bundle.real.m = Pattern{0b11, 2};
  inst.verdicts = {{"realised_mar", "true"}, {"everywhere_mar", "false"}};
  return inst;
}

// One theta point only: every likelihood ratio across the grid is trivially
// constant, so proportionality cannot separate mechanisms and the rank
// condition fails visibly.
inline SearchInstance incomplete_family_instance() {
  SearchInstance inst;
  inst.target = "proportional_without_mar";
  inst.note = "single-point theta grid; rank 1 of 2 needed";
  std::vector<Coordinate> cs{{"y", {"0", "1"}, {0.0, 1.0}}};
  inst.bundle.space = std::make_shared<const DataSpace>(std::move(cs));
  const SpacePtr& sp = inst.bundle.space;

  inst.bundle.dm.space = sp;
  inst.bundle.dm.theta_grid = {{"t0", {0.0}, {Rational(0)}}};
  inst.bundle.dm.tables = {{Rational(1, 2), Rational(1, 2)}};

  MissingnessModel<Rational>& mm = inst.bundle.mm;
  mm.space = sp;
  mm.phi_grid = {{"p0", {0.0}, {Rational(0)}}};
  mm.kernels = {{{Rational(1, 4), Rational(3, 4)},    // pattern 0: y missing
                 {Rational(3, 4), Rational(1, 4)}}};  // pattern 1: y observed

  inst.bundle.jps = JointParameterSpace::full_product(1, 1);
  inst.bundle.real.y = {0};
  inst.bundle.real.m = Pattern{0b0, 1};
  inst.verdicts = {{"realised_mar", "false"},
                   {"proportional_all_phi", "true"},
                   {"grid_complete", "false"}};
  return inst;
}

struct SearchOutcome {
  std::string target;
  long searched = 0;
  bool exhausted = false;  // the whole bounded family was enumerated
  std::vector<SearchInstance> hits;
};

namespace detail {

inline const std::vector<std::vector<Rational>>& audit_tables(int n_coords) {
  static const std::vector<std::vector<Rational>> one = {
      {Rational(3, 4), Rational(1, 4)},
      {Rational(1, 4), Rational(3, 4)},
  };
  static const std::vector<std::vector<Rational>> two = {
      {Rational(1, 4), Rational(1, 4), Rational(1, 4), Rational(1, 4)},
      {Rational(1, 2), Rational(1, 4), Rational(1, 8), Rational(1, 8)},
      {Rational(1, 8), Rational(1, 2), Rational(1, 4), Rational(1, 8)},
      {Rational(1, 8), Rational(1, 8), Rational(1, 2), Rational(1, 4)},
  };
  if (n_coords == 1) return one;
  if (n_coords == 2) return two;
  throw usage_error("the exhaustive audit covers 1 or 2 binary coordinates");
}

inline SpacePtr audit_space(int n_coords) {
  std::vector<Coordinate> cs;
  for (int j = 0; j < n_coords; ++j)
    cs.push_back(Coordinate{"c" + std::to_string(j), {"0", "1"}, {0.0, 1.0}});
  return std::make_shared<const DataSpace>(std::move(cs));
}

inline DiscreteDataModel<Rational> audit_data_model(int n_coords) {
  DiscreteDataModel<Rational> dm;
  dm.space = audit_space(n_coords);
  const auto& tabs = audit_tables(n_coords);
  for (std::size_t t = 0; t < tabs.size(); ++t) {
    dm.theta_grid.push_back({"t" + std::to_string(t), {static_cast<double>(t)},
                             {Rational(static_cast<long>(t))}});
    dm.tables.push_back(tabs[t]);
  }
  return dm;
}

}  // namespace detail

struct AppendixAuditOutcome {
  long searched = 0;
  long checked = 0;  // instances with all hypotheses in force
  long skipped_no_positivity = 0;
  long skipped_incomplete = 0;
  long violations = 0;
  long proportional_and_invariant = 0;
  long neither = 0;
};

// Every single-phi kernel with quarter-valued entries, every realisation, on
// a fixed grid-complete family.  The realisation's own row determines both
// sides of the equivalence, so assigning the leftover mass to the complement
// pattern loses no generality.  A violation throws; the outcome carries the
// census.
inline AppendixAuditOutcome exhaustive_appendix_audit(int n_coords) {
  const DiscreteDataModel<Rational> dm = detail::audit_data_model(n_coords);
  const SpacePtr& sp = dm.space;
  const std::size_t ny = sp->size();
  const std::uint32_t mask = static_cast<std::uint32_t>(sp->n_patterns()) - 1;
  const JointParameterSpace jps =
      JointParameterSpace::full_product(dm.n_theta(), 1);
  const Tolerance tol;

  AppendixAuditOutcome out;
  for (std::uint32_t mb = 0; mb <= mask; ++mb) {
    const Pattern m{mb, sp->n_coords()};
    const std::uint32_t cp = (~mb) & mask;
    for (std::size_t yt = 0; yt < ny; ++yt) {
      std::vector<int> digits(ny, 0);
      for (;;) {
        ++out.searched;
        MissingnessModel<Rational> mm;
        mm.space = sp;
        mm.phi_grid = {{"p0", {0.0}, {Rational(0)}}};
        std::vector<std::vector<Rational>> k(sp->n_patterns(),
                                             std::vector<Rational>(ny, Rational(0)));
        for (std::size_t y = 0; y < ny; ++y) {
          k[mb][y] = Rational(digits[y], 4);
          k[cp][y] = Rational(4 - digits[y], 4);
        }
        mm.kernels = {std::move(k)};

        RealisationInput real = realisation_input(*sp, Realisation{sp->value_at(yt), m});
        const AppendixReport<Rational> rep = verify_appendix_theorem(dm, mm, jps, real, tol);
        if (!rep.hypotheses_hold()) {
          if (!rep.positivity_all_phi)
            ++out.skipped_no_positivity;
          else
            ++out.skipped_incomplete;
        } else {
          ++out.checked;
          if (!rep.biconditional_holds()) ++out.violations;
          if (rep.proportional_all_phi && rep.realised_mar) ++out.proportional_and_invariant;
          if (!rep.proportional_all_phi && !rep.realised_mar) ++out.neither;
        }

        std::size_t d = 0;
        while (d < ny && ++digits[d] > 4) digits[d++] = 0;
        if (d == ny) break;
      }
    }
  }
  return out;
}

namespace detail {

template <typename S>
bool proportional_at_designated_phi(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                    const JointParameterSpace& jps, const ObservedRecord& rec,
                                    int phi, const Tolerance& tol) {
  const GridFunction<S> l3 = fixed_phi_likelihood(dm, mm, jps, rec, phi);
  const GridFunction<S> l2 = ignoring_likelihood(dm, rec);
  return proportional(l3, l2, tol).proportional;
}

}  // namespace detail

inline SearchOutcome search_counterexamples(const std::string& target, long budget,
                                            std::uint64_t seed, std::size_t max_hits = 5) {
  const Tolerance tol;
  SearchOutcome out;
  out.target = target;

  auto push_hit = [&](SearchInstance inst, long candidate) {
    inst.target = target;
    inst.candidate = candidate;
    if (out.hits.size() < max_hits) out.hits.push_back(std::move(inst));
  };

  if (target == "realised_not_everywhere_mar") {
    {
      SearchInstance canned = heitjan_diggle_instance();
      ++out.searched;
      const ObservedRecord rec = record_of(*canned.bundle.space, canned.bundle.real);
      if (classify_realised_mar(canned.bundle.mm, rec, tol).holds &&
          !classify_everywhere_mar(canned.bundle.mm, tol).holds)
        push_hit(std::move(canned), 0);
    }
    for (long c = 1; c < budget; ++c) {
      ++out.searched;
      SplitMix64 rng = stream_for(seed, static_cast<std::uint64_t>(c));
      GeneratedBundle b = random_bundle(rng, MechanismKind::free, 3);
      const ObservedRecord rec = record_of(*b.space, b.real);
      if (classify_realised_mar(b.mm, rec, tol).holds &&
          !classify_everywhere_mar(b.mm, tol).holds) {
        SearchInstance inst;
        inst.note = "random mechanism, invariance certified on the realised record only";
        inst.bundle = std::move(b);
        inst.verdicts = {{"realised_mar", "true"}, {"everywhere_mar", "false"}};
        push_hit(std::move(inst), c);
      }
      if (out.hits.size() >= max_hits) break;
    }
    return out;
  }

  if (target == "proportional_without_mar") {
    {
      SearchInstance canned = incomplete_family_instance();
      ++out.searched;
      const ObservedRecord rec = record_of(*canned.bundle.space, canned.bundle.real);
      if (!classify_realised_mar(canned.bundle.mm, rec, tol).holds &&
          detail::proportional_at_designated_phi(canned.bundle.dm, canned.bundle.mm,
                                                 canned.bundle.jps, rec, 0, tol))
        push_hit(std::move(canned), 0);
    }
    for (long c = 1; c < budget; ++c) {
      ++out.searched;
      SplitMix64 rng = stream_for(seed, static_cast<std::uint64_t>(c));
      // Alternate between one-point grids and duplicated-table grids; both
      // kill the rank condition.
      GeneratedBundle b = random_bundle(rng, MechanismKind::free, 2, c % 2 ? 1 : 2, 1);
      if (c % 2 == 0) b.dm.tables[1] = b.dm.tables[0];
      const ObservedRecord rec = record_of(*b.space, b.real);
      if (is_zero(b.mm.g(0, rec.m, b.space->index_of(b.real.y)))) continue;
      bool all_phi = true;
      for (int p = 0; p < b.mm.n_phi() && all_phi; ++p)
        all_phi = detail::proportional_at_designated_phi(b.dm, b.mm, b.jps, rec, p, tol);
      if (all_phi && !classify_realised_mar(b.mm, rec, tol).holds) {
        SearchInstance inst;
        inst.note = c % 2 ? "one-point theta grid" : "duplicated theta tables";
        inst.bundle = std::move(b);
        inst.verdicts = {{"realised_mar", "false"},
                         {"proportional_all_phi", "true"},
                         {"grid_complete", "false"}};
        push_hit(std::move(inst), c);
      }
      if (out.hits.size() >= max_hits) break;
    }
    return out;
  }

  if (target == "lu_copas") {
    // Exhaustive phase: one binary coordinate, two quarter-valued kernels,
    // proportionality demanded at phi0 only.
    const DiscreteDataModel<Rational> dm = detail::audit_data_model(1);
    const SpacePtr& sp = dm.space;
    const JointParameterSpace jps = JointParameterSpace::full_product(dm.n_theta(), 2);
    long exhausted_count = 0;
    bool full_sweep = true;
    for (std::uint32_t mb = 0; mb <= 1 && full_sweep; ++mb)
      for (std::size_t yt = 0; yt < 2 && full_sweep; ++yt)
        for (int a0 = 0; a0 <= 4 && full_sweep; ++a0)
          for (int b0 = 0; b0 <= 4 && full_sweep; ++b0)
            for (int a1 = 0; a1 <= 4 && full_sweep; ++a1)
              for (int b1 = 0; b1 <= 4; ++b1) {
                if (out.searched >= budget && budget > 0) {
                  full_sweep = false;
                  break;
                }
                ++out.searched;
                ++exhausted_count;
                MissingnessModel<Rational> mm;
                mm.space = sp;
                mm.phi_grid = {{"p0", {0.0}, {Rational(0)}}, {"p1", {1.0}, {Rational(1)}}};
                auto make_kernel = [&](int a, int b) {
                  std::vector<std::vector<Rational>> k(2, std::vector<Rational>(2));
                  k[0b0] = {Rational(a, 4), Rational(b, 4)};
                  k[0b1] = {Rational(4 - a, 4), Rational(4 - b, 4)};
                  return k;
                };
                mm.kernels = {make_kernel(a0, b0), make_kernel(a1, b1)};
                const Realisation real{sp->value_at(yt), Pattern{mb, 1}};
                const ObservedRecord rec = record_of(*sp, real);
                if (!classify_realised_mar(mm, rec, tol).holds &&
                    detail::proportional_at_designated_phi(dm, mm, jps, rec, 0, tol)) {
                  SearchInstance inst;
                  inst.note = "restricted phi set: proportional at phi0, not across the grid";
                  inst.bundle = {sp, dm, std::move(mm), jps, real};
                  inst.designated_phi = 0;
                  inst.verdicts = {{"realised_mar", "false"},
                                   {"proportional_at_phi0", "true"}};
                  push_hit(std::move(inst), exhausted_count - 1);
                }
              }
    out.exhausted = full_sweep;
    // Random phase on two coordinates: phi0 row invariant on the compatible
    // set, phi1 free.
    for (long c = exhausted_count; c < budget; ++c) {
      if (out.hits.size() >= max_hits) break;
      ++out.searched;
      SplitMix64 rng = stream_for(seed, static_cast<std::uint64_t>(c));
      GeneratedBundle b;
      b.space = random_binary_space(rng, 2);
      b.dm = random_data_model(rng, b.space, 2);
      b.real.y = b.space->value_at(rng.next() % b.space->size());
      b.real.m = Pattern{static_cast<std::uint32_t>(rng.next() % b.space->n_patterns()),
                         b.space->n_coords()};
      const ObservedRecord rec = record_of(*b.space, b.real);
      MissingnessModel<Rational> inv = random_mechanism_constant_on(
          rng, b.space, 1, b.real.m, compatible_indices(*b.space, rec));
      MissingnessModel<Rational> fre = random_mechanism(rng, b.space, 1);
      b.mm.space = b.space;
      b.mm.phi_grid = {{"p0", {0.0}, {Rational(0)}}, {"p1", {1.0}, {Rational(1)}}};
      b.mm.kernels = {inv.kernels[0], fre.kernels[0]};
      b.jps = JointParameterSpace::full_product(2, 2);
      if (!classify_realised_mar(b.mm, rec, tol).holds &&
          detail::proportional_at_designated_phi(b.dm, b.mm, b.jps, rec, 0, tol)) {
        SearchInstance inst;
        inst.note = "restricted phi set: proportional at phi0, not across the grid";
        inst.bundle = std::move(b);
        inst.designated_phi = 0;
        inst.verdicts = {{"realised_mar", "false"}, {"proportional_at_phi0", "true"}};
        push_hit(std::move(inst), c);
      }
    }
    return out;
  }

  if (target == "theorem2_dependent_prior") {
    for (long c = 0; c < budget; ++c) {
      ++out.searched;
      SplitMix64 rng = stream_for(seed, static_cast<std::uint64_t>(c));
      GeneratedBundle b = random_bundle(rng, MechanismKind::realised_mar, 2, 2, 2);
      const Prior<Rational> prior = random_dependent_prior(rng, 2, 2);
      const RealisationInput real = realisation_input(*b.space, b.real);
      const Theorem2Report<Rational> rep =
          verify_theorem2(b.dm, b.mm, b.jps, real, prior, tol);
      if (rep.realised_mar && !rep.prior_independent && rep.tv > 0) {
        SearchInstance inst;
        inst.note = "posterior gap opened by prior dependence alone";
        inst.bundle = std::move(b);
        inst.prior = prior;
        inst.verdicts = {{"realised_mar", "true"},
                         {"prior_independent", "false"},
                         {"tv_positive", "true"}};
        push_hit(std::move(inst), c);
      }
      if (out.hits.size() >= max_hits) break;
    }
    return out;
  }

  throw usage_error("unknown search target \"" + target +
                    "\"; expected realised_not_everywhere_mar, proportional_without_mar, "
                    "lu_copas, or theorem2_dependent_prior");
}

}  // namespace iglab

#endif  // IGLAB_SEARCH_HPP
