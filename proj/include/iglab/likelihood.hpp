#ifndef IGLAB_LIKELIHOOD_HPP
#define IGLAB_LIKELIHOOD_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "iglab/classify.hpp"
#include "iglab/grid_function.hpp"
#include "iglab/model.hpp"
#include "iglab/space.hpp"

namespace iglab {

// Joint likelihood over the joint parameter space, theta-major:
// sum over compatible y of f_theta(y) g_phi(m|y).
template <typename S>
GridFunction<S> joint_likelihood(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                 const JointParameterSpace& jps, const ObservedRecord& rec) {
  jps.validate();
  if (jps.n_theta() != dm.n_theta() || jps.n_phi() != mm.n_phi())
    throw structural_error("joint parameter space shape does not match the grids");
  const std::vector<std::size_t> compat = compatible_indices(*dm.space, rec);
  GridFunction<S> out;
  for (const auto& [t, p] : jps.members()) {
    S sum{};
    for (std::size_t y : compat) sum += dm.f(t, y) * mm.g(p, rec.m, y);
    out.push(GridPoint{t, p}, dm.theta_grid[t].name + "," + mm.phi_grid[p].name, sum);
  }
  return out;
}

// Likelihood for theta ignoring the mechanism: sum over compatible y of
// f_theta(y).
template <typename S>
GridFunction<S> ignoring_likelihood(const DiscreteDataModel<S>& dm, const ObservedRecord& rec) {
  const std::vector<std::size_t> compat = compatible_indices(*dm.space, rec);
  GridFunction<S> out;
  for (int t = 0; t < dm.n_theta(); ++t) {
    S sum{};
    for (std::size_t y : compat) sum += dm.f(t, y);
    out.push(GridPoint{t, -1}, dm.theta_grid[t].name, sum);
  }
  return out;
}

// Fixed-phi likelihood for theta: the joint integrand where (theta, phi) is
// admissible, zero where the membership indicator kills it.
template <typename S>
GridFunction<S> fixed_phi_likelihood(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                     const JointParameterSpace& jps, const ObservedRecord& rec,
                                     int phi) {
  if (phi < 0 || phi >= mm.n_phi()) throw usage_error("phi point out of range");
  const std::vector<std::size_t> compat = compatible_indices(*dm.space, rec);
  GridFunction<S> out;
  for (int t = 0; t < dm.n_theta(); ++t) {
    S sum{};
    if (jps.member(t, phi))
      for (std::size_t y : compat) sum += dm.f(t, y) * mm.g(phi, rec.m, y);
    out.push(GridPoint{t, -1}, dm.theta_grid[t].name, sum);
  }
  return out;
}

// Profile likelihood for theta: pointwise maximum of the fixed-phi
// likelihoods over the phi grid.
template <typename S>
GridFunction<S> profile_likelihood(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                   const JointParameterSpace& jps, const ObservedRecord& rec) {
  GridFunction<S> out = fixed_phi_likelihood(dm, mm, jps, rec, 0);
  for (int p = 1; p < mm.n_phi(); ++p) {
    GridFunction<S> cur = fixed_phi_likelihood(dm, mm, jps, rec, p);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (cur.values[i] > out.values[i]) out.values[i] = cur.values[i];
  }
  return out;
}

// Mechanism factor at the realised data: phi -> g_phi(m|y).  Needs the full
// realised vector, so it exists in verification mode only.
template <typename S>
GridFunction<S> mechanism_factor(const MissingnessModel<S>& mm, const RealisationInput& real) {
  const ValueVec& y = real.require_full("the mechanism factor");
  const std::size_t y_idx = mm.space->index_of(y);
  GridFunction<S> out;
  for (int p = 0; p < mm.n_phi(); ++p)
    out.push(GridPoint{-1, p}, mm.phi_grid[p].name, mm.g(p, real.rec.m, y_idx));
  return out;
}

// Profiles a multi-component theta grid down to one component, keyed by that
// component's rendered value.
template <typename S>
GridFunction<S> profile_out_nuisance(const GridFunction<S>& gf,
                                     const std::vector<ParamPoint>& theta_grid,
                                     std::size_t keep_component) {
  std::vector<std::string> keys;
  keys.reserve(gf.size());
  for (const GridPoint& p : gf.domain) {
    if (p.theta < 0) throw structural_error("profiling needs a theta-indexed domain");
    const ParamPoint& pt = theta_grid[static_cast<std::size_t>(p.theta)];
    if (keep_component >= pt.exact_values.size())
      throw usage_error("theta point \"" + pt.name + "\" has no component " +
                        std::to_string(keep_component));
    keys.push_back(format_scalar(pt.exact_values[keep_component]));
  }
  return profile_by_keys(gf, keys);
}

template <typename S>
struct Theorem1Report {
  // Hypotheses, measured not assumed.
  bool realised_mar = false;
  bool distinct = false;
  bool positivity = false;  // some phi gives the realised record positive probability
  // Conclusions.
  bool factorises = false;
  std::vector<char> proportional_fixed_phi;  // per phi, vacuously true when g(m|y)=0
  bool proportional_profile = false;
  std::vector<std::optional<S>> constants;   // per-phi ratio of the fixed-phi object to L2
  std::optional<S> profile_constant;
  std::optional<std::string> factorisation_witness;
  bool hypotheses_hold() const { return realised_mar && distinct && positivity; }
  bool conclusions_hold() const {
    if (!factorises || !proportional_profile) return false;
    for (char c : proportional_fixed_phi)
      if (!c) return false;
    return true;
  }
};

// Checks the factorisation of the joint likelihood into the mechanism factor
// times the ignoring likelihood, and the proportionality of the fixed-phi
// and profile objects to the ignoring likelihood.  When the measured
// hypotheses all hold the conclusions are asserted.
template <typename S>
Theorem1Report<S> verify_theorem1(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                  const JointParameterSpace& jps, const RealisationInput& real,
                                  const Tolerance& tol = {}) {
  real.require_full("factorisation checking");
  Theorem1Report<S> rep;
  rep.realised_mar = classify_realised_mar(mm, real.rec, tol).holds;
  rep.distinct = jps.is_distinct();

  const GridFunction<S> l1 = joint_likelihood(dm, mm, jps, real.rec);
  const GridFunction<S> l2 = ignoring_likelihood(dm, real.rec);
  const GridFunction<S> l5 = mechanism_factor(mm, real);

  for (const S& v : l5.values)
    if (!is_zero(v)) rep.positivity = true;

  rep.factorises = true;
  {
    std::size_t i = 0;
    for (const auto& [t, p] : jps.members()) {
      const S lhs = l1.values[i];
      const S rhs = l5.values[static_cast<std::size_t>(p)] * l2.values[static_cast<std::size_t>(t)];
      if (!approx_equal(lhs, rhs, tol.equal)) {
        rep.factorises = false;
        if (!rep.factorisation_witness)
          rep.factorisation_witness = "(" + dm.theta_grid[t].name + "," + mm.phi_grid[p].name +
                                      "): " + format_scalar(lhs) + " vs " + format_scalar(rhs);
      }
      ++i;
    }
  }

  rep.proportional_fixed_phi.assign(static_cast<std::size_t>(mm.n_phi()), 0);
  rep.constants.resize(static_cast<std::size_t>(mm.n_phi()));
  for (int p = 0; p < mm.n_phi(); ++p) {
    if (is_zero(l5.values[static_cast<std::size_t>(p)])) {
      // Hypothesis of the fixed-phi claim fails here; record vacuous truth.
      rep.proportional_fixed_phi[static_cast<std::size_t>(p)] = 1;
      continue;
    }
    const GridFunction<S> l3 = fixed_phi_likelihood(dm, mm, jps, real.rec, p);
    const Proportionality<S> pr = proportional(l3, l2, tol);
    rep.proportional_fixed_phi[static_cast<std::size_t>(p)] = pr.proportional ? 1 : 0;
    rep.constants[static_cast<std::size_t>(p)] = pr.ratio;
  }

  const GridFunction<S> l4 = profile_likelihood(dm, mm, jps, real.rec);
  const Proportionality<S> prof = proportional(l4, l2, tol);
  rep.proportional_profile = rep.positivity ? prof.proportional : false;
  rep.profile_constant = prof.ratio;

  if (rep.hypotheses_hold() && !rep.conclusions_hold())
    throw theorem_violation("likelihood factorisation failed although realised MAR, "
                            "distinctness and positivity all hold");
  return rep;
}

// Restriction of the data model to the fiber b(y) = x, renormalized per
// theta.  A theta giving the fiber probability zero is a hard error.
template <typename S>
DiscreteDataModel<S> conditional_data_model(const DiscreteDataModel<S>& dm,
                                            const ConditioningFunction& cond, int x_level) {
  cond.check_total(*dm.space);
  DiscreteDataModel<S> out;
  out.space = dm.space;
  out.theta_grid = dm.theta_grid;
  out.tables.assign(dm.tables.size(), std::vector<S>(dm.space->size(), S{}));
  for (int t = 0; t < dm.n_theta(); ++t) {
    S mass{};
    for (std::size_t y = 0; y < dm.space->size(); ++y)
      if (cond.level_of[y] == x_level) mass += dm.f(t, y);
    if (is_zero(mass))
      throw model_domain_error("conditioning level \"" + cond.level_names[static_cast<std::size_t>(x_level)] +
                               "\" has probability zero under theta point \"" +
                               dm.theta_grid[t].name + "\"");
    for (std::size_t y = 0; y < dm.space->size(); ++y)
      if (cond.level_of[y] == x_level) out.tables[static_cast<std::size_t>(t)][y] = dm.f(t, y) / mass;
  }
  return out;
}

// Applicability of conditioning: the realised level must either be pinned
// down by the observed data, or every candidate level must induce the same
// conditional likelihood objects.
template <typename S>
int check_conditioning_applicability(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                     const JointParameterSpace& jps, const RealisationInput& real,
                                     const ConditioningFunction& cond, const Tolerance& tol = {}) {
  cond.check_total(*dm.space);
  std::set<int> candidates;
  for (std::size_t y : compatible_indices(*dm.space, real.rec)) candidates.insert(cond.level_of[y]);
  if (candidates.empty()) throw model_domain_error("no data vector is compatible with the record");

  int x = -1;
  if (cond.x_tilde) x = *cond.x_tilde;
  else if (real.y_full) x = cond.level_of[dm.space->index_of(*real.y_full)];

  if (candidates.size() == 1) {
    const int only = *candidates.begin();
    if (x >= 0 && x != only)
      throw validation_error("x_tilde disagrees with the level determined by the observed data");
    return only;
  }

  if (x < 0)
    throw usage_error("conditioning requires x_tilde when the observed data leave the level open");
  if (!candidates.count(x))
    throw validation_error("x_tilde is not compatible with the observed data");

  // The level is not determined; conditioning is valid only if the choice
  // cannot matter.
  std::optional<GridFunction<S>> ref2, ref1;
  for (int lv : candidates) {
    const DiscreteDataModel<S> cdm = conditional_data_model(dm, cond, lv);
    GridFunction<S> l2 = ignoring_likelihood(cdm, real.rec);
    GridFunction<S> l1 = joint_likelihood(cdm, mm, jps, real.rec);
    if (!ref2) {
      ref2 = std::move(l2);
      ref1 = std::move(l1);
      continue;
    }
    for (std::size_t i = 0; i < l2.size(); ++i)
      if (!approx_equal(l2.values[i], ref2->values[i], tol.equal))
        throw precondition_error("conditioning is not applicable: the conditional likelihood "
                                 "depends on the unobserved part of the conditioning value");
    for (std::size_t i = 0; i < l1.size(); ++i)
      if (!approx_equal(l1.values[i], ref1->values[i], tol.equal))
        throw precondition_error("conditioning is not applicable: the conditional joint "
                                 "likelihood depends on the unobserved part of the conditioning value");
  }
  return x;
}

template <typename S>
GridFunction<S> joint_likelihood_given_x(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                         const JointParameterSpace& jps, const RealisationInput& real,
                                         const ConditioningFunction& cond, const Tolerance& tol = {}) {
  const int x = check_conditioning_applicability(dm, mm, jps, real, cond, tol);
  return joint_likelihood(conditional_data_model(dm, cond, x), mm, jps, real.rec);
}

template <typename S>
GridFunction<S> ignoring_likelihood_given_x(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                            const JointParameterSpace& jps, const RealisationInput& real,
                                            const ConditioningFunction& cond, const Tolerance& tol = {}) {
  const int x = check_conditioning_applicability(dm, mm, jps, real, cond, tol);
  return ignoring_likelihood(conditional_data_model(dm, cond, x), real.rec);
}

template <typename S>
GridFunction<S> profile_likelihood_given_x(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                           const JointParameterSpace& jps, const RealisationInput& real,
                                           const ConditioningFunction& cond, const Tolerance& tol = {}) {
  const int x = check_conditioning_applicability(dm, mm, jps, real, cond, tol);
  return profile_likelihood(conditional_data_model(dm, cond, x), mm, jps, real.rec);
}

}  // namespace iglab

#endif  // IGLAB_LIKELIHOOD_HPP
