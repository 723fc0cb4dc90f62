#ifndef IGLAB_SAMPLING_HPP
#define IGLAB_SAMPLING_HPP

#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iglab/classify.hpp"
#include "iglab/likelihood.hpp"
#include "iglab/model.hpp"
#include "iglab/space.hpp"

namespace iglab {

// A statistic of the observable data: a total map from (pattern, observed
// values) to a finite label set.
struct Statistic {
  std::string name;
  std::function<std::string(const DataSpace&, const ObservedRecord&)> label;
};

inline Statistic statistic_identity() {
  return {"identity", [](const DataSpace& s, const ObservedRecord& r) { return render_observed(s, r); }};
}

// Sum of the numeric readings of the observed coordinates.  Coordinates
// without numbers make this statistic invalid.
inline Statistic statistic_sum_observed() {
  return {"sum_observed", [](const DataSpace& s, const ObservedRecord& r) {
            double sum = 0;
            std::size_t pos = 0;
            for (int j = 0; j < r.m.n; ++j) {
              if (!r.m.observed(j)) continue;
              const auto& num = s.coord(j).numbers[static_cast<std::size_t>(r.observed[pos])];
              if (!num)
                throw validation_error("sum_observed needs numeric values on coordinate \"" +
                                       s.coord(j).name + "\"");
              sum += *num;
              ++pos;
            }
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", sum);
            return std::string(buf);
          }};
}

inline Statistic statistic_count_observed() {
  return {"count_observed",
          [](const DataSpace&, const ObservedRecord& r) { return std::to_string(r.k()); }};
}

inline Statistic builtin_statistic(const std::string& name) {
  if (name == "identity") return statistic_identity();
  if (name == "sum_observed") return statistic_sum_observed();
  if (name == "count_observed") return statistic_count_observed();
  throw usage_error("unknown statistic \"" + name + "\"; built-ins are identity, sum_observed, "
                    "count_observed");
}

enum class DistSource { correct_conditional, potentially_incorrect };

// Distribution of t{o(Y,m), m} at one fixed pattern.  Outcome order is the
// order of first appearance while scanning the space enumeration, so the two
// sources align outcome-for-outcome.
template <typename S>
struct SamplingDistribution {
  DistSource source = DistSource::correct_conditional;
  Pattern m;
  std::optional<int> x_level;
  std::vector<std::string> outcomes;
  std::vector<S> probs;

  void add(const std::string& outcome, const S& p) {
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      if (outcomes[i] == outcome) {
        probs[i] += p;
        return;
      }
    outcomes.push_back(outcome);
    probs.push_back(p);
  }
};

// Law of the statistic given M = m under the joint model:
// weights f_theta(u) g_phi(m|u), renormalized.
template <typename S>
SamplingDistribution<S> correct_conditional_dist(const DiscreteDataModel<S>& dm,
                                                 const MissingnessModel<S>& mm, int theta, int phi,
                                                 const Pattern& m, const Statistic& t) {
  dm.space->check_pattern(m);
  SamplingDistribution<S> out;
  out.source = DistSource::correct_conditional;
  out.m = m;
  S denom{};
  for (std::size_t u = 0; u < dm.space->size(); ++u) {
    const S w = dm.f(theta, u) * mm.g(phi, m, u);
    denom += w;
    if (is_zero(w)) continue;
    out.add(t.label(*dm.space, extract_observed(*dm.space, dm.space->value_at(u), m)), w);
  }
  if (is_zero(denom))
    throw model_domain_error("pattern " + m.str() + " has probability zero under (" +
                             dm.theta_grid[theta].name + "," + mm.phi_grid[phi].name +
                             "): conditional distribution undefined");
  for (S& p : out.probs) p /= denom;
  return out;
}

// Law of the statistic under the data model alone, the mechanism ignored.
template <typename S>
SamplingDistribution<S> potentially_incorrect_dist(const DiscreteDataModel<S>& dm, int theta,
                                                   const Pattern& m, const Statistic& t) {
  dm.space->check_pattern(m);
  SamplingDistribution<S> out;
  out.source = DistSource::potentially_incorrect;
  out.m = m;
  for (std::size_t u = 0; u < dm.space->size(); ++u) {
    const S& w = dm.f(theta, u);
    if (is_zero(w)) continue;
    out.add(t.label(*dm.space, extract_observed(*dm.space, dm.space->value_at(u), m)), w);
  }
  return out;
}

// Aligns two outcome-labeled distributions and returns half the L1 distance.
template <typename S>
S distribution_tv(const SamplingDistribution<S>& a, const SamplingDistribution<S>& b) {
  std::map<std::string, S> diff;
  for (std::size_t i = 0; i < a.outcomes.size(); ++i) diff[a.outcomes[i]] += a.probs[i];
  for (std::size_t i = 0; i < b.outcomes.size(); ++i) diff[b.outcomes[i]] -= b.probs[i];
  S acc{};
  for (const auto& [k, v] : diff) acc += v >= S{} ? v : S{} - v;
  return acc / scalar_from_rational<S>(Rational(2));
}

template <typename S>
struct Theorem3Cell {
  int theta = -1, phi = -1;
  bool positivity = false;  // the conditioning event has positive probability
  std::optional<S> tv;      // absent when the cell is skipped
};

template <typename S>
struct Theorem3Report {
  bool realised_mcar = false;  // the relevant constancy hypothesis
  std::vector<Theorem3Cell<S>> cells;
  int skipped = 0;
};

// Per (theta, phi): total variation between the two distributions at the
// realised pattern.  Zero distance is asserted wherever the constancy
// hypothesis and the cell's positivity side condition both hold.
template <typename S>
Theorem3Report<S> verify_theorem3(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                  const ObservedRecord& rec, const Statistic& t,
                                  const Tolerance& tol = {}) {
  Theorem3Report<S> rep;
  rep.realised_mcar = classify_realised_mcar(mm, rec, tol).holds;
  for (int th = 0; th < dm.n_theta(); ++th)
    for (int p = 0; p < mm.n_phi(); ++p) {
      Theorem3Cell<S> cell;
      cell.theta = th;
      cell.phi = p;
      S denom{};
      for (std::size_t u = 0; u < dm.space->size(); ++u) denom += dm.f(th, u) * mm.g(p, rec.m, u);
      cell.positivity = !is_zero(denom);
      if (!cell.positivity) {
        ++rep.skipped;
        rep.cells.push_back(std::move(cell));
        continue;
      }
      const SamplingDistribution<S> correct = correct_conditional_dist(dm, mm, th, p, rec.m, t);
      const SamplingDistribution<S> incorrect = potentially_incorrect_dist(dm, th, rec.m, t);
      cell.tv = distribution_tv(correct, incorrect);
      if (rep.realised_mcar && !approx_equal(*cell.tv, S{}, tol.equal))
        throw theorem_violation("sampling distributions differ at (" + dm.theta_grid[th].name +
                                "," + mm.phi_grid[p].name + ") although the realised pattern "
                                "probability is constant; total variation " + format_scalar(*cell.tv));
      rep.cells.push_back(std::move(cell));
    }
  return rep;
}

// Conditional-on-X variants: the data model is replaced by its restriction
// to the realised fiber.  Applicability follows the likelihood rules.
template <typename S>
SamplingDistribution<S> correct_conditional_dist_given_x(const DiscreteDataModel<S>& dm,
                                                         const MissingnessModel<S>& mm,
                                                         const JointParameterSpace& jps,
                                                         int theta, int phi,
                                                         const RealisationInput& real,
                                                         const ConditioningFunction& cond,
                                                         const Statistic& t, const Tolerance& tol = {}) {
  const int x = check_conditioning_applicability(dm, mm, jps, real, cond, tol);
  SamplingDistribution<S> out =
      correct_conditional_dist(conditional_data_model(dm, cond, x), mm, theta, phi, real.rec.m, t);
  out.x_level = x;
  return out;
}

template <typename S>
SamplingDistribution<S> potentially_incorrect_dist_given_x(const DiscreteDataModel<S>& dm,
                                                           const MissingnessModel<S>& mm,
                                                           const JointParameterSpace& jps, int theta,
                                                           const RealisationInput& real,
                                                           const ConditioningFunction& cond,
                                                           const Statistic& t, const Tolerance& tol = {}) {
  const int x = check_conditioning_applicability(dm, mm, jps, real, cond, tol);
  SamplingDistribution<S> out =
      potentially_incorrect_dist(conditional_data_model(dm, cond, x), theta, real.rec.m, t);
  out.x_level = x;
  return out;
}

// Theorem check on the fiber: the constancy hypothesis weakens to
// fiber-wise constancy of the realised pattern probability.
template <typename S>
Theorem3Report<S> verify_theorem3_given_x(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                          const JointParameterSpace& jps, const RealisationInput& real,
                                          const ConditioningFunction& cond, const Statistic& t,
                                          const Tolerance& tol = {}) {
  const int x = check_conditioning_applicability(dm, mm, jps, real, cond, tol);
  const DiscreteDataModel<S> cdm = conditional_data_model(dm, cond, x);
  Theorem3Report<S> rep;
  rep.realised_mcar =
      classify_covariate_dependent_mcar(mm, real, cond, tol).realised.holds;
  for (int th = 0; th < dm.n_theta(); ++th)
    for (int p = 0; p < mm.n_phi(); ++p) {
      Theorem3Cell<S> cell;
      cell.theta = th;
      cell.phi = p;
      S denom{};
      for (std::size_t u = 0; u < cdm.space->size(); ++u) denom += cdm.f(th, u) * mm.g(p, real.rec.m, u);
      cell.positivity = !is_zero(denom);
      if (!cell.positivity) {
        ++rep.skipped;
        rep.cells.push_back(std::move(cell));
        continue;
      }
      const SamplingDistribution<S> correct =
          correct_conditional_dist(cdm, mm, th, p, real.rec.m, t);
      const SamplingDistribution<S> incorrect = potentially_incorrect_dist(cdm, th, real.rec.m, t);
      cell.tv = distribution_tv(correct, incorrect);
      if (rep.realised_mcar && !approx_equal(*cell.tv, S{}, tol.equal))
        throw theorem_violation("fiber-conditional sampling distributions differ at (" +
                                dm.theta_grid[th].name + "," + mm.phi_grid[p].name +
                                ") although the pattern probability is constant on the fiber");
      rep.cells.push_back(std::move(cell));
    }
  return rep;
}

}  // namespace iglab

#endif  // IGLAB_SAMPLING_HPP
