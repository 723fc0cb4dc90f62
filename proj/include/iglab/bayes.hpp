#ifndef IGLAB_BAYES_HPP
#define IGLAB_BAYES_HPP

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "iglab/classify.hpp"
#include "iglab/grid_function.hpp"
#include "iglab/likelihood.hpp"
#include "iglab/model.hpp"

namespace iglab {

// Prior over the product grid, theta-major.  The product form is kept when
// the input supplied one; independence is decided on the joint table.
template <typename S>
struct Prior {
  std::vector<std::vector<S>> joint;  // [theta][phi]
  std::optional<std::vector<S>> p_theta;
  std::optional<std::vector<S>> p_phi;

  static Prior product(std::vector<S> pt, std::vector<S> pp) {
    Prior pr;
    pr.joint.assign(pt.size(), std::vector<S>(pp.size()));
    for (std::size_t t = 0; t < pt.size(); ++t)
      for (std::size_t p = 0; p < pp.size(); ++p) pr.joint[t][p] = pt[t] * pp[p];
    pr.p_theta = std::move(pt);
    pr.p_phi = std::move(pp);
    return pr;
  }

  static Prior uniform(int n_theta, int n_phi) {
    const S wt = scalar_from_rational<S>(Rational(1, n_theta));
    const S wp = scalar_from_rational<S>(Rational(1, n_phi));
    return product(std::vector<S>(static_cast<std::size_t>(n_theta), wt),
                   std::vector<S>(static_cast<std::size_t>(n_phi), wp));
  }

  std::vector<S> theta_margin() const {
    std::vector<S> out(joint.size(), S{});
    for (std::size_t t = 0; t < joint.size(); ++t)
      for (const S& v : joint[t]) out[t] += v;
    return out;
  }

  std::vector<S> phi_margin() const {
    std::vector<S> out(joint.empty() ? 0 : joint[0].size(), S{});
    for (const auto& row : joint)
      for (std::size_t p = 0; p < row.size(); ++p) out[p] += row[p];
    return out;
  }

  bool is_independent(const Tolerance& tol = {}) const {
    const std::vector<S> mt = theta_margin();
    const std::vector<S> mp = phi_margin();
    for (std::size_t t = 0; t < joint.size(); ++t)
      for (std::size_t p = 0; p < joint[t].size(); ++p)
        if (!approx_equal(joint[t][p], mt[t] * mp[p], tol.equal)) return false;
    return true;
  }

  void validate(int n_theta, int n_phi, const Tolerance& tol = {}) const {
    if (static_cast<int>(joint.size()) != n_theta)
      throw validation_error("prior has " + std::to_string(joint.size()) + " theta rows, expected " +
                             std::to_string(n_theta));
    S sum{};
    for (const auto& row : joint) {
      if (static_cast<int>(row.size()) != n_phi)
        throw validation_error("prior row has wrong phi length");
      for (const S& v : row) {
        if (v < S{}) throw validation_error("negative prior probability");
        sum += v;
      }
    }
    if (!approx_equal(sum, scalar_from_rational<S>(Rational(1)), tol.equal))
      throw validation_error("prior sums to " + format_scalar(sum) + ", expected 1");
  }
};

template <typename S>
struct Posterior {
  GridFunction<S> table;  // normalized
  S evidence{};           // normalizing constant
};

template <typename S>
S total_variation(const std::vector<S>& a, const std::vector<S>& b) {
  if (a.size() != b.size()) throw structural_error("total variation needs equal lengths");
  S acc{};
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] >= b[i] ? a[i] - b[i] : b[i] - a[i];
  return acc / scalar_from_rational<S>(Rational(2));
}

// Posterior over the product grid: prior times the joint likelihood, with
// the membership indicator zeroing inadmissible pairs.  The prior must not
// put mass outside the joint parameter space.
template <typename S>
Posterior<S> posterior_joint(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                             const JointParameterSpace& jps, const ObservedRecord& rec,
                             const Prior<S>& prior, const Tolerance& tol = {}) {
  prior.validate(dm.n_theta(), mm.n_phi(), tol);
  for (int t = 0; t < dm.n_theta(); ++t)
    for (int p = 0; p < mm.n_phi(); ++p)
      if (!jps.member(t, p) && !is_zero(prior.joint[t][p]))
        throw validation_error("prior puts mass on (" + dm.theta_grid[t].name + "," +
                               mm.phi_grid[p].name + ") outside the joint parameter space");
  const std::vector<std::size_t> compat = compatible_indices(*dm.space, rec);
  Posterior<S> post;
  for (int t = 0; t < dm.n_theta(); ++t)
    for (int p = 0; p < mm.n_phi(); ++p) {
      S v{};
      if (jps.member(t, p) && !is_zero(prior.joint[t][p])) {
        S l1{};
        for (std::size_t y : compat) l1 += dm.f(t, y) * mm.g(p, rec.m, y);
        v = prior.joint[t][p] * l1;
      }
      post.table.push(GridPoint{t, p}, dm.theta_grid[t].name + "," + mm.phi_grid[p].name, v);
      post.evidence += v;
    }
  if (is_zero(post.evidence))
    throw model_domain_error("realisation impossible under all parameters: posterior undefined");
  for (S& v : post.table.values) v /= post.evidence;
  return post;
}

template <typename S>
Posterior<S> posterior_ignoring(const DiscreteDataModel<S>& dm, const ObservedRecord& rec,
                                const std::vector<S>& p_theta, const Tolerance& tol = {}) {
  if (static_cast<int>(p_theta.size()) != dm.n_theta())
    throw validation_error("theta prior length does not match the grid");
  S psum{};
  for (const S& v : p_theta) {
    if (v < S{}) throw validation_error("negative prior probability");
    psum += v;
  }
  if (!approx_equal(psum, scalar_from_rational<S>(Rational(1)), tol.equal))
    throw validation_error("theta prior sums to " + format_scalar(psum) + ", expected 1");
  const GridFunction<S> l2 = ignoring_likelihood(dm, rec);
  Posterior<S> post;
  for (int t = 0; t < dm.n_theta(); ++t) {
    const S v = p_theta[static_cast<std::size_t>(t)] * l2.values[static_cast<std::size_t>(t)];
    post.table.push(GridPoint{t, -1}, dm.theta_grid[t].name, v);
    post.evidence += v;
  }
  if (is_zero(post.evidence))
    throw model_domain_error("realisation impossible under all parameters: posterior undefined");
  for (S& v : post.table.values) v /= post.evidence;
  return post;
}

// Theta margin of a joint posterior, in theta order.
template <typename S>
std::vector<S> marginal_theta(const Posterior<S>& joint_post, int n_theta) {
  std::vector<S> out(static_cast<std::size_t>(n_theta), S{});
  for (std::size_t i = 0; i < joint_post.table.size(); ++i) {
    const int t = joint_post.table.domain[i].theta;
    out[static_cast<std::size_t>(t)] += joint_post.table.values[i];
  }
  return out;
}

// Highest-density point set reaching the level; ties resolved toward the
// smaller grid index.  Achieved mass is reported, since grids overshoot.
template <typename S>
struct CredibleSet {
  std::vector<std::size_t> indices;
  S achieved{};
};

template <typename S>
CredibleSet<S> hpd_set(const std::vector<S>& probs, const S& level) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  CredibleSet<S> out;
  for (std::size_t i : order) {
    if (out.achieved >= level) break;
    out.indices.push_back(i);
    out.achieved += probs[i];
  }
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

// Equal-tailed point set in grid order: indices whose cumulative interval
// overlaps (alpha/2, 1 - alpha/2).
template <typename S>
CredibleSet<S> central_set(const std::vector<S>& probs, const S& level) {
  const S one = scalar_from_rational<S>(Rational(1));
  const S half_alpha = (one - level) / scalar_from_rational<S>(Rational(2));
  CredibleSet<S> out;
  S before{};
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const S after = before + probs[i];
    if (after > half_alpha && before < one - half_alpha && !is_zero(probs[i])) {
      out.indices.push_back(i);
      out.achieved += probs[i];
    }
    before = after;
  }
  return out;
}

template <typename S>
struct Theorem2Report {
  // Hypotheses.
  bool realised_mar = false;
  bool prior_independent = false;
  bool distinct = false;  // informational; not needed for the assertion
  // Comparison.
  S tv{};
  std::vector<S> marginal_from_joint;
  std::vector<S> from_ignoring;
  // Point summaries of the ignoring posterior.
  std::optional<double> posterior_mean;
  CredibleSet<S> hpd;
  CredibleSet<S> central;
};

// Compares the theta margin of the joint posterior with the posterior built
// from the ignoring likelihood and the prior's theta margin.  Equality is
// asserted under realised MAR plus prior independence.
template <typename S>
Theorem2Report<S> verify_theorem2(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                  const JointParameterSpace& jps, const RealisationInput& real,
                                  const Prior<S>& prior, const Tolerance& tol = {},
                                  const Rational& credible_level = Rational(95, 100)) {
  Theorem2Report<S> rep;
  rep.realised_mar = classify_realised_mar(mm, real.rec, tol).holds;
  rep.prior_independent = prior.is_independent(tol);
  rep.distinct = jps.is_distinct();

  const Posterior<S> joint_post = posterior_joint(dm, mm, jps, real.rec, prior, tol);
  rep.marginal_from_joint = marginal_theta(joint_post, dm.n_theta());

  std::vector<S> pt = prior.theta_margin();
  const Posterior<S> ign = posterior_ignoring(dm, real.rec, pt, tol);
  rep.from_ignoring = ign.table.values;

  rep.tv = total_variation(rep.marginal_from_joint, rep.from_ignoring);
  if (rep.realised_mar && rep.prior_independent && !approx_equal(rep.tv, S{}, tol.equal))
    throw theorem_violation("posterior marginals differ although realised MAR and prior "
                            "independence both hold; total variation " + format_scalar(rep.tv));

  double mean = 0;
  bool have_values = true;
  for (int t = 0; t < dm.n_theta(); ++t) {
    if (dm.theta_grid[t].values.empty()) {
      have_values = false;
      break;
    }
    mean += to_double(ign.table.values[static_cast<std::size_t>(t)]) * dm.theta_grid[t].values[0];
  }
  if (have_values) rep.posterior_mean = mean;
  const S level = scalar_from_rational<S>(credible_level);
  rep.hpd = hpd_set(ign.table.values, level);
  rep.central = central_set(ign.table.values, level);
  return rep;
}

}  // namespace iglab

#endif  // IGLAB_BAYES_HPP
