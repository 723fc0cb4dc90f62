#ifndef IGLAB_SIMULATE_HPP
#define IGLAB_SIMULATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "iglab/bayes.hpp"
#include "iglab/classify.hpp"
#include "iglab/completeness.hpp"
#include "iglab/model.hpp"
#include "iglab/rng.hpp"

namespace iglab {

inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw usage_error("probability level must lie strictly in (0,1)");
  double lo = -10, hi = 10;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

enum class IntervalRule { wald_observed, wald_naive_expected, likelihood };

inline std::string rule_name(IntervalRule r) {
  switch (r) {
    case IntervalRule::wald_observed: return "wald_observed";
    case IntervalRule::wald_naive_expected: return "wald_naive_expected";
    case IntervalRule::likelihood: return "likelihood";
  }
  return "?";
}

inline IntervalRule rule_from_name(const std::string& s) {
  if (s == "wald_observed") return IntervalRule::wald_observed;
  if (s == "wald_naive_expected") return IntervalRule::wald_naive_expected;
  if (s == "likelihood") return IntervalRule::likelihood;
  throw usage_error("unknown interval rule \"" + s + "\"");
}

enum class ConditioningMode { none, on_pattern, on_x };

// One-unit generating model plus the study protocol.  Replication draws are
// i.i.d. across units.
template <typename S>
struct SimulationPlan {
  DiscreteDataModel<S> unit_dm;
  MissingnessModel<S> unit_mm;
  int n_units = 1;
  long n_replications = 1;
  std::uint64_t seed = 0;
  int true_theta = 0;
  int true_phi = 0;
  std::size_t estimand_component = 0;
  std::vector<IntervalRule> rules;
  double confidence = 0.95;
  Rational likelihood_cutoff{1, 15};
  ConditioningMode conditioning = ConditioningMode::none;
  std::optional<Pattern> pattern_condition;
  std::optional<ConditioningFunction> x_condition;  // on the unit space
  std::optional<Prior<S>> prior;                    // enables the posterior study
  bool verify_profile_consistency = false;

  void validate() const {
    unit_dm.validate();
    unit_mm.validate();
    if (n_units < 1) throw validation_error("plan needs n_units >= 1");
    if (n_replications < 1) throw validation_error("plan needs n_replications >= 1");
    if (true_theta < 0 || true_theta >= unit_dm.n_theta())
      throw validation_error("true theta point is not on the grid");
    if (true_phi < 0 || true_phi >= unit_mm.n_phi())
      throw validation_error("true phi point is not on the grid");
    double prev = -std::numeric_limits<double>::infinity();
    for (const ParamPoint& p : unit_dm.theta_grid) {
      if (estimand_component >= p.values.size())
        throw validation_error("theta point \"" + p.name + "\" lacks estimand component " +
                               std::to_string(estimand_component));
      if (!(p.values[estimand_component] > prev))
        throw validation_error("theta grid values must increase strictly in the estimand component");
      prev = p.values[estimand_component];
    }
    if (conditioning == ConditioningMode::on_pattern && !pattern_condition)
      throw validation_error("conditioning on the pattern needs a designated pattern");
    if (conditioning == ConditioningMode::on_x) {
      if (!x_condition) throw validation_error("conditioning on x needs a conditioning block");
      x_condition->check_total(*unit_dm.space);
      if (!x_condition->x_tilde) throw validation_error("conditioning on x needs x_tilde");
    }
  }
};

namespace detail {

// Record classes: one id per (pattern, observed combination) of the unit
// space, in pattern-bits then observed-index order.
struct RecordClasses {
  std::vector<PatternSplit> splits;    // per pattern bits
  std::vector<std::size_t> offset;     // per pattern bits
  std::size_t n_classes = 0;

  explicit RecordClasses(const DataSpace& space) {
    offset.reserve(space.n_patterns());
    for (std::uint32_t bits = 0; bits < space.n_patterns(); ++bits) {
      splits.emplace_back(space, Pattern{bits, space.n_coords()});
      offset.push_back(n_classes);
      n_classes += splits.back().n_obs_combos();
    }
  }

  std::size_t class_of(std::uint32_t bits, const ValueVec& y) const {
    return offset[bits] + splits[bits].obs_index(y);
  }
};

inline double neg_second_difference(const std::vector<double>& l, const std::vector<double>& v,
                                    std::size_t j) {
  if (j == 0 || j + 1 >= l.size()) return std::numeric_limits<double>::quiet_NaN();
  if (!std::isfinite(l[j - 1]) || !std::isfinite(l[j]) || !std::isfinite(l[j + 1]))
    return std::numeric_limits<double>::quiet_NaN();
  const double d1 = (l[j] - l[j - 1]) / (v[j] - v[j - 1]);
  const double d2 = (l[j + 1] - l[j]) / (v[j + 1] - v[j]);
  return -(d2 - d1) / ((v[j + 1] - v[j - 1]) / 2.0);
}

// Per-class marginal tables of the observed part, log-transformed, plus the
// estimand values.  Shared by the runner and the information curves.
template <typename S>
struct UnitTables {
  RecordClasses classes;
  std::vector<std::vector<double>> log_f1;  // [theta][class], -inf at zero mass
  std::vector<std::vector<S>> f1;           // [theta][class]
  std::vector<double> values;               // estimand value per theta

  UnitTables(const DiscreteDataModel<S>& dm, std::size_t component)
      : classes(*dm.space) {
    const std::size_t T = static_cast<std::size_t>(dm.n_theta());
    f1.assign(T, std::vector<S>(classes.n_classes, S{}));
    log_f1.assign(T, std::vector<double>(classes.n_classes, 0));
    for (std::size_t y = 0; y < dm.space->size(); ++y) {
      const ValueVec yv = dm.space->value_at(y);
      for (std::uint32_t bits = 0; bits < dm.space->n_patterns(); ++bits) {
        const std::size_t c = classes.class_of(bits, yv);
        for (std::size_t t = 0; t < T; ++t) f1[t][c] += dm.f(static_cast<int>(t), y);
      }
    }
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < classes.n_classes; ++c) {
        const double v = to_double(f1[t][c]);
        log_f1[t][c] = v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
      }
    values.reserve(T);
    for (const ParamPoint& p : dm.theta_grid) values.push_back(p.values[component]);
  }
};

}  // namespace detail

// Expectation of the curvature of the per-record log-likelihood when the
// pattern law is (incorrectly) replaced by its marginal over the data:
// weight q(m) f1_theta(v; m) instead of the joint law of (m, v).  Exactly
// the true expectation when the pattern is independent of the data.
template <typename S>
double naive_expected_information(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                  int theta, int phi, int n_units, std::size_t component = 0) {
  const detail::UnitTables<S> ut(dm, component);
  const std::size_t T = static_cast<std::size_t>(dm.n_theta());
  if (theta <= 0 || theta + 1 >= static_cast<int>(T))
    throw usage_error("information needs an interior theta point for the second difference");
  double acc = 0;
  std::vector<double> logf1(T);
  for (std::uint32_t bits = 0; bits < dm.space->n_patterns(); ++bits) {
    const Pattern m{bits, dm.space->n_coords()};
    const std::size_t base = ut.classes.offset[bits];
    const std::size_t ncomb = ut.classes.splits[bits].n_obs_combos();
    S q{};
    for (std::size_t y = 0; y < dm.space->size(); ++y) q += mm.g(phi, m, y) * dm.f(theta, y);
    for (std::size_t o = 0; o < ncomb; ++o) {
      const S w = q * ut.f1[static_cast<std::size_t>(theta)][base + o];
      if (is_zero(w)) continue;
      for (std::size_t t = 0; t < T; ++t) logf1[t] = ut.log_f1[t][base + o];
      const double c = detail::neg_second_difference(logf1, ut.values, static_cast<std::size_t>(theta));
      if (!std::isfinite(c))
        throw model_domain_error("log-likelihood curvature undefined at the requested theta");
      acc += to_double(w) * c;
    }
  }
  return static_cast<double>(n_units) * acc;
}

template <typename S>
double true_expected_information(const DiscreteDataModel<S>& dm, const MissingnessModel<S>& mm,
                                 int theta, int phi, int n_units, std::size_t component = 0) {
  const detail::UnitTables<S> ut(dm, component);
  const std::size_t T = static_cast<std::size_t>(dm.n_theta());
  if (theta <= 0 || theta + 1 >= static_cast<int>(T))
    throw usage_error("information needs an interior theta point for the second difference");
  double acc = 0;
  std::vector<double> logf1(T);
  for (std::uint32_t bits = 0; bits < dm.space->n_patterns(); ++bits) {
    const Pattern m{bits, dm.space->n_coords()};
    const std::size_t base = ut.classes.offset[bits];
    const std::size_t ncomb = ut.classes.splits[bits].n_obs_combos();
    for (std::size_t o = 0; o < ncomb; ++o) {
      // Joint weight of the record (m, v) under the full generating law.
      S w{};
      for (std::size_t y = 0; y < dm.space->size(); ++y) {
        const ValueVec yv = dm.space->value_at(y);
        if (ut.classes.splits[bits].obs_index(yv) != o) continue;
        w += dm.f(theta, y) * mm.g(phi, m, y);
      }
      if (is_zero(w)) continue;
      for (std::size_t t = 0; t < T; ++t) logf1[t] = ut.log_f1[t][base + o];
      const double c = detail::neg_second_difference(logf1, ut.values, static_cast<std::size_t>(theta));
      if (!std::isfinite(c))
        throw model_domain_error("log-likelihood curvature undefined at the requested theta");
      acc += to_double(w) * c;
    }
  }
  return static_cast<double>(n_units) * acc;
}

struct RuleCoverage {
  std::string rule;
  double coverage = 0;
  double mc_se = 0;
  long n = 0;
};

struct BayesStudy {
  bool everywhere_mar = false;
  bool prior_independent = false;
  long n = 0;
  double max_tv = 0;
  long tv_exceedances = 0;  // replications with TV above tolerance
  double mean_posterior_mean = 0;
  double bias_posterior_mean = 0;
  double mc_se_posterior_mean = 0;
  double hpd_coverage = 0;
  double hpd_coverage_mc_se = 0;
};

struct SimulationReport {
  long n_replications = 0;
  long n_degenerate = 0;
  long n_boundary_mle = 0;
  long n_ties = 0;
  long n_estimates = 0;
  double true_value = 0;
  double mean_estimate = 0;
  double bias = 0;
  double sd_estimate = 0;
  double mc_se_mean = 0;
  double mc_se_sd = 0;
  long n_se_observed = 0;
  double mean_se_observed = 0;
  double mc_se_se_observed = 0;
  long n_se_naive = 0;
  double mean_se_naive = 0;
  double mc_se_se_naive = 0;
  double naive_se_at_true = 0;     // from the naive information at the true theta
  double expected_se_at_true = 0;  // from the correctly weighted information
  std::vector<RuleCoverage> coverage;
  long profile_checked = 0;
  long profile_agreed = 0;
  std::optional<BayesStudy> bayes;
};

namespace detail {

struct RepOutcome {
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double se_obs = std::numeric_limits<double>::quiet_NaN();
  double se_naive = std::numeric_limits<double>::quiet_NaN();
  std::uint8_t degenerate = 0, boundary = 0, tie = 0;
  std::uint8_t cover_wald_obs = 0, valid_wald_obs = 0;
  std::uint8_t cover_wald_naive = 0, valid_wald_naive = 0;
  std::uint8_t cover_lik = 0, valid_lik = 0;
  std::uint8_t profile_checked = 0, profile_agreed = 0;
  double post_mean = std::numeric_limits<double>::quiet_NaN();
  double post_tv = std::numeric_limits<double>::quiet_NaN();
  std::uint8_t post_cover = 0, post_valid = 0;
};

}  // namespace detail

// Draws the designated number of replications, maximizes the ignoring
// likelihood on the grid per replication, and aggregates in replication
// order.  The worker count never changes the result: replication r's draws
// come from stream (seed, r) and each worker writes only its own slots.
inline SimulationReport run_simulation(const SimulationPlan<double>& plan, int n_threads = 1) {
  plan.validate();
  const DiscreteDataModel<double>& dm = plan.unit_dm;
  const MissingnessModel<double>& mm = plan.unit_mm;
  const DataSpace& space = *dm.space;
  const std::size_t T = static_cast<std::size_t>(dm.n_theta());
  const detail::UnitTables<double> ut(dm, plan.estimand_component);

  // Generating law at the true parameters.
  std::vector<double> f_true(space.size());
  for (std::size_t y = 0; y < space.size(); ++y) f_true[y] = dm.f(plan.true_theta, y);
  std::vector<std::vector<double>> pat_dist(space.size());
  for (std::size_t y = 0; y < space.size(); ++y) {
    pat_dist[y].resize(space.n_patterns());
    for (std::uint32_t bits = 0; bits < space.n_patterns(); ++bits)
      pat_dist[y][bits] = mm.kernels[static_cast<std::size_t>(plan.true_phi)][bits][y];
  }

  // Joint per-class tables for the profile-consistency check and the
  // posterior study.
  const bool need_joint = plan.verify_profile_consistency || plan.prior.has_value();
  std::vector<std::vector<std::vector<double>>> log_s1;  // [phi][theta][class]
  if (need_joint) {
    log_s1.assign(static_cast<std::size_t>(mm.n_phi()),
                  std::vector<std::vector<double>>(T, std::vector<double>(ut.classes.n_classes, 0)));
    for (int p = 0; p < mm.n_phi(); ++p)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < ut.classes.n_classes; ++c) log_s1[static_cast<std::size_t>(p)][t][c] = 0;
    for (std::size_t y = 0; y < space.size(); ++y) {
      const ValueVec yv = space.value_at(y);
      for (std::uint32_t bits = 0; bits < space.n_patterns(); ++bits) {
        const std::size_t c = ut.classes.class_of(bits, yv);
        for (int p = 0; p < mm.n_phi(); ++p)
          for (std::size_t t = 0; t < T; ++t)
            log_s1[static_cast<std::size_t>(p)][t][c] +=
                dm.f(static_cast<int>(t), y) * mm.kernels[static_cast<std::size_t>(p)][bits][y];
      }
    }
    for (int p = 0; p < mm.n_phi(); ++p)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < ut.classes.n_classes; ++c) {
          double& v = log_s1[static_cast<std::size_t>(p)][t][c];
          v = v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
        }
  }

  // Naive information curve: per-unit, per interior theta; NaN elsewhere.
  const bool need_naive =
      std::find(plan.rules.begin(), plan.rules.end(), IntervalRule::wald_naive_expected) !=
      plan.rules.end();
  std::vector<double> naive_unit(T, std::numeric_limits<double>::quiet_NaN());
  if (need_naive) {
    if (plan.conditioning != ConditioningMode::none)
      throw usage_error("the naive expected-information rule is defined for unconditioned plans");
    // The naive weighting is evaluated at the generating phi: the point of
    // the rule is that even the right phi cannot repair the wrong weights.
    for (std::size_t th = 1; th + 1 < T; ++th)
      naive_unit[th] = naive_expected_information(dm, mm, static_cast<int>(th), plan.true_phi, 1,
                                                  plan.estimand_component);
  }

  const double z = normal_quantile(1.0 - (1.0 - plan.confidence) / 2.0);
  const double log_cutoff = std::log(to_double(plan.likelihood_cutoff));
  const double true_value = ut.values[static_cast<std::size_t>(plan.true_theta)];

  // Posterior study tables.
  const bool do_bayes = plan.prior.has_value();
  std::vector<double> log_prior_joint, log_prior_theta;
  bool prior_independent = false, everywhere_mar = false;
  if (do_bayes) {
    plan.prior->validate(dm.n_theta(), mm.n_phi());
    prior_independent = plan.prior->is_independent();
    everywhere_mar = classify_everywhere_mar(mm).holds;
    log_prior_joint.resize(T * static_cast<std::size_t>(mm.n_phi()));
    for (std::size_t t = 0; t < T; ++t)
      for (int p = 0; p < mm.n_phi(); ++p) {
        const double v = plan.prior->joint[t][static_cast<std::size_t>(p)];
        log_prior_joint[t * static_cast<std::size_t>(mm.n_phi()) + static_cast<std::size_t>(p)] =
            v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
      }
    const std::vector<double> pt = plan.prior->theta_margin();
    log_prior_theta.resize(T);
    for (std::size_t t = 0; t < T; ++t)
      log_prior_theta[t] = pt[t] > 0 ? std::log(pt[t]) : -std::numeric_limits<double>::infinity();
  }

  std::vector<detail::RepOutcome> slots(static_cast<std::size_t>(plan.n_replications));

  auto run_range = [&](long lo, long hi) {
    std::vector<int> counts(ut.classes.n_classes);
    std::vector<double> logl(T), post(T), post_joint;
    if (do_bayes) post_joint.resize(T * static_cast<std::size_t>(mm.n_phi()));
    for (long r = lo; r < hi; ++r) {
      detail::RepOutcome& out = slots[static_cast<std::size_t>(r)];
      SplitMix64 rng = stream_for(plan.seed, static_cast<std::uint64_t>(r));
      std::fill(counts.begin(), counts.end(), 0);
      for (int u = 0; u < plan.n_units; ++u) {
        long attempts = 0;
        for (;;) {
          if (++attempts > 1000000)
            throw resource_error("conditioning event not hit within 1e6 draws per unit");
          const int y = rng.categorical(f_true);
          const int m = rng.categorical(pat_dist[static_cast<std::size_t>(y)]);
          if (plan.conditioning == ConditioningMode::on_pattern &&
              static_cast<std::uint32_t>(m) != plan.pattern_condition->bits)
            continue;
          if (plan.conditioning == ConditioningMode::on_x &&
              plan.x_condition->level_of[static_cast<std::size_t>(y)] != *plan.x_condition->x_tilde)
            continue;
          counts[ut.classes.class_of(static_cast<std::uint32_t>(m),
                                     space.value_at(static_cast<std::size_t>(y)))]++;
          break;
        }
      }

      // Grid maximization of the ignoring likelihood.
      std::size_t best = T;  // T means nothing admissible yet
      bool tie = false;
      for (std::size_t t = 0; t < T; ++t) {
        double l = 0;
        for (std::size_t c = 0; c < ut.classes.n_classes; ++c)
          if (counts[c]) {
            if (!std::isfinite(ut.log_f1[t][c])) {
              l = -std::numeric_limits<double>::infinity();
              break;
            }
            l += counts[c] * ut.log_f1[t][c];
          }
        logl[t] = l;
        if (!std::isfinite(l)) continue;
        if (best == T || l > logl[best]) {
          best = t;
          tie = false;
        } else if (l == logl[best]) {
          tie = true;
        }
      }
      if (best == T) {
        out.degenerate = 1;
        continue;
      }
      out.tie = tie ? 1 : 0;
      out.estimate = ut.values[best];
      const bool boundary = best == 0 || best + 1 == T;
      out.boundary = boundary ? 1 : 0;

      const double info = detail::neg_second_difference(logl, ut.values, best);
      if (std::isfinite(info) && info > 0) out.se_obs = 1.0 / std::sqrt(info);
      if (need_naive && std::isfinite(naive_unit[best]) && naive_unit[best] > 0)
        out.se_naive = 1.0 / std::sqrt(static_cast<double>(plan.n_units) * naive_unit[best]);

      for (IntervalRule rule : plan.rules) {
        switch (rule) {
          case IntervalRule::wald_observed:
            if (std::isfinite(out.se_obs)) {
              out.valid_wald_obs = 1;
              out.cover_wald_obs = std::fabs(true_value - out.estimate) <= z * out.se_obs ? 1 : 0;
            }
            break;
          case IntervalRule::wald_naive_expected:
            if (std::isfinite(out.se_naive)) {
              out.valid_wald_naive = 1;
              out.cover_wald_naive = std::fabs(true_value - out.estimate) <= z * out.se_naive ? 1 : 0;
            }
            break;
          case IntervalRule::likelihood: {
            out.valid_lik = 1;
            const double lt = logl[static_cast<std::size_t>(plan.true_theta)];
            out.cover_lik = std::isfinite(lt) && lt - logl[best] > log_cutoff ? 1 : 0;
            break;
          }
        }
      }

      if (plan.verify_profile_consistency) {
        // Profile of the joint likelihood over phi, then argmax over theta.
        std::size_t bestp = T;
        for (std::size_t t = 0; t < T; ++t) {
          double mx = -std::numeric_limits<double>::infinity();
          for (int p = 0; p < mm.n_phi(); ++p) {
            double l = 0;
            for (std::size_t c = 0; c < ut.classes.n_classes; ++c)
              if (counts[c]) {
                const double lv = log_s1[static_cast<std::size_t>(p)][t][c];
                if (!std::isfinite(lv)) {
                  l = -std::numeric_limits<double>::infinity();
                  break;
                }
                l += counts[c] * lv;
              }
            if (l > mx) mx = l;
          }
          post[t] = mx;
          if (std::isfinite(mx) && (bestp == T || mx > post[bestp])) bestp = t;
        }
        out.profile_checked = 1;
        out.profile_agreed = bestp == best ? 1 : 0;
      }

      if (do_bayes) {
        // Joint posterior on the product grid, log domain.
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < T; ++t)
          for (int p = 0; p < mm.n_phi(); ++p) {
            double l = log_prior_joint[t * static_cast<std::size_t>(mm.n_phi()) + static_cast<std::size_t>(p)];
            if (std::isfinite(l))
              for (std::size_t c = 0; c < ut.classes.n_classes && std::isfinite(l); ++c)
                if (counts[c]) {
                  const double lv = log_s1[static_cast<std::size_t>(p)][t][c];
                  l = std::isfinite(lv) ? l + counts[c] * lv : -std::numeric_limits<double>::infinity();
                }
            post_joint[t * static_cast<std::size_t>(mm.n_phi()) + static_cast<std::size_t>(p)] = l;
            if (l > mx) mx = l;
          }
        if (std::isfinite(mx)) {
          std::vector<double> marg(T, 0.0);
          double norm = 0;
          for (std::size_t t = 0; t < T; ++t)
            for (int p = 0; p < mm.n_phi(); ++p) {
              const double l = post_joint[t * static_cast<std::size_t>(mm.n_phi()) + static_cast<std::size_t>(p)];
              const double w = std::isfinite(l) ? std::exp(l - mx) : 0.0;
              marg[t] += w;
              norm += w;
            }
          for (double& w : marg) w /= norm;

          double mx2 = -std::numeric_limits<double>::infinity();
          for (std::size_t t = 0; t < T; ++t) {
            double l = log_prior_theta[t];
            if (std::isfinite(l)) {
              for (std::size_t c = 0; c < ut.classes.n_classes && std::isfinite(l); ++c)
                if (counts[c]) {
                  const double lv = ut.log_f1[t][c];
                  l = std::isfinite(lv) ? l + counts[c] * lv : -std::numeric_limits<double>::infinity();
                }
            }
            post[t] = l;
            if (l > mx2) mx2 = l;
          }
          if (std::isfinite(mx2)) {
            std::vector<double> ign(T, 0.0);
            double norm2 = 0;
            for (std::size_t t = 0; t < T; ++t) {
              ign[t] = std::isfinite(post[t]) ? std::exp(post[t] - mx2) : 0.0;
              norm2 += ign[t];
            }
            for (double& w : ign) w /= norm2;

            out.post_valid = 1;
            double tv = 0, pmean = 0;
            for (std::size_t t = 0; t < T; ++t) {
              tv += std::fabs(marg[t] - ign[t]);
              pmean += ign[t] * ut.values[t];
            }
            out.post_tv = tv / 2.0;
            out.post_mean = pmean;
            const CredibleSet<double> hpd = hpd_set(ign, plan.confidence);
            out.post_cover = 0;
            for (std::size_t i : hpd.indices)
              if (i == static_cast<std::size_t>(plan.true_theta)) out.post_cover = 1;
          }
        }
      }
    }
  };

  if (n_threads <= 1 || plan.n_replications < 2) {
    run_range(0, plan.n_replications);
  } else {
    const long nt = std::min<long>(n_threads, plan.n_replications);
    std::vector<std::thread> workers;
    const long chunk = (plan.n_replications + nt - 1) / nt;
    std::exception_ptr first_error;
    std::mutex err_mx;
    for (long w = 0; w < nt; ++w) {
      const long lo = w * chunk, hi = std::min<long>(plan.n_replications, lo + chunk);
      if (lo >= hi) break;
      workers.emplace_back([&, lo, hi] {
        try {
          run_range(lo, hi);
        } catch (...) {
          std::lock_guard<std::mutex> g(err_mx);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Aggregation in replication order; independent of the worker layout.
  SimulationReport rep;
  rep.n_replications = plan.n_replications;
  rep.true_value = true_value;
  double sum = 0, sumsq = 0;
  double sum_seo = 0, sumsq_seo = 0, sum_sen = 0, sumsq_sen = 0;
  long cov_wo = 0, n_wo = 0, cov_wn = 0, n_wn = 0, cov_lk = 0, n_lk = 0;
  double bsum_mean = 0, bsumsq_mean = 0, bmax_tv = 0;
  long b_n = 0, b_exceed = 0, b_cover = 0;
  for (const detail::RepOutcome& o : slots) {
    rep.n_degenerate += o.degenerate;
    rep.n_boundary_mle += o.boundary;
    rep.n_ties += o.tie;
    if (!o.degenerate) {
      ++rep.n_estimates;
      sum += o.estimate;
      sumsq += o.estimate * o.estimate;
    }
    if (std::isfinite(o.se_obs)) {
      ++rep.n_se_observed;
      sum_seo += o.se_obs;
      sumsq_seo += o.se_obs * o.se_obs;
    }
    if (std::isfinite(o.se_naive)) {
      ++rep.n_se_naive;
      sum_sen += o.se_naive;
      sumsq_sen += o.se_naive * o.se_naive;
    }
    cov_wo += o.cover_wald_obs;
    n_wo += o.valid_wald_obs;
    cov_wn += o.cover_wald_naive;
    n_wn += o.valid_wald_naive;
    cov_lk += o.cover_lik;
    n_lk += o.valid_lik;
    rep.profile_checked += o.profile_checked;
    rep.profile_agreed += o.profile_agreed;
    if (o.post_valid) {
      ++b_n;
      bsum_mean += o.post_mean;
      bsumsq_mean += o.post_mean * o.post_mean;
      if (o.post_tv > bmax_tv) bmax_tv = o.post_tv;
      if (o.post_tv > 1e-9) ++b_exceed;
      b_cover += o.post_cover;
    }
  }
  auto moments = [](double s, double sq, long n, double& mean, double& sd, double& se_mean,
                    double& se_sd) {
    mean = n ? s / n : 0;
    const double var = n > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1)) : 0;
    sd = std::sqrt(var);
    se_mean = n ? sd / std::sqrt(static_cast<double>(n)) : 0;
    se_sd = n > 1 ? sd / std::sqrt(2.0 * (n - 1)) : 0;
  };
  double dummy_sd = 0, dummy_se = 0;
  moments(sum, sumsq, rep.n_estimates, rep.mean_estimate, rep.sd_estimate, rep.mc_se_mean,
          rep.mc_se_sd);
  rep.bias = rep.mean_estimate - true_value;
  moments(sum_seo, sumsq_seo, rep.n_se_observed, rep.mean_se_observed, dummy_sd,
          rep.mc_se_se_observed, dummy_se);
  moments(sum_sen, sumsq_sen, rep.n_se_naive, rep.mean_se_naive, dummy_sd, rep.mc_se_se_naive,
          dummy_se);
  auto coverage_row = [](const char* name, long cov, long n) {
    RuleCoverage rc;
    rc.rule = name;
    rc.n = n;
    rc.coverage = n ? static_cast<double>(cov) / n : 0;
    rc.mc_se = n ? std::sqrt(std::max(0.0, rc.coverage * (1 - rc.coverage) / n)) : 0;
    return rc;
  };
  for (IntervalRule rule : plan.rules) switch (rule) {
      case IntervalRule::wald_observed:
        rep.coverage.push_back(coverage_row("wald_observed", cov_wo, n_wo));
        break;
      case IntervalRule::wald_naive_expected:
        rep.coverage.push_back(coverage_row("wald_naive_expected", cov_wn, n_wn));
        break;
      case IntervalRule::likelihood:
        rep.coverage.push_back(coverage_row("likelihood", cov_lk, n_lk));
        break;
    }

  const std::size_t tt = static_cast<std::size_t>(plan.true_theta);
  if (tt > 0 && tt + 1 < T && plan.conditioning == ConditioningMode::none) {
    const double ni = naive_expected_information(dm, mm, plan.true_theta, plan.true_phi,
                                                 plan.n_units, plan.estimand_component);
    const double ti = true_expected_information(dm, mm, plan.true_theta, plan.true_phi,
                                                plan.n_units, plan.estimand_component);
    rep.naive_se_at_true = ni > 0 ? 1.0 / std::sqrt(ni) : std::numeric_limits<double>::quiet_NaN();
    rep.expected_se_at_true = ti > 0 ? 1.0 / std::sqrt(ti) : std::numeric_limits<double>::quiet_NaN();
  }

  if (plan.verify_profile_consistency && classify_everywhere_mar(mm).holds &&
      rep.profile_agreed != rep.profile_checked)
    throw theorem_violation("profile and ignoring maximizers disagreed on " +
                            std::to_string(rep.profile_checked - rep.profile_agreed) +
                            " replications under an everywhere-invariant mechanism");

  if (do_bayes) {
    BayesStudy bs;
    bs.everywhere_mar = everywhere_mar;
    bs.prior_independent = prior_independent;
    bs.n = b_n;
    bs.max_tv = bmax_tv;
    bs.tv_exceedances = b_exceed;
    double m = 0, sdv = 0, sem = 0, sesd = 0;
    moments(bsum_mean, bsumsq_mean, b_n, m, sdv, sem, sesd);
    bs.mean_posterior_mean = m;
    bs.bias_posterior_mean = m - true_value;
    bs.mc_se_posterior_mean = sem;
    bs.hpd_coverage = b_n ? static_cast<double>(b_cover) / b_n : 0;
    bs.hpd_coverage_mc_se =
        b_n ? std::sqrt(std::max(0.0, bs.hpd_coverage * (1 - bs.hpd_coverage) / b_n)) : 0;
    if (everywhere_mar && prior_independent && b_exceed > 0)
      throw theorem_violation("posterior marginals differed beyond tolerance on " +
                              std::to_string(b_exceed) + " replications although the mechanism is "
                              "everywhere invariant and the prior independent");
    rep.bayes = bs;
  }
  return rep;
}

struct ExactSamplingReport {
  std::vector<Rational> mle_distribution;  // over theta indices, non-degenerate outcomes
  Rational mean{0};
  Rational variance{0};
  Rational tie_mass{0};
  Rational degenerate_mass{0};
  Rational boundary_mass{0};
  std::size_t n_outcomes = 0;
};

// Full enumeration of the n-unit experiment with exact probabilities: the
// authoritative check on the Monte Carlo runner.  Input scalars lift into
// the exact field, so the law is exact whatever the source arithmetic.
template <typename S>
ExactSamplingReport exact_repeated_sampling(const DiscreteDataModel<S>& dm,
                                               const MissingnessModel<S>& mm, int theta_true,
                                               int phi_true, int n_units,
                                               std::size_t estimand_component = 0,
                                               std::size_t cap = 2000000) {
  if (n_units < 1 || n_units > 4)
    throw usage_error("exact enumeration supports 1 to 4 units");
  const DataSpace& space = *dm.space;
  const std::size_t T = static_cast<std::size_t>(dm.n_theta());
  const detail::RecordClasses classes(space);

  // Per-unit outcome list with positive probability.
  struct Outcome {
    std::size_t cls;
    Rational p;
  };
  std::vector<Outcome> unit;
  for (std::size_t y = 0; y < space.size(); ++y)
    for (std::uint32_t bits = 0; bits < space.n_patterns(); ++bits) {
      const Rational p = rational_from_scalar(dm.f(theta_true, y)) *
                         rational_from_scalar(mm.kernels[static_cast<std::size_t>(phi_true)][bits][y]);
      if (p == 0) continue;
      unit.push_back({classes.class_of(bits, space.value_at(y)), p});
    }
  double total_d = 1;
  for (int u = 0; u < n_units; ++u) total_d *= static_cast<double>(unit.size());
  if (total_d > static_cast<double>(cap))
    throw resource_error("exact enumeration would visit " + std::to_string(total_d) +
                         " outcomes, cap is " + std::to_string(cap));

  // Exact per-class marginals.
  std::vector<std::vector<Rational>> f1(T, std::vector<Rational>(classes.n_classes, Rational(0)));
  for (std::size_t y = 0; y < space.size(); ++y) {
    const ValueVec yv = space.value_at(y);
    for (std::uint32_t bits = 0; bits < space.n_patterns(); ++bits) {
      const std::size_t c = classes.class_of(bits, yv);
      for (std::size_t t = 0; t < T; ++t) f1[t][c] += rational_from_scalar(dm.f(static_cast<int>(t), y));
    }
  }

  std::vector<Rational> theta_values;
  theta_values.reserve(T);
  for (const ParamPoint& p : dm.theta_grid) {
    if (estimand_component < p.exact_values.size()) {
      theta_values.push_back(p.exact_values[estimand_component]);
    } else if (estimand_component < p.values.size()) {
      theta_values.push_back(rational_from_double(p.values[estimand_component]));
    } else {
      throw validation_error("theta point \"" + p.name + "\" lacks estimand component " +
                             std::to_string(estimand_component));
    }
  }

  ExactSamplingReport rep;
  rep.mle_distribution.assign(T, Rational(0));
  std::vector<int> odo(static_cast<std::size_t>(n_units), 0);
  std::vector<int> counts(classes.n_classes);
  Rational live_mass(0);
  for (;;) {
    ++rep.n_outcomes;
    Rational p(1);
    std::fill(counts.begin(), counts.end(), 0);
    for (int u = 0; u < n_units; ++u) {
      const Outcome& oc = unit[static_cast<std::size_t>(odo[static_cast<std::size_t>(u)])];
      p *= oc.p;
      ++counts[oc.cls];
    }
    // Exact grid argmax of the product of per-class marginals.
    std::size_t best = T;
    bool tie = false;
    Rational bestval(0);
    for (std::size_t t = 0; t < T; ++t) {
      Rational l(1);
      bool zero = false;
      for (std::size_t c = 0; c < classes.n_classes; ++c)
        if (counts[c]) {
          if (f1[t][c] == 0) {
            zero = true;
            break;
          }
          for (int k = 0; k < counts[c]; ++k) l *= f1[t][c];
        }
      if (zero) continue;
      if (best == T || l > bestval) {
        best = t;
        bestval = l;
        tie = false;
      } else if (l == bestval) {
        tie = true;
      }
    }
    if (best == T) {
      rep.degenerate_mass += p;
    } else {
      rep.mle_distribution[best] += p;
      live_mass += p;
      if (tie) rep.tie_mass += p;
      if (best == 0 || best + 1 == T) rep.boundary_mass += p;
    }
    int slot = n_units - 1;
    while (slot >= 0) {
      if (++odo[static_cast<std::size_t>(slot)] < static_cast<int>(unit.size())) break;
      odo[static_cast<std::size_t>(slot)] = 0;
      --slot;
    }
    if (slot < 0) break;
  }
  if (live_mass == 0)
    throw model_domain_error("every enumerated outcome is degenerate: no estimator distribution");
  // Conditional law given a non-degenerate outcome.
  for (Rational& v : rep.mle_distribution) v /= live_mass;
  for (std::size_t t = 0; t < T; ++t) rep.mean += rep.mle_distribution[t] * theta_values[t];
  for (std::size_t t = 0; t < T; ++t) {
    const Rational d = theta_values[t] - rep.mean;
    rep.variance += rep.mle_distribution[t] * d * d;
  }
  return rep;
}

}  // namespace iglab

#endif  // IGLAB_SIMULATE_HPP
