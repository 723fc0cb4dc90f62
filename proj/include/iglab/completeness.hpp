#ifndef IGLAB_COMPLETENESS_HPP
#define IGLAB_COMPLETENESS_HPP

#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "iglab/classify.hpp"
#include "iglab/grid_function.hpp"
#include "iglab/likelihood.hpp"
#include "iglab/model.hpp"
#include "iglab/space.hpp"

namespace iglab {

// Index split of the space induced by a pattern: observed and missing
// sub-vectors each get a mixed-radix index, first coordinate most
// significant, matching the space enumeration order.
class PatternSplit {
 public:
  PatternSplit(const DataSpace& space, const Pattern& m) : space_(&space), m_(m) {
    space.check_pattern(m);
    for (int j = 0; j < m.n; ++j)
      (m.observed(j) ? obs_coords_ : mis_coords_).push_back(j);
    n_obs_ = 1;
    for (int j : obs_coords_) n_obs_ *= space.coord(j).size();
    n_mis_ = 1;
    for (int j : mis_coords_) n_mis_ *= space.coord(j).size();
  }

  std::size_t n_obs_combos() const { return n_obs_; }
  std::size_t n_mis_combos() const { return mis_coords_.empty() ? 0 : n_mis_; }
  bool mis_empty() const { return mis_coords_.empty(); }
  const Pattern& pattern() const { return m_; }

  std::size_t obs_index(const ValueVec& y) const { return sub_index(y, obs_coords_); }
  std::size_t mis_index(const ValueVec& y) const { return sub_index(y, mis_coords_); }

  ValueVec assemble(std::size_t obs_idx, std::size_t mis_idx) const {
    ValueVec y(static_cast<std::size_t>(m_.n), 0);
    fill(y, obs_idx, obs_coords_);
    fill(y, mis_idx, mis_coords_);
    return y;
  }

  std::string render_obs(std::size_t obs_idx) const {
    const ValueVec y = assemble(obs_idx, 0);
    std::string s = "(";
    for (std::size_t k = 0; k < obs_coords_.size(); ++k) {
      if (k) s += ",";
      s += space_->label_of(obs_coords_[k], y[static_cast<std::size_t>(obs_coords_[k])]);
    }
    return s + ")";
  }

 private:
  std::size_t sub_index(const ValueVec& y, const std::vector<int>& coords) const {
    std::size_t idx = 0;
    for (int j : coords) idx = idx * space_->coord(j).size() + static_cast<std::size_t>(y[static_cast<std::size_t>(j)]);
    return idx;
  }
  void fill(ValueVec& y, std::size_t idx, const std::vector<int>& coords) const {
    for (auto it = coords.rbegin(); it != coords.rend(); ++it) {
      const std::size_t d = space_->coord(*it).size();
      y[static_cast<std::size_t>(*it)] = static_cast<int>(idx % d);
      idx /= d;
    }
  }

  const DataSpace* space_;
  Pattern m_;
  std::vector<int> obs_coords_, mis_coords_;
  std::size_t n_obs_ = 1, n_mis_ = 1;
};

// f(y) split at a pattern into the marginal of the observed part and the
// conditional of the missing part given it.  The conditional is undefined
// where the marginal vanishes.
template <typename S>
struct PatternFactorization {
  PatternSplit split;
  std::vector<std::vector<S>> f1;               // [theta][obs index]
  std::vector<std::vector<std::vector<S>>> f2;  // [theta][obs index][mis index]
  std::vector<std::vector<char>> defined;       // f1 positive there

  const DiscreteDataModel<S>* dm = nullptr;
};

template <typename S>
PatternFactorization<S> factorize_by_pattern(const DiscreteDataModel<S>& dm, const Pattern& m) {
  PatternFactorization<S> out{PatternSplit(*dm.space, m), {}, {}, {}, &dm};
  const std::size_t no = out.split.n_obs_combos();
  const std::size_t nm = out.split.mis_empty() ? 1 : out.split.n_mis_combos();
  out.f1.assign(static_cast<std::size_t>(dm.n_theta()), std::vector<S>(no, S{}));
  out.f2.assign(static_cast<std::size_t>(dm.n_theta()),
                std::vector<std::vector<S>>(no, std::vector<S>(out.split.mis_empty() ? 0 : nm, S{})));
  out.defined.assign(static_cast<std::size_t>(dm.n_theta()), std::vector<char>(no, 0));
  for (int t = 0; t < dm.n_theta(); ++t) {
    for (std::size_t o = 0; o < no; ++o) {
      if (out.split.mis_empty()) {
        out.f1[static_cast<std::size_t>(t)][o] = dm.f(t, dm.space->index_of(out.split.assemble(o, 0)));
      } else {
        for (std::size_t mi = 0; mi < nm; ++mi)
          out.f1[static_cast<std::size_t>(t)][o] +=
              dm.f(t, dm.space->index_of(out.split.assemble(o, mi)));
      }
      if (!is_zero(out.f1[static_cast<std::size_t>(t)][o])) {
        out.defined[static_cast<std::size_t>(t)][o] = 1;
        if (!out.split.mis_empty())
          for (std::size_t mi = 0; mi < nm; ++mi)
            out.f2[static_cast<std::size_t>(t)][o][mi] =
                dm.f(t, dm.space->index_of(out.split.assemble(o, mi))) /
                out.f1[static_cast<std::size_t>(t)][o];
      }
    }
  }
  return out;
}

namespace detail {

// Forward elimination with column pivot tracking.  Rational mode uses the
// fraction-free scheme (all intermediate entries are minors, divisions
// exact); float mode uses partial pivoting with a scaled zero threshold.
template <typename S>
struct Echelon {
  std::vector<std::vector<S>> a;
  std::vector<std::size_t> pivot_cols;
};

template <typename S>
bool elim_zero(const S& v, [[maybe_unused]] double scale) {
  if constexpr (std::is_same_v<S, double>) {
    return std::fabs(v) <= 1e-10 * std::max(1.0, scale);
  } else {
    return is_zero(v);
  }
}

template <typename S>
Echelon<S> echelonize(std::vector<std::vector<S>> a) {
  Echelon<S> e;
  if (a.empty()) return e;
  const std::size_t rows = a.size(), cols = a[0].size();
  double scale = 1.0;
  if constexpr (std::is_same_v<S, double>) {
    for (const auto& row : a)
      for (double v : row) scale = std::max(scale, std::fabs(v));
  }
  S prev = scalar_from_rational<S>(Rational(1));
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < rows; ++col) {
    std::size_t sel = rows;
    if constexpr (std::is_same_v<S, double>) {
      double best = 0;
      for (std::size_t i = row; i < rows; ++i)
        if (std::fabs(a[i][col]) > best) {
          best = std::fabs(a[i][col]);
          sel = i;
        }
      if (sel == rows || elim_zero<S>(a[sel][col], scale)) continue;
    } else {
      for (std::size_t i = row; i < rows; ++i)
        if (!is_zero(a[i][col])) {
          sel = i;
          break;
        }
      if (sel == rows) continue;
    }
    std::swap(a[sel], a[row]);
    for (std::size_t i = row + 1; i < rows; ++i) {
      if constexpr (std::is_same_v<S, double>) {
        const double factor = a[i][col] / a[row][col];
        for (std::size_t j = col; j < cols; ++j) a[i][j] -= factor * a[row][j];
        a[i][col] = 0;
      } else {
        for (std::size_t j = col + 1; j < cols; ++j) {
          S num = a[row][col] * a[i][j] - a[i][col] * a[row][j];
          a[i][j] = num / prev;
        }
        a[i][col] = S{};
      }
    }
    if constexpr (!std::is_same_v<S, double>) prev = a[row][col];
    e.pivot_cols.push_back(col);
    ++row;
  }
  e.a = std::move(a);
  return e;
}

// One kernel vector of the column map, or nullopt at full column rank.
template <typename S>
std::optional<std::vector<S>> kernel_vector(const Echelon<S>& e, std::size_t cols) {
  const std::size_t rank = e.pivot_cols.size();
  if (rank >= cols) return std::nullopt;
  std::size_t free_col = 0;
  {
    std::vector<char> is_pivot(cols, 0);
    for (std::size_t c : e.pivot_cols) is_pivot[c] = 1;
    while (free_col < cols && is_pivot[free_col]) ++free_col;
  }
  std::vector<S> h(cols, S{});
  h[free_col] = scalar_from_rational<S>(Rational(1));
  for (std::size_t k = rank; k-- > 0;) {
    const std::size_t pc = e.pivot_cols[k];
    S acc{};
    for (std::size_t j = pc + 1; j < cols; ++j) acc += e.a[k][j] * h[j];
    h[pc] = (S{} - acc) / e.a[k][pc];
  }
  return h;
}

}  // namespace detail

template <typename S>
struct CompletenessReport {
  std::size_t n_theta_rows = 0;  // rows kept (conditional defined there)
  std::size_t n_mis = 0;         // columns
  std::size_t dropped_thetas = 0;
  std::size_t rank = 0;
  bool grid_complete = false;
  bool trivially_complete = false;  // empty missing part
  std::optional<std::vector<S>> witness;  // h with sum_mis h * f2 = 0 for all kept theta
};

// Columns of the conditional table, viewed as functionals on the theta grid,
// must be linearly independent for the family to separate functions of the
// missing part.
template <typename S>
CompletenessReport<S> check_grid_completeness(const PatternFactorization<S>& fact,
                                              std::size_t obs_idx) {
  CompletenessReport<S> rep;
  if (fact.split.mis_empty()) {
    rep.trivially_complete = true;
    rep.grid_complete = true;
    return rep;
  }
  rep.n_mis = fact.split.n_mis_combos();
  std::vector<std::vector<S>> matrix;
  for (std::size_t t = 0; t < fact.f1.size(); ++t) {
    if (!fact.defined[t][obs_idx]) {
      ++rep.dropped_thetas;
      continue;
    }
    matrix.push_back(fact.f2[t][obs_idx]);
  }
  rep.n_theta_rows = matrix.size();
  if (matrix.empty())
    throw model_domain_error("observed value " + fact.split.render_obs(obs_idx) +
                             " has probability zero under every theta point");
  const detail::Echelon<S> e = detail::echelonize(matrix);
  rep.rank = e.pivot_cols.size();
  rep.grid_complete = rep.rank == rep.n_mis;
  if (!rep.grid_complete) rep.witness = detail::kernel_vector(e, rep.n_mis);
  return rep;
}

template <typename S>
struct AppendixReport {
  // Hypotheses, measured.
  bool distinct = false;
  bool grid_complete = false;
  bool positivity_all_phi = false;  // g_phi(m|y) > 0 at the realisation, for every phi
  bool observable = false;          // the ignoring likelihood is not identically zero
  // The two sides of the equivalence.
  bool proportional_all_phi = false;
  bool realised_mar = false;
  // The theta-invariant ratio per phi, where proportional, and its match
  // against the kernel value on the compatible set.
  std::vector<std::optional<S>> q_values;
  bool q_matches_kernel = true;
  CompletenessReport<S> completeness;
  std::optional<std::string> proportionality_witness;

  bool hypotheses_hold() const {
    return distinct && grid_complete && positivity_all_phi && observable;
  }
  bool biconditional_holds() const { return proportional_all_phi == realised_mar; }
};

// The necessity-and-sufficiency check: with a complete conditional family,
// positivity and distinct parameters, proportionality of the joint
// likelihood to the ignoring likelihood at every phi is equivalent to
// realised MAR.  The equivalence is asserted whenever the hypotheses hold.
template <typename S>
AppendixReport<S> verify_appendix_theorem(const DiscreteDataModel<S>& dm,
                                          const MissingnessModel<S>& mm,
                                          const JointParameterSpace& jps,
                                          const RealisationInput& real, const Tolerance& tol = {}) {
  const ValueVec& y_full = real.require_full("the necessity check");
  AppendixReport<S> rep;
  rep.distinct = jps.is_distinct();
  rep.realised_mar = classify_realised_mar(mm, real.rec, tol).holds;

  const PatternFactorization<S> fact = factorize_by_pattern(dm, real.rec.m);
  const std::size_t obs_idx = fact.split.obs_index(y_full);
  rep.completeness = check_grid_completeness(fact, obs_idx);
  rep.grid_complete = rep.completeness.grid_complete && rep.completeness.dropped_thetas == 0;

  const std::size_t y_idx = mm.space->index_of(y_full);
  rep.positivity_all_phi = true;
  for (int p = 0; p < mm.n_phi(); ++p)
    if (is_zero(mm.g(p, real.rec.m, y_idx))) rep.positivity_all_phi = false;

  const GridFunction<S> l2 = ignoring_likelihood(dm, real.rec);
  for (const S& v : l2.values)
    if (!is_zero(v)) rep.observable = true;

  const std::vector<std::size_t> compat = compatible_indices(*dm.space, real.rec);
  rep.proportional_all_phi = true;
  rep.q_values.resize(static_cast<std::size_t>(mm.n_phi()));
  for (int p = 0; p < mm.n_phi(); ++p) {
    const GridFunction<S> l3 = fixed_phi_likelihood(dm, mm, jps, real.rec, p);
    const Proportionality<S> pr = proportional(l3, l2, tol);
    if (!pr.proportional) {
      rep.proportional_all_phi = false;
      if (!rep.proportionality_witness)
        rep.proportionality_witness =
            "phi=" + mm.phi_grid[p].name + " at theta point index " +
            (pr.witness ? std::to_string(*pr.witness) : std::string("?"));
      continue;
    }
    rep.q_values[static_cast<std::size_t>(p)] = pr.ratio;
    if (rep.realised_mar && pr.ratio) {
      // In the MAR direction the ratio must be the (constant) kernel value
      // on the compatible set.
      for (std::size_t y : compat)
        if (!approx_equal(*pr.ratio, mm.g(p, real.rec.m, y), tol.equal)) {
          rep.q_matches_kernel = false;
          break;
        }
    }
  }

  if (rep.hypotheses_hold() && !rep.biconditional_holds())
    throw theorem_violation(std::string("necessity equivalence failed: proportionality ") +
                            (rep.proportional_all_phi ? "holds" : "fails") + " but realised MAR " +
                            (rep.realised_mar ? "holds" : "fails") +
                            " with completeness, distinctness and positivity all in force");
  if (rep.realised_mar && !rep.q_matches_kernel)
    throw theorem_violation("the theta-invariant likelihood ratio does not equal the kernel "
                            "value on the compatible set under realised MAR");
  return rep;
}

}  // namespace iglab

#endif  // IGLAB_COMPLETENESS_HPP
