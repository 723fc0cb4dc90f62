#ifndef IGLAB_CLASSIFY_HPP
#define IGLAB_CLASSIFY_HPP

#include <optional>
#include <string>
#include <vector>

#include "iglab/model.hpp"
#include "iglab/numeric.hpp"
#include "iglab/space.hpp"

namespace iglab {

// A violating tuple: g_phi(m|y) != g_phi(m|y*).  Substituting it back into
// the definition must reproduce the inequality.
template <typename S>
struct Witness {
  int phi = -1;
  Pattern m;
  std::size_t y_idx = 0;
  std::size_t y_star_idx = 0;
  S lhs{};
  S rhs{};

  std::string render(const DataSpace& space, const std::vector<ParamPoint>& phi_grid) const {
    return "phi=" + phi_grid[static_cast<std::size_t>(phi)].name + " m=" + m.str() +
           " y=" + render_values(space, space.value_at(y_idx)) +
           " y*=" + render_values(space, space.value_at(y_star_idx)) +
           " g=" + format_scalar(lhs) + " vs " + format_scalar(rhs);
  }
};

template <typename S>
struct Verdict {
  bool holds = true;
  std::optional<Witness<S>> witness;
};

namespace detail {

// Constancy of g_phi(m | .) over a set of y indices, scanning phi-major.
// The witness pairs the first index with the first deviating index.
template <typename S>
Verdict<S> constant_over(const MissingnessModel<S>& mm, const Pattern& m,
                         const std::vector<std::size_t>& ys, const Tolerance& tol) {
  Verdict<S> v;
  if (ys.size() < 2) return v;
  for (int phi = 0; phi < mm.n_phi(); ++phi) {
    const S& base = mm.g(phi, m, ys[0]);
    for (std::size_t k = 1; k < ys.size(); ++k) {
      const S& cur = mm.g(phi, m, ys[k]);
      if (!approx_equal(base, cur, tol.equal)) {
        v.holds = false;
        v.witness = Witness<S>{phi, m, ys[0], ys[k], base, cur};
        return v;
      }
    }
  }
  return v;
}

inline std::vector<std::size_t> all_indices(const DataSpace& space) {
  std::vector<std::size_t> ys(space.size());
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = i;
  return ys;
}

}  // namespace detail

// Pattern probability invariant over data vectors compatible with the record,
// for every phi.
template <typename S>
Verdict<S> classify_realised_mar(const MissingnessModel<S>& mm, const ObservedRecord& rec,
                                 const Tolerance& tol = {}) {
  return detail::constant_over(mm, rec.m, compatible_indices(*mm.space, rec), tol);
}

// The same invariance for every pattern, within every class of data vectors
// sharing that pattern's observed part.
template <typename S>
Verdict<S> classify_everywhere_mar(const MissingnessModel<S>& mm, const Tolerance& tol = {}) {
  const DataSpace& space = *mm.space;
  for (std::uint32_t bits = 0; bits < space.n_patterns(); ++bits) {
    Pattern m{bits, space.n_coords()};
    // Group the space by observed part; grouping key is the observed record.
    std::vector<std::vector<std::size_t>> groups;
    std::vector<ObservedRecord> keys;
    for (std::size_t y = 0; y < space.size(); ++y) {
      ObservedRecord key = extract_observed(space, space.value_at(y), m);
      std::size_t gi = 0;
      for (; gi < keys.size(); ++gi)
        if (keys[gi].observed == key.observed) break;
      if (gi == keys.size()) {
        keys.push_back(key);
        groups.emplace_back();
      }
      groups[gi].push_back(y);
    }
    for (const auto& ys : groups) {
      Verdict<S> v = detail::constant_over(mm, m, ys, tol);
      if (!v.holds) return v;
    }
  }
  return {};
}

// Pattern probability of the realised pattern invariant over the whole space.
template <typename S>
Verdict<S> classify_realised_mcar(const MissingnessModel<S>& mm, const ObservedRecord& rec,
                                  const Tolerance& tol = {}) {
  return detail::constant_over(mm, rec.m, detail::all_indices(*mm.space), tol);
}

// Every pattern's probability invariant over the whole space: M independent
// of Y under every phi.
template <typename S>
Verdict<S> classify_everywhere_mcar(const MissingnessModel<S>& mm, const Tolerance& tol = {}) {
  const DataSpace& space = *mm.space;
  for (std::uint32_t bits = 0; bits < space.n_patterns(); ++bits) {
    Pattern m{bits, space.n_coords()};
    Verdict<S> v = detail::constant_over(mm, m, detail::all_indices(space), tol);
    if (!v.holds) return v;
  }
  return {};
}

// Per-unit reading of the everywhere condition.  Valid only when the model
// declares an i.i.d. unit structure.
template <typename S>
Verdict<S> classify_everywhere_mar_iid(const MissingnessModel<S>& mm, const Tolerance& tol = {}) {
  if (!mm.iid) throw usage_error("the i.i.d. everywhere condition needs an iid block in the model");
  MissingnessModel<S> unit;
  unit.space = mm.iid->unit_space;
  unit.phi_grid = mm.phi_grid;
  unit.kernels = mm.iid->unit_kernels;
  return classify_everywhere_mar(unit, tol);
}

template <typename S>
struct CovariateMcarVerdict {
  Verdict<S> realised;    // within the realised fiber, realised pattern only
  Verdict<S> everywhere;  // within every fiber, every pattern
};

// Weaker condition: pattern probability invariant within fibers of b.
// The realised form needs x_tilde; it falls back to b(y_tilde) when the
// realisation carries the full vector.
template <typename S>
CovariateMcarVerdict<S> classify_covariate_dependent_mcar(const MissingnessModel<S>& mm,
                                                          const RealisationInput& real,
                                                          const ConditioningFunction& cond,
                                                          const Tolerance& tol = {}) {
  const DataSpace& space = *mm.space;
  cond.check_total(space);
  CovariateMcarVerdict<S> out;

  int x = -1;
  if (cond.x_tilde) {
    x = *cond.x_tilde;
  } else if (real.y_full) {
    x = cond.level_of[space.index_of(*real.y_full)];
  } else {
    throw usage_error("covariate-dependent classification requires x_tilde or a full realisation");
  }
  out.realised = detail::constant_over(mm, real.rec.m, cond.fiber(x), tol);

  for (std::uint32_t bits = 0; bits < space.n_patterns() && out.everywhere.holds; ++bits) {
    Pattern m{bits, space.n_coords()};
    for (int lv = 0; lv < cond.n_levels(); ++lv) {
      Verdict<S> v = detail::constant_over(mm, m, cond.fiber(lv), tol);
      if (!v.holds) {
        out.everywhere = v;
        break;
      }
    }
  }
  return out;
}

// Advisory, non-standard reading: the realised-pattern invariance at one
// designated phi only, not quantified over the grid.
template <typename S>
Verdict<S> mar_at_point(const MissingnessModel<S>& mm, const ObservedRecord& rec, int phi0,
                        const Tolerance& tol = {}) {
  if (phi0 < 0 || phi0 >= mm.n_phi()) throw usage_error("phi point out of range");
  const std::vector<std::size_t> ys = compatible_indices(*mm.space, rec);
  Verdict<S> v;
  if (ys.size() < 2) return v;
  const S& base = mm.g(phi0, rec.m, ys[0]);
  for (std::size_t k = 1; k < ys.size(); ++k) {
    const S& cur = mm.g(phi0, rec.m, ys[k]);
    if (!approx_equal(base, cur, tol.equal)) {
      v.holds = false;
      v.witness = Witness<S>{phi0, rec.m, ys[0], ys[k], base, cur};
      return v;
    }
  }
  return v;
}

template <typename S>
struct MechanismClassification {
  std::optional<Verdict<S>> realised_mar;
  Verdict<S> everywhere_mar;
  std::optional<Verdict<S>> realised_mcar;
  Verdict<S> everywhere_mcar;
  std::optional<Verdict<S>> iid_everywhere_mar;
  std::optional<CovariateMcarVerdict<S>> covariate_mcar;
  bool lattice_consistent = true;
};

// Runs every applicable check.  The four implication arrows between the
// verdicts are asserted; a violation is an internal error, never a report.
template <typename S>
MechanismClassification<S> classify_all(const MissingnessModel<S>& mm,
                                        const std::optional<RealisationInput>& real,
                                        const std::optional<ConditioningFunction>& cond,
                                        const Tolerance& tol = {}) {
  MechanismClassification<S> out;
  out.everywhere_mar = classify_everywhere_mar(mm, tol);
  out.everywhere_mcar = classify_everywhere_mcar(mm, tol);
  if (real) {
    out.realised_mar = classify_realised_mar(mm, real->rec, tol);
    out.realised_mcar = classify_realised_mcar(mm, real->rec, tol);
  }
  if (mm.iid) out.iid_everywhere_mar = classify_everywhere_mar_iid(mm, tol);
  if (cond && real) out.covariate_mcar = classify_covariate_dependent_mcar(mm, *real, *cond, tol);

  auto check = [](bool antecedent, bool consequent, const char* arrow) {
    if (antecedent && !consequent)
      throw theorem_violation(std::string("implication violated: ") + arrow);
  };
  if (real) {
    check(out.everywhere_mcar.holds, out.realised_mcar->holds, "everywhere MCAR => realised MCAR");
    check(out.realised_mcar->holds, out.realised_mar->holds, "realised MCAR => realised MAR");
    check(out.everywhere_mar.holds, out.realised_mar->holds, "everywhere MAR => realised MAR");
  }
  check(out.everywhere_mcar.holds, out.everywhere_mar.holds, "everywhere MCAR => everywhere MAR");
  return out;
}

}  // namespace iglab

#endif  // IGLAB_CLASSIFY_HPP
