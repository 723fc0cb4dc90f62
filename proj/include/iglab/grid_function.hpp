#ifndef IGLAB_GRID_FUNCTION_HPP
#define IGLAB_GRID_FUNCTION_HPP

#include <optional>
#include <string>
#include <vector>

#include "iglab/numeric.hpp"

namespace iglab {

// A nonnegative function on a labeled parameter grid.  Points carry a theta
// index, a phi index, or both; -1 marks an absent axis.
struct GridPoint {
  int theta = -1;
  int phi = -1;

  friend bool operator==(const GridPoint& a, const GridPoint& b) {
    return a.theta == b.theta && a.phi == b.phi;
  }
};

template <typename S>
struct GridFunction {
  std::vector<GridPoint> domain;
  std::vector<std::string> labels;  // aligned with domain, for rendering
  std::vector<S> values;

  std::size_t size() const { return domain.size(); }

  void push(GridPoint p, std::string label, S value) {
    if (value < S{}) throw structural_error("negative grid function value");
    domain.push_back(p);
    labels.push_back(std::move(label));
    values.push_back(std::move(value));
  }

  // Smallest argmax index; ties resolved downward by the scan order.
  std::size_t argmax() const {
    if (values.empty()) throw structural_error("argmax of an empty grid function");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] > values[best]) best = i;
    return best;
  }
};

template <typename S>
struct Proportionality {
  bool proportional = false;
  std::optional<S> ratio;               // u = ratio * v on the joint support
  std::optional<std::size_t> witness;   // failing index otherwise
};

// u is proportional to v iff no point has exactly one of the two zero and
// the ratio is constant where both are positive.  Two identically zero
// functions count as proportional with no ratio.
template <typename S>
Proportionality<S> proportional(const GridFunction<S>& u, const GridFunction<S>& v,
                                const Tolerance& tol = {}) {
  if (u.domain.size() != v.domain.size())
    throw structural_error("proportionality needs equal domains");
  for (std::size_t i = 0; i < u.domain.size(); ++i)
    if (!(u.domain[i] == v.domain[i]))
      throw structural_error("proportionality needs equal domains");

  Proportionality<S> out;
  std::optional<std::size_t> ref;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const bool uz = is_zero(u.values[i]), vz = is_zero(v.values[i]);
    if (uz != vz) {
      out.witness = i;
      return out;
    }
    if (!uz && !ref) ref = i;
  }
  if (!ref) {
    out.proportional = true;  // both identically zero
    return out;
  }
  const S& ur = u.values[*ref];
  const S& vr = v.values[*ref];
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (is_zero(u.values[i])) continue;
    // Cross-multiplied form keeps rational mode division-free.
    if (!approx_equal(u.values[i] * vr, v.values[i] * ur, tol.proportional)) {
      out.witness = i;
      return out;
    }
  }
  out.proportional = true;
  out.ratio = ur / vr;
  return out;
}

// Normalised-likelihood point set {i : gf(i) / max gf > cutoff}.
template <typename S>
std::vector<std::size_t> likelihood_interval(const GridFunction<S>& gf, const S& cutoff) {
  if (gf.values.empty()) throw structural_error("likelihood interval of an empty grid function");
  const std::size_t mx = gf.argmax();
  if (is_zero(gf.values[mx]))
    throw model_domain_error("likelihood interval undefined: the function is identically zero");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < gf.size(); ++i)
    if (gf.values[i] > cutoff * gf.values[mx]) out.push_back(i);
  return out;
}

// Pointwise maximum over groups of indices sharing a key; groups keep the
// order of first appearance.  Used to profile a nuisance component out of a
// multi-component theta grid.
template <typename S>
GridFunction<S> profile_by_keys(const GridFunction<S>& gf, const std::vector<std::string>& keys) {
  if (keys.size() != gf.size()) throw structural_error("profile keys must align with the domain");
  GridFunction<S> out;
  for (std::size_t i = 0; i < gf.size(); ++i) {
    std::size_t gi = 0;
    for (; gi < out.labels.size(); ++gi)
      if (out.labels[gi] == keys[i]) break;
    if (gi == out.labels.size()) {
      out.push(gf.domain[i], keys[i], gf.values[i]);
    } else if (gf.values[i] > out.values[gi]) {
      out.values[gi] = gf.values[i];
      out.domain[gi] = gf.domain[i];
    }
  }
  return out;
}

}  // namespace iglab

#endif  // IGLAB_GRID_FUNCTION_HPP
