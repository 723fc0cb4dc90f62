#ifndef IGLAB_SPACE_HPP
#define IGLAB_SPACE_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "iglab/numeric.hpp"

namespace iglab {

// One coordinate of the data vector: a name plus a finite ordered support.
// Values are symbolic labels with an optional numeric reading; probability
// tables index them positionally.
struct Coordinate {
  std::string name;
  std::vector<std::string> labels;
  std::vector<std::optional<double>> numbers;  // aligned with labels

  std::size_t size() const { return labels.size(); }
};

// A data vector, stored as per-coordinate support indices.
using ValueVec = std::vector<int>;

// Missingness pattern.  Bit j set means coordinate j is observed.  Patterns
// are enumerated by their bit value, 0 .. 2^n-1.
struct Pattern {
  std::uint32_t bits = 0;
  int n = 0;

  int k() const { return std::popcount(bits); }
  bool observed(int j) const { return (bits >> j) & 1u; }

  static Pattern from_bools(const std::vector<int>& v) {
    if (v.size() > 31) throw structural_error("pattern longer than 31 coordinates");
    Pattern p;
    p.n = static_cast<int>(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] != 0 && v[j] != 1) throw structural_error("pattern entries must be 0 or 1");
      if (v[j]) p.bits |= (1u << j);
    }
    return p;
  }

  std::vector<int> to_bools() const {
    std::vector<int> v(n);
    for (int j = 0; j < n; ++j) v[j] = observed(j) ? 1 : 0;
    return v;
  }

  std::string str() const {
    std::string s;
    s.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) s += observed(j) ? '1' : '0';
    return s;
  }

  friend bool operator==(const Pattern& a, const Pattern& b) {
    return a.bits == b.bits && a.n == b.n;
  }
};

struct SpaceCaps {
  std::size_t max_points = 4096;  // full-space size cap
  int max_coords = 16;            // 2^16 patterns at most
};

// Finite product space of the coordinates, enumerated lexicographically with
// the first coordinate most significant.
class DataSpace {
 public:
  DataSpace(std::vector<Coordinate> coords, SpaceCaps caps = {})
      : coords_(std::move(coords)), caps_(caps) {
    if (coords_.empty()) throw validation_error("data space needs at least one coordinate");
    if (static_cast<int>(coords_.size()) > caps_.max_coords)
      throw resource_error("coordinate count " + std::to_string(coords_.size()) +
                           " exceeds cap " + std::to_string(caps_.max_coords));
    size_ = 1;
    for (const auto& c : coords_) {
      if (c.labels.empty()) throw validation_error("coordinate \"" + c.name + "\" has empty support");
      std::set<std::string> seen(c.labels.begin(), c.labels.end());
      if (seen.size() != c.labels.size())
        throw validation_error("coordinate \"" + c.name + "\" has duplicate support values");
      if (size_ > caps_.max_points / c.size() + 1) {
        throw resource_error("data space exceeds point cap " + std::to_string(caps_.max_points));
      }
      size_ *= c.size();
    }
    if (size_ > caps_.max_points)
      throw resource_error("data space has " + std::to_string(size_) + " points, cap is " +
                           std::to_string(caps_.max_points));
    strides_.assign(coords_.size(), 1);
    for (int j = static_cast<int>(coords_.size()) - 2; j >= 0; --j)
      strides_[j] = strides_[j + 1] * coords_[j + 1].size();
  }

  int n_coords() const { return static_cast<int>(coords_.size()); }
  std::size_t size() const { return size_; }
  std::size_t n_patterns() const { return std::size_t{1} << n_coords(); }
  const Coordinate& coord(int j) const { return coords_[static_cast<std::size_t>(j)]; }
  const std::vector<Coordinate>& coords() const { return coords_; }
  const SpaceCaps& caps() const { return caps_; }

  std::size_t index_of(const ValueVec& y) const {
    check_member(y);
    std::size_t idx = 0;
    for (int j = 0; j < n_coords(); ++j)
      idx += static_cast<std::size_t>(y[j]) * strides_[j];
    return idx;
  }

  ValueVec value_at(std::size_t idx) const {
    if (idx >= size_) throw structural_error("point index out of range");
    ValueVec y(coords_.size());
    for (int j = 0; j < n_coords(); ++j) {
      y[j] = static_cast<int>(idx / strides_[j]);
      idx %= strides_[j];
    }
    return y;
  }

  // True iff every entry is a valid support index.
  bool contains(const ValueVec& y) const {
    if (y.size() != coords_.size()) return false;
    for (int j = 0; j < n_coords(); ++j)
      if (y[j] < 0 || static_cast<std::size_t>(y[j]) >= coords_[j].size()) return false;
    return true;
  }

  void check_member(const ValueVec& y) const {
    if (y.size() != coords_.size())
      throw structural_error("data vector length " + std::to_string(y.size()) +
                             " does not match coordinate count " + std::to_string(coords_.size()));
    for (int j = 0; j < n_coords(); ++j)
      if (y[j] < 0 || static_cast<std::size_t>(y[j]) >= coords_[j].size())
        throw model_domain_error("value index " + std::to_string(y[j]) +
                                 " outside the support of coordinate \"" + coords_[j].name + "\"");
  }

  void check_pattern(const Pattern& m) const {
    if (m.n != n_coords())
      throw structural_error("pattern length " + std::to_string(m.n) +
                             " does not match coordinate count " + std::to_string(n_coords()));
  }

  std::string label_of(int coord_idx, int value_idx) const {
    return coords_[static_cast<std::size_t>(coord_idx)].labels[static_cast<std::size_t>(value_idx)];
  }

  // Support index of a label on one coordinate, or nullopt.
  std::optional<int> find_value(int coord_idx, const std::string& label) const {
    const auto& ls = coords_[static_cast<std::size_t>(coord_idx)].labels;
    const auto it = std::find(ls.begin(), ls.end(), label);
    if (it == ls.end()) return std::nullopt;
    return static_cast<int>(it - ls.begin());
  }

 private:
  std::vector<Coordinate> coords_;
  SpaceCaps caps_;
  std::size_t size_ = 0;
  std::vector<std::size_t> strides_;
};

using SpacePtr = std::shared_ptr<const DataSpace>;

// A complete-data vector together with the realised missingness pattern.
struct Realisation {
  ValueVec y;
  Pattern m;
};

// The derivable part of a realisation: the pattern plus the observed
// subvector.  Reproducible bit-exactly from (y, m).
struct ObservedRecord {
  Pattern m;
  std::vector<int> observed;  // value indices at one-bits of m, coordinate order

  int k() const { return m.k(); }
};

inline ObservedRecord extract_observed(const DataSpace& space, const ValueVec& y, const Pattern& m) {
  space.check_pattern(m);
  space.check_member(y);
  ObservedRecord rec;
  rec.m = m;
  rec.observed.reserve(static_cast<std::size_t>(m.k()));
  for (int j = 0; j < m.n; ++j)
    if (m.observed(j)) rec.observed.push_back(y[j]);
  return rec;
}

inline std::vector<int> extract_missing(const DataSpace& space, const ValueVec& y, const Pattern& m) {
  space.check_pattern(m);
  space.check_member(y);
  std::vector<int> mis;
  mis.reserve(static_cast<std::size_t>(m.n - m.k()));
  for (int j = 0; j < m.n; ++j)
    if (!m.observed(j)) mis.push_back(y[j]);
  return mis;
}

inline ObservedRecord record_of(const DataSpace& space, const Realisation& real) {
  return extract_observed(space, real.y, real.m);
}

// r(y, ỹ, m̃): true iff y agrees with the record on every observed coordinate.
inline bool compatible(const DataSpace& space, const ValueVec& y, const ObservedRecord& rec) {
  space.check_member(y);
  space.check_pattern(rec.m);
  std::size_t pos = 0;
  for (int j = 0; j < rec.m.n; ++j) {
    if (!rec.m.observed(j)) continue;
    if (y[j] != rec.observed[pos]) return false;
    ++pos;
  }
  return true;
}

inline bool compatible_index(const DataSpace& space, std::size_t y_idx, const ObservedRecord& rec) {
  return compatible(space, space.value_at(y_idx), rec);
}

// All y compatible with the record, as space indices in enumeration order.
// Size is the product of support sizes over the missing coordinates.
inline std::vector<std::size_t> compatible_indices(const DataSpace& space, const ObservedRecord& rec) {
  space.check_pattern(rec.m);
  if (static_cast<int>(rec.observed.size()) != rec.m.k())
    throw structural_error("observed subvector length does not match pattern");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (compatible(space, space.value_at(i), rec)) out.push_back(i);
  return out;
}

inline std::vector<ValueVec> enumerate_compatible(const DataSpace& space, const ObservedRecord& rec) {
  std::vector<ValueVec> out;
  for (std::size_t idx : compatible_indices(space, rec)) out.push_back(space.value_at(idx));
  return out;
}

// X = b(Y): a total map from data values to a finite label set, plus the
// realised level x̃.
struct ConditioningFunction {
  std::vector<std::string> level_names;  // in order of first appearance
  std::vector<int> level_of;             // per space index
  std::optional<int> x_tilde;

  int n_levels() const { return static_cast<int>(level_names.size()); }

  void check_total(const DataSpace& space) const {
    if (level_of.size() != space.size())
      throw validation_error("conditioning function must be defined on every point of the data space");
    for (int lv : level_of)
      if (lv < 0 || lv >= n_levels()) throw validation_error("conditioning label index out of range");
  }

  int require_x_tilde() const {
    if (!x_tilde) throw usage_error("conditioning requires a realised level x_tilde");
    return *x_tilde;
  }

  std::vector<std::size_t> fiber(int level) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < level_of.size(); ++i)
      if (level_of[i] == level) out.push_back(i);
    return out;
  }
};

inline std::string render_values(const DataSpace& space, const ValueVec& y) {
  std::string s = "(";
  for (int j = 0; j < space.n_coords(); ++j) {
    if (j) s += ",";
    s += space.label_of(j, y[j]);
  }
  return s + ")";
}

inline std::string render_observed(const DataSpace& space, const ObservedRecord& rec) {
  std::string s = "(";
  std::size_t pos = 0;
  for (int j = 0; j < rec.m.n; ++j) {
    if (!rec.m.observed(j)) continue;
    if (pos) s += ",";
    s += space.label_of(j, rec.observed[pos]);
    ++pos;
  }
  return s + ")";
}

}  // namespace iglab

#endif  // IGLAB_SPACE_HPP
