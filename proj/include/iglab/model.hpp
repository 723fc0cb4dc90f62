#ifndef IGLAB_MODEL_HPP
#define IGLAB_MODEL_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iglab/numeric.hpp"
#include "iglab/space.hpp"

namespace iglab {

// A labeled grid point.  Numeric readings back estimands and second
// differences; exact readings back exact moments.  Both optional.
struct ParamPoint {
  std::string name;
  std::vector<double> values;
  std::vector<Rational> exact_values;
};

inline int find_point(const std::vector<ParamPoint>& grid, const std::string& name) {
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i].name == name) return static_cast<int>(i);
  return -1;
}

// f: theta grid point -> probability table over the space, positionally
// indexed by the space enumeration.
template <typename S>
struct DiscreteDataModel {
  SpacePtr space;
  std::vector<ParamPoint> theta_grid;
  std::vector<std::vector<S>> tables;  // [theta][y index]

  int n_theta() const { return static_cast<int>(theta_grid.size()); }

  const S& f(int theta, std::size_t y_idx) const {
    return tables[static_cast<std::size_t>(theta)][y_idx];
  }

  void validate(const Tolerance& tol = {}) const {
    if (!space) throw structural_error("data model has no space");
    if (theta_grid.empty()) throw validation_error("theta grid is empty");
    if (tables.size() != theta_grid.size())
      throw validation_error("data model has " + std::to_string(tables.size()) +
                             " tables for " + std::to_string(theta_grid.size()) + " theta points");
    for (std::size_t t = 0; t < tables.size(); ++t) {
      if (tables[t].size() != space->size())
        throw validation_error("table for theta point \"" + theta_grid[t].name +
                               "\" has wrong length");
      S sum{};
      for (const S& p : tables[t]) {
        if (p < S{}) throw validation_error("negative probability in table for theta point \"" +
                                            theta_grid[t].name + "\"");
        sum += p;
      }
      if (!approx_equal(sum, scalar_from_rational<S>(Rational(1)), tol.equal))
        throw validation_error("table for theta point \"" + theta_grid[t].name +
                               "\" sums to " + format_scalar(sum) + ", expected 1");
    }
  }
};

// Optional product structure: the space splits into n_units identical blocks
// and every kernel is the product of one per-unit kernel.
template <typename S>
struct IidStructure {
  int n_units = 0;
  SpacePtr unit_space;
  // [phi][unit pattern bits][unit y index]
  std::vector<std::vector<std::vector<S>>> unit_kernels;
};

// g: phi grid point -> conditional pattern distribution given each y.
// Kernel rows are indexed by pattern bits, columns by y enumeration.
template <typename S>
struct MissingnessModel {
  SpacePtr space;
  std::vector<ParamPoint> phi_grid;
  std::vector<std::vector<std::vector<S>>> kernels;  // [phi][pattern bits][y index]
  std::optional<IidStructure<S>> iid;

  int n_phi() const { return static_cast<int>(phi_grid.size()); }

  const S& g(int phi, const Pattern& m, std::size_t y_idx) const {
    return kernels[static_cast<std::size_t>(phi)][m.bits][y_idx];
  }

  void validate(const Tolerance& tol = {}) const {
    if (!space) throw structural_error("missingness model has no space");
    if (phi_grid.empty()) throw validation_error("phi grid is empty");
    if (kernels.size() != phi_grid.size())
      throw validation_error("missingness model has " + std::to_string(kernels.size()) +
                             " kernels for " + std::to_string(phi_grid.size()) + " phi points");
    const std::size_t np = space->n_patterns();
    for (std::size_t p = 0; p < kernels.size(); ++p) {
      if (kernels[p].size() != np)
        throw validation_error("kernel for phi point \"" + phi_grid[p].name +
                               "\" has wrong pattern count");
      for (std::size_t m = 0; m < np; ++m)
        if (kernels[p][m].size() != space->size())
          throw validation_error("kernel row " + std::to_string(m) + " for phi point \"" +
                                 phi_grid[p].name + "\" has wrong length");
      for (std::size_t y = 0; y < space->size(); ++y) {
        S sum{};
        for (std::size_t m = 0; m < np; ++m) {
          const S& v = kernels[p][m][y];
          if (v < S{}) throw validation_error("negative kernel probability at phi point \"" +
                                              phi_grid[p].name + "\"");
          sum += v;
        }
        if (!approx_equal(sum, scalar_from_rational<S>(Rational(1)), tol.equal))
          throw validation_error("kernel for phi point \"" + phi_grid[p].name +
                                 "\" sums to " + format_scalar(sum) + " over patterns at y index " +
                                 std::to_string(y) + ", expected 1");
      }
    }
    if (iid) validate_iid(tol);
  }

  void validate_iid(const Tolerance& tol) const {
    const IidStructure<S>& s = *iid;
    if (s.n_units < 1) throw validation_error("iid structure needs n_units >= 1");
    if (!s.unit_space) throw structural_error("iid structure has no unit space");
    const int uc = s.unit_space->n_coords();
    if (space->n_coords() != s.n_units * uc)
      throw validation_error("iid structure: unit coordinates times n_units does not match the space");
    for (int u = 0; u < s.n_units; ++u)
      for (int j = 0; j < uc; ++j) {
        const auto& full = space->coord(u * uc + j);
        const auto& unit = s.unit_space->coord(j);
        if (full.labels != unit.labels)
          throw validation_error("iid structure: coordinate " + std::to_string(u * uc + j) +
                                 " support differs from the unit space");
      }
    if (s.unit_kernels.size() != phi_grid.size())
      throw validation_error("iid structure: unit kernel count does not match the phi grid");
    const std::size_t unp = s.unit_space->n_patterns();
    for (std::size_t p = 0; p < s.unit_kernels.size(); ++p) {
      if (s.unit_kernels[p].size() != unp || s.unit_kernels[p][0].size() != s.unit_space->size())
        throw validation_error("iid structure: unit kernel for phi point \"" + phi_grid[p].name +
                               "\" has wrong shape");
      for (std::size_t y = 0; y < s.unit_space->size(); ++y) {
        S sum{};
        for (std::size_t m = 0; m < unp; ++m) sum += s.unit_kernels[p][m][y];
        if (!approx_equal(sum, scalar_from_rational<S>(Rational(1)), tol.equal))
          throw validation_error("iid structure: unit kernel for phi point \"" + phi_grid[p].name +
                                 "\" does not normalize at unit y index " + std::to_string(y));
      }
    }
    // Product identity: the full kernel factors across unit blocks.
    for (std::size_t p = 0; p < kernels.size(); ++p)
      for (std::size_t m = 0; m < space->n_patterns(); ++m)
        for (std::size_t y = 0; y < space->size(); ++y) {
          S prod = scalar_from_rational<S>(Rational(1));
          const ValueVec yv = space->value_at(y);
          for (int u = 0; u < s.n_units; ++u) {
            std::uint32_t mu = (static_cast<std::uint32_t>(m) >> (u * uc)) & ((1u << uc) - 1u);
            ValueVec yu(yv.begin() + u * uc, yv.begin() + (u + 1) * uc);
            prod *= s.unit_kernels[p][mu][s.unit_space->index_of(yu)];
          }
          if (!approx_equal(kernels[p][m][y], prod, tol.equal))
            throw validation_error("iid structure: kernel for phi point \"" + phi_grid[p].name +
                                   "\" is not the product of unit kernels at pattern " +
                                   std::to_string(m) + ", y index " + std::to_string(y));
        }
  }
};

// Subset of the product grid.  Membership is a theta-major boolean matrix.
class JointParameterSpace {
 public:
  JointParameterSpace() = default;
  JointParameterSpace(int n_theta, int n_phi, bool full = true)
      : n_theta_(n_theta), n_phi_(n_phi),
        member_(static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_phi), full ? 1 : 0) {}

  static JointParameterSpace full_product(int n_theta, int n_phi) {
    return JointParameterSpace(n_theta, n_phi, true);
  }

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }

  bool member(int t, int p) const {
    return member_[static_cast<std::size_t>(t) * n_phi_ + p] != 0;
  }
  void set_member(int t, int p, bool v) {
    member_[static_cast<std::size_t>(t) * n_phi_ + p] = v ? 1 : 0;
  }

  bool is_distinct() const {
    for (char c : member_)
      if (!c) return false;
    return true;
  }

  std::size_t n_members() const {
    std::size_t n = 0;
    for (char c : member_) n += c ? 1 : 0;
    return n;
  }

  // Theta-major enumeration of members.
  std::vector<std::pair<int, int>> members() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(n_members());
    for (int t = 0; t < n_theta_; ++t)
      for (int p = 0; p < n_phi_; ++p)
        if (member(t, p)) out.emplace_back(t, p);
    return out;
  }

  void validate() const {
    if (n_theta_ < 1 || n_phi_ < 1) throw validation_error("joint parameter space over empty grid");
    if (n_members() == 0) throw validation_error("joint parameter space has no members");
  }

 private:
  int n_theta_ = 0, n_phi_ = 0;
  std::vector<char> member_;
};

// A realisation as supplied: the observed record always, the full vector only
// when the input carried it.  Operations needing the full vector say so.
struct RealisationInput {
  ObservedRecord rec;
  std::optional<ValueVec> y_full;

  const ValueVec& require_full(const char* what) const {
    if (!y_full) throw usage_error(std::string(what) + " requires the full data vector of the realisation");
    return *y_full;
  }
};

inline RealisationInput realisation_input(const DataSpace& space, const Realisation& real) {
  RealisationInput r;
  r.rec = record_of(space, real);
  r.y_full = real.y;
  return r;
}

template <typename S>
struct ModelBundle {
  SpacePtr space;
  DiscreteDataModel<S> dm;
  MissingnessModel<S> mm;
  JointParameterSpace jps;
  std::optional<RealisationInput> real;
  std::optional<ConditioningFunction> cond;
  Tolerance tol;

  const RealisationInput& require_realisation() const {
    if (!real) throw usage_error("this operation requires a realisation in the model input");
    return *real;
  }
  const ConditioningFunction& require_conditioning() const {
    if (!cond) throw usage_error("this operation requires a conditioning block in the model input");
    return *cond;
  }
};

// Builds the n-unit product space from a unit space.  Coordinate names get a
// unit suffix so they stay unique.
inline SpacePtr product_space(const DataSpace& unit, int n_units, SpaceCaps caps = {}) {
  std::vector<Coordinate> coords;
  for (int u = 0; u < n_units; ++u)
    for (int j = 0; j < unit.n_coords(); ++j) {
      Coordinate c = unit.coord(j);
      c.name += "#" + std::to_string(u + 1);
      coords.push_back(std::move(c));
    }
  return std::make_shared<DataSpace>(std::move(coords), caps);
}

// Expands unit-level tables and kernels to the product model.  The same theta
// or phi point governs every unit.
template <typename S>
DiscreteDataModel<S> expand_iid_data_model(const DiscreteDataModel<S>& unit_dm, int n_units,
                                           SpaceCaps caps = {}) {
  DiscreteDataModel<S> out;
  out.space = product_space(*unit_dm.space, n_units, caps);
  out.theta_grid = unit_dm.theta_grid;
  out.tables.resize(unit_dm.tables.size());
  const int uc = unit_dm.space->n_coords();
  for (std::size_t t = 0; t < unit_dm.tables.size(); ++t) {
    out.tables[t].resize(out.space->size());
    for (std::size_t y = 0; y < out.space->size(); ++y) {
      const ValueVec yv = out.space->value_at(y);
      S prod = scalar_from_rational<S>(Rational(1));
      for (int u = 0; u < n_units; ++u) {
        ValueVec yu(yv.begin() + u * uc, yv.begin() + (u + 1) * uc);
        prod *= unit_dm.tables[t][unit_dm.space->index_of(yu)];
      }
      out.tables[t][y] = prod;
    }
  }
  return out;
}

template <typename S>
MissingnessModel<S> expand_iid_missingness_model(const DataSpace& unit_space,
                                                 const std::vector<ParamPoint>& phi_grid,
                                                 const std::vector<std::vector<std::vector<S>>>& unit_kernels,
                                                 int n_units, SpacePtr full_space) {
  MissingnessModel<S> out;
  out.space = std::move(full_space);
  out.phi_grid = phi_grid;
  const int uc = unit_space.n_coords();
  const std::size_t np = out.space->n_patterns();
  out.kernels.assign(phi_grid.size(), {});
  for (std::size_t p = 0; p < phi_grid.size(); ++p) {
    out.kernels[p].assign(np, std::vector<S>(out.space->size()));
    for (std::size_t m = 0; m < np; ++m)
      for (std::size_t y = 0; y < out.space->size(); ++y) {
        const ValueVec yv = out.space->value_at(y);
        S prod = scalar_from_rational<S>(Rational(1));
        for (int u = 0; u < n_units; ++u) {
          std::uint32_t mu = (static_cast<std::uint32_t>(m) >> (u * uc)) & ((1u << uc) - 1u);
          ValueVec yu(yv.begin() + u * uc, yv.begin() + (u + 1) * uc);
          prod *= unit_kernels[p][mu][unit_space.index_of(yu)];
        }
        out.kernels[p][m][y] = prod;
      }
  }
  IidStructure<S> s;
  s.n_units = n_units;
  s.unit_space = std::make_shared<DataSpace>(unit_space);
  s.unit_kernels = unit_kernels;
  out.iid = std::move(s);
  return out;
}

}  // namespace iglab

#endif  // IGLAB_MODEL_HPP
