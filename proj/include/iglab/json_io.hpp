#ifndef IGLAB_JSON_IO_HPP
#define IGLAB_JSON_IO_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "iglab/model.hpp"
#include "iglab/sampling.hpp"
#include "iglab/search.hpp"
#include "iglab/simulate.hpp"

namespace iglab {

enum class ArithmeticMode { rational, floating };

inline std::string mode_name(ArithmeticMode m) {
  return m == ArithmeticMode::rational ? "rational" : "float";
}

inline ArithmeticMode mode_from_name(const std::string& s) {
  if (s == "rational") return ArithmeticMode::rational;
  if (s == "float") return ArithmeticMode::floating;
  throw usage_error("unknown arithmetic mode \"" + s + "\"; expected rational or float");
}

// Collects schema problems as "path: message" lines.  Loading either yields a
// complete bundle or reports every problem found; it never half-accepts.
struct SchemaErrors {
  std::vector<std::string> items;

  void add(const std::string& path, const std::string& msg) { items.push_back(path + ": " + msg); }

  void raise_if_any() const {
    if (items.empty()) return;
    std::string all = "input rejected with " + std::to_string(items.size()) + " problem(s)";
    for (const std::string& s : items) all += "\n  " + s;
    throw validation_error(all);
  }
};

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open \"" + path + "\"");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error("\"" + path + "\" is not valid JSON: " + e.what());
  }
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw validation_error("cannot write \"" + path + "\"");
  out << j.dump(2) << '\n';
  if (!out) throw validation_error("write to \"" + path + "\" failed");
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(ss.str())));
  return buf;
}

namespace detail {

using nlohmann::json;

inline bool check_keys(const json& j, const std::string& path,
                       std::initializer_list<const char*> allowed, SchemaErrors& errs) {
  if (!j.is_object()) {
    errs.add(path, "expected an object");
    return false;
  }
  bool ok = true;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known) {
      errs.add(path + "." + it.key(), "unknown key");
      ok = false;
    }
  }
  return ok;
}

inline const json* get(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

inline const json* require(const json& j, const char* key, const std::string& path,
                           SchemaErrors& errs) {
  const json* v = get(j, key);
  if (!v) errs.add(path, std::string("missing required key \"") + key + "\"");
  return v;
}

// One scalar reading: exact when written "p/q", dyadic-exact when numeric.
struct ScalarReading {
  double value = 0;
  Rational exact{0};
  bool from_string = false;
  bool ok = false;
};

inline ScalarReading read_scalar(const json& v, const std::string& path, SchemaErrors& errs) {
  ScalarReading r;
  if (v.is_string()) {
    try {
      r.exact = parse_rational(v.get<std::string>());
      r.value = to_double(r.exact);
      r.from_string = true;
      r.ok = true;
    } catch (const std::exception& e) {
      errs.add(path, e.what());
    }
  } else if (v.is_number()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      errs.add(path, "number is not finite");
    } else {
      r.value = x;
      r.exact = rational_from_double(x);
      r.ok = true;
    }
  } else {
    errs.add(path, "expected a number or a \"p/q\" string");
  }
  return r;
}

template <typename S>
S reading_as(const ScalarReading& r);
template <>
inline Rational reading_as<Rational>(const ScalarReading& r) {
  return r.exact;
}
template <>
inline double reading_as<double>(const ScalarReading& r) {
  return r.value;
}

template <typename S>
std::vector<S> read_prob_array(const json& v, const std::string& path, std::size_t want,
                               SchemaErrors& errs) {
  std::vector<S> out;
  if (!v.is_array()) {
    errs.add(path, "expected an array of probabilities");
    return out;
  }
  if (want != 0 && v.size() != want) {
    errs.add(path, "expected " + std::to_string(want) + " entries, found " +
                       std::to_string(v.size()));
    return out;
  }
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    // Exact arithmetic refuses bare floats: 0.1 denotes a binary double, not 1/10.
    if constexpr (std::is_same_v<S, Rational>) {
      if (v[i].is_number_float()) {
        errs.add(path + "[" + std::to_string(i) + "]",
                 "exact arithmetic needs probabilities as \"p/q\" strings or integers");
        out.push_back(S{});
        continue;
      }
    }
    const ScalarReading r = read_scalar(v[i], path + "[" + std::to_string(i) + "]", errs);
    out.push_back(r.ok ? reading_as<S>(r) : S{});
  }
  return out;
}

inline std::string number_label(double x) {
  const long long i = static_cast<long long>(x);
  char buf[64];
  if (static_cast<double>(i) == x)
    std::snprintf(buf, sizeof(buf), "%lld", i);
  else
    std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline SpacePtr load_space(const json& j, const std::string& path, SchemaErrors& errs) {
  if (!check_keys(j, path, {"coordinates", "max_points", "max_coords"}, errs)) return nullptr;
  SpaceCaps caps;
  if (const json* v = get(j, "max_points")) {
    if (v->is_number_unsigned())
      caps.max_points = v->get<std::size_t>();
    else
      errs.add(path + ".max_points", "expected a positive integer");
  }
  if (const json* v = get(j, "max_coords")) {
    if (v->is_number_unsigned())
      caps.max_coords = v->get<int>();
    else
      errs.add(path + ".max_coords", "expected a positive integer");
  }
  const json* cs = require(j, "coordinates", path, errs);
  if (!cs) return nullptr;
  if (!cs->is_array() || cs->empty()) {
    errs.add(path + ".coordinates", "expected a non-empty array");
    return nullptr;
  }
  std::vector<Coordinate> coords;
  for (std::size_t ci = 0; ci < cs->size(); ++ci) {
    const std::string cp = path + ".coordinates[" + std::to_string(ci) + "]";
    const json& c = (*cs)[ci];
    if (!check_keys(c, cp, {"name", "values", "numbers"}, errs)) return nullptr;
    Coordinate coord;
    if (const json* v = require(c, "name", cp, errs)) {
      if (v->is_string())
        coord.name = v->get<std::string>();
      else
        errs.add(cp + ".name", "expected a string");
    }
    const json* vals = require(c, "values", cp, errs);
    if (!vals || !vals->is_array() || vals->empty()) {
      errs.add(cp + ".values", "expected a non-empty array");
      return nullptr;
    }
    for (std::size_t vi = 0; vi < vals->size(); ++vi) {
      const json& v = (*vals)[vi];
      if (v.is_string()) {
        coord.labels.push_back(v.get<std::string>());
        coord.numbers.push_back(std::nullopt);
      } else if (v.is_number()) {
        const double x = v.get<double>();
        coord.labels.push_back(number_label(x));
        coord.numbers.push_back(x);
      } else {
        errs.add(cp + ".values[" + std::to_string(vi) + "]", "expected a string or number");
        coord.labels.push_back("?" + std::to_string(vi));
        coord.numbers.push_back(std::nullopt);
      }
    }
    if (const json* nums = get(c, "numbers")) {
      if (!nums->is_array() || nums->size() != coord.labels.size()) {
        errs.add(cp + ".numbers", "expected an array aligned with values");
      } else {
        for (std::size_t vi = 0; vi < nums->size(); ++vi) {
          const json& v = (*nums)[vi];
          if (v.is_null()) continue;
          if (v.is_number())
            coord.numbers[vi] = v.get<double>();
          else
            errs.add(cp + ".numbers[" + std::to_string(vi) + "]", "expected a number or null");
        }
      }
    }
    coords.push_back(std::move(coord));
  }
  if (!errs.items.empty()) {
    // Construction below would throw on half-built input; the recorded
    // problems already explain the rejection.
    try {
      return std::make_shared<const DataSpace>(std::move(coords), caps);
    } catch (const std::exception&) {
      return nullptr;
    }
  }
  try {
    return std::make_shared<const DataSpace>(std::move(coords), caps);
  } catch (const std::exception& e) {
    errs.add(path, e.what());
    return nullptr;
  }
}

inline std::vector<ParamPoint> load_grid(const json& j, const std::string& path,
                                         SchemaErrors& errs) {
  std::vector<ParamPoint> grid;
  if (!j.is_array() || j.empty()) {
    errs.add(path, "expected a non-empty array of grid points");
    return grid;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string pp = path + "[" + std::to_string(i) + "]";
    const json& p = j[i];
    if (!check_keys(p, pp, {"name", "values"}, errs)) continue;
    ParamPoint pt;
    if (const json* v = require(p, "name", pp, errs)) {
      if (v->is_string())
        pt.name = v->get<std::string>();
      else
        errs.add(pp + ".name", "expected a string");
    }
    if (const json* v = get(p, "values")) {
      if (!v->is_array()) {
        errs.add(pp + ".values", "expected an array");
      } else {
        for (std::size_t k = 0; k < v->size(); ++k) {
          const ScalarReading r =
              read_scalar((*v)[k], pp + ".values[" + std::to_string(k) + "]", errs);
          pt.values.push_back(r.value);
          pt.exact_values.push_back(r.exact);
        }
      }
    }
    for (const ParamPoint& prev : grid)
      if (prev.name == pt.name) errs.add(pp + ".name", "duplicate grid point name \"" + pt.name + "\"");
    grid.push_back(std::move(pt));
  }
  return grid;
}

template <typename S>
DiscreteDataModel<S> load_data_model(const json& j, const std::string& path, SpacePtr space,
                                     SchemaErrors& errs) {
  DiscreteDataModel<S> dm;
  dm.space = space;
  if (!check_keys(j, path, {"theta_grid", "tables"}, errs)) return dm;
  if (const json* v = require(j, "theta_grid", path, errs))
    dm.theta_grid = load_grid(*v, path + ".theta_grid", errs);
  const json* tabs = require(j, "tables", path, errs);
  if (!tabs) return dm;
  if (!tabs->is_object()) {
    errs.add(path + ".tables", "expected an object keyed by theta point name");
    return dm;
  }
  const std::size_t want = space ? space->size() : 0;
  for (const ParamPoint& pt : dm.theta_grid) {
    const json* t = get(*tabs, pt.name.c_str());
    if (!t) {
      errs.add(path + ".tables", "no table for theta point \"" + pt.name + "\"");
      dm.tables.emplace_back();
      continue;
    }
    dm.tables.push_back(read_prob_array<S>(*t, path + ".tables." + pt.name, want, errs));
  }
  for (auto it = tabs->begin(); it != tabs->end(); ++it)
    if (find_point(dm.theta_grid, it.key()) < 0)
      errs.add(path + ".tables." + it.key(), "table for a theta point not on the grid");
  return dm;
}

inline std::optional<std::uint32_t> pattern_bits_from_string(const std::string& s, int n_coords) {
  if (static_cast<int>(s.size()) != n_coords) return std::nullopt;
  std::uint32_t bits = 0;
  for (int jx = 0; jx < n_coords; ++jx) {
    if (s[static_cast<std::size_t>(jx)] == '1')
      bits |= (1u << jx);
    else if (s[static_cast<std::size_t>(jx)] != '0')
      return std::nullopt;
  }
  return bits;
}

template <typename S>
std::vector<std::vector<S>> load_kernel(const json& j, const std::string& path,
                                        const DataSpace& space, SchemaErrors& errs) {
  std::vector<std::vector<S>> k(space.n_patterns(), std::vector<S>(space.size(), S{}));
  if (!j.is_object()) {
    errs.add(path, "expected an object keyed by pattern strings like \"101\"");
    return k;
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::optional<std::uint32_t> bits = pattern_bits_from_string(it.key(), space.n_coords());
    if (!bits) {
      errs.add(path + "." + it.key(),
               "pattern key must be " + std::to_string(space.n_coords()) + " characters of 0/1");
      continue;
    }
    k[*bits] = read_prob_array<S>(*it, path + "." + it.key(), space.size(), errs);
    if (k[*bits].empty()) k[*bits].assign(space.size(), S{});
  }
  return k;
}

template <typename S>
MissingnessModel<S> load_missingness(const json& j, const std::string& path, SpacePtr space,
                                     SchemaErrors& errs) {
  MissingnessModel<S> mm;
  mm.space = space;
  if (!check_keys(j, path, {"phi_grid", "kernels", "iid"}, errs)) return mm;
  if (const json* v = require(j, "phi_grid", path, errs))
    mm.phi_grid = load_grid(*v, path + ".phi_grid", errs);
  const json* ks = require(j, "kernels", path, errs);
  if (ks && space) {
    if (!ks->is_object()) {
      errs.add(path + ".kernels", "expected an object keyed by phi point name");
    } else {
      for (const ParamPoint& pt : mm.phi_grid) {
        const json* k = get(*ks, pt.name.c_str());
        if (!k) {
          errs.add(path + ".kernels", "no kernel for phi point \"" + pt.name + "\"");
          mm.kernels.emplace_back(space->n_patterns(),
                                  std::vector<S>(space->size(), S{}));
          continue;
        }
        mm.kernels.push_back(load_kernel<S>(*k, path + ".kernels." + pt.name, *space, errs));
      }
      for (auto it = ks->begin(); it != ks->end(); ++it)
        if (find_point(mm.phi_grid, it.key()) < 0)
          errs.add(path + ".kernels." + it.key(), "kernel for a phi point not on the grid");
    }
  }
  if (const json* iid = get(j, "iid")) {
    const std::string ip = path + ".iid";
    if (check_keys(*iid, ip, {"n_units", "unit_space", "unit_kernels"}, errs)) {
      IidStructure<S> s;
      if (const json* v = require(*iid, "n_units", ip, errs)) {
        if (v->is_number_integer() && v->get<int>() >= 1)
          s.n_units = v->get<int>();
        else
          errs.add(ip + ".n_units", "expected an integer >= 1");
      }
      if (const json* v = require(*iid, "unit_space", ip, errs))
        s.unit_space = load_space(*v, ip + ".unit_space", errs);
      if (const json* v = require(*iid, "unit_kernels", ip, errs)) {
        if (!v->is_object()) {
          errs.add(ip + ".unit_kernels", "expected an object keyed by phi point name");
        } else if (s.unit_space) {
          for (const ParamPoint& pt : mm.phi_grid) {
            const json* k = get(*v, pt.name.c_str());
            if (!k) {
              errs.add(ip + ".unit_kernels", "no unit kernel for phi point \"" + pt.name + "\"");
              s.unit_kernels.emplace_back(s.unit_space->n_patterns(),
                                          std::vector<S>(s.unit_space->size(), S{}));
              continue;
            }
            s.unit_kernels.push_back(
                load_kernel<S>(*k, ip + ".unit_kernels." + pt.name, *s.unit_space, errs));
          }
        }
      }
      mm.iid = std::move(s);
    }
  }
  return mm;
}

inline JointParameterSpace load_jps(const json& j, const std::string& path,
                                    const std::vector<ParamPoint>& theta_grid,
                                    const std::vector<ParamPoint>& phi_grid, SchemaErrors& errs) {
  JointParameterSpace jps(static_cast<int>(theta_grid.size()), static_cast<int>(phi_grid.size()),
                          false);
  if (!check_keys(j, path, {"members"}, errs)) return jps;
  const json* ms = require(j, "members", path, errs);
  if (!ms) return jps;
  if (!ms->is_array()) {
    errs.add(path + ".members", "expected an array of [theta_name, phi_name] pairs");
    return jps;
  }
  for (std::size_t i = 0; i < ms->size(); ++i) {
    const std::string mp = path + ".members[" + std::to_string(i) + "]";
    const json& m = (*ms)[i];
    if (!m.is_array() || m.size() != 2 || !m[0].is_string() || !m[1].is_string()) {
      errs.add(mp, "expected a [theta_name, phi_name] pair");
      continue;
    }
    const int t = find_point(theta_grid, m[0].get<std::string>());
    const int p = find_point(phi_grid, m[1].get<std::string>());
    if (t < 0) errs.add(mp, "unknown theta point \"" + m[0].get<std::string>() + "\"");
    if (p < 0) errs.add(mp, "unknown phi point \"" + m[1].get<std::string>() + "\"");
    if (t >= 0 && p >= 0) jps.set_member(t, p, true);
  }
  return jps;
}

inline std::optional<ValueVec> load_value_labels(const json& v, const std::string& path,
                                                 const DataSpace& space,
                                                 const std::vector<int>& coord_list,
                                                 SchemaErrors& errs) {
  if (!v.is_array() || v.size() != coord_list.size()) {
    errs.add(path, "expected an array of " + std::to_string(coord_list.size()) + " value labels");
    return std::nullopt;
  }
  ValueVec out;
  bool ok = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::string label;
    if (v[i].is_string())
      label = v[i].get<std::string>();
    else if (v[i].is_number())
      label = number_label(v[i].get<double>());
    else {
      errs.add(path + "[" + std::to_string(i) + "]", "expected a string or number");
      ok = false;
      continue;
    }
    const std::optional<int> idx = space.find_value(coord_list[i], label);
    if (!idx) {
      errs.add(path + "[" + std::to_string(i) + "]",
               "\"" + label + "\" is not in the support of coordinate \"" +
                   space.coord(coord_list[i]).name + "\"");
      ok = false;
      continue;
    }
    out.push_back(*idx);
  }
  if (!ok) return std::nullopt;
  return out;
}

inline std::optional<RealisationInput> load_realisation(const json& j, const std::string& path,
                                                        const DataSpace& space,
                                                        SchemaErrors& errs) {
  if (!check_keys(j, path, {"pattern", "y", "observed"}, errs)) return std::nullopt;
  const json* pv = require(j, "pattern", path, errs);
  if (!pv) return std::nullopt;
  if (!pv->is_array() || static_cast<int>(pv->size()) != space.n_coords()) {
    errs.add(path + ".pattern",
             "expected an array of " + std::to_string(space.n_coords()) + " zeros and ones");
    return std::nullopt;
  }
  std::vector<int> bools;
  for (std::size_t i = 0; i < pv->size(); ++i) {
    const json& b = (*pv)[i];
    if (b.is_number_integer() && (b.get<int>() == 0 || b.get<int>() == 1)) {
      bools.push_back(b.get<int>());
    } else {
      errs.add(path + ".pattern[" + std::to_string(i) + "]", "expected 0 or 1");
      bools.push_back(0);
    }
  }
  const Pattern m = Pattern::from_bools(bools);

  std::vector<int> all_coords, obs_coords;
  for (int jx = 0; jx < space.n_coords(); ++jx) {
    all_coords.push_back(jx);
    if (m.observed(jx)) obs_coords.push_back(jx);
  }

  const json* yv = get(j, "y");
  const json* ov = get(j, "observed");
  if (!yv && !ov) {
    errs.add(path, "needs \"y\" (full vector) or \"observed\" (observed subvector)");
    return std::nullopt;
  }
  RealisationInput out;
  out.rec.m = m;
  if (yv) {
    const std::optional<ValueVec> y = load_value_labels(*yv, path + ".y", space, all_coords, errs);
    if (!y) return std::nullopt;
    out.y_full = *y;
    out.rec = extract_observed(space, *y, m);
  }
  if (ov) {
    const std::optional<ValueVec> o =
        load_value_labels(*ov, path + ".observed", space, obs_coords, errs);
    if (!o) return std::nullopt;
    if (yv) {
      if (out.rec.observed != *o) {
        errs.add(path + ".observed", "disagrees with the observed part of \"y\"");
        return std::nullopt;
      }
    } else {
      out.rec.observed = *o;
    }
  }
  return out;
}

inline std::optional<ConditioningFunction> load_conditioning(const json& j,
                                                             const std::string& path,
                                                             const DataSpace& space,
                                                             SchemaErrors& errs) {
  if (!check_keys(j, path, {"levels", "x_tilde"}, errs)) return std::nullopt;
  const json* lv = require(j, "levels", path, errs);
  if (!lv) return std::nullopt;
  if (!lv->is_array() || lv->size() != space.size()) {
    errs.add(path + ".levels", "expected one label per data-space point (" +
                                   std::to_string(space.size()) + " entries, enumeration order)");
    return std::nullopt;
  }
  ConditioningFunction cf;
  for (std::size_t i = 0; i < lv->size(); ++i) {
    const json& v = (*lv)[i];
    std::string label;
    if (v.is_string())
      label = v.get<std::string>();
    else if (v.is_number())
      label = number_label(v.get<double>());
    else {
      errs.add(path + ".levels[" + std::to_string(i) + "]", "expected a string or number");
      label = "?";
    }
    int id = -1;
    for (std::size_t k = 0; k < cf.level_names.size(); ++k)
      if (cf.level_names[k] == label) id = static_cast<int>(k);
    if (id < 0) {
      id = static_cast<int>(cf.level_names.size());
      cf.level_names.push_back(label);
    }
    cf.level_of.push_back(id);
  }
  if (const json* xv = get(j, "x_tilde")) {
    std::string label;
    if (xv->is_string())
      label = xv->get<std::string>();
    else if (xv->is_number())
      label = number_label(xv->get<double>());
    else {
      errs.add(path + ".x_tilde", "expected a string or number");
      return std::nullopt;
    }
    int id = -1;
    for (std::size_t k = 0; k < cf.level_names.size(); ++k)
      if (cf.level_names[k] == label) id = static_cast<int>(k);
    if (id < 0) {
      errs.add(path + ".x_tilde", "level \"" + label + "\" is taken by no data value");
      return std::nullopt;
    }
    cf.x_tilde = id;
  }
  return cf;
}

template <typename S>
std::optional<Prior<S>> load_prior(const json& j, const std::string& path, int n_theta, int n_phi,
                                   SchemaErrors& errs) {
  if (!check_keys(j, path, {"theta", "phi", "joint"}, errs)) return std::nullopt;
  const json* jt = get(j, "theta");
  const json* jp = get(j, "phi");
  const json* jj = get(j, "joint");
  if (jj && (jt || jp)) {
    errs.add(path, "give either \"joint\" or the \"theta\"/\"phi\" product form, not both");
    return std::nullopt;
  }
  if (jj) {
    if (!jj->is_array() || static_cast<int>(jj->size()) != n_theta) {
      errs.add(path + ".joint", "expected " + std::to_string(n_theta) + " rows (theta-major)");
      return std::nullopt;
    }
    Prior<S> pr;
    for (std::size_t t = 0; t < jj->size(); ++t)
      pr.joint.push_back(read_prob_array<S>((*jj)[t], path + ".joint[" + std::to_string(t) + "]",
                                            static_cast<std::size_t>(n_phi), errs));
    return pr;
  }
  if (!jt || !jp) {
    errs.add(path, "needs \"joint\", or both \"theta\" and \"phi\"");
    return std::nullopt;
  }
  std::vector<S> pt = read_prob_array<S>(*jt, path + ".theta", static_cast<std::size_t>(n_theta), errs);
  std::vector<S> pp = read_prob_array<S>(*jp, path + ".phi", static_cast<std::size_t>(n_phi), errs);
  if (pt.empty() || pp.empty()) return std::nullopt;
  return Prior<S>::product(std::move(pt), std::move(pp));
}

// Walks exactly the probability positions.  Every one a "p/q" string means
// exact arithmetic; any numeric entry switches the default to float.
inline void scan_probability_strings(const json& root, bool& any, bool& all_strings) {
  auto scan_array = [&](const json& a) {
    if (!a.is_array()) return;
    for (const json& v : a) {
      if (v.is_string() || v.is_number()) {
        any = true;
        if (!v.is_string()) all_strings = false;
      }
    }
  };
  auto scan_kernel = [&](const json& k) {
    if (!k.is_object()) return;
    for (const auto& row : k.items()) scan_array(row.value());
  };
  if (const json* dm = get(root, "data_model"))
    if (const json* tabs = get(*dm, "tables"); tabs && tabs->is_object())
      for (const auto& t : tabs->items()) scan_array(t.value());
  if (const json* mm = get(root, "missingness_model")) {
    if (const json* ks = get(*mm, "kernels"); ks && ks->is_object())
      for (const auto& k : ks->items()) scan_kernel(k.value());
    if (const json* iid = get(*mm, "iid"))
      if (const json* ks = get(*iid, "unit_kernels"); ks && ks->is_object())
        for (const auto& k : ks->items()) scan_kernel(k.value());
  }
  if (const json* pr = get(root, "prior")) {
    if (const json* v = get(*pr, "theta")) scan_array(*v);
    if (const json* v = get(*pr, "phi")) scan_array(*v);
    if (const json* v = get(*pr, "joint"); v && v->is_array())
      for (const json& row : *v) scan_array(row);
  }
}

}  // namespace detail

inline ArithmeticMode detect_mode(const nlohmann::json& root) {
  bool any = false, all_strings = true;
  detail::scan_probability_strings(root, any, all_strings);
  return (!any || all_strings) ? ArithmeticMode::rational : ArithmeticMode::floating;
}

template <typename S>
ModelBundle<S> load_bundle(const nlohmann::json& root, const Tolerance& tol = {}) {
  SchemaErrors errs;
  detail::check_keys(root, "$",
                     {"space", "data_model", "missingness_model", "joint_parameter_space",
                      "realisation", "conditioning", "prior"},
                     errs);
  ModelBundle<S> b;
  b.tol = tol;
  if (const nlohmann::json* v = detail::require(root, "space", "$", errs))
    b.space = detail::load_space(*v, "$.space", errs);
  if (const nlohmann::json* v = detail::require(root, "data_model", "$", errs))
    b.dm = detail::load_data_model<S>(*v, "$.data_model", b.space, errs);
  if (const nlohmann::json* v = detail::require(root, "missingness_model", "$", errs))
    b.mm = detail::load_missingness<S>(*v, "$.missingness_model", b.space, errs);
  if (const nlohmann::json* v = detail::get(root, "joint_parameter_space"))
    b.jps = detail::load_jps(*v, "$.joint_parameter_space", b.dm.theta_grid, b.mm.phi_grid, errs);
  else
    b.jps = JointParameterSpace::full_product(static_cast<int>(b.dm.theta_grid.size()),
                                              static_cast<int>(b.mm.phi_grid.size()));
  if (b.space) {
    if (const nlohmann::json* v = detail::get(root, "realisation"))
      b.real = detail::load_realisation(*v, "$.realisation", *b.space, errs);
    if (const nlohmann::json* v = detail::get(root, "conditioning"))
      b.cond = detail::load_conditioning(*v, "$.conditioning", *b.space, errs);
  }
  // Shape-check an embedded prior now; callers fetch it later via load_model_prior.
  if (const nlohmann::json* v = detail::get(root, "prior"))
    if (b.dm.n_theta() > 0 && b.mm.n_phi() > 0)
      detail::load_prior<S>(*v, "$.prior", b.dm.n_theta(), b.mm.n_phi(), errs);
  errs.raise_if_any();

  try {
    b.dm.validate(tol);
  } catch (const std::exception& e) {
    errs.add("$.data_model", e.what());
  }
  try {
    b.mm.validate(tol);
  } catch (const std::exception& e) {
    errs.add("$.missingness_model", e.what());
  }
  try {
    b.jps.validate();
  } catch (const std::exception& e) {
    errs.add("$.joint_parameter_space", e.what());
  }
  if (b.cond) {
    try {
      b.cond->check_total(*b.space);
    } catch (const std::exception& e) {
      errs.add("$.conditioning", e.what());
    }
  }
  errs.raise_if_any();
  return b;
}

// The optional self-contained prior of a model file.
template <typename S>
std::optional<Prior<S>> load_model_prior(const nlohmann::json& root, int n_theta, int n_phi) {
  const nlohmann::json* v = detail::get(root, "prior");
  if (!v) return std::nullopt;
  SchemaErrors errs;
  std::optional<Prior<S>> pr = detail::load_prior<S>(*v, "$.prior", n_theta, n_phi, errs);
  errs.raise_if_any();
  return pr;
}

template <typename S>
Prior<S> load_prior_file(const std::string& path, int n_theta, int n_phi) {
  const nlohmann::json root = load_json_file(path);
  SchemaErrors errs;
  std::optional<Prior<S>> pr = detail::load_prior<S>(root, "$", n_theta, n_phi, errs);
  errs.raise_if_any();
  if (!pr) throw validation_error("prior file \"" + path + "\" holds no prior");
  return *pr;
}

template <typename S>
SimulationPlan<S> load_plan(const nlohmann::json& root, const Tolerance& tol = {}) {
  SchemaErrors errs;
  detail::check_keys(root, "$",
                     {"space", "data_model", "missingness_model", "n_units", "replications",
                      "seed", "true_theta", "true_phi", "estimand_component", "rules",
                      "confidence", "likelihood_cutoff", "conditioning", "prior",
                      "verify_profile_consistency"},
                     errs);
  SimulationPlan<S> plan;
  SpacePtr space;
  if (const nlohmann::json* v = detail::require(root, "space", "$", errs))
    space = detail::load_space(*v, "$.space", errs);
  if (const nlohmann::json* v = detail::require(root, "data_model", "$", errs))
    plan.unit_dm = detail::load_data_model<S>(*v, "$.data_model", space, errs);
  if (const nlohmann::json* v = detail::require(root, "missingness_model", "$", errs))
    plan.unit_mm = detail::load_missingness<S>(*v, "$.missingness_model", space, errs);

  auto want_int = [&](const char* key, bool required, long long lo, long long hi,
                      long long dflt) -> long long {
    const nlohmann::json* v =
        required ? detail::require(root, key, "$", errs) : detail::get(root, key);
    if (!v) return dflt;
    if (!v->is_number_integer() || v->get<long long>() < lo || v->get<long long>() > hi) {
      errs.add(std::string("$.") + key, "expected an integer in [" + std::to_string(lo) + ", " +
                                            std::to_string(hi) + "]");
      return dflt;
    }
    return v->get<long long>();
  };
  plan.n_units = static_cast<int>(want_int("n_units", true, 1, 1000000, 1));
  plan.n_replications = static_cast<long>(want_int("replications", true, 1, 100000000, 1));
  if (const nlohmann::json* v = detail::get(root, "seed")) {
    if (v->is_number_unsigned() || v->is_number_integer())
      plan.seed = v->get<std::uint64_t>();
    else
      errs.add("$.seed", "expected an integer");
  }
  plan.estimand_component =
      static_cast<std::size_t>(want_int("estimand_component", false, 0, 64, 0));

  auto want_name = [&](const char* key, const std::vector<ParamPoint>& grid) -> int {
    const nlohmann::json* v = detail::require(root, key, "$", errs);
    if (!v) return 0;
    if (!v->is_string()) {
      errs.add(std::string("$.") + key, "expected a grid point name");
      return 0;
    }
    const int i = find_point(grid, v->get<std::string>());
    if (i < 0) {
      errs.add(std::string("$.") + key, "\"" + v->get<std::string>() + "\" is not on the grid");
      return 0;
    }
    return i;
  };
  plan.true_theta = want_name("true_theta", plan.unit_dm.theta_grid);
  plan.true_phi = want_name("true_phi", plan.unit_mm.phi_grid);

  if (const nlohmann::json* v = detail::get(root, "rules")) {
    if (!v->is_array()) {
      errs.add("$.rules", "expected an array of rule names");
    } else {
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) {
          errs.add("$.rules[" + std::to_string(i) + "]", "expected a rule name");
          continue;
        }
        try {
          plan.rules.push_back(rule_from_name((*v)[i].get<std::string>()));
        } catch (const std::exception& e) {
          errs.add("$.rules[" + std::to_string(i) + "]", e.what());
        }
      }
    }
  } else {
    plan.rules = {IntervalRule::wald_observed, IntervalRule::likelihood};
  }

  if (const nlohmann::json* v = detail::get(root, "confidence")) {
    if (v->is_number() && v->get<double>() > 0 && v->get<double>() < 1)
      plan.confidence = v->get<double>();
    else
      errs.add("$.confidence", "expected a number strictly between 0 and 1");
  }
  if (const nlohmann::json* v = detail::get(root, "likelihood_cutoff")) {
    const detail::ScalarReading r = detail::read_scalar(*v, "$.likelihood_cutoff", errs);
    if (r.ok) {
      if (r.exact <= 0 || r.exact >= 1)
        errs.add("$.likelihood_cutoff", "expected a value strictly between 0 and 1");
      else
        plan.likelihood_cutoff = r.exact;
    }
  }
  if (const nlohmann::json* v = detail::get(root, "verify_profile_consistency")) {
    if (v->is_boolean())
      plan.verify_profile_consistency = v->get<bool>();
    else
      errs.add("$.verify_profile_consistency", "expected true or false");
  }

  if (const nlohmann::json* v = detail::get(root, "conditioning")) {
    const std::string cp = "$.conditioning";
    if (detail::check_keys(*v, cp, {"mode", "pattern", "levels", "x_tilde"}, errs)) {
      const nlohmann::json* mv = detail::require(*v, "mode", cp, errs);
      const std::string mode = mv && mv->is_string() ? mv->get<std::string>() : "";
      if (mode == "none") {
        plan.conditioning = ConditioningMode::none;
      } else if (mode == "pattern") {
        plan.conditioning = ConditioningMode::on_pattern;
        if (const nlohmann::json* pv = detail::require(*v, "pattern", cp, errs)) {
          if (space && pv->is_array() && static_cast<int>(pv->size()) == space->n_coords()) {
            std::vector<int> bools;
            for (const nlohmann::json& b : *pv)
              bools.push_back(b.is_number_integer() ? b.get<int>() : 0);
            plan.pattern_condition = Pattern::from_bools(bools);
          } else {
            errs.add(cp + ".pattern", "expected an array of 0/1 per coordinate");
          }
        }
      } else if (mode == "x") {
        plan.conditioning = ConditioningMode::on_x;
        if (space) {
          nlohmann::json sub;
          if (const nlohmann::json* lv = detail::get(*v, "levels")) sub["levels"] = *lv;
          if (const nlohmann::json* xv = detail::get(*v, "x_tilde")) sub["x_tilde"] = *xv;
          plan.x_condition = detail::load_conditioning(sub, cp, *space, errs);
          if (plan.x_condition && !plan.x_condition->x_tilde)
            errs.add(cp, "conditioning on x needs x_tilde");
        }
      } else {
        errs.add(cp + ".mode", "expected none, pattern, or x");
      }
    }
  }

  if (const nlohmann::json* v = detail::get(root, "prior"))
    plan.prior = detail::load_prior<S>(*v, "$.prior", static_cast<int>(plan.unit_dm.theta_grid.size()),
                                       static_cast<int>(plan.unit_mm.phi_grid.size()), errs);

  errs.raise_if_any();
  try {
    plan.validate();
    if (plan.prior)
      plan.prior->validate(plan.unit_dm.n_theta(), plan.unit_mm.n_phi(), tol);
  } catch (const std::exception& e) {
    errs.add("$", e.what());
  }
  errs.raise_if_any();
  return plan;
}

// Custom statistic: one label per data-space point; the reading of a record
// is the shared label of its compatible values, demanded constant.
inline Statistic load_statistic_json(const nlohmann::json& root) {
  SchemaErrors errs;
  detail::check_keys(root, "$", {"name", "levels"}, errs);
  std::string name = "custom";
  if (const nlohmann::json* v = detail::get(root, "name")) {
    if (v->is_string())
      name = v->get<std::string>();
    else
      errs.add("$.name", "expected a string");
  }
  std::vector<std::string> levels;
  if (const nlohmann::json* v = detail::require(root, "levels", "$", errs)) {
    if (v->is_array()) {
      for (std::size_t i = 0; i < v->size(); ++i) {
        const nlohmann::json& e = (*v)[i];
        if (e.is_string())
          levels.push_back(e.get<std::string>());
        else if (e.is_number())
          levels.push_back(detail::number_label(e.get<double>()));
        else
          errs.add("$.levels[" + std::to_string(i) + "]", "expected a string or number");
      }
    } else {
      errs.add("$.levels", "expected an array with one label per data-space point");
    }
  }
  errs.raise_if_any();
  Statistic st;
  st.name = name;
  st.label = [name, levels](const DataSpace& space, const ObservedRecord& rec) -> std::string {
    if (levels.size() != space.size())
      throw validation_error("statistic \"" + name + "\" has " + std::to_string(levels.size()) +
                             " labels for a space of " + std::to_string(space.size()) + " points");
    const std::vector<std::size_t> compat = compatible_indices(space, rec);
    const std::string& first = levels[compat.front()];
    for (std::size_t i : compat)
      if (levels[i] != first)
        throw validation_error("statistic \"" + name +
                               "\" is not a function of the observed record: labels differ over "
                               "values compatible with " + render_observed(space, rec));
    return first;
  };
  return st;
}

// Writers.  Exact values serialize as "p/q" strings and re-load losslessly.

inline nlohmann::json space_to_json(const DataSpace& space) {
  nlohmann::json coords = nlohmann::json::array();
  for (int j = 0; j < space.n_coords(); ++j) {
    const Coordinate& c = space.coord(j);
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["values"] = c.labels;
    bool any = false;
    for (const auto& n : c.numbers)
      if (n) any = true;
    if (any) {
      nlohmann::json nums = nlohmann::json::array();
      for (const auto& n : c.numbers)
        if (n)
          nums.push_back(*n);
        else
          nums.push_back(nullptr);
      jc["numbers"] = nums;
    }
    coords.push_back(std::move(jc));
  }
  return nlohmann::json{{"coordinates", std::move(coords)}};
}

inline nlohmann::json grid_to_json(const std::vector<ParamPoint>& grid) {
  nlohmann::json out = nlohmann::json::array();
  for (const ParamPoint& p : grid) {
    nlohmann::json jp;
    jp["name"] = p.name;
    if (!p.exact_values.empty()) {
      nlohmann::json vals = nlohmann::json::array();
      for (const Rational& r : p.exact_values) vals.push_back(format_scalar(r));
      jp["values"] = std::move(vals);
    } else if (!p.values.empty()) {
      jp["values"] = p.values;
    }
    out.push_back(std::move(jp));
  }
  return out;
}

inline nlohmann::json table_to_json(const std::vector<Rational>& t) {
  nlohmann::json out = nlohmann::json::array();
  for (const Rational& v : t) out.push_back(format_scalar(v));
  return out;
}

inline nlohmann::json kernel_to_json(const DataSpace& space,
                                     const std::vector<std::vector<Rational>>& k) {
  nlohmann::json out = nlohmann::json::object();
  for (std::uint32_t bits = 0; bits < space.n_patterns(); ++bits) {
    bool any = false;
    for (const Rational& v : k[bits])
      if (v != 0) any = true;
    if (!any) continue;
    out[Pattern{bits, space.n_coords()}.str()] = table_to_json(k[bits]);
  }
  return out;
}

inline nlohmann::json bundle_to_json(const GeneratedBundle& b,
                                     const std::optional<Prior<Rational>>& prior = std::nullopt) {
  nlohmann::json root;
  root["space"] = space_to_json(*b.space);

  nlohmann::json dm;
  dm["theta_grid"] = grid_to_json(b.dm.theta_grid);
  nlohmann::json tabs = nlohmann::json::object();
  for (std::size_t t = 0; t < b.dm.tables.size(); ++t)
    tabs[b.dm.theta_grid[t].name] = table_to_json(b.dm.tables[t]);
  dm["tables"] = std::move(tabs);
  root["data_model"] = std::move(dm);

  nlohmann::json mm;
  mm["phi_grid"] = grid_to_json(b.mm.phi_grid);
  nlohmann::json ks = nlohmann::json::object();
  for (std::size_t p = 0; p < b.mm.kernels.size(); ++p)
    ks[b.mm.phi_grid[p].name] = kernel_to_json(*b.space, b.mm.kernels[p]);
  mm["kernels"] = std::move(ks);
  root["missingness_model"] = std::move(mm);

  if (!b.jps.is_distinct()) {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& [t, p] : b.jps.members())
      ms.push_back({b.dm.theta_grid[static_cast<std::size_t>(t)].name,
                    b.mm.phi_grid[static_cast<std::size_t>(p)].name});
    root["joint_parameter_space"] = {{"members", std::move(ms)}};
  }

  nlohmann::json real;
  real["pattern"] = b.real.m.to_bools();
  nlohmann::json yl = nlohmann::json::array();
  for (int j = 0; j < b.space->n_coords(); ++j) yl.push_back(b.space->label_of(j, b.real.y[j]));
  real["y"] = std::move(yl);
  root["realisation"] = std::move(real);

  if (prior) {
    nlohmann::json jp;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : prior->joint) rows.push_back(table_to_json(row));
    jp["joint"] = std::move(rows);
    root["prior"] = std::move(jp);
  }
  return root;
}

}  // namespace iglab

#endif  // IGLAB_JSON_IO_HPP
