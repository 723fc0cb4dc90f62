#ifndef IGLAB_REPORT_HPP
#define IGLAB_REPORT_HPP

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "iglab/bayes.hpp"
#include "iglab/classify.hpp"
#include "iglab/completeness.hpp"
#include "iglab/likelihood.hpp"
#include "iglab/sampling.hpp"
#include "iglab/search.hpp"
#include "iglab/simulate.hpp"

namespace iglab {

inline constexpr const char* kToolVersion = "0.1.0";

// Execution details (thread count, wall clock) stay out of the serialized
// form: a rerun with different resources must produce the same bytes.
struct RunManifest {
  std::string tool_version = kToolVersion;
  std::string subcommand;
  std::string input_path = "-";
  std::string input_digest = "-";
  std::string mode = "rational";
  Tolerance tol;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> flags;

  int threads = 1;        // not serialized
  std::string timestamp;  // not serialized
};

inline nlohmann::json manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["tool_version"] = m.tool_version;
  j["subcommand"] = m.subcommand;
  j["input"] = m.input_path;
  j["input_digest"] = m.input_digest;
  j["mode"] = m.mode;
  j["tolerance"] = {{"equal", m.tol.equal}, {"proportional", m.tol.proportional}};
  j["seed"] = m.seed;
  nlohmann::json f = nlohmann::json::object();
  for (const auto& [k, v] : m.flags) f[k] = v;
  j["flags"] = std::move(f);
  return j;
}

struct Table {
  std::string name;
  std::vector<std::string> cols;
  std::vector<std::vector<std::string>> rows;
};

// Every subcommand's output in one shape: ordered scalar fields plus tables,
// all cells preformatted strings.  The three render targets draw from the
// same data, so they cannot drift apart.
struct Document {
  RunManifest manifest;
  std::string title;
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<Table> tables;

  void field(std::string k, std::string v) { fields.emplace_back(std::move(k), std::move(v)); }
  void field(std::string k, bool v) { field(std::move(k), std::string(v ? "true" : "false")); }
  void field(std::string k, long long v) { field(std::move(k), std::to_string(v)); }
  void field(std::string k, double v) { field(std::move(k), format_scalar(v)); }
  void field(std::string k, const Rational& v) { field(std::move(k), format_scalar(v)); }
};

inline nlohmann::json document_body(const Document& d) {
  nlohmann::json body;
  body["title"] = d.title;
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& [k, v] : d.fields) fs.push_back({k, v});
  body["fields"] = std::move(fs);
  nlohmann::json ts = nlohmann::json::array();
  for (const Table& t : d.tables) {
    nlohmann::json jt;
    jt["name"] = t.name;
    jt["columns"] = t.cols;
    jt["rows"] = t.rows;
    ts.push_back(std::move(jt));
  }
  body["tables"] = std::move(ts);
  return body;
}

inline std::string render_json(const Document& d) {
  nlohmann::json root;
  root["manifest"] = manifest_json(d.manifest);
  root["report"] = document_body(d);
  return root.dump(2) + "\n";
}

namespace detail {

inline std::string tol_brief(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

inline std::string csv_quote(const std::string& s) {
  bool needs = false;
  for (char c : s)
    if (c == ',' || c == '"' || c == '\n') needs = true;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

inline std::string render_text(const Document& d) {
  std::string out = d.title + "\n";
  out.append(d.title.size(), '=');
  out += '\n';
  const RunManifest& m = d.manifest;
  out += "tool_version: " + m.tool_version + "\n";
  out += "subcommand: " + m.subcommand + "\n";
  out += "input: " + m.input_path + "\n";
  out += "input digest: " + m.input_digest + "\n";
  out += "mode: " + m.mode + "\n";
  out += "tolerance: equal=" + detail::tol_brief(m.tol.equal) +
         " proportional=" + detail::tol_brief(m.tol.proportional) + "\n";
  out += "seed: " + std::to_string(m.seed) + "\n";
  for (const auto& [k, v] : m.flags) out += "flag " + k + ": " + v + "\n";
  if (!d.fields.empty()) out += "\n";
  for (const auto& [k, v] : d.fields) out += k + ": " + v + "\n";
  for (const Table& t : d.tables) {
    out += "\n" + t.name + "\n";
    std::vector<std::size_t> w(t.cols.size(), 0);
    for (std::size_t c = 0; c < t.cols.size(); ++c) w[c] = t.cols[c].size();
    for (const auto& row : t.rows)
      for (std::size_t c = 0; c < row.size() && c < w.size(); ++c)
        if (row[c].size() > w[c]) w[c] = row[c].size();
    auto line = [&](const std::vector<std::string>& cells) {
      std::string s;
      for (std::size_t c = 0; c < cells.size(); ++c) {
        s += cells[c];
        if (c + 1 < cells.size()) s.append(w[c] - cells[c].size() + 2, ' ');
      }
      out += s + "\n";
    };
    line(t.cols);
    std::vector<std::string> dashes;
    for (std::size_t c = 0; c < t.cols.size(); ++c) dashes.push_back(std::string(w[c], '-'));
    line(dashes);
    for (const auto& row : t.rows) line(row);
  }
  return out;
}

inline std::string render_csv(const Document& d) {
  std::string out;
  out += "# manifest,tool_version," + d.manifest.tool_version + "\n";
  out += "# manifest,subcommand," + d.manifest.subcommand + "\n";
  out += "# manifest,input," + detail::csv_quote(d.manifest.input_path) + "\n";
  out += "# manifest,input_digest," + d.manifest.input_digest + "\n";
  out += "# manifest,mode," + d.manifest.mode + "\n";
  out += "# manifest,seed," + std::to_string(d.manifest.seed) + "\n";
  for (const auto& [k, v] : d.manifest.flags)
    out += "# manifest,flag:" + k + "," + detail::csv_quote(v) + "\n";
  for (const auto& [k, v] : d.fields)
    out += "# field," + detail::csv_quote(k) + "," + detail::csv_quote(v) + "\n";
  for (const Table& t : d.tables) {
    out += "table," + detail::csv_quote(t.name) + "\n";
    std::string hdr;
    for (std::size_t c = 0; c < t.cols.size(); ++c)
      hdr += (c ? "," : "") + detail::csv_quote(t.cols[c]);
    out += hdr + "\n";
    for (const auto& row : t.rows) {
      std::string line;
      for (std::size_t c = 0; c < row.size(); ++c) line += (c ? "," : "") + detail::csv_quote(row[c]);
      out += line + "\n";
    }
  }
  return out;
}

inline std::string render(const Document& d, const std::string& format) {
  if (format == "text") return render_text(d);
  if (format == "csv") return render_csv(d);
  if (format == "json") return render_json(d);
  throw usage_error("unknown format \"" + format + "\"; expected text, csv, or json");
}

// Document builders.  Cells are formatted here, once, so every render target
// and every rerun agrees byte for byte.

namespace detail {

template <typename S>
std::string verdict_cell(const Verdict<S>& v) {
  return v.holds ? "holds" : "fails";
}

template <typename S>
std::string witness_cell(const Verdict<S>& v, const DataSpace& space,
                         const std::vector<ParamPoint>& phi_grid) {
  return v.witness ? v.witness->render(space, phi_grid) : "";
}

}  // namespace detail

template <typename S>
Document classification_document(const ModelBundle<S>& b, const MechanismClassification<S>& c) {
  Document d;
  d.title = "missingness classification";
  const DataSpace& sp = *b.space;
  Table t;
  t.name = "verdicts";
  t.cols = {"definition", "verdict", "witness"};
  auto row = [&](const char* name, const std::optional<Verdict<S>>& v, const char* why_na) {
    if (v)
      t.rows.push_back({name, detail::verdict_cell(*v), detail::witness_cell(*v, sp, b.mm.phi_grid)});
    else
      t.rows.push_back({name, std::string("n/a (") + why_na + ")", ""});
  };
  row("realised MAR", c.realised_mar, "needs a realisation");
  t.rows.push_back({"everywhere MAR", detail::verdict_cell(c.everywhere_mar),
                    detail::witness_cell(c.everywhere_mar, sp, b.mm.phi_grid)});
  row("i.i.d. everywhere MAR", c.iid_everywhere_mar, "no i.i.d. structure");
  row("realised MCAR", c.realised_mcar, "needs a realisation");
  t.rows.push_back({"everywhere MCAR", detail::verdict_cell(c.everywhere_mcar),
                    detail::witness_cell(c.everywhere_mcar, sp, b.mm.phi_grid)});
  if (c.covariate_mcar) {
    t.rows.push_back({"covariate-dependent MCAR", detail::verdict_cell(c.covariate_mcar->realised),
                      detail::witness_cell(c.covariate_mcar->realised, sp, b.mm.phi_grid)});
    d.field("covariate-dependent MCAR (everywhere form)",
            detail::verdict_cell(c.covariate_mcar->everywhere));
  } else {
    t.rows.push_back({"covariate-dependent MCAR", "n/a (needs conditioning and a realisation)", ""});
  }
  d.field("lattice_consistent", c.lattice_consistent);
  if (b.real)
    d.field("realised record", render_observed(sp, b.real->rec));
  d.tables.push_back(std::move(t));
  return d;
}

template <typename S>
Document grid_document(const std::string& title, const std::string& table_name,
                       const GridFunction<S>& gf) {
  Document d;
  d.title = title;
  Table t;
  t.name = table_name;
  t.cols = {"point", "value"};
  for (std::size_t i = 0; i < gf.size(); ++i)
    t.rows.push_back({gf.labels[i], format_scalar(gf.values[i])});
  d.field("points", static_cast<long long>(gf.size()));
  if (gf.size() != 0) {
    const std::size_t best = gf.argmax();
    d.field("argmax", gf.labels[best]);
    d.field("max", format_scalar(gf.values[best]));
  }
  d.tables.push_back(std::move(t));
  return d;
}

template <typename S>
Document theorem1_document(const Theorem1Report<S>& rep,
                           const std::vector<ParamPoint>& phi_grid) {
  Document d;
  d.title = "likelihood factorization check";
  d.field("realised MAR", rep.realised_mar);
  d.field("parameters distinct", rep.distinct);
  d.field("positivity", rep.positivity);
  d.field("hypotheses hold", rep.hypotheses_hold());
  d.field("joint factorises as mechanism times ignoring", rep.factorises);
  d.field("profile proportional to ignoring", rep.proportional_profile);
  if (rep.profile_constant) d.field("profile constant", format_scalar(*rep.profile_constant));
  if (rep.factorisation_witness) d.field("witness", *rep.factorisation_witness);
  Table t;
  t.name = "fixed-phi objects against the ignoring likelihood";
  t.cols = {"phi", "proportional", "constant"};
  for (std::size_t p = 0; p < rep.proportional_fixed_phi.size(); ++p)
    t.rows.push_back({phi_grid[p].name, rep.proportional_fixed_phi[p] ? "true" : "false",
                      rep.constants[p] ? format_scalar(*rep.constants[p]) : "-"});
  d.tables.push_back(std::move(t));
  return d;
}

template <typename S>
Document theorem2_document(const Theorem2Report<S>& rep,
                           const std::vector<ParamPoint>& theta_grid, double credible_level) {
  Document d;
  d.title = "posterior comparison";
  d.field("realised MAR", rep.realised_mar);
  d.field("prior independent", rep.prior_independent);
  d.field("parameters distinct", rep.distinct);
  d.field("total variation distance", format_scalar(rep.tv));
  if (rep.posterior_mean) d.field("posterior mean (ignoring)", *rep.posterior_mean);
  auto set_label = [&](const CredibleSet<S>& cs) {
    std::string s;
    for (std::size_t i : cs.indices) s += (s.empty() ? "" : " ") + theta_grid[i].name;
    return s + " (mass " + format_scalar(cs.achieved) + ")";
  };
  d.field("credible level", credible_level);
  d.field("hpd set", set_label(rep.hpd));
  d.field("central set", set_label(rep.central));
  Table t;
  t.name = "theta margins of the two posteriors";
  t.cols = {"theta", "from joint", "from ignoring"};
  for (std::size_t i = 0; i < rep.marginal_from_joint.size(); ++i)
    t.rows.push_back({theta_grid[i].name, format_scalar(rep.marginal_from_joint[i]),
                      format_scalar(rep.from_ignoring[i])});
  d.tables.push_back(std::move(t));
  return d;
}

template <typename S>
Table distribution_table(const std::string& name, const SamplingDistribution<S>& dist) {
  Table t;
  t.name = name;
  t.cols = {"outcome", "probability"};
  for (std::size_t i = 0; i < dist.outcomes.size(); ++i)
    t.rows.push_back({dist.outcomes[i], format_scalar(dist.probs[i])});
  return t;
}

template <typename S>
Document theorem3_document(const Theorem3Report<S>& rep,
                           const std::vector<ParamPoint>& theta_grid,
                           const std::vector<ParamPoint>& phi_grid) {
  Document d;
  d.title = "sampling distribution comparison";
  d.field("realised MCAR", rep.realised_mcar);
  d.field("cells skipped (conditioning event has probability zero)",
          static_cast<long long>(rep.skipped));
  Table t;
  t.name = "distance between correct conditional and pattern-fixed law";
  t.cols = {"theta", "phi", "positive", "total variation"};
  for (const Theorem3Cell<S>& c : rep.cells)
    t.rows.push_back({theta_grid[static_cast<std::size_t>(c.theta)].name,
                      phi_grid[static_cast<std::size_t>(c.phi)].name,
                      c.positivity ? "true" : "false",
                      c.tv ? format_scalar(*c.tv) : "-"});
  d.tables.push_back(std::move(t));
  return d;
}

template <typename S>
Document appendix_document(const AppendixReport<S>& rep,
                           const std::vector<ParamPoint>& phi_grid) {
  Document d;
  d.title = "proportionality and MAR equivalence check";
  d.field("parameters distinct", rep.distinct);
  d.field("grid complete", rep.grid_complete);
  d.field("positivity at every phi", rep.positivity_all_phi);
  d.field("record observable", rep.observable);
  d.field("hypotheses hold", rep.hypotheses_hold());
  d.field("proportional at every phi", rep.proportional_all_phi);
  d.field("realised MAR", rep.realised_mar);
  d.field("equivalence holds", rep.biconditional_holds());
  d.field("invariant ratio matches kernel", rep.q_matches_kernel);
  if (rep.proportionality_witness) d.field("witness", *rep.proportionality_witness);
  d.field("completeness rank", static_cast<long long>(rep.completeness.rank));
  d.field("missing-part columns", static_cast<long long>(rep.completeness.n_mis));
  Table t;
  t.name = "theta-invariant ratio per phi";
  t.cols = {"phi", "ratio"};
  for (std::size_t p = 0; p < rep.q_values.size(); ++p)
    t.rows.push_back({phi_grid[p].name, rep.q_values[p] ? format_scalar(*rep.q_values[p]) : "-"});
  d.tables.push_back(std::move(t));
  return d;
}

template <typename S>
Document completeness_document(const DiscreteDataModel<S>& dm) {
  Document d;
  d.title = "grid completeness by pattern";
  const DataSpace& sp = *dm.space;
  Table t;
  t.name = "rank of the conditional family over the missing part";
  t.cols = {"pattern", "observed part", "rank", "columns", "dropped thetas", "complete"};
  for (std::uint32_t bits = 0; bits < sp.n_patterns(); ++bits) {
    const Pattern m{bits, sp.n_coords()};
    const PatternFactorization<S> fact = factorize_by_pattern(dm, m);
    if (fact.split.mis_empty()) {
      t.rows.push_back({m.str(), "-", "-", "0", "0", "trivially"});
      continue;
    }
    for (std::size_t o = 0; o < fact.split.n_obs_combos(); ++o) {
      const CompletenessReport<S> rep = check_grid_completeness(fact, o);
      t.rows.push_back({m.str(), fact.split.render_obs(o), std::to_string(rep.rank),
                        std::to_string(rep.n_mis), std::to_string(rep.dropped_thetas),
                        rep.grid_complete ? "true" : "false"});
    }
  }
  d.tables.push_back(std::move(t));
  return d;
}

inline Document audit_document(const AppendixAuditOutcome& a, int n_coords) {
  Document d;
  d.title = "exhaustive equivalence audit";
  d.field("binary coordinates", static_cast<long long>(n_coords));
  d.field("kernels enumerated", static_cast<long long>(a.searched));
  d.field("equivalence checked", static_cast<long long>(a.checked));
  d.field("skipped for zero kernel value", static_cast<long long>(a.skipped_no_positivity));
  d.field("skipped for incompleteness", static_cast<long long>(a.skipped_incomplete));
  d.field("violations", static_cast<long long>(a.violations));
  d.field("proportional and MAR", static_cast<long long>(a.proportional_and_invariant));
  d.field("neither side", static_cast<long long>(a.neither));
  return d;
}

template <typename S>
Document simulation_document(const SimulationReport& rep, const SimulationPlan<S>& plan) {
  Document d;
  d.title = "repeated sampling study";
  d.field("units per replication", static_cast<long long>(plan.n_units));
  d.field("replications", static_cast<long long>(rep.n_replications));
  d.field("true theta", plan.unit_dm.theta_grid[static_cast<std::size_t>(plan.true_theta)].name);
  d.field("true phi", plan.unit_mm.phi_grid[static_cast<std::size_t>(plan.true_phi)].name);
  d.field("true value", rep.true_value);
  d.field("degenerate replications", static_cast<long long>(rep.n_degenerate));
  d.field("boundary maximisers", static_cast<long long>(rep.n_boundary_mle));
  d.field("tied maximisers", static_cast<long long>(rep.n_ties));
  d.field("estimates", static_cast<long long>(rep.n_estimates));
  d.field("mean estimate", rep.mean_estimate);
  d.field("bias", rep.bias);
  d.field("sd of estimate", rep.sd_estimate);
  d.field("mc se of mean", rep.mc_se_mean);
  d.field("mc se of sd", rep.mc_se_sd);
  d.field("mean observed-information se", rep.mean_se_observed);
  d.field("mc se of observed-information se", rep.mc_se_se_observed);
  d.field("observed-information count", static_cast<long long>(rep.n_se_observed));
  if (rep.n_se_naive != 0) {
    d.field("mean pattern-weighted expected se", rep.mean_se_naive);
    d.field("mc se of pattern-weighted expected se", rep.mc_se_se_naive);
    d.field("pattern-weighted expected se at truth", rep.naive_se_at_true);
  }
  d.field("correctly weighted expected se at truth", rep.expected_se_at_true);
  if (rep.profile_checked != 0) {
    d.field("profile maximiser checks", static_cast<long long>(rep.profile_checked));
    d.field("profile maximiser agreements", static_cast<long long>(rep.profile_agreed));
  }
  if (!rep.coverage.empty()) {
    Table t;
    t.name = "interval coverage";
    t.cols = {"rule", "coverage", "mc se", "intervals"};
    for (const RuleCoverage& rc : rep.coverage)
      t.rows.push_back({rc.rule, format_scalar(rc.coverage), format_scalar(rc.mc_se),
                        std::to_string(rc.n)});
    d.tables.push_back(std::move(t));
  }
  if (rep.bayes) {
    const BayesStudy& bs = *rep.bayes;
    d.field("posterior study replications", static_cast<long long>(bs.n));
    d.field("everywhere MAR", bs.everywhere_mar);
    d.field("prior independent", bs.prior_independent);
    d.field("max tv, joint margin vs ignoring posterior", bs.max_tv);
    d.field("tv exceedances", static_cast<long long>(bs.tv_exceedances));
    d.field("mean posterior mean", bs.mean_posterior_mean);
    d.field("bias of posterior mean", bs.bias_posterior_mean);
    d.field("mc se of posterior mean", bs.mc_se_posterior_mean);
    d.field("hpd coverage", bs.hpd_coverage);
    d.field("mc se of hpd coverage", bs.hpd_coverage_mc_se);
  }
  return d;
}

inline Document exact_sampling_document(const ExactSamplingReport& rep,
                                        const std::vector<ParamPoint>& theta_grid, int n_units) {
  Document d;
  d.title = "exact repeated sampling law of the maximiser";
  d.field("units", static_cast<long long>(n_units));
  d.field("joint outcomes", static_cast<long long>(static_cast<long>(rep.n_outcomes)));
  d.field("mean of estimate", rep.mean);
  d.field("variance of estimate", rep.variance);
  d.field("tie mass", rep.tie_mass);
  d.field("boundary mass", rep.boundary_mass);
  d.field("degenerate mass", rep.degenerate_mass);
  Table t;
  t.name = "law of the maximiser given a usable outcome";
  t.cols = {"theta", "probability"};
  for (std::size_t i = 0; i < rep.mle_distribution.size(); ++i)
    t.rows.push_back({theta_grid[i].name, format_scalar(rep.mle_distribution[i])});
  d.tables.push_back(std::move(t));
  return d;
}

inline Document search_document(const SearchOutcome& out, const std::vector<std::string>& files) {
  Document d;
  d.title = "counterexample search";
  d.field("target", out.target);
  d.field("candidates examined", static_cast<long long>(out.searched));
  d.field("family exhausted", out.exhausted);
  d.field("hits", static_cast<long long>(static_cast<long>(out.hits.size())));
  Table t;
  t.name = "instances";
  t.cols = {"candidate", "file", "note", "verdicts"};
  for (std::size_t i = 0; i < out.hits.size(); ++i) {
    const SearchInstance& h = out.hits[i];
    std::string vs;
    for (const auto& [k, v] : h.verdicts) vs += (vs.empty() ? "" : "; ") + k + "=" + v;
    t.rows.push_back({std::to_string(h.candidate), i < files.size() ? files[i] : "-", h.note, vs});
  }
  d.tables.push_back(std::move(t));
  return d;
}

struct CheckLine {
  std::string name;
  std::string status;  // confirmed | hypotheses not met | violated | skipped
  std::string detail;
};

inline Document verify_document(const std::vector<CheckLine>& lines) {
  Document d;
  d.title = "theorem verification";
  long violated = 0;
  Table t;
  t.name = "checks";
  t.cols = {"check", "status", "detail"};
  for (const CheckLine& c : lines) {
    if (c.status == "violated") ++violated;
    t.rows.push_back({c.name, c.status, c.detail});
  }
  d.field("checks run", static_cast<long long>(static_cast<long>(lines.size())));
  d.field("violations", static_cast<long long>(violated));
  d.tables.push_back(std::move(t));
  return d;
}

}  // namespace iglab

#endif  // IGLAB_REPORT_HPP
