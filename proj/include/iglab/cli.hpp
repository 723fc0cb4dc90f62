#ifndef IGLAB_CLI_HPP
#define IGLAB_CLI_HPP

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "iglab/json_io.hpp"
#include "iglab/report.hpp"

namespace iglab {
namespace cli_detail {

struct Common {
  std::string input;
  std::string out_path;
  std::string mode_flag;
  std::string format = "text";
  double tol = 1e-12;
  int threads = 1;
  std::uint64_t seed = 0;
  CLI::Option* tol_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

inline void add_common(CLI::App* sub, Common& c, bool input_required) {
  CLI::Option* in = sub->add_option("--input", c.input, "model or plan file (JSON)");
  if (input_required) in->required();
  sub->add_option("--mode", c.mode_flag,
                  "arithmetic: rational or float (default: by file contents)");
  c.tol_opt = sub->add_option(
      "--tol", c.tol, "float-mode equality tolerance; proportionality checks use 100x this");
  sub->add_option("--out", c.out_path, "write the report here instead of stdout");
  sub->add_option("--format", c.format, "text, csv, or json");
  sub->add_option("--threads", c.threads, "worker threads where supported")
      ->check(CLI::Range(1, 256));
  c.seed_opt = sub->add_option("--seed", c.seed, "seed for randomized work");
}

inline Tolerance tolerance_of(const Common& c) {
  Tolerance t;
  if (c.tol_opt != nullptr && c.tol_opt->count() > 0) {
    t.equal = c.tol;
    t.proportional = c.tol * 100;
  }
  return t;
}

inline std::string iso_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline RunManifest make_manifest(const std::string& sub, const Common& c, const std::string& mode,
                                 const Tolerance& tol,
                                 std::map<std::string, std::string> flags) {
  RunManifest man;
  man.subcommand = sub;
  man.input_path = c.input.empty() ? "-" : c.input;
  man.input_digest = c.input.empty() ? "-" : digest_file(c.input);
  man.mode = mode;
  man.tol = tol;
  man.seed = c.seed;
  man.flags = std::move(flags);
  man.threads = c.threads;
  man.timestamp = iso_now();
  return man;
}

inline void emit(Document d, const RunManifest& man, const Common& c, std::ostream& out) {
  d.manifest = man;
  const std::string s = render(d, c.format);
  if (c.out_path.empty() || c.out_path == "-") {
    out << s;
    return;
  }
  std::ofstream f(c.out_path, std::ios::binary);
  if (!f) throw validation_error("cannot write \"" + c.out_path + "\"");
  f << s;
  if (!f) throw validation_error("write to \"" + c.out_path + "\" failed");
}

inline void merge_into(Document& d, Document other) {
  for (auto& kv : other.fields) d.fields.push_back(std::move(kv));
  for (auto& t : other.tables) d.tables.push_back(std::move(t));
}

inline ArithmeticMode resolve_mode(const nlohmann::json& root, const std::string& flag) {
  return flag.empty() ? detect_mode(root) : mode_from_name(flag);
}

template <typename Fn>
int with_scalar(ArithmeticMode m, Fn&& fn) {
  if (m == ArithmeticMode::rational) return fn(Rational{});
  return fn(double{});
}

// Flag values accept both "p/q" and decimal notation.
template <typename S>
S parse_scalar_flag(const std::string& s, const char* what) {
  try {
    if (s.find('/') != std::string::npos) return scalar_from_rational<S>(parse_rational(s));
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos != s.size()) throw usage_error("");
    return scalar_from_rational<S>(rational_from_double(x));
  } catch (const std::exception&) {
    throw usage_error(std::string(what) + ": cannot read \"" + s + "\" as a number or p/q");
  }
}

template <typename S>
int do_classify(const nlohmann::json& root, const Common& c, const RunManifest& man,
                std::ostream& out) {
  const Tolerance tol = tolerance_of(c);
  const ModelBundle<S> b = load_bundle<S>(root, tol);
  const MechanismClassification<S> cl = classify_all(b.mm, b.real, b.cond, tol);
  emit(classification_document(b, cl), man, c, out);
  return 0;
}

template <typename S>
int do_likelihood(const nlohmann::json& root, const Common& c, const RunManifest& man,
                  std::ostream& out, const std::string& object, const std::string& phi_name,
                  bool conditional, const std::string& cutoff) {
  const Tolerance tol = tolerance_of(c);
  const ModelBundle<S> b = load_bundle<S>(root, tol);
  const RealisationInput& real = b.require_realisation();

  int phi = -1;
  if (object == "l3") {
    if (phi_name.empty()) throw usage_error("--object l3 needs --phi <name>");
    phi = find_point(b.mm.phi_grid, phi_name);
    if (phi < 0) throw usage_error("phi point \"" + phi_name + "\" is not on the grid");
  }

  DiscreteDataModel<S> dm = b.dm;
  std::string title = "likelihood object " + object;
  if (conditional) {
    if (object == "l5") throw usage_error("the mechanism factor does not condition on x");
    const ConditioningFunction& cond = b.require_conditioning();
    const int x = check_conditioning_applicability(b.dm, b.mm, b.jps, real, cond, tol);
    dm = conditional_data_model(b.dm, cond, x);
    title += " given x=" + cond.level_names[static_cast<std::size_t>(x)];
  }

  GridFunction<S> gf;
  if (object == "l1")
    gf = joint_likelihood(dm, b.mm, b.jps, real.rec);
  else if (object == "l2")
    gf = ignoring_likelihood(dm, real.rec);
  else if (object == "l3")
    gf = fixed_phi_likelihood(dm, b.mm, b.jps, real.rec, phi);
  else if (object == "l4" || object == "profile")
    gf = profile_likelihood(dm, b.mm, b.jps, real.rec);
  else if (object == "l5")
    gf = mechanism_factor(b.mm, real);
  else
    throw usage_error("unknown likelihood object \"" + object +
                      "\"; expected l1, l2, l3, l4, l5, or profile");

  Document d = grid_document(title, "values over the grid", gf);
  if (!cutoff.empty()) {
    const S cut = parse_scalar_flag<S>(cutoff, "--cutoff");
    const std::vector<std::size_t> keep = likelihood_interval(gf, cut);
    std::string labels;
    for (std::size_t i : keep) labels += (labels.empty() ? "" : " ") + gf.labels[i];
    d.field("interval at relative cutoff " + cutoff, labels);
  }
  emit(std::move(d), man, c, out);
  return 0;
}

template <typename S>
Prior<S> resolve_prior(const nlohmann::json& root, const std::string& prior_path, int n_theta,
                       int n_phi, const Tolerance& tol) {
  Prior<S> prior = Prior<S>::uniform(n_theta, n_phi);
  if (!prior_path.empty()) {
    prior = load_prior_file<S>(prior_path, n_theta, n_phi);
  } else if (std::optional<Prior<S>> eb = load_model_prior<S>(root, n_theta, n_phi)) {
    prior = *eb;
  }
  prior.validate(n_theta, n_phi, tol);
  return prior;
}

template <typename S>
int do_bayes(const nlohmann::json& root, const Common& c, const RunManifest& man,
             std::ostream& out, const std::string& prior_path, const std::string& level_str) {
  const Tolerance tol = tolerance_of(c);
  const ModelBundle<S> b = load_bundle<S>(root, tol);
  const RealisationInput& real = b.require_realisation();
  const Prior<S> prior =
      resolve_prior<S>(root, prior_path, b.dm.n_theta(), b.mm.n_phi(), tol);
  const Rational level = parse_scalar_flag<Rational>(level_str, "--level");
  if (level <= 0 || level >= 1)
    throw usage_error("--level must lie strictly between 0 and 1");
  const Theorem2Report<S> rep = verify_theorem2(b.dm, b.mm, b.jps, real, prior, tol, level);
  emit(theorem2_document(rep, b.dm.theta_grid, to_double(level)), man, c, out);
  return 0;
}

inline Statistic resolve_statistic(const std::string& spec) {
  if (spec.size() > 5 && spec.compare(spec.size() - 5, 5, ".json") == 0)
    return load_statistic_json(load_json_file(spec));
  return builtin_statistic(spec);
}

template <typename S>
int do_sampling(const nlohmann::json& root, const Common& c, const RunManifest& man,
                std::ostream& out, const std::string& stat_spec, const std::string& theta_name,
                const std::string& phi_name, bool conditional) {
  const Tolerance tol = tolerance_of(c);
  const ModelBundle<S> b = load_bundle<S>(root, tol);
  const RealisationInput& real = b.require_realisation();
  const Statistic stat = resolve_statistic(stat_spec);

  Theorem3Report<S> rep;
  if (conditional)
    rep = verify_theorem3_given_x(b.dm, b.mm, b.jps, real, b.require_conditioning(), stat, tol);
  else
    rep = verify_theorem3(b.dm, b.mm, real.rec, stat, tol);
  Document d = theorem3_document(rep, b.dm.theta_grid, b.mm.phi_grid);
  d.field("statistic", stat.name);

  if (!theta_name.empty()) {
    const int t = find_point(b.dm.theta_grid, theta_name);
    if (t < 0) throw usage_error("theta point \"" + theta_name + "\" is not on the grid");
    int p = 0;
    if (!phi_name.empty()) {
      p = find_point(b.mm.phi_grid, phi_name);
      if (p < 0) throw usage_error("phi point \"" + phi_name + "\" is not on the grid");
    }
    SamplingDistribution<S> correct, incorrect;
    if (conditional) {
      const ConditioningFunction& cond = b.require_conditioning();
      correct = correct_conditional_dist_given_x(b.dm, b.mm, b.jps, t, p, real, cond, stat, tol);
      incorrect = potentially_incorrect_dist_given_x(b.dm, b.mm, b.jps, t, real, cond, stat, tol);
    } else {
      correct = correct_conditional_dist(b.dm, b.mm, t, p, real.rec.m, stat);
      incorrect = potentially_incorrect_dist(b.dm, t, real.rec.m, stat);
    }
    d.tables.push_back(distribution_table("conditional law of the statistic", correct));
    d.tables.push_back(distribution_table("pattern-fixed law of the statistic", incorrect));
    d.field("distance at the selected point", format_scalar(distribution_tv(correct, incorrect)));
  }
  emit(std::move(d), man, c, out);
  return 0;
}

inline int do_simulate(const nlohmann::json& root, const Common& c, RunManifest man,
                       std::ostream& out, long reps_override, int exact_n) {
  const Tolerance tol = tolerance_of(c);
  SimulationPlan<double> plan = load_plan<double>(root, tol);
  if (c.seed_opt != nullptr && c.seed_opt->count() > 0) plan.seed = c.seed;
  if (reps_override > 0) plan.n_replications = reps_override;
  man.seed = plan.seed;

  const SimulationReport rep = run_simulation(plan, c.threads);
  Document d = simulation_document(rep, plan);

  if (exact_n > 0) {
    // Reloaded in the exact field so "p/q" inputs enumerate without rounding.
    const SimulationPlan<Rational> rplan = load_plan<Rational>(root, tol);
    const ExactSamplingReport er =
        exact_repeated_sampling(rplan.unit_dm, rplan.unit_mm, rplan.true_theta, rplan.true_phi,
                                exact_n, rplan.estimand_component);
    Document ed = exact_sampling_document(er, rplan.unit_dm.theta_grid, exact_n);
    for (auto& [k, v] : ed.fields) d.field("exact " + k, v);
    for (auto& t : ed.tables) d.tables.push_back(std::move(t));
  }
  emit(std::move(d), man, c, out);
  return 0;
}

inline std::string audit_cache_path(const std::string& dir, int n_coords) {
  return dir + "/equivalence_audit_" + std::to_string(n_coords) + "_v" + kToolVersion + ".json";
}

inline std::optional<AppendixAuditOutcome> audit_cache_load(const std::string& dir, int n_coords) {
  try {
    const nlohmann::json j = load_json_file(audit_cache_path(dir, n_coords));
    if (!j.is_object() || j.value("n_coords", -1) != n_coords) return std::nullopt;
    AppendixAuditOutcome a;
    a.searched = j.at("searched").get<long>();
    a.checked = j.at("checked").get<long>();
    a.skipped_no_positivity = j.at("skipped_no_positivity").get<long>();
    a.skipped_incomplete = j.at("skipped_incomplete").get<long>();
    a.violations = j.at("violations").get<long>();
    a.proportional_and_invariant = j.at("proportional_and_invariant").get<long>();
    a.neither = j.at("neither").get<long>();
    return a;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline void audit_cache_store(const std::string& dir, int n_coords,
                              const AppendixAuditOutcome& a) {
  try {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["n_coords"] = n_coords;
    j["searched"] = a.searched;
    j["checked"] = a.checked;
    j["skipped_no_positivity"] = a.skipped_no_positivity;
    j["skipped_incomplete"] = a.skipped_incomplete;
    j["violations"] = a.violations;
    j["proportional_and_invariant"] = a.proportional_and_invariant;
    j["neither"] = a.neither;
    write_json_file(audit_cache_path(dir, n_coords), j);
  } catch (const std::exception&) {
    // The cache is a convenience; failing to write one is not an error.
  }
}

template <typename S>
int do_completeness(const std::optional<nlohmann::json>& root, const Common& c,
                    const RunManifest& man, std::ostream& out, int audit_n) {
  const Tolerance tol = tolerance_of(c);
  Document d;
  if (root) {
    const ModelBundle<S> b = load_bundle<S>(*root, tol);
    d = completeness_document(b.dm);
    if (b.real && b.real->y_full) {
      const AppendixReport<S> rep = verify_appendix_theorem(b.dm, b.mm, b.jps, *b.real, tol);
      merge_into(d, appendix_document(rep, b.mm.phi_grid));
    } else {
      d.field("equivalence check", "skipped: needs a fully recorded realisation");
    }
  } else {
    d.title = "grid completeness audit";
  }
  if (audit_n > 0) {
    // The report depends only on the audit size, never on cache state:
    // identical invocations must render identical bytes.
    const char* cache_dir = std::getenv("IGNORABILITY_LAB_CACHE");
    const bool caching = cache_dir != nullptr && *cache_dir != '\0';
    std::optional<AppendixAuditOutcome> a;
    if (caching) a = audit_cache_load(cache_dir, audit_n);
    if (!a) {
      a = exhaustive_appendix_audit(audit_n);
      if (caching) audit_cache_store(cache_dir, audit_n, *a);
    }
    merge_into(d, audit_document(*a, audit_n));
    d.field("audit cache", std::string(caching ? "on" : "off"));
  }
  emit(std::move(d), man, c, out);
  return 0;
}

inline int do_search(const Common& c, const RunManifest& man, std::ostream& out,
                     const std::string& target, long budget, const std::string& emit_dir) {
  const SearchOutcome so = search_counterexamples(target, budget, c.seed);
  std::vector<std::string> files;
  if (!emit_dir.empty()) {
    std::filesystem::create_directories(emit_dir);
    for (const SearchInstance& h : so.hits) {
      const std::string path =
          emit_dir + "/" + target + "_" + std::to_string(h.candidate) + ".json";
      write_json_file(path, bundle_to_json(h.bundle, h.prior));
      files.push_back(path);
    }
  }
  emit(search_document(so, files), man, c, out);
  return 0;
}

template <typename S>
int do_verify(const nlohmann::json& root, const Common& c, const RunManifest& man,
              std::ostream& out, const std::string& prior_path, const std::string& level_str,
              int theorem = 0) {
  const Tolerance tol = tolerance_of(c);
  const ModelBundle<S> b = load_bundle<S>(root, tol);
  std::vector<CheckLine> lines;

  auto fmt_bool = [](bool v) { return std::string(v ? "true" : "false"); };

  try {
    const MechanismClassification<S> cl = classify_all(b.mm, b.real, b.cond, tol);
    std::string detail = "everywhere MAR=" + fmt_bool(cl.everywhere_mar.holds) +
                         " everywhere MCAR=" + fmt_bool(cl.everywhere_mcar.holds);
    if (cl.realised_mar)
      detail += " realised MAR=" + fmt_bool(cl.realised_mar->holds) +
                " realised MCAR=" + fmt_bool(cl.realised_mcar->holds);
    lines.push_back({"definition implication lattice", "confirmed", detail});
  } catch (const theorem_violation& e) {
    lines.push_back({"definition implication lattice", "violated", e.what()});
  }

  if (b.real && b.real->y_full) {
    try {
      const Theorem1Report<S> rep = verify_theorem1(b.dm, b.mm, b.jps, *b.real, tol);
      lines.push_back({"likelihood factorization under realised MAR",
                       rep.hypotheses_hold() ? "confirmed" : "hypotheses not met",
                       "realised MAR=" + fmt_bool(rep.realised_mar) +
                           " distinct=" + fmt_bool(rep.distinct) +
                           " positivity=" + fmt_bool(rep.positivity) +
                           " factorises=" + fmt_bool(rep.factorises)});
    } catch (const theorem_violation& e) {
      lines.push_back({"likelihood factorization under realised MAR", "violated", e.what()});
    }
    try {
      const AppendixReport<S> rep = verify_appendix_theorem(b.dm, b.mm, b.jps, *b.real, tol);
      lines.push_back({"proportionality equivalent to realised MAR",
                       rep.hypotheses_hold() ? "confirmed" : "hypotheses not met",
                       "grid complete=" + fmt_bool(rep.grid_complete) +
                           " proportional=" + fmt_bool(rep.proportional_all_phi) +
                           " realised MAR=" + fmt_bool(rep.realised_mar) +
                           " equivalence=" + fmt_bool(rep.biconditional_holds())});
    } catch (const theorem_violation& e) {
      lines.push_back({"proportionality equivalent to realised MAR", "violated", e.what()});
    }
  } else {
    lines.push_back({"likelihood factorization under realised MAR", "skipped",
                     "needs a fully recorded realisation"});
    lines.push_back({"proportionality equivalent to realised MAR", "skipped",
                     "needs a fully recorded realisation"});
  }

  if (b.real) {
    try {
      const Prior<S> prior =
          resolve_prior<S>(root, prior_path, b.dm.n_theta(), b.mm.n_phi(), tol);
      const Rational level = parse_scalar_flag<Rational>(level_str, "--level");
      const Theorem2Report<S> rep =
          verify_theorem2(b.dm, b.mm, b.jps, *b.real, prior, tol, level);
      lines.push_back({"posterior equality under realised MAR",
                       rep.realised_mar && rep.prior_independent ? "confirmed"
                                                                 : "hypotheses not met",
                       "realised MAR=" + fmt_bool(rep.realised_mar) +
                           " prior independent=" + fmt_bool(rep.prior_independent) +
                           " tv=" + format_scalar(rep.tv)});
    } catch (const theorem_violation& e) {
      lines.push_back({"posterior equality under realised MAR", "violated", e.what()});
    }
    try {
      const Theorem3Report<S> rep =
          verify_theorem3(b.dm, b.mm, b.real->rec, builtin_statistic("identity"), tol);
      lines.push_back({"conditional law equality under realised MCAR",
                       rep.realised_mcar ? "confirmed" : "hypotheses not met",
                       "realised MCAR=" + fmt_bool(rep.realised_mcar) +
                           " cells skipped=" + std::to_string(rep.skipped)});
    } catch (const theorem_violation& e) {
      lines.push_back({"conditional law equality under realised MCAR", "violated", e.what()});
    }
  } else {
    lines.push_back({"posterior equality under realised MAR", "skipped", "needs a realisation"});
    lines.push_back(
        {"conditional law equality under realised MCAR", "skipped", "needs a realisation"});
  }

  if (theorem != 0) {
    const std::string want = theorem == 1   ? "likelihood factorization under realised MAR"
                             : theorem == 2 ? "posterior equality under realised MAR"
                                            : "conditional law equality under realised MCAR";
    std::vector<CheckLine> keep;
    for (CheckLine& l : lines)
      if (l.name == want) keep.push_back(std::move(l));
    lines = std::move(keep);
  }

  int violated = 0;
  for (const CheckLine& l : lines)
    if (l.status == "violated") ++violated;
  emit(verify_document(lines), man, c, out);
  return violated == 0 ? 0 : 4;
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using cli_detail::Common;

  CLI::App app{"finite-model laboratory for missingness mechanisms and ignorability"};
  app.name("iglab");
  app.require_subcommand(1);

  Common o_classify, o_likelihood, o_bayes, o_sampling, o_simulate, o_completeness, o_search,
      o_verify;

  CLI::App* s_classify =
      app.add_subcommand("classify", "decide MAR and MCAR in their realised and everywhere forms");
  cli_detail::add_common(s_classify, o_classify, true);

  CLI::App* s_likelihood = app.add_subcommand("likelihood", "tabulate a likelihood object");
  cli_detail::add_common(s_likelihood, o_likelihood, true);
  std::string lk_object = "l2", lk_phi, lk_cutoff;
  bool lk_conditional = false;
  s_likelihood->add_option("--object", lk_object, "l1, l2, l3, l4, l5, or profile");
  s_likelihood->add_option("--phi", lk_phi, "designated phi point for l3");
  s_likelihood->add_flag("--conditional", lk_conditional, "condition on the x part");
  s_likelihood->add_option("--cutoff", lk_cutoff, "also report the relative likelihood interval");

  CLI::App* s_bayes = app.add_subcommand("bayes", "compare joint and ignoring posteriors");
  cli_detail::add_common(s_bayes, o_bayes, true);
  std::string by_prior, by_level = "95/100";
  s_bayes->add_option("--prior", by_prior, "prior file (defaults: prior in the model file, else uniform)");
  s_bayes->add_option("--level", by_level, "credible level, p/q or decimal");

  CLI::App* s_sampling =
      app.add_subcommand("sampling", "compare conditional and pattern-fixed laws of a statistic");
  cli_detail::add_common(s_sampling, o_sampling, true);
  std::string sm_stat = "identity", sm_theta, sm_phi;
  bool sm_conditional = false;
  s_sampling->add_option("--statistic", sm_stat,
                         "identity, sum_observed, count_observed, or a .json statistic file");
  s_sampling->add_option("--theta", sm_theta, "also tabulate both laws at this theta point");
  s_sampling->add_option("--phi", sm_phi, "phi point for the tabulated laws (default: first)");
  s_sampling->add_flag("--conditional", sm_conditional, "condition on the x part");

  CLI::App* s_simulate = app.add_subcommand("simulate", "run a repeated sampling study from a plan");
  cli_detail::add_common(s_simulate, o_simulate, true);
  long si_reps = 0;
  int si_exact = 0;
  s_simulate->add_option("--reps", si_reps, "override the plan's replication count");
  s_simulate->add_option("--exact", si_exact, "also enumerate the exact law for this many units (1-4)")
      ->check(CLI::Range(1, 4));

  CLI::App* s_completeness =
      app.add_subcommand("completeness", "rank checks for the conditional family by pattern");
  cli_detail::add_common(s_completeness, o_completeness, false);
  int cp_audit = 0;
  s_completeness->add_option("--audit", cp_audit,
                             "exhaustively audit the equivalence on this many binary coordinates")
      ->check(CLI::Range(1, 2));

  CLI::App* s_search = app.add_subcommand("search", "hunt for instances separating the definitions");
  cli_detail::add_common(s_search, o_search, false);
  std::string se_target, se_emit;
  long se_budget = 1000;
  s_search->add_option("--target", se_target,
                       "realised_not_everywhere_mar, proportional_without_mar, lu_copas, or "
                       "theorem2_dependent_prior")
      ->required();
  s_search->add_option("--budget", se_budget, "random candidates after any exhaustive phase");
  s_search->add_option("--emit", se_emit, "write each hit as a model file into this directory");

  CLI::App* s_verify = app.add_subcommand("verify", "run every theorem check against one model");
  cli_detail::add_common(s_verify, o_verify, true);
  std::string vf_prior, vf_level = "95/100";
  s_verify->add_option("--prior", vf_prior, "prior file for the posterior comparison");
  s_verify->add_option("--level", vf_level, "credible level for the posterior comparison");
  int vf_theorem = 0;
  s_verify->add_option("--theorem", vf_theorem, "report a single numbered check (1-3)")
      ->check(CLI::Range(1, 3));

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("iglab");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(s_classify)) {
      const nlohmann::json root = load_json_file(o_classify.input);
      const ArithmeticMode m = cli_detail::resolve_mode(root, o_classify.mode_flag);
      const RunManifest man = cli_detail::make_manifest("classify", o_classify, mode_name(m),
                                                        cli_detail::tolerance_of(o_classify), {});
      return cli_detail::with_scalar(m, [&](auto tag) {
        using S = decltype(tag);
        return cli_detail::do_classify<S>(root, o_classify, man, out);
      });
    }
    if (app.got_subcommand(s_likelihood)) {
      const nlohmann::json root = load_json_file(o_likelihood.input);
      const ArithmeticMode m = cli_detail::resolve_mode(root, o_likelihood.mode_flag);
      std::map<std::string, std::string> flags{{"object", lk_object}};
      if (!lk_phi.empty()) flags["phi"] = lk_phi;
      if (lk_conditional) flags["conditional"] = "true";
      if (!lk_cutoff.empty()) flags["cutoff"] = lk_cutoff;
      const RunManifest man =
          cli_detail::make_manifest("likelihood", o_likelihood, mode_name(m),
                                    cli_detail::tolerance_of(o_likelihood), std::move(flags));
      return cli_detail::with_scalar(m, [&](auto tag) {
        using S = decltype(tag);
        return cli_detail::do_likelihood<S>(root, o_likelihood, man, out, lk_object, lk_phi,
                                            lk_conditional, lk_cutoff);
      });
    }
    if (app.got_subcommand(s_bayes)) {
      const nlohmann::json root = load_json_file(o_bayes.input);
      const ArithmeticMode m = cli_detail::resolve_mode(root, o_bayes.mode_flag);
      std::map<std::string, std::string> flags{{"level", by_level}};
      if (!by_prior.empty()) flags["prior"] = by_prior;
      const RunManifest man = cli_detail::make_manifest(
          "bayes", o_bayes, mode_name(m), cli_detail::tolerance_of(o_bayes), std::move(flags));
      return cli_detail::with_scalar(m, [&](auto tag) {
        using S = decltype(tag);
        return cli_detail::do_bayes<S>(root, o_bayes, man, out, by_prior, by_level);
      });
    }
    if (app.got_subcommand(s_sampling)) {
      const nlohmann::json root = load_json_file(o_sampling.input);
      const ArithmeticMode m = cli_detail::resolve_mode(root, o_sampling.mode_flag);
      std::map<std::string, std::string> flags{{"statistic", sm_stat}};
      if (!sm_theta.empty()) flags["theta"] = sm_theta;
      if (!sm_phi.empty()) flags["phi"] = sm_phi;
      if (sm_conditional) flags["conditional"] = "true";
      const RunManifest man =
          cli_detail::make_manifest("sampling", o_sampling, mode_name(m),
                                    cli_detail::tolerance_of(o_sampling), std::move(flags));
      return cli_detail::with_scalar(m, [&](auto tag) {
        using S = decltype(tag);
        return cli_detail::do_sampling<S>(root, o_sampling, man, out, sm_stat, sm_theta, sm_phi,
                                          sm_conditional);
      });
    }
    if (app.got_subcommand(s_simulate)) {
      const nlohmann::json root = load_json_file(o_simulate.input);
      std::map<std::string, std::string> flags;
      if (si_reps > 0) flags["reps"] = std::to_string(si_reps);
      if (si_exact > 0) flags["exact"] = std::to_string(si_exact);
      const RunManifest man =
          cli_detail::make_manifest("simulate", o_simulate, "float",
                                    cli_detail::tolerance_of(o_simulate), std::move(flags));
      return cli_detail::do_simulate(root, o_simulate, man, out, si_reps, si_exact);
    }
    if (app.got_subcommand(s_completeness)) {
      std::optional<nlohmann::json> root;
      if (!o_completeness.input.empty()) root = load_json_file(o_completeness.input);
      if (!root && cp_audit == 0)
        throw usage_error("completeness needs --input, --audit, or both");
      const ArithmeticMode m = root ? cli_detail::resolve_mode(*root, o_completeness.mode_flag)
                                    : ArithmeticMode::rational;
      std::map<std::string, std::string> flags;
      if (cp_audit > 0) flags["audit"] = std::to_string(cp_audit);
      const RunManifest man =
          cli_detail::make_manifest("completeness", o_completeness, mode_name(m),
                                    cli_detail::tolerance_of(o_completeness), std::move(flags));
      return cli_detail::with_scalar(m, [&](auto tag) {
        using S = decltype(tag);
        return cli_detail::do_completeness<S>(root, o_completeness, man, out, cp_audit);
      });
    }
    if (app.got_subcommand(s_search)) {
      std::map<std::string, std::string> flags{{"target", se_target},
                                               {"budget", std::to_string(se_budget)}};
      if (!se_emit.empty()) flags["emit"] = se_emit;
      const RunManifest man = cli_detail::make_manifest(
          "search", o_search, "rational", cli_detail::tolerance_of(o_search), std::move(flags));
      return cli_detail::do_search(o_search, man, out, se_target, se_budget, se_emit);
    }
    if (app.got_subcommand(s_verify)) {
      const nlohmann::json root = load_json_file(o_verify.input);
      const ArithmeticMode m = cli_detail::resolve_mode(root, o_verify.mode_flag);
      std::map<std::string, std::string> flags{{"level", vf_level}};
      if (!vf_prior.empty()) flags["prior"] = vf_prior;
      const RunManifest man = cli_detail::make_manifest(
          "verify", o_verify, mode_name(m), cli_detail::tolerance_of(o_verify), std::move(flags));
      return cli_detail::with_scalar(m, [&](auto tag) {
        using S = decltype(tag);
        return cli_detail::do_verify<S>(root, o_verify, man, out, vf_prior, vf_level,
                                        vf_theorem);
      });
    }
    throw usage_error("no subcommand selected");
  } catch (const resource_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const theorem_violation& e) {
    err << "theorem violation: " << e.what() << "\n";
    return 4;
  } catch (const usage_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const validation_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const model_domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const structural_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const precondition_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace iglab

#endif  // IGLAB_CLI_HPP
