#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "iglab/iglab.hpp"

using namespace iglab;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::ostringstream o, e;
  CliResult r;
  r.code = run_cli(args, o, e);
  r.out = o.str();
  r.err = e.str();
  return r;
}

std::string model_path(const char* n) { return std::string(IGLAB_REPO_DIR) + "/models/" + n; }

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / "iglab_cli_scratch";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("classify renders every committed model") {
  for (const char* name : {"quartet_panel.json", "two_unit_mcar.json",
                           "theorem3_contrast.json", "heitjan_diggle.json"}) {
    INFO("model " << name);
    const CliResult r = run({"classify", "--input", model_path(name)});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
    CHECK(r.out.find("realised MAR") != std::string::npos);
  }
  const CliResult hd = run({"classify", "--input", model_path("heitjan_diggle.json")});
  CHECK(hd.out.find("everywhere MAR") != std::string::npos);
  CHECK(hd.out.find("witness") != std::string::npos);
}

TEST_CASE("validation failures exit with code two") {
  CHECK(run({"classify", "--input", "/nonexistent/x.json"}).code == 2);
  CHECK(run({"classify", "--input", model_path("two_unit_mcar.json"), "--format", "yaml"}).code ==
        2);
  CHECK(run({"classify", "--nope"}).code == 2);
  CHECK(run({"likelihood", "--input", model_path("quartet_panel.json"), "--object", "l3"}).code ==
        2);
  CHECK(run({"bayes", "--input", model_path("two_unit_mcar.json"), "--prior", "/no/prior.json"})
            .code == 2);
  CHECK(run({"completeness"}).code == 2);

  // Decimal probabilities cannot back the exact mode.
  nlohmann::json doc = load_json_file(model_path("theorem3_contrast.json"));
  doc["data_model"]["tables"]["t0"] = {0.5, 0.5};
  const fs::path mixed = scratch_dir() / "mixed_mode.json";
  write_json_file(mixed.string(), doc);
  CHECK(run({"classify", "--input", mixed.string(), "--mode", "rational"}).code == 2);
  CHECK(run({"classify", "--input", mixed.string()}).code == 0);
}

TEST_CASE("report bodies are machine-readable in every format") {
  const std::string in = model_path("quartet_panel.json");
  const CliResult js = run({"classify", "--input", in, "--format", "json"});
  REQUIRE(js.code == 0);
  const nlohmann::json parsed = nlohmann::json::parse(js.out);
  CHECK(parsed.contains("manifest"));
  CHECK(parsed["manifest"]["subcommand"] == "classify");
  CHECK(parsed["manifest"]["mode"] == "rational");

  const CliResult csv = run({"classify", "--input", in, "--format", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("# manifest,tool_version,", 0) == 0);

  const CliResult txt = run({"classify", "--input", in});
  CHECK(txt.out.find("input digest") != std::string::npos);
}

TEST_CASE("--out writes exactly the bytes that stdout would carry") {
  const std::string in = model_path("two_unit_mcar.json");
  const fs::path target = scratch_dir() / "report.json";
  const CliResult direct = run({"bayes", "--input", in, "--format", "json"});
  REQUIRE(direct.code == 0);
  const CliResult filed =
      run({"bayes", "--input", in, "--format", "json", "--out", target.string()});
  REQUIRE(filed.code == 0);
  CHECK(filed.out.empty());
  CHECK(slurp(target) == direct.out);
}

TEST_CASE("the thread count never reaches the rendered report") {
  const std::string plan = model_path("monotone_mar_plan.json");
  const CliResult one =
      run({"simulate", "--input", plan, "--reps", "300", "--threads", "1"});
  const CliResult eight =
      run({"simulate", "--input", plan, "--reps", "300", "--threads", "8"});
  REQUIRE(one.code == 0);
  REQUIRE(eight.code == 0);
  CHECK(one.out == eight.out);

  const CliResult cls1 = run({"classify", "--input", model_path("quartet_panel.json"),
                              "--threads", "1"});
  const CliResult cls8 = run({"classify", "--input", model_path("quartet_panel.json"),
                              "--threads", "8"});
  CHECK(cls1.out == cls8.out);
}

TEST_CASE("an impossible conditioning event exits with code three") {
  nlohmann::json doc = load_json_file(model_path("mcar_control_plan.json"));
  doc["missingness_model"]["kernels"]["p0"] = {{"11", {1, 1, 1, 1}},
                                               {"10", {0, 0, 0, 0}},
                                               {"01", {0, 0, 0, 0}},
                                               {"00", {0, 0, 0, 0}}};
  doc["conditioning"] = {{"mode", "pattern"}, {"pattern", {0, 0}}};
  doc["rules"] = {"wald_observed"};
  doc["replications"] = 1;
  const fs::path capped = scratch_dir() / "impossible_condition.json";
  write_json_file(capped.string(), doc);
  const CliResult r = run({"simulate", "--input", capped.string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("error:") != std::string::npos);
}

TEST_CASE("search emits hit files that reproduce their verdicts") {
  const fs::path dir = scratch_dir() / "hits";
  fs::remove_all(dir);
  const CliResult r = run({"search", "--target", "realised_not_everywhere_mar", "--budget", "5",
                           "--seed", "7", "--emit", dir.string()});
  REQUIRE(r.code == 0);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) files.push_back(entry.path());
  REQUIRE(!files.empty());
  for (const fs::path& f : files) {
    const ModelBundle<Rational> b = load_bundle<Rational>(load_json_file(f.string()), Tolerance{});
    REQUIRE(b.real.has_value());
    CHECK(classify_realised_mar(b.mm, b.real->rec, Tolerance{}).holds);
    CHECK_FALSE(classify_everywhere_mar(b.mm, Tolerance{}).holds);
    CHECK(run({"classify", "--input", f.string()}).code == 0);
  }
}

TEST_CASE("the audit cache changes no byte of the report") {
  const fs::path cache = scratch_dir() / "cache";
  fs::remove_all(cache);
  fs::create_directories(cache);
  REQUIRE(setenv("IGNORABILITY_LAB_CACHE", cache.string().c_str(), 1) == 0);
  const CliResult cold = run({"completeness", "--audit", "1"});
  const CliResult warm = run({"completeness", "--audit", "1"});
  REQUIRE(unsetenv("IGNORABILITY_LAB_CACHE") == 0);
  const CliResult off = run({"completeness", "--audit", "1"});
  REQUIRE(cold.code == 0);
  CHECK(cold.out == warm.out);
  CHECK(cold.out.find("audit cache: on") != std::string::npos);
  CHECK(off.out.find("audit cache: off") != std::string::npos);
  CHECK(!fs::is_empty(cache));
}

TEST_CASE("verify confirms the invariant model and flags unmet hypotheses") {
  const CliResult ok = run({"verify", "--input", model_path("two_unit_mcar.json")});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("confirmed") != std::string::npos);
  CHECK(ok.out.find("violated") == std::string::npos);
  CHECK(ok.out.find("hypotheses not met") == std::string::npos);

  const CliResult mixed = run({"verify", "--input", model_path("theorem3_contrast.json")});
  CHECK(mixed.code == 0);
  CHECK(mixed.out.find("hypotheses not met") != std::string::npos);
  CHECK(mixed.out.find("violated") == std::string::npos);

  const CliResult one =
      run({"verify", "--input", model_path("two_unit_mcar.json"), "--theorem", "2"});
  CHECK(one.code == 0);
  CHECK(one.out.find("posterior equality") != std::string::npos);
  CHECK(one.out.find("implication lattice") == std::string::npos);
  CHECK(run({"verify", "--input", model_path("two_unit_mcar.json"), "--theorem", "4"}).code == 2);
}

TEST_CASE("likelihood and sampling reports carry their headline numbers") {
  const CliResult lk = run({"likelihood", "--input", model_path("two_unit_mcar.json"),
                            "--object", "l2", "--cutoff", "1/15"});
  REQUIRE(lk.code == 0);
  CHECK(lk.out.find("1/4") != std::string::npos);
  CHECK(lk.out.find("3/4") != std::string::npos);

  const CliResult sm = run({"sampling", "--input", model_path("theorem3_contrast.json"),
                            "--theta", "t0"});
  REQUIRE(sm.code == 0);
  CHECK(sm.out.find("3/26") != std::string::npos);

  const CliResult sim = run({"simulate", "--input", model_path("mcar_control_plan.json"),
                             "--reps", "50", "--exact", "2"});
  REQUIRE(sim.code == 0);
  CHECK(sim.out.find("exact") != std::string::npos);
}
