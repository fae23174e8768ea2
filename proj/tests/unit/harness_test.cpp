#include "sqlbound/harness.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sqlbound;
namespace fs = std::filesystem;

namespace {

std::string data(const std::string& rel) { return std::string(SQLBOUND_TEST_DATA) + "/" + rel; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  Run r;
  const std::string cmd = std::string(SQLBOUND_CLI) + " " + args + " 2>&1";
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

bool have_z3() { return !find_solver({}).empty(); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sqlbound_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Benchmark, ParsesLinesAndKeepsMalformedOnes) {
  const auto es = load_benchmark(data("bench.jsonl"));
  ASSERT_EQ(es.size(), 6u);
  EXPECT_EQ(es[0].question_id, "salary");
  EXPECT_EQ(es[0].predicted_sql.find("bird"), std::string::npos);
  EXPECT_TRUE(es[0].error.empty());
  EXPECT_EQ(es[5].question_id, "line7");
  EXPECT_NE(es[5].error.find("malformed"), std::string::npos);
  EXPECT_TRUE(parse_benchmark("").empty());
  EXPECT_EQ(parse_benchmark(R"({"question_id": "q", "gold_sql": "x", "predicted_sql": "y"})")[0].error, "missing db_id");
}

TEST(Catalog, UnknownDatabaseThrows) {
  Catalog c(data(""));
  EXPECT_THROW(c.get("nowhere"), InstanceError);
  EXPECT_EQ(c.get("financial").get(), c.get("financial").get());
}

TEST(Suite, RunsFixtureBenchmark) {
  if (!have_z3()) GTEST_SKIP() << "z3 not available";
  Catalog catalog(data(""));
  auto fixture = FixtureBackend::from_file(data("llm_decisions.json"));
  ConstraintOptions co;
  co.validator = &fixture;
  const fs::path cache = scratch("suite_cache");
  co.cache_dir = cache.string();
  ConstraintStore store(catalog, co);
  HarnessOptions ho;
  ho.verify.encoder.bound = 5;
  ho.verify.solver.timeout_secs = 300;
  ho.workers = 2;
  const auto report = run_suite({{"m", load_benchmark(data("bench.jsonl"))}}, catalog, store, ho);
  ASSERT_EQ(report.methods.size(), 1u);
  const auto& m = report.methods[0];
  EXPECT_EQ(m.total, 6u);
  EXPECT_EQ(m.ex_correct, 3u);
  EXPECT_EQ(m.metrics.at(ConfigKind::Vanilla).correct, 0u);
  EXPECT_EQ(m.metrics.at(ConfigKind::RuleBased).correct, 3u);
  EXPECT_EQ(m.metrics.at(ConfigKind::Llm).correct, 1u);
  std::map<std::string, EntryResult> by_id;
  for (const auto& e : report.entries) by_id[e.question_id] = e;
  EXPECT_FALSE(by_id.at("wrong").ex_correct);
  EXPECT_TRUE(by_id.at("wrong").error.empty());
  EXPECT_FALSE(by_id.at("nodb").error.empty());
  EXPECT_EQ(by_id.at("speed").verification.at(ConfigKind::Llm).status, VerifyStatus::EquivalentUpToBound);
  EXPECT_TRUE(fs::exists(cache / "financial.llm.json"));

  const fs::path out = scratch("suite_out");
  write_report(report, out.string());
  for (const char* f : {"report.md", "report.json", "runtime.json", "outcomes.jsonl"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_NE(slurp(out / "counterexamples" / "salary.sql").find("-- question salary, configuration vanilla"), std::string::npos);
  const std::string md = slurp(out / "report.md");
  EXPECT_NE(md.find("50.00"), std::string::npos);
  EXPECT_NE(md.find("16.67"), std::string::npos);

  // Cached constraints and a second run give byte-identical JSON.
  ConstraintStore again(catalog, co);
  ho.workers = 1;
  const auto second = run_suite({{"m", load_benchmark(data("bench.jsonl"))}}, catalog, again, ho);
  EXPECT_EQ(render_json(second), render_json(report));
}

TEST(Cli, VerifyAndReplay) {
  if (!have_z3()) GTEST_SKIP() << "z3 not available";
  const fs::path dir = scratch("cli_verify");
  const auto cex_base = (dir / "cex.sql").string();
  const auto cex = (dir / "cex.vanilla.sql").string();
  const std::string q = data("queries/salary_gold.sql"), p = data("queries/salary_pred.sql");
  const auto v = cli("verify --data-dir " + data("") + " --db financial --gold " + q + " --pred " + p + " --config vanilla --config rule --cex-out " +
                     cex_base);
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_NE(v.out.find("counterexample"), std::string::npos);
  EXPECT_NE(v.out.find("equivalent"), std::string::npos);
  ASSERT_TRUE(fs::exists(cex)) << v.out;
  const auto r = cli("replay --cex " + cex + " --gold " + q + " --pred " + p);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("DIFFERS"), std::string::npos) << r.out;
}

TEST(Cli, EvaluateWritesReports) {
  if (!have_z3()) GTEST_SKIP() << "z3 not available";
  const fs::path out = scratch("cli_eval");
  const auto e = cli("evaluate --data-dir " + data("") + " --benchmark m=" + data("bench.jsonl") + " --config vanilla --validator fixture --fixture " +
                     data("llm_decisions.json") + " --workers 1 --out " + out.string());
  EXPECT_EQ(e.code, 1) << e.out;  // the benchmark carries two broken entries
  const auto j = nlohmann::json::parse(slurp(out / "report.json"));
  EXPECT_TRUE(j.is_object());
  EXPECT_TRUE(fs::exists(out / "outcomes.jsonl"));
}

TEST(Cli, ConfigurationErrorsExitWithTwo) {
  EXPECT_EQ(cli("verify --db financial").code, 2);
  EXPECT_EQ(cli("verify --data-dir " + data("") + " --db nowhere --gold 'SELECT 1' --pred 'SELECT 1'").code, 2);
  EXPECT_EQ(cli("verify --data-dir " + data("") + " --db financial --gold 'SELECT A11 FROM DISTRICT' --pred 'SELECT A11 FROM DISTRICT' --solver /nonexistent/z3")
                .code,
            2);
  const auto m = cli("mine --data-dir " + data("") + " --db financial");
  EXPECT_EQ(m.code, 0);
  EXPECT_NE(m.out.find("DISTRICT"), std::string::npos);
}
