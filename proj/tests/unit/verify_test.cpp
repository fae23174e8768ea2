#include "sqlbound/executor.hpp"
#include "sqlbound/validator.hpp"
#include "sqlbound/verify.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace sqlbound;

namespace {

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string data(const std::string& rel) { return std::string(SQLBOUND_TEST_DATA) + "/" + rel; }

VerifyOptions options() {
  VerifyOptions o;
  o.encoder.bound = 5;
  o.solver.timeout_secs = 120;
  return o;
}

bool have_z3() { return !find_solver({}).empty(); }

}  // namespace

TEST(Verify, MotivatingPairAcrossConfigurations) {
  if (!have_z3()) GTEST_SKIP() << "z3 not available";
  const auto db = load_database_dir(data("financial"));
  const auto gold = parse_query(read(data("queries/salary_gold.sql")), db.schema);
  const auto pred = parse_query(read(data("queries/salary_pred.sql")), db.schema);
  ASSERT_TRUE(ex_metric(gold, pred, db).equal);

  const auto vanilla = verify_pair(gold, pred, db.schema, {}, options());
  ASSERT_EQ(vanilla.status, VerifyStatus::Counterexample) << vanilla.detail;
  ASSERT_TRUE(vanilla.counterexample);
  // The witness must separate the queries when executed.
  EXPECT_FALSE(results_equal(execute(std::get<Query>(gold), *vanilla.counterexample),
                             execute(std::get<Query>(pred), *vanilla.counterexample), CompareMode::Set));
  EXPECT_NE(vanilla.script.find("INSERT INTO DISTRICT"), std::string::npos);

  const auto rule = verify_pair(gold, pred, db.schema, accept_all_strict(mine_all(db)), options());
  EXPECT_EQ(rule.status, VerifyStatus::EquivalentUpToBound) << rule.detail;

  auto fixture = FixtureBackend::from_file(data("llm_decisions.json"));
  std::vector<std::string> warnings;
  const auto llm_set = validate_set(mine_all(db), db, fixture, {}, warnings);
  const auto llm = verify_pair(gold, pred, db.schema, llm_set, options());
  ASSERT_EQ(llm.status, VerifyStatus::Counterexample) << llm.detail;
  for (const auto& c : llm_set) EXPECT_TRUE(c.status != Status::Accepted || holds(c, *llm.counterexample)) << c.describe();
}

TEST(Verify, IdenticalQueriesAreEquivalent) {
  if (!have_z3()) GTEST_SKIP() << "z3 not available";
  const auto s = load_schema_file(data("student_club/schema.json"));
  const auto q = parse_query("SELECT COUNT(*) FROM MEMBER WHERE POSITION = 'MEMBER'", s);
  auto o = options();
  o.encoder.bound = 3;
  EXPECT_EQ(verify_pair(q, q, s, {}, o).status, VerifyStatus::EquivalentUpToBound);
}

TEST(Verify, UnsupportedAndErrorOutcomes) {
  const auto s = load_schema_file(data("student_club/schema.json"));
  const auto ok = parse_query("SELECT POSITION FROM MEMBER", s);
  const auto outer = parse_query("SELECT M.POSITION FROM MEMBER M LEFT JOIN MAJOR J ON M.LINK_TO_MAJOR = J.MAJOR_ID", s);
  const auto v1 = verify_pair(ok, outer, s, {});
  EXPECT_EQ(v1.status, VerifyStatus::Unsupported);
  EXPECT_NE(v1.detail.find("outer join"), std::string::npos);
  const auto bad = parse_query("SELECT NOPE FROM MEMBER", s);
  EXPECT_EQ(verify_pair(ok, bad, s, {}).status, VerifyStatus::Error);
  const auto text_order = parse_query("SELECT POSITION FROM MEMBER WHERE POSITION < 'M'", s);
  EXPECT_EQ(verify_pair(ok, text_order, s, {}).status, VerifyStatus::Unsupported);
}

TEST(Verify, MissingSolverIsAnError) {
  const auto s = load_schema_file(data("student_club/schema.json"));
  const auto q1 = parse_query("SELECT POSITION FROM MEMBER", s);
  const auto q2 = parse_query("SELECT DISTINCT POSITION FROM MEMBER", s);
  auto o = options();
  o.solver.z3_path = "/nonexistent/z3";
  o.encoder.bound = 2;
  EXPECT_EQ(verify_pair(q1, q2, s, {}, o).status, VerifyStatus::Error);
}
