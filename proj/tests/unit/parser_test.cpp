#include "sqlbound/parser.hpp"

#include "support/random_sql.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace sqlbound;

namespace {

DatabaseSchema financial() { return load_schema_file(std::string(SQLBOUND_TEST_DATA) + "/financial/schema.json"); }

std::string query_file(const std::string& name) {
  std::ifstream in(std::string(SQLBOUND_TEST_DATA) + "/queries/" + name + ".sql");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Query as_query(const ParseResult& r) {
  if (!is_query(r)) throw std::runtime_error(describe(r));
  return std::get<Query>(r);
}

}  // namespace

TEST(Parser, MotivatingPairResolves) {
  const auto s = financial();
  const Query pred = as_query(parse_query(query_file("salary_pred"), s));
  EXPECT_TRUE(pred.distinct);
  EXPECT_EQ(pred.from.size(), 3u);
  EXPECT_EQ(pred.output_names(), std::vector<std::string>{"TYPE"});
  const Query gold = as_query(parse_query(query_file("salary_gold"), s));
  EXPECT_FALSE(gold.distinct);
  ASSERT_TRUE(gold.where);
  EXPECT_EQ(gold.from[0].alias, "T1");
  EXPECT_EQ(gold.select[0].expr.column.source, 2u);
}

TEST(Parser, BetweenKeepsBothBounds) {
  const Query q = as_query(parse_query("SELECT A11 FROM DISTRICT WHERE A11 BETWEEN 8000 AND 9000", financial()));
  ASSERT_TRUE(q.where);
  EXPECT_EQ(q.where->kind, PredKind::Between);
  EXPECT_EQ(q.where->operands[1].literal, Value::integer(8000));
}

TEST(Parser, CaseInsensitiveIdentifiersAndAliases) {
  const Query q = as_query(parse_query("select d.a11 as salary from district d where d.A11 > 1", financial()));
  EXPECT_EQ(q.output_names(), std::vector<std::string>{"SALARY"});
}

TEST(Parser, ResolutionErrors) {
  const auto r = parse_query("SELECT NOPE FROM DISTRICT", financial());
  ASSERT_TRUE(std::holds_alternative<SqlError>(r));
  EXPECT_EQ(std::get<SqlError>(r).kind, SqlError::Kind::Resolution);
  EXPECT_TRUE(std::holds_alternative<SqlError>(parse_query("SELECT A11 FROM NOWHERE", financial())));
}

TEST(Parser, AmbiguousColumnIsAnError) {
  const auto r = parse_query("SELECT DISTRICT_ID FROM DISTRICT JOIN ACCOUNT ON DISTRICT.DISTRICT_ID = ACCOUNT.DISTRICT_ID", financial());
  ASSERT_TRUE(std::holds_alternative<SqlError>(r));
}

TEST(Parser, SyntaxErrors) {
  for (const char* sql : {"SELECT FROM", "SELECT A11 FROM DISTRICT WHERE", "SELEC A11 FROM DISTRICT", "SELECT (A11 FROM DISTRICT", ""}) {
    const auto r = parse_query(sql, financial());
    ASSERT_TRUE(std::holds_alternative<SqlError>(r)) << sql;
    EXPECT_EQ(std::get<SqlError>(r).kind, SqlError::Kind::Syntax) << sql;
  }
}

TEST(Parser, TypeErrors) {
  const auto r = parse_query("SELECT A11 FROM DISTRICT WHERE A2 > 5", financial());
  ASSERT_TRUE(std::holds_alternative<SqlError>(r));
  EXPECT_EQ(std::get<SqlError>(r).kind, SqlError::Kind::Type);
}

TEST(Parser, OutsideFragmentIsUnsupportedWithSpan) {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"SELECT A11 FROM DISTRICT LEFT JOIN ACCOUNT ON DISTRICT.DISTRICT_ID = ACCOUNT.DISTRICT_ID", "outer join"},
      {"SELECT A3, COUNT(*) FROM DISTRICT GROUP BY A3 HAVING COUNT(*) > 1", "HAVING"},
      {"SELECT A2 FROM DISTRICT WHERE A2 LIKE 'P%'", "pattern matching"},
      {"SELECT A2 FROM DISTRICT UNION SELECT A3 FROM DISTRICT", "set operation"},
      {"SELECT RANK() OVER (ORDER BY A11) FROM DISTRICT", "window function"},
      {"SELECT A2 FROM DISTRICT WHERE A11 = (SELECT MAX(A11) FROM DISTRICT)", "scalar subquery"},
  };
  for (const auto& [sql, construct] : cases) {
    const auto r = parse_query(sql, financial());
    ASSERT_TRUE(std::holds_alternative<UnsupportedReport>(r)) << sql << " -> " << describe(r);
    const auto& u = std::get<UnsupportedReport>(r);
    EXPECT_NE(u.construct.find(construct), std::string::npos) << u.construct;
    EXPECT_LT(u.begin, u.end);
    EXPECT_LE(u.end, sql.size());
  }
}

TEST(Parser, DerivedTableWithLimit) {
  const auto s = load_schema_file(std::string(SQLBOUND_TEST_DATA) + "/toxicology/schema.json");
  const Query q = as_query(parse_query(query_file("bond_gold"), s));
  ASSERT_EQ(q.from.size(), 1u);
  ASSERT_TRUE(q.from[0].is_derived());
  EXPECT_EQ(q.from[0].derived->limit, 1);
}

TEST(Parser, RenderRoundTripsOnRandomQueries) {
  int checked = 0;
  for (unsigned seed = 0; seed < 300; ++seed) {
    std::mt19937 rng(seed);
    const auto schema = sqlbound::testing::random_schema(rng);
    const auto pair = sqlbound::testing::random_pair(schema, rng);
    for (const auto& sql : {pair.q1, pair.q2}) {
      const auto r = parse_query(sql, schema);
      if (!is_query(r)) continue;
      const std::string text = render_query(std::get<Query>(r));
      const auto again = parse_query(text, schema);
      ASSERT_TRUE(is_query(again)) << sql << "\n" << text << "\n" << describe(again);
      EXPECT_EQ(std::get<Query>(again), std::get<Query>(r)) << text;
      ++checked;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(Parser, NeverThrowsOnGarbage) {
  std::mt19937 rng(3);
  const std::string alphabet = "SELECT FROM WHERE ()*,.'\"=<>!0123456789 ANDORNOT DISTRICT A11";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int n = static_cast<int>(rng() % 40);
    for (int k = 0; k < n; ++k) s += alphabet[rng() % alphabet.size()];
    EXPECT_NO_THROW(parse_query(s, financial()));
  }
}
