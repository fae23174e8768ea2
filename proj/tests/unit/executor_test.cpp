#include "sqlbound/executor.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace sqlbound;

namespace {

DatabaseSchema schema() {
  return parse_schema(R"({"tables": [
    {"name": "t", "columns": [{"name": "id", "type": "integer"}, {"name": "g", "type": "text"},
                              {"name": "x", "type": "integer"}, {"name": "r", "type": "real"}],
     "primary_key": ["id"]}]})");
}

DatabaseInstance db() {
  DatabaseInstance d = DatabaseInstance::empty(schema());
  d.rows("T") = {
      {Value::integer(1), Value::text("a"), Value::integer(4), Value::real(Rational(1, 2))},
      {Value::integer(2), Value::text("a"), Value::null(), Value::null()},
      {Value::integer(3), Value::text("b"), Value::integer(-7), Value::real(Rational(3))},
      {Value::integer(4), Value::null(), Value::integer(2), Value::null()},
  };
  return d;
}

ResultRelation run(const std::string& sql, const DatabaseInstance& d = db()) {
  const auto r = parse_query(sql, d.schema);
  if (!is_query(r)) throw std::runtime_error(describe(r));
  return execute(std::get<Query>(r), d);
}

Value cell(const ResultRelation& r, std::size_t row = 0, std::size_t col = 0) { return r.rows.at(row).at(col); }

}  // namespace

TEST(Executor, ThreeValuedFilterDropsUnknown) {
  EXPECT_EQ(run("SELECT ID FROM T WHERE G <> 'a'").rows.size(), 1u);
  EXPECT_EQ(run("SELECT ID FROM T WHERE NOT (G = 'a')").rows.size(), 1u);
  EXPECT_EQ(run("SELECT ID FROM T WHERE G <> 'a' OR G IS NULL").rows.size(), 2u);
  EXPECT_EQ(run("SELECT ID FROM T WHERE X > 0 OR X <= 0").rows.size(), 3u);
}

TEST(Executor, CountSkipsNulls) {
  EXPECT_EQ(cell(run("SELECT COUNT(*) FROM T")), Value::integer(4));
  EXPECT_EQ(cell(run("SELECT COUNT(X) FROM T")), Value::integer(3));
  EXPECT_EQ(cell(run("SELECT COUNT(G) FROM T")), Value::integer(3));
}

TEST(Executor, AggregatesOnEmptyInput) {
  const auto r = run("SELECT COUNT(*), SUM(X), AVG(X), MIN(X), MAX(X) FROM T WHERE ID > 100");
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(cell(r, 0, 0), Value::integer(0));
  for (std::size_t c = 1; c < 5; ++c) EXPECT_TRUE(cell(r, 0, c).is_null());
}

TEST(Executor, AverageIsExact) {
  // (4 - 7 + 2) / 3
  EXPECT_TRUE(same_value(cell(run("SELECT AVG(X) FROM T")), Value::real(Rational(-1, 3))));
  EXPECT_TRUE(same_value(cell(run("SELECT CAST(SUM(X) AS REAL) / COUNT(ID) FROM T")), Value::real(Rational(-1, 4))));
}

TEST(Executor, IntegerDivisionTruncatesAndDivisionByZeroIsNull) {
  EXPECT_EQ(cell(run("SELECT X / 2 FROM T WHERE ID = 3")), Value::integer(-3));
  EXPECT_TRUE(same_value(cell(run("SELECT R / 2 FROM T WHERE ID = 3")), Value::real(Rational(3, 2))));
  EXPECT_TRUE(cell(run("SELECT X / 0 FROM T WHERE ID = 1")).is_null());
}

TEST(Executor, GroupByFormsNullGroup) {
  const auto r = run("SELECT G, COUNT(*) FROM T GROUP BY G");
  ASSERT_EQ(r.rows.size(), 3u);
  bool null_group = false;
  for (const auto& row : r.rows)
    if (row[0].is_null()) null_group = same_value(row[1], Value::integer(1));
  EXPECT_TRUE(null_group);
}

TEST(Executor, DistinctCollapsesNulls) {
  EXPECT_EQ(run("SELECT DISTINCT G FROM T").rows.size(), 3u);
  EXPECT_EQ(run("SELECT DISTINCT R FROM T").rows.size(), 3u);
}

TEST(Executor, OrderByLimitAndTieDetection) {
  const auto r = run("SELECT ID FROM T WHERE X IS NOT NULL ORDER BY X DESC LIMIT 1");
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(cell(r), Value::integer(1));
  EXPECT_FALSE(r.limit_tie);
  EXPECT_TRUE(r.ordered);
  EXPECT_FALSE(run("SELECT ID FROM T ORDER BY G LIMIT 1").limit_tie);  // the NULL key sorts first and is unique
  EXPECT_TRUE(run("SELECT ID FROM T ORDER BY G LIMIT 2").limit_tie);   // cuts between the two 'a' rows
  EXPECT_FALSE(run("SELECT ID FROM T ORDER BY G LIMIT 3").limit_tie);
}

TEST(Executor, NullsSortFirstAscending) {
  const auto r = run("SELECT X FROM T ORDER BY X");
  EXPECT_TRUE(cell(r).is_null());
}

TEST(Executor, JoinProducesProduct) {
  const auto r = run("SELECT A.ID, B.ID FROM T AS A JOIN T AS B ON A.G = B.G");
  EXPECT_EQ(r.rows.size(), 5u);  // a x a (4) + b x b (1); NULL never joins
}

TEST(Executor, ResultComparisonModes) {
  ResultRelation a, b;
  a.columns = b.columns = {"C"};
  a.rows = {{Value::integer(1)}, {Value::integer(1)}, {Value::null()}};
  b.rows = {{Value::null()}, {Value::real(Rational(1))}};
  EXPECT_TRUE(results_equal(a, b, CompareMode::Set));
  EXPECT_FALSE(results_equal(a, b, CompareMode::Bag));
  b.rows.push_back({Value::integer(1)});
  EXPECT_TRUE(results_equal(a, b, CompareMode::Bag));
  EXPECT_FALSE(results_equal(a, b, CompareMode::Ordered));
}

TEST(Executor, ExMetricOnMotivatingPair) {
  const auto fin = load_database_dir(std::string(SQLBOUND_TEST_DATA) + "/financial");
  auto read = [](const std::string& n) {
    std::ifstream in(std::string(SQLBOUND_TEST_DATA) + "/queries/" + n + ".sql");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const auto gold = parse_query(read("salary_gold"), fin.schema);
  const auto pred = parse_query(read("salary_pred"), fin.schema);
  const ExOutcome ex = ex_metric(gold, pred, fin);
  EXPECT_TRUE(ex.equal);
  EXPECT_FALSE(ex.error);
}

TEST(Executor, ExMetricReportsPredictionErrors) {
  const auto d = db();
  const ExOutcome ex = ex_metric(parse_query("SELECT ID FROM T", d.schema), parse_query("SELECT NOPE FROM T", d.schema), d);
  EXPECT_FALSE(ex.equal);
  EXPECT_TRUE(ex.error);
}
