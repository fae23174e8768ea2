#include "sqlbound/counterexample.hpp"

#include "support/random_sql.hpp"

#include <gtest/gtest.h>

using namespace sqlbound;

TEST(Script, RoundTripsFixtureDatabase) {
  const auto db = load_database_dir(std::string(SQLBOUND_TEST_DATA) + "/formula_1");
  const std::string script = render_script(db);
  EXPECT_NE(script.find("CREATE TABLE DRIVERS"), std::string::npos);
  const auto back = parse_script(script);
  EXPECT_EQ(back.schema.tables.size(), db.schema.tables.size());
  EXPECT_EQ(back.rows("DRIVERS"), db.rows("DRIVERS"));
  EXPECT_EQ(render_script(back), script);
}

TEST(Script, RoundTripsRandomInstances) {
  for (unsigned seed = 0; seed < 50; ++seed) {
    std::mt19937 rng(seed);
    const auto schema = sqlbound::testing::random_schema(rng);
    const auto db = sqlbound::testing::random_instance(schema, rng, 6, 5, 0.3);
    const auto back = parse_script(render_script(db));
    for (const auto& t : schema.tables) EXPECT_EQ(back.rows(t.name), db.rows(t.name)) << render_script(db);
  }
}

TEST(Script, QuotesAndRationals) {
  TableSchema t{"T", {{"S", ColumnType::Text, ""}, {"R", ColumnType::Real, ""}, {"D", ColumnType::Date, ""}}, {}, {}};
  DatabaseInstance db = DatabaseInstance::empty(DatabaseSchema{{t}});
  db.rows("T").push_back({Value::text("it's"), Value::real(Rational(1, 3)), Value::date(730178)});
  db.rows("T").push_back({Value::null(), Value::null(), Value::null()});
  const std::string script = render_script(db);
  EXPECT_NE(script.find("'it''s'"), std::string::npos);
  EXPECT_NE(script.find("2000-02-29"), std::string::npos);
  EXPECT_EQ(parse_script(script).rows("T"), db.rows("T"));
}

TEST(Script, RejectsMalformedScripts) {
  EXPECT_THROW(parse_script("INSERT INTO NOPE VALUES (1);"), ScriptError);
  EXPECT_THROW(parse_script("CREATE TABLE T (A INTEGER); INSERT INTO T VALUES (1, 2);"), ScriptError);
}
