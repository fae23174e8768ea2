#include "sqlbound/instance.hpp"
#include "sqlbound/schema.hpp"
#include "sqlbound/value.hpp"

#include <gtest/gtest.h>

using namespace sqlbound;

TEST(Dates, DayZeroIsFirstOfJanuaryYearOne) {
  EXPECT_EQ(parse_iso_date("0001-01-01"), 0);
  EXPECT_EQ(format_iso_date(1), "0001-01-02");
}

TEST(Dates, MatchesProlepticOrdinals) {
  // Python: date(1970, 1, 1).toordinal() - 1
  EXPECT_EQ(parse_iso_date("1970-01-01"), 719162);
  EXPECT_EQ(parse_iso_date("2000-02-29"), 730178);
  EXPECT_EQ(parse_iso_date("9999-12-31"), kMaxDateDays);
  EXPECT_EQ(format_iso_date(730178), "2000-02-29");
}

TEST(Dates, RejectsInvalidCalendarDays) {
  EXPECT_FALSE(parse_iso_date("2001-02-29"));
  EXPECT_FALSE(parse_iso_date("2020-13-01"));
  EXPECT_FALSE(parse_iso_date("20-01-01"));
}

TEST(Values, SqlRendering) {
  EXPECT_EQ(Value::null().to_sql(), "NULL");
  EXPECT_EQ(Value::integer(-12).to_sql(), "-12");
  EXPECT_EQ(Value::real(Rational(5, 2)).to_sql(), "2.5");
  EXPECT_EQ(Value::real(Rational(1, 3)).to_sql(), "(1.0 / 3)");
  EXPECT_EQ(Value::text("it's").to_sql(), "'it''s'");
  EXPECT_EQ(Value::date(0).to_sql(), "'0001-01-01'");
}

TEST(Values, SameValueTreatsNullAsEqualAndMixesNumbers) {
  EXPECT_TRUE(same_value(Value::null(), Value::null()));
  EXPECT_TRUE(same_value(Value::integer(2), Value::real(Rational(2))));
  EXPECT_FALSE(same_value(Value::text("2"), Value::integer(2)));
  EXPECT_FALSE(same_value(Value::null(), Value::integer(0)));
}

TEST(Values, TotalOrderPutsNullFirst) {
  EXPECT_TRUE(total_order(Value::null(), Value::integer(-100)) < 0);
  EXPECT_TRUE(total_order(Value::integer(1), Value::real(Rational(3, 2))) < 0);
  EXPECT_TRUE(total_order(Value::text("a"), Value::text("b")) < 0);
}

TEST(Values, RationalParsing) {
  EXPECT_EQ(parse_rational("-3.25"), Rational(-13, 4));
  EXPECT_EQ(parse_rational("1/3"), Rational(1, 3));
  EXPECT_FALSE(parse_rational("abc"));
  EXPECT_EQ(format_rational(Rational(1, 3)), "1/3");
  EXPECT_EQ(format_rational(Rational(-1, 8)), "-0.125");
}

TEST(Schema, ParsesDescriptorAndUppercasesNames) {
  const auto s = parse_schema(R"({"tables": [
    {"name": "district", "columns": [{"name": "district_id", "type": "integer"}, {"name": "a11", "type": "integer"}],
     "primary_key": ["district_id"]},
    {"name": "account", "columns": [{"name": "account_id", "type": "integer"}, {"name": "district_id", "type": "integer"}],
     "foreign_keys": [{"column": "district_id", "ref_table": "district", "ref_column": "district_id"}]}]})");
  ASSERT_EQ(s.tables.size(), 2u);
  EXPECT_EQ(s.at("District").name, "DISTRICT");
  EXPECT_TRUE(s.at("DISTRICT").is_primary_key("district_id"));
  EXPECT_EQ(s.at("ACCOUNT").foreign_keys[0].ref_table, "DISTRICT");
  EXPECT_EQ(parse_schema(schema_to_json(s)), s);
}

TEST(Schema, RejectsDanglingForeignKey) {
  EXPECT_THROW(parse_schema(R"({"tables": [{"name": "a", "columns": [{"name": "x", "type": "integer"}],
    "foreign_keys": [{"column": "x", "ref_table": "b", "ref_column": "y"}]}]})"),
               SchemaError);
}

TEST(Schema, RejectsDuplicatesAndUnknownTypes) {
  EXPECT_THROW(parse_schema(R"({"tables": [{"name": "a", "columns": [{"name": "x", "type": "integer"}, {"name": "X", "type": "text"}]}]})"),
               SchemaError);
  EXPECT_THROW(parse_schema(R"({"tables": [{"name": "a", "columns": [{"name": "x", "type": "blob"}]}]})"), SchemaError);
  EXPECT_THROW(parse_schema("not json"), SchemaError);
}

TEST(Instance, CsvReaderHandlesQuotes) {
  const auto rec = read_csv("a,b\r\n\"x,1\",\"say \"\"hi\"\"\"\n,2\n");
  ASSERT_EQ(rec.size(), 3u);
  EXPECT_EQ(rec[1][0], "x,1");
  EXPECT_EQ(rec[1][1], "say \"hi\"");
  EXPECT_EQ(rec[2][0], "");
  EXPECT_EQ(read_csv(write_csv(rec)), rec);
}

TEST(Instance, LoadsFixtureDatabase) {
  const auto db = load_database_dir(std::string(SQLBOUND_TEST_DATA) + "/financial");
  EXPECT_EQ(db.rows("DISTRICT").size(), 40u);
  EXPECT_EQ(db.rows("DISP").size(), 80u);
  EXPECT_FALSE(check_integrity(db));
}

TEST(Instance, IntegrityViolations) {
  const auto schema = parse_schema(R"({"tables": [
    {"name": "p", "columns": [{"name": "id", "type": "integer"}], "primary_key": ["id"]},
    {"name": "c", "columns": [{"name": "pid", "type": "integer"}],
     "foreign_keys": [{"column": "pid", "ref_table": "p", "ref_column": "id"}]}]})");
  DatabaseInstance db = DatabaseInstance::empty(schema);
  db.rows("P") = {{Value::integer(1)}};
  db.rows("C") = {{Value::integer(1)}, {Value::null()}};
  EXPECT_FALSE(check_integrity(db));
  db.rows("C").push_back({Value::integer(7)});
  EXPECT_TRUE(check_integrity(db));
  db.rows("C").pop_back();
  db.rows("P").push_back({Value::integer(1)});
  EXPECT_TRUE(check_integrity(db));
  db.rows("P") = {{Value::null()}};
  EXPECT_TRUE(check_integrity(db));
}
