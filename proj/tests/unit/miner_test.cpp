#include "sqlbound/miner.hpp"

#include <gtest/gtest.h>

using namespace sqlbound;

namespace {

DatabaseInstance one_column(ColumnType type, const std::vector<Value>& values, bool with_pk = false) {
  TableSchema t;
  t.name = "T";
  if (with_pk) {
    t.columns.push_back({"ID", ColumnType::Integer, ""});
    t.primary_key = {"ID"};
  }
  t.columns.push_back({"C", type, ""});
  DatabaseInstance db = DatabaseInstance::empty(DatabaseSchema{{t}});
  long id = 0;
  for (const auto& v : values) {
    Row r;
    if (with_pk) r.push_back(Value::integer(id++));
    r.push_back(v);
    db.rows("T").push_back(r);
  }
  return db;
}

std::vector<Value> ints(std::initializer_list<long> xs) {
  std::vector<Value> out;
  for (long x : xs) out.push_back(Value::integer(x));
  return out;
}

}  // namespace

TEST(Quantile, LinearInterpolationMatchesHandComputation) {
  const std::vector<Rational> v{1, 2, 3, 4};
  // h = 3/4 and 9/4
  EXPECT_EQ(quantile(v, Rational(1, 4)), Rational(7, 4));
  EXPECT_EQ(quantile(v, Rational(3, 4)), Rational(13, 4));
  EXPECT_EQ(quantile({Rational(5)}, Rational(1, 4)), Rational(5));
  EXPECT_EQ(quantile({0, 10}, Rational(1, 2)), Rational(5));
}

TEST(Miner, StrictAndLooseRangeBounds) {
  const auto db = one_column(ColumnType::Integer, ints({1, 2, 3, 4, 100}));
  const auto p = profile_column(db, "T", "C");
  EXPECT_EQ(*p.q1, Rational(2));
  EXPECT_EQ(*p.q3, Rational(4));
  const auto ranges = mine_range(p);
  ASSERT_EQ(ranges.size(), 3u);
  const auto& strict = std::get<RangeConstraint>(ranges[0].body);
  EXPECT_EQ(strict.variant, RangeVariant::Strict);
  EXPECT_EQ(*strict.min, Rational(1));
  EXPECT_EQ(*strict.max, Rational(100));
  const auto& loose = std::get<RangeConstraint>(ranges[1].body);
  EXPECT_EQ(loose.variant, RangeVariant::Loose);
  EXPECT_EQ(*loose.min, Rational(0));  // 2 - 3*2 = -4, clamped for a non-negative column
  EXPECT_EQ(*loose.max, Rational(10));
  const auto& semantic = std::get<RangeConstraint>(ranges[2].body);
  EXPECT_FALSE(semantic.min);
  EXPECT_FALSE(semantic.max);
}

TEST(Miner, LooseRangeKeepsNegativeFenceForSignedColumns) {
  const auto db = one_column(ColumnType::Integer, ints({-1, 2, 3, 4, 5}));
  const auto ranges = mine_range(profile_column(db, "T", "C"));
  ASSERT_EQ(ranges.size(), 3u);
  // q1 = 2, q3 = 4
  EXPECT_EQ(*std::get<RangeConstraint>(ranges[1].body).min, Rational(-4));
}

TEST(Miner, RangeNeedsTwoDistinctValuesAndAnOrderedType) {
  EXPECT_TRUE(mine_range(profile_column(one_column(ColumnType::Integer, ints({7, 7, 7})), "T", "C")).empty());
  EXPECT_TRUE(mine_range(profile_column(one_column(ColumnType::Text, {Value::text("a"), Value::text("b")}), "T", "C")).empty());
  EXPECT_EQ(mine_range(profile_column(one_column(ColumnType::Date, {Value::date(3), Value::date(9)}), "T", "C")).size(), 3u);
}

TEST(Miner, CategoricalWindow) {
  auto distinct_n = [](int n) {
    std::vector<Value> v;
    for (int i = 0; i < n; ++i) v.push_back(Value::text("v" + std::to_string(i)));
    v.push_back(Value::null());
    return profile_column(one_column(ColumnType::Text, v), "T", "C");
  };
  EXPECT_FALSE(mine_categorical(distinct_n(1)));
  EXPECT_TRUE(mine_categorical(distinct_n(2)));
  const auto c30 = mine_categorical(distinct_n(30));
  ASSERT_TRUE(c30);
  EXPECT_EQ(std::get<CategoricalConstraint>(c30->body).values.size(), 30u);
  EXPECT_FALSE(mine_categorical(distinct_n(31)));
}

TEST(Miner, NotNullOnlyWithoutNulls) {
  EXPECT_TRUE(mine_not_null(profile_column(one_column(ColumnType::Integer, ints({1, 2})), "T", "C")));
  EXPECT_FALSE(mine_not_null(profile_column(one_column(ColumnType::Integer, {Value::integer(1), Value::null()}), "T", "C")));
  EXPECT_FALSE(mine_not_null(profile_column(one_column(ColumnType::Integer, {}), "T", "C")));
  EXPECT_FALSE(mine_not_null(profile_column(one_column(ColumnType::Integer, ints({1}), true), "T", "ID")));
}

TEST(Miner, FunctionalDependenciesWithNullMatching) {
  TableSchema t{"T", {{"A", ColumnType::Integer, ""}, {"B", ColumnType::Integer, ""}}, {}, {}};
  DatabaseInstance db = DatabaseInstance::empty(DatabaseSchema{{t}});
  db.rows("T") = {{Value::integer(1), Value::integer(5)}, {Value::integer(1), Value::integer(5)}, {Value::null(), Value::integer(6)},
                  {Value::null(), Value::integer(6)}, {Value::integer(2), Value::integer(6)}};
  const auto fds = mine_fd(db, "T");
  std::set<std::string> ids;
  for (const auto& c : fds) ids.insert(c.identity());
  EXPECT_TRUE(ids.count("fd:T.A->T.B"));
  EXPECT_FALSE(ids.count("fd:T.B->T.A"));
  db.rows("T")[3][1] = Value::integer(7);
  for (const auto& c : mine_fd(db, "T")) EXPECT_NE(c.identity(), "fd:T.A->T.B");
}

TEST(Miner, OrderingDependencies) {
  TableSchema t{"T", {{"LO", ColumnType::Integer, ""}, {"HI", ColumnType::Real, ""}, {"S", ColumnType::Text, ""}}, {}, {}};
  DatabaseInstance db = DatabaseInstance::empty(DatabaseSchema{{t}});
  db.rows("T") = {{Value::integer(1), Value::real(Rational(3, 2)), Value::text("x")},
                  {Value::integer(2), Value::null(), Value::text("y")},
                  {Value::integer(2), Value::real(Rational(2)), Value::text("z")}};
  const auto od = mine_ordering(db, "T");
  ASSERT_EQ(od.size(), 1u);
  const auto& o = std::get<OrderingConstraint>(od[0].body);
  EXPECT_EQ(o.left, "LO");
  EXPECT_EQ(o.right, "HI");
  EXPECT_EQ(o.op, OrderOp::Le);
  EXPECT_TRUE(holds(od[0], db));
}

TEST(Miner, FinancialFixtureYieldsStrictA11Range) {
  const auto db = load_database_dir(std::string(SQLBOUND_TEST_DATA) + "/financial");
  const auto all = mine_all(db);
  bool found = false;
  for (const auto& c : all) {
    EXPECT_TRUE(holds(c, db)) << c.describe();
    if (const auto* r = std::get_if<RangeConstraint>(&c.body); r && r->column == "A11" && r->variant == RangeVariant::Strict) {
      EXPECT_EQ(*r->min, Rational(8110));
      EXPECT_EQ(*r->max, Rational(12541));
      found = true;
    }
    if (c.identity() == "categorical:DISTRICT.A11") ADD_FAILURE() << "A11 has more than 30 distinct values";
  }
  EXPECT_TRUE(found);
}

TEST(Constraints, JsonRoundTrip) {
  const auto db = load_database_dir(std::string(SQLBOUND_TEST_DATA) + "/student_club");
  auto all = mine_all(db);
  all[0].status = Status::Accepted;
  all[1].provenance = Provenance::LlmRepaired;
  EXPECT_EQ(constraints_from_json(constraints_to_json(all), db.schema), all);
  EXPECT_THROW(constraints_from_json("[{\"kind\": \"bogus\"}]", db.schema), std::runtime_error);
}

TEST(Constraints, HoldsOnRowSemantics) {
  const TableSchema t{"T", {{"C", ColumnType::Integer, ""}}, {}, {}};
  const RangeConstraint r{"T", "C", Rational(0), Rational(10), RangeVariant::Strict};
  EXPECT_TRUE(holds_on_row(r, t, {Value::null()}));
  EXPECT_TRUE(holds_on_row(r, t, {Value::integer(10)}));
  EXPECT_FALSE(holds_on_row(r, t, {Value::integer(11)}));
  EXPECT_FALSE(holds_on_row(NotNullConstraint{"T", "C"}, t, {Value::null()}));
  const CategoricalConstraint cat{"T", "C", {Value::integer(1), Value::integer(2)}};
  EXPECT_TRUE(holds_on_row(cat, t, {Value::null()}));
  EXPECT_FALSE(holds_on_row(cat, t, {Value::integer(3)}));
}

TEST(Constraints, IdentitiesAreStable) {
  MinedConstraint c;
  c.body = RangeConstraint{"DISTRICT", "A11", Rational(1), Rational(2), RangeVariant::Loose};
  EXPECT_EQ(c.identity(), "range:DISTRICT.A11");
  c.body = FdConstraint{"T", "A", "B"};
  EXPECT_EQ(c.identity(), "fd:T.A->T.B");
  c.body = OrderingConstraint{"T", "A", "B", OrderOp::Le};
  EXPECT_EQ(c.identity(), "ordering:T.A<=T.B");
}
