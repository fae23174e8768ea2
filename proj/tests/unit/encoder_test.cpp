#include "sqlbound/counterexample.hpp"
#include "sqlbound/encoder.hpp"
#include "sqlbound/executor.hpp"
#include "sqlbound/parser.hpp"

#include "support/random_sql.hpp"

#include <gtest/gtest.h>

using namespace sqlbound;

namespace {

DatabaseSchema micro() {
  TableSchema t{"R", {{"ID", ColumnType::Integer, ""}, {"V", ColumnType::Integer, ""}}, {"ID"}, {}};
  return DatabaseSchema{{t}};
}

Query parse(const std::string& sql, const DatabaseSchema& s) {
  const auto r = parse_query(sql, s);
  if (!is_query(r)) throw std::runtime_error(describe(r));
  return std::get<Query>(r);
}

}  // namespace

TEST(Encoder, MicroProblemShape) {
  const auto s = micro();
  EncoderConfig cfg;
  cfg.bound = 1;
  const auto p = encode_pair(parse("SELECT V FROM R WHERE ID = 1", s), parse("SELECT V FROM R", s), s, {}, cfg);
  ASSERT_EQ(p.tables.size(), 1u);
  EXPECT_EQ(p.tables[0].rows.size(), 1u);
  EXPECT_EQ(p.bound, 1);
  EXPECT_FALSE(p.nonlinear);
  EXPECT_EQ(p.logic(), "QF_LIRA");
  EXPECT_FALSE(p.section(Section::NonEquivalence).empty());
  const std::string smt = p.to_smtlib();
  EXPECT_NE(smt.find("(check-sat)"), std::string::npos);
  EXPECT_NE(smt.find("; q1"), std::string::npos);
  EXPECT_EQ(p.out1.columns, std::vector<std::string>{"V"});
}

TEST(Encoder, UnsupportedConstructs) {
  const auto s = micro();
  EncoderConfig ordered;
  ordered.mode = CompareMode::Ordered;
  EXPECT_THROW(encode_pair(parse("SELECT V FROM R", s), parse("SELECT V FROM R", s), s, {}, ordered), EncodingUnsupported);
  EXPECT_THROW(encode_pair(parse("SELECT V FROM R LIMIT 1", s), parse("SELECT V FROM R", s), s, {}), EncodingUnsupported);
}

TEST(Encoder, TextDictionaryKeepsNumeralsAndAvoidsCollisions) {
  TextDictionary d;
  EXPECT_EQ(d.code("-3"), BigInt(-3));
  const BigInt a = d.code("apple");
  EXPECT_EQ(a, BigInt(TextDictionary::kDenseBase));
  EXPECT_EQ(d.code("apple"), a);
  EXPECT_NE(d.code("pear"), a);
  EXPECT_EQ(d.decode(a), "apple");
  EXPECT_EQ(d.decode(BigInt(7)), "7");
}

// Evaluating the encoding under a concrete instance reproduces the executor.
TEST(Encoder, SymbolicResultsMatchExecutionOnConcreteInstances) {
  int checked = 0;
  for (unsigned seed = 0; checked < 150 && seed < 2000; ++seed) {
    std::mt19937 rng(seed);
    const auto schema = sqlbound::testing::random_schema(rng);
    const auto pair = sqlbound::testing::random_pair(schema, rng);
    const auto r1 = parse_query(pair.q1, schema), r2 = parse_query(pair.q2, schema);
    if (!is_query(r1) || !is_query(r2)) continue;
    const auto db = sqlbound::testing::random_instance(schema, rng, 3, 4, 0.2);
    if (check_integrity(db)) continue;
    EncoderConfig cfg;
    cfg.bound = 3;
    cfg.mode = seed % 2 ? CompareMode::Bag : CompareMode::Set;
    EncodedProblem p;
    try {
      p = encode_pair(std::get<Query>(r1), std::get<Query>(r2), schema, {}, cfg);
    } catch (const EncodingUnsupported&) {
      continue;
    }
    auto a = assignment_for(p, db);
    extend_assignment(p, a);
    const auto e1 = execute(std::get<Query>(r1), db), e2 = execute(std::get<Query>(r2), db);
    if (e1.limit_tie || e2.limit_tie) continue;
    EXPECT_TRUE(results_equal(decode_relation(p, p.out1, a), e1, cfg.mode)) << pair.q1 << "\n" << render_script(db);
    EXPECT_TRUE(results_equal(decode_relation(p, p.out2, a), e2, cfg.mode)) << pair.q2;
    bool holds = true;
    for (Section sec : {Section::Integrity, Section::Query1, Section::Query2})
      for (const auto& t : p.section(sec)) holds = holds && smt::evaluate_bool(t, a);
    EXPECT_TRUE(holds) << "definitions inconsistent for " << pair.q1;
    const bool differ = !results_equal(e1, e2, cfg.mode);
    bool neq = true;
    for (const auto& t : p.section(Section::NonEquivalence)) neq = neq && smt::evaluate_bool(t, a);
    EXPECT_EQ(neq, differ) << pair.q1 << " | " << pair.q2;
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(Encoder, ConstraintSectionMatchesConstraintSemantics) {
  const auto s = micro();
  MinedConstraint range;
  range.body = RangeConstraint{"R", "V", Rational(0), Rational(10), RangeVariant::Strict};
  range.status = Status::Accepted;
  MinedConstraint nn;
  nn.body = NotNullConstraint{"R", "V"};
  nn.status = Status::Accepted;
  EncoderConfig cfg;
  cfg.bound = 2;
  auto p = encode_pair(parse("SELECT V FROM R", s), parse("SELECT V FROM R", s), s, {range, nn}, cfg);
  for (const auto& rows : std::vector<std::vector<Row>>{{{Value::integer(1), Value::integer(5)}},
                                                        {{Value::integer(1), Value::integer(11)}},
                                                        {{Value::integer(1), Value::null()}},
                                                        {{Value::integer(1), Value::integer(0)}, {Value::integer(2), Value::integer(10)}}}) {
    DatabaseInstance db = DatabaseInstance::empty(s);
    db.rows("R") = rows;
    auto a = assignment_for(p, db);
    extend_assignment(p, a);
    bool enc = true;
    for (const auto& t : p.section(Section::Constraints)) enc = enc && smt::evaluate_bool(t, a);
    EXPECT_EQ(enc, holds(range, db) && holds(nn, db)) << render_script(db);
  }
}
