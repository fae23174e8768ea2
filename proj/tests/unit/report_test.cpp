#include "sqlbound/report.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

using namespace sqlbound;

namespace {

EntryResult entry(const std::string& method, const std::string& qid, bool ex, std::optional<VerifyStatus> s = std::nullopt,
                  double secs = 0) {
  EntryResult e;
  e.method = method;
  e.question_id = qid;
  e.db_id = "db";
  e.ex_correct = ex;
  if (s)
    for (ConfigKind c : kAllConfigs) e.verification[c] = VerificationRecord{*s, "", secs, "", false};
  return e;
}

}  // namespace

TEST(Report, AccuracyAndFormatting) {
  EXPECT_DOUBLE_EQ(accuracy(3, 4), 75.0);
  EXPECT_DOUBLE_EQ(accuracy(0, 0), 0.0);
  EXPECT_EQ(format_fixed(75.0), "75.00");
  EXPECT_EQ(format_fixed(2.0 / 3.0), "0.67");
  EXPECT_EQ(format_fixed(1.5, 1), "1.5");
  EXPECT_DOUBLE_EQ(mean({1, 2, 3, 6}), 3.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_DOUBLE_EQ(median({5, 1, 3}), 3.0);
}

TEST(Report, DenseRanksShareTies) {
  EXPECT_EQ(dense_ranks({60.56, 58.0, 60.56, 70.1}), (std::vector<int>{2, 3, 2, 1}));
  EXPECT_EQ(dense_ranks({}), std::vector<int>{});
}

TEST(Report, CounterexampleDowngradesExCorrectEntries) {
  std::vector<EntryResult> es{entry("m", "1", true, VerifyStatus::EquivalentUpToBound), entry("m", "2", true, VerifyStatus::EquivalentUpToBound),
                              entry("m", "3", true, VerifyStatus::Counterexample, 1.0), entry("m", "4", false)};
  es[2].verification[ConfigKind::Vanilla].status = VerifyStatus::EquivalentUpToBound;
  const auto s = summarize("m", es, {kAllConfigs.begin(), kAllConfigs.end()});
  EXPECT_EQ(s.total, 4u);
  EXPECT_EQ(s.ex_correct, 3u);
  EXPECT_EQ(s.metrics.at(ConfigKind::Vanilla).correct, 3u);
  EXPECT_EQ(s.metrics.at(ConfigKind::RuleBased).correct, 2u);
  EXPECT_EQ(s.metrics.at(ConfigKind::RuleBased).counterexamples, 1u);
  const auto r = build_report(es, {kAllConfigs.begin(), kAllConfigs.end()}, 5, "set");
  const std::string md = render_markdown(r);
  EXPECT_NE(md.find("75.00"), std::string::npos);
  EXPECT_NE(md.find("50.00"), std::string::npos);
}

TEST(Report, AccountingOptions) {
  const auto e = entry("m", "1", true, VerifyStatus::Timeout);
  EXPECT_TRUE(judged_correct(e, ConfigKind::Llm));
  Accounting strict{false, false, false};
  EXPECT_FALSE(judged_correct(e, ConfigKind::Llm, strict));
  EXPECT_FALSE(judged_correct(entry("m", "2", false), ConfigKind::Llm));
}

TEST(Report, RuntimeRowsUseCounterexampleTimes) {
  std::vector<EntryResult> es{entry("m", "1", true, VerifyStatus::Counterexample, 2.0), entry("m", "2", true, VerifyStatus::Counterexample, 4.0),
                              entry("m", "3", true, VerifyStatus::EquivalentUpToBound, 100.0)};
  es[0].verification[ConfigKind::Llm].seconds = 5.0;
  const auto row = runtime_row(summarize("m", es, {kAllConfigs.begin(), kAllConfigs.end()}));
  EXPECT_DOUBLE_EQ(*row.cells.at(ConfigKind::Vanilla).mean, 3.0);
  EXPECT_DOUBLE_EQ(*row.cells.at(ConfigKind::Llm).mean, 4.5);
  EXPECT_DOUBLE_EQ(*row.cells.at(ConfigKind::Llm).delta_mean, 1.5);
}

TEST(Report, JsonIsDeterministicAndTimingFree) {
  std::vector<EntryResult> es{entry("b", "1", true, VerifyStatus::EquivalentUpToBound, 1.0), entry("a", "1", true, VerifyStatus::Counterexample, 2.0)};
  const auto r1 = build_report(es, {kAllConfigs.begin(), kAllConfigs.end()}, 5, "set");
  es[0].verification[ConfigKind::Vanilla].seconds = 9.0;
  const auto r2 = build_report(es, {kAllConfigs.begin(), kAllConfigs.end()}, 5, "set");
  EXPECT_EQ(render_json(r1), render_json(r2));
  const auto j = nlohmann::json::parse(render_json(r1));
  EXPECT_TRUE(j.is_object());
}
