#pragma once

#include "sqlbound/verify.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sqlbound {

enum class ConfigKind { Vanilla, RuleBased, Llm };

constexpr std::array<ConfigKind, 3> kAllConfigs{ConfigKind::Vanilla, ConfigKind::RuleBased, ConfigKind::Llm};

/// "vanilla", "rule", "llm".
std::string_view to_string(ConfigKind c);
/// "Vanilla", "RuleBased", "LLM".
std::string_view display_name(ConfigKind c);
/// Accepts the short names and the display names, case-insensitively.
std::optional<ConfigKind> config_from_string(std::string_view s);

struct VerificationRecord {
  VerifyStatus status = VerifyStatus::Error;
  std::string detail;
  double seconds = 0;
  std::string counterexample;  // script, Counterexample only
  bool tie_limited = false;
};

struct EntryResult {
  std::string method;
  std::string question_id;
  std::string db_id;
  bool ex_correct = false;
  std::string ex_detail;  // why EX is false (pred error, outside fragment, ...)
  std::string error;      // entry-level failure (unknown db, bad gold SQL, ...)
  std::map<ConfigKind, VerificationRecord> verification;  // EX-true entries only
};

/// How unrefuted-but-unproven verdicts are scored.
struct Accounting {
  bool timeout_correct = true;
  bool unsupported_correct = true;
  bool error_correct = true;
};

bool judged_correct(const EntryResult& e, ConfigKind c, const Accounting& acct = {});

struct MetricCounts {
  std::size_t correct = 0;
  std::size_t verified = 0;  // verification attempted (EX-true)
  std::size_t equivalent = 0;
  std::size_t counterexamples = 0;
  std::size_t timeouts = 0;
  std::size_t unsupported = 0;
  std::size_t errors = 0;
  std::vector<double> counterexample_seconds;
};

struct MethodSummary {
  std::string method;
  std::size_t total = 0;
  std::size_t ex_correct = 0;
  std::map<ConfigKind, MetricCounts> metrics;
};

MethodSummary summarize(const std::string& method, const std::vector<EntryResult>& entries, const std::vector<ConfigKind>& configs,
                        const Accounting& acct = {});

/// Percentage in [0, 100]; 0 for an empty suite.
double accuracy(std::size_t correct, std::size_t total);
/// Fixed-point rendering, rounding half away from zero.
std::string format_fixed(double v, int decimals = 2);
/// Rank 1 for the largest value; equal values share a rank and the next
/// distinct value takes the following rank.
std::vector<int> dense_ranks(const std::vector<double>& values);
double mean(const std::vector<double>& v);
double median(std::vector<double> v);

struct RuntimeCell {
  std::optional<double> mean;
  std::optional<double> median;
  std::optional<double> delta_mean;  // mean minus the Vanilla mean
};

struct RuntimeRow {
  std::string method;
  std::map<ConfigKind, RuntimeCell> cells;
};

RuntimeRow runtime_row(const MethodSummary& s);
/// Column-wise average of the rows (present values only).
RuntimeRow runtime_mean_row(const std::vector<RuntimeRow>& rows);

struct Report {
  std::vector<ConfigKind> configs;
  int bound = 5;
  std::string comparison;
  Accounting accounting;
  std::vector<MethodSummary> methods;
  std::vector<EntryResult> entries;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

Report build_report(const std::vector<EntryResult>& entries, const std::vector<ConfigKind>& configs, int bound,
                    const std::string& comparison, const Accounting& acct = {});

/// Accuracy tables with ranks, coverage, runtime and an error appendix.
std::string render_markdown(const Report& r);
/// Accuracy and per-entry verdicts; contains no timings, so reruns are byte-identical.
std::string render_json(const Report& r);
std::string render_runtime_json(const Report& r);
/// One JSON object per entry, no timings.
std::string render_outcomes_jsonl(const Report& r);

}  // namespace sqlbound
