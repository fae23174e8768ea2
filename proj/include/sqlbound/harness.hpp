#pragma once

#include "sqlbound/miner.hpp"
#include "sqlbound/report.hpp"
#include "sqlbound/validator.hpp"
#include "sqlbound/verify.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace sqlbound {

struct BenchmarkEntry {
  std::string question_id;
  std::string db_id;
  std::string question;
  std::string gold_sql;
  std::string predicted_sql;
  std::string error;  // malformed line; the entry is kept and reported
};

/// One JSON object per line with question_id, db_id, question, gold_sql and
/// predicted_sql (SQL, or the BIRD-style "SQL\t----- bird -----\tdb" form).
std::vector<BenchmarkEntry> parse_benchmark(std::string_view jsonl);
std::vector<BenchmarkEntry> load_benchmark(const std::string& path);

/// Databases under `<data_dir>/<db_id>/`, loaded on first use.
class Catalog {
 public:
  explicit Catalog(std::string data_dir = {});
  /// Throws InstanceError / SchemaError when the database cannot be loaded.
  std::shared_ptr<const DatabaseInstance> get(const std::string& db_id);
  void add(const std::string& db_id, DatabaseInstance db);

 private:
  std::string dir_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const DatabaseInstance>> dbs_;
};

struct ConstraintOptions {
  MiningConfig mining;
  ValidatorBackend* validator = nullptr;  // required for Llm
  int validator_in_flight = 4;
  DecisionCache* decision_cache = nullptr;
  std::string cache_dir;  // constraints/<db>.<config>.json; empty disables
};

class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vanilla: empty. RuleBased: every candidate accepted at strict bounds.
/// Llm: candidates validated by the backend.
ConstraintSet mine_and_validate(const DatabaseInstance& db, ConfigKind config, const ConstraintOptions& options,
                                std::vector<std::string>& warnings);

/// Per-(db, configuration) constraint sets, computed once and cached on disk.
class ConstraintStore {
 public:
  ConstraintStore(Catalog& catalog, ConstraintOptions options);
  const ConstraintSet& get(const std::string& db_id, ConfigKind config);
  std::vector<std::string> take_warnings();

 private:
  Catalog& catalog_;
  ConstraintOptions options_;
  std::mutex mutex_;
  std::map<std::pair<std::string, ConfigKind>, ConstraintSet> sets_;
  std::vector<std::string> warnings_;
};

struct HarnessOptions {
  std::vector<ConfigKind> configs{kAllConfigs.begin(), kAllConfigs.end()};
  VerifyOptions verify;
  int workers = 0;  // 0: hardware concurrency
  Accounting accounting;
};

/// EX on the catalog instance, then verification of EX-correct entries
/// under every requested configuration.
EntryResult evaluate_entry(const BenchmarkEntry& entry, const std::string& method, Catalog& catalog, ConstraintStore& store,
                           const HarnessOptions& options);

struct MethodInput {
  std::string method;
  std::vector<BenchmarkEntry> entries;
};

/// EX for all entries, then (entry x configuration) verification jobs on a
/// worker pool. Entry failures are recorded, never thrown.
Report run_suite(const std::vector<MethodInput>& inputs, Catalog& catalog, ConstraintStore& store, const HarnessOptions& options);

/// report.md, report.json, runtime.json, outcomes.jsonl and
/// counterexamples/<question_id>.sql under `dir`.
void write_report(const Report& report, const std::string& dir);

}  // namespace sqlbound
