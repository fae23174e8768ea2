#pragma once

#include "sqlbound/constraints.hpp"
#include "sqlbound/miner.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace sqlbound {

enum class Verdict { Accept, Reject, Repair };

std::string_view to_string(Verdict v);

struct ValidationDecision {
  Verdict verdict = Verdict::Accept;
  /// Repair only; an absent bound is open-ended.
  std::optional<Rational> min;
  std::optional<Rational> max;
  /// Accept on a range: which mined variant to keep (strict when absent).
  std::optional<RangeVariant> variant;
  std::string rationale;
  std::string raw;  // response text as received

  friend bool operator==(const ValidationDecision&, const ValidationDecision&) = default;
};

struct ValidationRequest {
  MinedConstraint constraint;  // the strict variant for ranges
  std::vector<MinedConstraint> variants;  // all range variants (empty otherwise)
  std::vector<ColumnProfile> profiles;    // one per column named by the constraint
};

std::string build_prompt(const ValidationRequest& request);

class DecisionParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses `{"verdict": ..., "bounds": {"min", "max"}, "rationale"}`. Bounds
/// may be numbers, numeric strings or (for date columns) ISO dates.
ValidationDecision parse_decision(std::string_view json_text, ColumnType bound_type = ColumnType::Real);
std::string decision_to_json(const ValidationDecision& d);

class ValidatorBackend {
 public:
  virtual ~ValidatorBackend() = default;
  /// nullopt when no usable decision could be obtained.
  virtual std::optional<ValidationDecision> decide(const ValidationRequest& request, std::vector<std::string>& warnings) = 0;
};

/// Decisions keyed by constraint identity, read from a JSON object file.
class FixtureBackend : public ValidatorBackend {
 public:
  static FixtureBackend from_file(const std::string& path);
  static FixtureBackend from_json(std::string_view text);

  std::optional<ValidationDecision> decide(const ValidationRequest& request, std::vector<std::string>& warnings) override;

 private:
  std::map<std::string, std::string> entries_;  // identity -> decision JSON
};

struct RemoteConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_secs = 60;
  int retries = 3;
  int retry_delay_ms = 500;
  std::string audit_path;  // JSON lines; empty disables the log
};

/// Chat-completions client with JSON response mode.
class RemoteBackend : public ValidatorBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  std::optional<ValidationDecision> decide(const ValidationRequest& request, std::vector<std::string>& warnings) override;

 private:
  std::optional<std::string> post(const std::string& body, std::vector<std::string>& warnings, const std::string& identity);
  void audit(const std::string& identity, const std::string& request, const std::string& response, const std::string& status);

  RemoteConfig config_;
  std::mutex audit_mutex_;
};

/// Thread-safe decision cache keyed by identity, optionally file-backed.
class DecisionCache {
 public:
  std::optional<ValidationDecision> get(const std::string& identity) const;
  void put(const std::string& identity, const ValidationDecision& decision);
  void load(const std::string& path);
  void save(const std::string& path) const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ValidationDecision> entries_;
};

struct ValidationOptions {
  MiningConfig mining;
  int in_flight = 1;
  DecisionCache* cache = nullptr;
};

/// Every candidate ends accepted or rejected; range variants of a column
/// collapse to at most one accepted constraint.
ConstraintSet validate_set(const ConstraintSet& candidates, const DatabaseInstance& db, ValidatorBackend& backend,
                           const ValidationOptions& options, std::vector<std::string>& warnings);

/// Rule-based configuration: everything accepted, ranges at strict bounds.
ConstraintSet accept_all_strict(const ConstraintSet& candidates);

}  // namespace sqlbound
