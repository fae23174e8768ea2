#pragma once

#include "sqlbound/ast.hpp"
#include "sqlbound/constraints.hpp"
#include "sqlbound/executor.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sqlbound {

struct OracleConfig {
  int bound = 2;
  /// Candidate non-NULL cell values per column type. NULL is added for
  /// every non-key column.
  std::map<ColumnType, std::vector<Value>> domain;
  std::uint64_t cap = 2'000'000;  // maximum number of instances enumerated
  CompareMode mode = CompareMode::Bag;
};

struct OracleResult {
  bool equivalent = true;
  std::optional<DatabaseInstance> counterexample;
  std::uint64_t instances_checked = 0;
  std::uint64_t tie_skipped = 0;  // instances where a LIMIT boundary was tied
};

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive bounded equivalence: every instance with at most `bound`
/// rows per table, cells from the domain, satisfying integrity and the
/// accepted constraints of `constraints`. Instances on which either query
/// cuts a LIMIT through tied sort keys are skipped, since their result
/// depends on row order.
OracleResult oracle_equivalent(const Query& q1, const Query& q2, const DatabaseSchema& schema,
                               const ConstraintSet& constraints, const OracleConfig& config);

/// Number of instances the oracle would enumerate before FK filtering.
std::uint64_t oracle_instance_count(const DatabaseSchema& schema, const ConstraintSet& constraints,
                                    const OracleConfig& config);

}  // namespace sqlbound
