#pragma once

#include "sqlbound/ast.hpp"
#include "sqlbound/instance.hpp"
#include "sqlbound/parser.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sqlbound {

struct ResultRelation {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  bool ordered = false;  // top-level ORDER BY present
  /// Some LIMIT (at any nesting level) cut through a run of rows with equal
  /// sort keys, so the kept rows depend on input order.
  bool limit_tie = false;
};

enum class CompareMode { Bag, Set, Ordered };

std::string_view to_string(CompareMode mode);
std::optional<CompareMode> compare_mode_from_string(std::string_view name);

class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bag semantics with three-valued logic. Division by zero yields NULL.
ResultRelation execute(const Query& query, const DatabaseInstance& db);

/// NULL equals NULL; Integer and Real compare numerically.
bool results_equal(const ResultRelation& a, const ResultRelation& b, CompareMode mode);

struct ExOutcome {
  bool equal = false;
  std::optional<std::string> error;
};

/// Test-based execution accuracy on a single instance.
ExOutcome ex_metric(const ParseResult& gold, const ParseResult& pred, const DatabaseInstance& db,
                    CompareMode mode = CompareMode::Set);

/// Tabular text for console output.
std::string format_result(const ResultRelation& r);

}  // namespace sqlbound
