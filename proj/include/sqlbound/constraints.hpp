#pragma once

#include "sqlbound/instance.hpp"
#include "sqlbound/value.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sqlbound {

enum class RangeVariant { Strict, Loose, Semantic };

/// v_min <= c <= v_max on non-NULL cells; an absent bound is open-ended.
/// Date bounds are day counts.
struct RangeConstraint {
  std::string table;
  std::string column;
  std::optional<Rational> min;
  std::optional<Rational> max;
  RangeVariant variant = RangeVariant::Strict;

  friend bool operator==(const RangeConstraint&, const RangeConstraint&) = default;
};

/// Non-NULL cells take one of `values`.
struct CategoricalConstraint {
  std::string table;
  std::string column;
  std::vector<Value> values;

  friend bool operator==(const CategoricalConstraint&, const CategoricalConstraint&) = default;
};

struct NotNullConstraint {
  std::string table;
  std::string column;

  friend bool operator==(const NotNullConstraint&, const NotNullConstraint&) = default;
};

/// Equal determinant values (NULL matching NULL) force equal dependent values.
struct FdConstraint {
  std::string table;
  std::string determinant;
  std::string dependent;

  friend bool operator==(const FdConstraint&, const FdConstraint&) = default;
};

enum class OrderOp { Le, Ge };

/// left op right on every row where both cells are non-NULL.
struct OrderingConstraint {
  std::string table;
  std::string left;
  std::string right;
  OrderOp op = OrderOp::Le;

  friend bool operator==(const OrderingConstraint&, const OrderingConstraint&) = default;
};

using ConstraintBody =
    std::variant<RangeConstraint, CategoricalConstraint, NotNullConstraint, FdConstraint, OrderingConstraint>;

enum class Provenance { Mined, LlmRepaired };
enum class Status { Candidate, Accepted, Rejected };

struct MinedConstraint {
  ConstraintBody body;
  Provenance provenance = Provenance::Mined;
  Status status = Status::Candidate;
  bool undecided = false;  // validator fell back to its default

  /// "range:T.C", "categorical:T.C", "not_null:T.C", "fd:T.A->T.B",
  /// "ordering:T.A<=T.B". Range variants share one identity.
  std::string identity() const;
  std::string kind() const;
  const std::string& table() const;
  /// First column named by the constraint (sort key).
  const std::string& column() const;
  std::vector<std::string> columns() const;
  /// Plain-language rendering used in prompts and reports.
  std::string describe() const;

  friend bool operator==(const MinedConstraint&, const MinedConstraint&) = default;
};

using ConstraintSet = std::vector<MinedConstraint>;

std::string_view to_string(RangeVariant v);
std::string_view to_string(Provenance p);
std::string_view to_string(Status s);

/// Concrete check of the constraint formula against every row of `db`.
bool holds(const MinedConstraint& c, const DatabaseInstance& db);
/// Single-row constraints (Range, Categorical, NotNull, Ordering) on one row.
bool holds_on_row(const ConstraintBody& c, const TableSchema& table, const Row& row);

ConstraintSet accepted_only(const ConstraintSet& set);

/// Stable order by (table, column, kind, identity, variant).
void sort_constraints(ConstraintSet& set);

std::string constraints_to_json(const ConstraintSet& set);
/// Values are typed using `schema`. Throws std::runtime_error on bad input.
ConstraintSet constraints_from_json(std::string_view text, const DatabaseSchema& schema);

/// Checks that every column named by a constraint exists; returns the first problem.
std::optional<std::string> check_constraint_columns(const ConstraintSet& set, const DatabaseSchema& schema);

}  // namespace sqlbound
