#pragma once

#include "sqlbound/value.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sqlbound {

/// A column reference resolved against the FROM list of its own query block.
struct ColumnRef {
  std::size_t source = 0;  // index into Query::from
  std::size_t column = 0;  // index into that source's columns
  std::string source_name;
  std::string column_name;
  ColumnType type = ColumnType::Integer;

  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

enum class ExprKind { Column, Literal, Arith, CastReal, Aggregate };
enum class ArithOp { Add, Sub, Mul, Div };
enum class AggFunc { CountStar, Count, Sum, Avg, Min, Max };

struct Expr {
  ExprKind kind = ExprKind::Literal;
  ColumnType type = ColumnType::Integer;
  ColumnRef column;            // kind == Column
  Value literal;               // kind == Literal
  ArithOp op = ArithOp::Add;   // kind == Arith
  AggFunc agg = AggFunc::CountStar;  // kind == Aggregate
  std::vector<Expr> args;      // Arith: 2, CastReal: 1, Aggregate: 0 or 1

  static Expr column_ref(ColumnRef ref);
  static Expr constant(Value v, ColumnType type);
  bool contains_aggregate() const;

  friend bool operator==(const Expr&, const Expr&) = default;
};

enum class PredKind { Compare, Between, InList, IsNull, And, Or, Not };
enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Pred {
  PredKind kind = PredKind::Compare;
  CmpOp op = CmpOp::Eq;
  bool negated = false;        // NOT BETWEEN, NOT IN, IS NOT NULL
  std::vector<Expr> operands;  // Compare: lhs, rhs; Between: x, lo, hi; InList: x, items...; IsNull: x
  std::vector<Pred> children;  // And/Or: two or more; Not: one

  friend bool operator==(const Pred&, const Pred&) = default;
};

struct SelectItem {
  Expr expr;
  std::string alias;  // explicit alias (upper case) or empty

  friend bool operator==(const SelectItem&, const SelectItem&) = default;
};

struct OrderItem {
  Expr expr;
  bool descending = false;

  friend bool operator==(const OrderItem&, const OrderItem&) = default;
};

struct Query;

struct FromItem {
  std::string table;  // base table name; empty for a derived table
  std::string alias;  // name used to qualify columns (table name when no alias)
  std::shared_ptr<const Query> derived;
  std::vector<std::string> column_names;
  std::vector<ColumnType> column_types;

  bool is_derived() const { return derived != nullptr; }
  friend bool operator==(const FromItem& a, const FromItem& b);
};

/// One fully resolved SELECT block of the supported fragment.
struct Query {
  bool distinct = false;
  std::vector<SelectItem> select;
  std::vector<FromItem> from;
  /// Parallel to `from`; entry i is the ON condition joining from[i]
  /// (always empty for i == 0 and for comma/CROSS joins).
  std::vector<std::optional<Pred>> join_conditions;
  std::optional<Pred> where;
  std::vector<Expr> group_by;
  std::vector<OrderItem> order_by;
  std::optional<std::int64_t> limit;
  bool aggregated = false;              // GROUP BY present or aggregates used
  bool nondeterministic_limit = false;  // LIMIT without ORDER BY

  std::vector<std::string> output_names() const;
  std::vector<ColumnType> output_types() const;
  std::size_t arity() const { return select.size(); }

  friend bool operator==(const Query&, const Query&) = default;
};

inline bool operator==(const FromItem& a, const FromItem& b) {
  if (a.table != b.table || a.alias != b.alias || a.column_names != b.column_names || a.column_types != b.column_types)
    return false;
  if (a.is_derived() != b.is_derived()) return false;
  return !a.is_derived() || *a.derived == *b.derived;
}

std::string_view to_string(AggFunc f);
std::string_view to_string(CmpOp op);

}  // namespace sqlbound
