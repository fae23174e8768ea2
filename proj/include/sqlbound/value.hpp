#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sqlbound {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class ColumnType { Integer, Real, Text, Date };

std::string_view to_string(ColumnType type);
std::optional<ColumnType> column_type_from_string(std::string_view name);

inline bool is_numeric(ColumnType t) { return t == ColumnType::Integer || t == ColumnType::Real; }
/// Types that carry an order usable for ranges and orderings (dates count as day numbers).
inline bool is_ordered(ColumnType t) { return t != ColumnType::Text; }

// Dates are day counts with day 0 = 0001-01-01 (proleptic Gregorian).
constexpr std::int64_t kMaxDateDays = 3652058;  // 9999-12-31
std::optional<std::int64_t> parse_iso_date(std::string_view text);
std::string format_iso_date(std::int64_t days);

/// Exact decimal rendering when the denominator has only factors 2 and 5,
/// otherwise "p/q".
std::string format_rational(const Rational& r);
/// Parses "12", "-3.25", "1/3", "2.0".
std::optional<Rational> parse_rational(std::string_view text);

/// A single SQL cell. Integer, Real and Date share an exact rational payload.
class Value {
 public:
  enum class Kind { Null, Integer, Real, Text, Date };

  Value() = default;
  static Value null() { return Value(); }
  static Value integer(BigInt v);
  static Value real(Rational v);
  static Value text(std::string v);
  static Value date(std::int64_t days);
  /// Builds a value of `type` from a rational payload (Text is rejected).
  static Value of_type(ColumnType type, const Rational& number);

  Kind kind() const { return kind_; }
  bool is_null() const { return kind_ == Kind::Null; }
  bool is_number() const { return kind_ == Kind::Integer || kind_ == Kind::Real; }
  const Rational& number() const;
  const std::string& str() const;
  std::int64_t days() const;

  /// SQL literal form: NULL, 12, 2.5, 'it''s', '2020-01-31'.
  std::string to_sql() const;
  /// Human-readable form used in reports and CSV output.
  std::string to_display() const;

  /// Structural equality (kind and payload), used for AST comparison.
  friend bool operator==(const Value& a, const Value& b);

 private:
  Kind kind_ = Kind::Null;
  Rational number_;
  std::string text_;
};

/// Equality used for grouping, DISTINCT and result comparison: NULL equals
/// NULL, Integer and Real compare numerically, other kinds never mix.
bool same_value(const Value& a, const Value& b);

/// Total order: NULL < numbers < dates < text. Numbers compare numerically.
std::strong_ordering total_order(const Value& a, const Value& b);

/// Parses a CSV/script cell for a column of the given type. Empty text is
/// not special here; callers decide what NULL looks like.
Value parse_cell(ColumnType type, std::string_view text);

class ValueError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sqlbound
