#pragma once

#include "sqlbound/ast.hpp"
#include "sqlbound/schema.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace sqlbound {

/// Syntactically valid SQL that falls outside the supported fragment.
struct UnsupportedReport {
  std::string construct;  // e.g. "window function", "HAVING"
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;
  std::string reason;

  std::string to_string() const;
};

struct SqlError {
  enum class Kind { Syntax, Resolution, Type };
  Kind kind = Kind::Syntax;
  std::string message;
  std::size_t position = 0;

  std::string to_string() const;
};

using ParseResult = std::variant<Query, UnsupportedReport, SqlError>;

/// Parses one SELECT statement and resolves it against `schema`.
/// Never throws for malformed input; every input maps to exactly one
/// alternative of ParseResult.
ParseResult parse_query(std::string_view sql, const DatabaseSchema& schema);

inline bool is_query(const ParseResult& r) { return std::holds_alternative<Query>(r); }
std::string describe(const ParseResult& r);

/// Fragment SQL text for a resolved query; parsing it again yields an
/// identical Query.
std::string render_query(const Query& query);
std::string render_expr(const Expr& expr);
std::string render_pred(const Pred& pred);

}  // namespace sqlbound
