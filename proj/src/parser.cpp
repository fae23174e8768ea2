#include "sqlbound/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace sqlbound {

std::string_view to_string(AggFunc f) {
  switch (f) {
    case AggFunc::CountStar:
    case AggFunc::Count: return "COUNT";
    case AggFunc::Sum: return "SUM";
    case AggFunc::Avg: return "AVG";
    case AggFunc::Min: return "MIN";
    case AggFunc::Max: return "MAX";
  }
  return "?";
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "<>";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

Expr Expr::column_ref(ColumnRef ref) {
  Expr e;
  e.kind = ExprKind::Column;
  e.type = ref.type;
  e.column = std::move(ref);
  return e;
}

Expr Expr::constant(Value v, ColumnType type) {
  Expr e;
  e.kind = ExprKind::Literal;
  e.type = type;
  e.literal = std::move(v);
  return e;
}

bool Expr::contains_aggregate() const {
  if (kind == ExprKind::Aggregate) return true;
  return std::any_of(args.begin(), args.end(), [](const Expr& a) { return a.contains_aggregate(); });
}

std::vector<std::string> Query::output_names() const {
  std::vector<std::string> names;
  names.reserve(select.size());
  for (const auto& item : select) {
    if (!item.alias.empty())
      names.push_back(item.alias);
    else if (item.expr.kind == ExprKind::Column)
      names.push_back(item.expr.column.column_name);
    else
      names.push_back(render_expr(item.expr));
  }
  return names;
}

std::vector<ColumnType> Query::output_types() const {
  std::vector<ColumnType> types;
  types.reserve(select.size());
  for (const auto& item : select) types.push_back(item.expr.type);
  return types;
}

std::string UnsupportedReport::to_string() const {
  return "unsupported " + construct + " at " + std::to_string(begin) + ": " + reason;
}

std::string SqlError::to_string() const {
  const char* label = kind == Kind::Syntax ? "syntax error" : kind == Kind::Resolution ? "resolution error" : "type error";
  return std::string(label) + " at " + std::to_string(position) + ": " + message;
}

std::string describe(const ParseResult& r) {
  if (const auto* q = std::get_if<Query>(&r)) return render_query(*q);
  if (const auto* u = std::get_if<UnsupportedReport>(&r)) return u->to_string();
  return std::get<SqlError>(r).to_string();
}

namespace {

// ---------------------------------------------------------------- lexer

enum class Tok { Ident, QuotedIdent, String, Number, Symbol, End };

struct Token {
  Tok type = Tok::End;
  std::string text;  // identifiers upper-cased; strings unescaped
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct SyntaxFailure {
  SqlError error;
};
struct UnsupportedFailure {
  UnsupportedReport report;
};

[[noreturn]] void fail(SqlError::Kind kind, std::string message, std::size_t pos) {
  throw SyntaxFailure{SqlError{kind, std::move(message), pos}};
}
[[noreturn]] void unsupported(std::string construct, std::size_t begin, std::size_t end, std::string reason) {
  throw UnsupportedFailure{UnsupportedReport{std::move(construct), begin, end, std::move(reason)}};
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < n && s[i + 1] == '-') {
      while (i < n && s[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && s[i + 1] == '*') {
      const auto close = s.find("*/", i + 2);
      if (close == std::string_view::npos) fail(SqlError::Kind::Syntax, "unterminated comment", i);
      i = close + 2;
      continue;
    }
    Token t;
    t.begin = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '$')) ++j;
      t.type = Tok::Ident;
      t.text = upper(s.substr(i, j - i));
      i = j;
    } else if (c == '"' || c == '`' || c == '[') {
      const char close = c == '[' ? ']' : c;
      std::size_t j = i + 1;
      std::string text;
      while (true) {
        if (j >= n) fail(SqlError::Kind::Syntax, "unterminated quoted identifier", i);
        if (s[j] == close) {
          if (close != ']' && j + 1 < n && s[j + 1] == close) {
            text += close;
            j += 2;
            continue;
          }
          break;
        }
        text += s[j++];
      }
      t.type = Tok::QuotedIdent;
      t.text = upper(text);
      i = j + 1;
    } else if (c == '\'') {
      std::size_t j = i + 1;
      std::string text;
      while (true) {
        if (j >= n) fail(SqlError::Kind::Syntax, "unterminated string literal", i);
        if (s[j] == '\'') {
          if (j + 1 < n && s[j + 1] == '\'') {
            text += '\'';
            j += 2;
            continue;
          }
          break;
        }
        text += s[j++];
      }
      t.type = Tok::String;
      t.text = std::move(text);
      i = j + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      while (j < n && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j < n && s[j] == '.') {
        ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      if (j < n && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < n && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < n && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < n && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      t.type = Tok::Number;
      t.text = std::string(s.substr(i, j - i));
      i = j;
    } else {
      static const char* kTwoChar[] = {"<>", "!=", "<=", ">=", "==", "||"};
      t.type = Tok::Symbol;
      bool matched = false;
      if (i + 1 < n) {
        for (const char* op : kTwoChar) {
          if (s[i] == op[0] && s[i + 1] == op[1]) {
            t.text = op;
            i += 2;
            matched = true;
            break;
          }
        }
      }
      if (!matched) {
        static const std::string kSingle = "(),.;*+-/=<>%";
        if (kSingle.find(c) == std::string::npos)
          fail(SqlError::Kind::Syntax, std::string("unexpected character '") + c + "'", i);
        t.text = std::string(1, c);
        ++i;
      }
    }
    t.end = i;
    out.push_back(std::move(t));
  }
  Token end;
  end.type = Tok::End;
  end.begin = end.end = n;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------- raw syntax

struct RawSelect;

struct RawExpr {
  enum class Kind { Ident, Number, String, Null, Star, Func, Binary, Unary, Between, InList, IsNull, Cast };
  Kind kind = Kind::Null;
  std::string text;       // identifier, literal text, operator, function or cast type
  std::string qualifier;  // Ident: table alias
  bool negated = false;
  bool distinct = false;  // Func: COUNT(DISTINCT ...)
  bool quoted = false;
  std::vector<RawExpr> args;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct RawSelectItem {
  RawExpr expr;
  std::string alias;
  bool star = false;
  std::string star_qualifier;
};

struct RawFrom {
  enum class Join { First, Comma, Inner, Cross };
  Join join = Join::First;
  std::string table;
  std::shared_ptr<RawSelect> subquery;
  std::string alias;
  std::optional<RawExpr> on;
  std::size_t begin = 0;
};

struct RawOrder {
  RawExpr expr;
  bool descending = false;
};

struct RawSelect {
  bool distinct = false;
  std::vector<RawSelectItem> items;
  std::vector<RawFrom> from;
  std::optional<RawExpr> where;
  std::vector<RawExpr> group_by;
  std::vector<RawOrder> order_by;
  std::optional<std::int64_t> limit;
  std::size_t begin = 0;
  std::size_t end = 0;
};

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words = {
      "SELECT", "FROM",  "WHERE",    "GROUP",  "BY",     "ORDER",  "LIMIT",  "OFFSET", "JOIN",  "INNER",
      "LEFT",   "RIGHT", "FULL",     "OUTER",  "CROSS",  "NATURAL", "ON",    "USING",  "UNION", "EXCEPT",
      "INTERSECT", "HAVING", "AS",   "AND",    "OR",     "NOT",    "IN",     "IS",     "NULL",  "BETWEEN",
      "LIKE",   "GLOB",  "DISTINCT", "ALL",    "ASC",    "DESC",   "CASE",   "WHEN",   "THEN",  "ELSE",
      "END",    "CAST",  "EXISTS",   "WINDOW", "OVER",   "WITH",   "VALUES", "REGEXP", "ESCAPE", "COLLATE"};
  return words;
}

class RawParser {
 public:
  explicit RawParser(std::string_view sql) : sql_(sql), tokens_(tokenize(sql)) {}

  RawSelect parse_statement() {
    if (is_word("WITH")) unsupported("common table expression", peek().begin, peek().end, "WITH clauses are outside the fragment");
    if (!is_word("SELECT")) fail(SqlError::Kind::Syntax, "expected SELECT", peek().begin);
    RawSelect select = parse_select();
    check_set_operation();
    if (is_symbol(";")) advance();
    if (peek().type != Tok::End) fail(SqlError::Kind::Syntax, "unexpected '" + peek().text + "' after statement", peek().begin);
    return select;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
  bool is_word(std::string_view w, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.type == Tok::Ident && t.text == w;
  }
  bool is_symbol(std::string_view s, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.type == Tok::Symbol && t.text == s;
  }
  bool accept_word(std::string_view w) {
    if (!is_word(w)) return false;
    advance();
    return true;
  }
  void expect_word(std::string_view w) {
    if (!accept_word(w)) fail(SqlError::Kind::Syntax, "expected " + std::string(w), peek().begin);
  }
  void expect_symbol(std::string_view s) {
    if (!is_symbol(s)) fail(SqlError::Kind::Syntax, "expected '" + std::string(s) + "'", peek().begin);
    advance();
  }
  std::string expect_identifier(const char* what) {
    const Token& t = peek();
    if (t.type == Tok::QuotedIdent || (t.type == Tok::Ident && !reserved_words().count(t.text))) {
      advance();
      return t.text;
    }
    fail(SqlError::Kind::Syntax, std::string("expected ") + what, t.begin);
  }
  bool at_alias_candidate() const {
    const Token& t = peek();
    return t.type == Tok::QuotedIdent || (t.type == Tok::Ident && !reserved_words().count(t.text));
  }
  std::string optional_alias() {
    if (accept_word("AS")) {
      if (peek().type == Tok::String) return upper(advance().text);
      return expect_identifier("alias");
    }
    if (at_alias_candidate()) return advance().text;
    return {};
  }

  void check_set_operation() {
    for (const char* w : {"UNION", "EXCEPT", "INTERSECT"})
      if (is_word(w)) unsupported("set operation", peek().begin, peek().end, std::string(w) + " is outside the fragment");
  }

  RawSelect parse_select() {
    RawSelect sel;
    sel.begin = peek().begin;
    expect_word("SELECT");
    if (accept_word("DISTINCT"))
      sel.distinct = true;
    else
      accept_word("ALL");
    do {
      RawSelectItem item;
      if (is_symbol("*")) {
        advance();
        item.star = true;
      } else if ((peek().type == Tok::Ident || peek().type == Tok::QuotedIdent) && is_symbol(".", 1) && is_symbol("*", 2)) {
        item.star = true;
        item.star_qualifier = advance().text;
        advance();
        advance();
      } else {
        item.expr = parse_expr();
        item.alias = optional_alias();
      }
      sel.items.push_back(std::move(item));
    } while (is_symbol(",") && (advance(), true));

    if (!accept_word("FROM")) {
      if (peek().type == Tok::End || is_symbol(";"))
        unsupported("SELECT without FROM", sel.begin, peek().begin, "queries must read from at least one table");
      fail(SqlError::Kind::Syntax, "expected FROM", peek().begin);
    }
    sel.from.push_back(parse_from_item(RawFrom::Join::First));
    while (true) {
      const Token& t = peek();
      if (is_symbol(",")) {
        advance();
        sel.from.push_back(parse_from_item(RawFrom::Join::Comma));
      } else if (is_word("JOIN") || (is_word("INNER") && is_word("JOIN", 1))) {
        if (accept_word("INNER")) {
        }
        expect_word("JOIN");
        RawFrom item = parse_from_item(RawFrom::Join::Inner);
        if (is_word("USING")) unsupported("JOIN USING", peek().begin, peek().end, "only ON conditions are supported");
        expect_word("ON");
        item.on = parse_expr();
        sel.from.push_back(std::move(item));
      } else if (is_word("CROSS") && is_word("JOIN", 1)) {
        advance();
        advance();
        sel.from.push_back(parse_from_item(RawFrom::Join::Cross));
      } else if (is_word("LEFT") || is_word("RIGHT") || is_word("FULL") || is_word("OUTER")) {
        unsupported("outer join", t.begin, t.end, "only inner joins are supported");
      } else if (is_word("NATURAL")) {
        unsupported("natural join", t.begin, t.end, "only inner joins with ON are supported");
      } else {
        break;
      }
    }
    if (accept_word("WHERE")) sel.where = parse_expr();
    if (is_word("GROUP")) {
      advance();
      expect_word("BY");
      do {
        sel.group_by.push_back(parse_expr());
      } while (is_symbol(",") && (advance(), true));
    }
    if (is_word("HAVING")) unsupported("HAVING", peek().begin, peek().end, "HAVING clauses are outside the fragment");
    if (is_word("WINDOW")) unsupported("window function", peek().begin, peek().end, "named windows are outside the fragment");
    if (is_word("ORDER")) {
      advance();
      expect_word("BY");
      do {
        RawOrder o;
        o.expr = parse_expr();
        if (accept_word("DESC"))
          o.descending = true;
        else
          accept_word("ASC");
        if (is_word("NULLS")) unsupported("NULLS FIRST/LAST", peek().begin, peek().end, "explicit NULL ordering is outside the fragment");
        if (is_word("COLLATE")) unsupported("COLLATE", peek().begin, peek().end, "collations are outside the fragment");
        sel.order_by.push_back(std::move(o));
      } while (is_symbol(",") && (advance(), true));
    }
    if (accept_word("LIMIT")) {
      const Token& t = peek();
      if (t.type != Tok::Number || t.text.find_first_of(".eE") != std::string::npos) {
        if (is_symbol("-")) fail(SqlError::Kind::Syntax, "LIMIT must be non-negative", t.begin);
        unsupported("LIMIT expression", t.begin, t.end, "LIMIT must be a non-negative integer literal");
      }
      advance();
      sel.limit = std::stoll(t.text);
      if (is_word("OFFSET") || is_symbol(",")) unsupported("OFFSET", peek().begin, peek().end, "OFFSET is outside the fragment");
    }
    sel.end = peek().begin;
    return sel;
  }

  RawFrom parse_from_item(RawFrom::Join join) {
    RawFrom item;
    item.join = join;
    item.begin = peek().begin;
    if (is_symbol("(")) {
      advance();
      if (!is_word("SELECT")) fail(SqlError::Kind::Syntax, "expected subquery", peek().begin);
      item.subquery = std::make_shared<RawSelect>(parse_select());
      check_set_operation();
      expect_symbol(")");
      item.alias = optional_alias();
    } else {
      item.table = expect_identifier("table name");
      if (is_symbol(".")) {
        // schema-qualified names such as main.t
        advance();
        item.table = expect_identifier("table name");
      }
      if (is_symbol("(")) unsupported("table-valued function", item.begin, peek().end, "table functions are outside the fragment");
      item.alias = optional_alias();
    }
    return item;
  }

  // ------------------------------------------------------ expressions

  RawExpr parse_expr() { return parse_or(); }

  RawExpr make_binary(std::string op, RawExpr lhs, RawExpr rhs) {
    RawExpr e;
    e.kind = RawExpr::Kind::Binary;
    e.text = std::move(op);
    e.begin = lhs.begin;
    e.end = rhs.end;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  RawExpr parse_or() {
    RawExpr first = parse_and();
    if (!is_word("OR")) return first;
    RawExpr e;
    e.kind = RawExpr::Kind::Binary;
    e.text = "OR";
    e.begin = first.begin;
    e.args.push_back(std::move(first));
    while (accept_word("OR")) e.args.push_back(parse_and());
    e.end = e.args.back().end;
    return e;
  }

  RawExpr parse_and() {
    RawExpr first = parse_not();
    if (!is_word("AND")) return first;
    RawExpr e;
    e.kind = RawExpr::Kind::Binary;
    e.text = "AND";
    e.begin = first.begin;
    e.args.push_back(std::move(first));
    while (accept_word("AND")) e.args.push_back(parse_not());
    e.end = e.args.back().end;
    return e;
  }

  RawExpr parse_not() {
    if (is_word("NOT")) {
      const std::size_t begin = advance().begin;
      RawExpr inner = parse_not();
      RawExpr e;
      e.kind = RawExpr::Kind::Unary;
      e.text = "NOT";
      e.begin = begin;
      e.end = inner.end;
      e.args.push_back(std::move(inner));
      return e;
    }
    return parse_predicate();
  }

  RawExpr parse_predicate() {
    RawExpr lhs = parse_additive();
    const Token& t = peek();
    if (t.type == Tok::Symbol && (t.text == "=" || t.text == "==" || t.text == "<>" || t.text == "!=" || t.text == "<" ||
                                  t.text == "<=" || t.text == ">" || t.text == ">=")) {
      std::string op = advance().text;
      if (op == "==") op = "=";
      if (op == "!=") op = "<>";
      RawExpr rhs = parse_additive();
      return make_binary(op, std::move(lhs), std::move(rhs));
    }
    if (is_word("IS")) {
      advance();
      RawExpr e;
      e.kind = RawExpr::Kind::IsNull;
      e.negated = accept_word("NOT");
      if (!is_word("NULL")) unsupported("IS comparison", t.begin, peek().end, "only IS [NOT] NULL is supported");
      e.end = advance().end;
      e.begin = lhs.begin;
      e.args.push_back(std::move(lhs));
      return e;
    }
    if (is_word("NOTNULL") || is_word("ISNULL")) unsupported("ISNULL/NOTNULL", t.begin, t.end, "use IS [NOT] NULL");
    bool negated = false;
    if (is_word("NOT") && (is_word("BETWEEN", 1) || is_word("IN", 1) || is_word("LIKE", 1) || is_word("GLOB", 1) || is_word("REGEXP", 1))) {
      advance();
      negated = true;
    }
    if (is_word("LIKE") || is_word("GLOB") || is_word("REGEXP") || is_word("MATCH"))
      unsupported("pattern matching", peek().begin, peek().end, peek().text + " is outside the fragment");
    if (accept_word("BETWEEN")) {
      RawExpr lo = parse_additive();
      expect_word("AND");
      RawExpr hi = parse_additive();
      RawExpr e;
      e.kind = RawExpr::Kind::Between;
      e.negated = negated;
      e.begin = lhs.begin;
      e.end = hi.end;
      e.args.push_back(std::move(lhs));
      e.args.push_back(std::move(lo));
      e.args.push_back(std::move(hi));
      return e;
    }
    if (is_word("IN")) {
      const std::size_t in_pos = advance().begin;
      RawExpr e;
      e.kind = RawExpr::Kind::InList;
      e.negated = negated;
      e.begin = lhs.begin;
      e.args.push_back(std::move(lhs));
      if (!is_symbol("(")) unsupported("IN table", in_pos, peek().end, "IN must be followed by a literal list");
      advance();
      if (is_word("SELECT")) unsupported("subquery in predicate", in_pos, peek().end, "IN (SELECT ...) is outside the fragment");
      if (!is_symbol(")")) {
        do {
          e.args.push_back(parse_expr());
        } while (is_symbol(",") && (advance(), true));
      }
      e.end = peek().end;
      expect_symbol(")");
      return e;
    }
    return lhs;
  }

  RawExpr parse_additive() {
    RawExpr lhs = parse_multiplicative();
    while (is_symbol("+") || is_symbol("-") || is_symbol("||")) {
      const Token& op = advance();
      if (op.text == "||") unsupported("string concatenation", op.begin, op.end, "|| is outside the fragment");
      RawExpr rhs = parse_multiplicative();
      lhs = make_binary(op.text, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  RawExpr parse_multiplicative() {
    RawExpr lhs = parse_unary();
    while (is_symbol("*") || is_symbol("/") || is_symbol("%")) {
      const Token& op = advance();
      if (op.text == "%") unsupported("modulo", op.begin, op.end, "% is outside the fragment");
      RawExpr rhs = parse_unary();
      lhs = make_binary(op.text, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  RawExpr parse_unary() {
    if (is_symbol("-") || is_symbol("+")) {
      const Token& op = advance();
      RawExpr inner = parse_unary();
      if (op.text == "+") return inner;
      if (inner.kind == RawExpr::Kind::Number) {
        inner.text = inner.text[0] == '-' ? inner.text.substr(1) : "-" + inner.text;
        inner.begin = op.begin;
        return inner;
      }
      RawExpr e;
      e.kind = RawExpr::Kind::Unary;
      e.text = "-";
      e.begin = op.begin;
      e.end = inner.end;
      e.args.push_back(std::move(inner));
      return e;
    }
    return parse_primary();
  }

  RawExpr parse_primary() {
    const Token& t = peek();
    RawExpr e;
    e.begin = t.begin;
    switch (t.type) {
      case Tok::Number:
        advance();
        e.kind = RawExpr::Kind::Number;
        e.text = t.text;
        e.end = t.end;
        return e;
      case Tok::String:
        advance();
        e.kind = RawExpr::Kind::String;
        e.text = t.text;
        e.end = t.end;
        return e;
      case Tok::End:
        fail(SqlError::Kind::Syntax, "unexpected end of input", t.begin);
      case Tok::Symbol:
        if (t.text == "(") {
          advance();
          if (is_word("SELECT")) unsupported("scalar subquery", t.begin, peek().end, "subqueries are only supported in FROM");
          RawExpr inner = parse_expr();
          if (is_symbol(",")) unsupported("row value", t.begin, peek().end, "row values are outside the fragment");
          expect_symbol(")");
          return inner;
        }
        if (t.text == "*") {
          advance();
          e.kind = RawExpr::Kind::Star;
          e.end = t.end;
          return e;
        }
        fail(SqlError::Kind::Syntax, "unexpected '" + t.text + "'", t.begin);
      case Tok::QuotedIdent:
      case Tok::Ident:
        break;
    }
    if (t.type == Tok::Ident) {
      if (t.text == "NULL") {
        advance();
        e.kind = RawExpr::Kind::Null;
        e.end = t.end;
        return e;
      }
      if (t.text == "CASE") unsupported("CASE expression", t.begin, t.end, "CASE is outside the fragment");
      if (t.text == "EXISTS") unsupported("subquery in predicate", t.begin, t.end, "EXISTS is outside the fragment");
      if (t.text == "TRUE" || t.text == "FALSE")
        unsupported("boolean literal", t.begin, t.end, "boolean literals are outside the fragment");
      if (t.text == "CAST") {
        advance();
        expect_symbol("(");
        RawExpr inner = parse_expr();
        expect_word("AS");
        std::string type = expect_identifier("type name");
        if (is_symbol("(")) {
          // VARCHAR(20) style arguments
          while (!is_symbol(")") && peek().type != Tok::End) advance();
          expect_symbol(")");
        }
        e.end = peek().end;
        expect_symbol(")");
        e.kind = RawExpr::Kind::Cast;
        e.text = type;
        e.args.push_back(std::move(inner));
        return e;
      }
      if (reserved_words().count(t.text) && !is_symbol("(", 1))
        fail(SqlError::Kind::Syntax, "unexpected keyword " + t.text, t.begin);
    }
    advance();
    if (is_symbol("(")) {
      advance();
      e.kind = RawExpr::Kind::Func;
      e.text = t.text;
      if (accept_word("DISTINCT")) e.distinct = true;
      if (!is_symbol(")")) {
        do {
          e.args.push_back(parse_expr());
        } while (is_symbol(",") && (advance(), true));
      }
      e.end = peek().end;
      expect_symbol(")");
      if (is_word("FILTER")) unsupported("aggregate FILTER", e.begin, peek().end, "FILTER clauses are outside the fragment");
      if (is_word("OVER")) unsupported("window function", e.begin, peek().end, "window functions are outside the fragment");
      return e;
    }
    e.kind = RawExpr::Kind::Ident;
    e.quoted = t.type == Tok::QuotedIdent;
    if (is_symbol(".")) {
      advance();
      e.qualifier = t.text;
      const Token& col = peek();
      if (col.type != Tok::Ident && col.type != Tok::QuotedIdent) fail(SqlError::Kind::Syntax, "expected column name", col.begin);
      advance();
      e.text = col.text;
      e.end = col.end;
      return e;
    }
    e.text = t.text;
    e.end = t.end;
    return e;
  }

  std::string_view sql_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// ------------------------------------------------------------ resolver

struct Scope {
  const std::vector<FromItem>* items = nullptr;
  std::size_t visible = 0;  // number of leading FROM items in scope
};

bool is_null_literal(const Expr& e) { return e.kind == ExprKind::Literal && e.literal.is_null(); }

class Resolver {
 public:
  Resolver(const DatabaseSchema& schema, std::string_view sql) : schema_(schema), sql_(sql) {}

  Query resolve(const RawSelect& raw) {
    Query q;
    for (std::size_t i = 0; i < raw.from.size(); ++i) {
      const RawFrom& rf = raw.from[i];
      FromItem item;
      if (rf.subquery) {
        Resolver inner(schema_, sql_);
        inner.derived_counter_ = derived_counter_;
        auto sub = std::make_shared<Query>(inner.resolve(*rf.subquery));
        derived_counter_ = inner.derived_counter_;
        item.derived = sub;
        item.alias = rf.alias.empty() ? "SUBQUERY" + std::to_string(++derived_counter_) : rf.alias;
        item.column_names = sub->output_names();
        item.column_types = sub->output_types();
      } else {
        const TableSchema* table = schema_.find(rf.table);
        if (!table) fail(SqlError::Kind::Resolution, "unknown table '" + rf.table + "'", rf.begin);
        item.table = table->name;
        item.alias = rf.alias.empty() ? table->name : rf.alias;
        for (const auto& c : table->columns) {
          item.column_names.push_back(c.name);
          item.column_types.push_back(c.type);
        }
      }
      for (const auto& existing : q.from)
        if (existing.alias == item.alias) fail(SqlError::Kind::Resolution, "duplicate table alias '" + item.alias + "'", rf.begin);
      q.from.push_back(std::move(item));
    }
    q.join_conditions.resize(q.from.size());
    for (std::size_t i = 1; i < raw.from.size(); ++i) {
      if (raw.from[i].on) q.join_conditions[i] = to_pred(*raw.from[i].on, Scope{&q.from, i + 1}, false);
    }
    const Scope scope{&q.from, q.from.size()};
    if (raw.where) q.where = to_pred(*raw.where, scope, false);

    for (const auto& g : raw.group_by) {
      Expr e = to_expr(g, scope, false, false);
      if (e.kind != ExprKind::Column) unsupported("GROUP BY expression", g.begin, g.end, "GROUP BY accepts column references only");
      q.group_by.push_back(std::move(e));
    }

    for (const auto& item : raw.items) {
      if (item.star) {
        bool found = false;
        for (std::size_t s = 0; s < q.from.size(); ++s) {
          if (!item.star_qualifier.empty() && q.from[s].alias != item.star_qualifier) continue;
          found = true;
          for (std::size_t c = 0; c < q.from[s].column_names.size(); ++c)
            q.select.push_back({Expr::column_ref(make_ref(q.from, s, c)), {}});
        }
        if (!found) fail(SqlError::Kind::Resolution, "unknown table '" + item.star_qualifier + "' in select list", raw.begin);
        continue;
      }
      q.select.push_back({to_expr(item.expr, scope, true, false), item.alias});
    }

    for (const auto& o : raw.order_by) {
      OrderItem item;
      item.descending = o.descending;
      if (o.expr.kind == RawExpr::Kind::Number) {
        if (o.expr.text.find_first_of(".eE-") != std::string::npos)
          fail(SqlError::Kind::Resolution, "ORDER BY position must be a positive integer", o.expr.begin);
        const auto position = std::stoull(o.expr.text);
        if (position < 1 || position > q.select.size())
          fail(SqlError::Kind::Resolution, "ORDER BY position out of range", o.expr.begin);
        item.expr = q.select[position - 1].expr;
      } else if (o.expr.kind == RawExpr::Kind::Ident && o.expr.qualifier.empty() && alias_index(q, o.expr.text)) {
        item.expr = q.select[*alias_index(q, o.expr.text)].expr;
      } else {
        item.expr = to_expr(o.expr, scope, true, false);
      }
      q.order_by.push_back(std::move(item));
    }

    q.aggregated = !q.group_by.empty() ||
                   std::any_of(q.select.begin(), q.select.end(), [](const SelectItem& s) { return s.expr.contains_aggregate(); }) ||
                   std::any_of(q.order_by.begin(), q.order_by.end(), [](const OrderItem& o) { return o.expr.contains_aggregate(); });
    if (q.aggregated) {
      for (const auto& s : q.select) check_grouped(s.expr, q, raw);
      for (const auto& o : q.order_by) check_grouped(o.expr, q, raw);
    }
    if (q.distinct = raw.distinct; q.distinct) {
      for (const auto& o : q.order_by) {
        const bool in_select = std::any_of(q.select.begin(), q.select.end(), [&](const SelectItem& s) { return s.expr == o.expr; });
        if (!in_select)
          unsupported("ORDER BY with DISTINCT", raw.begin, raw.end, "ORDER BY terms of a DISTINCT query must appear in the select list");
      }
    }
    if (raw.limit) {
      q.limit = *raw.limit;
      q.nondeterministic_limit = q.order_by.empty();
    }
    return q;
  }

 private:
  static std::optional<std::size_t> alias_index(const Query& q, const std::string& name) {
    for (std::size_t i = 0; i < q.select.size(); ++i)
      if (q.select[i].alias == name) return i;
    return std::nullopt;
  }

  static ColumnRef make_ref(const std::vector<FromItem>& from, std::size_t s, std::size_t c) {
    return ColumnRef{s, c, from[s].alias, from[s].column_names[c], from[s].column_types[c]};
  }

  void check_grouped(const Expr& e, const Query& q, const RawSelect& raw) {
    if (e.kind == ExprKind::Aggregate) return;
    if (e.kind == ExprKind::Column) {
      const bool grouped = std::any_of(q.group_by.begin(), q.group_by.end(), [&](const Expr& g) { return g == e; });
      if (!grouped)
        unsupported("bare column in aggregate query", raw.begin, raw.end,
                    "column " + e.column.source_name + "." + e.column.column_name + " is neither grouped nor aggregated");
      return;
    }
    for (const auto& a : e.args) check_grouped(a, q, raw);
  }

  ColumnRef lookup(const RawExpr& r, const Scope& scope) {
    std::optional<ColumnRef> found;
    for (std::size_t s = 0; s < scope.visible; ++s) {
      const FromItem& item = (*scope.items)[s];
      if (!r.qualifier.empty() && item.alias != r.qualifier) continue;
      for (std::size_t c = 0; c < item.column_names.size(); ++c) {
        if (item.column_names[c] != r.text) continue;
        if (found) fail(SqlError::Kind::Resolution, "ambiguous column '" + r.text + "'", r.begin);
        found = make_ref(*scope.items, s, c);
      }
    }
    if (!found) {
      if (!r.qualifier.empty()) {
        bool known = false;
        for (std::size_t s = 0; s < scope.visible; ++s) known |= (*scope.items)[s].alias == r.qualifier;
        if (!known) fail(SqlError::Kind::Resolution, "unknown table or alias '" + r.qualifier + "'", r.begin);
        fail(SqlError::Kind::Resolution, "unknown column '" + r.qualifier + "." + r.text + "'", r.begin);
      }
      fail(SqlError::Kind::Resolution, "unknown column '" + r.text + "'", r.begin);
    }
    return *found;
  }

  static bool compatible(const Expr& a, const Expr& b) {
    if (is_null_literal(a) || is_null_literal(b)) return true;
    if (is_numeric(a.type) && is_numeric(b.type)) return true;
    return a.type == b.type;
  }

  /// Text literals compared against dates become date literals.
  static void coerce_date(Expr& literal, const Expr& other, const RawExpr& where) {
    if (other.type != ColumnType::Date || literal.kind != ExprKind::Literal || literal.literal.kind() != Value::Kind::Text) return;
    const auto days = parse_iso_date(literal.literal.str());
    if (!days) fail(SqlError::Kind::Type, "'" + literal.literal.str() + "' is not a valid date", where.begin);
    literal = Expr::constant(Value::date(*days), ColumnType::Date);
  }

  Expr to_expr(const RawExpr& r, const Scope& scope, bool allow_aggregates, bool inside_aggregate) {
    switch (r.kind) {
      case RawExpr::Kind::Ident: return Expr::column_ref(lookup(r, scope));
      case RawExpr::Kind::Number: {
        const auto value = parse_rational(r.text);
        if (!value) fail(SqlError::Kind::Syntax, "malformed number '" + r.text + "'", r.begin);
        if (r.text.find_first_of(".eE") == std::string::npos)
          return Expr::constant(Value::integer(boost::multiprecision::numerator(*value)), ColumnType::Integer);
        return Expr::constant(Value::real(*value), ColumnType::Real);
      }
      case RawExpr::Kind::String: return Expr::constant(Value::text(r.text), ColumnType::Text);
      case RawExpr::Kind::Null: return Expr::constant(Value::null(), ColumnType::Integer);
      case RawExpr::Kind::Star: fail(SqlError::Kind::Syntax, "'*' is only valid in COUNT(*) or the select list", r.begin);
      case RawExpr::Kind::Cast: {
        const std::string type = upper(r.text);
        if (type != "REAL" && type != "FLOAT" && type != "DOUBLE")
          unsupported("CAST", r.begin, r.end, "only CAST(... AS REAL) is supported");
        Expr inner = to_expr(r.args[0], scope, allow_aggregates, inside_aggregate);
        if (!is_numeric(inner.type) && !is_null_literal(inner))
          unsupported("CAST", r.begin, r.end, "CAST to REAL of a non-numeric value is outside the fragment");
        Expr e;
        e.kind = ExprKind::CastReal;
        e.type = ColumnType::Real;
        e.args.push_back(std::move(inner));
        return e;
      }
      case RawExpr::Kind::Unary: {
        if (r.text == "NOT") unsupported("boolean expression as value", r.begin, r.end, "predicates cannot be used as scalar values");
        Expr inner = to_expr(r.args[0], scope, allow_aggregates, inside_aggregate);
        if (!is_numeric(inner.type) && !is_null_literal(inner)) fail(SqlError::Kind::Type, "unary minus on non-numeric value", r.begin);
        Expr zero = Expr::constant(Value::integer(0), ColumnType::Integer);
        return arith(ArithOp::Sub, std::move(zero), std::move(inner), r);
      }
      case RawExpr::Kind::Binary: {
        static const std::map<std::string, ArithOp> kOps = {
            {"+", ArithOp::Add}, {"-", ArithOp::Sub}, {"*", ArithOp::Mul}, {"/", ArithOp::Div}};
        const auto it = kOps.find(r.text);
        if (it == kOps.end()) unsupported("boolean expression as value", r.begin, r.end, "predicates cannot be used as scalar values");
        Expr lhs = to_expr(r.args[0], scope, allow_aggregates, inside_aggregate);
        Expr rhs = to_expr(r.args[1], scope, allow_aggregates, inside_aggregate);
        return arith(it->second, std::move(lhs), std::move(rhs), r);
      }
      case RawExpr::Kind::Func: return aggregate(r, scope, allow_aggregates, inside_aggregate);
      case RawExpr::Kind::Between:
      case RawExpr::Kind::InList:
      case RawExpr::Kind::IsNull:
        unsupported("boolean expression as value", r.begin, r.end, "predicates cannot be used as scalar values");
    }
    fail(SqlError::Kind::Syntax, "unexpected expression", r.begin);
  }

  Expr arith(ArithOp op, Expr lhs, Expr rhs, const RawExpr& r) {
    for (const Expr* side : {&lhs, &rhs}) {
      if (is_null_literal(*side)) continue;
      if (side->type == ColumnType::Date) unsupported("date arithmetic", r.begin, r.end, "arithmetic on dates is outside the fragment");
      if (side->type == ColumnType::Text) fail(SqlError::Kind::Type, "arithmetic on text value", r.begin);
    }
    Expr e;
    e.kind = ExprKind::Arith;
    e.op = op;
    const bool real = (!is_null_literal(lhs) && lhs.type == ColumnType::Real) || (!is_null_literal(rhs) && rhs.type == ColumnType::Real);
    e.type = real ? ColumnType::Real : ColumnType::Integer;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  Expr aggregate(const RawExpr& r, const Scope& scope, bool allow_aggregates, bool inside_aggregate) {
    static const std::map<std::string, AggFunc> kFuncs = {
        {"COUNT", AggFunc::Count}, {"SUM", AggFunc::Sum}, {"AVG", AggFunc::Avg}, {"MIN", AggFunc::Min}, {"MAX", AggFunc::Max}};
    const auto it = kFuncs.find(r.text);
    if (it == kFuncs.end()) unsupported("function " + r.text, r.begin, r.end, "scalar functions are outside the fragment");
    if (!allow_aggregates) fail(SqlError::Kind::Resolution, "aggregate " + r.text + " not allowed here", r.begin);
    if (inside_aggregate) fail(SqlError::Kind::Type, "nested aggregate " + r.text, r.begin);
    if (r.distinct) unsupported("DISTINCT aggregate", r.begin, r.end, r.text + "(DISTINCT ...) is outside the fragment");
    if (r.args.size() != 1) {
      if ((it->second == AggFunc::Min || it->second == AggFunc::Max) && r.args.size() > 1)
        unsupported("function " + r.text, r.begin, r.end, "multi-argument MIN/MAX is outside the fragment");
      fail(SqlError::Kind::Syntax, r.text + " expects one argument", r.begin);
    }
    Expr e;
    e.kind = ExprKind::Aggregate;
    e.agg = it->second;
    if (r.args[0].kind == RawExpr::Kind::Star) {
      if (e.agg != AggFunc::Count) fail(SqlError::Kind::Syntax, r.text + "(*) is not valid", r.begin);
      e.agg = AggFunc::CountStar;
      e.type = ColumnType::Integer;
      return e;
    }
    Expr arg = to_expr(r.args[0], scope, true, true);
    switch (e.agg) {
      case AggFunc::Count: e.type = ColumnType::Integer; break;
      case AggFunc::Sum:
      case AggFunc::Avg:
        if (!is_numeric(arg.type) || is_null_literal(arg)) {
          if (arg.type == ColumnType::Text) fail(SqlError::Kind::Type, r.text + " of a text value", r.begin);
          if (!is_null_literal(arg)) unsupported(r.text + " of dates", r.begin, r.end, "date aggregates are outside the fragment");
        }
        e.type = e.agg == AggFunc::Avg ? ColumnType::Real : arg.type;
        break;
      default: e.type = arg.type; break;
    }
    e.args.push_back(std::move(arg));
    return e;
  }

  Pred to_pred(const RawExpr& r, const Scope& scope, bool allow_aggregates) {
    Pred p;
    switch (r.kind) {
      case RawExpr::Kind::Binary: {
        if (r.text == "AND" || r.text == "OR") {
          p.kind = r.text == "AND" ? PredKind::And : PredKind::Or;
          for (const auto& a : r.args) p.children.push_back(to_pred(a, scope, allow_aggregates));
          return p;
        }
        static const std::map<std::string, CmpOp> kCmp = {{"=", CmpOp::Eq}, {"<>", CmpOp::Ne}, {"<", CmpOp::Lt},
                                                          {"<=", CmpOp::Le}, {">", CmpOp::Gt}, {">=", CmpOp::Ge}};
        const auto it = kCmp.find(r.text);
        if (it == kCmp.end()) break;
        p.kind = PredKind::Compare;
        p.op = it->second;
        Expr lhs = to_expr(r.args[0], scope, allow_aggregates, false);
        Expr rhs = to_expr(r.args[1], scope, allow_aggregates, false);
        coerce_date(lhs, rhs, r.args[0]);
        coerce_date(rhs, lhs, r.args[1]);
        if (!compatible(lhs, rhs))
          fail(SqlError::Kind::Type, "cannot compare " + std::string(to_string(lhs.type)) + " with " + std::string(to_string(rhs.type)), r.begin);
        p.operands = {std::move(lhs), std::move(rhs)};
        return p;
      }
      case RawExpr::Kind::Unary:
        if (r.text == "NOT") {
          p.kind = PredKind::Not;
          p.children.push_back(to_pred(r.args[0], scope, allow_aggregates));
          return p;
        }
        break;
      case RawExpr::Kind::Between: {
        p.kind = PredKind::Between;
        p.negated = r.negated;
        Expr x = to_expr(r.args[0], scope, allow_aggregates, false);
        Expr lo = to_expr(r.args[1], scope, allow_aggregates, false);
        Expr hi = to_expr(r.args[2], scope, allow_aggregates, false);
        coerce_date(lo, x, r.args[1]);
        coerce_date(hi, x, r.args[2]);
        if (!compatible(x, lo) || !compatible(x, hi))
          fail(SqlError::Kind::Type, "BETWEEN bounds do not match the type of " + std::string(to_string(x.type)) + " operand", r.begin);
        p.operands = {std::move(x), std::move(lo), std::move(hi)};
        return p;
      }
      case RawExpr::Kind::InList: {
        p.kind = PredKind::InList;
        p.negated = r.negated;
        p.operands.push_back(to_expr(r.args[0], scope, allow_aggregates, false));
        for (std::size_t i = 1; i < r.args.size(); ++i) {
          const RawExpr& item = r.args[i];
          if (item.kind != RawExpr::Kind::Number && item.kind != RawExpr::Kind::String && item.kind != RawExpr::Kind::Null)
            unsupported("non-literal IN list", item.begin, item.end, "IN lists must contain literals only");
          Expr lit = to_expr(item, scope, false, false);
          coerce_date(lit, p.operands[0], item);
          if (!compatible(p.operands[0], lit)) fail(SqlError::Kind::Type, "IN list item type mismatch", item.begin);
          p.operands.push_back(std::move(lit));
        }
        if (p.operands.size() == 1) unsupported("empty IN list", r.begin, r.end, "IN () is outside the fragment");
        return p;
      }
      case RawExpr::Kind::IsNull:
        p.kind = PredKind::IsNull;
        p.negated = r.negated;
        p.operands.push_back(to_expr(r.args[0], scope, allow_aggregates, false));
        return p;
      default: break;
    }
    unsupported("non-boolean predicate", r.begin, r.end, "a bare value cannot be used as a condition");
  }

  const DatabaseSchema& schema_;
  std::string_view sql_;
  int derived_counter_ = 0;
};

// ------------------------------------------------------------ renderer

bool plain_identifier(const std::string& name) {
  if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  for (char c : name)
    if (std::islower(static_cast<unsigned char>(c))) return false;
  return !reserved_words().count(name);
}

std::string ident(const std::string& name) {
  if (plain_identifier(name)) return name;
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ParseResult parse_query(std::string_view sql, const DatabaseSchema& schema) {
  try {
    RawParser parser(sql);
    RawSelect raw = parser.parse_statement();
    return Resolver(schema, sql).resolve(raw);
  } catch (const SyntaxFailure& f) {
    return f.error;
  } catch (const UnsupportedFailure& f) {
    return f.report;
  } catch (const std::exception& e) {
    return SqlError{SqlError::Kind::Syntax, e.what(), 0};
  }
}

std::string render_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Column: return ident(e.column.source_name) + "." + ident(e.column.column_name);
    case ExprKind::Literal: return e.literal.to_sql();
    case ExprKind::CastReal: return "CAST(" + render_expr(e.args[0]) + " AS REAL)";
    case ExprKind::Arith: {
      static const char* kOps[] = {" + ", " - ", " * ", " / "};
      return "(" + render_expr(e.args[0]) + kOps[static_cast<int>(e.op)] + render_expr(e.args[1]) + ")";
    }
    case ExprKind::Aggregate:
      if (e.agg == AggFunc::CountStar) return "COUNT(*)";
      return std::string(to_string(e.agg)) + "(" + render_expr(e.args[0]) + ")";
  }
  return "";
}

std::string render_pred(const Pred& p) {
  switch (p.kind) {
    case PredKind::Compare:
      return render_expr(p.operands[0]) + " " + std::string(to_string(p.op)) + " " + render_expr(p.operands[1]);
    case PredKind::Between:
      return render_expr(p.operands[0]) + (p.negated ? " NOT BETWEEN " : " BETWEEN ") + render_expr(p.operands[1]) + " AND " +
             render_expr(p.operands[2]);
    case PredKind::InList: {
      std::string out = render_expr(p.operands[0]) + (p.negated ? " NOT IN (" : " IN (");
      for (std::size_t i = 1; i < p.operands.size(); ++i) out += (i > 1 ? ", " : "") + render_expr(p.operands[i]);
      return out + ")";
    }
    case PredKind::IsNull: return render_expr(p.operands[0]) + (p.negated ? " IS NOT NULL" : " IS NULL");
    case PredKind::And:
    case PredKind::Or: {
      std::string out = "(";
      for (std::size_t i = 0; i < p.children.size(); ++i) {
        if (i) out += p.kind == PredKind::And ? " AND " : " OR ";
        out += render_pred(p.children[i]);
      }
      return out + ")";
    }
    case PredKind::Not: return "NOT (" + render_pred(p.children[0]) + ")";
  }
  return "";
}

std::string render_query(const Query& q) {
  std::ostringstream out;
  out << "SELECT ";
  if (q.distinct) out << "DISTINCT ";
  for (std::size_t i = 0; i < q.select.size(); ++i) {
    if (i) out << ", ";
    out << render_expr(q.select[i].expr);
    if (!q.select[i].alias.empty()) out << " AS " << ident(q.select[i].alias);
  }
  out << " FROM ";
  for (std::size_t i = 0; i < q.from.size(); ++i) {
    const FromItem& item = q.from[i];
    if (i) out << (q.join_conditions[i] ? " INNER JOIN " : ", ");
    if (item.is_derived())
      out << "(" << render_query(*item.derived) << ") AS " << ident(item.alias);
    else if (item.alias != item.table)
      out << ident(item.table) << " AS " << ident(item.alias);
    else
      out << ident(item.table);
    if (i && q.join_conditions[i]) out << " ON " << render_pred(*q.join_conditions[i]);
  }
  if (q.where) out << " WHERE " << render_pred(*q.where);
  if (!q.group_by.empty()) {
    out << " GROUP BY ";
    for (std::size_t i = 0; i < q.group_by.size(); ++i) out << (i ? ", " : "") << render_expr(q.group_by[i]);
  }
  if (!q.order_by.empty()) {
    out << " ORDER BY ";
    for (std::size_t i = 0; i < q.order_by.size(); ++i)
      out << (i ? ", " : "") << render_expr(q.order_by[i].expr) << (q.order_by[i].descending ? " DESC" : "");
  }
  if (q.limit) out << " LIMIT " << *q.limit;
  return out.str();
}

}  // namespace sqlbound
