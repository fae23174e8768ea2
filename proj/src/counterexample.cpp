#include "sqlbound/counterexample.hpp"

#include <cctype>
#include <sstream>

namespace sqlbound {

namespace {

std::string ident(const std::string& name) {
  bool plain = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name) plain = plain && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
  if (plain) return name;
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Token {
  enum class Kind { Word, Quoted, String, Number, Punct, End } kind = Kind::End;
  std::string text;
};

class ScriptLexer {
 public:
  explicit ScriptLexer(std::string_view s) : s_(s) {}

  Token next() {
    skip();
    if (i_ >= s_.size()) return {};
    const char c = s_[i_];
    if (c == '\'') return quoted('\'', Token::Kind::String);
    if (c == '"') return quoted('"', Token::Kind::Quoted);
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '-' && i_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_ + 1])))) {
      const std::size_t start = i_++;
      while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) ++i_;
      return {Token::Kind::Number, std::string(s_.substr(start, i_ - start))};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i_;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
      return {Token::Kind::Word, upper(s_.substr(start, i_ - start))};
    }
    ++i_;
    return {Token::Kind::Punct, std::string(1, c)};
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      } else if (s_.substr(i_, 2) == "--") {
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  Token quoted(char q, Token::Kind kind) {
    std::string out;
    ++i_;
    for (;;) {
      if (i_ >= s_.size()) throw ScriptError("unterminated quoted text");
      if (s_[i_] == q) {
        if (i_ + 1 < s_.size() && s_[i_ + 1] == q) {
          out += q;
          i_ += 2;
          continue;
        }
        ++i_;
        break;
      }
      out += s_[i_++];
    }
    return {kind, std::move(out)};
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

class ScriptParser {
 public:
  explicit ScriptParser(std::string_view s) : lex_(s) { advance(); }

  DatabaseInstance parse() {
    DatabaseSchema schema;
    std::vector<std::pair<std::string, std::vector<Token>>> inserts;
    while (tok_.kind != Token::Kind::End) {
      if (accept_word("CREATE")) {
        expect_word("TABLE");
        schema.tables.push_back(create_table());
      } else if (accept_word("INSERT")) {
        expect_word("INTO");
        const std::string table = name();
        expect_word("VALUES");
        expect_punct("(");
        std::vector<Token> values;
        for (;;) {
          values.push_back(value_token());
          if (accept_punct(")")) break;
          expect_punct(",");
        }
        inserts.emplace_back(table, std::move(values));
      } else {
        throw ScriptError("unexpected '" + tok_.text + "' in script");
      }
      expect_punct(";");
    }
    try {
      validate_schema(schema);
    } catch (const SchemaError& e) {
      throw ScriptError(std::string("script schema: ") + e.what());
    }
    DatabaseInstance db = DatabaseInstance::empty(schema);
    for (auto& [table, values] : inserts) {
      const TableSchema* t = schema.find(table);
      if (!t) throw ScriptError("INSERT into undeclared table " + table);
      if (values.size() != t->columns.size()) throw ScriptError("INSERT into " + table + " has the wrong number of values");
      Row row;
      for (std::size_t i = 0; i < values.size(); ++i) row.push_back(to_value(values[i], t->columns[i].type));
      db.rows(t->name).push_back(std::move(row));
    }
    if (auto err = check_integrity(db)) throw ScriptError("script instance: " + *err);
    return db;
  }

 private:
  void advance() { tok_ = lex_.next(); }

  bool accept_word(const char* w) {
    if (tok_.kind == Token::Kind::Word && tok_.text == w) {
      advance();
      return true;
    }
    return false;
  }
  void expect_word(const char* w) {
    if (!accept_word(w)) throw ScriptError(std::string("expected ") + w + " near '" + tok_.text + "'");
  }
  bool accept_punct(const char* p) {
    if (tok_.kind == Token::Kind::Punct && tok_.text == p) {
      advance();
      return true;
    }
    return false;
  }
  void expect_punct(const char* p) {
    if (!accept_punct(p)) throw ScriptError(std::string("expected '") + p + "' near '" + tok_.text + "'");
  }

  std::string name() {
    if (tok_.kind != Token::Kind::Word && tok_.kind != Token::Kind::Quoted) throw ScriptError("expected a name near '" + tok_.text + "'");
    std::string n = upper(tok_.text);
    advance();
    return n;
  }

  std::vector<std::string> name_list() {
    expect_punct("(");
    std::vector<std::string> out{name()};
    while (accept_punct(",")) out.push_back(name());
    expect_punct(")");
    return out;
  }

  TableSchema create_table() {
    TableSchema t;
    t.name = name();
    expect_punct("(");
    for (;;) {
      if (accept_word("PRIMARY")) {
        expect_word("KEY");
        t.primary_key = name_list();
      } else if (accept_word("FOREIGN")) {
        expect_word("KEY");
        const auto cols = name_list();
        expect_word("REFERENCES");
        const std::string ref = name();
        const auto ref_cols = name_list();
        if (cols.size() != 1 || ref_cols.size() != 1) throw ScriptError("composite foreign keys are not supported");
        t.foreign_keys.push_back({cols[0], ref, ref_cols[0]});
      } else {
        ColumnSchema c;
        c.name = name();
        if (tok_.kind != Token::Kind::Word) throw ScriptError("expected a column type for " + c.name);
        const auto type = column_type_from_string(tok_.text);
        if (!type) throw ScriptError("unknown column type " + tok_.text);
        c.type = *type;
        advance();
        t.columns.push_back(std::move(c));
      }
      if (accept_punct(")")) break;
      expect_punct(",");
    }
    return t;
  }

  Token value_token() {
    if (accept_punct("(")) {
      // (p.0 / q) for non-terminating reals
      Token num = tok_;
      advance();
      expect_punct("/");
      Token den = tok_;
      advance();
      expect_punct(")");
      if (num.kind != Token::Kind::Number || den.kind != Token::Kind::Number) throw ScriptError("malformed fraction");
      auto strip = [](std::string s) {
        if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.resize(s.size() - 2);
        return s;
      };
      return {Token::Kind::Number, strip(num.text) + "/" + strip(den.text)};
    }
    if (tok_.kind == Token::Kind::End || tok_.kind == Token::Kind::Punct) throw ScriptError("expected a value near '" + tok_.text + "'");
    Token t = tok_;
    advance();
    return t;
  }

  static Value to_value(const Token& t, ColumnType type) {
    if (t.kind == Token::Kind::Word && t.text == "NULL") return Value::null();
    try {
      if (t.kind == Token::Kind::Number) {
        if (!is_numeric(type)) throw ScriptError("number " + t.text + " in a " + std::string(to_string(type)) + " column");
        const auto r = parse_rational(t.text);
        if (!r) throw ScriptError("malformed number " + t.text);
        return Value::of_type(type, *r);
      }
      if (t.kind == Token::Kind::String) {
        if (type != ColumnType::Text && type != ColumnType::Date)
          throw ScriptError("text '" + t.text + "' in a " + std::string(to_string(type)) + " column");
        return parse_cell(type, t.text);
      }
    } catch (const ValueError& e) {
      throw ScriptError(e.what());
    }
    throw ScriptError("unexpected value '" + t.text + "'");
  }

  ScriptLexer lex_;
  Token tok_;
};

}  // namespace

std::string render_script(const DatabaseInstance& db) {
  std::ostringstream out;
  for (const auto& t : db.schema.tables) {
    out << "CREATE TABLE " << ident(t.name) << " (";
    for (std::size_t i = 0; i < t.columns.size(); ++i)
      out << (i ? ", " : "") << ident(t.columns[i].name) << ' ' << upper(to_string(t.columns[i].type));
    if (!t.primary_key.empty()) {
      out << ", PRIMARY KEY (";
      for (std::size_t i = 0; i < t.primary_key.size(); ++i) out << (i ? ", " : "") << ident(t.primary_key[i]);
      out << ')';
    }
    for (const auto& fk : t.foreign_keys)
      out << ", FOREIGN KEY (" << ident(fk.column) << ") REFERENCES " << ident(fk.ref_table) << " (" << ident(fk.ref_column) << ')';
    out << ");\n";
  }
  for (const auto& t : db.schema.tables) {
    const auto it = db.tables.find(t.name);
    if (it == db.tables.end()) continue;
    for (const auto& row : it->second) {
      out << "INSERT INTO " << ident(t.name) << " VALUES (";
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? ", " : "") << row[i].to_sql();
      out << ");\n";
    }
  }
  return out.str();
}

DatabaseInstance parse_script(std::string_view text) { return ScriptParser(text).parse(); }

}  // namespace sqlbound
