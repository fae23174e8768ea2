#include "sqlbound/constraints.hpp"

#include <json.hpp>

#include <algorithm>
#include <tuple>

namespace sqlbound {

using nlohmann::json;

std::string_view to_string(RangeVariant v) {
  switch (v) {
    case RangeVariant::Strict: return "strict";
    case RangeVariant::Loose: return "loose";
    case RangeVariant::Semantic: return "semantic";
  }
  return "?";
}

std::string_view to_string(Provenance p) { return p == Provenance::Mined ? "mined" : "llm-repaired"; }

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Candidate: return "candidate";
    case Status::Accepted: return "accepted";
    case Status::Rejected: return "rejected";
  }
  return "?";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const char* op_text(OrderOp op) { return op == OrderOp::Le ? "<=" : ">="; }

std::string bound_text(const std::optional<Rational>& b, bool date) {
  if (!b) return "unbounded";
  if (date && boost::multiprecision::denominator(*b) == 1)
    return format_iso_date(static_cast<std::int64_t>(boost::multiprecision::numerator(*b)));
  return format_rational(*b);
}

}  // namespace

std::string MinedConstraint::kind() const {
  return std::visit(overloaded{[](const RangeConstraint&) { return "range"; },
                               [](const CategoricalConstraint&) { return "categorical"; },
                               [](const NotNullConstraint&) { return "not_null"; },
                               [](const FdConstraint&) { return "fd"; },
                               [](const OrderingConstraint&) { return "ordering"; }},
                    body);
}

const std::string& MinedConstraint::table() const {
  return std::visit([](const auto& c) -> const std::string& { return c.table; }, body);
}

std::vector<std::string> MinedConstraint::columns() const {
  return std::visit(overloaded{[](const RangeConstraint& c) { return std::vector<std::string>{c.column}; },
                               [](const CategoricalConstraint& c) { return std::vector<std::string>{c.column}; },
                               [](const NotNullConstraint& c) { return std::vector<std::string>{c.column}; },
                               [](const FdConstraint& c) { return std::vector<std::string>{c.determinant, c.dependent}; },
                               [](const OrderingConstraint& c) { return std::vector<std::string>{c.left, c.right}; }},
                    body);
}

const std::string& MinedConstraint::column() const {
  return std::visit(overloaded{[](const RangeConstraint& c) -> const std::string& { return c.column; },
                               [](const CategoricalConstraint& c) -> const std::string& { return c.column; },
                               [](const NotNullConstraint& c) -> const std::string& { return c.column; },
                               [](const FdConstraint& c) -> const std::string& { return c.determinant; },
                               [](const OrderingConstraint& c) -> const std::string& { return c.left; }},
                    body);
}

std::string MinedConstraint::identity() const {
  return std::visit(
      overloaded{[](const RangeConstraint& c) { return "range:" + c.table + "." + c.column; },
                 [](const CategoricalConstraint& c) { return "categorical:" + c.table + "." + c.column; },
                 [](const NotNullConstraint& c) { return "not_null:" + c.table + "." + c.column; },
                 [](const FdConstraint& c) { return "fd:" + c.table + "." + c.determinant + "->" + c.table + "." + c.dependent; },
                 [](const OrderingConstraint& c) {
                   return "ordering:" + c.table + "." + c.left + op_text(c.op) + c.table + "." + c.right;
                 }},
      body);
}

std::string MinedConstraint::describe() const {
  return std::visit(
      overloaded{[](const RangeConstraint& c) {
                   return "every non-null value of " + c.table + "." + c.column + " lies between " + bound_text(c.min, false) +
                          " and " + bound_text(c.max, false) + " (" + std::string(to_string(c.variant)) + " bounds)";
                 },
                 [](const CategoricalConstraint& c) {
                   std::string vals;
                   for (std::size_t i = 0; i < c.values.size(); ++i) vals += (i ? ", " : "") + c.values[i].to_sql();
                   return "every non-null value of " + c.table + "." + c.column + " is one of {" + vals + "}";
                 },
                 [](const NotNullConstraint& c) { return c.table + "." + c.column + " is never NULL"; },
                 [](const FdConstraint& c) {
                   return c.table + "." + c.determinant + " functionally determines " + c.table + "." + c.dependent +
                          " (rows with equal " + c.determinant + " have equal " + c.dependent + ")";
                 },
                 [](const OrderingConstraint& c) {
                   return "on every row, " + c.table + "." + c.left + " " + op_text(c.op) + " " + c.table + "." + c.right +
                          " whenever both are non-null";
                 }},
      body);
}

bool holds_on_row(const ConstraintBody& body, const TableSchema& table, const Row& row) {
  auto cell = [&](const std::string& name) -> const Value& { return row.at(*table.column_index(name)); };
  return std::visit(
      overloaded{[&](const RangeConstraint& c) {
                   const Value& v = cell(c.column);
                   if (v.is_null()) return true;
                   const Rational x = v.kind() == Value::Kind::Date ? Rational(v.days()) : v.number();
                   return (!c.min || *c.min <= x) && (!c.max || x <= *c.max);
                 },
                 [&](const CategoricalConstraint& c) {
                   const Value& v = cell(c.column);
                   if (v.is_null()) return true;
                   return std::any_of(c.values.begin(), c.values.end(), [&](const Value& w) { return same_value(v, w); });
                 },
                 [&](const NotNullConstraint& c) { return !cell(c.column).is_null(); },
                 [&](const FdConstraint&) { return true; },
                 [&](const OrderingConstraint& c) {
                   const Value& a = cell(c.left);
                   const Value& b = cell(c.right);
                   if (a.is_null() || b.is_null()) return true;
                   const auto cmp = total_order(a, b);
                   return c.op == OrderOp::Le ? cmp <= 0 : cmp >= 0;
                 }},
      body);
}

bool holds(const MinedConstraint& c, const DatabaseInstance& db) {
  const TableSchema& table = db.schema.at(c.table());
  const auto& rows = db.rows(table.name);
  if (const auto* fd = std::get_if<FdConstraint>(&c.body)) {
    const std::size_t a = *table.column_index(fd->determinant);
    const std::size_t b = *table.column_index(fd->dependent);
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = i + 1; j < rows.size(); ++j)
        if (same_value(rows[i][a], rows[j][a]) && !same_value(rows[i][b], rows[j][b])) return false;
    return true;
  }
  return std::all_of(rows.begin(), rows.end(), [&](const Row& r) { return holds_on_row(c.body, table, r); });
}

ConstraintSet accepted_only(const ConstraintSet& set) {
  ConstraintSet out;
  for (const auto& c : set)
    if (c.status == Status::Accepted) out.push_back(c);
  return out;
}

void sort_constraints(ConstraintSet& set) {
  auto key = [](const MinedConstraint& c) {
    int variant = -1;
    if (const auto* r = std::get_if<RangeConstraint>(&c.body)) variant = static_cast<int>(r->variant);
    return std::make_tuple(c.table(), c.column(), c.kind(), c.identity(), variant);
  };
  std::stable_sort(set.begin(), set.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
}

namespace {

json value_to_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Null: return nullptr;
    case Value::Kind::Text: return v.str();
    case Value::Kind::Date: return format_iso_date(v.days());
    case Value::Kind::Integer:
      if (v.number() >= Rational(INT64_MIN) && v.number() <= Rational(INT64_MAX))
        return static_cast<std::int64_t>(boost::multiprecision::numerator(v.number()));
      return format_rational(v.number());
    case Value::Kind::Real: return format_rational(v.number());
  }
  return nullptr;
}

Value value_from_json(const json& j, ColumnType type) {
  if (j.is_null()) return Value::null();
  if (j.is_string()) return parse_cell(type, j.get<std::string>());
  if (j.is_number_integer()) return parse_cell(type, std::to_string(j.get<std::int64_t>()));
  if (j.is_number()) return parse_cell(type, j.dump());
  throw std::runtime_error("unsupported JSON value " + j.dump());
}

std::optional<Rational> bound_from_json(const json& j, ColumnType type) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (type == ColumnType::Date)
      if (auto d = parse_iso_date(s)) return Rational(*d);
    if (auto r = parse_rational(s)) return r;
    throw std::runtime_error("bad bound '" + s + "'");
  }
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (j.is_number()) {
    if (auto r = parse_rational(j.dump())) return r;
  }
  throw std::runtime_error("bad bound " + j.dump());
}

ColumnType column_type(const DatabaseSchema& schema, const std::string& table, const std::string& column) {
  const TableSchema& t = schema.at(table);
  const auto idx = t.column_index(column);
  if (!idx) throw std::runtime_error("unknown column " + table + "." + column);
  return t.columns[*idx].type;
}

}  // namespace

std::string constraints_to_json(const ConstraintSet& input) {
  ConstraintSet set = input;
  sort_constraints(set);
  json out = json::array();
  for (const auto& c : set) {
    json j;
    j["kind"] = c.kind();
    j["table"] = c.table();
    j["columns"] = c.columns();
    json params = json::object();
    std::visit(overloaded{[&](const RangeConstraint& r) {
                            params["min"] = r.min ? json(format_rational(*r.min)) : json(nullptr);
                            params["max"] = r.max ? json(format_rational(*r.max)) : json(nullptr);
                            j["variant"] = to_string(r.variant);
                          },
                          [&](const CategoricalConstraint& r) {
                            json values = json::array();
                            for (const auto& v : r.values) values.push_back(value_to_json(v));
                            params["values"] = values;
                          },
                          [&](const NotNullConstraint&) {}, [&](const FdConstraint&) {},
                          [&](const OrderingConstraint& r) { params["op"] = op_text(r.op); }},
               c.body);
    j["params"] = params;
    j["status"] = to_string(c.status);
    j["provenance"] = to_string(c.provenance);
    if (c.undecided) j["undecided"] = true;
    out.push_back(j);
  }
  return out.dump(2) + "\n";
}

static ConstraintSet parse_constraint_doc(std::string_view text, const DatabaseSchema& schema) {
  const json doc = json::parse(text);
  if (!doc.is_array()) throw std::runtime_error("constraint file must be a JSON array");
  ConstraintSet set;
  for (const auto& j : doc) {
    MinedConstraint c;
    const auto kind = j.at("kind").get<std::string>();
    const auto table = upper(j.at("table").get<std::string>());
    std::vector<std::string> cols;
    for (const auto& col : j.at("columns")) cols.push_back(upper(col.get<std::string>()));
    const json params = j.value("params", json::object());
    auto need = [&](std::size_t n) {
      if (cols.size() != n) throw std::runtime_error(kind + " constraint on " + table + " needs " + std::to_string(n) + " columns");
    };
    if (kind == "range") {
      need(1);
      RangeConstraint r{table, cols[0], {}, {}, RangeVariant::Strict};
      const ColumnType type = column_type(schema, table, cols[0]);
      r.min = bound_from_json(params.value("min", json(nullptr)), type);
      r.max = bound_from_json(params.value("max", json(nullptr)), type);
      const auto variant = j.value("variant", std::string("strict"));
      r.variant = variant == "loose" ? RangeVariant::Loose : variant == "semantic" ? RangeVariant::Semantic : RangeVariant::Strict;
      c.body = r;
    } else if (kind == "categorical") {
      need(1);
      CategoricalConstraint r{table, cols[0], {}};
      const ColumnType type = column_type(schema, table, cols[0]);
      for (const auto& v : params.at("values")) r.values.push_back(value_from_json(v, type));
      c.body = r;
    } else if (kind == "not_null") {
      need(1);
      c.body = NotNullConstraint{table, cols[0]};
    } else if (kind == "fd") {
      need(2);
      c.body = FdConstraint{table, cols[0], cols[1]};
    } else if (kind == "ordering") {
      need(2);
      const auto op = params.value("op", std::string("<="));
      if (op != "<=" && op != ">=") throw std::runtime_error("bad ordering operator '" + op + "'");
      c.body = OrderingConstraint{table, cols[0], cols[1], op == "<=" ? OrderOp::Le : OrderOp::Ge};
    } else {
      throw std::runtime_error("unknown constraint kind '" + kind + "'");
    }
    const auto status = j.value("status", std::string("candidate"));
    c.status = status == "accepted" ? Status::Accepted : status == "rejected" ? Status::Rejected : Status::Candidate;
    c.provenance = j.value("provenance", std::string("mined")) == "llm-repaired" ? Provenance::LlmRepaired : Provenance::Mined;
    c.undecided = j.value("undecided", false);
    set.push_back(std::move(c));
  }
  if (auto problem = check_constraint_columns(set, schema)) throw std::runtime_error(*problem);
  return set;
}

ConstraintSet constraints_from_json(std::string_view text, const DatabaseSchema& schema) {
  try {
    return parse_constraint_doc(text, schema);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed constraint file: ") + e.what());
  }
}

std::optional<std::string> check_constraint_columns(const ConstraintSet& set, const DatabaseSchema& schema) {
  for (const auto& c : set) {
    const TableSchema* t = schema.find(c.table());
    if (!t) return "constraint " + c.identity() + " names unknown table";
    for (const auto& col : c.columns())
      if (!t->column_index(col)) return "constraint " + c.identity() + " names unknown column " + col;
  }
  return std::nullopt;
}

}  // namespace sqlbound
