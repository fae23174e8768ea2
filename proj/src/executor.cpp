#include "sqlbound/executor.hpp"

#include <algorithm>
#include <sstream>

namespace sqlbound {

std::string_view to_string(CompareMode mode) {
  switch (mode) {
    case CompareMode::Bag: return "bag";
    case CompareMode::Set: return "set";
    case CompareMode::Ordered: return "ordered";
  }
  return "?";
}

std::optional<CompareMode> compare_mode_from_string(std::string_view name) {
  if (name == "bag") return CompareMode::Bag;
  if (name == "set") return CompareMode::Set;
  if (name == "ordered") return CompareMode::Ordered;
  return std::nullopt;
}

namespace {

using Tuple = std::vector<const Row*>;

enum class Tri { False, True, Unknown };

Tri tri_not(Tri t) { return t == Tri::True ? Tri::False : t == Tri::False ? Tri::True : Tri::Unknown; }

struct Env {
  const Tuple* tuple = nullptr;
  const std::vector<const Tuple*>* group = nullptr;
};

class Executor {
 public:
  explicit Executor(const DatabaseInstance& db) : db_(db) {}

  bool limit_tie = false;

  std::vector<Row> run(const Query& q) {
    // Materialize FROM sources; derived tables are evaluated first.
    std::vector<const std::vector<Row>*> sources;
    std::vector<std::unique_ptr<std::vector<Row>>> owned;
    for (const auto& item : q.from) {
      if (item.is_derived()) {
        owned.push_back(std::make_unique<std::vector<Row>>(run(*item.derived)));
        sources.push_back(owned.back().get());
      } else {
        sources.push_back(&db_.rows(item.table));
      }
    }

    std::vector<Tuple> tuples;
    for (const Row& r : *sources[0]) tuples.push_back({&r});
    for (std::size_t s = 1; s < sources.size(); ++s) {
      std::vector<Tuple> next;
      for (const Tuple& t : tuples) {
        for (const Row& r : *sources[s]) {
          Tuple joined = t;
          joined.push_back(&r);
          if (q.join_conditions[s] && pred(*q.join_conditions[s], Env{&joined, nullptr}) != Tri::True) continue;
          next.push_back(std::move(joined));
        }
      }
      tuples = std::move(next);
    }
    if (q.where) {
      std::vector<Tuple> kept;
      for (auto& t : tuples)
        if (pred(*q.where, Env{&t, nullptr}) == Tri::True) kept.push_back(std::move(t));
      tuples = std::move(kept);
    }

    struct Out {
      Row row;
      std::vector<Value> keys;
    };
    std::vector<Out> out;
    auto emit = [&](const Env& env) {
      Out o;
      for (const auto& item : q.select) o.row.push_back(eval(item.expr, env));
      for (const auto& item : q.order_by) o.keys.push_back(eval(item.expr, env));
      out.push_back(std::move(o));
    };

    if (q.aggregated) {
      std::vector<std::vector<const Tuple*>> groups;
      std::vector<Row> group_keys;
      if (q.group_by.empty()) groups.emplace_back();
      for (const Tuple& t : tuples) {
        if (q.group_by.empty()) {
          groups[0].push_back(&t);
          continue;
        }
        Row key;
        for (const auto& g : q.group_by) key.push_back(eval(g, Env{&t, nullptr}));
        std::size_t g = 0;
        for (; g < group_keys.size(); ++g) {
          bool same = true;
          for (std::size_t k = 0; k < key.size() && same; ++k) same = same_value(key[k], group_keys[g][k]);
          if (same) break;
        }
        if (g == group_keys.size()) {
          group_keys.push_back(std::move(key));
          groups.emplace_back();
        }
        groups[g].push_back(&t);
      }
      for (const auto& group : groups) emit(Env{group.empty() ? nullptr : group.front(), &group});
    } else {
      for (const Tuple& t : tuples) emit(Env{&t, nullptr});
    }

    if (q.distinct) {
      std::vector<Out> unique;
      for (auto& o : out) {
        const bool seen = std::any_of(unique.begin(), unique.end(), [&](const Out& u) { return rows_same(u.row, o.row); });
        if (!seen) unique.push_back(std::move(o));
      }
      out = std::move(unique);
    }

    auto key_cmp = [&](const Out& a, const Out& b) {
      for (std::size_t k = 0; k < q.order_by.size(); ++k) {
        auto c = total_order(a.keys[k], b.keys[k]);
        if (c == 0) continue;
        return q.order_by[k].descending ? c > 0 : c < 0;
      }
      return false;
    };
    if (!q.order_by.empty()) std::stable_sort(out.begin(), out.end(), key_cmp);

    if (q.limit && static_cast<std::size_t>(*q.limit) < out.size()) {
      const auto n = static_cast<std::size_t>(*q.limit);
      if (q.order_by.empty()) {
        limit_tie = true;
      } else if (n > 0 && !key_cmp(out[n - 1], out[n])) {
        limit_tie = true;
      }
      out.resize(n);
    }

    std::vector<Row> rows;
    rows.reserve(out.size());
    for (auto& o : out) rows.push_back(std::move(o.row));
    return rows;
  }

 private:
  static bool rows_same(const Row& a, const Row& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!same_value(a[i], b[i])) return false;
    return true;
  }

  static Value make_number(ColumnType type, const Rational& r) {
    if (type == ColumnType::Integer) return Value::integer(boost::multiprecision::numerator(r));
    return Value::real(r);
  }

  Value eval(const Expr& e, const Env& env) {
    switch (e.kind) {
      case ExprKind::Literal: return e.literal;
      case ExprKind::Column: {
        if (!env.tuple) throw ExecutionError("column reference outside of a row context");
        return (*(*env.tuple)[e.column.source])[e.column.column];
      }
      case ExprKind::CastReal: {
        Value v = eval(e.args[0], env);
        if (v.is_null()) return v;
        return Value::real(v.number());
      }
      case ExprKind::Arith: {
        Value a = eval(e.args[0], env);
        Value b = eval(e.args[1], env);
        if (a.is_null() || b.is_null()) return Value::null();
        const Rational& x = a.number();
        const Rational& y = b.number();
        switch (e.op) {
          case ArithOp::Add: return make_number(e.type, x + y);
          case ArithOp::Sub: return make_number(e.type, x - y);
          case ArithOp::Mul: return make_number(e.type, x * y);
          case ArithOp::Div:
            if (y == 0) return Value::null();
            if (e.type == ColumnType::Integer)
              return Value::integer(BigInt(boost::multiprecision::numerator(x) / boost::multiprecision::numerator(y)));
            return Value::real(x / y);
        }
        return Value::null();
      }
      case ExprKind::Aggregate: return aggregate(e, env);
    }
    return Value::null();
  }

  Value aggregate(const Expr& e, const Env& env) {
    if (!env.group) throw ExecutionError("aggregate outside of a grouped context");
    const auto& group = *env.group;
    if (e.agg == AggFunc::CountStar) return Value::integer(BigInt(group.size()));
    std::vector<Value> values;
    for (const Tuple* t : group) {
      Value v = eval(e.args[0], Env{t, nullptr});
      if (!v.is_null()) values.push_back(std::move(v));
    }
    switch (e.agg) {
      case AggFunc::Count: return Value::integer(BigInt(values.size()));
      case AggFunc::Sum:
      case AggFunc::Avg: {
        if (values.empty()) return Value::null();
        Rational sum = 0;
        for (const auto& v : values) sum += v.number();
        if (e.agg == AggFunc::Sum) return make_number(e.type, sum);
        return Value::real(sum / Rational(static_cast<long long>(values.size())));
      }
      case AggFunc::Min:
      case AggFunc::Max: {
        if (values.empty()) return Value::null();
        const Value* best = &values[0];
        for (const auto& v : values) {
          const auto c = total_order(v, *best);
          if (e.agg == AggFunc::Min ? c < 0 : c > 0) best = &v;
        }
        return *best;
      }
      default: break;
    }
    return Value::null();
  }

  Tri compare(CmpOp op, const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return Tri::Unknown;
    const auto c = total_order(a, b);
    bool r = false;
    switch (op) {
      case CmpOp::Eq: r = c == 0; break;
      case CmpOp::Ne: r = c != 0; break;
      case CmpOp::Lt: r = c < 0; break;
      case CmpOp::Le: r = c <= 0; break;
      case CmpOp::Gt: r = c > 0; break;
      case CmpOp::Ge: r = c >= 0; break;
    }
    return r ? Tri::True : Tri::False;
  }

  static Tri tri_and(Tri a, Tri b) {
    if (a == Tri::False || b == Tri::False) return Tri::False;
    if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
    return Tri::True;
  }
  static Tri tri_or(Tri a, Tri b) {
    if (a == Tri::True || b == Tri::True) return Tri::True;
    if (a == Tri::Unknown || b == Tri::Unknown) return Tri::Unknown;
    return Tri::False;
  }

  Tri pred(const Pred& p, const Env& env) {
    switch (p.kind) {
      case PredKind::Compare: return compare(p.op, eval(p.operands[0], env), eval(p.operands[1], env));
      case PredKind::Between: {
        Value x = eval(p.operands[0], env);
        Tri r = tri_and(compare(CmpOp::Ge, x, eval(p.operands[1], env)), compare(CmpOp::Le, x, eval(p.operands[2], env)));
        return p.negated ? tri_not(r) : r;
      }
      case PredKind::InList: {
        Value x = eval(p.operands[0], env);
        Tri r = Tri::False;
        for (std::size_t i = 1; i < p.operands.size(); ++i) r = tri_or(r, compare(CmpOp::Eq, x, eval(p.operands[i], env)));
        return p.negated ? tri_not(r) : r;
      }
      case PredKind::IsNull: {
        const bool null = eval(p.operands[0], env).is_null();
        return (null != p.negated) ? Tri::True : Tri::False;
      }
      case PredKind::And: {
        Tri r = Tri::True;
        for (const auto& c : p.children) r = tri_and(r, pred(c, env));
        return r;
      }
      case PredKind::Or: {
        Tri r = Tri::False;
        for (const auto& c : p.children) r = tri_or(r, pred(c, env));
        return r;
      }
      case PredKind::Not: return tri_not(pred(p.children[0], env));
    }
    return Tri::Unknown;
  }

  const DatabaseInstance& db_;
};

bool row_less(const Row& a, const Row& b) {
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    const auto c = total_order(a[i], b[i]);
    if (c != 0) return c < 0;
  }
  return a.size() < b.size();
}

bool row_equal(const Row& a, const Row& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_value(a[i], b[i])) return false;
  return true;
}

}  // namespace

ResultRelation execute(const Query& query, const DatabaseInstance& db) {
  Executor ex(db);
  ResultRelation r;
  r.columns = query.output_names();
  r.rows = ex.run(query);
  r.ordered = !query.order_by.empty();
  r.limit_tie = ex.limit_tie;
  return r;
}

bool results_equal(const ResultRelation& a, const ResultRelation& b, CompareMode mode) {
  if (a.columns.size() != b.columns.size()) return false;
  if (mode == CompareMode::Ordered) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      if (!row_equal(a.rows[i], b.rows[i])) return false;
    return true;
  }
  auto x = a.rows;
  auto y = b.rows;
  std::sort(x.begin(), x.end(), row_less);
  std::sort(y.begin(), y.end(), row_less);
  if (mode == CompareMode::Set) {
    x.erase(std::unique(x.begin(), x.end(), row_equal), x.end());
    y.erase(std::unique(y.begin(), y.end(), row_equal), y.end());
  }
  if (x.size() != y.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!row_equal(x[i], y[i])) return false;
  return true;
}

ExOutcome ex_metric(const ParseResult& gold, const ParseResult& pred, const DatabaseInstance& db, CompareMode mode) {
  if (!is_query(gold)) return {false, "gold: " + describe(gold)};
  if (!is_query(pred)) return {false, "pred: " + describe(pred)};
  try {
    const auto g = execute(std::get<Query>(gold), db);
    const auto p = execute(std::get<Query>(pred), db);
    return {results_equal(g, p, mode), std::nullopt};
  } catch (const std::exception& e) {
    return {false, std::string("execution error: ") + e.what()};
  }
}

std::string format_result(const ResultRelation& r) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? " | " : "") << r.columns[i];
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " | " : "") << row[i].to_display();
    out << '\n';
  }
  out << "(" << r.rows.size() << (r.rows.size() == 1 ? " row)" : " rows)") << '\n';
  return out.str();
}

}  // namespace sqlbound
