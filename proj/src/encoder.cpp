#include "sqlbound/encoder.hpp"

#include "sqlbound/parser.hpp"

#include <cctype>
#include <deque>
#include <functional>
#include <sstream>

namespace sqlbound {

namespace {

using smt::Sort;
using smt::Term;
namespace S = smt;

Sort sort_of(ColumnType t) { return t == ColumnType::Real ? Sort::Real : Sort::Int; }

std::string symbol(std::string_view s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_';
  return out;
}

bool is_canonical_numeral(const std::string& s) {
  std::size_t i = s.size() > 1 && s[0] == '-' ? 1 : 0;
  if (i >= s.size()) return false;
  if (s[i] == '0') return s.size() == i + 1 && i == 0;
  for (std::size_t k = i; k < s.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
  return true;
}

// Three-valued predicate: `t` holds when true, `f` when false, neither when unknown.
struct Tri {
  Term t;
  Term f;
};

Tri tri_not(const Tri& a) { return {a.f, a.t}; }

bool comparable_family(ColumnType a, ColumnType b) {
  auto family = [](ColumnType t) { return is_numeric(t) ? 0 : t == ColumnType::Date ? 1 : 2; };
  return family(a) == family(b);
}

// NULL equals NULL; cells of different families never match.
Term cell_equal(const SymCell& a, const SymCell& b) {
  if (!comparable_family(a.type, b.type)) return S::and_(a.null, b.null);
  return S::or_(S::and_(a.null, b.null), S::and_({S::not_(a.null), S::not_(b.null), S::eq(a.value, b.value)}));
}

Term cells_equal(const std::vector<SymCell>& a, const std::vector<SymCell>& b) {
  std::vector<Term> parts;
  for (std::size_t k = 0; k < a.size(); ++k) parts.push_back(cell_equal(a[k], b[k]));
  return S::and_(std::move(parts));
}

Term literal_term(const Value& v, ColumnType type, TextDictionary& dict) {
  switch (v.kind()) {
    case Value::Kind::Null: return S::number(0, sort_of(type));
    case Value::Kind::Integer: return S::integer(boost::multiprecision::numerator(v.number()));
    case Value::Kind::Real: return S::real(v.number());
    case Value::Kind::Date: return S::integer(BigInt(v.days()));
    case Value::Kind::Text: return S::integer(dict.code(v.str()));
  }
  return S::integer(0);
}

// Truncating integer division (SQL) in terms of Euclidean div.
Term truncating_div(const Term& n, const Term& d) {
  const Term zero = S::integer(0);
  const Term an = S::ite(S::ge(n, zero), n, S::neg(n));
  const Term ad = S::ite(S::ge(d, zero), d, S::neg(d));
  const Term q = S::div_int(an, ad);
  return S::ite(S::eq(S::ge(n, zero), S::ge(d, zero)), q, S::neg(q));
}

}  // namespace

BigInt TextDictionary::code(const std::string& literal) {
  if (const auto it = codes_.find(literal); it != codes_.end()) return it->second;
  BigInt c;
  if (is_canonical_numeral(literal)) {
    c = BigInt(literal);
    if (const auto it = by_code_.find(c); it != by_code_.end())
      throw EncodingUnsupported("text literal", "'" + literal + "' collides with the code of '" + it->second + "'");
  } else {
    while (by_code_.count(next_)) ++next_;
    c = next_++;
  }
  codes_.emplace(literal, c);
  by_code_.emplace(c, literal);
  return c;
}

std::string TextDictionary::decode(const BigInt& code) const {
  if (const auto it = by_code_.find(code); it != by_code_.end()) return it->second;
  return code.str();
}

std::string_view to_string(Section s) {
  switch (s) {
    case Section::Integrity: return "integrity";
    case Section::Constraints: return "constraints";
    case Section::Query1: return "q1";
    case Section::Query2: return "q2";
    case Section::NonEquivalence: return "nonequivalence";
  }
  return "?";
}

struct Encoder::Impl {
  struct Combo {
    std::vector<const SymTuple*> parts;
    Term live;
  };

  struct Env {
    const Combo* combo = nullptr;
    // Grouped context: membership of every input combo in the current group.
    const std::vector<Term>* members = nullptr;
    const std::vector<Combo>* inputs = nullptr;
    std::map<std::string, SymCell>* agg_cache = nullptr;
  };

  struct Row {
    std::vector<SymCell> cells;
    std::vector<SymCell> keys;
    Term live;
  };

  DatabaseSchema schema;
  EncoderConfig cfg;
  EncodedProblem p;
  std::map<std::string, SymRelation> bases;
  std::map<std::string, int> counters;
  Section section = Section::Integrity;
  std::string prefix = "c";

  Impl(const DatabaseSchema& s, EncoderConfig c) : schema(s), cfg(c) {
    if (cfg.bound < 1) throw std::invalid_argument("bound must be at least 1");
    if (cfg.mode == CompareMode::Ordered) throw EncodingUnsupported("ordered comparison", "only bag and set comparison are encoded");
    p.bound = cfg.bound;
    p.mode = cfg.mode;
    for (const auto& table : schema.tables) {
      BaseTableVars vars{table.name, table.columns, {}};
      SymRelation rel;
      for (const auto& col : table.columns) {
        rel.columns.push_back(col.name);
        rel.types.push_back(col.type);
      }
      for (int r = 0; r < cfg.bound; ++r) {
        const std::string row_tag = symbol(table.name) + "_" + std::to_string(r);
        BaseRowVars rv;
        rv.del = "del_" + row_tag;
        p.free_vars.emplace_back(rv.del, Sort::Bool);
        SymTuple t;
        t.live = S::not_(S::var(rv.del, Sort::Bool));
        for (const auto& col : table.columns) {
          BaseCellVars cv{"t_" + row_tag + "_" + symbol(col.name), "null_" + row_tag + "_" + symbol(col.name)};
          p.free_vars.emplace_back(cv.value, sort_of(col.type));
          p.free_vars.emplace_back(cv.null, Sort::Bool);
          t.cells.push_back(SymCell{S::var(cv.value, sort_of(col.type)), S::var(cv.null, Sort::Bool), col.type});
          rv.cells.push_back(std::move(cv));
        }
        rel.tuples.push_back(std::move(t));
        vars.rows.push_back(std::move(rv));
      }
      bases.emplace(table.name, std::move(rel));
      p.tables.push_back(std::move(vars));
    }
  }

  void add(Term t) {
    if (S::is_true(t)) return;
    p.assertions.push_back({section, std::move(t)});
  }

  std::string fresh_name(const std::string& stem) { return prefix + "_" + stem + "_" + std::to_string(counters[prefix + stem]++); }

  Term fresh(const std::string& stem, const Term& value, bool asserted) {
    const std::string name = fresh_name(stem);
    p.definitions.push_back({name, value->sort, value, section, asserted});
    return S::var(name, value->sort);
  }

  Term define(const std::string& stem, const Term& value) {
    if (S::is_const(value) || value->op == S::Op::Var) return value;
    return fresh(stem, value, true);
  }

  SymCell define_cell(const std::string& stem, const SymCell& c) {
    return SymCell{define(stem, c.value), define(stem + "n", c.null), c.type};
  }

  const SymRelation& base(const std::string& table) const {
    const auto it = bases.find(upper(table));
    if (it == bases.end()) throw std::invalid_argument("unknown table " + table);
    return it->second;
  }

  // ---- integrity and constraints ----

  void encode_integrity() {
    section = Section::Integrity;
    for (const auto& table : schema.tables) {
      const auto& rel = bases.at(table.name);
      const auto n = rel.tuples.size();
      std::vector<std::size_t> pk;
      for (const auto& c : table.primary_key) pk.push_back(*table.column_index(c));
      for (std::size_t r = 0; r < n; ++r) {
        const auto& t = rel.tuples[r];
        for (std::size_t c : pk) add(S::implies(t.live, S::not_(t.cells[c].null)));
      }
      if (!pk.empty()) {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j) {
            std::vector<Term> same;
            for (std::size_t c : pk) same.push_back(S::eq(rel.tuples[i].cells[c].value, rel.tuples[j].cells[c].value));
            add(S::implies(S::and_(rel.tuples[i].live, rel.tuples[j].live), S::not_(S::and_(std::move(same)))));
          }
      }
      for (const auto& fk : table.foreign_keys) {
        const std::size_t src = *table.column_index(fk.column);
        const auto& target_schema = schema.at(fk.ref_table);
        const std::size_t dst = *target_schema.column_index(fk.ref_column);
        const auto& target = bases.at(target_schema.name);
        for (const auto& t : rel.tuples) {
          std::vector<Term> options;
          for (const auto& u : target.tuples)
            options.push_back(S::and_({u.live, S::not_(u.cells[dst].null), S::eq(t.cells[src].value, u.cells[dst].value)}));
          add(S::implies(S::and_(t.live, S::not_(t.cells[src].null)), S::or_(std::move(options))));
        }
      }
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (table.columns[c].type != ColumnType::Date) continue;
        for (const auto& t : rel.tuples)
          add(S::implies(S::not_(t.cells[c].null),
                         S::and_(S::le(S::integer(0), t.cells[c].value), S::le(t.cells[c].value, S::integer(kMaxDateDays)))));
      }
      if (cfg.symmetry_breaking)
        for (std::size_t r = 0; r + 1 < n; ++r) add(S::implies(S::not_(rel.tuples[r].live), S::not_(rel.tuples[r + 1].live)));
    }
  }

  std::size_t column_of(const std::string& table, const std::string& column) const {
    const auto& t = schema.at(table);
    const auto idx = t.column_index(column);
    if (!idx) throw std::invalid_argument("constraint on unknown column " + table + "." + column);
    return *idx;
  }

  void encode_constraints(const ConstraintSet& constraints) {
    section = Section::Constraints;
    for (const auto& mc : constraints) {
      if (mc.status != Status::Accepted) continue;
      const auto& rel = base(mc.table());
      std::visit(
          [&](const auto& c) {
            using C = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<C, RangeConstraint>) {
              const std::size_t k = column_of(c.table, c.column);
              const ColumnType type = rel.types[k];
              for (const auto& t : rel.tuples) {
                std::vector<Term> bounds;
                if (c.min) bounds.push_back(S::le(bound_term(*c.min, type, true), t.cells[k].value));
                if (c.max) bounds.push_back(S::le(t.cells[k].value, bound_term(*c.max, type, false)));
                add(S::implies(S::and_(t.live, S::not_(t.cells[k].null)), S::and_(std::move(bounds))));
              }
            } else if constexpr (std::is_same_v<C, CategoricalConstraint>) {
              const std::size_t k = column_of(c.table, c.column);
              for (const auto& t : rel.tuples) {
                std::vector<Term> options;
                for (const auto& v : c.values) {
                  if (v.is_null()) continue;
                  options.push_back(S::eq(t.cells[k].value, literal_term(v, rel.types[k], p.dictionary)));
                }
                add(S::implies(S::and_(t.live, S::not_(t.cells[k].null)), S::or_(std::move(options))));
              }
            } else if constexpr (std::is_same_v<C, NotNullConstraint>) {
              const std::size_t k = column_of(c.table, c.column);
              for (const auto& t : rel.tuples) add(S::implies(t.live, S::not_(t.cells[k].null)));
            } else if constexpr (std::is_same_v<C, FdConstraint>) {
              const std::size_t a = column_of(c.table, c.determinant);
              const std::size_t b = column_of(c.table, c.dependent);
              for (std::size_t i = 0; i < rel.tuples.size(); ++i)
                for (std::size_t j = 0; j < rel.tuples.size(); ++j) {
                  if (i == j) continue;
                  const auto& ti = rel.tuples[i];
                  const auto& tj = rel.tuples[j];
                  add(S::implies(S::and_({ti.live, tj.live, cell_equal(ti.cells[a], tj.cells[a])}),
                                 cell_equal(ti.cells[b], tj.cells[b])));
                }
            } else if constexpr (std::is_same_v<C, OrderingConstraint>) {
              const std::size_t a = column_of(c.table, c.left);
              const std::size_t b = column_of(c.table, c.right);
              for (const auto& t : rel.tuples) {
                const Term rel_term = c.op == OrderOp::Le ? S::le(t.cells[a].value, t.cells[b].value)
                                                          : S::ge(t.cells[a].value, t.cells[b].value);
                add(S::implies(S::and_({t.live, S::not_(t.cells[a].null), S::not_(t.cells[b].null)}), rel_term));
              }
            }
          },
          mc.body);
    }
  }

  static Term bound_term(const Rational& v, ColumnType type, bool lower) {
    if (type == ColumnType::Real) return S::real(v);
    const BigInt num = boost::multiprecision::numerator(v);
    const BigInt den = boost::multiprecision::denominator(v);
    BigInt q = num / den;
    if (num % den != 0) {
      // round inwards: ceil for a lower bound, floor for an upper bound
      if (lower && num > 0) ++q;
      if (!lower && num < 0) --q;
    }
    return S::integer(q);
  }

  // ---- expressions ----

  SymCell eval(const Expr& e, const Env& env) {
    switch (e.kind) {
      case ExprKind::Literal:
        return SymCell{literal_term(e.literal, e.type, p.dictionary), S::boolean(e.literal.is_null()), e.type};
      case ExprKind::Column: {
        if (!env.combo || e.column.source >= env.combo->parts.size())
          throw EncodingUnsupported("column reference", "reference to a source that is not joined yet");
        SymCell c = env.combo->parts[e.column.source]->cells[e.column.column];
        return c;
      }
      case ExprKind::CastReal: {
        SymCell c = eval(e.args[0], env);
        return SymCell{S::to_real(c.value), c.null, ColumnType::Real};
      }
      case ExprKind::Arith: return arith(e, env);
      case ExprKind::Aggregate: return aggregate(e, env);
    }
    throw std::logic_error("unhandled expression");
  }

  SymCell arith(const Expr& e, const Env& env) {
    const SymCell a = eval(e.args[0], env);
    const SymCell b = eval(e.args[1], env);
    Term null = S::or_(a.null, b.null);
    switch (e.op) {
      case ArithOp::Add: return {S::add(a.value, b.value), null, e.type};
      case ArithOp::Sub: return {S::sub(a.value, b.value), null, e.type};
      case ArithOp::Mul: return {S::mul(a.value, b.value), null, e.type};
      case ArithOp::Div: break;
    }
    const bool integral = e.type == ColumnType::Integer && a.value->sort == Sort::Int && b.value->sort == Sort::Int;
    auto divide_by = [&](const Term& num, const Term& den) {
      return integral ? truncating_div(num, den) : S::div_real(num, den);
    };
    const Expr& divisor = e.args[1];
    null = S::or_(null, S::eq(b.value, S::number(0, b.value->sort)));
    // A COUNT divisor ranges over 0..n; splitting on its value keeps the encoding linear.
    if (divisor.kind == ExprKind::Aggregate && (divisor.agg == AggFunc::Count || divisor.agg == AggFunc::CountStar) &&
        env.inputs && !S::is_const(b.value)) {
      Term value = S::number(0, integral ? Sort::Int : Sort::Real);
      for (std::size_t k = env.inputs->size(); k >= 1; --k)
        value = S::ite(S::eq(b.value, S::integer(BigInt(k))), divide_by(a.value, S::integer(BigInt(k))), value);
      return {value, null, e.type};
    }
    return {divide_by(a.value, b.value), null, e.type};
  }

  SymCell aggregate(const Expr& e, const Env& env) {
    if (!env.members) throw EncodingUnsupported("aggregate", "aggregate outside of a grouped query");
    const std::string key = render_expr(e);
    if (env.agg_cache) {
      if (const auto it = env.agg_cache->find(key); it != env.agg_cache->end()) return it->second;
    }
    const auto& members = *env.members;
    const auto& inputs = *env.inputs;
    std::vector<SymCell> args;
    std::vector<Term> present;  // member with a non-NULL argument
    if (e.agg != AggFunc::CountStar) {
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        args.push_back(eval(e.args[0], Env{&inputs[i], nullptr, nullptr, nullptr}));
        present.push_back(S::and_(members[i], S::not_(args.back().null)));
      }
    }
    auto count_of = [&](const std::vector<Term>& flags) {
      std::vector<Term> terms;
      for (const auto& f : flags) terms.push_back(S::ite(f, S::integer(1), S::integer(0)));
      return S::add(std::move(terms));
    };
    SymCell out;
    out.type = e.type;
    switch (e.agg) {
      case AggFunc::CountStar:
        out.value = define("cnt", count_of(members));
        out.null = S::boolean(false);
        break;
      case AggFunc::Count:
        out.value = define("cnt", count_of(present));
        out.null = S::boolean(false);
        break;
      case AggFunc::Sum:
      case AggFunc::Avg: {
        std::vector<Term> terms;
        const Sort s = e.agg == AggFunc::Avg ? Sort::Real : sort_of(e.type);
        for (std::size_t i = 0; i < args.size(); ++i)
          terms.push_back(S::ite(present[i], args[i].value, S::number(0, args[i].value->sort)));
        Term sum = define("sum", s == Sort::Real ? S::to_real(S::add(std::move(terms))) : S::add(std::move(terms)));
        const Term none = define("none", S::not_(S::or_(present)));
        if (e.agg == AggFunc::Sum) {
          out.value = sum;
        } else {
          const Term cnt = define("cnt", count_of(present));
          Term value = S::real(0);
          for (std::size_t k = inputs.size(); k >= 1; --k)
            value = S::ite(S::eq(cnt, S::integer(BigInt(k))), S::div_real(sum, S::real(Rational(static_cast<long long>(k)))), value);
          out.value = define("avg", value);
        }
        out.null = none;
        break;
      }
      case AggFunc::Min:
      case AggFunc::Max: {
        if (e.args[0].type == ColumnType::Text)
          throw EncodingUnsupported("MIN/MAX on text", "text codes do not preserve string order");
        Term acc = S::number(0, sort_of(e.args[0].type));
        Term empty = S::boolean(true);
        for (std::size_t i = 0; i < args.size(); ++i) {
          const Term better = e.agg == AggFunc::Min ? S::lt(args[i].value, acc) : S::gt(args[i].value, acc);
          const Term take = S::and_(present[i], S::or_(empty, better));
          acc = define("ext", S::ite(take, args[i].value, acc));
          empty = define("ext_empty", S::and_(empty, S::not_(present[i])));
        }
        out.value = acc;
        out.null = empty;
        break;
      }
    }
    if (env.agg_cache) env.agg_cache->emplace(key, out);
    return out;
  }

  // ---- predicates ----

  Tri compare(CmpOp op, const SymCell& a, const SymCell& b) {
    if (op != CmpOp::Eq && op != CmpOp::Ne && (a.type == ColumnType::Text || b.type == ColumnType::Text))
      throw EncodingUnsupported("text ordering", "ordered comparison of text values");
    const Term known = S::and_(S::not_(a.null), S::not_(b.null));
    Term r;
    switch (op) {
      case CmpOp::Eq: r = S::eq(a.value, b.value); break;
      case CmpOp::Ne: r = S::not_(S::eq(a.value, b.value)); break;
      case CmpOp::Lt: r = S::lt(a.value, b.value); break;
      case CmpOp::Le: r = S::le(a.value, b.value); break;
      case CmpOp::Gt: r = S::gt(a.value, b.value); break;
      case CmpOp::Ge: r = S::ge(a.value, b.value); break;
    }
    return {S::and_(known, r), S::and_(known, S::not_(r))};
  }

  Tri pred(const Pred& pr, const Env& env) {
    switch (pr.kind) {
      case PredKind::Compare: return compare(pr.op, eval(pr.operands[0], env), eval(pr.operands[1], env));
      case PredKind::Between: {
        const SymCell x = eval(pr.operands[0], env);
        const Tri lo = compare(CmpOp::Ge, x, eval(pr.operands[1], env));
        const Tri hi = compare(CmpOp::Le, x, eval(pr.operands[2], env));
        const Tri r{S::and_(lo.t, hi.t), S::or_(lo.f, hi.f)};
        return pr.negated ? tri_not(r) : r;
      }
      case PredKind::InList: {
        const SymCell x = eval(pr.operands[0], env);
        std::vector<Term> ts, fs;
        for (std::size_t i = 1; i < pr.operands.size(); ++i) {
          const Tri c = compare(CmpOp::Eq, x, eval(pr.operands[i], env));
          ts.push_back(c.t);
          fs.push_back(c.f);
        }
        const Tri r{S::or_(std::move(ts)), S::and_(std::move(fs))};
        return pr.negated ? tri_not(r) : r;
      }
      case PredKind::IsNull: {
        const SymCell x = eval(pr.operands[0], env);
        const Tri r{x.null, S::not_(x.null)};
        return pr.negated ? tri_not(r) : r;
      }
      case PredKind::And: {
        std::vector<Term> ts, fs;
        for (const auto& c : pr.children) {
          const Tri r = pred(c, env);
          ts.push_back(r.t);
          fs.push_back(r.f);
        }
        return {S::and_(std::move(ts)), S::or_(std::move(fs))};
      }
      case PredKind::Or: {
        std::vector<Term> ts, fs;
        for (const auto& c : pr.children) {
          const Tri r = pred(c, env);
          ts.push_back(r.t);
          fs.push_back(r.f);
        }
        return {S::or_(std::move(ts)), S::and_(std::move(fs))};
      }
      case PredKind::Not: return tri_not(pred(pr.children[0], env));
    }
    throw std::logic_error("unhandled predicate");
  }

  // ---- query blocks ----

  SymRelation block(const Query& q, bool top) {
    std::deque<SymRelation> derived;
    std::vector<const SymRelation*> sources;
    for (const auto& item : q.from) {
      if (item.is_derived()) {
        derived.push_back(block(*item.derived, false));
        sources.push_back(&derived.back());
      } else {
        sources.push_back(&base(item.table));
      }
    }

    std::vector<Combo> combos{Combo{{}, S::boolean(true)}};
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const std::size_t size = combos.size() * sources[s]->tuples.size();
      if (size > cfg.cardinality_ceiling)
        throw EncodingUnsupported("cardinality ceiling",
                                  "join of " + std::to_string(size) + " tuples exceeds " + std::to_string(cfg.cardinality_ceiling));
      std::vector<Combo> next;
      next.reserve(size);
      for (const auto& c : combos) {
        for (const auto& t : sources[s]->tuples) {
          Combo n{c.parts, S::and_(c.live, t.live)};
          n.parts.push_back(&t);
          if (s < q.join_conditions.size() && q.join_conditions[s])
            n.live = S::and_(n.live, pred(*q.join_conditions[s], Env{&n}).t);
          next.push_back(std::move(n));
        }
      }
      combos = std::move(next);
    }
    if (q.where)
      for (auto& c : combos) c.live = S::and_(c.live, pred(*q.where, Env{&c}).t);

    std::vector<Row> rows;
    if (!q.aggregated) {
      for (const auto& c : combos) {
        Row r;
        for (const auto& item : q.select) r.cells.push_back(eval(item.expr, Env{&c}));
        for (const auto& o : q.order_by) r.keys.push_back(eval(o.expr, Env{&c}));
        r.live = c.live;
        rows.push_back(std::move(r));
      }
    } else {
      rows = group(q, combos);
    }
    return finish_block(q, std::move(rows), top);
  }

  std::vector<Row> group(const Query& q, std::vector<Combo>& combos) {
    const std::size_t n = combos.size();
    for (auto& c : combos) c.live = define("live", c.live);
    std::vector<Row> rows;
    auto emit = [&](std::size_t rep, const std::vector<Term>& members, Term live) {
      std::map<std::string, SymCell> cache;
      const Env env{&combos[rep], &members, &combos, &cache};
      Row r;
      for (const auto& item : q.select) r.cells.push_back(eval(item.expr, env));
      for (const auto& o : q.order_by) r.keys.push_back(eval(o.expr, env));
      r.live = std::move(live);
      rows.push_back(std::move(r));
    };
    if (q.group_by.empty()) {
      std::vector<Term> members;
      for (const auto& c : combos) members.push_back(c.live);
      emit(0, members, S::boolean(true));
      return rows;
    }
    std::vector<std::vector<SymCell>> keys(n);
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& g : q.group_by) keys[i].push_back(eval(g, Env{&combos[i]}));
    // same[i][j] for i < j: equal grouping keys
    std::vector<std::vector<Term>> same(n, std::vector<Term>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) same[i][j] = same[j][i] = define("same", cells_equal(keys[i], keys[j]));
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Term> members(n);
      std::vector<Term> earlier;
      for (std::size_t i = 0; i < n; ++i) {
        members[i] = i == j ? combos[j].live : S::and_(combos[i].live, same[i][j]);
        if (i < j) earlier.push_back(S::not_(members[i]));
      }
      earlier.push_back(combos[j].live);
      emit(j, members, define("rep", S::and_(std::move(earlier))));
    }
    return rows;
  }

  SymRelation finish_block(const Query& q, std::vector<Row> rows, bool top) {
    SymRelation out;
    out.columns = q.output_names();
    out.types = q.output_types();

    // Output tuples pinned by guarded implications.
    std::vector<std::vector<SymCell>> keys;
    for (auto& r : rows) {
      if (S::is_false(r.live)) continue;
      SymTuple t;
      std::vector<Term> pins;
      for (const auto& c : r.cells) {
        SymCell oc{fresh("c", c.value, false), S::is_const(c.null) ? c.null : fresh("n", c.null, false), c.type};
        pins.push_back(S::eq(oc.value, c.value));
        if (!S::is_const(c.null)) pins.push_back(S::eq(oc.null, c.null));
        t.cells.push_back(std::move(oc));
      }
      const Term del = fresh("del", S::not_(r.live), false);
      pins.push_back(S::not_(del));
      add(S::implies(r.live, S::and_(std::move(pins))));
      add(S::implies(S::not_(r.live), del));
      t.live = S::not_(del);
      out.tuples.push_back(std::move(t));
      std::vector<SymCell> k;
      for (const auto& key : r.keys) k.push_back(define_cell("key", key));
      keys.push_back(std::move(k));
    }

    const bool need_distinct = q.distinct && !(top && cfg.mode == CompareMode::Set && !q.limit);
    if (need_distinct) {
      for (std::size_t i = 0; i < out.tuples.size(); ++i) {
        std::vector<Term> parts{out.tuples[i].live};
        for (std::size_t j = 0; j < i; ++j)
          parts.push_back(S::not_(S::and_(out.tuples[j].live, cells_equal(out.tuples[j].cells, out.tuples[i].cells))));
        out.tuples[i].live = define("dist", S::and_(std::move(parts)));
      }
    }

    if (q.limit) {
      if (q.order_by.empty()) throw EncodingUnsupported("LIMIT without ORDER BY", "the kept rows depend on physical order");
      for (const auto& o : q.order_by)
        if (o.expr.type == ColumnType::Text) throw EncodingUnsupported("ORDER BY on text", "text codes do not preserve string order");
      apply_limit(q, out, keys, static_cast<std::size_t>(*q.limit));
    }
    return out;
  }

  void apply_limit(const Query& q, SymRelation& out, const std::vector<std::vector<SymCell>>& keys, std::size_t limit) {
    const std::size_t n = out.tuples.size();
    if (limit >= n) return;
    if (limit == 0) {
      for (auto& t : out.tuples) t.live = S::boolean(false);
      return;
    }
    auto before = [&](std::size_t a, std::size_t b) {
      Term result = S::boolean(false);
      for (std::size_t k = q.order_by.size(); k-- > 0;) {
        const SymCell& x = keys[a][k];
        const SymCell& y = keys[b][k];
        const Term both = S::and_(S::not_(x.null), S::not_(y.null));
        const Term strictly = q.order_by[k].descending
                                  ? S::or_(S::and_(S::not_(x.null), y.null), S::and_(both, S::gt(x.value, y.value)))
                                  : S::or_(S::and_(x.null, S::not_(y.null)), S::and_(both, S::lt(x.value, y.value)));
        result = S::or_(strictly, S::and_(cell_equal(x, y), result));
      }
      return result;
    };
    std::vector<Term> keep(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Term> rank_terms, tie_terms;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        rank_terms.push_back(S::ite(S::and_(out.tuples[j].live, before(j, i)), S::integer(1), S::integer(0)));
        tie_terms.push_back(S::ite(S::and_(out.tuples[j].live, cells_equal(keys[j], keys[i])), S::integer(1), S::integer(0)));
      }
      const Term rank = define("rank", S::add(std::move(rank_terms)));
      const Term ties = define("ties", S::add(std::move(tie_terms)));
      const Term lim = S::integer(BigInt(limit));
      keep[i] = define("keep", S::and_(out.tuples[i].live, S::lt(rank, lim)));
      add(S::implies(keep[i], S::le(S::add({rank, ties, S::integer(1)}), lim)));
    }
    for (std::size_t i = 0; i < n; ++i) out.tuples[i].live = keep[i];
    p.tie_limited = true;
  }

  SymRelation encode_query(const Query& q, Section s) {
    section = s;
    prefix = s == Section::Query1 ? "q1" : s == Section::Query2 ? "q2" : "q";
    return block(q, true);
  }

  Term nonequivalence(const SymRelation& a, const SymRelation& b) {
    if (a.types.size() != b.types.size()) return S::boolean(true);
    auto matches = [&](const SymTuple& x, const SymTuple& y) { return S::and_(y.live, cells_equal(x.cells, y.cells)); };
    std::vector<Term> witnesses;
    if (cfg.mode == CompareMode::Set) {
      auto missing = [&](const SymRelation& from, const SymRelation& in) {
        for (const auto& x : from.tuples) {
          std::vector<Term> absent{x.live};
          for (const auto& y : in.tuples) absent.push_back(S::not_(matches(x, y)));
          witnesses.push_back(S::and_(std::move(absent)));
        }
      };
      missing(a, b);
      missing(b, a);
    } else {
      auto count = [&](const SymTuple& x, const SymRelation& in) {
        std::vector<Term> terms;
        for (const auto& y : in.tuples) terms.push_back(S::ite(matches(x, y), S::integer(1), S::integer(0)));
        return S::add(std::move(terms));
      };
      for (const auto* rel : {&a, &b})
        for (const auto& x : rel->tuples) witnesses.push_back(S::and_(x.live, S::not_(S::eq(count(x, a), count(x, b)))));
    }
    return S::or_(std::move(witnesses));
  }
};

Encoder::Encoder(const DatabaseSchema& schema, EncoderConfig config) : impl_(std::make_shared<Impl>(schema, config)) {}

void Encoder::encode_integrity() { impl_->encode_integrity(); }
void Encoder::encode_constraints(const ConstraintSet& constraints) { impl_->encode_constraints(constraints); }
SymRelation Encoder::encode_query(const Query& query, Section section) { return impl_->encode_query(query, section); }

smt::Term Encoder::encode_nonequivalence(const SymRelation& a, const SymRelation& b) {
  impl_->section = Section::NonEquivalence;
  impl_->prefix = "neq";
  return impl_->nonequivalence(a, b);
}

void Encoder::assert_term(Section section, smt::Term term) {
  impl_->section = section;
  impl_->add(std::move(term));
}

const SymRelation& Encoder::base(const std::string& table) const { return impl_->base(table); }

EncodedProblem Encoder::finish() {
  EncodedProblem p = impl_->p;
  for (const auto& d : p.definitions)
    if (S::is_nonlinear(d.value)) p.nonlinear = true;
  for (const auto& a : p.assertions)
    if (!p.nonlinear && S::is_nonlinear(a.term)) p.nonlinear = true;
  return p;
}

EncodedProblem encode_pair(const Query& q1, const Query& q2, const DatabaseSchema& schema, const ConstraintSet& constraints,
                           const EncoderConfig& config) {
  Encoder enc(schema, config);
  enc.encode_integrity();
  // Queries first so their text literals get the same codes with or without constraints.
  SymRelation o1 = enc.encode_query(q1, Section::Query1);
  SymRelation o2 = enc.encode_query(q2, Section::Query2);
  enc.encode_constraints(constraints);
  enc.assert_term(Section::NonEquivalence, enc.encode_nonequivalence(o1, o2));
  EncodedProblem p = enc.finish();
  p.out1 = std::move(o1);
  p.out2 = std::move(o2);
  return p;
}

std::vector<smt::Term> EncodedProblem::section(Section s) const {
  std::vector<Term> out;
  for (const auto& d : definitions)
    if (d.section == s && d.asserted) out.push_back(S::eq(S::var(d.name, d.sort), d.value));
  for (const auto& a : assertions)
    if (a.section == s) out.push_back(a.term);
  return out;
}

std::size_t EncodedProblem::assertion_count() const {
  std::size_t n = assertions.size();
  for (const auto& d : definitions) n += d.asserted ? 1 : 0;
  return n;
}

std::string EncodedProblem::logic() const { return nonlinear ? "QF_NIRA" : "QF_LIRA"; }

std::string EncodedProblem::to_smtlib() const {
  std::ostringstream out;
  out << "; bound=" << bound << " mode=" << sqlbound::to_string(mode) << (tie_limited ? " tie_limited" : "") << '\n';
  out << "(set-option :produce-models true)\n";
  out << "(set-logic " << logic() << ")\n";
  for (const auto& [name, sort] : free_vars) out << "(declare-fun " << name << " () " << S::to_string(sort) << ")\n";
  for (const auto& d : definitions) out << "(declare-fun " << d.name << " () " << S::to_string(d.sort) << ")\n";
  for (Section s : {Section::Integrity, Section::Constraints, Section::Query1, Section::Query2, Section::NonEquivalence}) {
    out << "; " << sqlbound::to_string(s) << '\n';
    for (const auto& t : section(s)) out << "(assert " << S::to_smtlib(t) << ")\n";
  }
  out << "(check-sat)\n(get-model)\n";
  return out.str();
}

void extend_assignment(const EncodedProblem& problem, smt::Assignment& assignment) {
  for (const auto& d : problem.definitions) assignment[d.name] = S::evaluate(d.value, assignment);
}

smt::Assignment assignment_for(EncodedProblem& problem, const DatabaseInstance& db) {
  smt::Assignment a;
  for (const auto& tv : problem.tables) {
    const auto& rows = db.rows(tv.table);
    if (rows.size() > tv.rows.size())
      throw std::invalid_argument("table " + tv.table + " has " + std::to_string(rows.size()) + " rows, above the bound");
    for (std::size_t r = 0; r < tv.rows.size(); ++r) {
      const auto& rv = tv.rows[r];
      const bool present = r < rows.size();
      a[rv.del] = !present;
      for (std::size_t c = 0; c < tv.columns.size(); ++c) {
        const Value v = present ? rows[r][c] : Value::null();
        a[rv.cells[c].null] = v.is_null();
        Rational payload = 0;
        switch (v.kind()) {
          case Value::Kind::Null: break;
          case Value::Kind::Integer:
          case Value::Kind::Real: payload = v.number(); break;
          case Value::Kind::Date: payload = Rational(v.days()); break;
          case Value::Kind::Text: payload = Rational(problem.dictionary.code(v.str())); break;
        }
        a[rv.cells[c].value] = payload;
      }
    }
  }
  extend_assignment(problem, a);
  return a;
}

namespace {

Value decode_value(const EncodedProblem& problem, ColumnType type, const Rational& payload) {
  switch (type) {
    case ColumnType::Integer:
      if (boost::multiprecision::denominator(payload) != 1) return Value::real(payload);
      return Value::integer(boost::multiprecision::numerator(payload));
    case ColumnType::Real: return Value::real(payload);
    case ColumnType::Date: {
      const BigInt d = boost::multiprecision::numerator(payload);
      if (d < 0 || d > kMaxDateDays) throw std::out_of_range("date code " + d.str() + " outside the calendar");
      return Value::date(static_cast<std::int64_t>(d));
    }
    case ColumnType::Text: return Value::text(problem.dictionary.decode(boost::multiprecision::numerator(payload)));
  }
  return Value::null();
}

}  // namespace

DatabaseInstance decode_instance(const EncodedProblem& problem, const DatabaseSchema& schema, const smt::Assignment& a) {
  DatabaseInstance db = DatabaseInstance::empty(schema);
  auto get_bool = [&](const std::string& name) {
    const auto it = a.find(name);
    return it != a.end() && std::get<bool>(it->second);
  };
  auto get_num = [&](const std::string& name) {
    const auto it = a.find(name);
    return it == a.end() ? Rational(0) : std::get<Rational>(it->second);
  };
  for (const auto& tv : problem.tables) {
    auto& rows = db.rows(tv.table);
    for (const auto& rv : tv.rows) {
      if (get_bool(rv.del)) continue;
      Row row;
      for (std::size_t c = 0; c < tv.columns.size(); ++c) {
        if (get_bool(rv.cells[c].null))
          row.push_back(Value::null());
        else
          row.push_back(decode_value(problem, tv.columns[c].type, get_num(rv.cells[c].value)));
      }
      rows.push_back(std::move(row));
    }
  }
  return db;
}

ResultRelation decode_relation(const EncodedProblem& problem, const SymRelation& r, const smt::Assignment& a) {
  ResultRelation out;
  out.columns = r.columns;
  for (const auto& t : r.tuples) {
    if (!S::evaluate_bool(t.live, a)) continue;
    Row row;
    for (const auto& c : t.cells) {
      if (S::evaluate_bool(c.null, a))
        row.push_back(Value::null());
      else
        row.push_back(decode_value(problem, c.type, S::evaluate_number(c.value, a)));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace sqlbound
