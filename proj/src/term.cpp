#include "sqlbound/term.hpp"

#include <functional>
#include <set>
#include <stdexcept>

namespace sqlbound::smt {

namespace {

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

Term make(Op op, Sort sort, std::vector<Term> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->sort = sort;
  n->args = std::move(args);
  return n;
}

bool is_number(const Term& t) { return t->op == Op::NumConst; }

Sort join_sort(const Term& a, const Term& b) {
  return a->sort == Sort::Real || b->sort == Sort::Real ? Sort::Real : Sort::Int;
}

Term widen(const Term& t, Sort target) { return target == Sort::Real ? to_real(t) : t; }

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// SMT-LIB integer division: a = b*q + r with 0 <= r < |b|.
BigInt euclid_div(const BigInt& a, const BigInt& b) {
  if (b > 0) return floor_div(a, b);
  return -floor_div(a, BigInt(-b));
}

std::string print_integer(const BigInt& v, bool real_sort) {
  std::string digits = (v < 0 ? BigInt(-v) : v).str();
  if (real_sort) digits += ".0";
  return v < 0 ? "(- " + digits + ")" : digits;
}

}  // namespace

std::string_view to_string(Sort s) {
  switch (s) {
    case Sort::Bool: return "Bool";
    case Sort::Int: return "Int";
    case Sort::Real: return "Real";
  }
  return "?";
}

Term var(const std::string& name, Sort sort) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->sort = sort;
  n->name = name;
  return n;
}

Term boolean(bool b) {
  static const Term t = [] {
    auto n = std::make_shared<Node>();
    n->op = Op::BoolConst;
    n->flag = true;
    return Term(n);
  }();
  static const Term f = [] {
    auto n = std::make_shared<Node>();
    n->op = Op::BoolConst;
    n->flag = false;
    return Term(n);
  }();
  return b ? t : f;
}

Term number(const Rational& v, Sort sort) {
  if (sort == Sort::Bool) throw std::invalid_argument("numeric constant of Bool sort");
  if (sort == Sort::Int && denominator(v) != 1) throw std::invalid_argument("non-integral Int constant");
  auto n = std::make_shared<Node>();
  n->op = Op::NumConst;
  n->sort = sort;
  n->number = v;
  return n;
}

Term integer(const BigInt& v) { return number(Rational(v), Sort::Int); }
Term real(const Rational& v) { return number(v, Sort::Real); }

bool is_true(const Term& t) { return t->op == Op::BoolConst && t->flag; }
bool is_false(const Term& t) { return t->op == Op::BoolConst && !t->flag; }
bool is_const(const Term& t) { return t->op == Op::BoolConst || t->op == Op::NumConst; }

Term not_(const Term& a) {
  if (a->op == Op::BoolConst) return boolean(!a->flag);
  if (a->op == Op::Not) return a->args[0];
  return make(Op::Not, Sort::Bool, {a});
}

Term and_(std::vector<Term> args) {
  std::vector<Term> kept;
  for (auto& a : args) {
    if (is_true(a)) continue;
    if (is_false(a)) return boolean(false);
    if (a->op == Op::And)
      kept.insert(kept.end(), a->args.begin(), a->args.end());
    else
      kept.push_back(std::move(a));
  }
  if (kept.empty()) return boolean(true);
  if (kept.size() == 1) return kept[0];
  return make(Op::And, Sort::Bool, std::move(kept));
}

Term or_(std::vector<Term> args) {
  std::vector<Term> kept;
  for (auto& a : args) {
    if (is_false(a)) continue;
    if (is_true(a)) return boolean(true);
    if (a->op == Op::Or)
      kept.insert(kept.end(), a->args.begin(), a->args.end());
    else
      kept.push_back(std::move(a));
  }
  if (kept.empty()) return boolean(false);
  if (kept.size() == 1) return kept[0];
  return make(Op::Or, Sort::Bool, std::move(kept));
}

Term implies(const Term& a, const Term& b) {
  if (is_false(a) || is_true(b)) return boolean(true);
  if (is_true(a)) return b;
  if (is_false(b)) return not_(a);
  return make(Op::Implies, Sort::Bool, {a, b});
}

Term ite(const Term& c, const Term& a, const Term& b) {
  if (is_true(c)) return a;
  if (is_false(c)) return b;
  if (a == b) return a;
  if (a->sort == Sort::Bool) {
    if (is_true(a) && is_false(b)) return c;
    if (is_false(a) && is_true(b)) return not_(c);
    return make(Op::Ite, Sort::Bool, {c, a, b});
  }
  const Sort s = join_sort(a, b);
  return make(Op::Ite, s, {c, widen(a, s), widen(b, s)});
}

Term eq(const Term& a, const Term& b) {
  if (a == b) return boolean(true);
  if (a->sort == Sort::Bool || b->sort == Sort::Bool) {
    if (a->sort != b->sort) throw std::invalid_argument("eq on mismatched sorts");
    if (a->op == Op::BoolConst) return a->flag ? b : not_(b);
    if (b->op == Op::BoolConst) return b->flag ? a : not_(a);
    return make(Op::Eq, Sort::Bool, {a, b});
  }
  if (is_number(a) && is_number(b)) return boolean(a->number == b->number);
  const Sort s = join_sort(a, b);
  return make(Op::Eq, Sort::Bool, {widen(a, s), widen(b, s)});
}

Term lt(const Term& a, const Term& b) {
  if (is_number(a) && is_number(b)) return boolean(a->number < b->number);
  if (a == b) return boolean(false);
  const Sort s = join_sort(a, b);
  return make(Op::Lt, Sort::Bool, {widen(a, s), widen(b, s)});
}

Term le(const Term& a, const Term& b) {
  if (is_number(a) && is_number(b)) return boolean(a->number <= b->number);
  if (a == b) return boolean(true);
  const Sort s = join_sort(a, b);
  return make(Op::Le, Sort::Bool, {widen(a, s), widen(b, s)});
}

Term add(std::vector<Term> args) {
  Sort s = Sort::Int;
  for (const auto& a : args)
    if (a->sort == Sort::Real) s = Sort::Real;
  Rational constant = 0;
  std::vector<Term> kept;
  for (auto& a : args) {
    if (is_number(a)) {
      constant += a->number;
    } else if (a->op == Op::Add) {
      for (const auto& x : a->args) {
        if (is_number(x))
          constant += x->number;
        else
          kept.push_back(widen(x, s));
      }
    } else {
      kept.push_back(widen(a, s));
    }
  }
  if (constant != 0 || kept.empty()) kept.push_back(number(constant, s));
  if (kept.size() == 1) return kept[0];
  return make(Op::Add, s, std::move(kept));
}

Term neg(const Term& a) {
  if (is_number(a)) return number(-a->number, a->sort);
  if (a->op == Op::Neg) return a->args[0];
  return make(Op::Neg, a->sort, {a});
}

Term sub(const Term& a, const Term& b) { return add(a, neg(b)); }

Term mul(const Term& a, const Term& b) {
  const Sort s = join_sort(a, b);
  if (is_number(a) && is_number(b)) return number(a->number * b->number, s);
  for (const auto& [k, x] : {std::pair{a, b}, std::pair{b, a}}) {
    if (!is_number(k)) continue;
    if (k->number == 0) return number(0, s);
    if (k->number == 1) return widen(x, s);
    if (k->number == -1) return neg(widen(x, s));
  }
  return make(Op::Mul, s, {widen(a, s), widen(b, s)});
}

Term div_real(const Term& a, const Term& b) {
  if (is_number(b) && b->number != 0) return mul(to_real(a), real(Rational(1) / b->number));
  return make(Op::DivReal, Sort::Real, {to_real(a), to_real(b)});
}

Term div_int(const Term& a, const Term& b) {
  if (a->sort != Sort::Int || b->sort != Sort::Int) throw std::invalid_argument("div on non-Int operands");
  if (is_number(a) && is_number(b) && b->number != 0)
    return integer(euclid_div(numerator(a->number), numerator(b->number)));
  if (is_number(b) && b->number == 1) return a;
  return make(Op::DivInt, Sort::Int, {a, b});
}

Term to_real(const Term& a) {
  if (a->sort == Sort::Real) return a;
  if (a->sort == Sort::Bool) throw std::invalid_argument("to_real on Bool");
  if (is_number(a)) return real(a->number);
  return make(Op::ToReal, Sort::Real, {a});
}

std::string format_number(const Rational& v, Sort sort) {
  if (denominator(v) == 1) return print_integer(numerator(v), sort == Sort::Real);
  const BigInt p = numerator(v);
  const std::string body = "(/ " + (p < 0 ? BigInt(-p) : p).str() + ".0 " + denominator(v).str() + ".0)";
  return p < 0 ? "(- " + body + ")" : body;
}

std::string to_smtlib(const Term& t) {
  std::string out;
  std::function<void(const Term&)> emit = [&](const Term& n) {
    auto nary = [&](const char* head) {
      out += '(';
      out += head;
      for (const auto& a : n->args) {
        out += ' ';
        emit(a);
      }
      out += ')';
    };
    switch (n->op) {
      case Op::Var: out += n->name; break;
      case Op::BoolConst: out += n->flag ? "true" : "false"; break;
      case Op::NumConst: out += format_number(n->number, n->sort); break;
      case Op::Not: nary("not"); break;
      case Op::And: nary("and"); break;
      case Op::Or: nary("or"); break;
      case Op::Implies: nary("=>"); break;
      case Op::Ite: nary("ite"); break;
      case Op::Eq: nary("="); break;
      case Op::Lt: nary("<"); break;
      case Op::Le: nary("<="); break;
      case Op::Add: nary("+"); break;
      case Op::Mul: nary("*"); break;
      case Op::Neg: nary("-"); break;
      case Op::DivReal: nary("/"); break;
      case Op::DivInt: nary("div"); break;
      case Op::ToReal: nary("to_real"); break;
    }
  };
  emit(t);
  return out;
}

bool is_nonlinear(const Term& t) {
  std::set<const Node*> seen;
  std::function<bool(const Node*)> walk = [&](const Node* n) {
    if (!seen.insert(n).second) return false;
    if ((n->op == Op::Mul && !is_number(n->args[0]) && !is_number(n->args[1])) ||
        ((n->op == Op::DivReal || n->op == Op::DivInt) && !is_number(n->args[1])))
      return true;
    for (const auto& a : n->args)
      if (walk(a.get())) return true;
    return false;
  };
  return walk(t.get());
}

ModelValue evaluate(const Term& t, const Assignment& a) {
  switch (t->op) {
    case Op::Var: {
      const auto it = a.find(t->name);
      if (it != a.end()) return it->second;
      return t->sort == Sort::Bool ? ModelValue(false) : ModelValue(Rational(0));
    }
    case Op::BoolConst: return t->flag;
    case Op::NumConst: return t->number;
    case Op::Not: return !evaluate_bool(t->args[0], a);
    case Op::And:
      for (const auto& x : t->args)
        if (!evaluate_bool(x, a)) return false;
      return true;
    case Op::Or:
      for (const auto& x : t->args)
        if (evaluate_bool(x, a)) return true;
      return false;
    case Op::Implies: return !evaluate_bool(t->args[0], a) || evaluate_bool(t->args[1], a);
    case Op::Ite: return evaluate_bool(t->args[0], a) ? evaluate(t->args[1], a) : evaluate(t->args[2], a);
    case Op::Eq: {
      if (t->args[0]->sort == Sort::Bool) return evaluate_bool(t->args[0], a) == evaluate_bool(t->args[1], a);
      return evaluate_number(t->args[0], a) == evaluate_number(t->args[1], a);
    }
    case Op::Lt: return evaluate_number(t->args[0], a) < evaluate_number(t->args[1], a);
    case Op::Le: return evaluate_number(t->args[0], a) <= evaluate_number(t->args[1], a);
    case Op::Add: {
      Rational s = 0;
      for (const auto& x : t->args) s += evaluate_number(x, a);
      return s;
    }
    case Op::Mul: return evaluate_number(t->args[0], a) * evaluate_number(t->args[1], a);
    case Op::Neg: return Rational(-evaluate_number(t->args[0], a));
    case Op::DivReal: {
      const Rational d = evaluate_number(t->args[1], a);
      if (d == 0) return Rational(0);
      return evaluate_number(t->args[0], a) / d;
    }
    case Op::DivInt: {
      const Rational d = evaluate_number(t->args[1], a);
      if (d == 0) return Rational(0);
      return Rational(euclid_div(numerator(evaluate_number(t->args[0], a)), numerator(d)));
    }
    case Op::ToReal: return evaluate_number(t->args[0], a);
  }
  throw std::logic_error("unhandled term");
}

bool evaluate_bool(const Term& t, const Assignment& a) { return std::get<bool>(evaluate(t, a)); }
Rational evaluate_number(const Term& t, const Assignment& a) { return std::get<Rational>(evaluate(t, a)); }

}  // namespace sqlbound::smt
