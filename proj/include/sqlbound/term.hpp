#pragma once

#include "sqlbound/value.hpp"

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace sqlbound::smt {

enum class Sort { Bool, Int, Real };

std::string_view to_string(Sort s);

enum class Op {
  Var,
  BoolConst,
  NumConst,
  Not,
  And,
  Or,
  Implies,
  Ite,
  Eq,
  Lt,
  Le,
  Add,
  Mul,
  Neg,
  DivReal,
  DivInt,  // SMT-LIB div (Euclidean)
  ToReal
};

struct Node;
using Term = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::BoolConst;
  Sort sort = Sort::Bool;
  std::string name;  // Var
  bool flag = false;  // BoolConst
  Rational number;    // NumConst
  std::vector<Term> args;
};

Term var(const std::string& name, Sort sort);
Term boolean(bool b);
Term integer(const BigInt& v);
Term real(const Rational& v);
/// Constant of the given numeric sort.
Term number(const Rational& v, Sort sort);

bool is_true(const Term& t);
bool is_false(const Term& t);
bool is_const(const Term& t);

Term not_(const Term& a);
Term and_(std::vector<Term> args);
Term or_(std::vector<Term> args);
inline Term and_(const Term& a, const Term& b) { return and_(std::vector<Term>{a, b}); }
inline Term or_(const Term& a, const Term& b) { return or_(std::vector<Term>{a, b}); }
Term implies(const Term& a, const Term& b);
Term ite(const Term& c, const Term& a, const Term& b);
/// Numeric operands of different sorts are widened with to_real.
Term eq(const Term& a, const Term& b);
Term lt(const Term& a, const Term& b);
Term le(const Term& a, const Term& b);
inline Term gt(const Term& a, const Term& b) { return lt(b, a); }
inline Term ge(const Term& a, const Term& b) { return le(b, a); }
Term add(std::vector<Term> args);
inline Term add(const Term& a, const Term& b) { return add(std::vector<Term>{a, b}); }
Term neg(const Term& a);
Term sub(const Term& a, const Term& b);
Term mul(const Term& a, const Term& b);
Term div_real(const Term& a, const Term& b);
Term div_int(const Term& a, const Term& b);
Term to_real(const Term& a);

std::string to_smtlib(const Term& t);
std::string format_number(const Rational& v, Sort sort);

/// True when some multiplication or division has no constant operand.
bool is_nonlinear(const Term& t);

using ModelValue = std::variant<bool, Rational>;
using Assignment = std::map<std::string, ModelValue>;

/// Evaluates under an assignment; unassigned variables read as false / 0.
ModelValue evaluate(const Term& t, const Assignment& a);
bool evaluate_bool(const Term& t, const Assignment& a);
Rational evaluate_number(const Term& t, const Assignment& a);

}  // namespace sqlbound::smt
