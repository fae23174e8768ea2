#include "sqlbound/term.hpp"

#include <gtest/gtest.h>

using namespace sqlbound;
namespace S = sqlbound::smt;

TEST(Term, ConstantFolding) {
  const auto x = S::var("x", S::Sort::Int);
  EXPECT_TRUE(S::is_true(S::and_({})));
  EXPECT_TRUE(S::is_false(S::or_({})));
  EXPECT_TRUE(S::is_false(S::and_(S::boolean(false), S::eq(x, S::integer(1)))));
  EXPECT_TRUE(S::is_true(S::or_(S::boolean(true), S::eq(x, S::integer(1)))));
  EXPECT_TRUE(S::is_true(S::not_(S::boolean(false))));
  EXPECT_TRUE(S::is_true(S::le(S::integer(2), S::integer(3))));
  EXPECT_TRUE(S::is_true(S::implies(S::boolean(false), S::eq(x, S::integer(0)))));
}

TEST(Term, SmtlibPrinting) {
  EXPECT_EQ(S::to_smtlib(S::integer(-3)), "(- 3)");
  EXPECT_EQ(S::to_smtlib(S::real(Rational(1, 3))), "(/ 1.0 3.0)");
  EXPECT_EQ(S::to_smtlib(S::real(Rational(-5, 2))), "(- (/ 5.0 2.0))");
  EXPECT_EQ(S::to_smtlib(S::real(Rational(2))), "2.0");
  const auto x = S::var("x", S::Sort::Int), y = S::var("y", S::Sort::Int);
  EXPECT_EQ(S::to_smtlib(S::lt(x, y)), "(< x y)");
  EXPECT_EQ(S::to_smtlib(S::ite(S::var("b", S::Sort::Bool), x, y)), "(ite b x y)");
}

TEST(Term, EvaluateUsesEuclideanDivision) {
  const auto x = S::var("x", S::Sort::Int), y = S::var("y", S::Sort::Int);
  const S::Assignment a{{"x", Rational(-7)}, {"y", Rational(2)}};
  EXPECT_EQ(S::evaluate_number(S::div_int(x, y), a), Rational(-4));
  const S::Assignment b{{"x", Rational(-7)}, {"y", Rational(-2)}};
  EXPECT_EQ(S::evaluate_number(S::div_int(x, y), b), Rational(4));
  const S::Assignment c{{"x", Rational(7)}, {"y", Rational(-2)}};
  EXPECT_EQ(S::evaluate_number(S::div_int(x, y), c), Rational(-3));
  EXPECT_EQ(S::evaluate_number(S::div_real(S::to_real(x), S::to_real(y)), a), Rational(-7, 2));
  EXPECT_EQ(S::evaluate_number(S::add({x, y, S::integer(1)}), a), Rational(-4));
  EXPECT_TRUE(S::evaluate_bool(S::and_(S::lt(x, y), S::not_(S::eq(x, y))), a));
}

TEST(Term, UnassignedVariablesTakeDefaults) {
  EXPECT_EQ(S::evaluate_number(S::var("missing", S::Sort::Int), {}), Rational(0));
  EXPECT_FALSE(S::evaluate_bool(S::var("flag", S::Sort::Bool), {}));
}

TEST(Term, NonlinearityDetection) {
  const auto x = S::var("x", S::Sort::Int), y = S::var("y", S::Sort::Int);
  EXPECT_FALSE(S::is_nonlinear(S::mul(S::integer(3), x)));
  EXPECT_TRUE(S::is_nonlinear(S::mul(x, y)));
  EXPECT_TRUE(S::is_nonlinear(S::div_int(x, y)));
  EXPECT_FALSE(S::is_nonlinear(S::div_int(x, S::integer(2))));
}
