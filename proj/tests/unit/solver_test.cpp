#include "sqlbound/solver.hpp"

#include <gtest/gtest.h>

using namespace sqlbound;

namespace {

bool have_z3() { return !find_solver({}).empty(); }

}  // namespace

TEST(ModelParser, HandlesZ3Shapes) {
  const auto m = parse_model(R"((
  (define-fun b () Bool true)
  (define-fun x () Int (- 4))
  (define-fun r () Real (/ 1.0 3.0))
  (define-fun s () Real (- (/ 5.0 2.0)))
  (define-fun f ((x!0 Int)) Int 0)
))");
  EXPECT_EQ(std::get<bool>(m.at("b")), true);
  EXPECT_EQ(std::get<Rational>(m.at("x")), Rational(-4));
  EXPECT_EQ(std::get<Rational>(m.at("r")), Rational(1, 3));
  EXPECT_EQ(std::get<Rational>(m.at("s")), Rational(-5, 2));
  EXPECT_FALSE(m.count("f"));
  const auto legacy = parse_model("(model (define-fun y () Int 7))");
  EXPECT_EQ(std::get<Rational>(legacy.at("y")), Rational(7));
  EXPECT_TRUE(parse_model("").empty());
}

TEST(ModelParser, RejectsGarbage) {
  EXPECT_THROW(parse_model("(define-fun"), ModelParseError);
  EXPECT_THROW(parse_model("(foo bar)"), ModelParseError);
}

TEST(Solver, SatUnsatAndModel) {
  if (!have_z3()) GTEST_SKIP() << "z3 not available";
  const auto sat = run_solver("(declare-fun x () Int)(assert (> x 41))(assert (< x 43))(check-sat)(get-model)", {});
  ASSERT_EQ(sat.status, SolverStatus::Sat) << sat.message;
  EXPECT_EQ(std::get<Rational>(sat.model.at("x")), Rational(42));
  const auto unsat = run_solver("(declare-fun x () Int)(assert (> x 1))(assert (< x 1))(check-sat)(get-model)", {});
  EXPECT_EQ(unsat.status, SolverStatus::Unsat);
}

TEST(Solver, MissingExecutableIsAnError) {
  SolverConfig cfg;
  cfg.z3_path = "/nonexistent/z3";
  const auto r = run_solver("(check-sat)", cfg);
  EXPECT_EQ(r.status, SolverStatus::Error);
  EXPECT_NE(r.message.find("not found"), std::string::npos);
}

TEST(Solver, TimeoutIsReported) {
  if (!have_z3()) GTEST_SKIP() << "z3 not available";
  // Fermat-style cubic with no small solutions keeps nonlinear search busy.
  const std::string hard =
      "(declare-fun a () Int)(declare-fun b () Int)(declare-fun c () Int)"
      "(assert (> a 0))(assert (> b 0))(assert (> c 0))"
      "(assert (= (+ (* a a a) (* b b b)) (* c c c)))(check-sat)(get-model)";
  SolverConfig cfg;
  cfg.timeout_secs = 1;
  const auto r = run_solver(hard, cfg);
  EXPECT_TRUE(r.status == SolverStatus::Timeout || r.status == SolverStatus::Unknown) << to_string(r.status) << " " << r.message;
  EXPECT_LT(r.seconds, 10.0);
}
