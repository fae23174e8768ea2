#include "sqlbound/verify.hpp"

#include "sqlbound/counterexample.hpp"

#include <chrono>
#include <fstream>

namespace sqlbound {

std::string_view to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::EquivalentUpToBound: return "equivalent_up_to_bound";
    case VerifyStatus::Counterexample: return "counterexample";
    case VerifyStatus::Timeout: return "timeout";
    case VerifyStatus::Unsupported: return "unsupported";
    case VerifyStatus::Error: return "error";
  }
  return "?";
}

std::optional<VerifyStatus> verify_status_from_string(std::string_view s) {
  for (auto v : {VerifyStatus::EquivalentUpToBound, VerifyStatus::Counterexample, VerifyStatus::Timeout,
                 VerifyStatus::Unsupported, VerifyStatus::Error})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

namespace {

std::optional<VerificationOutcome> not_a_query(const ParseResult& r, const char* which) {
  if (const auto* u = std::get_if<UnsupportedReport>(&r)) {
    VerificationOutcome o;
    o.status = VerifyStatus::Unsupported;
    o.detail = std::string(which) + ": " + u->to_string();
    return o;
  }
  if (const auto* e = std::get_if<SqlError>(&r)) {
    VerificationOutcome o;
    o.status = VerifyStatus::Error;
    o.detail = std::string(which) + ": " + e->to_string();
    return o;
  }
  return std::nullopt;
}

}  // namespace

VerificationOutcome verify_pair(const ParseResult& r1, const ParseResult& r2, const DatabaseSchema& schema,
                                const ConstraintSet& constraints, const VerifyOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&](VerificationOutcome o) {
    o.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return o;
  };
  if (auto o = not_a_query(r1, "q1")) return finish(std::move(*o));
  if (auto o = not_a_query(r2, "q2")) return finish(std::move(*o));
  const Query& q1 = std::get<Query>(r1);
  const Query& q2 = std::get<Query>(r2);

  VerificationOutcome out;
  EncodedProblem problem;
  try {
    problem = encode_pair(q1, q2, schema, constraints, options.encoder);
  } catch (const EncodingUnsupported& e) {
    out.status = VerifyStatus::Unsupported;
    out.detail = e.what();
    return finish(std::move(out));
  }
  out.tie_limited = problem.tie_limited;
  out.assertions = problem.assertion_count();
  const std::string script = problem.to_smtlib();
  if (!options.dump_smt_path.empty()) std::ofstream(options.dump_smt_path) << script;

  SolverResult solved = run_solver(script, options.solver);
  out.solve_seconds = solved.seconds;
  switch (solved.status) {
    case SolverStatus::Unsat: out.status = VerifyStatus::EquivalentUpToBound; return finish(std::move(out));
    case SolverStatus::Timeout:
    case SolverStatus::Unknown:
      out.status = VerifyStatus::Timeout;
      out.detail = solved.status == SolverStatus::Timeout ? "solver timeout" : "solver returned unknown";
      return finish(std::move(out));
    case SolverStatus::Error:
      out.status = VerifyStatus::Error;
      out.detail = solved.message;
      return finish(std::move(out));
    case SolverStatus::Sat: break;
  }

  DatabaseInstance db;
  smt::Assignment assignment;
  try {
    db = decode_instance(problem, schema, solved.model);
    assignment = solved.model;
    extend_assignment(problem, assignment);
  } catch (const std::exception& e) {
    throw EncoderSoundnessError(std::string("model does not decode to an instance: ") + e.what());
  }
  if (auto err = check_integrity(db)) throw EncoderSoundnessError("decoded instance violates integrity: " + *err);
  for (const auto& c : constraints) {
    if (c.status == Status::Accepted && !holds(c, db))
      throw EncoderSoundnessError("decoded instance violates accepted constraint " + c.describe());
  }
  const ResultRelation a = execute(q1, db);
  const ResultRelation b = execute(q2, db);
  if (a.limit_tie || b.limit_tie) throw EncoderSoundnessError("decoded instance has a LIMIT tie excluded by the encoding");
  if (results_equal(a, b, options.encoder.mode))
    throw EncoderSoundnessError("decoded instance does not distinguish the queries on replay");
  const ResultRelation sa = decode_relation(problem, problem.out1, assignment);
  const ResultRelation sb = decode_relation(problem, problem.out2, assignment);
  if (!results_equal(sa, a, options.encoder.mode) || !results_equal(sb, b, options.encoder.mode))
    throw EncoderSoundnessError("symbolic result differs from execution on the decoded instance");

  out.status = VerifyStatus::Counterexample;
  out.script = render_script(db);
  out.counterexample = std::move(db);
  out.result1 = a;
  out.result2 = b;
  return finish(std::move(out));
}

}  // namespace sqlbound
