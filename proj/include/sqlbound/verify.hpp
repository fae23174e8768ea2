#pragma once

#include "sqlbound/encoder.hpp"
#include "sqlbound/parser.hpp"
#include "sqlbound/solver.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace sqlbound {

enum class VerifyStatus { EquivalentUpToBound, Counterexample, Timeout, Unsupported, Error };

std::string_view to_string(VerifyStatus s);
std::optional<VerifyStatus> verify_status_from_string(std::string_view s);

/// A decoded model that does not distinguish the pair on replay. Signals a
/// defect in the encoding, never a property of the input.
class EncoderSoundnessError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct VerifyOptions {
  EncoderConfig encoder;
  SolverConfig solver;
  std::string dump_smt_path;  // write the SMT-LIB problem here when set
};

struct VerificationOutcome {
  VerifyStatus status = VerifyStatus::Error;
  std::string detail;  // reason for Unsupported/Error/Timeout
  std::optional<DatabaseInstance> counterexample;
  std::string script;  // CREATE TABLE + INSERT form of the counterexample
  std::optional<ResultRelation> result1;
  std::optional<ResultRelation> result2;
  bool tie_limited = false;
  std::size_t assertions = 0;
  double solve_seconds = 0;
  double total_seconds = 0;
};

/// Bounded equivalence of two parsed queries under `constraints` (accepted
/// entries only). Throws EncoderSoundnessError when replay disagrees with
/// the solver.
VerificationOutcome verify_pair(const ParseResult& q1, const ParseResult& q2, const DatabaseSchema& schema,
                                const ConstraintSet& constraints, const VerifyOptions& options = {});

}  // namespace sqlbound
