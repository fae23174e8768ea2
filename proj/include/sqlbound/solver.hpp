#pragma once

#include "sqlbound/term.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace sqlbound {

struct SolverConfig {
  std::string z3_path;  // empty: $SQLBOUND_Z3, then z3 on PATH
  int timeout_secs = 60;
  unsigned seed = 0;
  std::size_t memory_mb = 4096;
};

enum class SolverStatus { Sat, Unsat, Unknown, Timeout, Error };

std::string_view to_string(SolverStatus s);

struct SolverResult {
  SolverStatus status = SolverStatus::Error;
  smt::Assignment model;  // Sat only
  std::string message;    // solver output on Error/Unknown
  double seconds = 0;
};

class ModelParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a get-model response: `((define-fun x () Int 3) ...)`.
/// Algebraic numbers (root-obj) are rejected.
smt::Assignment parse_model(std::string_view text);

/// Resolved solver executable, or empty when none is found.
std::string find_solver(const SolverConfig& config);

/// Runs the solver on an SMT-LIB script in a child process with a wall-clock
/// timeout and an address-space limit.
SolverResult run_solver(const std::string& script, const SolverConfig& config);

}  // namespace sqlbound
