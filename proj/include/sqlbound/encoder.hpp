#pragma once

#include "sqlbound/ast.hpp"
#include "sqlbound/constraints.hpp"
#include "sqlbound/executor.hpp"
#include "sqlbound/instance.hpp"
#include "sqlbound/term.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqlbound {

struct EncoderConfig {
  int bound = 5;  // tuples per base table
  std::size_t cardinality_ceiling = 125;
  CompareMode mode = CompareMode::Set;
  bool symmetry_breaking = true;
};

/// The pair is well-formed SQL but cannot be encoded soundly.
class EncodingUnsupported : public std::runtime_error {
 public:
  EncodingUnsupported(std::string construct, const std::string& reason)
      : std::runtime_error(construct + ": " + reason), construct_(std::move(construct)) {}
  const std::string& construct() const { return construct_; }

 private:
  std::string construct_;
};

/// Text values are integer codes. A literal that is a canonical decimal
/// numeral is its own code; other literals get codes from kDenseBase up.
/// Codes without a literal decode to their decimal numeral.
class TextDictionary {
 public:
  static constexpr long long kDenseBase = 2147483648LL;

  BigInt code(const std::string& literal);
  std::string decode(const BigInt& code) const;
  const std::map<std::string, BigInt>& literals() const { return codes_; }

 private:
  std::map<std::string, BigInt> codes_;
  std::map<BigInt, std::string> by_code_;
  BigInt next_ = kDenseBase;
};

struct SymCell {
  smt::Term value;  // meaningful only when `null` is false
  smt::Term null;
  ColumnType type = ColumnType::Integer;
};

struct SymTuple {
  std::vector<SymCell> cells;
  smt::Term live;  // negation of the deletion flag
};

struct SymRelation {
  std::vector<std::string> columns;
  std::vector<ColumnType> types;
  std::vector<SymTuple> tuples;
};

enum class Section { Integrity, Constraints, Query1, Query2, NonEquivalence };

std::string_view to_string(Section s);

/// A variable whose value is a function of the free variables. When
/// `asserted` is false the SMT text pins it only through guarded
/// implications, and `value` is a witness that satisfies them.
struct Definition {
  std::string name;
  smt::Sort sort = smt::Sort::Bool;
  smt::Term value;
  Section section = Section::Query1;
  bool asserted = true;
};

struct Assertion {
  Section section = Section::Integrity;
  smt::Term term;
};

struct BaseCellVars {
  std::string value;
  std::string null;
};

struct BaseRowVars {
  std::string del;
  std::vector<BaseCellVars> cells;
};

struct BaseTableVars {
  std::string table;
  std::vector<ColumnSchema> columns;
  std::vector<BaseRowVars> rows;
};

struct EncodedProblem {
  int bound = 0;
  CompareMode mode = CompareMode::Set;
  std::vector<std::pair<std::string, smt::Sort>> free_vars;
  std::vector<Definition> definitions;
  std::vector<Assertion> assertions;
  std::vector<BaseTableVars> tables;
  TextDictionary dictionary;
  SymRelation out1;
  SymRelation out2;
  /// A LIMIT is encoded with a tie-free side condition, so instances whose
  /// LIMIT cuts through equal sort keys are outside the search space.
  bool tie_limited = false;
  bool nonlinear = false;

  std::vector<smt::Term> section(Section s) const;
  std::string logic() const;
  std::string to_smtlib() const;
  std::size_t assertion_count() const;
};

/// Integrity, constraint, both query encodings and the non-equivalence
/// goal for one pair. Throws EncodingUnsupported.
EncodedProblem encode_pair(const Query& q1, const Query& q2, const DatabaseSchema& schema,
                           const ConstraintSet& constraints, const EncoderConfig& config = {});

/// Step-wise interface; encode_pair composes these.
class Encoder {
 public:
  Encoder(const DatabaseSchema& schema, EncoderConfig config);

  void encode_integrity();
  void encode_constraints(const ConstraintSet& constraints);
  SymRelation encode_query(const Query& query, Section section);
  smt::Term encode_nonequivalence(const SymRelation& a, const SymRelation& b);
  void assert_term(Section section, smt::Term term);
  const SymRelation& base(const std::string& table) const;
  EncodedProblem finish();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// Free-variable assignment representing `db` (rows beyond the bound are an
/// error), extended with every definition evaluated in order. Text values
/// missing from the dictionary receive fresh codes.
smt::Assignment assignment_for(EncodedProblem& problem, const DatabaseInstance& db);
/// Extends a free-variable assignment (e.g. a solver model) with the definitions.
void extend_assignment(const EncodedProblem& problem, smt::Assignment& assignment);

/// Decodes the base tables from an assignment of the free variables.
DatabaseInstance decode_instance(const EncodedProblem& problem, const DatabaseSchema& schema, const smt::Assignment& a);
/// Live tuples of a symbolic relation under a full assignment.
ResultRelation decode_relation(const EncodedProblem& problem, const SymRelation& r, const smt::Assignment& a);

}  // namespace sqlbound
