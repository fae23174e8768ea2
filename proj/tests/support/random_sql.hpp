#pragma once

#include "sqlbound/constraints.hpp"
#include "sqlbound/instance.hpp"
#include "sqlbound/oracle.hpp"

#include <random>
#include <string>
#include <vector>

namespace sqlbound::testing {

/// One or two small tables over Integer and Text columns; the second table
/// may carry a foreign key into the first.
DatabaseSchema random_schema(std::mt19937& rng);

/// Random rows respecting primary keys and foreign keys.
DatabaseInstance random_instance(const DatabaseSchema& schema, std::mt19937& rng, int max_rows, int int_span,
                                 double null_rate);

struct QueryPair {
  std::string q1;
  std::string q2;
  std::string mutation;  // how q2 was derived from q1
};

/// A random fragment query and a mutated (sometimes equivalent) variant.
QueryPair random_pair(const DatabaseSchema& schema, std::mt19937& rng);

/// Integer values {0, 1, 2} and Text values {'a', 'b', 'c'}.
OracleConfig small_oracle_config(int bound, CompareMode mode);

/// Accepted categorical constraints pinning every column to the oracle
/// domain, so the solver and the oracle search the same instances.
ConstraintSet domain_constraints(const DatabaseSchema& schema, const OracleConfig& config);

}  // namespace sqlbound::testing
