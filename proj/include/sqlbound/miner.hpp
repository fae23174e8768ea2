#pragma once

#include "sqlbound/constraints.hpp"
#include "sqlbound/instance.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sqlbound {

struct MiningConfig {
  int categorical_threshold = 30;
  Rational tukey_k = 3;
  int min_distinct_range = 2;
  int sample_cap = 10;
};

struct ColumnProfile {
  std::string table;
  std::string column;
  ColumnType type = ColumnType::Integer;
  std::string description;
  bool primary_key = false;
  std::size_t row_count = 0;
  std::size_t null_count = 0;
  std::size_t distinct_count = 0;  // non-NULL distinct values
  std::optional<Value> min;
  std::optional<Value> max;
  /// Quartiles of the non-NULL values (day counts for dates), linear interpolation.
  std::optional<Rational> q1;
  std::optional<Rational> q3;
  /// Sorted distinct values, kept when distinct_count <= categorical threshold.
  std::vector<Value> distinct_values;
  std::vector<Value> samples;
};

/// Quantile p of sorted values, interpolating linearly at h = (n-1)p.
Rational quantile(const std::vector<Rational>& sorted, const Rational& p);

ColumnProfile profile_column(const DatabaseInstance& db, const std::string& table, const std::string& column,
                             const MiningConfig& cfg = {});

/// Strict, loose and a semantic placeholder (left unbounded until repaired).
std::vector<MinedConstraint> mine_range(const ColumnProfile& profile, const MiningConfig& cfg = {});
std::optional<MinedConstraint> mine_categorical(const ColumnProfile& profile, const MiningConfig& cfg = {});
std::optional<MinedConstraint> mine_not_null(const ColumnProfile& profile);
std::vector<MinedConstraint> mine_fd(const DatabaseInstance& db, const std::string& table);
std::vector<MinedConstraint> mine_ordering(const DatabaseInstance& db, const std::string& table);

/// Every candidate over every table, sorted by (table, column, kind).
ConstraintSet mine_all(const DatabaseInstance& db, const MiningConfig& cfg = {});

}  // namespace sqlbound
