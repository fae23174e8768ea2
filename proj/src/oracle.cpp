#include "sqlbound/oracle.hpp"

#include <algorithm>
#include <limits>

namespace sqlbound {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  return a > kSaturated / b ? kSaturated : a * b;
}
std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kSaturated - b ? kSaturated : a + b; }

/// Multisets of size 0..k drawn from n items.
std::uint64_t multiset_count(std::uint64_t n, int k) {
  std::uint64_t total = 0;
  for (int size = 0; size <= k; ++size) {
    // C(n + size - 1, size)
    std::uint64_t c = 1;
    for (int i = 1; i <= size; ++i) {
      c = sat_mul(c, n + static_cast<std::uint64_t>(i) - 1);
      if (c == kSaturated) break;
      c /= static_cast<std::uint64_t>(i);
    }
    if (n == 0 && size > 0) c = 0;
    total = sat_add(total, c);
  }
  return total;
}

std::vector<Row> candidate_rows(const TableSchema& table, const ConstraintSet& accepted, const OracleConfig& config) {
  std::vector<std::vector<Value>> choices;
  for (const auto& col : table.columns) {
    std::vector<Value> options;
    if (!table.is_primary_key(col.name)) options.push_back(Value::null());
    const auto it = config.domain.find(col.type);
    if (it != config.domain.end())
      for (const auto& v : it->second) options.push_back(v);
    choices.push_back(std::move(options));
  }
  std::vector<Row> rows;
  Row current(table.columns.size());
  auto rec = [&](auto&& self, std::size_t c) -> void {
    if (c == choices.size()) {
      for (const auto& k : accepted)
        if (k.table() == table.name && !holds_on_row(k.body, table, current)) return;
      rows.push_back(current);
      return;
    }
    for (const auto& v : choices[c]) {
      current[c] = v;
      self(self, c + 1);
    }
  };
  rec(rec, 0);
  return rows;
}

}  // namespace

std::uint64_t oracle_instance_count(const DatabaseSchema& schema, const ConstraintSet& constraints,
                                    const OracleConfig& config) {
  const ConstraintSet accepted = accepted_only(constraints);
  std::uint64_t total = 1;
  for (const auto& table : schema.tables)
    total = sat_mul(total, multiset_count(candidate_rows(table, accepted, config).size(), config.bound));
  return total;
}

OracleResult oracle_equivalent(const Query& q1, const Query& q2, const DatabaseSchema& schema,
                               const ConstraintSet& constraints, const OracleConfig& config) {
  if (config.bound < 0) throw std::invalid_argument("oracle bound must be non-negative");
  const ConstraintSet accepted = accepted_only(constraints);
  std::uint64_t total = 1;
  std::vector<std::vector<Row>> candidates;
  for (const auto& table : schema.tables) {
    candidates.push_back(candidate_rows(table, accepted, config));
    total = sat_mul(total, multiset_count(candidates.back().size(), config.bound));
  }
  if (total > config.cap)
    throw CapExceeded("oracle would enumerate " + (total == kSaturated ? std::string("too many") : std::to_string(total)) +
                      " instances (cap " + std::to_string(config.cap) + ")");

  // Per table: all multisets that respect the primary key and accepted FDs.
  std::vector<std::vector<std::vector<Row>>> table_options;
  for (std::size_t t = 0; t < schema.tables.size(); ++t) {
    const TableSchema& table = schema.tables[t];
    DatabaseInstance single = DatabaseInstance::empty(DatabaseSchema{{table}});
    single.schema.tables[0].foreign_keys.clear();
    std::vector<std::vector<Row>> options;
    std::vector<std::size_t> picks;
    auto rec = [&](auto&& self, std::size_t start) -> void {
      std::vector<Row> rows;
      for (std::size_t i : picks) rows.push_back(candidates[t][i]);
      single.rows(table.name) = rows;
      if (check_integrity(single)) return;  // adding rows cannot repair a key clash
      bool fd_ok = true;
      for (const auto& k : accepted)
        if (k.table() == table.name && std::holds_alternative<FdConstraint>(k.body)) fd_ok = fd_ok && holds(k, single);
      if (!fd_ok) return;
      options.push_back(std::move(rows));
      if (picks.size() == static_cast<std::size_t>(config.bound)) return;
      for (std::size_t i = start; i < candidates[t].size(); ++i) {
        picks.push_back(i);
        self(self, i);
        picks.pop_back();
      }
    };
    rec(rec, 0);
    table_options.push_back(std::move(options));
  }

  OracleResult result;
  DatabaseInstance db = DatabaseInstance::empty(schema);
  std::vector<std::size_t> index(schema.tables.size(), 0);
  if (std::any_of(table_options.begin(), table_options.end(), [](const auto& o) { return o.empty(); })) return result;
  while (true) {
    for (std::size_t t = 0; t < schema.tables.size(); ++t) db.rows(schema.tables[t].name) = table_options[t][index[t]];
    if (!check_integrity(db)) {
      ++result.instances_checked;
      const auto r1 = execute(q1, db);
      const auto r2 = execute(q2, db);
      if (r1.limit_tie || r2.limit_tie) {
        ++result.tie_skipped;
      } else if (!results_equal(r1, r2, config.mode)) {
        result.equivalent = false;
        result.counterexample = db;
        return result;
      }
    }
    std::size_t t = 0;
    for (; t < index.size(); ++t) {
      if (++index[t] < table_options[t].size()) break;
      index[t] = 0;
    }
    if (t == index.size()) break;
  }
  return result;
}

}  // namespace sqlbound
