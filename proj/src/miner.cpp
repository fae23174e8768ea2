#include "sqlbound/miner.hpp"

#include <algorithm>

namespace sqlbound {

namespace {

Rational numeric_payload(const Value& v) {
  return v.kind() == Value::Kind::Date ? Rational(v.days()) : v.number();
}

bool value_less(const Value& a, const Value& b) { return total_order(a, b) < 0; }

MinedConstraint candidate(ConstraintBody body) {
  MinedConstraint c;
  c.body = std::move(body);
  return c;
}

}  // namespace

Rational quantile(const std::vector<Rational>& sorted, const Rational& p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sequence");
  const Rational h = Rational(static_cast<long long>(sorted.size() - 1)) * p;
  // floor(h) for non-negative h
  const BigInt lo_index = boost::multiprecision::numerator(h) / boost::multiprecision::denominator(h);
  const auto lo = static_cast<std::size_t>(lo_index);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const Rational frac = h - Rational(lo_index);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

ColumnProfile profile_column(const DatabaseInstance& db, const std::string& table_name, const std::string& column,
                             const MiningConfig& cfg) {
  const TableSchema& table = db.schema.at(table_name);
  const auto idx = table.column_index(column);
  if (!idx) throw std::invalid_argument("unknown column " + table_name + "." + column);
  ColumnProfile p;
  p.table = table.name;
  p.column = table.columns[*idx].name;
  p.type = table.columns[*idx].type;
  p.description = table.columns[*idx].description;
  p.primary_key = table.is_primary_key(p.column);
  const auto& rows = db.rows(table.name);
  p.row_count = rows.size();
  std::vector<Value> values;
  for (const auto& row : rows) {
    if (row[*idx].is_null())
      ++p.null_count;
    else
      values.push_back(row[*idx]);
  }
  std::sort(values.begin(), values.end(), value_less);
  std::vector<Value> distinct = values;
  distinct.erase(std::unique(distinct.begin(), distinct.end(), [](const Value& a, const Value& b) { return same_value(a, b); }),
                 distinct.end());
  p.distinct_count = distinct.size();
  if (!values.empty()) {
    p.min = values.front();
    p.max = values.back();
  }
  if (is_ordered(p.type) && !values.empty()) {
    std::vector<Rational> nums;
    for (const auto& v : values) nums.push_back(numeric_payload(v));
    p.q1 = quantile(nums, Rational(1, 4));
    p.q3 = quantile(nums, Rational(3, 4));
  }
  if (p.distinct_count <= static_cast<std::size_t>(cfg.categorical_threshold)) p.distinct_values = distinct;
  for (std::size_t i = 0; i < distinct.size() && i < static_cast<std::size_t>(cfg.sample_cap); ++i) p.samples.push_back(distinct[i]);
  return p;
}

std::vector<MinedConstraint> mine_range(const ColumnProfile& p, const MiningConfig& cfg) {
  if (!is_ordered(p.type) || p.distinct_count < static_cast<std::size_t>(std::max(cfg.min_distinct_range, 2)) || !p.min)
    return {};
  const Rational lo = numeric_payload(*p.min);
  const Rational hi = numeric_payload(*p.max);
  std::vector<MinedConstraint> out;
  out.push_back(candidate(RangeConstraint{p.table, p.column, lo, hi, RangeVariant::Strict}));
  const Rational iqr = *p.q3 - *p.q1;
  Rational loose_lo = *p.q1 - cfg.tukey_k * iqr;
  const Rational loose_hi = *p.q3 + cfg.tukey_k * iqr;
  if (lo >= 0 && loose_lo < 0) loose_lo = 0;
  out.push_back(candidate(RangeConstraint{p.table, p.column, loose_lo, loose_hi, RangeVariant::Loose}));
  out.push_back(candidate(RangeConstraint{p.table, p.column, std::nullopt, std::nullopt, RangeVariant::Semantic}));
  return out;
}

std::optional<MinedConstraint> mine_categorical(const ColumnProfile& p, const MiningConfig& cfg) {
  if (p.distinct_count < 2 || p.distinct_count > static_cast<std::size_t>(cfg.categorical_threshold)) return std::nullopt;
  return candidate(CategoricalConstraint{p.table, p.column, p.distinct_values});
}

std::optional<MinedConstraint> mine_not_null(const ColumnProfile& p) {
  if (p.primary_key || p.row_count == 0 || p.null_count != 0) return std::nullopt;
  return candidate(NotNullConstraint{p.table, p.column});
}

std::vector<MinedConstraint> mine_fd(const DatabaseInstance& db, const std::string& table_name) {
  const TableSchema& table = db.schema.at(table_name);
  const auto& rows = db.rows(table.name);
  std::vector<MinedConstraint> out;
  if (rows.empty()) return out;
  auto distinct_count = [&](const std::vector<std::size_t>& cols) {
    std::vector<Row> keys;
    for (const auto& row : rows) {
      Row key;
      for (std::size_t c : cols) key.push_back(row[c]);
      keys.push_back(std::move(key));
    }
    auto less = [](const Row& a, const Row& b) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto c = total_order(a[i], b[i]);
        if (c != 0) return c < 0;
      }
      return false;
    };
    std::sort(keys.begin(), keys.end(), less);
    const auto last = std::unique(keys.begin(), keys.end(), [&](const Row& a, const Row& b) { return !less(a, b) && !less(b, a); });
    return static_cast<std::size_t>(last - keys.begin());
  };
  for (std::size_t a = 0; a < table.columns.size(); ++a) {
    if (table.is_primary_key(table.columns[a].name)) continue;
    const std::size_t n_a = distinct_count({a});
    for (std::size_t b = 0; b < table.columns.size(); ++b) {
      if (a == b || table.is_primary_key(table.columns[b].name)) continue;
      if (distinct_count({a, b}) == n_a)
        out.push_back(candidate(FdConstraint{table.name, table.columns[a].name, table.columns[b].name}));
    }
  }
  return out;
}

std::vector<MinedConstraint> mine_ordering(const DatabaseInstance& db, const std::string& table_name) {
  const TableSchema& table = db.schema.at(table_name);
  const auto& rows = db.rows(table.name);
  std::vector<MinedConstraint> out;
  auto family = [](ColumnType t) { return is_numeric(t) ? 0 : t == ColumnType::Date ? 1 : 2; };
  for (std::size_t a = 0; a < table.columns.size(); ++a) {
    const auto& ca = table.columns[a];
    if (table.is_primary_key(ca.name) || family(ca.type) == 2) continue;
    for (std::size_t b = a + 1; b < table.columns.size(); ++b) {
      const auto& cb = table.columns[b];
      if (table.is_primary_key(cb.name) || family(cb.type) != family(ca.type)) continue;
      bool any = false, le = true, ge = true;
      for (const auto& row : rows) {
        if (row[a].is_null() || row[b].is_null()) continue;
        any = true;
        const auto c = total_order(row[a], row[b]);
        le = le && c <= 0;
        ge = ge && c >= 0;
      }
      if (!any) continue;
      if (le) out.push_back(candidate(OrderingConstraint{table.name, ca.name, cb.name, OrderOp::Le}));
      if (ge) out.push_back(candidate(OrderingConstraint{table.name, ca.name, cb.name, OrderOp::Ge}));
    }
  }
  return out;
}

ConstraintSet mine_all(const DatabaseInstance& db, const MiningConfig& cfg) {
  ConstraintSet out;
  for (const auto& table : db.schema.tables) {
    for (const auto& column : table.columns) {
      const ColumnProfile p = profile_column(db, table.name, column.name, cfg);
      for (auto& c : mine_range(p, cfg)) out.push_back(std::move(c));
      if (auto c = mine_categorical(p, cfg)) out.push_back(std::move(*c));
      if (auto c = mine_not_null(p)) out.push_back(std::move(*c));
    }
    for (auto& c : mine_fd(db, table.name)) out.push_back(std::move(c));
    for (auto& c : mine_ordering(db, table.name)) out.push_back(std::move(c));
  }
  sort_constraints(out);
  return out;
}

}  // namespace sqlbound
