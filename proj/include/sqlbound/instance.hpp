#pragma once

#include "sqlbound/schema.hpp"
#include "sqlbound/value.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sqlbound {

using Row = std::vector<Value>;

/// Concrete contents of a database: one row multiset per schema table.
struct DatabaseInstance {
  DatabaseSchema schema;
  std::map<std::string, std::vector<Row>> tables;

  /// Builds an instance with every table present and empty.
  static DatabaseInstance empty(const DatabaseSchema& schema);

  const std::vector<Row>& rows(std::string_view table) const;
  std::vector<Row>& rows(std::string_view table);
  std::size_t max_rows() const;

  friend bool operator==(const DatabaseInstance&, const DatabaseInstance&) = default;
};

class InstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arity, cell types, PK not-null/uniqueness and FK membership. Returns a
/// description of the first violation.
std::optional<std::string> check_integrity(const DatabaseInstance& db);

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF.
std::vector<std::vector<std::string>> read_csv(std::string_view text);
std::string write_csv(const std::vector<std::vector<std::string>>& records);

/// Loads `<dir>/<TABLE>.csv` for each table (header row required; an empty
/// field is NULL). Missing files give empty tables. Throws InstanceError.
DatabaseInstance load_instance(const std::string& dir, const DatabaseSchema& schema);
/// `<dir>/schema.json` plus the CSV files next to it.
DatabaseInstance load_database_dir(const std::string& dir);

}  // namespace sqlbound
