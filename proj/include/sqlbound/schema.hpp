#pragma once

#include "sqlbound/value.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqlbound {

struct ColumnSchema {
  std::string name;
  ColumnType type = ColumnType::Integer;
  std::string description;  // optional free text, forwarded to the validator

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

struct ForeignKey {
  std::string column;
  std::string ref_table;
  std::string ref_column;

  friend bool operator==(const ForeignKey&, const ForeignKey&) = default;
};

struct TableSchema {
  std::string name;
  std::vector<ColumnSchema> columns;
  std::vector<std::string> primary_key;
  std::vector<ForeignKey> foreign_keys;

  std::optional<std::size_t> column_index(std::string_view column) const;
  bool is_primary_key(std::string_view column) const;

  friend bool operator==(const TableSchema&, const TableSchema&) = default;
};

/// Tables and columns are stored with upper-cased names; lookups are
/// case-insensitive.
struct DatabaseSchema {
  std::vector<TableSchema> tables;

  const TableSchema* find(std::string_view table) const;
  const TableSchema& at(std::string_view table) const;

  friend bool operator==(const DatabaseSchema&, const DatabaseSchema&) = default;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string upper(std::string_view s);

/// Parses the JSON schema descriptor and validates name uniqueness and
/// foreign-key targets. Throws SchemaError naming the first violation.
DatabaseSchema parse_schema(std::string_view descriptor_json);
DatabaseSchema load_schema_file(const std::string& path);
std::string schema_to_json(const DatabaseSchema& schema);

/// Re-checks the DatabaseSchema invariants on an in-memory value.
void validate_schema(const DatabaseSchema& schema);

}  // namespace sqlbound
