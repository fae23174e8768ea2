#include "sqlbound/instance.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace sqlbound {

namespace fs = std::filesystem;

DatabaseInstance DatabaseInstance::empty(const DatabaseSchema& schema) {
  DatabaseInstance db;
  db.schema = schema;
  for (const auto& t : schema.tables) db.tables[t.name];
  return db;
}

const std::vector<Row>& DatabaseInstance::rows(std::string_view table) const {
  const auto it = tables.find(upper(table));
  if (it == tables.end()) throw InstanceError("no data for table '" + std::string(table) + "'");
  return it->second;
}

std::vector<Row>& DatabaseInstance::rows(std::string_view table) { return tables[upper(table)]; }

std::size_t DatabaseInstance::max_rows() const {
  std::size_t n = 0;
  for (const auto& [_, rows] : tables) n = std::max(n, rows.size());
  return n;
}

namespace {

bool type_matches(const Value& v, ColumnType type) {
  switch (v.kind()) {
    case Value::Kind::Null: return true;
    case Value::Kind::Integer: return type == ColumnType::Integer;
    case Value::Kind::Real: return type == ColumnType::Real;
    case Value::Kind::Text: return type == ColumnType::Text;
    case Value::Kind::Date: return type == ColumnType::Date;
  }
  return false;
}

std::string render_row(const Row& row) {
  std::string out = "(";
  for (std::size_t i = 0; i < row.size(); ++i) out += (i ? ", " : "") + row[i].to_sql();
  return out + ")";
}

}  // namespace

std::optional<std::string> check_integrity(const DatabaseInstance& db) {
  for (const auto& table : db.schema.tables) {
    const auto it = db.tables.find(table.name);
    if (it == db.tables.end()) continue;
    const auto& rows = it->second;
    std::vector<std::size_t> pk;
    for (const auto& name : table.primary_key) pk.push_back(*table.column_index(name));
    for (const auto& row : rows) {
      if (row.size() != table.columns.size())
        return table.name + ": row " + render_row(row) + " has " + std::to_string(row.size()) + " cells, expected " +
               std::to_string(table.columns.size());
      for (std::size_t c = 0; c < row.size(); ++c)
        if (!type_matches(row[c], table.columns[c].type))
          return table.name + "." + table.columns[c].name + ": value " + row[c].to_sql() + " is not of type " +
                 std::string(to_string(table.columns[c].type));
      for (std::size_t c : pk)
        if (row[c].is_null()) return table.name + "." + table.columns[c].name + ": primary key is NULL";
    }
    if (!pk.empty()) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
          bool same = true;
          for (std::size_t c : pk) same = same && same_value(rows[i][c], rows[j][c]);
          if (same) return table.name + ": duplicate primary key in rows " + render_row(rows[i]) + " and " + render_row(rows[j]);
        }
    }
  }
  for (const auto& table : db.schema.tables) {
    const auto it = db.tables.find(table.name);
    if (it == db.tables.end()) continue;
    for (const auto& fk : table.foreign_keys) {
      const std::size_t local = *table.column_index(fk.column);
      const TableSchema& target = db.schema.at(fk.ref_table);
      const std::size_t remote = *target.column_index(fk.ref_column);
      const auto target_rows = db.tables.find(target.name);
      for (const auto& row : it->second) {
        if (row[local].is_null()) continue;
        bool found = false;
        if (target_rows != db.tables.end())
          for (const auto& t : target_rows->second) found = found || (!t[remote].is_null() && same_value(t[remote], row[local]));
        if (!found)
          return table.name + "." + fk.column + ": value " + row[local].to_sql() + " not present in " + target.name + "." +
                 fk.ref_column;
      }
    }
  }
  return std::nullopt;
}

std::vector<std::vector<std::string>> read_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool any = false;  // current record has content
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      field.clear();
      record.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (in_quotes) throw InstanceError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string write_csv(const std::vector<std::vector<std::string>>& records) {
  std::string out;
  for (const auto& record : records) {
    for (std::size_t i = 0; i < record.size(); ++i) {
      if (i) out += ',';
      const std::string& f = record[i];
      if (f.find_first_of(",\"\r\n") != std::string::npos) {
        out += '"';
        for (char c : f) {
          if (c == '"') out += '"';
          out += c;
        }
        out += '"';
      } else {
        out += f;
      }
    }
    out += '\n';
  }
  return out;
}

DatabaseInstance load_instance(const std::string& dir, const DatabaseSchema& schema) {
  DatabaseInstance db = DatabaseInstance::empty(schema);
  for (const auto& table : schema.tables) {
    fs::path path = fs::path(dir) / (table.name + ".csv");
    if (!fs::exists(path)) {
      // tolerate lower-case file names
      std::string lower = table.name;
      for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      path = fs::path(dir) / (lower + ".csv");
      if (!fs::exists(path)) continue;
    }
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto records = read_csv(buffer.str());
    if (records.empty()) continue;
    std::vector<std::size_t> mapping;
    for (const auto& name : records[0]) {
      const auto idx = table.column_index(name);
      if (!idx) throw InstanceError(path.string() + ": unknown column '" + name + "'");
      mapping.push_back(*idx);
    }
    if (mapping.size() != table.columns.size())
      throw InstanceError(path.string() + ": header does not list every column of " + table.name);
    auto& rows = db.rows(table.name);
    for (std::size_t r = 1; r < records.size(); ++r) {
      if (records[r].size() != mapping.size())
        throw InstanceError(path.string() + ": line " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                            " fields");
      Row row(table.columns.size());
      for (std::size_t f = 0; f < mapping.size(); ++f) {
        const std::string& cell = records[r][f];
        if (cell.empty()) continue;
        try {
          row[mapping[f]] = parse_cell(table.columns[mapping[f]].type, cell);
        } catch (const ValueError& e) {
          throw InstanceError(path.string() + ": line " + std::to_string(r + 1) + ": " + e.what());
        }
      }
      rows.push_back(std::move(row));
    }
  }
  if (auto violation = check_integrity(db)) throw InstanceError("integrity violation in " + dir + ": " + *violation);
  return db;
}

DatabaseInstance load_database_dir(const std::string& dir) {
  return load_instance(dir, load_schema_file((fs::path(dir) / "schema.json").string()));
}

}  // namespace sqlbound
