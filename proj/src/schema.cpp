#include "sqlbound/schema.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace sqlbound {

using nlohmann::json;

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::optional<std::size_t> TableSchema::column_index(std::string_view column) const {
  const std::string key = upper(column);
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == key) return i;
  return std::nullopt;
}

bool TableSchema::is_primary_key(std::string_view column) const {
  const std::string key = upper(column);
  return std::find(primary_key.begin(), primary_key.end(), key) != primary_key.end();
}

const TableSchema* DatabaseSchema::find(std::string_view table) const {
  const std::string key = upper(table);
  for (const auto& t : tables)
    if (t.name == key) return &t;
  return nullptr;
}

const TableSchema& DatabaseSchema::at(std::string_view table) const {
  if (const auto* t = find(table)) return *t;
  throw SchemaError("unknown table '" + std::string(table) + "'");
}

void validate_schema(const DatabaseSchema& schema) {
  std::set<std::string> table_names;
  for (const auto& table : schema.tables) {
    if (table.name.empty()) throw SchemaError("table with empty name");
    if (!table_names.insert(table.name).second) throw SchemaError("duplicate table '" + table.name + "'");
    std::set<std::string> column_names;
    for (const auto& column : table.columns) {
      if (column.name.empty()) throw SchemaError("empty column name in table '" + table.name + "'");
      if (!column_names.insert(column.name).second)
        throw SchemaError("duplicate column '" + table.name + "." + column.name + "'");
    }
    for (const auto& pk : table.primary_key)
      if (!table.column_index(pk)) throw SchemaError("primary key column '" + table.name + "." + pk + "' does not exist");
  }
  for (const auto& table : schema.tables) {
    for (const auto& fk : table.foreign_keys) {
      const auto local = table.column_index(fk.column);
      if (!local) throw SchemaError("foreign key column '" + table.name + "." + fk.column + "' does not exist");
      const TableSchema* target = schema.find(fk.ref_table);
      if (!target) throw SchemaError("dangling foreign key " + table.name + "." + fk.column + " -> missing table '" + fk.ref_table + "'");
      const auto remote = target->column_index(fk.ref_column);
      if (!remote)
        throw SchemaError("dangling foreign key " + table.name + "." + fk.column + " -> missing column '" + fk.ref_table + "." + fk.ref_column + "'");
      if (table.columns[*local].type != target->columns[*remote].type)
        throw SchemaError("foreign key " + table.name + "." + fk.column + " has a different type than its target");
    }
  }
}

DatabaseSchema parse_schema(std::string_view descriptor_json) {
  json doc;
  try {
    doc = json::parse(descriptor_json);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema descriptor: ") + e.what());
  }
  DatabaseSchema schema;
  if (!doc.is_object() || !doc.contains("tables") || !doc["tables"].is_array())
    throw SchemaError("schema descriptor must be an object with a 'tables' array");
  try {
    for (const auto& t : doc["tables"]) {
      TableSchema table;
      table.name = upper(t.at("name").get<std::string>());
      for (const auto& c : t.at("columns")) {
        ColumnSchema column;
        column.name = upper(c.at("name").get<std::string>());
        const auto type_name = c.at("type").get<std::string>();
        const auto type = column_type_from_string(type_name);
        if (!type) throw SchemaError("unknown column type '" + type_name + "' for " + table.name + "." + column.name);
        column.type = *type;
        if (c.contains("description") && c["description"].is_string()) column.description = c["description"].get<std::string>();
        table.columns.push_back(std::move(column));
      }
      if (t.contains("primary_key"))
        for (const auto& pk : t["primary_key"]) table.primary_key.push_back(upper(pk.get<std::string>()));
      if (t.contains("foreign_keys"))
        for (const auto& fk : t["foreign_keys"])
          table.foreign_keys.push_back({upper(fk.at("column").get<std::string>()), upper(fk.at("ref_table").get<std::string>()),
                                        upper(fk.at("ref_column").get<std::string>())});
      schema.tables.push_back(std::move(table));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema descriptor: ") + e.what());
  }
  validate_schema(schema);
  return schema;
}

DatabaseSchema load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_schema(buffer.str());
}

std::string schema_to_json(const DatabaseSchema& schema) {
  json tables = json::array();
  for (const auto& t : schema.tables) {
    json columns = json::array();
    for (const auto& c : t.columns) {
      json col = {{"name", c.name}, {"type", std::string(to_string(c.type))}};
      if (!c.description.empty()) col["description"] = c.description;
      columns.push_back(col);
    }
    json fks = json::array();
    for (const auto& fk : t.foreign_keys)
      fks.push_back({{"column", fk.column}, {"ref_table", fk.ref_table}, {"ref_column", fk.ref_column}});
    tables.push_back({{"name", t.name}, {"columns", columns}, {"primary_key", t.primary_key}, {"foreign_keys", fks}});
  }
  return json({{"tables", tables}}).dump(2);
}

}  // namespace sqlbound
