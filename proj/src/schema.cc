//
// Copyright 2026 The sqlforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "sqlforge/schema.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sqlforge/sql.h"

namespace sqlforge {
namespace {

using nlohmann::json;

std::string lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_number_text(std::string_view text) {
  if (text.empty()) return false;
  std::size_t i = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  if (i == 0) return false;
  if (i == text.size()) return true;
  if (text[i] != '.') return false;
  ++i;
  const std::size_t fraction = i;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
  return i == text.size() && i > fraction;
}

const json& require(const json& object, const char* key, std::string_view where) {
  if (!object.is_object() || !object.contains(key)) {
    throw SchemaError("missing \"" + std::string(key) + "\" in " + std::string(where));
  }
  return object.at(key);
}

std::string require_string(const json& object, const char* key, std::string_view where) {
  const json& value = require(object, key, where);
  if (!value.is_string()) {
    throw SchemaError("\"" + std::string(key) + "\" must be a string in " + std::string(where));
  }
  return value.get<std::string>();
}

Literal literal_from_json(const json& value, std::string_view where) {
  if (value.is_string()) return {Literal::Kind::kString, value.get<std::string>()};
  if (value.is_number_unsigned() || value.is_number_integer() || value.is_number_float()) {
    std::string text = value.dump();
    if (!is_number_text(text)) {
      throw SchemaError("literal " + text + " in " + std::string(where) +
                        " is not an unsigned decimal number");
    }
    return {Literal::Kind::kNumber, text};
  }
  throw SchemaError("literal in " + std::string(where) + " must be a string or number");
}

bool kind_matches(Literal::Kind kind, ValueType type) {
  return (kind == Literal::Kind::kNumber) == (type == ValueType::kNumber);
}

SchemaDb parse_database(const json& entry) {
  SchemaDb db;
  db.db_id = require_string(entry, "db_id", "database entry");
  const std::string where = "database '" + db.db_id + "'";
  const json& tables = require(entry, "tables", where);
  if (!tables.is_array()) throw SchemaError("\"tables\" must be an array in " + where);
  for (const json& t : tables) {
    Table table;
    table.name = lower(require_string(t, "name", where));
    if (db.find_table(table.name) != nullptr) {
      throw SchemaError("duplicate table '" + table.name + "' in " + where);
    }
    const json& columns = require(t, "columns", "table '" + table.name + "'");
    if (!columns.is_array()) {
      throw SchemaError("\"columns\" must be an array in table '" + table.name + "'");
    }
    for (const json& c : columns) {
      Column column;
      column.name = lower(require_string(c, "name", "table '" + table.name + "'"));
      column.table = table.name;
      const std::string type = require_string(c, "type", "column '" + column.name + "'");
      if (type == "text") {
        column.type = ValueType::kText;
      } else if (type == "number") {
        column.type = ValueType::kNumber;
      } else {
        throw SchemaError("column '" + table.name + "." + column.name +
                          "' has unsupported type '" + type + "'");
      }
      if (table.find_column(column.name) != nullptr) {
        throw SchemaError("duplicate column '" + column.name + "' in table '" +
                          table.name + "' of " + where);
      }
      table.columns.push_back(std::move(column));
    }
    db.tables.push_back(std::move(table));
  }
  if (entry.contains("content")) {
    const json& content = entry.at("content");
    if (!content.is_object()) throw SchemaError("\"content\" must be an object in " + where);
    for (const auto& [key, values] : content.items()) {
      const std::size_t dot = key.find('.');
      if (dot == std::string::npos) {
        throw SchemaError("content key '" + key + "' is not of the form table.column");
      }
      const Column* column = db.find_column(key.substr(0, dot), key.substr(dot + 1));
      if (column == nullptr) {
        throw SchemaError("content key '" + key + "' names no column of " + where);
      }
      if (!values.is_array()) throw SchemaError("content '" + key + "' must be an array");
      auto& inventory = db.inventory[column_key(column->table, column->name)];
      for (const json& value : values) {
        Literal literal = literal_from_json(value, "content '" + key + "'");
        if (!kind_matches(literal.kind, column->type)) {
          throw SchemaError("literal " + literal.surface() + " does not match the " +
                            std::string(to_string(column->type)) + " type of column '" +
                            key + "'");
        }
        inventory.push_back({std::move(literal), LiteralSource::kContent});
      }
    }
  }
  return db;
}

}  // namespace

std::string_view to_string(ValueType type) {
  return type == ValueType::kNumber ? "number" : "text";
}

std::string Literal::surface() const {
  return kind == Kind::kString ? "\"" + text + "\"" : text;
}

Literal Literal::from_surface(std::string_view token) {
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"') {
    return {Kind::kString, std::string(token.substr(1, token.size() - 2))};
  }
  if (is_number_text(token)) return {Kind::kNumber, std::string(token)};
  throw Error("literal_invalid", "malformed literal token '" + std::string(token) + "'");
}

std::string column_key(std::string_view table, std::string_view column) {
  return lower(table) + "." + lower(column);
}

const Column* Table::find_column(std::string_view name) const {
  const std::string wanted = lower(name);
  for (const Column& column : columns) {
    if (column.name == wanted) return &column;
  }
  return nullptr;
}

const Table* SchemaDb::find_table(std::string_view name) const {
  const std::string wanted = lower(name);
  for (const Table& table : tables) {
    if (table.name == wanted) return &table;
  }
  return nullptr;
}

const Column* SchemaDb::find_column(std::string_view table,
                                    std::string_view column) const {
  const Table* owner = find_table(table);
  return owner == nullptr ? nullptr : owner->find_column(column);
}

const Column* SchemaDb::find_any_column(std::string_view column) const {
  for (const Table& table : tables) {
    if (const Column* found = table.find_column(column)) return found;
  }
  return nullptr;
}

SchemaDb SchemaDb::with_corpus_literals(const LiteralMap& literals) const {
  SchemaDb copy = *this;
  for (const auto& [key, values] : literals) {
    auto& inventory = copy.inventory[key];
    for (const Literal& literal : values) {
      const bool present = std::any_of(
          inventory.begin(), inventory.end(),
          [&](const InventoryEntry& entry) { return entry.literal == literal; });
      if (!present) inventory.push_back({literal, LiteralSource::kCorpus});
    }
  }
  return copy;
}

std::vector<SchemaDb> parse_schemas(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("malformed schema file: ") + e.what());
  }
  const json& databases = require(root, "databases", "schema file");
  if (!databases.is_array()) throw SchemaError("\"databases\" must be an array");
  std::vector<SchemaDb> out;
  std::set<std::string> ids;
  for (const json& entry : databases) {
    SchemaDb db = parse_database(entry);
    if (!ids.insert(db.db_id).second) {
      throw SchemaError("duplicate database '" + db.db_id + "'");
    }
    out.push_back(std::move(db));
  }
  return out;
}

std::vector<SchemaDb> load_schemas(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_schemas(buffer.str());
}

SchemaDb merge_schemas(const std::vector<const SchemaDb*>& dbs, std::string db_id) {
  SchemaDb merged;
  merged.db_id = std::move(db_id);
  for (const SchemaDb* db : dbs) {
    for (const Table& table : db->tables) {
      if (merged.find_table(table.name) == nullptr) merged.tables.push_back(table);
    }
    for (const auto& [key, entries] : db->inventory) {
      auto& target = merged.inventory[key];
      for (const InventoryEntry& entry : entries) {
        const bool present = std::any_of(
            target.begin(), target.end(),
            [&](const InventoryEntry& e) { return e.literal == entry.literal; });
        if (!present) target.push_back(entry);
      }
    }
  }
  return merged;
}

RuleSet ground_rules(const RuleSet& rules, const SchemaDb& db,
                     const LiteralMap& corpus_literals) {
  RuleSet grounded = rules;
  auto add_terminal = [&](std::string_view category, const std::string& token) {
    const Symbol symbol = Symbol::token(token);
    if (!grounded.find(category, std::span<const Symbol>(&symbol, 1))) {
      grounded.add(std::string(category), {symbol});
    }
  };
  if (rules.is_terminal_category(kTableCategory)) {
    for (const Table& table : db.tables) add_terminal(kTableCategory, table.name);
  }
  if (rules.is_terminal_category(kColumnCategory)) {
    for (const Table& table : db.tables) {
      for (const Column& column : table.columns) add_terminal(kColumnCategory, column.name);
    }
  }
  if (rules.is_terminal_category(kValueCategory)) {
    for (const auto& [key, entries] : db.inventory) {
      for (const InventoryEntry& entry : entries) {
        add_terminal(kValueCategory, entry.literal.surface());
      }
    }
    for (const auto& [key, literals] : corpus_literals) {
      for (const Literal& literal : literals) add_terminal(kValueCategory, literal.surface());
    }
  }
  return grounded;
}

std::string_view to_string(SemanticViolation::Kind kind) {
  switch (kind) {
    case SemanticViolation::Kind::kMembership: return "membership";
    case SemanticViolation::Kind::kKindMismatch: return "kind_mismatch";
    case SemanticViolation::Kind::kUnknownLiteral: return "unknown_literal";
  }
  return "unknown";
}

std::vector<SemanticViolation> check_semantics(const SqlAst& tree,
                                               const SchemaDb& db) {
  using Kind = SemanticViolation::Kind;
  using Severity = SemanticViolation::Severity;
  std::vector<SemanticViolation> out;
  const std::string table_name = from_table(tree);
  const Table* table = db.find_table(table_name);
  if (table == nullptr) {
    out.push_back({Kind::kMembership, Severity::kError,
                   "table '" + table_name + "' is not in database '" + db.db_id + "'"});
    return out;
  }
  auto check_member = [&](const std::string& column) -> const Column* {
    if (const Column* found = table->find_column(column)) return found;
    out.push_back({Kind::kMembership, Severity::kError,
                   "column '" + column + "' does not belong to table '" + table->name + "'"});
    return db.find_any_column(column);
  };
  auto visit = [&](const auto& self, const SqlAst& node) -> void {
    if (node.symbol == dialect::kAgg && node.children.size() == 2) {
      check_member(node.children[1].token);
      return;
    }
    if (node.symbol == dialect::kCond && node.constructor == dialect::kCompare &&
        node.children.size() == 3) {
      const std::string& column_name = node.children[1].token;
      const Column* column = check_member(column_name);
      const Literal literal = Literal::from_surface(node.children[2].token);
      if (column == nullptr) return;
      if (!kind_matches(literal.kind, column->type)) {
        out.push_back({Kind::kKindMismatch, Severity::kError,
                       "literal " + literal.surface() + " is incompatible with " +
                           std::string(to_string(column->type)) + " column '" +
                           column->table + "." + column->name + "'"});
        return;
      }
      auto it = db.inventory.find(column_key(column->table, column->name));
      const bool known =
          it != db.inventory.end() &&
          std::any_of(it->second.begin(), it->second.end(),
                      [&](const InventoryEntry& e) { return e.literal == literal; });
      if (!known) {
        out.push_back({Kind::kUnknownLiteral, Severity::kWarning,
                       "literal " + literal.surface() + " not in the inventory of '" +
                           column->table + "." + column->name + "'"});
      }
      return;
    }
    for (const SqlAst& child : node.children) self(self, child);
  };
  visit(visit, tree);
  return out;
}

bool has_errors(const std::vector<SemanticViolation>& violations) {
  return std::any_of(violations.begin(), violations.end(), [](const SemanticViolation& v) {
    return v.severity == SemanticViolation::Severity::kError;
  });
}

}  // namespace sqlforge
