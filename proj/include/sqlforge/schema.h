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

// Relational schemas, terminal grounding and the semantic-validity check.
//
// Schema file (JSON):
//   { "databases": [ { "db_id": "geo",
//       "tables": [ { "name": "river",
//                     "columns": [ { "name": "length", "type": "number" } ] } ],
//       "content": { "river.traverse": ["new york", "colorado"] } } ] }

#ifndef SQLFORGE_SCHEMA_H_
#define SQLFORGE_SCHEMA_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sqlforge/ast.h"
#include "sqlforge/error.h"
#include "sqlforge/grammar.h"

namespace sqlforge {

enum class ValueType { kText, kNumber };

std::string_view to_string(ValueType type);

// A SQL literal. `text` is the unquoted content.
struct Literal {
  enum class Kind { kString, kNumber };
  Kind kind = Kind::kString;
  std::string text;

  // The token form used in trees and rules: "new york" (quoted) or 15000.
  std::string surface() const;
  // Inverse of surface(). Throws Error for malformed tokens.
  static Literal from_surface(std::string_view token);

  auto operator<=>(const Literal&) const = default;
};

enum class LiteralSource { kContent, kCorpus };

struct InventoryEntry {
  Literal literal;
  LiteralSource source = LiteralSource::kContent;
};

struct Column {
  std::string name;
  std::string table;
  ValueType type = ValueType::kText;
};

struct Table {
  std::string name;
  std::vector<Column> columns;

  const Column* find_column(std::string_view name) const;
};

// Literals keyed by "table.column".
using LiteralMap = std::map<std::string, std::vector<Literal>>;

std::string column_key(std::string_view table, std::string_view column);

struct SchemaDb {
  std::string db_id;
  std::vector<Table> tables;
  std::map<std::string, std::vector<InventoryEntry>> inventory;

  // Lookups are case-insensitive; stored names are lowercase.
  const Table* find_table(std::string_view name) const;
  const Column* find_column(std::string_view table,
                            std::string_view column) const;
  // First table (schema order) owning a column of that name.
  const Column* find_any_column(std::string_view column) const;

  // Copy with corpus literals appended to the inventory (tagged kCorpus,
  // skipping literals already present for that column).
  SchemaDb with_corpus_literals(const LiteralMap& literals) const;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& message)
      : Error("schema", message) {}
};

std::vector<SchemaDb> parse_schemas(std::string_view json_text);
std::vector<SchemaDb> load_schemas(const std::filesystem::path& path);

// Union of several schemas under one id; later duplicates of a table name are
// dropped. Used for shared-mode grounding across databases.
SchemaDb merge_schemas(const std::vector<const SchemaDb*>& dbs,
                       std::string db_id);

// Extends `rules` with table -> t, column -> c (one per distinct column name)
// and value -> v (distinct literals from the inventory, then corpus_literals).
// Only categories present in rules.terminal_categories() are grounded. Ids of
// existing rules are unchanged.
RuleSet ground_rules(const RuleSet& rules, const SchemaDb& db,
                     const LiteralMap& corpus_literals);

struct SemanticViolation {
  enum class Kind { kMembership, kKindMismatch, kUnknownLiteral };
  enum class Severity { kError, kWarning };
  Kind kind;
  Severity severity;
  std::string message;
};

std::string_view to_string(SemanticViolation::Kind kind);

// Checks a reference-dialect tree against `db`: column membership in the FROM
// table (comparisons and the select list), literal kind against the column
// type, and literal presence in the column inventory (warning only).
std::vector<SemanticViolation> check_semantics(const SqlAst& tree,
                                               const SchemaDb& db);

bool has_errors(const std::vector<SemanticViolation>& violations);

}  // namespace sqlforge

#endif  // SQLFORGE_SCHEMA_H_
