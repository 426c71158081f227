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

// The reference SQL dialect:
//
//   SELECT <agg> [, <agg>]* FROM <table> [WHERE <cond>]
//   <agg>  := <column> | Max(<column>) | Min | Count | Sum | Avg
//   <cond> := <cond> OR <cond> | <cond> AND <cond> | NOT <cond> | (<cond>)
//           | <column> <op> <literal>        op in = != < <= > >=
//
// Literals are double-quoted strings or unsigned decimal numbers. Keywords
// are case-insensitive on input; the canonical form produced by render_sql
// uses uppercase keywords, lowercase identifiers and single spaces.

#ifndef SQLFORGE_SQL_H_
#define SQLFORGE_SQL_H_

#include <string>
#include <string_view>
#include <vector>

#include "sqlforge/ast.h"
#include "sqlforge/error.h"
#include "sqlforge/grammar.h"
#include "sqlforge/schema.h"

namespace sqlforge {

namespace dialect {

inline constexpr std::string_view kSql = "sql";
inline constexpr std::string_view kSelect = "select";
inline constexpr std::string_view kAgg = "agg";
inline constexpr std::string_view kAggType = "agg_type";
inline constexpr std::string_view kCond = "cond";
inline constexpr std::string_view kCmpOp = "cmp_op";

inline constexpr std::string_view kAnd = "And";
inline constexpr std::string_view kOr = "Or";
inline constexpr std::string_view kNot = "Not";
inline constexpr std::string_view kCompare = "Compare";
inline constexpr std::string_view kNoAgg = "NoneAggOp";

// Aggregate constructors, in grammar order.
inline constexpr std::string_view kAggregates[] = {"NoneAggOp", "Max", "Min",
                                                   "Count", "Sum", "Avg"};

struct Operator {
  std::string_view constructor;
  std::string_view text;
};
inline constexpr Operator kOperators[] = {{"Eq", "="},  {"Ne", "!="},
                                          {"Lt", "<"},  {"Le", "<="},
                                          {"Gt", ">"},  {"Ge", ">="}};

// The bundled reference-dialect ASDL grammar (data/grammars/sql_dialect.asdl).
std::string_view grammar_text();
const AsdlGrammar& grammar();

}  // namespace dialect

class SqlError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

struct ParseOptions {
  // Columns outside the FROM table fail the parse when set; otherwise they
  // are reported through the warnings list.
  bool strict_membership = true;
};

// Parses and resolves names against `schema` (case-insensitive). Throws
// SqlError for lexical/syntax errors and Error for unknown tables/columns
// and, when strict, membership violations.
SqlAst parse_sql(std::string_view text, const SchemaDb& schema,
                 const ParseOptions& options = {},
                 std::vector<std::string>* warnings = nullptr);

// Syntax-only parse; identifiers are lowercased but not resolved.
SqlAst parse_sql_unchecked(std::string_view text);

// Canonical surface form. Throws Error for nodes outside the dialect.
std::string render_sql(const SqlAst& tree);

// render_sql(parse_sql_unchecked(text)).
std::string canonical_sql(std::string_view text);

// FROM table of a dialect tree (empty if absent).
std::string from_table(const SqlAst& tree);

// Literals compared against each column, keyed "table.column".
LiteralMap collect_literals(const SqlAst& tree);

}  // namespace sqlforge

#endif  // SQLFORGE_SQL_H_
