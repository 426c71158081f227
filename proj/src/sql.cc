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

#include "sqlforge/sql.h"

#include <algorithm>
#include <cctype>
#include <optional>

namespace sqlforge {

namespace dialect {

std::string_view grammar_text() {
  static constexpr std::string_view kText =
      R"(-- Reference SQL dialect: the simplified SQL grammar extended with a
-- FROM table, more aggregates and comparison conditions.
sql = (select select, table from, cond? where)
select = (agg* aggs)
agg = (agg_type agg_id, column col_id)
agg_type = NoneAggOp | Max | Min | Count | Sum | Avg
cond = And(cond left, cond right)
     | Or(cond left, cond right)
     | Not(cond c)
     | Compare(cmp_op op, column col, value val)
cmp_op = Eq | Ne | Lt | Le | Gt | Ge
)";
  return kText;
}

const AsdlGrammar& grammar() {
  static const AsdlGrammar kGrammar = load_asdl(grammar_text());
  return kGrammar;
}

}  // namespace dialect

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

enum class Tok { kIdent, kKeyword, kString, kNumber, kLParen, kRParen, kComma,
                 kOp, kSemicolon, kEnd };

struct Token {
  Tok kind;
  std::string text;  // keywords uppercased, identifiers lowercased
  std::size_t offset;
};

bool is_keyword(std::string_view upper) {
  return upper == "SELECT" || upper == "FROM" || upper == "WHERE" ||
         upper == "AND" || upper == "OR" || upper == "NOT";
}

SqlError sql_error(std::string kind, const std::string& message,
                   std::size_t offset) {
  return SqlError(std::move(kind), message, 1, static_cast<int>(offset) + 1);
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                                 text[i] == '_')) {
        ++i;
      }
      std::string word(text.substr(start, i - start));
      std::string upper = word;
      for (char& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      if (is_keyword(upper)) {
        tokens.push_back({Tok::kKeyword, upper, start});
      } else {
        tokens.push_back({Tok::kIdent, lower(word), start});
      }
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (i < text.size() && text[i] == '.') {
        ++i;
        if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) {
          throw sql_error("sql_lexical", "malformed number", start);
        }
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      }
      if (i < text.size() && (std::isalpha(static_cast<unsigned char>(text[i])) ||
                              text[i] == '_')) {
        throw sql_error("sql_lexical", "malformed number", start);
      }
      tokens.push_back({Tok::kNumber, std::string(text.substr(start, i - start)), start});
      continue;
    }
    if (c == '"') {
      ++i;
      while (i < text.size() && text[i] != '"') {
        if (text[i] == '\n' || text[i] == '\t') {
          throw sql_error("sql_lexical", "control character in string literal", i);
        }
        ++i;
      }
      if (i >= text.size()) {
        throw sql_error("sql_lexical", "unterminated string literal", start);
      }
      tokens.push_back({Tok::kString, std::string(text.substr(start + 1, i - start - 1)), start});
      ++i;
      continue;
    }
    switch (c) {
      case '(': tokens.push_back({Tok::kLParen, "(", start}); ++i; continue;
      case ')': tokens.push_back({Tok::kRParen, ")", start}); ++i; continue;
      case ',': tokens.push_back({Tok::kComma, ",", start}); ++i; continue;
      case ';': tokens.push_back({Tok::kSemicolon, ";", start}); ++i; continue;
      default: break;
    }
    auto two = text.substr(i, 2);
    if (two == "!=" || two == "<=" || two == ">=" || two == "<>") {
      tokens.push_back({Tok::kOp, two == "<>" ? "!=" : std::string(two), start});
      i += 2;
      continue;
    }
    if (c == '=' || c == '<' || c == '>') {
      tokens.push_back({Tok::kOp, std::string(1, c), start});
      ++i;
      continue;
    }
    throw sql_error("sql_lexical", std::string("unexpected character '") + c + "'", start);
  }
  tokens.push_back({Tok::kEnd, "", text.size()});
  return tokens;
}

std::optional<std::string_view> aggregate_named(std::string_view lowered) {
  for (std::string_view name : dialect::kAggregates) {
    if (name != dialect::kNoAgg && lower(name) == lowered) return name;
  }
  return std::nullopt;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  SqlAst parse() {
    expect_keyword("SELECT");
    if (peek().kind == Tok::kKeyword && peek().text == "FROM") {
      throw sql_error("sql_syntax", "empty select list", peek().offset);
    }
    std::vector<SqlAst> aggs;
    do {
      aggs.push_back(parse_agg());
    } while (accept(Tok::kComma));
    expect_keyword("FROM");
    const Token& table = expect(Tok::kIdent, "table name");
    std::vector<SqlAst> children;
    children.push_back(SqlAst::node(std::string(dialect::kSelect), "", std::move(aggs)));
    children.push_back(SqlAst::terminal(std::string(kTableCategory), table.text));
    if (peek().kind == Tok::kKeyword && peek().text == "WHERE") {
      ++pos_;
      children.push_back(parse_or());
    }
    accept(Tok::kSemicolon);
    if (peek().kind != Tok::kEnd) {
      throw sql_error("sql_syntax", "unexpected '" + peek().text + "'", peek().offset);
    }
    return SqlAst::node(std::string(dialect::kSql), "", std::move(children));
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }

  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    ++pos_;
    return true;
  }

  bool accept_keyword(std::string_view word) {
    if (peek().kind != Tok::kKeyword || peek().text != word) return false;
    ++pos_;
    return true;
  }

  [[noreturn]] void fail(std::string_view what) const {
    const Token& token = peek();
    throw sql_error("sql_syntax",
                    "expected " + std::string(what) + " but found " +
                        (token.kind == Tok::kEnd ? std::string("end of input")
                                                 : "'" + token.text + "'"),
                    token.offset);
  }

  const Token& expect(Tok kind, std::string_view what) {
    if (peek().kind != kind) fail(what);
    return tokens_[pos_++];
  }

  void expect_keyword(std::string_view word) {
    if (!accept_keyword(word)) fail(word);
  }

  SqlAst column_node(const Token& token) {
    return SqlAst::terminal(std::string(kColumnCategory), token.text);
  }

  SqlAst parse_agg() {
    const Token& name = expect(Tok::kIdent, "column or aggregate");
    std::string_view agg = dialect::kNoAgg;
    SqlAst column;
    if (peek().kind == Tok::kLParen) {
      auto named = aggregate_named(name.text);
      if (!named) {
        throw sql_error("sql_syntax", "unknown aggregate '" + name.text + "'", name.offset);
      }
      agg = *named;
      ++pos_;
      const Token& col = expect(Tok::kIdent, "column");
      column = column_node(col);
      expect(Tok::kRParen, "')'");
    } else {
      column = column_node(name);
    }
    std::vector<SqlAst> children;
    children.push_back(SqlAst::node(std::string(dialect::kAggType), std::string(agg)));
    children.push_back(std::move(column));
    return SqlAst::node(std::string(dialect::kAgg), "", std::move(children));
  }

  SqlAst parse_or() {
    SqlAst left = parse_and();
    while (accept_keyword("OR")) {
      std::vector<SqlAst> children;
      children.push_back(std::move(left));
      children.push_back(parse_and());
      left = SqlAst::node(std::string(dialect::kCond), std::string(dialect::kOr), std::move(children));
    }
    return left;
  }

  SqlAst parse_and() {
    SqlAst left = parse_not();
    while (accept_keyword("AND")) {
      std::vector<SqlAst> children;
      children.push_back(std::move(left));
      children.push_back(parse_not());
      left = SqlAst::node(std::string(dialect::kCond), std::string(dialect::kAnd), std::move(children));
    }
    return left;
  }

  SqlAst parse_not() {
    if (accept_keyword("NOT")) {
      std::vector<SqlAst> children;
      children.push_back(parse_not());
      return SqlAst::node(std::string(dialect::kCond), std::string(dialect::kNot), std::move(children));
    }
    if (accept(Tok::kLParen)) {
      SqlAst inner = parse_or();
      expect(Tok::kRParen, "')'");
      return inner;
    }
    const Token& column = expect(Tok::kIdent, "column");
    const Token& op = expect(Tok::kOp, "comparison operator");
    std::string_view ctor;
    for (const auto& entry : dialect::kOperators) {
      if (entry.text == op.text) ctor = entry.constructor;
    }
    Literal literal;
    if (peek().kind == Tok::kString) {
      literal = {Literal::Kind::kString, peek().text};
    } else if (peek().kind == Tok::kNumber) {
      literal = {Literal::Kind::kNumber, peek().text};
    } else {
      fail("literal");
    }
    ++pos_;
    std::vector<SqlAst> children;
    children.push_back(SqlAst::node(std::string(dialect::kCmpOp), std::string(ctor)));
    children.push_back(column_node(column));
    children.push_back(SqlAst::terminal(std::string(kValueCategory), literal.surface()));
    return SqlAst::node(std::string(dialect::kCond), std::string(dialect::kCompare), std::move(children));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

void collect_columns(SqlAst& node, std::vector<SqlAst*>& out) {
  if (node.symbol == kColumnCategory && node.is_terminal()) {
    out.push_back(&node);
    return;
  }
  for (SqlAst& child : node.children) collect_columns(child, out);
}

[[noreturn]] void outside_dialect(const SqlAst& node) {
  throw Error("sql_render", "node outside the reference dialect: " + node.symbol +
                                (node.constructor.empty() ? "" : "." + node.constructor));
}

const std::string& expect_token(const SqlAst& node, std::string_view category) {
  if (node.symbol != category || !node.is_terminal()) outside_dialect(node);
  return node.token;
}

std::string render_agg(const SqlAst& agg) {
  if (agg.symbol != dialect::kAgg || agg.children.size() != 2 ||
      agg.children[0].symbol != dialect::kAggType) {
    outside_dialect(agg);
  }
  const std::string& fn = agg.children[0].constructor;
  const std::string& column = expect_token(agg.children[1], kColumnCategory);
  if (fn == dialect::kNoAgg) return column;
  if (std::find(std::begin(dialect::kAggregates), std::end(dialect::kAggregates), fn) ==
      std::end(dialect::kAggregates)) {
    outside_dialect(agg.children[0]);
  }
  return fn + "(" + column + ")";
}

int precedence(const SqlAst& cond) {
  if (cond.constructor == dialect::kOr) return 1;
  if (cond.constructor == dialect::kAnd) return 2;
  if (cond.constructor == dialect::kNot) return 3;
  return 4;
}

std::string render_cond(const SqlAst& cond);

std::string wrap(const SqlAst& child, bool parens) {
  std::string text = render_cond(child);
  return parens ? "(" + text + ")" : text;
}

std::string render_cond(const SqlAst& cond) {
  if (cond.symbol != dialect::kCond) outside_dialect(cond);
  const int mine = precedence(cond);
  if (cond.constructor == dialect::kAnd || cond.constructor == dialect::kOr) {
    if (cond.children.size() != 2) outside_dialect(cond);
    // Left-associative: a right operand of equal precedence needs parens.
    const std::string keyword = cond.constructor == dialect::kAnd ? " AND " : " OR ";
    return wrap(cond.children[0], precedence(cond.children[0]) < mine) + keyword +
           wrap(cond.children[1], precedence(cond.children[1]) <= mine);
  }
  if (cond.constructor == dialect::kNot) {
    if (cond.children.size() != 1) outside_dialect(cond);
    return "NOT " + wrap(cond.children[0], precedence(cond.children[0]) < mine);
  }
  if (cond.constructor == dialect::kCompare) {
    if (cond.children.size() != 3 || cond.children[0].symbol != dialect::kCmpOp) {
      outside_dialect(cond);
    }
    std::string_view op;
    for (const auto& entry : dialect::kOperators) {
      if (entry.constructor == cond.children[0].constructor) op = entry.text;
    }
    if (op.empty()) outside_dialect(cond.children[0]);
    const std::string& column = expect_token(cond.children[1], kColumnCategory);
    const std::string& value = expect_token(cond.children[2], kValueCategory);
    Literal::from_surface(value);
    return column + " " + std::string(op) + " " + value;
  }
  outside_dialect(cond);
}

}  // namespace

SqlAst parse_sql_unchecked(std::string_view text) {
  Parser parser(text);
  return parser.parse();
}

SqlAst parse_sql(std::string_view text, const SchemaDb& schema,
                 const ParseOptions& options, std::vector<std::string>* warnings) {
  Parser parser(text);
  SqlAst tree = parser.parse();

  SqlAst& table_node = tree.children[1];
  const Table* table = schema.find_table(table_node.token);
  if (table == nullptr) {
    throw Error("sql_unknown_table", "unknown table '" + table_node.token +
                                         "' in database '" + schema.db_id + "'");
  }
  table_node.token = table->name;

  std::vector<SqlAst*> columns;
  collect_columns(tree, columns);
  for (SqlAst* column_node : columns) {
    const Column* column = table->find_column(column_node->token);
    if (column == nullptr) {
      const Column* elsewhere = schema.find_any_column(column_node->token);
      if (elsewhere == nullptr) {
        throw Error("sql_unknown_column", "unknown column '" + column_node->token +
                                              "' in database '" + schema.db_id + "'");
      }
      const std::string message = "column '" + elsewhere->name +
                                  "' does not belong to table '" + table->name + "'";
      if (options.strict_membership) throw Error("sql_membership", message);
      if (warnings != nullptr) warnings->push_back(message);
      column_node->token = elsewhere->name;
      continue;
    }
    column_node->token = column->name;
  }
  return tree;
}

std::string render_sql(const SqlAst& tree) {
  if (tree.symbol != dialect::kSql || tree.children.size() < 2 || tree.children.size() > 3) {
    outside_dialect(tree);
  }
  const SqlAst& select = tree.children[0];
  if (select.symbol != dialect::kSelect || select.children.empty()) outside_dialect(select);
  std::string out = "SELECT ";
  for (std::size_t i = 0; i < select.children.size(); ++i) {
    if (i > 0) out += ", ";
    out += render_agg(select.children[i]);
  }
  out += " FROM " + expect_token(tree.children[1], kTableCategory);
  if (tree.children.size() == 3) out += " WHERE " + render_cond(tree.children[2]);
  return out;
}

std::string canonical_sql(std::string_view text) {
  return render_sql(parse_sql_unchecked(text));
}

std::string from_table(const SqlAst& tree) {
  for (const SqlAst& child : tree.children) {
    if (child.symbol == kTableCategory && child.is_terminal()) return child.token;
  }
  return "";
}

LiteralMap collect_literals(const SqlAst& tree) {
  LiteralMap out;
  const std::string table = from_table(tree);
  auto visit = [&](const auto& self, const SqlAst& node) -> void {
    if (node.symbol == dialect::kCond && node.constructor == dialect::kCompare &&
        node.children.size() == 3) {
      out[column_key(table, node.children[1].token)].push_back(
          Literal::from_surface(node.children[2].token));
      return;
    }
    for (const SqlAst& child : node.children) self(self, child);
  };
  visit(visit, tree);
  return out;
}

}  // namespace sqlforge
