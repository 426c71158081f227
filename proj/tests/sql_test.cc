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

#include <gtest/gtest.h>

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "sqlforge/pcfg.h"
#include "test_util.h"

namespace sqlforge {
namespace {

using testing::data_path;

const SchemaDb& geo() {
  static const std::vector<SchemaDb> schemas = load_schemas(data_path("geo/schema.json"));
  return schemas.front();
}

SqlAst compare(std::string op, std::string column, std::string value) {
  return SqlAst::node("cond", "Compare",
                      {SqlAst::node("cmp_op", std::move(op)),
                       SqlAst::terminal("column", std::move(column)),
                       SqlAst::terminal("value", std::move(value))});
}

SqlAst plain(std::string column) {
  return SqlAst::node("agg", "", {SqlAst::node("agg_type", "NoneAggOp"),
                                  SqlAst::terminal("column", std::move(column))});
}

std::vector<std::string> corpus_sqls() {
  std::vector<std::string> out;
  std::istringstream in(testing::read_text(data_path("geo/corpus.jsonl")));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line).at("sql").get<std::string>());
  }
  return out;
}

TEST(ParseSql, RiverTraverseNewYork) {
  const SqlAst tree = parse_sql(R"(SELECT length FROM river WHERE traverse = "new york")", geo());
  const SqlAst expected = SqlAst::node(
      "sql", "",
      {SqlAst::node("select", "", {plain("length")}), SqlAst::terminal("table", "river"),
       compare("Eq", "traverse", "\"new york\"")});
  EXPECT_EQ(tree, expected);
}

TEST(ParseSql, SumAggregate) {
  const SqlAst tree =
      parse_sql(R"(SELECT Sum(length) FROM river WHERE traverse = "colorado")", geo());
  EXPECT_EQ(tree.children[0].children[0].children[0].constructor, "Sum");
  EXPECT_EQ(tree.children[0].children[0].children[1].token, "length");
}

TEST(ParseSql, EmptySelectList) {
  try {
    parse_sql("SELECT FROM river", geo());
    FAIL() << "expected an error";
  } catch (const SqlError& e) {
    EXPECT_EQ(e.kind(), "sql_syntax");
    EXPECT_NE(std::string(e.what()).find("empty select list"), std::string::npos);
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 8);
  }
}

TEST(ParseSql, LexicalError) {
  try {
    parse_sql("SELECT length FROM river WHERE traverse = \"open", geo());
    FAIL() << "expected an error";
  } catch (const SqlError& e) {
    EXPECT_EQ(e.kind(), "sql_lexical");
  }
  EXPECT_THROW(parse_sql("SELECT length FROM river WHERE length = #", geo()), SqlError);
}

TEST(ParseSql, UnknownNames) {
  try {
    parse_sql("SELECT length FROM lake", geo());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "sql_unknown_table");
  }
  try {
    parse_sql("SELECT depth FROM river", geo());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "sql_unknown_column");
  }
}

TEST(ParseSql, MembershipStrictOrWarn) {
  const std::string text = R"(SELECT length FROM river WHERE capital = "austin")";
  try {
    parse_sql(text, geo());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "sql_membership");
  }
  std::vector<std::string> warnings;
  const SqlAst tree = parse_sql(text, geo(), {false}, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_EQ(render_sql(tree), text);
}

TEST(ParseSql, CaseAndOperatorNormalization) {
  const SqlAst tree = parse_sql("select MAX(Length) from RIVER where Traverse <> \"x\";", geo());
  EXPECT_EQ(render_sql(tree), R"(SELECT Max(length) FROM river WHERE traverse != "x")");
}

TEST(ParseSql, Precedence) {
  const SqlAst tree =
      parse_sql("SELECT length FROM river WHERE length = 1 OR length = 2 AND NOT length = 3",
                geo());
  const SqlAst& cond = tree.children[2];
  EXPECT_EQ(cond.constructor, "Or");
  EXPECT_EQ(cond.children[1].constructor, "And");
  EXPECT_EQ(cond.children[1].children[1].constructor, "Not");
  EXPECT_EQ(render_sql(tree),
            "SELECT length FROM river WHERE length = 1 OR length = 2 AND NOT length = 3");
}

TEST(ParseSql, LeftAssociative) {
  const SqlAst tree =
      parse_sql("SELECT length FROM river WHERE length = 1 AND length = 2 AND length = 3", geo());
  EXPECT_EQ(tree.children[2].children[0].constructor, "And");
  EXPECT_EQ(tree.children[2].children[1].constructor, "Compare");
}

TEST(RenderSql, MaxAgeOverPerson) {
  const SqlAst tree = SqlAst::node(
      "sql", "",
      {SqlAst::node("select", "",
                    {SqlAst::node("agg", "", {SqlAst::node("agg_type", "Max"),
                                              SqlAst::terminal("column", "age")})}),
       SqlAst::terminal("table", "person")});
  EXPECT_EQ(render_sql(tree), "SELECT Max(age) FROM person");
}

TEST(RenderSql, ParenthesesOnlyWhereNeeded) {
  const std::vector<std::string> cases{
      "SELECT length FROM river WHERE (length = 1 OR length = 2) AND length = 3",
      "SELECT length FROM river WHERE length = 1 AND (length = 2 AND length = 3)",
      "SELECT length FROM river WHERE NOT (length = 1 OR length = 2)",
      "SELECT length FROM river WHERE NOT NOT length = 1",
      "SELECT length FROM river WHERE length = 1 OR length = 2 OR length = 3",
  };
  for (const std::string& text : cases) {
    EXPECT_EQ(render_sql(parse_sql(text, geo())), text);
  }
  EXPECT_EQ(render_sql(parse_sql("SELECT length FROM river WHERE ((length = 1))", geo())),
            "SELECT length FROM river WHERE length = 1");
}

TEST(RenderSql, StringLiteralWithSpaceKeepsQuotes) {
  const std::string text = R"(SELECT length FROM river WHERE traverse = "new york")";
  EXPECT_EQ(render_sql(parse_sql(text, geo())), text);
}

TEST(RenderSql, OutsideDialectThrows) {
  EXPECT_THROW(render_sql(SqlAst::node("query", "")), Error);
}

TEST(CanonicalSql, NormalizesSpacingAndCase) {
  EXPECT_EQ(canonical_sql("  select   sum( length )  from river  where traverse=\"colorado\"  "),
            R"(SELECT Sum(length) FROM river WHERE traverse = "colorado")");
  EXPECT_EQ(canonical_sql("SELECT capital FROM state WHERE population = 15000"),
            "SELECT capital FROM state WHERE population = 15000");
}

TEST(FromTable, ReadsTableTerminal) {
  EXPECT_EQ(from_table(parse_sql("SELECT length FROM river", geo())), "river");
}

TEST(CollectLiterals, KeyedByFromTableColumn) {
  const LiteralMap literals = collect_literals(parse_sql(
      R"(SELECT capital FROM state WHERE population = 15000 OR state_name = "texas")", geo()));
  ASSERT_EQ(literals.size(), 2u);
  EXPECT_EQ(literals.at("state.population").front().kind, Literal::Kind::kNumber);
  EXPECT_EQ(literals.at("state.state_name").front().text, "texas");
}

TEST(ParseSql, Deterministic) {
  for (const std::string& sql : corpus_sqls()) {
    EXPECT_EQ(parse_sql(sql, geo()), parse_sql(sql, geo()));
  }
}

TEST(RoundTripProperty, CorpusFixpoint) {
  const std::vector<std::string> sqls = corpus_sqls();
  ASSERT_EQ(sqls.size(), 50u);
  for (const std::string& sql : sqls) {
    const std::string once = render_sql(parse_sql(sql, geo()));
    EXPECT_EQ(render_sql(parse_sql(once, geo())), once);
  }
}

TEST(RoundTripProperty, SampledCanonicalStrings) {
  const auto rules = std::make_shared<const RuleSet>(
      ground_rules(derive_rules(dialect::grammar(), 3), geo(), {}));
  Sampler sampler(uniform(rules), 5, {12, 200});
  for (int i = 0; i < 500; ++i) {
    const SqlAst tree = sampler.draw();
    const std::string text = render_sql(tree);
    const SqlAst parsed = parse_sql(text, geo(), {false});
    EXPECT_EQ(parsed, tree) << text;
    EXPECT_EQ(render_sql(parsed), text);
  }
}

}  // namespace
}  // namespace sqlforge
