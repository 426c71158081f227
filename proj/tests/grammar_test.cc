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

#include "sqlforge/grammar.h"

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include "sqlforge/sql.h"
#include "test_util.h"

namespace sqlforge {
namespace {

using testing::data_path;
using testing::toy_grammar;
using testing::read_text;

std::set<std::string> signatures(const RuleSet& rules) {
  std::set<std::string> out;
  for (const ProductionRule& rule : rules.rules()) out.insert(rule.signature());
  return out;
}

TEST(LoadAsdl, SqlProductType) {
  const AsdlGrammar grammar = load_asdl("sql = (select select, cond? where)\n"
                                        "select = (column c)\ncond = Not(cond c)");
  const TypeDecl* sql = grammar.find_type("sql");
  ASSERT_NE(sql, nullptr);
  ASSERT_EQ(sql->constructors.size(), 1u);
  EXPECT_TRUE(sql->is_product());
  const std::vector<Field> expected{{"select", "select", Cardinality::kSingle},
                                    {"cond", "where", Cardinality::kOptional}};
  EXPECT_EQ(sql->constructors[0].fields, expected);
}

TEST(LoadAsdl, NullaryAlternatives) {
  const AsdlGrammar grammar = toy_grammar();
  const TypeDecl* agg_type = grammar.find_type("agg_type");
  ASSERT_NE(agg_type, nullptr);
  ASSERT_EQ(agg_type->constructors.size(), 3u);
  EXPECT_EQ(agg_type->constructors[0].name, "NoneAggOp");
  EXPECT_EQ(agg_type->constructors[1].name, "Max");
  EXPECT_EQ(agg_type->constructors[2].name, "Min");
  for (const Constructor& ctor : agg_type->constructors) EXPECT_TRUE(ctor.fields.empty());
}

TEST(LoadAsdl, ToyFixture) {
  const AsdlGrammar grammar = toy_grammar();
  EXPECT_EQ(grammar.types.size(), 5u);
  EXPECT_EQ(grammar.root, "sql");
  const TypeDecl* cond = grammar.find_type("cond");
  ASSERT_NE(cond, nullptr);
  ASSERT_EQ(cond->constructors.size(), 3u);
  EXPECT_EQ(cond->find_constructor("Not")->fields.size(), 1u);
  EXPECT_EQ(grammar.find_type("select")->constructors[0].fields[0].cardinality,
            Cardinality::kSequence);
  EXPECT_TRUE(grammar.is_terminal_category("column"));
}

TEST(LoadAsdl, EmptyTextHasNoRoot) {
  try {
    load_asdl("");
    FAIL() << "expected an error";
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.kind(), "asdl_no_root");
  }
}

TEST(LoadAsdl, SyntaxErrorCarriesPosition) {
  try {
    load_asdl("sql = (select select\nselect = (agg* aggs))");
    FAIL() << "expected an error";
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.kind(), "asdl_syntax");
    EXPECT_EQ(e.line(), 2);
  }
  try {
    load_asdl("sql = (select select, cond% where)");
    FAIL() << "expected an error";
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 27);
  }
}

TEST(LoadAsdl, UndeclaredType) {
  try {
    load_asdl("sql = (select select)\n");
    FAIL() << "expected an error";
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.kind(), "asdl_undeclared_type");
    EXPECT_EQ(e.line(), 1);
  }
}

TEST(LoadAsdl, DuplicateConstructor) {
  EXPECT_THROW(load_asdl("sql = (op o)\nop = Max | Min | Max"), GrammarError);
  try {
    load_asdl("sql = (op o)\nop = Max | Min | Max");
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.kind(), "asdl_duplicate_constructor");
  }
}

TEST(LoadAsdl, ExtraTerminalKeyword) {
  const AsdlGrammar grammar = load_asdl("terminal ident\nsql = (ident name)");
  EXPECT_TRUE(grammar.is_terminal_category("ident"));
  const RuleSet rules = derive_rules(grammar, 1);
  EXPECT_TRUE(rules.is_terminal_category("ident"));
}

TEST(LoadAsdl, RenderRoundTrip) {
  for (const AsdlGrammar& grammar : {toy_grammar(), dialect::grammar()}) {
    EXPECT_EQ(load_asdl(render_asdl(grammar)), grammar);
  }
}

TEST(LoadAsdl, BundledDialectFileMatchesBuiltIn) {
  EXPECT_EQ(read_text(data_path("grammars/sql_dialect.asdl")), dialect::grammar_text());
  EXPECT_EQ(load_asdl(read_text(data_path("grammars/sql_dialect.asdl"))), dialect::grammar());
}

TEST(DeriveRules, OptionalFieldGivesTwoRules) {
  const AsdlGrammar grammar = toy_grammar();
  const RuleSet rules = derive_rules(grammar, 2);
  const auto sql = rules.rules_for("sql");
  ASSERT_EQ(sql.size(), 2u);
  EXPECT_EQ(rules.rule(sql[0]).signature(), "sql -> select");
  EXPECT_EQ(rules.rule(sql[1]).signature(), "sql -> select, cond");
}

TEST(DeriveRules, SequenceArity) {
  const RuleSet rules = derive_rules(toy_grammar(), 2);
  const auto select = rules.rules_for("select");
  ASSERT_EQ(select.size(), 2u);
  EXPECT_EQ(rules.rule(select[0]).signature(), "select -> agg");
  EXPECT_EQ(rules.rule(select[1]).signature(), "select -> agg, agg");
  EXPECT_EQ(derive_rules(toy_grammar(), 4).rules_for("select").size(), 4u);
}

TEST(DeriveRules, SingleConstructorNoExpansion) {
  const RuleSet rules = derive_rules(load_asdl("sql = (column a, table b)"), 3);
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(rules.rule(0).to_string(), "sql -> column table");
}

TEST(DeriveRules, TaggedRulesCarryConstructorTerminal) {
  const RuleSet rules = derive_rules(toy_grammar(), 2);
  const auto cond = rules.rules_for("cond");
  ASSERT_EQ(cond.size(), 3u);
  const ProductionRule& and_rule = rules.rule(cond[0]);
  ASSERT_EQ(and_rule.rhs.size(), 3u);
  EXPECT_EQ(and_rule.rhs[0], Symbol::token("And"));
  EXPECT_EQ(and_rule.rhs[1], Symbol::nonterminal("cond"));
  EXPECT_EQ(and_rule.child_symbols(), (std::vector<std::string>{"cond", "cond"}));
  EXPECT_EQ(and_rule.signature(), "cond -> And");
}

TEST(DeriveRules, CollidingCombinationsCollapse) {
  // (present, absent) and (absent, present) both read "sql -> column".
  const RuleSet rules = derive_rules(load_asdl("sql = (column? a, column? b)"), 1);
  ASSERT_EQ(rules.size(), 2u);
  EXPECT_EQ(rules.rule(0).to_string(), "sql -> column");
  EXPECT_EQ(rules.rule(1).to_string(), "sql -> column column");
}

TEST(DeriveRules, ZeroArityRejected) {
  EXPECT_THROW(derive_rules(toy_grammar(), 0), Error);
}

TEST(DeriveRules, RuleCeiling) {
  const AsdlGrammar grammar = load_asdl(
      "terminal a, b, c, d, e\nsql = (a* a, b* b, c* c, d* d, e* e)");
  EXPECT_EQ(derive_rules(grammar, 3).size(), 243u);
  try {
    derive_rules(grammar, 10, 1000);
    FAIL() << "expected ceiling error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "rule_ceiling");
  }
}

TEST(DeriveRules, Deterministic) {
  const std::string text = read_text(data_path("grammars/sql_dialect.asdl"));
  const RuleSet a = derive_rules(load_asdl(text), 3);
  const RuleSet b = derive_rules(load_asdl(text), 3);
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
}

TEST(DeriveRules, DumpFormat) {
  const RuleSet rules = derive_rules(toy_grammar(), 2);
  std::istringstream in(rules.dump());
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "0\tsql\tselect");
  std::string line;
  std::size_t count = 1;
  while (std::getline(in, line)) ++count;
  EXPECT_EQ(count, rules.size());
}

TEST(DeriveRules, FingerprintSensitiveToGrammar) {
  const RuleSet base = derive_rules(toy_grammar(), 2);
  std::string text = read_text(data_path("grammars/toy.asdl"));
  text.replace(text.find("Min"), 3, "Avg");
  EXPECT_NE(derive_rules(load_asdl(text), 2).fingerprint(), base.fingerprint());
}

TEST(RuleSet, LookupsAgree) {
  const RuleSet rules = derive_rules(dialect::grammar(), 3);
  for (const ProductionRule& rule : rules.rules()) {
    const auto found = rules.find(rule.lhs, rule.rhs);
    ASSERT_TRUE(found.has_value());
    EXPECT_EQ(*found, rule.id);
    EXPECT_EQ(&rules.rule(rule.id), &rule);
  }
}

TEST(RuleSet, RejectsEmptyAndDuplicateRules) {
  RuleSet rules("s", {});
  rules.add("s", {Symbol::token("x")});
  EXPECT_THROW(rules.add("s", {}), Error);
  EXPECT_THROW(rules.add("s", {Symbol::token("x")}), Error);
  EXPECT_THROW(rules.rule(7), Error);
}

TEST(RuleSet, DanglingOnlyForCategoriesBeforeGrounding) {
  const RuleSet rules = derive_rules(dialect::grammar(), 2);
  EXPECT_TRUE(rules.dangling_nonterminals(false).empty());
  const std::vector<std::string> categories = rules.dangling_nonterminals(true);
  EXPECT_EQ(std::set<std::string>(categories.begin(), categories.end()),
            (std::set<std::string>{"column", "table", "value"}));
}

TEST(RuleSet, ToyInventory) {
  const std::set<std::string> expected{
      "sql -> select",          "sql -> select, cond",   "select -> agg",
      "select -> agg, agg",     "agg -> agg_type, column", "agg_type -> NoneAggOp",
      "agg_type -> Min",        "agg_type -> Max",       "cond -> And",
      "cond -> Or",             "cond -> Not"};
  EXPECT_EQ(signatures(derive_rules(toy_grammar(), 2)), expected);
}

// Oracle: enumerate every field combination independently and compare the
// rhs sets, plus the closed-form count per constructor.
TEST(DeriveRulesProperty, CountMatchesBruteForce) {
  std::mt19937 rng(2024);
  const std::vector<std::string> suffixes{"", "?", "*"};
  for (int trial = 0; trial < 60; ++trial) {
    const int fields = 1 + static_cast<int>(rng() % 4);
    const std::size_t arity = 1 + rng() % 3;
    std::vector<int> cards;
    std::string text = "terminal k0, k1, k2, k3\nsql = T(";
    for (int i = 0; i < fields; ++i) {
      cards.push_back(static_cast<int>(rng() % 3));
      if (i > 0) text += ", ";
      text += "k" + std::to_string(i) + suffixes[cards.back()] + " f" + std::to_string(i);
    }
    text += ")";
    const RuleSet rules = derive_rules(load_asdl(text), arity);

    std::set<std::vector<Symbol>> oracle;
    std::vector<Symbol> prefix{Symbol::token("T")};
    std::function<void(int, std::vector<Symbol>)> walk = [&](int i, std::vector<Symbol> rhs) {
      if (i == fields) {
        oracle.insert(rhs);
        return;
      }
      const Symbol field = Symbol::nonterminal("k" + std::to_string(i));
      if (cards[i] == 0) {
        rhs.push_back(field);
        walk(i + 1, rhs);
      } else if (cards[i] == 1) {
        walk(i + 1, rhs);
        rhs.push_back(field);
        walk(i + 1, rhs);
      } else {
        for (std::size_t n = 1; n <= arity; ++n) {
          std::vector<Symbol> next = rhs;
          next.insert(next.end(), n, field);
          walk(i + 1, next);
        }
      }
    };
    walk(0, prefix);

    std::size_t closed_form = 1;
    for (int c : cards) closed_form *= c == 1 ? 2 : (c == 2 ? arity : 1);

    std::set<std::vector<Symbol>> derived;
    for (const ProductionRule& rule : rules.rules()) derived.insert(rule.rhs);
    EXPECT_EQ(rules.size(), closed_form) << text;
    EXPECT_EQ(oracle.size(), closed_form) << text;
    EXPECT_EQ(derived, oracle) << text;
  }
}

}  // namespace
}  // namespace sqlforge
