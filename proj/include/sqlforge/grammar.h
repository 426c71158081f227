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

// ASDL grammars and the flat context-free rule inventory derived from them.
//
// Surface syntax accepted by load_asdl:
//
//   -- comment to end of line
//   terminal agg_id, col_id          (extra terminal categories)
//   sql = (select select, cond? where)
//   agg_type = NoneAggOp | Max | Min
//   cond = And(cond left, cond right) | Not(cond c)
//
// column, table and value are always available as terminal categories. They
// stay unexpanded until schema grounding adds rules such as "column -> age".

#ifndef SQLFORGE_GRAMMAR_H_
#define SQLFORGE_GRAMMAR_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqlforge/error.h"

namespace sqlforge {

class GrammarError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

enum class Cardinality { kSingle, kOptional, kSequence };

struct Field {
  std::string type;
  std::string name;
  Cardinality cardinality = Cardinality::kSingle;

  bool operator==(const Field&) const = default;
};

struct Constructor {
  // Empty for the single unnamed constructor of a product type.
  std::string name;
  std::vector<Field> fields;

  bool operator==(const Constructor&) const = default;
};

struct TypeDecl {
  std::string name;
  std::vector<Constructor> constructors;

  bool is_product() const {
    return constructors.size() == 1 && constructors.front().name.empty();
  }
  const Constructor* find_constructor(std::string_view name) const;

  bool operator==(const TypeDecl&) const = default;
};

inline constexpr std::string_view kDefaultRoot = "sql";
inline constexpr std::string_view kTableCategory = "table";
inline constexpr std::string_view kColumnCategory = "column";
inline constexpr std::string_view kValueCategory = "value";

struct AsdlGrammar {
  std::vector<TypeDecl> types;
  // Declared with the `terminal` keyword; the reserved categories are implied.
  std::vector<std::string> extra_terminals;
  std::string root = std::string(kDefaultRoot);

  const TypeDecl* find_type(std::string_view name) const;
  bool is_terminal_category(std::string_view name) const;

  bool operator==(const AsdlGrammar&) const = default;
};

// Parses the ASDL surface syntax. Throws GrammarError on syntax errors,
// undeclared field types, duplicate types or constructors, and a missing root.
AsdlGrammar load_asdl(std::string_view text,
                      std::string_view root = kDefaultRoot);

// Inverse of load_asdl up to whitespace and comments.
std::string render_asdl(const AsdlGrammar& grammar);

// A grammar symbol. Nonterminals are type names or terminal categories;
// terminals are constructor tags or grounded tokens (identifiers, literals in
// their SQL surface form).
struct Symbol {
  std::string name;
  bool terminal = false;

  static Symbol nonterminal(std::string name) { return {std::move(name), false}; }
  static Symbol token(std::string name) { return {std::move(name), true}; }

  auto operator<=>(const Symbol&) const = default;
};

using RuleId = std::uint32_t;

struct ProductionRule {
  RuleId id = 0;
  std::string lhs;
  std::vector<Symbol> rhs;

  // Nonterminal symbols of rhs, in order: the children of a tree node built
  // by this rule.
  std::vector<std::string> child_symbols() const;
  // "lhs -> a b c", all rhs symbols.
  std::string to_string() const;
  // The inventory form used when listing rules by hand: a tagged rule shows
  // only its tag ("cond -> And"), any other rule shows its rhs joined with
  // ", " ("agg -> agg_type, column").
  std::string signature() const;
};

class RuleSet {
 public:
  RuleSet() = default;
  RuleSet(std::string root, std::vector<std::string> terminal_categories);

  // Appends a rule and returns its id (ids are dense and assigned in
  // insertion order). Throws Error on an empty rhs or a duplicate rule.
  RuleId add(std::string lhs, std::vector<Symbol> rhs);

  const std::string& root() const { return root_; }
  const std::vector<std::string>& terminal_categories() const {
    return terminal_categories_;
  }
  bool is_terminal_category(std::string_view symbol) const;

  std::size_t size() const { return rules_.size(); }
  const std::vector<ProductionRule>& rules() const { return rules_; }
  // Throws Error for an unknown id.
  const ProductionRule& rule(RuleId id) const;
  bool contains(RuleId id) const { return id < rules_.size(); }

  // Ids of the rules sharing an lhs, in id order; empty when none.
  std::span<const RuleId> rules_for(std::string_view lhs) const;
  std::optional<RuleId> find(std::string_view lhs,
                             std::span<const Symbol> rhs) const;
  // Every lhs in order of first appearance.
  const std::vector<std::string>& lhs_symbols() const { return lhs_order_; }

  // Nonterminals used in some rhs that have no rule. Terminal categories are
  // reported only when include_categories is set (i.e. after grounding).
  std::vector<std::string> dangling_nonterminals(
      bool include_categories) const;

  // "rule_id<TAB>lhs<TAB>rhs symbols space-separated", one line per rule.
  std::string dump() const;
  // Hex digest over root, categories and every rule with symbol kinds.
  std::string fingerprint() const;

 private:
  std::string root_ = std::string(kDefaultRoot);
  std::vector<std::string> terminal_categories_;
  std::vector<ProductionRule> rules_;
  std::vector<std::string> lhs_order_;
  std::map<std::string, std::vector<RuleId>, std::less<>> by_lhs_;
  std::map<std::pair<std::string, std::vector<Symbol>>, RuleId> by_body_;
};

inline constexpr std::size_t kDefaultRuleCeiling = 100000;

// Expands every constructor into one rule per combination of optional-field
// presence and sequence arity 1..max_seq_arity. Tagged constructors put the
// tag terminal first. Throws Error when max_seq_arity is 0 or the expansion
// would exceed rule_ceiling.
RuleSet derive_rules(const AsdlGrammar& grammar, std::size_t max_seq_arity,
                     std::size_t rule_ceiling = kDefaultRuleCeiling);

// 64-bit FNV-1a, used for fingerprints and seed derivation.
std::uint64_t fnv1a(std::string_view bytes,
                    std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

}  // namespace sqlforge

#endif  // SQLFORGE_GRAMMAR_H_
