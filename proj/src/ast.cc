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

#include "sqlforge/ast.h"

#include <algorithm>
#include <optional>

namespace sqlforge {
namespace {

void validate_node(const RuleSet& rules, const SqlAst& node,
                   std::vector<std::size_t>& path,
                   std::vector<TreeViolation>& out) {
  const std::vector<Symbol> rhs = node.rhs();
  if (rhs.empty() || !rules.find(node.symbol, rhs)) {
    ProductionRule missing{0, node.symbol, rhs};
    out.push_back({path, "no rule " + (rhs.empty() ? node.symbol + " -> (empty)"
                                                   : missing.to_string())});
  }
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    validate_node(rules, node.children[i], path, out);
    path.pop_back();
  }
}

void linearize_node(const SqlAst& node, const RuleSet& rules,
                    std::vector<std::size_t>& path, Derivation& out) {
  const std::vector<Symbol> rhs = node.rhs();
  const std::optional<RuleId> id = rules.find(node.symbol, rhs);
  if (!id) {
    ProductionRule missing{0, node.symbol, rhs};
    throw Error("rule_missing", "tree uses a rule not in the rule set: " +
                                    (rhs.empty() ? node.symbol
                                                 : missing.to_string()) +
                                    " at " + path_string(path));
  }
  out.rule_ids.push_back(*id);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    linearize_node(node.children[i], rules, path, out);
    path.pop_back();
  }
}

// Returns the largest sequence arity of the first field assignment that
// consumes `children` exactly, or nullopt when none does.
std::optional<std::size_t> match_fields(const std::vector<Field>& fields,
                                        std::size_t field_index,
                                        const std::vector<SqlAst>& children,
                                        std::size_t child_index) {
  if (field_index == fields.size()) {
    if (child_index == children.size()) return 0;
    return std::nullopt;
  }
  const Field& field = fields[field_index];
  auto takes = [&](std::size_t n) {
    if (child_index + n > children.size()) return false;
    for (std::size_t k = 0; k < n; ++k) {
      if (children[child_index + k].symbol != field.type) return false;
    }
    return true;
  };
  std::size_t low = 1;
  std::size_t high = 1;
  if (field.cardinality == Cardinality::kOptional) low = 0;
  if (field.cardinality == Cardinality::kSequence) {
    high = children.size() - std::min(children.size(), child_index);
  }
  for (std::size_t n = low; n <= high; ++n) {
    if (!takes(n)) break;
    auto rest = match_fields(fields, field_index + 1, children, child_index + n);
    if (rest) {
      return field.cardinality == Cardinality::kSequence ? std::max(n, *rest)
                                                         : *rest;
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<Symbol> SqlAst::rhs() const {
  if (is_terminal()) return {Symbol::token(token)};
  std::vector<Symbol> out;
  if (!constructor.empty()) out.push_back(Symbol::token(constructor));
  for (const SqlAst& child : children) {
    out.push_back(Symbol::nonterminal(child.symbol));
  }
  return out;
}

std::size_t SqlAst::node_count() const {
  std::size_t count = 1;
  for (const SqlAst& child : children) count += child.node_count();
  return count;
}

std::size_t SqlAst::depth() const {
  std::size_t deepest = 0;
  for (const SqlAst& child : children) deepest = std::max(deepest, child.depth());
  return deepest + 1;
}

std::string path_string(const std::vector<std::size_t>& path) {
  std::string out = "[";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(path[i]);
  }
  return out + "]";
}

std::vector<TreeViolation> validate_tree(const RuleSet& rules,
                                         const SqlAst& tree) {
  std::vector<TreeViolation> violations;
  if (tree.symbol != rules.root()) {
    violations.push_back({{}, "root symbol '" + tree.symbol +
                                  "' differs from rule-set root '" +
                                  rules.root() + "'"});
  }
  std::vector<std::size_t> path;
  validate_node(rules, tree, path, violations);
  return violations;
}

Derivation linearize(const SqlAst& tree, const RuleSet& rules) {
  Derivation derivation;
  std::vector<std::size_t> path;
  linearize_node(tree, rules, path, derivation);
  return derivation;
}

SqlAst delinearize(const Derivation& derivation, const RuleSet& rules) {
  SqlAst root;
  root.symbol = rules.root();
  // Open slots, leftmost on top. Children vectors are sized once before their
  // addresses are pushed, so the pointers stay valid.
  std::vector<SqlAst*> open{&root};
  std::size_t next = 0;
  while (!open.empty()) {
    if (next == derivation.rule_ids.size()) {
      std::string names;
      for (auto it = open.rbegin(); it != open.rend(); ++it) {
        if (!names.empty()) names += ", ";
        names += (*it)->symbol;
      }
      throw Error("derivation_underflow",
                  "derivation exhausted with open nonterminals: " + names);
    }
    SqlAst* slot = open.back();
    open.pop_back();
    const RuleId id = derivation.rule_ids[next];
    const ProductionRule& rule = rules.rule(id);
    if (rule.lhs != slot->symbol) {
      throw Error("derivation_mismatch",
                  "rule " + std::to_string(id) + " (" + rule.to_string() +
                      ") at position " + std::to_string(next) +
                      " cannot expand '" + slot->symbol + "'");
    }
    ++next;
    if (rules.is_terminal_category(rule.lhs)) {
      slot->token = rule.rhs.front().name;
      continue;
    }
    if (rule.rhs.front().terminal) slot->constructor = rule.rhs.front().name;
    const std::vector<std::string> child_symbols = rule.child_symbols();
    slot->children.resize(child_symbols.size());
    for (std::size_t i = 0; i < child_symbols.size(); ++i) {
      slot->children[i].symbol = child_symbols[i];
    }
    for (auto it = slot->children.rbegin(); it != slot->children.rend(); ++it) {
      open.push_back(&*it);
    }
  }
  if (next != derivation.rule_ids.size()) {
    throw Error("derivation_overflow",
                std::to_string(derivation.rule_ids.size() - next) +
                    " rule(s) remain after the tree was completed");
  }
  return root;
}

std::size_t max_sequence_arity(const AsdlGrammar& grammar, const SqlAst& tree) {
  if (tree.is_terminal()) return 0;
  const TypeDecl* type = grammar.find_type(tree.symbol);
  if (type == nullptr) {
    throw Error("tree_invalid", "tree node of undeclared type '" + tree.symbol + "'");
  }
  const Constructor* ctor = type->find_constructor(tree.constructor);
  if (ctor == nullptr) {
    throw Error("tree_invalid", "type '" + tree.symbol +
                                    "' has no constructor '" +
                                    tree.constructor + "'");
  }
  std::optional<std::size_t> arity =
      match_fields(ctor->fields, 0, tree.children, 0);
  if (!arity) {
    throw Error("tree_invalid", "children of '" + tree.symbol +
                                    "' do not match its fields");
  }
  std::size_t result = *arity;
  for (const SqlAst& child : tree.children) {
    result = std::max(result, max_sequence_arity(grammar, child));
  }
  return result;
}

}  // namespace sqlforge
