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

#ifndef SQLFORGE_AST_H_
#define SQLFORGE_AST_H_

#include <cstddef>
#include <string>
#include <vector>

#include "sqlforge/grammar.h"

namespace sqlforge {

// One rule application. A node is exactly one of:
//   - a terminal-category node (table/column/value): `token` holds the
//     grounded terminal, no children;
//   - a constructor node: `constructor` holds the tag, children are the
//     constructor's fields (nullary constructors have none);
//   - a product node: both empty, children are the fields.
struct SqlAst {
  std::string symbol;
  std::string constructor;
  std::string token;
  std::vector<SqlAst> children;

  static SqlAst terminal(std::string category, std::string token) {
    return {std::move(category), "", std::move(token), {}};
  }
  static SqlAst node(std::string symbol, std::string constructor,
                     std::vector<SqlAst> children = {}) {
    return {std::move(symbol), std::move(constructor), "",
            std::move(children)};
  }

  bool is_terminal() const { return !token.empty(); }
  // The rhs this node was built with: grounded token, or tag followed by the
  // children's symbols.
  std::vector<Symbol> rhs() const;
  std::size_t node_count() const;
  std::size_t depth() const;

  bool operator==(const SqlAst&) const = default;
};

// Preorder, leftmost-derivation rule sequence of a tree.
struct Derivation {
  std::vector<RuleId> rule_ids;

  bool operator==(const Derivation&) const = default;
};

struct TreeViolation {
  // Child indices from the root; empty for the root itself.
  std::vector<std::size_t> path;
  std::string message;
};

// One violation per node whose rule is not in `rules`, plus one at the root
// path when the root symbol differs from rules.root().
std::vector<TreeViolation> validate_tree(const RuleSet& rules,
                                         const SqlAst& tree);

// Throws Error when a node's rule is missing from `rules`.
Derivation linearize(const SqlAst& tree, const RuleSet& rules);

// Rebuilds the tree by leftmost derivation from rules.root(). Throws Error
// on underflow (naming every open nonterminal), overflow, or an lhs mismatch.
SqlAst delinearize(const Derivation& derivation, const RuleSet& rules);

// Largest sequence-field arity used anywhere in `tree` under `grammar`; 0 if
// the tree uses no sequence field. Throws Error when a node matches no
// constructor of its type.
std::size_t max_sequence_arity(const AsdlGrammar& grammar, const SqlAst& tree);

std::string path_string(const std::vector<std::size_t>& path);

}  // namespace sqlforge

#endif  // SQLFORGE_AST_H_
