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

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>

namespace sqlforge {
namespace {

constexpr std::string_view kReservedCategories[] = {
    kTableCategory, kColumnCategory, kValueCategory};

bool is_reserved_category(std::string_view name) {
  return std::find(std::begin(kReservedCategories),
                   std::end(kReservedCategories),
                   name) != std::end(kReservedCategories);
}

enum class Tok { kIdent, kEquals, kBar, kLParen, kRParen, kComma, kQuestion,
                 kStar, kEnd };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

std::vector<Token> tokenize_asdl(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    const int start_line = line;
    const int start_column = column;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_')) {
        ++j;
      }
      tokens.push_back({Tok::kIdent, std::string(text.substr(i, j - i)),
                        start_line, start_column});
      advance(j - i);
      continue;
    }
    Tok kind;
    switch (c) {
      case '=': kind = Tok::kEquals; break;
      case '|': kind = Tok::kBar; break;
      case '(': kind = Tok::kLParen; break;
      case ')': kind = Tok::kRParen; break;
      case ',': kind = Tok::kComma; break;
      case '?': kind = Tok::kQuestion; break;
      case '*': kind = Tok::kStar; break;
      default:
        throw GrammarError("asdl_syntax",
                           std::string("unexpected character '") + c + "'",
                           start_line, start_column);
    }
    tokens.push_back({kind, std::string(1, c), start_line, start_column});
    advance(1);
  }
  tokens.push_back({Tok::kEnd, "", line, column});
  return tokens;
}

class AsdlParser {
 public:
  explicit AsdlParser(std::string_view text) : tokens_(tokenize_asdl(text)) {}

  AsdlGrammar parse(std::string_view root) {
    AsdlGrammar grammar;
    grammar.root = std::string(root);
    while (peek().kind != Tok::kEnd) {
      const Token& head = expect(Tok::kIdent, "type name or 'terminal'");
      if (head.text == "terminal" && peek().kind != Tok::kEquals) {
        do {
          grammar.extra_terminals.push_back(
              expect(Tok::kIdent, "terminal category name").text);
        } while (accept(Tok::kComma));
        continue;
      }
      expect(Tok::kEquals, "'='");
      TypeDecl type{head.text, {}};
      if (peek().kind == Tok::kLParen) {
        type.constructors.push_back({"", parse_fields()});
      } else {
        do {
          const Token& name = expect(Tok::kIdent, "constructor name");
          Constructor ctor{name.text, {}};
          if (peek().kind == Tok::kLParen) ctor.fields = parse_fields();
          if (type.find_constructor(ctor.name) != nullptr) {
            throw GrammarError("asdl_duplicate_constructor",
                               "duplicate constructor '" + ctor.name +
                                   "' in type '" + type.name + "'",
                               name.line, name.column);
          }
          type.constructors.push_back(std::move(ctor));
        } while (accept(Tok::kBar));
      }
      if (grammar.find_type(type.name) != nullptr) {
        throw GrammarError("asdl_duplicate_type",
                           "duplicate type '" + type.name + "'", head.line,
                           head.column);
      }
      grammar.types.push_back(std::move(type));
    }
    check_references(grammar);
    return grammar;
  }

 private:
  struct FieldPos {
    int line;
    int column;
  };

  const Token& peek() const { return tokens_[pos_]; }

  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    ++pos_;
    return true;
  }

  const Token& expect(Tok kind, std::string_view what) {
    const Token& token = peek();
    if (token.kind != kind) {
      throw GrammarError(
          "asdl_syntax",
          "expected " + std::string(what) + " but found " +
              (token.kind == Tok::kEnd ? std::string("end of input")
                                       : "'" + token.text + "'"),
          token.line, token.column);
    }
    ++pos_;
    return token;
  }

  std::vector<Field> parse_fields() {
    const Token& open = expect(Tok::kLParen, "'('");
    std::vector<Field> fields;
    if (peek().kind == Tok::kRParen) {
      throw GrammarError("asdl_syntax", "empty field list", open.line,
                         open.column);
    }
    do {
      const Token& type = expect(Tok::kIdent, "field type");
      Field field{type.text, "", Cardinality::kSingle};
      if (accept(Tok::kQuestion)) {
        field.cardinality = Cardinality::kOptional;
      } else if (accept(Tok::kStar)) {
        field.cardinality = Cardinality::kSequence;
      }
      field.name = expect(Tok::kIdent, "field name").text;
      field_positions_.push_back({type.line, type.column});
      fields.push_back(std::move(field));
    } while (accept(Tok::kComma));
    expect(Tok::kRParen, "')' or ','");
    return fields;
  }

  void check_references(const AsdlGrammar& grammar) const {
    std::size_t index = 0;
    for (const TypeDecl& type : grammar.types) {
      for (const Constructor& ctor : type.constructors) {
        for (const Field& field : ctor.fields) {
          const FieldPos& at = field_positions_[index++];
          if (grammar.find_type(field.type) == nullptr &&
              !grammar.is_terminal_category(field.type)) {
            throw GrammarError("asdl_undeclared_type",
                               "reference to undeclared type '" + field.type +
                                   "'",
                               at.line, at.column);
          }
        }
      }
    }
    if (grammar.find_type(grammar.root) == nullptr) {
      const Token& end = tokens_.back();
      throw GrammarError("asdl_no_root",
                         "no root type declared (expected '" + grammar.root +
                             "')",
                         end.line, end.column);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::vector<FieldPos> field_positions_;
};

std::string render_fields(const std::vector<Field>& fields) {
  std::string out = "(";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ", ";
    out += fields[i].type;
    if (fields[i].cardinality == Cardinality::kOptional) out += "?";
    if (fields[i].cardinality == Cardinality::kSequence) out += "*";
    out += " " + fields[i].name;
  }
  return out + ")";
}

}  // namespace

const Constructor* TypeDecl::find_constructor(std::string_view name) const {
  for (const Constructor& ctor : constructors) {
    if (ctor.name == name) return &ctor;
  }
  return nullptr;
}

const TypeDecl* AsdlGrammar::find_type(std::string_view name) const {
  for (const TypeDecl& type : types) {
    if (type.name == name) return &type;
  }
  return nullptr;
}

bool AsdlGrammar::is_terminal_category(std::string_view name) const {
  return is_reserved_category(name) ||
         std::find(extra_terminals.begin(), extra_terminals.end(), name) !=
             extra_terminals.end();
}

AsdlGrammar load_asdl(std::string_view text, std::string_view root) {
  return AsdlParser(text).parse(root);
}

std::string render_asdl(const AsdlGrammar& grammar) {
  std::string out;
  if (!grammar.extra_terminals.empty()) {
    out += "terminal ";
    for (std::size_t i = 0; i < grammar.extra_terminals.size(); ++i) {
      if (i > 0) out += ", ";
      out += grammar.extra_terminals[i];
    }
    out += "\n";
  }
  for (const TypeDecl& type : grammar.types) {
    out += type.name + " = ";
    if (type.is_product()) {
      out += render_fields(type.constructors.front().fields);
    } else {
      for (std::size_t i = 0; i < type.constructors.size(); ++i) {
        if (i > 0) out += " | ";
        out += type.constructors[i].name;
        if (!type.constructors[i].fields.empty()) {
          out += render_fields(type.constructors[i].fields);
        }
      }
    }
    out += "\n";
  }
  return out;
}

std::vector<std::string> ProductionRule::child_symbols() const {
  std::vector<std::string> children;
  for (const Symbol& symbol : rhs) {
    if (!symbol.terminal) children.push_back(symbol.name);
  }
  return children;
}

std::string ProductionRule::to_string() const {
  std::string out = lhs + " ->";
  for (const Symbol& symbol : rhs) out += " " + symbol.name;
  return out;
}

std::string ProductionRule::signature() const {
  if (rhs.front().terminal) return lhs + " -> " + rhs.front().name;
  std::string out = lhs + " -> ";
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    if (i > 0) out += ", ";
    out += rhs[i].name;
  }
  return out;
}

RuleSet::RuleSet(std::string root, std::vector<std::string> terminal_categories)
    : root_(std::move(root)),
      terminal_categories_(std::move(terminal_categories)) {}

bool RuleSet::is_terminal_category(std::string_view symbol) const {
  return std::find(terminal_categories_.begin(), terminal_categories_.end(),
                   symbol) != terminal_categories_.end();
}

RuleId RuleSet::add(std::string lhs, std::vector<Symbol> rhs) {
  if (rhs.empty()) throw Error("rule_invalid", "rule for '" + lhs + "' has an empty rhs");
  auto key = std::make_pair(lhs, rhs);
  if (by_body_.contains(key)) {
    ProductionRule probe{0, lhs, rhs};
    throw Error("rule_duplicate", "duplicate rule " + probe.to_string());
  }
  const auto id = static_cast<RuleId>(rules_.size());
  auto [it, inserted] = by_lhs_.try_emplace(lhs);
  if (inserted) lhs_order_.push_back(lhs);
  it->second.push_back(id);
  by_body_.emplace(std::move(key), id);
  rules_.push_back({id, std::move(lhs), std::move(rhs)});
  return id;
}

const ProductionRule& RuleSet::rule(RuleId id) const {
  if (!contains(id)) {
    throw Error("rule_unknown", "unknown rule id " + std::to_string(id));
  }
  return rules_[id];
}

std::span<const RuleId> RuleSet::rules_for(std::string_view lhs) const {
  auto it = by_lhs_.find(lhs);
  if (it == by_lhs_.end()) return {};
  return it->second;
}

std::optional<RuleId> RuleSet::find(std::string_view lhs,
                                    std::span<const Symbol> rhs) const {
  auto it = by_body_.find(std::make_pair(
      std::string(lhs), std::vector<Symbol>(rhs.begin(), rhs.end())));
  if (it == by_body_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> RuleSet::dangling_nonterminals(
    bool include_categories) const {
  std::set<std::string> seen;
  std::vector<std::string> dangling;
  for (const ProductionRule& rule : rules_) {
    for (const Symbol& symbol : rule.rhs) {
      if (symbol.terminal || !rules_for(symbol.name).empty()) continue;
      if (!include_categories && is_terminal_category(symbol.name)) continue;
      if (seen.insert(symbol.name).second) dangling.push_back(symbol.name);
    }
  }
  return dangling;
}

std::string RuleSet::dump() const {
  std::string out;
  for (const ProductionRule& rule : rules_) {
    out += std::to_string(rule.id) + "\t" + rule.lhs + "\t";
    for (std::size_t i = 0; i < rule.rhs.size(); ++i) {
      if (i > 0) out += " ";
      out += rule.rhs[i].name;
    }
    out += "\n";
  }
  return out;
}

std::string RuleSet::fingerprint() const {
  std::string canonical = "root\t" + root_ + "\n";
  for (const std::string& category : terminal_categories_) {
    canonical += "terminal\t" + category + "\n";
  }
  for (const ProductionRule& rule : rules_) {
    canonical += std::to_string(rule.id) + "\t" + rule.lhs;
    for (const Symbol& symbol : rule.rhs) {
      canonical += (symbol.terminal ? "\tT:" : "\tN:") + symbol.name;
    }
    canonical += "\n";
  }
  return hex64(fnv1a(canonical));
}

RuleSet derive_rules(const AsdlGrammar& grammar, std::size_t max_seq_arity,
                     std::size_t rule_ceiling) {
  if (max_seq_arity == 0) {
    throw Error("config", "max_seq_arity must be at least 1");
  }
  std::vector<std::string> categories;
  auto note_category = [&](const std::string& name) {
    if (std::find(categories.begin(), categories.end(), name) ==
        categories.end()) {
      categories.push_back(name);
    }
  };
  for (const TypeDecl& type : grammar.types) {
    for (const Constructor& ctor : type.constructors) {
      for (const Field& field : ctor.fields) {
        if (is_reserved_category(field.type)) note_category(field.type);
      }
    }
  }
  for (const std::string& extra : grammar.extra_terminals) note_category(extra);

  // Size check before any expansion.
  std::size_t total = 0;
  for (const TypeDecl& type : grammar.types) {
    for (const Constructor& ctor : type.constructors) {
      std::size_t combos = 1;
      for (const Field& field : ctor.fields) {
        const std::size_t options =
            field.cardinality == Cardinality::kSingle     ? 1
            : field.cardinality == Cardinality::kOptional ? 2
                                                          : max_seq_arity;
        if (combos > rule_ceiling / options + 1) {
          combos = rule_ceiling + 1;
          break;
        }
        combos *= options;
      }
      total += combos;
      if (total > rule_ceiling) {
        throw Error("rule_ceiling",
                    "rule expansion of '" + type.name +
                        "' exceeds the ceiling of " +
                        std::to_string(rule_ceiling) + " rules");
      }
    }
  }

  RuleSet rules(grammar.root, std::move(categories));
  for (const TypeDecl& type : grammar.types) {
    for (const Constructor& ctor : type.constructors) {
      // Odometer over per-field multiplicities, last field fastest.
      std::vector<std::size_t> low(ctor.fields.size());
      std::vector<std::size_t> high(ctor.fields.size());
      for (std::size_t f = 0; f < ctor.fields.size(); ++f) {
        switch (ctor.fields[f].cardinality) {
          case Cardinality::kSingle: low[f] = high[f] = 1; break;
          case Cardinality::kOptional: low[f] = 0; high[f] = 1; break;
          case Cardinality::kSequence: low[f] = 1; high[f] = max_seq_arity; break;
        }
      }
      std::vector<std::size_t> counts = low;
      while (true) {
        std::vector<Symbol> rhs;
        if (!ctor.name.empty()) rhs.push_back(Symbol::token(ctor.name));
        for (std::size_t f = 0; f < ctor.fields.size(); ++f) {
          for (std::size_t n = 0; n < counts[f]; ++n) {
            rhs.push_back(Symbol::nonterminal(ctor.fields[f].type));
          }
        }
        // Fields of one type can realize the same symbol string twice.
        if (!rhs.empty() && !rules.find(type.name, rhs)) rules.add(type.name, std::move(rhs));
        std::size_t f = ctor.fields.size();
        while (f > 0 && counts[f - 1] == high[f - 1]) {
          counts[f - 1] = low[f - 1];
          --f;
        }
        if (f == 0) break;
        ++counts[f - 1];
      }
    }
  }
  return rules;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t hash = basis;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

}  // namespace sqlforge
