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

#include "sqlforge/pcfg.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace sqlforge {
namespace {

constexpr std::string_view kMagic = "sqlforge-pcfg 1";

struct DepthExceeded {};

std::string format_real(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(sep, start);
    if (end == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, end - start));
    start = end + 1;
  }
}

double parse_real(std::string_view text, int line) {
  const std::string owned(text);
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(owned.c_str(), &end);
  if (owned.empty() || end != owned.c_str() + owned.size() || errno == ERANGE) {
    throw ModelError("line " + std::to_string(line) + ": malformed number '" + owned + "'");
  }
  return value;
}

std::uint64_t parse_count(std::string_view text, int line) {
  const std::string owned(text);
  if (owned.empty() || owned.find_first_not_of("0123456789") != std::string::npos) {
    throw ModelError("line " + std::to_string(line) + ": malformed count '" + owned + "'");
  }
  errno = 0;
  const unsigned long long value = std::strtoull(owned.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ModelError("line " + std::to_string(line) + ": count overflow");
  return value;
}

void check_normalized(const Pcfg& model) {
  const RuleSet& rules = model.rules();
  for (const std::string& lhs : rules.lhs_symbols()) {
    double sum = 0.0;
    bool any = false;
    for (RuleId id : rules.rules_for(lhs)) {
      const double p = model.probability(id);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw ModelError("probability of rule " + std::to_string(id) + " is outside [0, 1]");
      }
      sum += p;
      any = any || p > 0.0;
    }
    if (any && std::abs(sum - 1.0) > kNormalizationTolerance) {
      throw ModelError("probabilities of rules with lhs '" + lhs + "' sum to " +
                       format_real(sum) + ", not 1");
    }
  }
}

}  // namespace

Pcfg::Pcfg(std::shared_ptr<const RuleSet> rules, std::vector<std::uint64_t> counts,
           std::vector<double> probabilities, double smoothing, Estimator estimator,
           std::string database)
    : rules_(std::move(rules)),
      counts_(std::move(counts)),
      probabilities_(std::move(probabilities)),
      smoothing_(smoothing),
      estimator_(estimator),
      database_(std::move(database)) {
  if (rules_ == nullptr) throw ModelError("model without a rule set");
  if (counts_.size() != rules_->size() || probabilities_.size() != rules_->size()) {
    throw ModelError("model size does not match its rule set");
  }
}

double Pcfg::probability(RuleId id) const {
  if (id >= probabilities_.size()) {
    throw ModelError("rule id " + std::to_string(id) + " is not in the model");
  }
  return probabilities_[id];
}

std::uint64_t Pcfg::count(RuleId id) const {
  if (id >= counts_.size()) {
    throw ModelError("rule id " + std::to_string(id) + " is not in the model");
  }
  return counts_[id];
}

std::uint64_t Pcfg::lhs_total(std::string_view lhs) const {
  std::uint64_t total = 0;
  for (RuleId id : rules_->rules_for(lhs)) total += counts_[id];
  return total;
}

bool Pcfg::operator==(const Pcfg& other) const {
  return rules_->fingerprint() == other.rules_->fingerprint() && counts_ == other.counts_ &&
         probabilities_ == other.probabilities_ && smoothing_ == other.smoothing_ &&
         estimator_ == other.estimator_ && database_ == other.database_;
}

Pcfg estimate(std::shared_ptr<const RuleSet> rules, std::span<const Derivation> corpus,
              double smoothing_k, std::string database) {
  if (!(smoothing_k >= 0.0) || !std::isfinite(smoothing_k)) {
    throw ModelError("smoothing constant must be a finite non-negative number");
  }
  std::vector<std::uint64_t> counts(rules->size(), 0);
  for (const Derivation& derivation : corpus) {
    for (RuleId id : derivation.rule_ids) {
      if (!rules->contains(id)) {
        throw ModelError("derivation references rule id " + std::to_string(id) +
                         " absent from the rule set");
      }
      ++counts[id];
    }
  }
  std::vector<double> probabilities(rules->size(), 0.0);
  for (const std::string& lhs : rules->lhs_symbols()) {
    const std::span<const RuleId> ids = rules->rules_for(lhs);
    std::uint64_t total = 0;
    for (RuleId id : ids) total += counts[id];
    const double denominator =
        static_cast<double>(total) + smoothing_k * static_cast<double>(ids.size());
    if (denominator <= 0.0) continue;
    for (RuleId id : ids) {
      probabilities[id] = (static_cast<double>(counts[id]) + smoothing_k) / denominator;
    }
  }
  return Pcfg(std::move(rules), std::move(counts), std::move(probabilities), smoothing_k,
              Pcfg::Estimator::kCounts, std::move(database));
}

Pcfg uniform(std::shared_ptr<const RuleSet> rules, std::string database) {
  std::vector<double> probabilities(rules->size(), 0.0);
  for (const std::string& lhs : rules->lhs_symbols()) {
    const std::span<const RuleId> ids = rules->rules_for(lhs);
    for (RuleId id : ids) probabilities[id] = 1.0 / static_cast<double>(ids.size());
  }
  std::vector<std::uint64_t> counts(rules->size(), 0);
  return Pcfg(std::move(rules), std::move(counts), std::move(probabilities), 0.0,
              Pcfg::Estimator::kUniform, std::move(database));
}

double score(const Pcfg& model, const Derivation& derivation) {
  double total = 0.0;
  for (RuleId id : derivation.rule_ids) {
    const double p = model.probability(id);
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(p);
  }
  return total;
}

std::vector<std::string> unproductive_nonterminals(const Pcfg& model) {
  const RuleSet& rules = model.rules();
  std::vector<std::string> unproductive;
  std::set<std::string> seen{rules.root()};
  std::vector<std::string> frontier{rules.root()};
  while (!frontier.empty()) {
    const std::string symbol = frontier.back();
    frontier.pop_back();
    bool productive = false;
    for (RuleId id : rules.rules_for(symbol)) {
      if (model.probability(id) <= 0.0) continue;
      productive = true;
      for (const std::string& child : rules.rule(id).child_symbols()) {
        if (seen.insert(child).second) frontier.push_back(child);
      }
    }
    if (!productive) unproductive.push_back(symbol);
  }
  std::sort(unproductive.begin(), unproductive.end());
  return unproductive;
}

Sampler::Sampler(const Pcfg& model, std::uint64_t seed, SampleLimits limits)
    : model_(model), limits_(limits), engine_(seed) {
  if (limits_.max_depth < 1 || limits_.max_attempts < 1) {
    throw SamplingError("config", "max_depth and max_attempts must be positive");
  }
  const std::vector<std::string> unproductive = unproductive_nonterminals(model);
  if (!unproductive.empty()) {
    std::string names;
    for (const std::string& name : unproductive) {
      if (!names.empty()) names += ", ";
      names += name;
    }
    throw SamplingError("unproductive_lhs",
                        "nonterminals reachable from '" + model.rules().root() +
                            "' have no rule with positive probability: " + names);
  }
  const RuleSet& rules = model.rules();
  for (const std::string& lhs : rules.lhs_symbols()) {
    Choice choice;
    double running = 0.0;
    for (RuleId id : rules.rules_for(lhs)) {
      const double p = model.probability(id);
      if (p <= 0.0) continue;
      running += p;
      choice.ids.push_back(id);
      choice.cumulative.push_back(running);
    }
    if (!choice.ids.empty()) choices_.emplace(lhs, std::move(choice));
  }
}

double Sampler::next_unit() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

RuleId Sampler::pick(const std::string& symbol) {
  const Choice& choice = choices_.find(symbol)->second;
  const double target = next_unit() * choice.cumulative.back();
  auto it = std::upper_bound(choice.cumulative.begin(), choice.cumulative.end(), target);
  if (it == choice.cumulative.end()) --it;
  return choice.ids[static_cast<std::size_t>(it - choice.cumulative.begin())];
}

SqlAst Sampler::expand(const std::string& symbol, int depth) {
  if (depth > limits_.max_depth) throw DepthExceeded{};
  const ProductionRule& rule = model_.rules().rule(pick(symbol));
  SqlAst node;
  node.symbol = symbol;
  if (model_.rules().is_terminal_category(symbol)) {
    node.token = rule.rhs.front().name;
    return node;
  }
  if (rule.rhs.front().terminal) node.constructor = rule.rhs.front().name;
  for (const Symbol& child : rule.rhs) {
    if (!child.terminal) node.children.push_back(expand(child.name, depth + 1));
  }
  return node;
}

SqlAst Sampler::draw() {
  for (int attempt = 0; attempt < limits_.max_attempts; ++attempt) {
    try {
      return expand(model_.rules().root(), 1);
    } catch (const DepthExceeded&) {
      ++rejected_;
    }
  }
  throw SamplingError("sampling_failure",
                      "no tree within depth " + std::to_string(limits_.max_depth) + " after " +
                          std::to_string(limits_.max_attempts) + " attempts");
}

SqlAst sample(const Pcfg& model, std::uint64_t seed, SampleLimits limits) {
  Sampler sampler(model, seed, limits);
  return sampler.draw();
}

std::string serialize(const Pcfg& model) {
  const RuleSet& rules = model.rules();
  std::string out(kMagic);
  out += "\nfingerprint\t" + rules.fingerprint();
  out += "\nroot\t" + rules.root();
  out += "\nterminals";
  for (const std::string& category : rules.terminal_categories()) out += "\t" + category;
  out += "\nsmoothing\t" + format_real(model.smoothing());
  out += "\ndatabase\t" + model.database();
  out += std::string("\nestimator\t") +
         (model.estimator() == Pcfg::Estimator::kUniform ? "uniform" : "counts");
  out += "\nrules\t" + std::to_string(rules.size()) + "\n";
  for (const ProductionRule& rule : rules.rules()) {
    out += std::to_string(rule.id) + "\t" + std::to_string(model.count(rule.id)) + "\t" +
           format_real(model.probability(rule.id)) + "\t" + rule.lhs;
    for (const Symbol& symbol : rule.rhs) {
      out += (symbol.terminal ? "\tT:" : "\tN:") + symbol.name;
    }
    out += "\n";
  }
  return out;
}

void save(const Pcfg& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write model file " + path.string());
  out << serialize(model);
  if (!out) throw ModelError("failed writing model file " + path.string());
}

Pcfg deserialize(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  int line_no = 0;
  auto next_line = [&]() -> std::string_view {
    if (static_cast<std::size_t>(line_no) >= lines.size()) {
      throw ModelError("truncated model file at line " + std::to_string(line_no + 1));
    }
    return lines[line_no++];
  };
  auto header = [&](std::string_view key) {
    std::vector<std::string_view> parts = split(next_line(), '\t');
    if (parts.front() != key) {
      throw ModelError("line " + std::to_string(line_no) + ": expected header '" +
                       std::string(key) + "'");
    }
    parts.erase(parts.begin());
    return parts;
  };

  if (next_line() != kMagic) throw ModelError("not a sqlforge model file");
  auto fingerprint = header("fingerprint");
  auto root = header("root");
  auto terminals = header("terminals");
  auto smoothing = header("smoothing");
  auto database = header("database");
  auto estimator = header("estimator");
  auto count = header("rules");
  if (fingerprint.size() != 1 || root.size() != 1 || smoothing.size() != 1 ||
      database.size() != 1 || estimator.size() != 1 || count.size() != 1) {
    throw ModelError("malformed model header");
  }
  Pcfg::Estimator kind;
  if (estimator[0] == "counts") {
    kind = Pcfg::Estimator::kCounts;
  } else if (estimator[0] == "uniform") {
    kind = Pcfg::Estimator::kUniform;
  } else {
    throw ModelError("unknown estimator '" + std::string(estimator[0]) + "'");
  }

  std::vector<std::string> categories(terminals.begin(), terminals.end());
  auto rules = std::make_shared<RuleSet>(std::string(root[0]), std::move(categories));
  const std::uint64_t n = parse_count(count[0], line_no);
  std::vector<std::uint64_t> counts;
  std::vector<double> probabilities;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<std::string_view> parts = split(next_line(), '\t');
    if (parts.size() < 5) {
      throw ModelError("line " + std::to_string(line_no) + ": malformed rule line");
    }
    if (parse_count(parts[0], line_no) != i) {
      throw ModelError("line " + std::to_string(line_no) + ": rule ids are not dense");
    }
    counts.push_back(parse_count(parts[1], line_no));
    probabilities.push_back(parse_real(parts[2], line_no));
    std::vector<Symbol> rhs;
    for (std::size_t k = 4; k < parts.size(); ++k) {
      const std::string_view part = parts[k];
      if (part.size() < 3 || part[1] != ':' || (part[0] != 'N' && part[0] != 'T')) {
        throw ModelError("line " + std::to_string(line_no) + ": malformed symbol '" +
                         std::string(part) + "'");
      }
      rhs.push_back({std::string(part.substr(2)), part[0] == 'T'});
    }
    try {
      rules->add(std::string(parts[3]), std::move(rhs));
    } catch (const Error& e) {
      throw ModelError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (static_cast<std::size_t>(line_no) != lines.size()) {
    throw ModelError("trailing content after rule " + std::to_string(n));
  }
  if (rules->fingerprint() != fingerprint[0]) {
    throw ModelError("rule-set fingerprint mismatch: header " + std::string(fingerprint[0]) +
                     ", rules " + rules->fingerprint());
  }
  Pcfg model(std::move(rules), std::move(counts), std::move(probabilities),
             parse_real(smoothing[0], 5), kind, std::string(database[0]));
  check_normalized(model);
  return model;
}

Pcfg load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return deserialize(buffer.str());
}

Pcfg load(const std::filesystem::path& path, const RuleSet& expected) {
  Pcfg model = load(path);
  if (model.rules().fingerprint() != expected.fingerprint()) {
    throw ModelError("rule-set fingerprint mismatch: model " + path.string() + " has " +
                     model.rules().fingerprint() + ", expected " + expected.fingerprint());
  }
  return model;
}

std::string model_fingerprint(const Pcfg& model) { return hex64(fnv1a(serialize(model))); }

}  // namespace sqlforge
