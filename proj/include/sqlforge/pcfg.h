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

// Rule probabilities estimated by counting, tree scoring, and ancestral
// sampling.
//
// With smoothing constant k the estimate for a rule N -> z is
//
//   q(N -> z) = (C(N -> z) + k) / (sum over rules N -> g of C(N -> g) + k * |N|)
//
// where C counts rule applications in the corpus and |N| is the number of
// rules with lhs N. k = 0 is the plain maximum-likelihood estimate; an lhs
// never seen in the corpus then gets probability 0 for all its rules.

#ifndef SQLFORGE_PCFG_H_
#define SQLFORGE_PCFG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sqlforge/ast.h"
#include "sqlforge/error.h"
#include "sqlforge/grammar.h"

namespace sqlforge {

class ModelError : public Error {
 public:
  explicit ModelError(const std::string& message) : Error("model", message) {}
};

class SamplingError : public Error {
 public:
  SamplingError(std::string kind, const std::string& message)
      : Error(std::move(kind), message) {}
};

class Pcfg {
 public:
  enum class Estimator { kCounts, kUniform };

  Pcfg(std::shared_ptr<const RuleSet> rules, std::vector<std::uint64_t> counts,
       std::vector<double> probabilities, double smoothing, Estimator estimator,
       std::string database);

  const RuleSet& rules() const { return *rules_; }
  std::shared_ptr<const RuleSet> shared_rules() const { return rules_; }

  double probability(RuleId id) const;
  // Raw count C(rule); 0 for uniform models.
  std::uint64_t count(RuleId id) const;
  // Sum of counts over the rules sharing `lhs`.
  std::uint64_t lhs_total(std::string_view lhs) const;
  std::span<const double> probabilities() const { return probabilities_; }
  std::span<const std::uint64_t> counts() const { return counts_; }

  double smoothing() const { return smoothing_; }
  Estimator estimator() const { return estimator_; }
  const std::string& database() const { return database_; }

  bool operator==(const Pcfg& other) const;

 private:
  std::shared_ptr<const RuleSet> rules_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> probabilities_;
  double smoothing_ = 0.0;
  Estimator estimator_ = Estimator::kCounts;
  std::string database_;
};

// Counts rule applications over `corpus`. Throws ModelError for ids outside
// `rules` or a negative smoothing constant.
Pcfg estimate(std::shared_ptr<const RuleSet> rules,
              std::span<const Derivation> corpus, double smoothing_k = 0.0,
              std::string database = "");

// Every rule with lhs N gets 1 / |N|.
Pcfg uniform(std::shared_ptr<const RuleSet> rules, std::string database = "");

// Sum of log q over the derivation's rules; -infinity if any is zero. Throws
// ModelError for an unknown rule id.
double score(const Pcfg& model, const Derivation& derivation);

struct SampleLimits {
  int max_depth = 20;
  int max_attempts = 50;
};

// Draws trees by expanding the leftmost open nonterminal. An attempt whose
// depth exceeds max_depth is discarded and retried with fresh randomness.
// The model is only read; independent samplers may share it across threads.
class Sampler {
 public:
  // Throws SamplingError("unproductive_lhs") if a nonterminal reachable from
  // the root through positive-probability rules has no such rule itself.
  Sampler(const Pcfg& model, std::uint64_t seed, SampleLimits limits = {});

  // Throws SamplingError("sampling_failure") after max_attempts rejections.
  SqlAst draw();

  // Attempts discarded by the depth bound so far.
  std::uint64_t rejected_attempts() const { return rejected_; }

 private:
  struct Choice {
    std::vector<RuleId> ids;
    std::vector<double> cumulative;
  };

  SqlAst expand(const std::string& symbol, int depth);
  RuleId pick(const std::string& symbol);
  double next_unit();

  Pcfg model_;
  SampleLimits limits_;
  std::mt19937_64 engine_;
  std::map<std::string, Choice, std::less<>> choices_;
  std::uint64_t rejected_ = 0;
};

SqlAst sample(const Pcfg& model, std::uint64_t seed, SampleLimits limits = {});

// Nonterminals reachable from the root through positive-probability rules
// that have no positive-probability rule themselves.
std::vector<std::string> unproductive_nonterminals(const Pcfg& model);

// Model file (text):
//   sqlforge-pcfg 1
//   fingerprint <TAB> <rule-set fingerprint>
//   root <TAB> sql
//   terminals <TAB> column <TAB> table ...
//   smoothing <TAB> <k>
//   database <TAB> <db id>
//   estimator <TAB> counts|uniform
//   rules <TAB> <n>
//   then per rule: id <TAB> count <TAB> probability <TAB> lhs <TAB> N:sym|T:sym ...
// Real numbers are written with 17 significant digits.
void save(const Pcfg& model, const std::filesystem::path& path);
std::string serialize(const Pcfg& model);

// Throws ModelError for malformed files, a fingerprint that does not match
// the embedded rules, probabilities outside [0,1], or per-lhs sums off by more
// than 1e-9.
Pcfg load(const std::filesystem::path& path);
Pcfg deserialize(std::string_view text);
// As load, additionally requiring the model's rule set to equal `expected`.
Pcfg load(const std::filesystem::path& path, const RuleSet& expected);

// Hex digest of the serialized model.
std::string model_fingerprint(const Pcfg& model);

inline constexpr double kNormalizationTolerance = 1e-9;

}  // namespace sqlforge

#endif  // SQLFORGE_PCFG_H_
