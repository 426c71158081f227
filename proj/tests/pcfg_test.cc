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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "sqlforge/sql.h"
#include "test_util.h"

namespace sqlforge {
namespace {

using testing::TempDir;

// sql -> select | select cond, seen 2 and 1 times.
struct TwoThirds {
  std::shared_ptr<const RuleSet> rules;
  std::vector<Derivation> corpus;
};

TwoThirds two_thirds() {
  auto rules = std::make_shared<RuleSet>("sql", std::vector<std::string>{});
  rules->add("sql", {Symbol::nonterminal("select")});
  rules->add("sql", {Symbol::nonterminal("select"), Symbol::nonterminal("cond")});
  rules->add("select", {Symbol::token("Star")});
  rules->add("cond", {Symbol::token("True")});
  return {rules, {{{0, 2}}, {{0, 2}}, {{1, 2, 3}}}};
}

void expect_normalized(const Pcfg& model) {
  for (const std::string& lhs : model.rules().lhs_symbols()) {
    double sum = 0.0;
    for (RuleId id : model.rules().rules_for(lhs)) sum += model.probability(id);
    if (sum > 0.0) EXPECT_NEAR(sum, 1.0, kNormalizationTolerance) << lhs;
  }
}

TEST(Estimate, TwoThirdsOneThird) {
  const TwoThirds fixture = two_thirds();
  const Pcfg model = estimate(fixture.rules, fixture.corpus);
  EXPECT_EQ(model.probability(0), 2.0 / 3.0);
  EXPECT_EQ(model.probability(1), 1.0 / 3.0);
  EXPECT_EQ(model.count(0), 2u);
  EXPECT_EQ(model.lhs_total("sql"), 3u);
  EXPECT_EQ(model.probability(2), 1.0);
  EXPECT_EQ(model.probability(3), 1.0);
}

TEST(Estimate, UnseenLhsIsZeroWithoutSmoothing) {
  const TwoThirds fixture = two_thirds();
  const std::vector<Derivation> corpus{{{0, 2}}};
  const Pcfg model = estimate(fixture.rules, corpus);
  EXPECT_EQ(model.probability(1), 0.0);
  EXPECT_EQ(model.probability(3), 0.0);
  expect_normalized(model);
}

TEST(Estimate, AdditiveSmoothing) {
  const TwoThirds fixture = two_thirds();
  const Pcfg model = estimate(fixture.rules, fixture.corpus, 0.5);
  EXPECT_DOUBLE_EQ(model.probability(0), (2 + 0.5) / (3 + 0.5 * 2));
  EXPECT_DOUBLE_EQ(model.probability(1), (1 + 0.5) / (3 + 0.5 * 2));
  const std::vector<Derivation> corpus{{{0, 2}}};
  EXPECT_DOUBLE_EQ(estimate(fixture.rules, corpus, 1.0).probability(3), 1.0);
  expect_normalized(model);
  EXPECT_THROW(estimate(fixture.rules, corpus, -1.0), Error);
}

TEST(Estimate, UnknownRuleId) {
  const TwoThirds fixture = two_thirds();
  const std::vector<Derivation> corpus{{{0, 9}}};
  EXPECT_THROW(estimate(fixture.rules, corpus), Error);
}

TEST(Uniform, ThreeAggTypes) {
  const auto rules = testing::toy_rules({"age"});
  const Pcfg model = uniform(rules);
  for (RuleId id : rules->rules_for("agg_type")) EXPECT_EQ(model.probability(id), 1.0 / 3.0);
  for (RuleId id : rules->rules_for("agg")) EXPECT_EQ(model.probability(id), 1.0);
  EXPECT_TRUE(model.counts().empty() ||
              std::all_of(model.counts().begin(), model.counts().end(),
                          [](std::uint64_t c) { return c == 0; }));
  expect_normalized(model);
}

TEST(UniformProperty, EqualWithinLhs) {
  const auto rules = std::make_shared<const RuleSet>(derive_rules(dialect::grammar(), 3));
  const Pcfg model = uniform(rules);
  for (const std::string& lhs : rules->lhs_symbols()) {
    const auto ids = rules->rules_for(lhs);
    for (RuleId id : ids) EXPECT_EQ(model.probability(id), model.probability(ids[0]));
  }
  expect_normalized(model);
}

TEST(Score, Cases) {
  const TwoThirds fixture = two_thirds();
  const Pcfg model = estimate(fixture.rules, fixture.corpus);
  EXPECT_DOUBLE_EQ(score(model, {{0, 2}}), std::log(2.0 / 3.0));
  EXPECT_EQ(score(estimate(fixture.rules, std::vector<Derivation>{{{0, 2}}}), {{0, 2}}), 0.0);
  const double unseen = score(estimate(fixture.rules, std::vector<Derivation>{{{0, 2}}}), {{1, 2, 3}});
  EXPECT_TRUE(std::isinf(unseen) && unseen < 0);
  EXPECT_THROW(score(model, {{0, 42}}), Error);
}

TEST(ScoreProperty, Additive) {
  const TwoThirds fixture = two_thirds();
  const Pcfg model = estimate(fixture.rules, fixture.corpus, 0.25);
  const Derivation d{{1, 2, 3}};
  double sum = 0.0;
  for (RuleId id : d.rule_ids) sum += score(model, {{id}});
  EXPECT_DOUBLE_EQ(score(model, d), sum);
}

// Naive recount: per-rule tallies in a map keyed by rule text, totals per
// lhs string, no use of the RuleSet's lhs index.
TEST(EstimateOracle, RandomCorpora) {
  const auto rules = std::make_shared<const RuleSet>(ground_rules(
      derive_rules(dialect::grammar(), 2), load_schemas(testing::data_path("geo/schema.json"))[0],
      {}));
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    // Skew the generator by re-estimating from a small uniform sample.
    Sampler seed_sampler(uniform(rules), rng(), {10, 500});
    std::vector<Derivation> seed_corpus;
    for (int i = 0; i < 5; ++i) seed_corpus.push_back(linearize(seed_sampler.draw(), *rules));
    const Pcfg generator = estimate(rules, seed_corpus, 0.05 + static_cast<double>(rng() % 20) / 10);
    Sampler sampler(generator, rng(), {10, 500});
    std::vector<Derivation> corpus;
    const int n = 1 + static_cast<int>(rng() % 1000);
    for (int i = 0; i < n; ++i) corpus.push_back(linearize(sampler.draw(), *rules));

    std::map<std::string, std::uint64_t> by_rule;
    std::map<std::string, std::uint64_t> by_lhs;
    for (const Derivation& d : corpus) {
      for (RuleId id : d.rule_ids) {
        ++by_rule[rules->rule(id).to_string()];
        ++by_lhs[rules->rule(id).lhs];
      }
    }
    const Pcfg model = estimate(rules, corpus);
    for (const ProductionRule& rule : rules->rules()) {
      const std::uint64_t c = by_rule[rule.to_string()];
      const std::uint64_t total = by_lhs[rule.lhs];
      EXPECT_EQ(model.count(rule.id), c);
      EXPECT_EQ(model.probability(rule.id),
                total == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(total));
    }
    expect_normalized(model);
  }
}

// A -> X | Y with probabilities 3/4 and 1/4.
Pcfg binary_choice() {
  auto rules = std::make_shared<RuleSet>("a", std::vector<std::string>{});
  rules->add("a", {Symbol::token("X")});
  rules->add("a", {Symbol::token("Y")});
  return estimate(rules, std::vector<Derivation>{{{0}}, {{0}}, {{0}}, {{1}}});
}

TEST(Sampler, ConvergesToModel) {
  const Pcfg model = binary_choice();
  Sampler sampler(model, 12345);
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) first += sampler.draw().constructor == "X";
  EXPECT_NEAR(static_cast<double>(first) / n, 0.75, 0.01);
}

TEST(Sampler, DegenerateModelHasOneTree) {
  const auto rules = testing::toy_rules({"age"});
  std::vector<Derivation> corpus{linearize(testing::max_age_tree(), *rules)};
  const Pcfg model = estimate(rules, corpus);
  for (std::uint64_t seed : {0ull, 1ull, 77ull}) {
    EXPECT_EQ(sample(model, seed), testing::max_age_tree());
  }
}

TEST(Sampler, Deterministic) {
  const auto rules = std::make_shared<const RuleSet>(ground_rules(
      derive_rules(dialect::grammar(), 2), load_schemas(testing::data_path("geo/schema.json"))[0],
      {}));
  const Pcfg model = uniform(rules);
  Sampler a(model, 42, {12, 200});
  Sampler b(model, 42, {12, 200});
  for (int i = 0; i < 50; ++i) EXPECT_EQ(render_sql(a.draw()), render_sql(b.draw()));
  Sampler c(model, 43, {12, 200});
  Sampler d(model, 42, {12, 200});
  bool differs = false;
  for (int i = 0; i < 50; ++i) differs |= render_sql(c.draw()) != render_sql(d.draw());
  EXPECT_TRUE(differs);
}

TEST(Sampler, SoundTrees) {
  const auto rules = std::make_shared<const RuleSet>(ground_rules(
      derive_rules(dialect::grammar(), 2), load_schemas(testing::data_path("geo/schema.json"))[0],
      {}));
  const Pcfg model = estimate(rules, {}, 1.0);
  Sampler sampler(model, 3, {12, 200});
  for (int i = 0; i < 300; ++i) {
    const SqlAst tree = sampler.draw();
    EXPECT_TRUE(validate_tree(*rules, tree).empty());
    EXPECT_TRUE(std::isfinite(score(model, linearize(tree, *rules))));
    EXPECT_LE(tree.depth(), 12u);
  }
}

// Fig. 2's cond has no base case: every attempt that chooses a WHERE clause
// runs past the depth bound and is retried.
TEST(Sampler, RejectsTooDeepAttempts) {
  const auto rules = testing::toy_rules({"age"});
  const Pcfg model = uniform(rules);
  Sampler sampler(model, 8);
  for (int i = 0; i < 20; ++i) {
    const SqlAst tree = sampler.draw();
    EXPECT_EQ(tree.children.size(), 1u);
  }
  EXPECT_GT(sampler.rejected_attempts(), 0u);
}

TEST(Sampler, ExhaustedAttempts) {
  auto rules = std::make_shared<RuleSet>("a", std::vector<std::string>{});
  rules->add("a", {Symbol::token("Pair"), Symbol::nonterminal("a"), Symbol::nonterminal("a")});
  rules->add("a", {Symbol::token("Leaf")});
  const Pcfg model(rules, {0, 0}, {0.999, 0.001}, 0.0, Pcfg::Estimator::kUniform, "");
  try {
    Sampler(model, 1, {2, 3}).draw();
    FAIL() << "expected a sampling failure";
  } catch (const SamplingError& e) {
    EXPECT_EQ(e.kind(), "sampling_failure");
  }
}

TEST(Sampler, UnproductiveLhs) {
  const TwoThirds fixture = two_thirds();
  const Pcfg model = estimate(fixture.rules, std::vector<Derivation>{{{0, 2}}});
  // cond has no mass but is only reachable through a zero-probability rule.
  EXPECT_TRUE(unproductive_nonterminals(model).empty());
  EXPECT_NO_THROW(sample(model, 1));

  // t is reachable but none of its rules were ever observed.
  auto rules = std::make_shared<RuleSet>("s", std::vector<std::string>{});
  rules->add("s", {Symbol::nonterminal("t")});
  rules->add("t", {Symbol::token("T")});
  const Pcfg starved = estimate(rules, std::vector<Derivation>{{{0}}});
  EXPECT_EQ(unproductive_nonterminals(starved), (std::vector<std::string>{"t"}));
  try {
    sample(starved, 1);
    FAIL();
  } catch (const SamplingError& e) {
    EXPECT_EQ(e.kind(), "unproductive_lhs");
  }
}

// A self-loop has positive mass but never terminates; the depth bound
// turns it into a sampling failure.
TEST(Sampler, NonTerminatingLoop) {
  auto rules = std::make_shared<RuleSet>("s", std::vector<std::string>{});
  rules->add("s", {Symbol::nonterminal("t")});
  rules->add("t", {Symbol::nonterminal("t")});
  try {
    sample(uniform(rules), 1, {5, 2});
    FAIL();
  } catch (const SamplingError& e) {
    EXPECT_EQ(e.kind(), "sampling_failure");
  }
}

TEST(SaveLoad, RoundTrip) {
  TempDir dir;
  const TwoThirds fixture = two_thirds();
  const Pcfg model = estimate(fixture.rules, fixture.corpus, 0.0, "geo");
  save(model, dir / "m.pcfg");
  const Pcfg loaded = load(dir / "m.pcfg");
  EXPECT_EQ(loaded, model);
  EXPECT_EQ(loaded.probability(0), 2.0 / 3.0);
  EXPECT_EQ(loaded.database(), "geo");
  EXPECT_EQ(loaded.rules().dump(), model.rules().dump());
  EXPECT_EQ(serialize(loaded), serialize(model));

  const Pcfg smoothed = estimate(fixture.rules, fixture.corpus, 0.1);
  EXPECT_EQ(deserialize(serialize(smoothed)), smoothed);
  EXPECT_EQ(deserialize(serialize(uniform(fixture.rules))), uniform(fixture.rules));
}

TEST(SaveLoad, RejectsBadSums) {
  const TwoThirds fixture = two_thirds();
  std::string text = serialize(estimate(fixture.rules, fixture.corpus));
  const std::string needle = "0.66666666666666663";
  ASSERT_NE(text.find(needle), std::string::npos);
  text.replace(text.find(needle), needle.size(), "0.7");
  try {
    deserialize(text);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("sql"), std::string::npos);
  }
}

TEST(SaveLoad, RejectsMalformed) {
  EXPECT_THROW(deserialize(""), ModelError);
  EXPECT_THROW(deserialize("sqlforge-pcfg 2\n"), ModelError);
  const TwoThirds fixture = two_thirds();
  std::string text = serialize(estimate(fixture.rules, fixture.corpus));
  EXPECT_THROW(deserialize(text.substr(0, text.size() / 2)), ModelError);
  std::string tampered = text;
  tampered.replace(tampered.find("Star"), 4, "Moon");
  EXPECT_THROW(deserialize(tampered), ModelError);
}

TEST(SaveLoad, FingerprintMismatch) {
  TempDir dir;
  const auto rules = testing::toy_rules({"age"});
  save(uniform(rules), dir / "m.pcfg");
  EXPECT_NO_THROW(load(dir / "m.pcfg", *rules));

  std::string text = testing::read_text(testing::data_path("grammars/toy.asdl"));
  text.replace(text.find("Min"), 3, "Avg");
  SchemaDb db;
  db.tables.push_back({"person", {{"age", "person", ValueType::kNumber}}});
  const RuleSet other = ground_rules(derive_rules(load_asdl(text), 2), db, {});
  try {
    load(dir / "m.pcfg", other);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("fingerprint"), std::string::npos);
  }
}

TEST(ModelFingerprint, DependsOnProbabilities) {
  const TwoThirds fixture = two_thirds();
  EXPECT_NE(model_fingerprint(estimate(fixture.rules, fixture.corpus)),
            model_fingerprint(uniform(fixture.rules)));
  EXPECT_EQ(model_fingerprint(uniform(fixture.rules)), model_fingerprint(uniform(fixture.rules)));
}

}  // namespace
}  // namespace sqlforge
