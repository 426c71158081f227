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

#include "sqlforge/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sqlforge {
namespace {

using nlohmann::ordered_json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string join_ids(const Derivation& derivation) {
  std::string out;
  for (RuleId id : derivation.rule_ids) {
    if (!out.empty()) out += " ";
    out += std::to_string(id);
  }
  return out;
}

ordered_json config_json(const SynthConfig& config) {
  ordered_json out;
  out["ratio"] = config.ratio;
  out["mode"] = to_string(config.mode);
  out["seed"] = config.seed;
  out["max_depth"] = config.limits.max_depth;
  out["max_attempts"] = config.limits.max_attempts;
  out["dedup"] = to_string(config.dedup);
  out["semantic_filter"] = config.semantic_filter;
  out["smoothing_k"] = config.smoothing_k;
  out["verbalizer"] = to_string(config.verbalizer);
  out["uniform_model"] = config.uniform_model;
  out["max_seq_arity"] = config.max_seq_arity;
  return out;
}

ordered_json counts_json(const PartitionCounts& counts) {
  ordered_json out;
  out["db_id"] = counts.db_id;
  out["examples"] = counts.examples;
  out["requested"] = counts.requested;
  out["sampling_failures"] = counts.sampling_failures;
  out["filtered"] = counts.filtered;
  out["deduped"] = counts.deduped;
  out["emitted"] = counts.emitted;
  out["arity_truncated"] = counts.arity_truncated;
  out["rejected_attempts"] = counts.rejected_attempts;
  if (!counts.model_fingerprint.empty()) out["model_fingerprint"] = counts.model_fingerprint;
  return out;
}

}  // namespace

std::string_view to_string(SynthMode mode) {
  return mode == SynthMode::kPerDatabase ? "per_database" : "shared";
}

std::string_view to_string(Dedup dedup) {
  switch (dedup) {
    case Dedup::kNone: return "none";
    case Dedup::kAgainstTrain: return "against_train";
    case Dedup::kWithinBatch: return "within_batch";
    case Dedup::kBoth: return "both";
  }
  return "none";
}

std::string_view to_string(VerbalizerKind kind) {
  return kind == VerbalizerKind::kExternal ? "external" : "template";
}

const SchemaDb& find_schema(const std::vector<SchemaDb>& schemas, std::string_view db_id) {
  for (const SchemaDb& db : schemas) {
    if (db.db_id == db_id) return db;
  }
  throw Error("corpus", "no schema for database '" + std::string(db_id) + "'");
}

Corpus parse_corpus(std::string_view jsonl, const std::vector<SchemaDb>& schemas,
                    const ParseOptions& options) {
  Corpus corpus;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json row;
    std::string utterance, sql, db_id;
    try {
      row = ordered_json::parse(line);
      utterance = row.at("utterance").get<std::string>();
      sql = row.at("sql").get<std::string>();
      db_id = row.at("db_id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error("corpus", "line " + std::to_string(line_no) + ": malformed row: " + e.what());
    }
    const SchemaDb& schema = find_schema(schemas, db_id);
    try {
      SqlAst tree = parse_sql(sql, schema, options);
      corpus.examples.push_back({std::move(utterance), render_sql(tree), db_id, std::move(tree)});
    } catch (const Error& e) {
      corpus.skipped.push_back({line_no, e.what()});
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const std::vector<SchemaDb>& schemas,
                   const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("corpus", "cannot open corpus file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_corpus(buffer.str(), schemas, options);
}

std::size_t corpus_max_arity(const AsdlGrammar& grammar, std::span<const CorpusExample> examples) {
  std::size_t arity = 1;
  for (const CorpusExample& example : examples) {
    arity = std::max(arity, max_sequence_arity(grammar, example.tree));
  }
  return arity;
}

PartitionModel fit_partition(const std::vector<const CorpusExample*>& examples,
                             const std::vector<SchemaDb>& schemas, const AsdlGrammar& grammar,
                             std::size_t max_seq_arity, double smoothing_k, bool uniform_model) {
  if (examples.empty()) throw Error("corpus", "cannot fit a model to an empty partition");
  std::set<std::string> ids;
  for (const CorpusExample* example : examples) ids.insert(example->db_id);
  std::vector<const SchemaDb*> dbs;
  for (const SchemaDb& db : schemas) {
    if (ids.contains(db.db_id)) dbs.push_back(&db);
  }
  if (dbs.size() != ids.size()) {
    throw Error("corpus", "partition references a database without a schema");
  }

  PartitionModel partition;
  partition.db_id = dbs.size() == 1 ? dbs.front()->db_id : "";
  const SchemaDb base = dbs.size() == 1 ? *dbs.front() : merge_schemas(dbs, "");

  std::vector<const CorpusExample*> used;
  LiteralMap literals;
  for (const CorpusExample* example : examples) {
    if (max_sequence_arity(grammar, example->tree) > max_seq_arity) {
      ++partition.arity_truncated;
      continue;
    }
    used.push_back(example);
    for (auto& [key, values] : collect_literals(example->tree)) {
      auto& target = literals[key];
      target.insert(target.end(), values.begin(), values.end());
    }
  }
  partition.examples = examples;
  partition.grounding = base.with_corpus_literals(literals);

  auto rules = std::make_shared<const RuleSet>(
      ground_rules(derive_rules(grammar, max_seq_arity), base, literals));
  if (uniform_model) {
    partition.model = uniform(rules, partition.db_id);
  } else {
    std::vector<Derivation> derivations;
    derivations.reserve(used.size());
    for (const CorpusExample* example : used) {
      derivations.push_back(linearize(example->tree, *rules));
    }
    partition.model = estimate(rules, derivations, smoothing_k, partition.db_id);
  }
  return partition;
}

std::uint64_t partition_seed(std::uint64_t seed, std::string_view db_id) {
  return splitmix64(seed ^ fnv1a(db_id));
}

PartitionCounts Manifest::totals() const {
  PartitionCounts sum;
  for (const PartitionCounts& p : partitions) {
    sum.examples += p.examples;
    sum.requested += p.requested;
    sum.sampling_failures += p.sampling_failures;
    sum.filtered += p.filtered;
    sum.deduped += p.deduped;
    sum.emitted += p.emitted;
    sum.arity_truncated += p.arity_truncated;
    sum.rejected_attempts += p.rejected_attempts;
  }
  return sum;
}

std::string Manifest::to_json() const {
  ordered_json out;
  out["config"] = config_json(config);
  out["grammar_fingerprint"] = grammar_fingerprint;
  out["max_seq_arity"] = max_seq_arity;
  out["corpus_size"] = corpus_size;
  out["partitions"] = ordered_json::array();
  for (const PartitionCounts& p : partitions) out["partitions"].push_back(counts_json(p));
  ordered_json totals_json = counts_json(totals());
  totals_json.erase("db_id");
  out["totals"] = totals_json;
  return out.dump(2) + "\n";
}

ProgramBatch sample_programs(std::span<const CorpusExample> corpus,
                             const std::vector<SchemaDb>& schemas, const AsdlGrammar& grammar,
                             const SynthConfig& config) {
  if (corpus.empty()) throw Error("config", "corpus is empty");
  if (config.ratio < 1) throw Error("config", "ratio must be at least 1");

  ProgramBatch batch;
  Manifest& manifest = batch.manifest;
  manifest.config = config;
  manifest.corpus_size = corpus.size();
  manifest.max_seq_arity =
      config.max_seq_arity > 0 ? config.max_seq_arity : corpus_max_arity(grammar, corpus);
  manifest.grammar_fingerprint = derive_rules(grammar, manifest.max_seq_arity).fingerprint();

  std::map<std::string, std::vector<const CorpusExample*>> partitions;
  for (const CorpusExample& example : corpus) {
    const std::string key = config.mode == SynthMode::kPerDatabase ? example.db_id : "";
    partitions[key].push_back(&example);
  }

  std::set<std::pair<std::string, std::string>> train;
  for (const CorpusExample& example : corpus) train.emplace(example.db_id, example.sql);
  std::set<std::pair<std::string, std::string>> seen;
  const bool dedup_batch =
      config.dedup == Dedup::kWithinBatch || config.dedup == Dedup::kBoth;
  const bool dedup_train =
      config.dedup == Dedup::kAgainstTrain || config.dedup == Dedup::kBoth;

  for (const auto& [key, members] : partitions) {
    PartitionModel fitted = fit_partition(members, schemas, grammar, manifest.max_seq_arity,
                                          config.smoothing_k, config.uniform_model);
    const Pcfg& model = *fitted.model;
    PartitionCounts counts;
    counts.db_id = fitted.db_id;
    counts.examples = members.size();
    counts.requested = static_cast<std::size_t>(config.ratio) * members.size();
    counts.arity_truncated = fitted.arity_truncated;
    counts.model_fingerprint = model_fingerprint(model);

    std::set<std::string> member_dbs;
    for (const CorpusExample* example : members) member_dbs.insert(example->db_id);

    Sampler sampler(model, partition_seed(config.seed, fitted.db_id), config.limits);
    for (std::size_t i = 0; i < counts.requested; ++i) {
      SqlAst tree;
      try {
        tree = sampler.draw();
      } catch (const SamplingError& e) {
        if (e.kind() != "sampling_failure") throw;
        ++counts.sampling_failures;
        continue;
      }
      SampledProgram program;
      program.sql = render_sql(tree);
      program.db_id = fitted.db_id;
      if (program.db_id.empty()) {
        const std::string table = from_table(tree);
        for (const SchemaDb& db : schemas) {
          if (db.find_table(table) != nullptr && member_dbs.contains(db.db_id)) {
            program.db_id = db.db_id;
            break;
          }
        }
      }
      const SchemaDb& checked =
          fitted.db_id.empty() ? find_schema(schemas, program.db_id) : fitted.grounding;
      if (config.semantic_filter && has_errors(check_semantics(tree, checked))) {
        ++counts.filtered;
        continue;
      }
      const auto identity = std::make_pair(program.db_id, program.sql);
      if ((dedup_train && train.contains(identity)) ||
          (dedup_batch && !seen.insert(identity).second)) {
        ++counts.deduped;
        continue;
      }
      const Derivation derivation = linearize(tree, model.rules());
      program.logprob = score(model, derivation);
      program.rules_hint = join_ids(derivation);
      program.tree = std::move(tree);
      batch.programs.push_back(std::move(program));
      ++counts.emitted;
    }
    counts.rejected_attempts = sampler.rejected_attempts();
    manifest.partitions.push_back(std::move(counts));
  }
  return batch;
}

std::vector<Program> to_programs(const ProgramBatch& batch) {
  std::vector<Program> programs;
  programs.reserve(batch.programs.size());
  for (const SampledProgram& p : batch.programs) {
    programs.push_back({p.tree, p.db_id, p.rules_hint});
  }
  return programs;
}

SyntheticDataset verbalize_with_template(const ProgramBatch& batch,
                                         const std::vector<SchemaDb>& schemas) {
  SyntheticDataset dataset;
  dataset.manifest = batch.manifest;
  dataset.manifest.config.verbalizer = VerbalizerKind::kTemplate;
  for (const SampledProgram& p : batch.programs) {
    const SchemaDb& db = find_schema(schemas, p.db_id);
    dataset.rows.push_back(
        {template_verbalize(p.tree, db), p.sql, p.db_id, p.logprob, Provenance::kTemplate});
  }
  return dataset;
}

SyntheticDataset verbalize_with_responses(const ProgramBatch& batch,
                                          const ImportResult& responses) {
  if (!responses.missing_ids.empty() || responses.pairs.size() != batch.programs.size()) {
    std::string ids;
    for (std::size_t i = 0; i < responses.missing_ids.size() && i < 10; ++i) {
      if (!ids.empty()) ids += ", ";
      ids += std::to_string(responses.missing_ids[i]);
    }
    throw ExchangeError("verbalizer exchange incomplete: " +
                        std::to_string(responses.missing_ids.size()) +
                        " program(s) without an utterance (ids " + ids + ")");
  }
  SyntheticDataset dataset;
  dataset.manifest = batch.manifest;
  dataset.manifest.config.verbalizer = VerbalizerKind::kExternal;
  for (const UtterancePair& pair : responses.pairs) {
    const SampledProgram& p = batch.programs.at(static_cast<std::size_t>(pair.id));
    if (pair.sql != p.sql) {
      throw ExchangeError("response " + std::to_string(pair.id) +
                          " belongs to a different program");
    }
    dataset.rows.push_back({pair.utterance, p.sql, p.db_id, p.logprob, Provenance::kExternal});
  }
  return dataset;
}

SyntheticDataset synthesize(std::span<const CorpusExample> corpus,
                            const std::vector<SchemaDb>& schemas, const AsdlGrammar& grammar,
                            const SynthConfig& config, const std::filesystem::path* responses) {
  const ProgramBatch batch = sample_programs(corpus, schemas, grammar, config);
  if (config.verbalizer == VerbalizerKind::kTemplate) {
    return verbalize_with_template(batch, schemas);
  }
  if (responses == nullptr) {
    throw ExchangeError("external verbalizer selected but no responses file given");
  }
  return verbalize_with_responses(batch,
                                  import_utterances(*responses, make_requests(to_programs(batch))));
}

std::string dataset_jsonl(const SyntheticDataset& dataset) {
  std::string out;
  for (const SyntheticRow& row : dataset.rows) {
    ordered_json line;
    line["utterance"] = row.utterance;
    line["sql"] = row.sql;
    line["db_id"] = row.db_id;
    line["logprob"] = row.logprob;
    line["provenance"] = "synthetic";
    line["verbalizer"] = to_string(row.verbalizer);
    out += line.dump() + "\n";
  }
  return out;
}

void write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write dataset file " + path.string());
  out << dataset_jsonl(dataset);
  if (!out) throw Error("io", "failed writing dataset file " + path.string());
}

double coverage(std::span<const std::string> synthetic, std::span<const std::string> reference) {
  if (synthetic.empty() || reference.empty()) {
    throw Error("coverage", "coverage needs non-empty synthetic and reference sets");
  }
  auto canonical_set = [](std::span<const std::string> sqls, std::string_view side) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < sqls.size(); ++i) {
      try {
        out.insert(canonical_sql(sqls[i]));
      } catch (const Error& e) {
        throw Error("coverage", std::string(side) + " row " + std::to_string(i + 1) +
                                    " does not parse: " + e.what());
      }
    }
    return out;
  };
  const std::set<std::string> synth = canonical_set(synthetic, "synthetic");
  const std::set<std::string> ref = canonical_set(reference, "reference");
  std::size_t hits = 0;
  for (const std::string& sql : ref) hits += synth.contains(sql) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(ref.size());
}

ModelStats model_stats(const Pcfg& model) {
  ModelStats stats;
  const RuleSet& rules = model.rules();
  stats.total_rules = rules.size();
  for (const std::string& lhs : rules.lhs_symbols()) {
    LhsStats entry;
    entry.lhs = lhs;
    for (RuleId id : rules.rules_for(lhs)) {
      ++entry.rules;
      const double p = model.probability(id);
      if (p == 0.0) {
        ++entry.zero_probability;
      } else {
        entry.entropy -= p * std::log(p);
      }
    }
    stats.zero_probability_rules += entry.zero_probability;
    stats.per_lhs.push_back(std::move(entry));
  }
  return stats;
}

std::string ModelStats::to_json() const {
  ordered_json out;
  out["total_rules"] = total_rules;
  out["zero_probability_rules"] = zero_probability_rules;
  out["lhs"] = ordered_json::array();
  for (const LhsStats& entry : per_lhs) {
    ordered_json row;
    row["lhs"] = entry.lhs;
    row["rules"] = entry.rules;
    row["zero_probability"] = entry.zero_probability;
    row["entropy"] = entry.entropy;
    out["lhs"].push_back(row);
  }
  return out.dump();
}

std::string ModelStats::to_text() const {
  std::string out = "rules: " + std::to_string(total_rules) +
                    "  zero-probability: " + std::to_string(zero_probability_rules) + "\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %8s %8s %10s\n", "lhs", "rules", "zero", "entropy");
  out += line;
  for (const LhsStats& entry : per_lhs) {
    std::snprintf(line, sizeof(line), "%-16s %8zu %8zu %10.6f\n", entry.lhs.c_str(),
                  entry.rules, entry.zero_probability, entry.entropy);
    out += line;
  }
  return out;
}

}  // namespace sqlforge
