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

// End-to-end synthesis: corpus -> per-database (or shared) PCFG -> sampled
// programs -> utterances -> dataset + manifest.
//
// Files:
//   corpus   JSONL {"utterance": str, "sql": str, "db_id": str}
//   dataset  JSONL {"utterance", "sql", "db_id", "logprob", "provenance":
//                   "synthetic", "verbalizer": "template"|"external"}
//   manifest JSON  config, fingerprints and exact per-database counts

#ifndef SQLFORGE_PIPELINE_H_
#define SQLFORGE_PIPELINE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqlforge/ast.h"
#include "sqlforge/grammar.h"
#include "sqlforge/pcfg.h"
#include "sqlforge/schema.h"
#include "sqlforge/sql.h"
#include "sqlforge/verbalize.h"

namespace sqlforge {

struct CorpusExample {
  std::string utterance;
  std::string sql;  // canonical
  std::string db_id;
  SqlAst tree;
};

struct SkippedRow {
  int line = 0;
  std::string reason;
};

struct Corpus {
  std::vector<CorpusExample> examples;
  std::vector<SkippedRow> skipped;
};

// Rows whose SQL fails to parse against their database are skipped and
// reported. Throws Error for a missing file, malformed JSON, or a db_id with
// no schema.
Corpus load_corpus(const std::filesystem::path& path,
                   const std::vector<SchemaDb>& schemas,
                   const ParseOptions& options = {});
Corpus parse_corpus(std::string_view jsonl, const std::vector<SchemaDb>& schemas,
                    const ParseOptions& options = {});

const SchemaDb& find_schema(const std::vector<SchemaDb>& schemas,
                            std::string_view db_id);

enum class SynthMode { kShared, kPerDatabase };
enum class Dedup { kNone, kAgainstTrain, kWithinBatch, kBoth };
enum class VerbalizerKind { kTemplate, kExternal };

std::string_view to_string(SynthMode mode);
std::string_view to_string(Dedup dedup);
std::string_view to_string(VerbalizerKind kind);

struct SynthConfig {
  int ratio = 1;
  SynthMode mode = SynthMode::kShared;
  std::uint64_t seed = 0;
  SampleLimits limits;
  Dedup dedup = Dedup::kWithinBatch;
  bool semantic_filter = false;
  double smoothing_k = 0.0;
  VerbalizerKind verbalizer = VerbalizerKind::kTemplate;
  // Ablation: uniform rule probabilities instead of counts.
  bool uniform_model = false;
  // 0 = largest arity seen in the corpus.
  std::size_t max_seq_arity = 0;
};

// A PCFG fitted to one corpus partition.
struct PartitionModel {
  std::string db_id;  // empty for a shared model over several databases
  SchemaDb grounding;
  std::vector<const CorpusExample*> examples;
  std::optional<Pcfg> model;
  std::size_t arity_truncated = 0;
};

// Largest sequence arity used by any example (at least 1).
std::size_t corpus_max_arity(const AsdlGrammar& grammar,
                             std::span<const CorpusExample> examples);

// Derives rules at `max_seq_arity`, grounds them on the partition's databases
// plus the literals its programs use, and estimates (or uniformly assigns)
// rule probabilities. Examples needing a larger arity are left out of the
// counts and tallied in arity_truncated.
PartitionModel fit_partition(const std::vector<const CorpusExample*>& examples,
                             const std::vector<SchemaDb>& schemas,
                             const AsdlGrammar& grammar, std::size_t max_seq_arity,
                             double smoothing_k, bool uniform_model);

std::uint64_t partition_seed(std::uint64_t seed, std::string_view db_id);

struct SampledProgram {
  SqlAst tree;
  std::string sql;
  std::string db_id;
  double logprob = 0.0;
  std::string rules_hint;
};

struct PartitionCounts {
  std::string db_id;
  std::size_t examples = 0;
  std::size_t requested = 0;
  std::size_t sampling_failures = 0;
  std::size_t filtered = 0;
  std::size_t deduped = 0;
  std::size_t emitted = 0;
  std::size_t arity_truncated = 0;
  std::uint64_t rejected_attempts = 0;
  std::string model_fingerprint;
};

struct Manifest {
  SynthConfig config;
  std::string grammar_fingerprint;
  std::size_t max_seq_arity = 0;
  std::size_t corpus_size = 0;
  std::vector<PartitionCounts> partitions;

  PartitionCounts totals() const;
  std::string to_json() const;
};

struct ProgramBatch {
  std::vector<SampledProgram> programs;
  Manifest manifest;
};

// Sampling stage: fit models per config.mode, draw ratio x partition-size
// programs per partition, then apply the semantic filter and dedup.
// Deterministic given config.seed. Throws SamplingError when a partition's
// model cannot produce complete programs at all.
ProgramBatch sample_programs(std::span<const CorpusExample> corpus,
                             const std::vector<SchemaDb>& schemas,
                             const AsdlGrammar& grammar, const SynthConfig& config);

struct SyntheticRow {
  std::string utterance;
  std::string sql;
  std::string db_id;
  double logprob = 0.0;
  Provenance verbalizer = Provenance::kTemplate;
};

struct SyntheticDataset {
  std::vector<SyntheticRow> rows;
  Manifest manifest;
};

SyntheticDataset verbalize_with_template(const ProgramBatch& batch,
                                         const std::vector<SchemaDb>& schemas);
// Throws ExchangeError when any program has no utterance.
SyntheticDataset verbalize_with_responses(const ProgramBatch& batch,
                                          const ImportResult& responses);

std::vector<Program> to_programs(const ProgramBatch& batch);

// Full pipeline. In external mode `responses` must name the translator's
// output for the requests of this exact configuration.
SyntheticDataset synthesize(std::span<const CorpusExample> corpus,
                            const std::vector<SchemaDb>& schemas,
                            const AsdlGrammar& grammar, const SynthConfig& config,
                            const std::filesystem::path* responses = nullptr);

std::string dataset_jsonl(const SyntheticDataset& dataset);
void write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& path);

// Fraction of distinct canonical reference programs found among the
// canonical synthetic programs. Throws Error on empty inputs or an
// unparseable program.
double coverage(std::span<const std::string> synthetic,
                std::span<const std::string> reference);

struct LhsStats {
  std::string lhs;
  std::size_t rules = 0;
  std::size_t zero_probability = 0;
  double entropy = 0.0;  // nats
};

struct ModelStats {
  std::vector<LhsStats> per_lhs;
  std::size_t total_rules = 0;
  std::size_t zero_probability_rules = 0;

  std::string to_json() const;
  std::string to_text() const;
};

ModelStats model_stats(const Pcfg& model);

}  // namespace sqlforge

#endif  // SQLFORGE_PIPELINE_H_
