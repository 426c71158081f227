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

// sqlforge: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error (reported
// on stderr as a single-line JSON object).

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sqlforge/ast.h"
#include "sqlforge/grammar.h"
#include "sqlforge/pcfg.h"
#include "sqlforge/pipeline.h"
#include "sqlforge/schema.h"
#include "sqlforge/sql.h"
#include "sqlforge/verbalize.h"

namespace {

using nlohmann::ordered_json;
using namespace sqlforge;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path);
  out << text;
  if (!out) throw Error("io", "failed writing " + path);
}

// The "sql" field of every non-blank JSONL row.
std::vector<std::string> read_sql_column(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> sqls;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      sqls.push_back(ordered_json::parse(line).at("sql").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error("io", path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return sqls;
}

ordered_json tree_json(const SqlAst& tree) {
  ordered_json out;
  out["symbol"] = tree.symbol;
  if (!tree.constructor.empty()) out["constructor"] = tree.constructor;
  if (tree.is_terminal()) out["token"] = tree.token;
  if (!tree.children.empty()) {
    out["children"] = ordered_json::array();
    for (const SqlAst& child : tree.children) out["children"].push_back(tree_json(child));
  }
  return out;
}

ordered_json logprob_json(double logprob) {
  return std::isfinite(logprob) ? ordered_json(logprob) : ordered_json(nullptr);
}

void report_skipped(const Corpus& corpus) {
  for (const SkippedRow& row : corpus.skipped) {
    ordered_json note;
    note["skipped_line"] = row.line;
    note["reason"] = row.reason;
    std::cerr << note.dump() << "\n";
  }
}

AsdlGrammar load_grammar(const std::string& path) {
  if (path.empty()) return dialect::grammar();
  return load_asdl(read_file(path));
}

struct Options {
  std::string grammar;
  std::string schemas;
  std::string corpus;
  std::string model;
  std::string out;
  std::string manifest;
  std::string requests;
  std::string responses;
  std::string synthetic;
  std::string reference;
  std::string sql;
  std::string db;
  std::size_t n = 1;
  int ratio = 1;
  std::string mode = "shared";
  std::uint64_t seed = 0;
  int max_depth = 20;
  int max_attempts = 50;
  std::string dedup = "within-batch";
  bool filter_semantics = false;
  double smoothing_k = 0.0;
  std::string verbalizer = "template";
  bool uniform = false;
  std::size_t max_arity = 0;
  bool warn_membership = false;
  bool pretty = false;
};

// Examples restricted to --db when given.
std::vector<CorpusExample> select_examples(const Corpus& corpus, const std::string& db) {
  std::vector<CorpusExample> out;
  for (const CorpusExample& example : corpus.examples) {
    if (db.empty() || example.db_id == db) out.push_back(example);
  }
  if (out.empty()) throw Error("corpus", "no usable corpus examples" +
                                             (db.empty() ? "" : " for database '" + db + "'"));
  return out;
}

const std::map<std::string, SynthMode> kModes{{"shared", SynthMode::kShared},
                                               {"per-db", SynthMode::kPerDatabase},
                                               {"per_database", SynthMode::kPerDatabase}};
const std::map<std::string, Dedup> kDedups{{"none", Dedup::kNone},
                                           {"against-train", Dedup::kAgainstTrain},
                                           {"against_train", Dedup::kAgainstTrain},
                                           {"within-batch", Dedup::kWithinBatch},
                                           {"within_batch", Dedup::kWithinBatch},
                                           {"both", Dedup::kBoth}};

bool external(const Options& o) { return o.verbalizer == "external"; }

ParseOptions parse_options(const Options& o) { return {!o.warn_membership}; }

int run_derive(const Options& o) {
  const AsdlGrammar grammar = load_grammar(o.grammar);
  std::size_t arity = o.max_arity > 0 ? o.max_arity : 2;
  RuleSet rules;
  if (!o.corpus.empty()) {
    if (o.schemas.empty()) throw Error("usage", "--corpus requires --schemas");
    const std::vector<SchemaDb> schemas = load_schemas(o.schemas);
    const Corpus corpus = load_corpus(o.corpus, schemas, parse_options(o));
    report_skipped(corpus);
    const std::vector<CorpusExample> examples = select_examples(corpus, o.db);
    if (o.max_arity == 0) arity = corpus_max_arity(grammar, examples);
    std::vector<const CorpusExample*> members;
    for (const CorpusExample& e : examples) members.push_back(&e);
    rules = fit_partition(members, schemas, grammar, arity, 0.0, true).model->rules();
  } else {
    rules = derive_rules(grammar, arity);
  }
  if (!o.out.empty()) write_file(o.out, rules.dump());
  if (o.pretty) {
    for (const ProductionRule& rule : rules.rules()) {
      std::cout << rule.id << "  " << rule.to_string() << "\n";
    }
    return 0;
  }
  for (const ProductionRule& rule : rules.rules()) {
    ordered_json row;
    row["rule_id"] = rule.id;
    row["lhs"] = rule.lhs;
    row["rhs"] = ordered_json::array();
    for (const Symbol& symbol : rule.rhs) row["rhs"].push_back(symbol.name);
    row["signature"] = rule.signature();
    std::cout << row.dump() << "\n";
  }
  return 0;
}

int run_parse(const Options& o) {
  const std::vector<SchemaDb> schemas = load_schemas(o.schemas);
  auto emit = [&](const SqlAst& tree, const std::string& db_id,
                  const std::vector<std::string>& warnings) {
    ordered_json row;
    row["sql"] = render_sql(tree);
    row["db_id"] = db_id;
    if (!warnings.empty()) row["warnings"] = warnings;
    row["tree"] = tree_json(tree);
    std::cout << (o.pretty ? row.dump(2) : row.dump()) << "\n";
  };
  if (!o.sql.empty()) {
    if (o.db.empty() && schemas.size() != 1) {
      throw Error("usage", "--sql needs --db when the schema file has several databases");
    }
    const SchemaDb& db = o.db.empty() ? schemas.front() : find_schema(schemas, o.db);
    std::vector<std::string> warnings;
    emit(parse_sql(o.sql, db, parse_options(o), &warnings), db.db_id, warnings);
    return 0;
  }
  if (o.corpus.empty()) throw Error("usage", "parse needs --sql or --corpus");
  const Corpus corpus = load_corpus(o.corpus, schemas, parse_options(o));
  report_skipped(corpus);
  for (const CorpusExample& example : corpus.examples) emit(example.tree, example.db_id, {});
  return 0;
}

int run_estimate(const Options& o) {
  const AsdlGrammar grammar = load_grammar(o.grammar);
  const std::vector<SchemaDb> schemas = load_schemas(o.schemas);
  const Corpus corpus = load_corpus(o.corpus, schemas, parse_options(o));
  report_skipped(corpus);
  const std::vector<CorpusExample> examples = select_examples(corpus, o.db);
  const std::size_t arity = o.max_arity > 0 ? o.max_arity : corpus_max_arity(grammar, examples);
  std::vector<const CorpusExample*> members;
  for (const CorpusExample& e : examples) members.push_back(&e);
  const PartitionModel fitted =
      fit_partition(members, schemas, grammar, arity, o.smoothing_k, o.uniform);
  save(*fitted.model, o.out);
  ordered_json summary;
  summary["model"] = o.out;
  summary["database"] = fitted.db_id;
  summary["examples"] = examples.size();
  summary["skipped"] = corpus.skipped.size();
  summary["arity_truncated"] = fitted.arity_truncated;
  summary["rules"] = fitted.model->rules().size();
  summary["fingerprint"] = fitted.model->rules().fingerprint();
  std::cout << summary.dump() << "\n";
  return 0;
}

int run_sample(const Options& o) {
  const Pcfg model = load(o.model);
  Sampler sampler(model, o.seed, {o.max_depth, o.max_attempts});
  for (std::size_t i = 0; i < o.n; ++i) {
    ordered_json row;
    row["index"] = i;
    try {
      const SqlAst tree = sampler.draw();
      const std::string sql = render_sql(tree);
      row["sql"] = sql;
      row["logprob"] = logprob_json(score(model, linearize(tree, model.rules())));
      if (o.pretty) {
        std::cout << sql << "\n";
        continue;
      }
    } catch (const SamplingError& e) {
      if (e.kind() != "sampling_failure") throw;
      row["failure"] = e.what();
    }
    std::cout << row.dump() << "\n";
  }
  return 0;
}

int run_score(const Options& o) {
  const Pcfg model = load(o.model);
  std::vector<std::string> sqls;
  if (!o.sql.empty()) {
    sqls.push_back(o.sql);
  } else if (!o.corpus.empty()) {
    sqls = read_sql_column(o.corpus);
  } else {
    throw Error("usage", "score needs --sql or --corpus");
  }
  for (const std::string& sql : sqls) {
    const SqlAst tree = parse_sql_unchecked(sql);
    ordered_json row;
    row["sql"] = render_sql(tree);
    try {
      const double logprob = score(model, linearize(tree, model.rules()));
      row["logprob"] = logprob_json(logprob);
      row["finite"] = std::isfinite(logprob);
    } catch (const Error& e) {
      // A rule the grammar cannot produce at all scores like a zero-count rule.
      row["logprob"] = nullptr;
      row["finite"] = false;
      row["missing_rule"] = e.what();
    }
    std::cout << row.dump() << "\n";
  }
  return 0;
}

void print_pairs(const std::vector<UtterancePair>& pairs) {
  for (const UtterancePair& pair : pairs) {
    ordered_json row;
    row["id"] = pair.id;
    row["utterance"] = pair.utterance;
    row["sql"] = pair.sql;
    row["db_id"] = pair.db_id;
    row["provenance"] = to_string(pair.provenance);
    std::cout << row.dump() << "\n";
  }
}

int run_verbalize(const Options& o) {
  if (external(o) && !o.responses.empty()) {
    if (o.requests.empty()) throw Error("usage", "--responses needs the matching --requests file");
    const ImportResult result = import_utterances(o.responses, read_requests(o.requests));
    print_pairs(result.pairs);
    if (!result.missing_ids.empty()) {
      ordered_json note;
      note["missing_ids"] = result.missing_ids;
      std::cerr << note.dump() << "\n";
    }
    return 0;
  }
  const std::vector<SchemaDb> schemas = load_schemas(o.schemas);
  const Corpus corpus = load_corpus(o.corpus, schemas, parse_options(o));
  report_skipped(corpus);
  std::vector<Program> programs;
  for (const CorpusExample& example : corpus.examples) {
    programs.push_back({example.tree, example.db_id, ""});
  }
  if (external(o)) {
    if (o.requests.empty()) throw Error("usage", "external verbalizer needs --requests");
    ordered_json summary;
    summary["requests"] = export_requests(programs, o.requests);
    std::cout << summary.dump() << "\n";
    return 0;
  }
  std::vector<UtterancePair> pairs;
  for (std::size_t i = 0; i < programs.size(); ++i) {
    const SchemaDb& db = find_schema(schemas, programs[i].db_id);
    pairs.push_back({static_cast<std::int64_t>(i), template_verbalize(programs[i].tree, db),
                     render_sql(programs[i].tree), programs[i].db_id, Provenance::kTemplate});
  }
  print_pairs(pairs);
  return 0;
}

int run_synthesize(const Options& o) {
  const AsdlGrammar grammar = load_grammar(o.grammar);
  const std::vector<SchemaDb> schemas = load_schemas(o.schemas);
  const Corpus corpus = load_corpus(o.corpus, schemas, parse_options(o));
  report_skipped(corpus);
  SynthConfig config;
  config.ratio = o.ratio;
  config.mode = kModes.at(o.mode);
  config.seed = o.seed;
  config.limits = {o.max_depth, o.max_attempts};
  config.dedup = kDedups.at(o.dedup);
  config.semantic_filter = o.filter_semantics;
  config.smoothing_k = o.smoothing_k;
  config.verbalizer = external(o) ? VerbalizerKind::kExternal : VerbalizerKind::kTemplate;
  config.uniform_model = o.uniform;
  config.max_seq_arity = o.max_arity;

  const ProgramBatch batch = sample_programs(corpus.examples, schemas, grammar, config);
  SyntheticDataset dataset;
  if (external(o)) {
    if (o.requests.empty()) throw Error("usage", "external verbalizer needs --requests");
    const std::vector<VerbalizationRequest> requests = make_requests(to_programs(batch));
    if (o.responses.empty()) {
      write_requests(requests, o.requests);
      ordered_json summary;
      summary["requests"] = requests.size();
      summary["file"] = o.requests;
      std::cout << summary.dump() << "\n";
      return 0;
    }
    dataset = verbalize_with_responses(batch, import_utterances(o.responses, requests));
  } else {
    dataset = verbalize_with_template(batch, schemas);
  }
  const std::string manifest = dataset.manifest.to_json();
  if (!o.manifest.empty()) write_file(o.manifest, manifest);
  if (o.out.empty()) {
    std::cout << dataset_jsonl(dataset);
  } else {
    write_dataset(dataset, o.out);
    if (o.manifest.empty()) std::cout << manifest;
  }
  return 0;
}

int run_coverage(const Options& o) {
  const double value = coverage(read_sql_column(o.synthetic), read_sql_column(o.reference));
  if (o.pretty) {
    std::cout << "coverage: " << value << "\n";
  } else {
    ordered_json out;
    out["coverage"] = value;
    std::cout << out.dump() << "\n";
  }
  return 0;
}

int run_stats(const Options& o) {
  const ModelStats stats = model_stats(load(o.model));
  std::cout << (o.pretty ? stats.to_text() : stats.to_json() + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqlforge: grammar-driven synthesis of utterance-SQL pairs"};
  app.require_subcommand(1);
  Options o;

  const std::vector<std::string> verbalizers{"template", "external"};
  std::vector<std::string> modes, dedups;
  for (const auto& entry : kModes) modes.push_back(entry.first);
  for (const auto& entry : kDedups) dedups.push_back(entry.first);

  auto grammar_flag = [&](CLI::App* cmd) {
    cmd->add_option("--grammar", o.grammar, "ASDL grammar file (default: built-in SQL dialect)")
        ;
  };
  auto pretty_flag = [&](CLI::App* cmd) {
    cmd->add_flag("--pretty", o.pretty, "human-readable output");
  };
  auto membership_flag = [&](CLI::App* cmd) {
    cmd->add_flag("--warn-membership", o.warn_membership,
                  "accept columns outside the FROM table with a warning");
  };
  auto sampling_flags = [&](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--max-depth", o.max_depth, "depth bound per sample")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-attempts", o.max_attempts, "attempts per sample")
        ->check(CLI::PositiveNumber);
  };

  std::map<CLI::App*, int (*)(const Options&)> handlers;

  CLI::App* derive = app.add_subcommand("derive", "derive (and optionally ground) the rule set");
  grammar_flag(derive);
  derive->add_option("--schemas", o.schemas, "schema JSON");
  derive->add_option("--corpus", o.corpus, "corpus JSONL for grounding");
  derive->add_option("--db", o.db, "restrict grounding to one database");
  derive->add_option("--max-arity", o.max_arity, "sequence arity cap (default: corpus max, else 2)");
  derive->add_option("--out", o.out, "write the rule dump here");
  membership_flag(derive);
  pretty_flag(derive);
  handlers[derive] = run_derive;

  CLI::App* parse = app.add_subcommand("parse", "parse SQL into trees");
  parse->add_option("--schemas", o.schemas, "schema JSON")->required();
  parse->add_option("--corpus", o.corpus, "corpus JSONL");
  parse->add_option("--sql", o.sql, "a single SQL query");
  parse->add_option("--db", o.db, "database of --sql");
  membership_flag(parse);
  pretty_flag(parse);
  handlers[parse] = run_parse;

  CLI::App* est = app.add_subcommand("estimate", "estimate a PCFG from a corpus");
  grammar_flag(est);
  est->add_option("--schemas", o.schemas, "schema JSON")->required();
  est->add_option("--corpus", o.corpus, "corpus JSONL")->required();
  est->add_option("--out", o.out, "model file")->required();
  est->add_option("--db", o.db, "estimate a per-database model");
  est->add_option("--smoothing-k", o.smoothing_k, "additive smoothing")->check(CLI::NonNegativeNumber);
  est->add_option("--max-arity", o.max_arity, "sequence arity cap (default: corpus max)");
  est->add_flag("--uniform", o.uniform, "uniform rule probabilities (ablation)");
  membership_flag(est);
  handlers[est] = run_estimate;

  CLI::App* smp = app.add_subcommand("sample", "sample programs from a model");
  smp->add_option("--model", o.model, "model file")->required();
  smp->add_option("--n", o.n, "number of samples")->check(CLI::PositiveNumber);
  sampling_flags(smp);
  pretty_flag(smp);
  handlers[smp] = run_sample;

  CLI::App* scr = app.add_subcommand("score", "log-probability of programs under a model");
  scr->add_option("--model", o.model, "model file")->required();
  scr->add_option("--sql", o.sql, "a single SQL query");
  scr->add_option("--corpus", o.corpus, "JSONL with a \"sql\" field");
  handlers[scr] = run_score;

  CLI::App* verb = app.add_subcommand("verbalize", "attach utterances to programs");
  verb->add_option("--schemas", o.schemas, "schema JSON");
  verb->add_option("--corpus", o.corpus, "programs as JSONL {sql, db_id}");
  verb->add_option("--verbalizer", o.verbalizer, "template|external")
      ->check(CLI::IsMember(verbalizers));
  verb->add_option("--requests", o.requests, "requests JSONL for the external translator");
  verb->add_option("--responses", o.responses, "responses JSONL from the external translator")
      ;
  membership_flag(verb);
  handlers[verb] = run_verbalize;

  CLI::App* syn = app.add_subcommand("synthesize", "run the full synthesis pipeline");
  grammar_flag(syn);
  syn->add_option("--schemas", o.schemas, "schema JSON")->required();
  syn->add_option("--corpus", o.corpus, "corpus JSONL")->required();
  syn->add_option("--out", o.out, "dataset JSONL (default: stdout)");
  syn->add_option("--manifest", o.manifest, "manifest JSON");
  syn->add_option("--ratio", o.ratio, "synthetic size per corpus example")->check(CLI::PositiveNumber);
  syn->add_option("--mode", o.mode, "shared|per-db")
      ->check(CLI::IsMember(modes));
  sampling_flags(syn);
  syn->add_option("--dedup", o.dedup, "none|against-train|within-batch|both")
      ->check(CLI::IsMember(dedups));
  syn->add_flag("--filter-semantics", o.filter_semantics, "drop semantically invalid programs");
  syn->add_option("--smoothing-k", o.smoothing_k, "additive smoothing")->check(CLI::NonNegativeNumber);
  syn->add_option("--verbalizer", o.verbalizer, "template|external")
      ->check(CLI::IsMember(verbalizers));
  syn->add_option("--requests", o.requests, "requests JSONL (external verbalizer)");
  syn->add_option("--responses", o.responses, "responses JSONL (external verbalizer)")
      ;
  syn->add_flag("--uniform", o.uniform, "uniform rule probabilities (ablation)");
  syn->add_option("--max-arity", o.max_arity, "sequence arity cap (default: corpus max)");
  membership_flag(syn);
  handlers[syn] = run_synthesize;

  CLI::App* cov = app.add_subcommand("coverage", "share of reference programs found in a synthetic set");
  cov->add_option("--synthetic", o.synthetic, "synthetic JSONL")->required();
  cov->add_option("--reference", o.reference, "reference JSONL")->required();
  pretty_flag(cov);
  handlers[cov] = run_coverage;

  CLI::App* sts = app.add_subcommand("stats", "per-lhs rule statistics of a model");
  sts->add_option("--model", o.model, "model file")->required();
  pretty_flag(sts);
  handlers[sts] = run_stats;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (const auto& [cmd, handler] : handlers) {
      if (cmd->parsed()) return handler(o);
    }
  } catch (const Error& e) {
    ordered_json error;
    error["error"] = e.kind();
    error["message"] = e.what();
    std::cerr << error.dump() << "\n";
    return e.kind() == "usage" ? 1 : 2;
  } catch (const std::exception& e) {
    ordered_json error;
    error["error"] = "internal";
    error["message"] = e.what();
    std::cerr << error.dump() << "\n";
    return 2;
  }
  return 1;
}
