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

// Program-to-utterance stage. The built-in template verbalizer is a
// deterministic gloss; a neural translator runs out of process and talks to
// the pipeline through two JSON-lines files:
//
//   requests:  {"id": 0, "sql": "SELECT ...", "db_id": "geo", "rules": "3 7 ..."}
//   responses: {"id": 0, "utterance": "..."}

#ifndef SQLFORGE_VERBALIZE_H_
#define SQLFORGE_VERBALIZE_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sqlforge/ast.h"
#include "sqlforge/error.h"
#include "sqlforge/schema.h"

namespace sqlforge {

enum class Provenance { kTemplate, kExternal };

std::string_view to_string(Provenance provenance);

struct VerbalizationRequest {
  std::int64_t id = 0;
  std::string sql;
  std::string db_id;
  // Space-separated rule ids of the program's derivation; may be empty.
  std::string rules_hint;
};

struct UtterancePair {
  std::int64_t id = 0;
  std::string utterance;
  std::string sql;
  std::string db_id;
  Provenance provenance = Provenance::kTemplate;
};

class ExchangeError : public Error {
 public:
  explicit ExchangeError(const std::string& message) : Error("exchange", message) {}
};

// "what is the total length of river where traverse is colorado?"
// Throws Error for trees outside the reference dialect.
std::string template_verbalize(const SqlAst& tree, const SchemaDb& db);

struct Program {
  SqlAst tree;
  std::string db_id;
  std::string rules_hint;
};

// Builds requests with ids 0..n-1 in order, SQL in canonical form.
std::vector<VerbalizationRequest> make_requests(const std::vector<Program>& programs);

void write_requests(const std::vector<VerbalizationRequest>& requests,
                    const std::filesystem::path& path);
std::vector<VerbalizationRequest> read_requests(const std::filesystem::path& path);

// make_requests + write_requests; returns the number written.
std::size_t export_requests(const std::vector<Program>& programs,
                            const std::filesystem::path& path);

struct ImportResult {
  std::vector<UtterancePair> pairs;  // in request order
  std::vector<std::int64_t> missing_ids;
};

// Joins responses to requests on id. Throws ExchangeError for malformed
// lines, ids with no request, duplicate ids and empty utterances.
ImportResult import_utterances(const std::filesystem::path& path,
                               const std::vector<VerbalizationRequest>& requests);

}  // namespace sqlforge

#endif  // SQLFORGE_VERBALIZE_H_
