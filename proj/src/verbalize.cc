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

#include "sqlforge/verbalize.h"

#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "sqlforge/sql.h"

namespace sqlforge {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void outside_dialect(const SqlAst& node) {
  throw Error("verbalize", "node outside the reference dialect: " + node.symbol +
                               (node.constructor.empty() ? "" : "." + node.constructor));
}

std::string_view agg_phrase(std::string_view agg) {
  if (agg == "NoneAggOp") return "";
  if (agg == "Max") return "maximum ";
  if (agg == "Min") return "minimum ";
  if (agg == "Count") return "number of ";
  if (agg == "Sum") return "total ";
  if (agg == "Avg") return "average ";
  return {};
}

std::string_view op_phrase(std::string_view op) {
  if (op == "Eq") return "is";
  if (op == "Ne") return "is not";
  if (op == "Lt") return "is less than";
  if (op == "Le") return "is at most";
  if (op == "Gt") return "is greater than";
  if (op == "Ge") return "is at least";
  return {};
}

int precedence(const SqlAst& cond) {
  if (cond.constructor == dialect::kOr) return 1;
  if (cond.constructor == dialect::kAnd) return 2;
  if (cond.constructor == dialect::kNot) return 3;
  return 4;
}

std::string cond_phrase(const SqlAst& cond);

std::string grouped(const SqlAst& child, bool parens) {
  std::string text = cond_phrase(child);
  return parens ? "(" + text + ")" : text;
}

// Bracketing follows render_sql so distinct conditions read differently.
std::string cond_phrase(const SqlAst& cond) {
  if (cond.symbol != dialect::kCond) outside_dialect(cond);
  const int mine = precedence(cond);
  if ((cond.constructor == dialect::kAnd || cond.constructor == dialect::kOr) &&
      cond.children.size() == 2) {
    const char* word = cond.constructor == dialect::kAnd ? " and " : " or ";
    return grouped(cond.children[0], precedence(cond.children[0]) < mine) + word +
           grouped(cond.children[1], precedence(cond.children[1]) <= mine);
  }
  if (cond.constructor == dialect::kNot && cond.children.size() == 1) {
    return "it is not the case that " +
           grouped(cond.children[0], precedence(cond.children[0]) < mine);
  }
  if (cond.constructor == dialect::kCompare && cond.children.size() == 3) {
    const std::string_view op = op_phrase(cond.children[0].constructor);
    if (op.empty() || !cond.children[1].is_terminal() || !cond.children[2].is_terminal()) {
      outside_dialect(cond);
    }
    const Literal literal = Literal::from_surface(cond.children[2].token);
    return cond.children[1].token + " " + std::string(op) + " " + literal.text;
  }
  outside_dialect(cond);
}

}  // namespace

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::kExternal ? "external" : "template";
}

std::string template_verbalize(const SqlAst& tree, const SchemaDb& /*db*/) {
  if (tree.symbol != dialect::kSql || tree.children.size() < 2 || tree.children.size() > 3) {
    outside_dialect(tree);
  }
  const SqlAst& select = tree.children[0];
  if (select.symbol != dialect::kSelect || select.children.empty()) outside_dialect(select);
  std::vector<std::string> items;
  for (const SqlAst& agg : select.children) {
    if (agg.children.size() != 2 || !agg.children[1].is_terminal()) outside_dialect(agg);
    const std::string_view phrase = agg_phrase(agg.children[0].constructor);
    if (phrase.empty() && agg.children[0].constructor != dialect::kNoAgg) {
      outside_dialect(agg.children[0]);
    }
    items.push_back(std::string(phrase) + agg.children[1].token);
  }
  std::string subject;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) subject += (i + 1 == items.size()) ? " and " : ", ";
    subject += items[i];
  }
  const SqlAst& table = tree.children[1];
  if (table.symbol != kTableCategory || !table.is_terminal()) outside_dialect(table);
  std::string out = std::string(items.size() == 1 ? "what is the " : "what are the ") +
                    subject + " of " + table.token;
  if (tree.children.size() == 3) out += " where " + cond_phrase(tree.children[2]);
  return out + "?";
}

std::vector<VerbalizationRequest> make_requests(const std::vector<Program>& programs) {
  std::vector<VerbalizationRequest> requests;
  requests.reserve(programs.size());
  for (std::size_t i = 0; i < programs.size(); ++i) {
    requests.push_back({static_cast<std::int64_t>(i), render_sql(programs[i].tree),
                        programs[i].db_id, programs[i].rules_hint});
  }
  return requests;
}

void write_requests(const std::vector<VerbalizationRequest>& requests,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExchangeError("cannot write requests file " + path.string());
  for (const VerbalizationRequest& request : requests) {
    json row = {{"id", request.id}, {"sql", request.sql}, {"db_id", request.db_id}};
    if (!request.rules_hint.empty()) row["rules"] = request.rules_hint;
    out << row.dump() << "\n";
  }
  if (!out) throw ExchangeError("failed writing requests file " + path.string());
}

std::vector<VerbalizationRequest> read_requests(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExchangeError("cannot open requests file " + path.string());
  std::vector<VerbalizationRequest> requests;
  std::set<std::int64_t> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json row = json::parse(line);
      VerbalizationRequest request{row.at("id").get<std::int64_t>(),
                                   row.at("sql").get<std::string>(),
                                   row.at("db_id").get<std::string>(),
                                   row.value("rules", std::string())};
      if (!ids.insert(request.id).second) {
        throw ExchangeError("duplicate request id " + std::to_string(request.id));
      }
      requests.push_back(std::move(request));
    } catch (const json::exception& e) {
      throw ExchangeError(path.string() + ":" + std::to_string(line_no) +
                          ": malformed request: " + e.what());
    }
  }
  return requests;
}

std::size_t export_requests(const std::vector<Program>& programs,
                            const std::filesystem::path& path) {
  const std::vector<VerbalizationRequest> requests = make_requests(programs);
  write_requests(requests, path);
  return requests.size();
}

ImportResult import_utterances(const std::filesystem::path& path,
                               const std::vector<VerbalizationRequest>& requests) {
  std::map<std::int64_t, std::size_t> index;
  for (std::size_t i = 0; i < requests.size(); ++i) index.emplace(requests[i].id, i);

  std::ifstream in(path, std::ios::binary);
  if (!in) throw ExchangeError("cannot open responses file " + path.string());
  std::map<std::int64_t, std::string> utterances;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    std::int64_t id = 0;
    std::string utterance;
    try {
      const json row = json::parse(line);
      id = row.at("id").get<std::int64_t>();
      utterance = row.at("utterance").get<std::string>();
    } catch (const json::exception& e) {
      throw ExchangeError(where + ": malformed response: " + e.what());
    }
    if (!index.contains(id)) {
      throw ExchangeError(where + ": response id " + std::to_string(id) +
                          " matches no request");
    }
    if (utterance.empty()) {
      throw ExchangeError(where + ": empty utterance for id " + std::to_string(id));
    }
    if (!utterances.emplace(id, std::move(utterance)).second) {
      throw ExchangeError(where + ": duplicate response id " + std::to_string(id));
    }
  }

  ImportResult result;
  for (const VerbalizationRequest& request : requests) {
    auto it = utterances.find(request.id);
    if (it == utterances.end()) {
      result.missing_ids.push_back(request.id);
      continue;
    }
    result.pairs.push_back(
        {request.id, it->second, request.sql, request.db_id, Provenance::kExternal});
  }
  return result;
}

}  // namespace sqlforge
