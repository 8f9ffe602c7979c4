// Copyright 2026 The RUC Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Transcript files shared by scoring and evaluation. Two layouts are
// accepted: a JSON-lines manifest (id + transcript fields, anything else is
// ignored) or Kaldi-style text, "utterance_id token token ...".

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ruc/corpus.hpp"
#include "ruc/errors.hpp"
#include "ruc/text.hpp"

namespace ruc {

struct Transcript {
  std::string id;
  TokenSeq tokens;
};

inline std::vector<Transcript> read_transcripts(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open transcript file: " + path);
  std::vector<Transcript> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    Transcript tr;
    if (t.front() == '{') {
      try {
        const auto j = nlohmann::json::parse(t);
        tr.id = j.at("id").get<std::string>();
        const auto &x = j.at("transcript");
        tr.tokens = x.is_array() ? x.get<TokenSeq>() : split_tokens(x.get<std::string>());
      } catch (const nlohmann::json::exception &e) {
        throw MalformedRecord(line_no, e.what());
      }
    } else {
      auto fields = split_tokens(t);
      tr.id = fields.front();
      tr.tokens.assign(std::make_move_iterator(fields.begin() + 1), std::make_move_iterator(fields.end()));
    }
    if (!seen.insert(tr.id).second) throw MalformedRecord(line_no, "duplicate id '" + tr.id + "'");
    out.push_back(std::move(tr));
  }
  return out;
}

inline std::unordered_map<std::string, TokenSeq> transcript_map(std::vector<Transcript> ts) {
  std::unordered_map<std::string, TokenSeq> m;
  m.reserve(ts.size());
  for (auto &t : ts) m.emplace(std::move(t.id), std::move(t.tokens));
  return m;
}

inline void write_text_file(const std::filesystem::path &path, const std::string &text) {
  detail::write_file(path, text);
}

}  // namespace ruc
