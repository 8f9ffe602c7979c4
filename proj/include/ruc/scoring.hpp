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

// Hypothesis scoring with length normalization.
//
//   s(y, x)  = sum_i log P(y_i | y_<i, x)
//   s'(y, x) = s(y, x) / ((5 + |y|)^alpha / 6^alpha)
//
// Since s <= 0, a larger denominator pulls long hypotheses toward zero, i.e.
// alpha > 0 favours longer outputs. alpha = 0 leaves s untouched.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ruc/errors.hpp"
#include "ruc/eval.hpp"
#include "ruc/text.hpp"

namespace ruc {

struct Hypothesis {
  std::string utterance_id;
  TokenSeq tokens;
  std::vector<double> token_logprobs;

  void validate() const {
    if (tokens.size() != token_logprobs.size())
      throw DataError("hypothesis for '" + utterance_id + "' has mismatched token/logprob counts");
    for (double lp : token_logprobs)
      if (!(lp <= 0.0)) throw DataError("hypothesis for '" + utterance_id + "' has a positive log-probability");
  }
};

struct NormalizedScore {
  double raw_s = 0.0;
  double alpha = 0.0;
  double norm_s = 0.0;
  std::size_t length = 0;
};

inline double raw_score(const Hypothesis &hyp) {
  hyp.validate();
  if (hyp.tokens.empty()) throw EmptyHypothesis();
  double s = 0.0;
  for (double lp : hyp.token_logprobs) s += lp;
  return s;
}

inline double length_penalty(std::size_t length, double alpha) {
  return std::pow(5.0 + double(length), alpha) / std::pow(6.0, alpha);
}

inline double length_normalized_score(double s, std::size_t length, double alpha) {
  if (length < 1) throw ConfigError("length must be >= 1");
  if (!(alpha >= 0)) throw ConfigError("alpha must be >= 0");
  if (alpha == 0.0) return s;
  return s / length_penalty(length, alpha);
}

inline NormalizedScore score_hypothesis(const Hypothesis &hyp, double alpha) {
  const double s = raw_score(hyp);
  return {s, alpha, length_normalized_score(s, hyp.tokens.size(), alpha), hyp.tokens.size()};
}

struct RankedHypothesis {
  std::size_t index = 0;  // position in the input n-best
  NormalizedScore score;
};

/// Stable descending sort by normalized score; ties keep input order.
inline std::vector<RankedHypothesis> rescore_nbest(const std::vector<Hypothesis> &nbest, double alpha) {
  if (nbest.empty()) throw DataError("empty n-best list");
  std::vector<RankedHypothesis> ranked;
  ranked.reserve(nbest.size());
  for (std::size_t i = 0; i < nbest.size(); ++i) ranked.push_back({i, score_hypothesis(nbest[i], alpha)});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedHypothesis &a, const RankedHypothesis &b) { return a.score.norm_s > b.score.norm_s; });
  return ranked;
}

inline std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 8; ++i) g.push_back(i / 10.0);
  return g;
}

struct NbestSet {
  TokenSeq reference;
  std::vector<Hypothesis> nbest;
};

struct SweepResult {
  double best_alpha = 0.0;
  std::vector<std::pair<double, WerReport>> wer_by_alpha;  // grid order
};

/// For every alpha picks the top hypothesis of each set and scores the
/// selection with pooled WER. Minimum WER wins; ties go to the smaller alpha.
inline SweepResult sweep_alpha(const std::vector<NbestSet> &sets, const std::vector<double> &grid,
                               unsigned threads = 1) {
  if (grid.empty()) throw ConfigError("alpha grid is empty");
  SweepResult result;
  result.wer_by_alpha.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t g) {
    std::vector<RefHypPair> pairs;
    pairs.reserve(sets.size());
    for (const auto &set : sets) {
      const auto ranked = rescore_nbest(set.nbest, grid[g]);
      pairs.emplace_back(set.reference, set.nbest[ranked.front().index].tokens);
    }
    result.wer_by_alpha[g] = {grid[g], corpus_wer(pairs)};
  });
  bool have = false;
  double best_wer = 0.0;
  for (const auto &[alpha, report] : result.wer_by_alpha) {
    if (!have || report.wer_percent < best_wer ||
        (report.wer_percent == best_wer && alpha < result.best_alpha)) {
      have = true;
      best_wer = report.wer_percent;
      result.best_alpha = alpha;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// N-best files: "utterance_id rank token:logprob token:logprob ..." per line.
// The log-probability follows the last ':' of each field, so tokens may
// themselves contain ':'. Utterances keep first-seen order; hypotheses are
// ordered by rank.

struct NbestList {
  std::string utterance_id;
  std::vector<Hypothesis> hypotheses;
};

inline std::vector<NbestList> read_nbest_file(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open n-best file: " + path);
  std::vector<NbestList> lists;
  std::vector<std::vector<long long>> ranks;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_tokens(t);
    if (fields.size() < 2) throw MalformedRecord(line_no, "expected utterance_id and rank");
    const auto rank = parse_int(fields[1]);
    if (!rank) throw MalformedRecord(line_no, "bad rank '" + fields[1] + "'");
    Hypothesis h;
    h.utterance_id = fields[0];
    for (std::size_t f = 2; f < fields.size(); ++f) {
      const auto colon = fields[f].rfind(':');
      if (colon == std::string::npos || colon == 0) throw MalformedRecord(line_no, "expected token:logprob");
      const auto lp = parse_double(std::string_view(fields[f]).substr(colon + 1));
      if (!lp) throw MalformedRecord(line_no, "bad log-probability in '" + fields[f] + "'");
      if (*lp > 0.0) throw MalformedRecord(line_no, "log-probability > 0 in '" + fields[f] + "'");
      h.tokens.push_back(fields[f].substr(0, colon));
      h.token_logprobs.push_back(*lp);
    }
    auto [it, inserted] = index.emplace(fields[0], lists.size());
    if (inserted) {
      lists.push_back({fields[0], {}});
      ranks.emplace_back();
    }
    lists[it->second].hypotheses.push_back(std::move(h));
    ranks[it->second].push_back(*rank);
  }
  for (std::size_t u = 0; u < lists.size(); ++u) {
    std::vector<std::size_t> order(lists[u].hypotheses.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ranks[u][a] < ranks[u][b]; });
    std::vector<Hypothesis> sorted;
    sorted.reserve(order.size());
    for (auto k : order) sorted.push_back(std::move(lists[u].hypotheses[k]));
    lists[u].hypotheses = std::move(sorted);
  }
  return lists;
}

}  // namespace ruc
