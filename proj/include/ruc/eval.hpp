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

// Word error rate: Levenshtein alignment with a fixed backtrace preference
// (substitution, then deletion, then insertion), pooled corpus WER, relative
// WER reduction and the spread of WER across segmentation settings.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ruc/errors.hpp"
#include "ruc/parallel.hpp"
#include "ruc/text.hpp"

namespace ruc {

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  EditCounts &operator+=(const EditCounts &o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    return *this;
  }
  friend bool operator==(const EditCounts &, const EditCounts &) = default;
};

/// Unit-cost minimum edit alignment of hyp against ref.
inline EditCounts align(const TokenSeq &ref, const TokenSeq &hyp) {
  if (ref.empty()) throw EmptyReference(0);
  const std::size_t n = ref.size(), m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<std::uint32_t> cost((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) cost[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    cost[i * w] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = cost[(i - 1) * w + j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const std::uint32_t del = cost[(i - 1) * w + j] + 1;
      const std::uint32_t ins = cost[i * w + j - 1] + 1;
      cost[i * w + j] = std::min({diag, del, ins});
    }
  }
  EditCounts c;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = cost[i * w + j];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (here == cost[(i - 1) * w + j - 1] + (same ? 0 : 1)) {
        if (!same) ++c.substitutions;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && here == cost[(i - 1) * w + j] + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

struct WerReport {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_tokens = 0;
  double wer_percent = 0.0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
};

inline WerReport make_report(const EditCounts &c, std::size_t ref_tokens) {
  WerReport r{c.substitutions, c.deletions, c.insertions, ref_tokens, 0.0};
  r.wer_percent = ref_tokens ? 100.0 * double(c.errors()) / double(ref_tokens) : 0.0;
  return r;
}

using RefHypPair = std::pair<TokenSeq, TokenSeq>;

/// Pooled WER: total edits over total reference tokens.
inline WerReport corpus_wer(std::span<const RefHypPair> pairs, unsigned threads = 1) {
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (pairs[k].first.empty()) throw EmptyReference(k);
  std::vector<EditCounts> per(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) { per[k] = align(pairs[k].first, pairs[k].second); });
  EditCounts total;
  std::size_t ref_tokens = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    total += per[k];
    ref_tokens += pairs[k].first.size();
  }
  return make_report(total, ref_tokens);
}

/// Relative WER reduction in percent; negative when the system is worse.
inline double werr(double baseline_wer, double system_wer) {
  if (!(baseline_wer > 0)) throw ZeroBaseline();
  return 100.0 * (baseline_wer - system_wer) / baseline_wer;
}

/// Sample standard deviation (n - 1 denominator).
inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) throw TooFewSettings(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / double(xs.size() - 1));
}

struct VadRobustnessRow {
  std::vector<std::pair<std::string, double>> wers;
  double sd = 0.0;
};

inline VadRobustnessRow vad_robustness(std::vector<std::pair<std::string, double>> wers) {
  std::vector<double> xs;
  xs.reserve(wers.size());
  for (const auto &w : wers) xs.push_back(w.second);
  const double sd = sample_sd(xs);
  return {std::move(wers), sd};
}

}  // namespace ruc
