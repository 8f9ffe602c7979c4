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

// Synthetic corpora standing in for real transcribed speech.
//
// Frame counts are uniform integers so that every derived duration is
// frames * 10 ms and the generator is bit-reproducible from the seed. Token
// counts scale with duration at a jittered speaking rate and are clamped to
// [1, max_tokens].

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ruc/corpus.hpp"
#include "ruc/rng.hpp"

namespace ruc {

struct SyntheticCorpusOptions {
  std::size_t count = 50;
  std::size_t feature_dim = 8;
  std::size_t min_frames = 100;
  std::size_t max_frames = 500;
  double tokens_per_second = 3.0;
  std::size_t max_tokens = 300;
  std::size_t vocab_size = 500;
  std::uint64_t seed = 0;
  std::string id_prefix = "utt";
};

inline std::string synthetic_id(const std::string &prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return prefix + digits;
}

inline Corpus make_synthetic_corpus(const SyntheticCorpusOptions &opt) {
  if (opt.count == 0 || opt.feature_dim == 0 || opt.min_frames == 0 || opt.max_frames < opt.min_frames ||
      opt.max_tokens == 0 || opt.vocab_size == 0)
    throw ConfigError("invalid synthetic corpus options");
  RandomStream rng(opt.seed, StreamPurpose::kSynthetic);
  std::vector<Utterance> utts;
  utts.reserve(opt.count);
  for (std::size_t i = 0; i < opt.count; ++i) {
    Utterance u;
    u.id = synthetic_id(opt.id_prefix, i);
    const auto frames = static_cast<std::size_t>(rng.uniform_int(
        static_cast<std::int64_t>(opt.min_frames), static_cast<std::int64_t>(opt.max_frames)));
    u.duration_s = static_cast<double>(frames) * kFrameHopS;
    const double rate = opt.tokens_per_second * (0.5 + rng.uniform01());
    const auto tokens = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::floor(u.duration_s * rate)), 1, opt.max_tokens);
    u.transcript.reserve(tokens);
    for (std::size_t t = 0; t < tokens; ++t)
      u.transcript.push_back("w" + std::to_string(rng.uniform_below(opt.vocab_size)));
    u.features = FeatureMatrix(frames, opt.feature_dim);
    for (float &v : u.features.values()) v = static_cast<float>(rng.uniform01() * 2.0 - 1.0);
    utts.push_back(std::move(u));
  }
  return Corpus(std::move(utts));
}

}  // namespace ruc
