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

// On-the-fly random utterance concatenation.
//
// For every training step a fresh buffer D is drawn from the corpus
// (uniform, without replacement). Each of the B batch items then draws a
// concatenation count n uniform on {1..N} and samples up to n utterances
// from D (uniform, with replacement), appending features along the frame
// axis and transcripts token-wise. An item is closed early as soon as the
// next sampled utterance would push it past max_tokens or max_duration_s;
// the first utterance of an item is always admitted.
//
// Random draws per step, in order, all from stream (seed, kBatch, step):
//   buffer: k = min(buffer_size, |corpus|) partial Fisher-Yates draws
//   per item: n, then one draw per sampled utterance (including the one
//             that trips a cap, after which the item stops drawing)
//
// Steps are numbered from 1. Batches for different steps are independent,
// so they can be built in any order and on any thread.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ruc/corpus.hpp"
#include "ruc/errors.hpp"
#include "ruc/matrix.hpp"
#include "ruc/parallel.hpp"
#include "ruc/rng.hpp"

namespace ruc {

struct RucConfig {
  std::size_t total_steps = 1;
  std::size_t batch_size = 8;
  std::size_t max_concat = 1;
  std::size_t buffer_size = 0;  // 0 selects 10 x batch_size
  std::size_t max_tokens = 300;
  double max_duration_s = 25.0;
  std::uint64_t seed = 0;

  std::size_t effective_buffer_size() const { return buffer_size ? buffer_size : 10 * batch_size; }

  /// Disables both caps.
  RucConfig &uncapped() {
    max_tokens = std::numeric_limits<std::size_t>::max();
    max_duration_s = std::numeric_limits<double>::infinity();
    return *this;
  }

  void validate() const {
    if (total_steps < 1) throw ConfigError("total_steps must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (max_concat < 1) throw ConfigError("max_concat must be >= 1");
    if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (!(max_duration_s > 0)) throw ConfigError("max_duration_s must be > 0");
  }
};

enum class Stage { kStage1, kStage2 };

inline const char *stage_name(Stage s) { return s == Stage::kStage1 ? "stage1" : "stage2"; }

struct ConcatItem {
  std::vector<std::string> source_ids;
  std::vector<std::size_t> source_indices;  // corpus indices; empty for ad-hoc concatenation
  FeatureMatrix features;
  TokenSeq transcript;
  double duration_s = 0.0;
};

struct Batch {
  std::size_t step_index = 0;
  Stage stage = Stage::kStage2;
  std::vector<ConcatItem> items;
};

/// Source indices only; materialize() turns a plan into feature matrices.
struct BatchPlan {
  std::size_t step_index = 0;
  std::vector<std::vector<std::size_t>> items;
};

inline RandomStream batch_stream(std::uint64_t seed, std::size_t step) {
  return RandomStream(seed, StreamPurpose::kBatch, step);
}

/// min(size, |corpus|) distinct corpus indices, uniformly without
/// replacement, in draw order. Sparse Fisher-Yates keeps large corpora O(k).
inline std::vector<std::size_t> sample_buffer(const Corpus &corpus, std::size_t size, RandomStream &rng) {
  const std::size_t n = corpus.size();
  const std::size_t k = std::min(size, n);
  std::vector<std::size_t> out;
  out.reserve(k);
  if (4 * k >= n) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.uniform_below(n - i);
      std::swap(perm[i], perm[j]);
      out.push_back(perm[i]);
    }
    return out;
  }
  std::unordered_map<std::size_t, std::size_t> displaced;
  auto at = [&](std::size_t pos) {
    auto it = displaced.find(pos);
    return it == displaced.end() ? pos : it->second;
  };
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    const std::size_t vi = at(i), vj = at(j);
    out.push_back(vj);
    displaced[j] = vi;
  }
  return out;
}

/// n uniform on {1, ..., max_concat}.
inline std::size_t draw_concat_count(RandomStream &rng, std::size_t max_concat) {
  if (max_concat < 1) throw ConfigError("max_concat must be >= 1");
  return 1 + static_cast<std::size_t>(rng.uniform_below(max_concat));
}

namespace detail {

template <class Get>
ConcatItem concat_parts(std::size_t count, Get &&get) {
  if (count == 0) throw DataError("concatenation needs at least one part");
  ConcatItem item;
  const std::size_t dim = get(0).features.cols();
  std::size_t rows = 0, tokens = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const Utterance &u = get(i);
    if (u.features.cols() != dim) throw DimMismatch(u.id, dim, u.features.cols());
    rows += u.frame_count();
    tokens += u.transcript.size();
  }
  item.features = FeatureMatrix(0, dim);
  item.features.reserve_rows(rows);
  item.transcript.reserve(tokens);
  item.source_ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Utterance &u = get(i);
    item.source_ids.push_back(u.id);
    item.features.append_rows(u.features);
    item.transcript.insert(item.transcript.end(), u.transcript.begin(), u.transcript.end());
    item.duration_s += u.duration_s;
  }
  return item;
}

}  // namespace detail

/// Appends parts in order: features along the frame axis without gap
/// frames, transcripts without a separator token.
inline ConcatItem concat_utterances(std::span<const Utterance> parts) {
  return detail::concat_parts(parts.size(), [&](std::size_t i) -> const Utterance & { return parts[i]; });
}

inline ConcatItem materialize_item(const Corpus &corpus, std::span<const std::size_t> sources) {
  ConcatItem item =
      detail::concat_parts(sources.size(), [&](std::size_t i) -> const Utterance & { return corpus[sources[i]]; });
  item.source_indices.assign(sources.begin(), sources.end());
  return item;
}

/// One item's sources: draw n, then sample from the buffer with replacement,
/// closing the item at the first sample that would break a cap.
inline std::vector<std::size_t> plan_item(const Corpus &corpus, std::span<const std::size_t> buffer,
                                          const RucConfig &cfg, RandomStream &rng) {
  const std::size_t n = draw_concat_count(rng, cfg.max_concat);
  std::vector<std::size_t> sources;
  sources.reserve(n);
  std::size_t tokens = 0;
  double duration = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = buffer[rng.uniform_below(buffer.size())];
    const std::size_t next_tokens = tokens + corpus.token_count(idx);
    const double next_duration = duration + corpus[idx].duration_s;
    if (!sources.empty() && (next_tokens > cfg.max_tokens || next_duration > cfg.max_duration_s)) break;
    sources.push_back(idx);
    tokens = next_tokens;
    duration = next_duration;
  }
  return sources;
}

inline BatchPlan plan_batch(const Corpus &corpus, const RucConfig &cfg, RandomStream &rng, std::size_t step) {
  cfg.validate();
  BatchPlan plan;
  plan.step_index = step;
  const auto buffer = sample_buffer(corpus, cfg.effective_buffer_size(), rng);
  plan.items.reserve(cfg.batch_size);
  while (plan.items.size() < cfg.batch_size) plan.items.push_back(plan_item(corpus, buffer, cfg, rng));
  return plan;
}

inline BatchPlan plan_batch(const Corpus &corpus, const RucConfig &cfg, std::size_t step) {
  auto rng = batch_stream(cfg.seed, step);
  return plan_batch(corpus, cfg, rng, step);
}

inline Batch materialize(const Corpus &corpus, const BatchPlan &plan, Stage stage = Stage::kStage2) {
  Batch b;
  b.step_index = plan.step_index;
  b.stage = stage;
  b.items.reserve(plan.items.size());
  for (const auto &sources : plan.items) b.items.push_back(materialize_item(corpus, sources));
  return b;
}

inline Batch build_batch(const Corpus &corpus, const RucConfig &cfg, RandomStream &rng, std::size_t step) {
  return materialize(corpus, plan_batch(corpus, cfg, rng, step));
}

/// Uses the canonical stream for `step`.
inline Batch build_batch(const Corpus &corpus, const RucConfig &cfg, std::size_t step) {
  auto rng = batch_stream(cfg.seed, step);
  return build_batch(corpus, cfg, rng, step);
}

// ---------------------------------------------------------------------------
// Two-stage schedule

/// Stage 1 is ordinary training (no concatenation, decaying LR); stage 2
/// fine-tunes with concatenation at constant LR. The LR tags are advisory;
/// the step callback owns the optimizer.
struct TrainingSchedule {
  std::size_t stage1_steps = 200000;
  std::size_t stage2_steps = 50000;
  std::string stage1_lr_policy = "decay";
  std::string stage2_lr_policy = "constant";

  std::size_t total() const { return stage1_steps + stage2_steps; }
};

struct ScheduleReport {
  std::size_t stage1_steps = 0;
  std::size_t stage2_steps = 0;
};

/// Config actually used for a stage: stage 1 is the same sampler with N = 1.
inline RucConfig stage_config(const RucConfig &cfg, Stage stage) {
  RucConfig c = cfg;
  if (stage == Stage::kStage1) c.max_concat = 1;
  return c;
}

using StepCallback = std::function<void(const Batch &, Stage)>;

/// Builds batches for steps 1..stage1+stage2 and hands them to step_fn in
/// step order. With threads > 1, up to `threads * 4` batches are prepared
/// ahead in parallel; the callback always runs on the calling thread.
inline ScheduleReport run_schedule(const Corpus &corpus, const RucConfig &cfg, const TrainingSchedule &schedule,
                                   const StepCallback &step_fn, unsigned threads = 1) {
  cfg.validate();
  const RucConfig cfg1 = stage_config(cfg, Stage::kStage1);
  const RucConfig cfg2 = stage_config(cfg, Stage::kStage2);
  const std::size_t total = schedule.total();
  const std::size_t window = std::max<std::size_t>(1, std::size_t(threads) * 4);
  ScheduleReport report;
  std::vector<Batch> ready;
  for (std::size_t first = 1; first <= total; first += window) {
    const std::size_t count = std::min(window, total - first + 1);
    ready.assign(count, Batch{});
    parallel_for(count, threads, [&](std::size_t i) {
      const std::size_t step = first + i;
      const Stage stage = step <= schedule.stage1_steps ? Stage::kStage1 : Stage::kStage2;
      const RucConfig &c = stage == Stage::kStage1 ? cfg1 : cfg2;
      ready[i] = materialize(corpus, plan_batch(corpus, c, step), stage);
    });
    for (auto &b : ready) {
      try {
        step_fn(b, b.stage);
      } catch (const std::exception &e) {
        throw CallbackFailure(b.step_index, e.what());
      } catch (...) {
        throw CallbackFailure(b.step_index, "unknown exception");
      }
      (b.stage == Stage::kStage1 ? report.stage1_steps : report.stage2_steps)++;
      b = Batch{};
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Output formats
//
// Binary batch file (little-endian), one batch per file or concatenated:
//   "RUCB" | u32 version=1 | u64 step | u32 stage (1|2) | u32 item_count
//   item: u32 n_src, n_src x (u32 len, bytes) source ids,
//         u32 n_tok, n_tok x (u32 len, bytes) tokens,
//         f64 duration_s, u32 frames, u32 dim, frames*dim f32 (frame-major)

inline constexpr std::uint32_t kBatchFormatVersion = 1;

inline void encode_batch(const Batch &b, std::string &out) {
  using detail::put_u32;
  auto put_str = [&](const std::string &s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
  };
  out.append("RUCB", 4);
  put_u32(out, kBatchFormatVersion);
  detail::put_u64(out, b.step_index);
  put_u32(out, b.stage == Stage::kStage1 ? 1u : 2u);
  put_u32(out, static_cast<std::uint32_t>(b.items.size()));
  for (const auto &item : b.items) {
    put_u32(out, static_cast<std::uint32_t>(item.source_ids.size()));
    for (const auto &id : item.source_ids) put_str(id);
    put_u32(out, static_cast<std::uint32_t>(item.transcript.size()));
    for (const auto &tok : item.transcript) put_str(tok);
    detail::put_f64(out, item.duration_s);
    put_u32(out, static_cast<std::uint32_t>(item.features.rows()));
    put_u32(out, static_cast<std::uint32_t>(item.features.cols()));
    for (float f : item.features.values()) detail::put_f32(out, f);
  }
}

inline std::string encode_batch(const Batch &b) {
  std::string out;
  encode_batch(b, out);
  return out;
}

/// Parses one batch starting at `pos`, advancing it past the batch.
inline Batch decode_batch(std::string_view bytes, std::size_t &pos) {
  auto need = [&](std::size_t n) {
    if (pos + n > bytes.size()) throw TruncatedFile("batch record truncated");
  };
  auto u32 = [&] {
    need(4);
    const auto v = detail::get_u32(reinterpret_cast<const unsigned char *>(bytes.data() + pos));
    pos += 4;
    return v;
  };
  auto u64 = [&] {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | hi << 32;
  };
  auto str = [&] {
    const std::size_t len = u32();
    need(len);
    std::string s(bytes.substr(pos, len));
    pos += len;
    return s;
  };
  need(4);
  if (bytes.substr(pos, 4) != "RUCB") throw HeaderMismatch("bad batch magic");
  pos += 4;
  if (u32() != kBatchFormatVersion) throw HeaderMismatch("unsupported batch format version");
  Batch b;
  b.step_index = u64();
  b.stage = u32() == 1 ? Stage::kStage1 : Stage::kStage2;
  const std::size_t items = u32();
  b.items.resize(items);
  for (auto &item : b.items) {
    item.source_ids.resize(u32());
    for (auto &id : item.source_ids) id = str();
    item.transcript.resize(u32());
    for (auto &tok : item.transcript) tok = str();
    const std::uint64_t dbits = u64();
    std::memcpy(&item.duration_s, &dbits, 8);
    const std::size_t rows = u32(), cols = u32();
    need(rows * cols * 4);
    std::vector<float> values(rows * cols);
    for (auto &v : values) {
      const std::uint32_t bits = u32();
      std::memcpy(&v, &bits, 4);
    }
    item.features = FeatureMatrix(rows, cols, std::move(values));
  }
  return b;
}

inline std::string item_id(std::size_t step, std::size_t index) {
  auto pad = [](std::size_t v, std::size_t w) {
    std::string s = std::to_string(v);
    if (s.size() < w) s.insert(0, w - s.size(), '0');
    return s;
  };
  return "s" + pad(step, 7) + "-i" + pad(index, 4);
}

/// Augmented-manifest lines for a batch: one JSON object per item.
inline void append_manifest_lines(const Batch &b, std::string &out) {
  for (std::size_t i = 0; i < b.items.size(); ++i) {
    const auto &item = b.items[i];
    nlohmann::ordered_json j;
    j["id"] = item_id(b.step_index, i);
    j["step"] = b.step_index;
    j["stage"] = stage_name(b.stage);
    j["source_ids"] = item.source_ids;
    j["frame_count"] = item.features.rows();
    j["duration_s"] = item.duration_s;
    j["transcript"] = join_tokens(item.transcript);
    out += j.dump();
    out.push_back('\n');
  }
}

}  // namespace ruc
