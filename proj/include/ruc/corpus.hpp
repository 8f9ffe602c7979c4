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

// Utterance corpora: manifest parsing, the RUCF feature file format and the
// immutable in-memory Corpus the augmenter samples from.
//
// Manifest: one JSON object per line with fields
//   id, feature_path, frame_count, duration_s, transcript
// where transcript is a space-separated token string. Relative feature paths
// resolve against the manifest's directory.
//
// Feature file (little-endian):
//   "RUCF" | u32 frame_count | u32 feature_dim | frame_count*feature_dim f32
// Payload is frame-major.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ruc/errors.hpp"
#include "ruc/matrix.hpp"
#include "ruc/text.hpp"

namespace ruc {

inline constexpr double kFrameHopS = 0.010;
// One frame of rounding slack between a manifest duration and its frames.
inline constexpr double kDurationSlackS = 0.011;

struct Utterance {
  std::string id;
  FeatureMatrix features;
  TokenSeq transcript;
  double duration_s = 0.0;

  std::size_t frame_count() const { return features.rows(); }
};

struct ManifestEntry {
  std::string id;
  std::string feature_path;  // as resolved against the manifest directory
  std::size_t frame_count = 0;
  double duration_s = 0.0;
  TokenSeq transcript;
};

inline bool duration_consistent(double duration_s, std::size_t frames) {
  return std::fabs(duration_s - static_cast<double>(frames) * kFrameHopS) <= kDurationSlackS;
}

/// Immutable, validated collection of utterances. Index order is manifest
/// order and is the canonical index used by the seeded sampler.
class Corpus {
 public:
  explicit Corpus(std::vector<Utterance> utterances) : utterances_(std::move(utterances)) {
    if (utterances_.empty()) throw DataError("corpus is empty");
    feature_dim_ = utterances_.front().features.cols();
    if (feature_dim_ == 0) throw DataError("feature_dim must be positive");
    std::unordered_set<std::string> seen;
    token_counts_.reserve(utterances_.size());
    for (const auto &u : utterances_) {
      if (!seen.insert(u.id).second) throw DataError("duplicate utterance id '" + u.id + "'");
      if (u.features.cols() != feature_dim_) throw DimMismatch(u.id, feature_dim_, u.features.cols());
      if (u.frame_count() == 0) throw DataError("utterance '" + u.id + "' has no frames");
      if (u.transcript.empty()) throw DataError("utterance '" + u.id + "' has empty transcript");
      if (!(u.duration_s > 0) || !duration_consistent(u.duration_s, u.frame_count()))
        throw DataError("utterance '" + u.id + "' duration disagrees with its frame count");
      token_counts_.push_back(u.transcript.size());
      total_seconds_ += u.duration_s;
    }
  }

  std::size_t size() const { return utterances_.size(); }
  const Utterance &operator[](std::size_t i) const { return utterances_[i]; }
  const std::vector<Utterance> &utterances() const { return utterances_; }
  auto begin() const { return utterances_.begin(); }
  auto end() const { return utterances_.end(); }

  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t token_count(std::size_t i) const { return token_counts_[i]; }
  double total_seconds() const { return total_seconds_; }
  double total_hours() const { return total_seconds_ / 3600.0; }

 private:
  std::vector<Utterance> utterances_;
  std::vector<std::size_t> token_counts_;
  std::size_t feature_dim_ = 0;
  double total_seconds_ = 0.0;
};

struct CorpusSummary {
  std::size_t utterances = 0;
  double hours = 0.0;
};

inline CorpusSummary corpus_summary(const Corpus &corpus) {
  return {corpus.size(), corpus.total_hours()};
}

// ---------------------------------------------------------------------------
// RUCF feature files

namespace detail {

inline constexpr std::array<char, 4> kFeatureMagic = {'R', 'U', 'C', 'F'};

inline void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char *p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

inline void put_f32(std::string &out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

inline void put_f64(std::string &out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

inline void write_file(const std::filesystem::path &path, const std::string &bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoFailure("cannot open for writing: " + path.string());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoFailure("write failed: " + path.string());
}

}  // namespace detail

inline std::string encode_features(const FeatureMatrix &m) {
  std::string out;
  out.reserve(12 + m.values().size() * 4);
  out.append(detail::kFeatureMagic.data(), 4);
  detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (float f : m.values()) detail::put_f32(out, f);
  return out;
}

inline void write_features(const std::filesystem::path &path, const FeatureMatrix &m) {
  detail::write_file(path, encode_features(m));
}

struct FeatureHeader {
  std::uint32_t frame_count = 0;
  std::uint32_t feature_dim = 0;
};

inline FeatureHeader read_feature_header(std::istream &is, const std::string &what) {
  unsigned char hdr[12];
  is.read(reinterpret_cast<char *>(hdr), 12);
  if (is.gcount() != 12) throw TruncatedFile("feature header truncated: " + what);
  if (std::memcmp(hdr, detail::kFeatureMagic.data(), 4) != 0)
    throw HeaderMismatch("bad feature magic: " + what);
  return {detail::get_u32(hdr + 4), detail::get_u32(hdr + 8)};
}

inline FeatureHeader read_feature_header(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open feature file: " + path.string());
  return read_feature_header(is, path.string());
}

/// Reads entry.feature_path, requiring the header to declare
/// entry.frame_count frames of `dim` columns.
inline FeatureMatrix read_features(const ManifestEntry &entry, std::size_t dim) {
  std::ifstream is(entry.feature_path, std::ios::binary);
  if (!is) throw MissingFeatureFile(entry.id, entry.feature_path);
  const FeatureHeader h = read_feature_header(is, entry.feature_path);
  if (h.feature_dim != dim)
    throw HeaderMismatch("'" + entry.id + "' header declares dim " + std::to_string(h.feature_dim) +
                         ", expected " + std::to_string(dim));
  if (h.frame_count != entry.frame_count)
    throw HeaderMismatch("'" + entry.id + "' header declares " + std::to_string(h.frame_count) +
                         " frames, manifest says " + std::to_string(entry.frame_count));
  const std::size_t n = std::size_t(h.frame_count) * h.feature_dim;
  std::vector<unsigned char> raw(n * 4);
  is.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(is.gcount()) != raw.size())
    throw TruncatedFile("'" + entry.id + "' payload truncated: " + entry.feature_path);
  std::vector<float> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = detail::get_u32(raw.data() + 4 * i);
    std::memcpy(&values[i], &bits, 4);
  }
  return FeatureMatrix(h.frame_count, h.feature_dim, std::move(values));
}

// ---------------------------------------------------------------------------
// Manifests

namespace detail {

inline ManifestEntry parse_manifest_line(std::string_view line, std::size_t line_no,
                                         const std::filesystem::path &base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception &e) {
    throw MalformedRecord(line_no, e.what());
  }
  if (!j.is_object()) throw MalformedRecord(line_no, "record is not an object");
  ManifestEntry e;
  try {
    e.id = j.at("id").get<std::string>();
    const auto fp = std::filesystem::path(j.at("feature_path").get<std::string>());
    e.feature_path = (fp.is_absolute() ? fp : base_dir / fp).string();
    const auto &fc = j.at("frame_count");
    if (!fc.is_number_integer() || fc.get<long long>() <= 0)
      throw MalformedRecord(line_no, "frame_count must be a positive integer");
    e.frame_count = fc.get<std::size_t>();
    e.duration_s = j.at("duration_s").get<double>();
    const auto &t = j.at("transcript");
    if (t.is_string()) {
      e.transcript = split_tokens(t.get<std::string>());
    } else if (t.is_array()) {
      e.transcript = t.get<TokenSeq>();
    } else {
      throw MalformedRecord(line_no, "transcript must be a string");
    }
  } catch (const nlohmann::json::exception &ex) {
    throw MalformedRecord(line_no, ex.what());
  }
  if (e.id.empty()) throw MalformedRecord(line_no, "empty id");
  if (!(e.duration_s > 0)) throw MalformedRecord(line_no, "duration_s must be positive");
  if (e.transcript.empty()) throw MalformedRecord(line_no, "empty transcript");
  if (!duration_consistent(e.duration_s, e.frame_count))
    throw MalformedRecord(line_no, "duration_s disagrees with frame_count at 10 ms hop");
  return e;
}

}  // namespace detail

/// Parses the manifest records without touching feature files.
inline std::vector<ManifestEntry> read_manifest_entries(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open manifest: " + path.string());
  const auto base_dir = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    entries.push_back(detail::parse_manifest_line(line, line_no, base_dir));
  }
  if (entries.empty()) throw EmptyManifest(path.string());
  return entries;
}

/// Loads every record and its features eagerly. The first record's feature
/// file fixes the corpus feature_dim.
inline Corpus load_manifest(const std::filesystem::path &path) {
  const auto entries = read_manifest_entries(path);
  std::vector<Utterance> utts;
  utts.reserve(entries.size());
  std::size_t dim = 0;
  std::unordered_set<std::string> ids;
  for (const auto &e : entries) {
    if (!ids.insert(e.id).second) throw DataError("duplicate utterance id '" + e.id + "'");
    if (!std::filesystem::exists(e.feature_path)) throw MissingFeatureFile(e.id, e.feature_path);
    const FeatureHeader h = read_feature_header(e.feature_path);
    if (dim == 0) dim = h.feature_dim;
    if (h.feature_dim != dim) throw DimMismatch(e.id, dim, h.feature_dim);
    utts.push_back({e.id, read_features(e, dim), e.transcript, e.duration_s});
  }
  return Corpus(std::move(utts));
}

inline nlohmann::ordered_json manifest_record(const std::string &id, const std::string &feature_path,
                                              std::size_t frame_count, double duration_s,
                                              const TokenSeq &transcript) {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["feature_path"] = feature_path;
  j["frame_count"] = frame_count;
  j["duration_s"] = duration_s;
  j["transcript"] = join_tokens(transcript);
  return j;
}

/// Writes `corpus` as <dir>/manifest.jsonl plus <dir>/feats/<id>.rucf, with
/// relative feature paths. Returns the manifest path.
inline std::filesystem::path write_corpus(const Corpus &corpus, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir / "feats");
  std::string manifest;
  for (const auto &u : corpus) {
    const std::string rel = "feats/" + u.id + ".rucf";
    write_features(dir / rel, u.features);
    manifest += manifest_record(u.id, rel, u.frame_count(), u.duration_s, u.transcript).dump();
    manifest.push_back('\n');
  }
  const auto path = dir / "manifest.jsonl";
  detail::write_file(path, manifest);
  return path;
}

}  // namespace ruc
