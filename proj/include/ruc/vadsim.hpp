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

// VAD front-end simulation: speech/non-speech span lists in, test segments
// out. Speech spans separated by at most merge_gap_s are merged into one
// region; a region longer than max_segment_s is cut into ceil(d / max)
// equal pieces. calibrate_max_segment() searches the max_segment_s knob that
// produces a requested mean segment duration.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ruc/errors.hpp"
#include "ruc/text.hpp"

namespace ruc {

inline constexpr double kDefaultMergeGapS = 0.3;
inline constexpr double kCalibrationToleranceS = 0.1;
inline constexpr int kCalibrationMaxIterations = 50;

struct SpeechSpan {
  double start_s = 0.0;
  double end_s = 0.0;
  bool is_speech = true;
};

struct Segment {
  std::string recording_id;
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<std::size_t> source_span_indices;

  double duration() const { return end_s - start_s; }
};

struct Recording {
  std::string id;
  std::vector<SpeechSpan> spans;
};

inline void validate_spans(const std::vector<SpeechSpan> &spans) {
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (!(spans[i].end_s > spans[i].start_s))
      throw InvalidSpans("span " + std::to_string(i) + " has end <= start");
    if (i > 0 && spans[i].start_s < spans[i - 1].end_s)
      throw InvalidSpans("span " + std::to_string(i) + " overlaps or precedes span " + std::to_string(i - 1));
  }
}

namespace detail {

struct SpeechRegion {
  double start_s, end_s;
  std::vector<std::size_t> spans;
};

inline std::vector<SpeechRegion> merge_speech(const std::vector<SpeechSpan> &spans, double merge_gap_s) {
  std::vector<SpeechRegion> regions;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto &s = spans[i];
    if (!s.is_speech) continue;
    if (!regions.empty() && s.start_s - regions.back().end_s <= merge_gap_s) {
      regions.back().end_s = s.end_s;
      regions.back().spans.push_back(i);
    } else {
      regions.push_back({s.start_s, s.end_s, {i}});
    }
  }
  return regions;
}

inline std::size_t piece_count(double duration, double max_segment_s) {
  if (duration <= max_segment_s) return 1;
  return static_cast<std::size_t>(std::ceil(duration / max_segment_s));
}

}  // namespace detail

inline std::vector<Segment> segment_recording(const std::vector<SpeechSpan> &spans, double max_segment_s,
                                              double merge_gap_s = kDefaultMergeGapS,
                                              const std::string &recording_id = "") {
  if (!(max_segment_s > 0)) throw ConfigError("max_segment_s must be > 0");
  if (!(merge_gap_s >= 0)) throw ConfigError("merge_gap_s must be >= 0");
  validate_spans(spans);
  std::vector<Segment> out;
  for (const auto &region : detail::merge_speech(spans, merge_gap_s)) {
    const double d = region.end_s - region.start_s;
    const std::size_t k = detail::piece_count(d, max_segment_s);
    for (std::size_t p = 0; p < k; ++p) {
      Segment seg;
      seg.recording_id = recording_id;
      seg.start_s = p == 0 ? region.start_s : region.start_s + d * double(p) / double(k);
      seg.end_s = p + 1 == k ? region.end_s : region.start_s + d * double(p + 1) / double(k);
      for (std::size_t idx : region.spans) {
        if (spans[idx].end_s > seg.start_s && spans[idx].start_s < seg.end_s)
          seg.source_span_indices.push_back(idx);
      }
      out.push_back(std::move(seg));
    }
  }
  return out;
}

/// Corpus-wide mean segment duration for a given knob value.
inline double mean_segment_duration(const std::vector<std::vector<SpeechSpan>> &recordings, double max_segment_s,
                                    double merge_gap_s = kDefaultMergeGapS) {
  double total = 0.0;
  std::size_t count = 0;
  for (const auto &spans : recordings) {
    for (const auto &seg : segment_recording(spans, max_segment_s, merge_gap_s)) {
      total += seg.duration();
      ++count;
    }
  }
  if (count == 0) throw InvalidSpans("no speech in any recording");
  return total / double(count);
}

/// Bisection over max_segment_s. The mean is a non-decreasing step function
/// of the knob, bounded above by the mean merged-region length.
inline double calibrate_max_segment(const std::vector<std::vector<SpeechSpan>> &recordings, double target_mean_s,
                                    double merge_gap_s = kDefaultMergeGapS) {
  double longest = 0.0, total = 0.0;
  std::size_t regions = 0;
  for (const auto &spans : recordings) {
    validate_spans(spans);
    for (const auto &r : detail::merge_speech(spans, merge_gap_s)) {
      longest = std::max(longest, r.end_s - r.start_s);
      total += r.end_s - r.start_s;
      ++regions;
    }
  }
  if (regions == 0) throw InvalidSpans("no speech in any recording");
  const double natural = total / double(regions);
  if (!(target_mean_s > 0) || target_mean_s > natural + kCalibrationToleranceS)
    throw Unachievable(target_mean_s, 0.0, natural);
  auto mean_at = [&](double m) { return mean_segment_duration(recordings, m, merge_gap_s); };
  double lo = 0.0, hi = longest;
  if (std::fabs(mean_at(hi) - target_mean_s) <= kCalibrationToleranceS) return hi;
  for (int it = 0; it < kCalibrationMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = mean_at(mid);
    if (std::fabs(m - target_mean_s) <= kCalibrationToleranceS) return mid;
    (m < target_mean_s ? lo : hi) = mid;
  }
  // The step function jumps over the tolerance window around the target.
  throw Unachievable(target_mean_s, 0.0, natural);
}

// ---------------------------------------------------------------------------
// Span files: "recording_id start_s end_s is_speech" per line, is_speech in
// {0, 1, true, false, speech, nonspeech}. Recordings keep first-seen order.

inline std::vector<Recording> read_span_file(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open span file: " + path);
  std::vector<Recording> recs;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_tokens(t);
    if (fields.size() != 4) throw MalformedRecord(line_no, "expected 4 fields");
    const auto start = parse_double(fields[1]);
    const auto end = parse_double(fields[2]);
    if (!start || !end) throw MalformedRecord(line_no, "bad time value");
    const std::string &flag = fields[3];
    bool speech;
    if (flag == "1" || flag == "true" || flag == "speech") {
      speech = true;
    } else if (flag == "0" || flag == "false" || flag == "nonspeech") {
      speech = false;
    } else {
      throw MalformedRecord(line_no, "bad is_speech flag '" + flag + "'");
    }
    auto [it, inserted] = index.emplace(fields[0], recs.size());
    if (inserted) recs.push_back({fields[0], {}});
    recs[it->second].spans.push_back({*start, *end, speech});
  }
  return recs;
}

}  // namespace ruc
