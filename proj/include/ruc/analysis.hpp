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

// Length statistics, train/test duration ratios and WER by reference length.
//
// Concatenating n ~ uniform{1..N} i.i.d. utterances of mean duration mu gives
// an expected item duration of mu * (N + 1) / 2 (caps ignored). Dividing by
// the test-set mean gives the duration ratio R used as the x-axis of WERR
// curves.

#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ruc/corpus.hpp"
#include "ruc/errors.hpp"
#include "ruc/eval.hpp"
#include "ruc/text.hpp"

namespace ruc {

struct LengthStats {
  std::size_t count = 0;
  double mean_duration_s = 0.0;
  double sd_duration_s = 0.0;
  double mean_tokens = 0.0;
  double sd_tokens = 0.0;
};

namespace detail {

inline std::pair<double, double> mean_sd(std::span<const double> xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / double(xs.size() - 1))};
}

}  // namespace detail

/// Means and sample SDs; a single value has SD 0.
inline LengthStats length_stats(std::span<const double> durations_s, std::span<const double> token_counts) {
  if (durations_s.empty() || durations_s.size() != token_counts.size())
    throw DataError("length_stats needs matching, non-empty duration and token lists");
  LengthStats s;
  s.count = durations_s.size();
  std::tie(s.mean_duration_s, s.sd_duration_s) = detail::mean_sd(durations_s);
  std::tie(s.mean_tokens, s.sd_tokens) = detail::mean_sd(token_counts);
  return s;
}

inline LengthStats length_stats(const Corpus &corpus) {
  std::vector<double> d, t;
  d.reserve(corpus.size());
  t.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    d.push_back(corpus[i].duration_s);
    t.push_back(double(corpus.token_count(i)));
  }
  return length_stats(d, t);
}

inline double expected_concat_duration(double mean_s, std::size_t n) { return mean_s * double(n + 1) / 2.0; }

inline double expected_concat_ratio(double train_mean_s, double test_mean_s, std::size_t n) {
  if (!(train_mean_s > 0) || !(test_mean_s > 0)) throw ConfigError("means must be positive");
  if (n < 1) throw ConfigError("n must be >= 1");
  return expected_concat_duration(train_mean_s, n) / test_mean_s;
}

struct RatioPoint {
  std::size_t n = 1;
  double ratio = 0.0;
  double werr = 0.0;
};

inline std::vector<RatioPoint> ratio_curve(double train_mean_s, double test_mean_s,
                                           std::vector<std::pair<std::size_t, double>> werr_by_n) {
  std::sort(werr_by_n.begin(), werr_by_n.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
  for (std::size_t i = 1; i < werr_by_n.size(); ++i)
    if (werr_by_n[i].first == werr_by_n[i - 1].first) throw ConfigError("duplicate n in ratio curve");
  std::vector<RatioPoint> out;
  out.reserve(werr_by_n.size());
  for (const auto &[n, w] : werr_by_n) out.push_back({n, expected_concat_ratio(train_mean_s, test_mean_s, n), w});
  return out;
}

struct LengthBucket {
  std::size_t lower = 1;  // inclusive reference length
  std::size_t upper = 1;  // inclusive
  std::size_t pairs = 0;
  std::size_t errors = 0;
  std::size_t ref_tokens = 0;
  double wer_percent = 0.0;

  double center() const { return 0.5 * double(lower + upper); }
};

struct LengthBucketCurve {
  std::size_t bucket_width = 10;
  std::vector<LengthBucket> buckets;  // non-empty buckets, ascending
};

/// Groups pairs by reference length into [1..w], [w+1..2w], ... and pools
/// WER within each bucket.
inline LengthBucketCurve wer_by_length_bucket(std::span<const RefHypPair> pairs, std::size_t bucket_width,
                                              unsigned threads = 1) {
  if (bucket_width < 1) throw ConfigError("bucket width must be >= 1");
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (pairs[k].first.empty()) throw EmptyReference(k);
  std::vector<EditCounts> per(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t k) { per[k] = align(pairs[k].first, pairs[k].second); });
  std::map<std::size_t, LengthBucket> by_index;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const std::size_t len = pairs[k].first.size();
    const std::size_t b = (len - 1) / bucket_width;
    auto &bucket = by_index[b];
    bucket.lower = b * bucket_width + 1;
    bucket.upper = (b + 1) * bucket_width;
    bucket.pairs += 1;
    bucket.errors += per[k].errors();
    bucket.ref_tokens += len;
  }
  LengthBucketCurve curve;
  curve.bucket_width = bucket_width;
  for (auto &[b, bucket] : by_index) {
    bucket.wer_percent = 100.0 * double(bucket.errors) / double(bucket.ref_tokens);
    curve.buckets.push_back(bucket);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Figure data

struct RatioSeries {
  std::string label;
  std::vector<RatioPoint> points;
};

inline std::string fixed2(double v) {
  std::string s = fmt::format("{:.2f}", v);
  if (s == "-0.00") s = "0.00";
  return s;
}

inline std::string emit_ratio_tsv(const std::vector<RatioSeries> &series) {
  std::size_t total = 0;
  for (const auto &s : series) total += s.points.size();
  if (total == 0) throw DataError("no ratio points to emit");
  std::string out = "# series\tn\tratio\twerr_percent\n";
  for (const auto &s : series)
    for (const auto &p : s.points)
      out += fmt::format("{}\t{}\t{}\t{}\n", s.label, p.n, fixed2(p.ratio), fixed2(p.werr));
  return out;
}

inline std::string emit_length_bucket_tsv(const LengthBucketCurve &curve) {
  if (curve.buckets.empty()) throw DataError("no length buckets to emit");
  std::string out = "# lower_tokens\tupper_tokens\tcenter\twer_percent\tpairs\n";
  for (const auto &b : curve.buckets)
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", b.lower, b.upper, fixed2(b.center()), fixed2(b.wer_percent), b.pairs);
  return out;
}

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Minimal line chart; only the coordinates matter.
inline std::string emit_svg(const std::vector<SvgSeries> &series, const std::string &x_label,
                            const std::string &y_label) {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool first = true;
  for (const auto &s : series)
    for (const auto &[x, y] : s.points) {
      if (first) {
        x0 = x1 = x;
        y0 = y1 = y;
        first = false;
      }
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  if (first) throw DataError("no points to plot");
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  constexpr double W = 640, H = 400, M = 50;
  auto px = [&](double x) { return M + (x - x0) / (x1 - x0) * (W - 2 * M); };
  auto py = [&](double y) { return H - M - (y - y0) / (y1 - y0) * (H - 2 * M); };
  static constexpr const char *kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n",
      W, H);
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", M, H - M, W - M, H - M);
  out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n", M, M, M, H - M);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", W / 2, H - 10, x_label);
  out += fmt::format("<text x=\"12\" y=\"{}\" transform=\"rotate(-90 12 {})\" text-anchor=\"middle\">{}</text>\n",
                     H / 2, H / 2, y_label);
  out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", M,
                     H - M + 14, fixed2(x0), W - M, H - M + 14, fixed2(x1));
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text><text x=\"{}\" y=\"{}\" "
                     "text-anchor=\"end\">{}</text>\n",
                     M - 4, H - M, fixed2(y0), M - 4, M + 4, fixed2(y1));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char *color = kColors[i % std::size(kColors)];
    std::string pts;
    for (const auto &[x, y] : series[i].points) pts += fmt::format("{},{} ", fixed2(px(x)), fixed2(py(y)));
    if (!pts.empty()) pts.pop_back();
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" points=\"{}\"><title>{}</title></polyline>\n", color,
                       pts, series[i].label);
    out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", W - M + 4, M + 12 * double(i), color,
                       series[i].label);
  }
  out += "</svg>\n";
  return out;
}

// ---------------------------------------------------------------------------
// Ratio input table: per-language train/test mean durations, baseline WER and
// WERR per concatenation setting. Header line:
//   # lang train_mean_s test_mean_s baseline_wer werr@1 werr@4 ...

struct LanguageRatioRow {
  std::string lang;
  double train_mean_s = 0.0;
  double test_mean_s = 0.0;
  double baseline_wer = 0.0;
  std::vector<std::pair<std::size_t, double>> werr_by_n;
};

inline std::vector<LanguageRatioRow> read_ratio_inputs(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open ratio input table: " + path);
  std::vector<std::size_t> ns;
  std::vector<LanguageRatioRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      for (const auto &f : split_tokens(t.substr(1))) {
        if (f.rfind("werr@", 0) != 0) continue;
        const auto n = parse_int(std::string_view(f).substr(5));
        if (!n || *n < 1) throw MalformedRecord(line_no, "bad column '" + f + "'");
        ns.push_back(static_cast<std::size_t>(*n));
      }
      continue;
    }
    if (ns.empty()) throw MalformedRecord(line_no, "data row before header");
    const auto f = split_tokens(t);
    if (f.size() != 4 + ns.size()) throw MalformedRecord(line_no, "wrong field count");
    LanguageRatioRow row;
    row.lang = f[0];
    std::vector<double> v;
    for (std::size_t k = 1; k < f.size(); ++k) {
      const auto x = parse_double(f[k]);
      if (!x) throw MalformedRecord(line_no, "bad number '" + f[k] + "'");
      v.push_back(*x);
    }
    row.train_mean_s = v[0];
    row.test_mean_s = v[1];
    row.baseline_wer = v[2];
    for (std::size_t k = 0; k < ns.size(); ++k) row.werr_by_n.emplace_back(ns[k], v[3 + k]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("ratio input table has no rows: " + path);
  return rows;
}

}  // namespace ruc
