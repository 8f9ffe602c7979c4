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

// Acceptance gate: one PASS/FAIL line per criterion, with the tolerance and
// time budget of each check pinned below. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "oracles/reference_ruc.hpp"
#include "ruc/ruc.hpp"
#include "test_util.hpp"

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> notes;
};

using Check = std::function<Outcome()>;

std::vector<std::vector<std::string>> read_rows(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (ruc::trim(line).empty() || line[0] == '#') continue;
    rows.push_back(ruc::split_tokens(line));
  }
  return rows;
}

// 1. Plotted ratio/WERR coordinates.
Outcome figure_coordinates() {
  constexpr double kTolX = 0.01;
  const auto langs = ruc::read_ratio_inputs(RUC_DATA_DIR "/duration_ratio_inputs.tsv");
  std::map<std::pair<std::string, std::size_t>, ruc::RatioPoint> curve;
  for (const auto &row : langs)
    for (const auto &p : ruc::ratio_curve(row.train_mean_s, row.test_mean_s, row.werr_by_n))
      curve[{row.lang, p.n}] = p;
  Outcome o;
  std::size_t checked = 0, x_ok = 0, y_ok = 0;
  for (const auto &f : read_rows(RUC_TEST_DATA_DIR "/ratio_plot_points.tsv")) {
    const auto it = curve.find({f[0], std::stoul(f[1])});
    if (it == curve.end()) {
      o.pass = false;
      o.notes.push_back("no curve point for " + f[0] + " n=" + f[1]);
      continue;
    }
    ++checked;
    const double px = std::stod(f[2]), py = std::stod(f[3]);
    const auto &lang = *std::find_if(langs.begin(), langs.end(), [&](const auto &r) { return r.lang == f[0]; });
    double table = 0;
    for (const auto &[n, w] : lang.werr_by_n)
      if (n == it->second.n) table = w;
    if (std::fabs(it->second.ratio - px) <= kTolX) ++x_ok;
    if (it->second.werr == table) ++y_ok;
    if (py != table)
      o.notes.push_back(fmt::format("plotted y {} for {} n={} differs from table value {}", f[3], f[0], f[1],
                                    ruc::fixed2(table)));
  }
  o.pass = o.pass && checked == 60 && x_ok == 60 && y_ok == 60;
  o.detail = fmt::format("{}/60 points, x within {} on {}, y exact on {}", checked, kTolX, x_ok, y_ok);
  return o;
}

// 2. Spread of WER across segmentation settings.
Outcome robustness_sd() {
  constexpr double kTol = 0.01;
  Outcome o;
  std::size_t ok = 0, n = 0;
  for (const auto &f : read_rows(RUC_TEST_DATA_DIR "/vad_robustness.tsv")) {
    std::vector<std::pair<std::string, double>> wers;
    for (std::size_t k = 2; k < 6; ++k) wers.emplace_back(f[k], std::stod(f[k]));
    const double sd = ruc::vad_robustness(wers).sd;
    ++n;
    if (std::fabs(sd - std::stod(f[6])) <= kTol) {
      ++ok;
    } else {
      o.notes.push_back(fmt::format("{} {}: sd {:.4f} vs printed {}", f[0], f[1], sd, f[6]));
    }
  }
  o.pass = n == 8 && ok == n;
  o.detail = fmt::format("{}/{} printed SD cells within {}", ok, n, kTol);
  return o;
}

// 3. WERR round trip.
Outcome werr_round_trip() {
  constexpr double kTol = 0.01;
  std::size_t ok = 0, n = 0;
  for (const auto &row : ruc::read_ratio_inputs(RUC_DATA_DIR "/duration_ratio_inputs.tsv"))
    for (const auto &[cfg, w] : row.werr_by_n) {
      const double system = row.baseline_wer * (1.0 - w / 100.0);
      ++n;
      if (std::fabs(ruc::werr(row.baseline_wer, system) - w) <= kTol) ++ok;
    }
  return {n == 60 && ok == n, fmt::format("{}/{} cells within {}", ok, n, kTol), {}};
}

// 4. Batches against the reference implementation.
Outcome sampler_fidelity() {
  ruc::SyntheticCorpusOptions opt;
  opt.count = 50;
  opt.seed = 42;
  const auto corpus = ruc::make_synthetic_corpus(opt);
  ruc::RucConfig cfg;
  cfg.seed = 42;
  cfg.max_concat = 4;
  cfg.batch_size = 8;
  cfg.max_tokens = 300;
  cfg.max_duration_s = 25.0;
  const oracle::RefConfig ref{42, 8, 4, cfg.effective_buffer_size(), 300, 25.0};
  std::size_t same = 0, bytes = 0, multi = 0;
  for (std::size_t step = 1; step <= 100; ++step) {
    const auto b = ruc::build_batch(corpus, cfg, step);
    const auto ours = ruc::encode_batch(b);
    bytes += ours.size();
    if (ours == oracle::reference_batch_bytes(corpus, ref, step)) ++same;
    for (const auto &it : b.items) multi += it.source_ids.size() > 1;
  }
  return {same == 100 && multi > 0,
          fmt::format("{}/100 steps byte-identical ({} bytes, {} multi-source items)", same, bytes, multi),
          {}};
}

// 5. Caps hold for every generated item.
Outcome cap_fuzz() {
  constexpr std::size_t kItems = 1000000;
  ruc::RandomStream gen(5, ruc::StreamPurpose::kTest);
  std::size_t items = 0, violations = 0, corpora = 0, multi = 0;
  while (items < kItems) {
    ruc::SyntheticCorpusOptions opt;
    opt.count = 20 + gen.uniform_below(480);
    opt.seed = gen.next_u64();
    opt.feature_dim = 1;
    opt.min_frames = 1 + gen.uniform_below(200);
    opt.max_frames = opt.min_frames + gen.uniform_below(2500 - opt.min_frames + 1);
    opt.tokens_per_second = 1.0 + 20.0 * gen.uniform01();
    const auto corpus = ruc::make_synthetic_corpus(opt);
    ++corpora;
    ruc::RucConfig cfg;
    cfg.seed = gen.next_u64();
    cfg.max_concat = 1 + gen.uniform_below(16);
    cfg.batch_size = 100;
    cfg.buffer_size = 1 + gen.uniform_below(2 * opt.count);
    for (std::size_t step = 1; step <= 100 && items < kItems; ++step) {
      for (const auto &sources : ruc::plan_batch(corpus, cfg, step).items) {
        std::size_t tokens = 0;
        double seconds = 0;
        for (auto i : sources) {
          tokens += corpus[i].transcript.size();
          seconds += corpus[i].duration_s;
        }
        violations += tokens > 300 || seconds > 25.0;
        multi += sources.size() > 1;
        ++items;
      }
    }
  }
  return {violations == 0,
          fmt::format("{} items over {} corpora ({} multi-source), {} violations", items, corpora, multi, violations),
          {}};
}

// 6. Mean concatenated duration without caps.
Outcome expected_length() {
  constexpr double kRelTol = 0.02;
  constexpr double kTarget = 3.0 * (4 + 1) / 2.0;
  ruc::SyntheticCorpusOptions opt;
  opt.count = 20000;
  opt.seed = 6;
  opt.feature_dim = 1;
  opt.min_frames = 100;
  opt.max_frames = 500;
  const auto corpus = ruc::make_synthetic_corpus(opt);
  ruc::RucConfig cfg;
  cfg.uncapped();
  cfg.seed = 6;
  cfg.max_concat = 4;
  cfg.batch_size = 100;
  double total = 0;
  std::size_t items = 0;
  for (std::size_t step = 1; items < 100000; ++step)
    for (const auto &sources : ruc::plan_batch(corpus, cfg, step).items) {
      for (auto i : sources) total += corpus[i].duration_s;
      ++items;
    }
  const double mean = total / double(items);
  return {std::fabs(mean - kTarget) <= kRelTol * kTarget,
          fmt::format("mean {:.4f} s over {} items, target {} +/- {}%", mean, items, kTarget, kRelTol * 100),
          {}};
}

// 7. Length normalization properties.
Outcome normalization_properties() {
  ruc::RandomStream rng(7, ruc::StreamPurpose::kTest);
  std::size_t identity = 0, monotone = 0;
  for (int i = 0; i < 10000; ++i) {
    const double s = -1000.0 * rng.uniform01() * rng.uniform01();
    const double got = ruc::length_normalized_score(s, 1 + rng.uniform_below(1000), 0.0);
    identity += std::memcmp(&got, &s, sizeof s) == 0;
  }
  for (int i = 0; i < 1000; ++i) {
    const double s = -(1e-3 + 100.0 * rng.uniform01());
    const double alpha = 1e-3 + 2.0 * rng.uniform01();
    const std::size_t len = 1 + rng.uniform_below(500);
    monotone += ruc::length_normalized_score(s, len + 1, alpha) > ruc::length_normalized_score(s, len, alpha);
  }
  const bool at0 = ruc::length_normalized_score(-10, 5, 0.0) > ruc::length_normalized_score(-11, 30, 0.0);
  const bool at08 = ruc::length_normalized_score(-10, 5, 0.8) < ruc::length_normalized_score(-11, 30, 0.8);
  return {identity == 10000 && monotone == 1000 && at0 && at08,
          fmt::format("identity {}/10000, monotone {}/1000, flip {}", identity, monotone, at0 && at08 ? "yes" : "no"),
          {}};
}

// 8. Alignment against an exhaustive table.
std::size_t dp_distance(const ruc::TokenSeq &a, const ruc::TokenSeq &b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i)
    for (std::size_t j = 0; j <= b.size(); ++j) {
      if (i == 0 || j == 0) {
        t[i][j] = i + j;
        continue;
      }
      t[i][j] = std::min({t[i - 1][j - 1] + (a[i - 1] != b[j - 1]), t[i - 1][j] + 1, t[i][j - 1] + 1});
    }
  return t[a.size()][b.size()];
}

Outcome wer_oracle() {
  ruc::RandomStream rng(8, ruc::StreamPurpose::kTest);
  std::vector<ruc::RefHypPair> pairs;
  std::size_t agree = 0, oracle_errors = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t vocab = 1 + rng.uniform_below(5);
    ruc::TokenSeq ref(1 + rng.uniform_below(10)), hyp(rng.uniform_below(11));
    for (auto &w : ref) w = std::string(1, char('a' + rng.uniform_below(vocab)));
    for (auto &w : hyp) w = std::string(1, char('a' + rng.uniform_below(vocab)));
    const std::size_t d = dp_distance(ref, hyp);
    agree += ruc::align(ref, hyp).errors() == d;
    oracle_errors += d;
    pairs.emplace_back(std::move(ref), std::move(hyp));
  }
  const auto total = ruc::corpus_wer(pairs);
  const auto curve = ruc::wer_by_length_bucket(pairs, 3);
  std::size_t errors = 0, tokens = 0;
  for (const auto &b : curve.buckets) errors += b.errors, tokens += b.ref_tokens;
  const bool recombine = errors == total.errors() && errors == oracle_errors && tokens == total.ref_tokens &&
                         100.0 * double(errors) / double(tokens) == total.wer_percent;
  return {agree == 10000 && recombine,
          fmt::format("{}/10000 distances equal, buckets recombine {}", agree, recombine ? "exactly" : "NOT exactly"),
          {}};
}

// 9. Randomized subcommands are reproducible and thread-count independent.
struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ruc");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ruc::cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str() + err.str()};
}

std::string dir_bytes(const std::filesystem::path &dir) {
  std::vector<std::filesystem::path> files;
  for (const auto &e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto &f : files) all += std::filesystem::relative(f, dir).string() + "\n" + testutil::read_bytes(f);
  return all;
}

Outcome determinism() {
  testutil::TempDir tmp;
  Outcome o;
  auto synth = [&](const std::string &tag, const std::string &threads) {
    const auto dir = tmp / ("synth_" + tag);
    const auto r = cli({"--seed", "9", "--threads", threads, "synth", "--out-dir", dir.string(), "--count", "60"});
    if (r.code != 0) o.notes.push_back("synth failed: " + r.out);
    return dir_bytes(dir);
  };
  const auto s1 = synth("a", "1"), s2 = synth("b", "1"), s8 = synth("c", "8");
  const auto manifest = (tmp / "synth_a" / "manifest.jsonl").string();
  auto augment = [&](const std::string &tag, const std::string &threads) {
    const auto dir = tmp / ("aug_" + tag);
    const auto r = cli({"--seed", "42", "--threads", threads, "augment", "--manifest", manifest, "--out-manifest",
                        (tmp / ("aug_" + tag + ".jsonl")).string(), "--out-batches", dir.string(), "--stage1-steps",
                        "20", "--stage2-steps", "80", "--max-concat", "6"});
    if (r.code != 0) o.notes.push_back("augment failed: " + r.out);
    return r.out + testutil::read_bytes(tmp / ("aug_" + tag + ".jsonl")) + dir_bytes(dir);
  };
  const auto a1 = augment("a", "1"), a2 = augment("b", "1"), a8 = augment("c", "8");
  const bool synth_ok = !s1.empty() && s1 == s2 && s1 == s8;
  const bool aug_ok = a1.size() > 1000 && a1 == a2 && a1 == a8;
  o.pass = synth_ok && aug_ok && o.notes.empty();
  o.detail = fmt::format("synth {}, augment {} ({} bytes compared)", synth_ok ? "identical" : "DIFFERS",
                         aug_ok ? "identical" : "DIFFERS", s1.size() + a1.size());
  return o;
}

// 10. VAD calibration on long speech spans.
Outcome vad_calibration() {
  constexpr double kTolMean = 0.1, kTolConserve = 1e-3;
  ruc::RandomStream rng(10, ruc::StreamPurpose::kTest);
  std::vector<std::vector<ruc::SpeechSpan>> recs(20);
  for (auto &spans : recs) {
    double t = 0.0;
    const std::size_t count = 1 + rng.uniform_below(8);
    for (std::size_t i = 0; i < count; ++i) {
      const double gap = 0.5 + 3.0 * rng.uniform01();
      spans.push_back({t, t + gap, false});
      t += gap;
      spans.push_back({t, t + 30.0, true});
      t += 30.0;
    }
  }
  const double knob = ruc::calibrate_max_segment(recs, 15.0);
  const double mean = ruc::mean_segment_duration(recs, knob);
  double worst = 0;
  for (const auto &spans : recs) {
    double speech = 0, segs = 0;
    for (const auto &s : spans)
      if (s.is_speech) speech += s.end_s - s.start_s;
    for (const auto &seg : ruc::segment_recording(spans, knob)) segs += seg.duration();
    worst = std::max(worst, std::fabs(speech - segs));
  }
  return {std::fabs(mean - 15.0) <= kTolMean && worst <= kTolConserve,
          fmt::format("max_segment {:.3f} s, mean {:.4f} s (target 15 +/- {}), worst conservation error {:.2e} s", knob,
                      mean, kTolMean, worst),
          {}};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char *name;
    double budget_s;
    Check check;
  };
  const std::vector<Criterion> criteria = {
      {1, "figure-coordinates", 1.0, figure_coordinates},
      {2, "robustness-sd", 1.0, robustness_sd},
      {3, "werr-round-trip", 1.0, werr_round_trip},
      {4, "sampler-fidelity", 10.0, sampler_fidelity},
      {5, "cap-fuzz", 60.0, cap_fuzz},
      {6, "expected-length", 30.0, expected_length},
      {7, "normalization-properties", 5.0, normalization_properties},
      {8, "wer-oracle", 30.0, wer_oracle},
      {9, "determinism", 30.0, determinism},
      {10, "vad-calibration", 5.0, vad_calibration},
  };
  int failed = 0;
  for (const auto &c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what(), {}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << fmt::format("{} {:>2} {}: {} [{:.2f} s of {} s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail,
                             secs, c.budget_s);
    for (const auto &n : o.notes) std::cout << "     note: " << n << "\n";
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed;
}
