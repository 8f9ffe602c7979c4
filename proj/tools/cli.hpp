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

// The `ruc` command line. Exit codes: 0 success, 1 data error, 2 usage error.

#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ruc/ruc.hpp"

namespace ruc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

inline std::string version_string() { return fmt::format("ruc {} (rng {})", kVersion, kRngName); }

namespace detail {

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool quiet = false;
};

/// Writes to `path`, or to `out` when path is empty or "-".
inline void emit(const std::string &path, const std::string &text, std::ostream &out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

inline std::vector<RefHypPair> pair_up(const std::vector<Transcript> &refs,
                                       const std::unordered_map<std::string, TokenSeq> &hyps,
                                       std::vector<std::string> *ids, std::size_t &missing) {
  std::vector<RefHypPair> pairs;
  pairs.reserve(refs.size());
  missing = 0;
  for (const auto &r : refs) {
    auto it = hyps.find(r.id);
    if (it == hyps.end()) ++missing;
    pairs.emplace_back(r.tokens, it == hyps.end() ? TokenSeq{} : it->second);
    if (ids) ids->push_back(r.id);
  }
  return pairs;
}

inline std::vector<double> parse_grid(const std::string &text) {
  std::vector<double> grid;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    const auto v = parse_double(trim(item));
    if (!v || *v < 0) throw ConfigError("bad alpha grid value '" + item + "' in --grid");
    grid.push_back(*v);
  }
  if (grid.empty()) throw ConfigError("--grid is empty");
  return grid;
}

// -- stats -----------------------------------------------------------------

struct StatsArgs {
  std::string manifest;
  std::string augmented;
};

inline void run_stats(const StatsArgs &a, std::ostream &out) {
  if (a.manifest.empty() == a.augmented.empty()) throw ConfigError("stats needs exactly one of --manifest or --augmented");
  LengthStats st;
  double hours = 0;
  if (!a.manifest.empty()) {
    const Corpus corpus = load_manifest(a.manifest);
    st = length_stats(corpus);
    hours = corpus_summary(corpus).hours;
  } else {
    std::ifstream is(a.augmented);
    if (!is) throw IoFailure("cannot open " + a.augmented);
    std::vector<double> d, t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        d.push_back(j.at("duration_s").get<double>());
        t.push_back(double(split_tokens(j.at("transcript").get<std::string>()).size()));
      } catch (const nlohmann::json::exception &e) {
        throw MalformedRecord(line_no, e.what());
      }
    }
    if (d.empty()) throw EmptyManifest(a.augmented);
    st = length_stats(d, t);
    for (double x : d) hours += x;
    hours /= 3600.0;
  }
  out << fmt::format("utterances\t{}\n", st.count);
  out << fmt::format("hours\t{:.4f}\n", hours);
  out << fmt::format("duration_s\tmean {}\tsd {}\n", fixed2(st.mean_duration_s), fixed2(st.sd_duration_s));
  out << fmt::format("tokens\tmean {}\tsd {}\n", fixed2(st.mean_tokens), fixed2(st.sd_tokens));
}

// -- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  SyntheticCorpusOptions opt;
};

inline void run_synth(SynthArgs a, const Globals &g, std::ostream &out, std::ostream &err) {
  a.opt.seed = g.seed;
  err << "seed " << g.seed << " (" << kRngName << ")\n";
  const auto path = write_corpus(make_synthetic_corpus(a.opt), a.out_dir);
  if (!g.quiet) out << path.string() << "\n";
}

// -- augment ---------------------------------------------------------------

struct AugmentArgs {
  std::string manifest;
  std::string out_manifest;
  std::string out_batches;
  RucConfig cfg;
  std::optional<std::size_t> stage1_steps;
  std::optional<std::size_t> stage2_steps;
};

inline void run_augment(AugmentArgs a, const Globals &g, std::ostream &out, std::ostream &err) {
  if (a.out_manifest.empty() && a.out_batches.empty())
    throw ConfigError("augment needs --out-manifest and/or --out-batches");
  a.cfg.seed = g.seed;
  TrainingSchedule schedule{0, a.cfg.total_steps};
  if (a.stage1_steps || a.stage2_steps) {
    schedule.stage1_steps = a.stage1_steps.value_or(0);
    schedule.stage2_steps = a.stage2_steps.value_or(0);
  }
  a.cfg.validate();
  err << "seed " << g.seed << " (" << kRngName << ")\n";
  const Corpus corpus = load_manifest(a.manifest);

  std::optional<std::ofstream> manifest_os;
  if (!a.out_manifest.empty()) {
    manifest_os.emplace(a.out_manifest, std::ios::binary | std::ios::trunc);
    if (!*manifest_os) throw IoFailure("cannot open " + a.out_manifest);
  }
  if (!a.out_batches.empty()) std::filesystem::create_directories(a.out_batches);

  std::string buf;
  std::size_t items = 0;
  double seconds = 0;
  const auto report = run_schedule(
      corpus, a.cfg, schedule,
      [&](const Batch &b, Stage) {
        if (manifest_os) {
          buf.clear();
          append_manifest_lines(b, buf);
          manifest_os->write(buf.data(), static_cast<std::streamsize>(buf.size()));
          if (!*manifest_os) throw IoFailure("write failed: " + a.out_manifest);
        }
        if (!a.out_batches.empty()) {
          const auto name = fmt::format("batch_{:07d}.rucb", b.step_index);
          write_text_file(std::filesystem::path(a.out_batches) / name, encode_batch(b));
        }
        items += b.items.size();
        for (const auto &it : b.items) seconds += it.duration_s;
      },
      g.threads);
  if (!g.quiet)
    out << fmt::format("steps stage1={} stage2={} items={} mean_duration_s={}\n", report.stage1_steps,
                       report.stage2_steps, items, fixed2(items ? seconds / double(items) : 0.0));
}

// -- vad-segment -----------------------------------------------------------

struct VadArgs {
  std::string spans;
  std::string output;
  std::optional<double> max_segment;
  std::optional<double> target_mean;
  double merge_gap = kDefaultMergeGapS;
};

inline void run_vad(const VadArgs &a, const Globals &g, std::ostream &out, std::ostream &err) {
  if (a.max_segment.has_value() == a.target_mean.has_value())
    throw ConfigError("vad-segment needs exactly one of --max-segment or --target-mean");
  const auto recs = read_span_file(a.spans);
  double max_seg = 0;
  if (a.target_mean) {
    std::vector<std::vector<SpeechSpan>> all;
    for (const auto &r : recs) all.push_back(r.spans);
    max_seg = calibrate_max_segment(all, *a.target_mean, a.merge_gap);
  } else {
    max_seg = *a.max_segment;
  }
  std::string text;
  double total = 0;
  std::size_t count = 0;
  for (const auto &r : recs) {
    const auto segs = segment_recording(r.spans, max_seg, a.merge_gap, r.id);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      text += fmt::format("{}-{:04d} {} {:.3f} {:.3f}\n", r.id, i, r.id, segs[i].start_s, segs[i].end_s);
      total += segs[i].duration();
      ++count;
    }
  }
  emit(a.output, text, out);
  if (!g.quiet)
    err << fmt::format("max_segment_s {:.4f} segments {} mean_duration_s {}\n", max_seg, count,
                       fixed2(count ? total / double(count) : 0.0));
}

// -- score -----------------------------------------------------------------

struct ScoreArgs {
  std::string nbest;
  std::string ref;
  std::string output;
  double alpha = 0.0;
  bool sweep = false;
  std::string grid;
};

inline void run_score(const ScoreArgs &a, const Globals &g, std::ostream &out, std::ostream &err) {
  const auto lists = read_nbest_file(a.nbest);
  if (!a.sweep) {
    std::string text;
    for (const auto &l : lists) {
      const auto ranked = rescore_nbest(l.hypotheses, a.alpha);
      const auto &best = l.hypotheses[ranked.front().index];
      text += l.utterance_id;
      for (const auto &t : best.tokens) text += " " + t;
      text += "\n";
    }
    emit(a.output, text, out);
    return;
  }
  if (a.ref.empty()) throw ConfigError("--sweep requires --ref");
  const auto grid = a.grid.empty() ? default_alpha_grid() : parse_grid(a.grid);
  auto refs = transcript_map(read_transcripts(a.ref));
  std::vector<NbestSet> sets;
  for (const auto &l : lists) {
    auto it = refs.find(l.utterance_id);
    if (it == refs.end()) throw DataError("no reference for '" + l.utterance_id + "'");
    sets.push_back({it->second, l.hypotheses});
  }
  const auto result = sweep_alpha(sets, grid, g.threads);
  std::string text = "# alpha\twer_percent\n";
  for (const auto &[alpha, rep] : result.wer_by_alpha) text += fmt::format("{}\t{}\n", fixed2(alpha), fixed2(rep.wer_percent));
  text += fmt::format("# best_alpha\t{}\n", fixed2(result.best_alpha));
  emit(a.output, text, out);
  if (!g.quiet) err << fmt::format("best_alpha {}\n", fixed2(result.best_alpha));
}

// -- evaluate --------------------------------------------------------------

struct EvalArgs {
  std::string ref;
  std::string hyp;
  std::string per_utt;
  std::string output;
  std::vector<std::string> robustness;
};

inline void run_evaluate(const EvalArgs &a, const Globals &g, std::ostream &out, std::ostream &err) {
  if (a.ref.empty()) throw ConfigError("evaluate requires --ref");
  const auto refs = read_transcripts(a.ref);
  if (!a.robustness.empty()) {
    std::vector<std::pair<std::string, double>> wers;
    for (const auto &spec : a.robustness) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--robustness expects label=hyp[,ref], got '" + spec + "'");
      const std::string label = spec.substr(0, eq);
      std::string hyp_path = spec.substr(eq + 1), ref_path;
      if (const auto comma = hyp_path.find(','); comma != std::string::npos) {
        ref_path = hyp_path.substr(comma + 1);
        hyp_path.resize(comma);
      }
      const auto these_refs = ref_path.empty() ? refs : read_transcripts(ref_path);
      std::size_t missing = 0;
      const auto pairs = pair_up(these_refs, transcript_map(read_transcripts(hyp_path)), nullptr, missing);
      if (missing && !g.quiet) err << fmt::format("warning: {} references without hypothesis in {}\n", missing, hyp_path);
      wers.emplace_back(label, corpus_wer(pairs, g.threads).wer_percent);
    }
    const auto row = vad_robustness(wers);
    std::string text = "#";
    for (const auto &[label, w] : row.wers) text += " " + label + "\t";
    text += " sd\n";
    for (const auto &[label, w] : row.wers) text += fixed2(w) + "\t";
    text += fixed2(row.sd) + "\n";
    emit(a.output, text, out);
    return;
  }
  if (a.hyp.empty()) throw ConfigError("evaluate requires --hyp or --robustness");
  std::vector<std::string> ids;
  std::size_t missing = 0;
  const auto pairs = pair_up(refs, transcript_map(read_transcripts(a.hyp)), &ids, missing);
  if (missing && !g.quiet) err << fmt::format("warning: {} references without hypothesis\n", missing);
  const auto rep = corpus_wer(pairs, g.threads);
  emit(a.output,
       fmt::format("WER {} [ {} / {}, {} sub, {} del, {} ins ]\n", fixed2(rep.wer_percent), rep.errors(),
                   rep.ref_tokens, rep.substitutions, rep.deletions, rep.insertions),
       out);
  if (!a.per_utt.empty()) {
    std::string tsv = "# id\tref_tokens\tsub\tdel\tins\twer_percent\n";
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto c = align(pairs[k].first, pairs[k].second);
      const auto r = make_report(c, pairs[k].first.size());
      tsv += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", ids[k], r.ref_tokens, r.substitutions, r.deletions,
                         r.insertions, fixed2(r.wer_percent));
    }
    emit(a.per_utt, tsv, out);
  }
}

// -- figures ---------------------------------------------------------------

struct FigureArgs {
  std::string figure = "ratio";
  std::string data;
  std::string ref;
  std::string hyp;
  std::size_t bucket_width = 10;
  std::string format = "tsv";
  std::string output;
};

inline void run_figures(const FigureArgs &a, const Globals &g, std::ostream &out) {
  std::string text;
  if (a.figure == "ratio") {
    if (a.data.empty()) throw ConfigError("--figure ratio requires --data");
    std::vector<RatioSeries> series;
    for (const auto &row : read_ratio_inputs(a.data))
      series.push_back({row.lang, ratio_curve(row.train_mean_s, row.test_mean_s, row.werr_by_n)});
    if (a.format == "tsv") {
      text = emit_ratio_tsv(series);
    } else {
      std::vector<SvgSeries> svg;
      for (const auto &s : series) {
        SvgSeries ss{s.label, {}};
        for (const auto &p : s.points) ss.points.emplace_back(p.ratio, p.werr);
        svg.push_back(std::move(ss));
      }
      text = emit_svg(svg, "train-test duration ratio", "WERR (%)");
    }
  } else {
    if (a.ref.empty() || a.hyp.empty()) throw ConfigError("--figure length-bucket requires --ref and --hyp");
    std::size_t missing = 0;
    const auto pairs = pair_up(read_transcripts(a.ref), transcript_map(read_transcripts(a.hyp)), nullptr, missing);
    const auto curve = wer_by_length_bucket(pairs, a.bucket_width, g.threads);
    if (a.format == "tsv") {
      text = emit_length_bucket_tsv(curve);
    } else {
      SvgSeries s{"WER", {}};
      for (const auto &b : curve.buckets) s.points.emplace_back(b.center(), b.wer_percent);
      text = emit_svg({s}, "reference length (tokens)", "WER (%)");
    }
  }
  emit(a.output, text, out);
}

}  // namespace detail

inline int run(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
  CLI::App app{"Random utterance concatenation and ASR evaluation toolkit", "ruc"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);
  app.fallthrough();

  detail::Globals g;
  app.add_option("--seed", g.seed, "Random seed")->default_val(0);
  app.add_option("--threads", g.threads, "Worker threads")->default_val(1)->check(CLI::Range(1u, 1024u));
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  detail::StatsArgs stats;
  auto *stats_cmd = app.add_subcommand("stats", "Corpus length statistics");
  auto *stats_m = stats_cmd->add_option("--manifest", stats.manifest, "Corpus manifest")->check(CLI::ExistingFile);
  auto *stats_a = stats_cmd->add_option("--augmented", stats.augmented, "Augmented manifest")->check(CLI::ExistingFile);
  stats_m->excludes(stats_a);

  detail::SynthArgs synth;
  auto *synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--count", synth.opt.count)->capture_default_str();
  synth_cmd->add_option("--dim", synth.opt.feature_dim)->capture_default_str();
  synth_cmd->add_option("--min-frames", synth.opt.min_frames)->capture_default_str();
  synth_cmd->add_option("--max-frames", synth.opt.max_frames)->capture_default_str();
  synth_cmd->add_option("--tokens-per-second", synth.opt.tokens_per_second)->capture_default_str();

  detail::AugmentArgs aug;
  std::size_t stage1 = 0, stage2 = 0;
  auto *aug_cmd = app.add_subcommand("augment", "Build concatenated training batches");
  aug_cmd->add_option("--manifest", aug.manifest, "Corpus manifest")->required()->check(CLI::ExistingFile);
  aug_cmd->add_option("--out-manifest", aug.out_manifest, "Augmented manifest (JSON lines)");
  aug_cmd->add_option("--out-batches", aug.out_batches, "Directory for binary batch files");
  aug_cmd->add_option("--max-concat", aug.cfg.max_concat, "Maximum utterances per item (N)")->default_val(4);
  aug_cmd->add_option("--max-tokens", aug.cfg.max_tokens, "Token cap per item")->default_val(300);
  aug_cmd->add_option("--max-duration", aug.cfg.max_duration_s, "Duration cap per item (s)")->default_val(25.0);
  aug_cmd->add_option("--batch-size", aug.cfg.batch_size, "Items per batch (B)")->default_val(8);
  aug_cmd->add_option("--buffer-size", aug.cfg.buffer_size, "Per-step buffer size (default 10 x batch size)");
  aug_cmd->add_option("--steps", aug.cfg.total_steps, "Training steps (S)")->default_val(1);
  auto *s1 = aug_cmd->add_option("--stage1-steps", stage1, "Steps without concatenation");
  auto *s2 = aug_cmd->add_option("--stage2-steps", stage2, "Steps with concatenation");

  detail::VadArgs vad;
  auto *vad_cmd = app.add_subcommand("vad-segment", "Simulate VAD segmentation");
  vad_cmd->add_option("--spans", vad.spans, "Span file")->required()->check(CLI::ExistingFile);
  vad_cmd->add_option("--max-segment", vad.max_segment, "Maximum segment length (s)");
  vad_cmd->add_option("--target-mean", vad.target_mean, "Calibrate to this mean segment length (s)");
  vad_cmd->add_option("--merge-gap", vad.merge_gap, "Merge speech separated by at most this gap (s)")
      ->capture_default_str();
  vad_cmd->add_option("--output", vad.output, "Segments file (default stdout)");

  detail::ScoreArgs score;
  auto *score_cmd = app.add_subcommand("score", "Length-normalized n-best rescoring");
  score_cmd->add_option("--nbest", score.nbest, "N-best file")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("--alpha", score.alpha, "Length normalization exponent")->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  score_cmd->add_flag("--sweep", score.sweep, "Select alpha by minimum WER");
  score_cmd->add_option("--grid", score.grid, "Comma-separated alpha grid (default 0.0,...,0.8)");
  score_cmd->add_option("--ref", score.ref, "References for --sweep")->check(CLI::ExistingFile);
  score_cmd->add_option("--output", score.output, "Output file (default stdout)");

  detail::EvalArgs ev;
  auto *eval_cmd = app.add_subcommand("evaluate", "Word error rate");
  eval_cmd->add_option("--ref", ev.ref, "References (manifest or text)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--hyp", ev.hyp, "Hypotheses (text)")->check(CLI::ExistingFile);
  eval_cmd->add_option("--per-utt", ev.per_utt, "Per-utterance TSV output");
  eval_cmd->add_option("--robustness", ev.robustness, "label=hyp[,ref] per segmentation setting");
  eval_cmd->add_option("--output", ev.output, "Output file (default stdout)");

  detail::FigureArgs fig;
  auto *fig_cmd = app.add_subcommand("figures", "Emit figure data");
  fig_cmd->add_option("--figure", fig.figure)->check(CLI::IsMember({"ratio", "length-bucket"}))->capture_default_str();
  fig_cmd->add_option("--data", fig.data, "Ratio input table")->check(CLI::ExistingFile);
  fig_cmd->add_option("--ref", fig.ref, "References for length-bucket")->check(CLI::ExistingFile);
  fig_cmd->add_option("--hyp", fig.hyp, "Hypotheses for length-bucket")->check(CLI::ExistingFile);
  fig_cmd->add_option("--bucket-width", fig.bucket_width)->capture_default_str()->check(CLI::PositiveNumber);
  fig_cmd->add_option("--out", fig.format, "tsv or svg")->check(CLI::IsMember({"tsv", "svg"}))->capture_default_str();
  fig_cmd->add_option("--output", fig.output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*stats_cmd) detail::run_stats(stats, out);
    if (*synth_cmd) detail::run_synth(synth, g, out, err);
    if (*aug_cmd) {
      if (*s1) aug.stage1_steps = stage1;
      if (*s2) aug.stage2_steps = stage2;
      detail::run_augment(aug, g, out, err);
    }
    if (*vad_cmd) detail::run_vad(vad, g, out, err);
    if (*score_cmd) detail::run_score(score, g, out, err);
    if (*eval_cmd) detail::run_evaluate(ev, g, out, err);
    if (*fig_cmd) detail::run_figures(fig, g, out);
  } catch (const ConfigError &e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace ruc::cli
