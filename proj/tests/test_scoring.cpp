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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "ruc/rng.hpp"
#include "ruc/scoring.hpp"
#include "test_util.hpp"

namespace {

ruc::Hypothesis hyp(const ruc::TokenSeq &tokens, const std::vector<double> &lps) {
  return {"u", tokens, lps};
}

ruc::TokenSeq words(std::size_t n, std::size_t offset = 0) {
  ruc::TokenSeq t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("w" + std::to_string(i + offset));
  return t;
}

TEST(RawScore, SumsLogprobs) {
  EXPECT_DOUBLE_EQ(ruc::raw_score(hyp({"a", "b", "c"}, {-0.5, -1.0, -0.25})), -1.75);
  EXPECT_DOUBLE_EQ(ruc::raw_score(hyp({"a"}, {0.0})), 0.0);
}

TEST(RawScore, MatchesCompensatedSum) {
  ruc::RandomStream rng(11, ruc::StreamPurpose::kTest);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_below(400);
    std::vector<double> lps(n);
    for (auto &lp : lps) lp = -20.0 * rng.uniform01() * rng.uniform01();
    double sum = 0.0, comp = 0.0;  // Neumaier
    for (double x : lps) {
      const double t = sum + x;
      comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
      sum = t;
    }
    ASSERT_NEAR(ruc::raw_score(hyp(words(n), lps)), sum + comp, 1e-9 * std::max(1.0, std::fabs(sum)));
  }
}

TEST(RawScore, RejectsBadHypotheses) {
  EXPECT_THROW(ruc::raw_score(hyp({}, {})), ruc::EmptyHypothesis);
  EXPECT_THROW(ruc::raw_score(hyp({"a"}, {0.1})), ruc::DataError);
  EXPECT_THROW(ruc::raw_score(hyp({"a", "b"}, {-1.0})), ruc::DataError);
}

TEST(Normalize, ReferenceValues) {
  EXPECT_NEAR(ruc::length_normalized_score(-10.0, 25, 0.8), -2.7594593229224297, 1e-12);
  EXPECT_NEAR(ruc::length_normalized_score(-10.0, 5, 0.8), -6.6453980594897397, 1e-12);
  EXPECT_NEAR(ruc::length_normalized_score(-11.0, 30, 0.8), -2.6832383348905670, 1e-12);
  EXPECT_DOUBLE_EQ(ruc::length_normalized_score(-3.0, 1, 1.0), -3.0);
  EXPECT_DOUBLE_EQ(ruc::length_penalty(1, 0.7), 1.0);
}

TEST(Normalize, AlphaZeroIsBitExact) {
  ruc::RandomStream rng(12, ruc::StreamPurpose::kTest);
  for (int i = 0; i < 1000; ++i) {
    const double s = -100.0 * rng.uniform01();
    const double got = ruc::length_normalized_score(s, 1 + rng.uniform_below(500), 0.0);
    ASSERT_EQ(std::memcmp(&got, &s, sizeof s), 0);
  }
}

TEST(Normalize, PositiveAlphaFavoursLongerAtEqualRawScore) {
  for (double alpha : {0.1, 0.5, 0.8, 1.5})
    for (std::size_t len = 1; len < 100; ++len)
      ASSERT_GT(ruc::length_normalized_score(-7.0, len + 1, alpha), ruc::length_normalized_score(-7.0, len, alpha));
}

TEST(Normalize, ScalingCommutes) {
  ruc::RandomStream rng(13, ruc::StreamPurpose::kTest);
  for (int i = 0; i < 500; ++i) {
    const double s = -50.0 * rng.uniform01(), c = 0.1 + 5.0 * rng.uniform01(), alpha = rng.uniform01();
    const std::size_t len = 1 + rng.uniform_below(300);
    const double a = ruc::length_normalized_score(c * s, len, alpha), b = c * ruc::length_normalized_score(s, len, alpha);
    ASSERT_NEAR(a, b, 1e-12 * std::max(1.0, std::fabs(a)));
  }
}

TEST(Normalize, PenaltyAtLeastOne) {
  for (double alpha = 0.0; alpha <= 2.0; alpha += 0.05)
    for (std::size_t len = 1; len < 200; len += 7) ASSERT_GE(ruc::length_penalty(len, alpha), 1.0);
}

TEST(Normalize, RejectsBadArguments) {
  EXPECT_THROW(ruc::length_normalized_score(-1.0, 0, 0.5), ruc::ConfigError);
  EXPECT_THROW(ruc::length_normalized_score(-1.0, 3, -0.1), ruc::ConfigError);
}

TEST(Rescore, LengthNormalizationFlipsRanking) {
  // 5 tokens at -2 each vs 30 tokens summing to -11.
  std::vector<ruc::Hypothesis> nbest = {hyp(words(5), std::vector<double>(5, -2.0)),
                                        hyp(words(30), std::vector<double>(30, -11.0 / 30.0))};
  EXPECT_EQ(ruc::rescore_nbest(nbest, 0.0).front().index, 0u);
  const auto ranked = ruc::rescore_nbest(nbest, 0.8);
  EXPECT_EQ(ranked.front().index, 1u);
  EXPECT_NEAR(ranked.front().score.norm_s, -2.6832383348905670, 1e-9);
  EXPECT_NEAR(ranked.back().score.norm_s, -6.6453980594897397, 1e-12);
}

TEST(Rescore, TiesKeepInputOrder) {
  std::vector<ruc::Hypothesis> nbest = {hyp({"x"}, {-1.0}), hyp({"y"}, {-1.0}), hyp({"z"}, {-0.5})};
  const auto r = ruc::rescore_nbest(nbest, 0.5);
  EXPECT_EQ(r[0].index, 2u);
  EXPECT_EQ(r[1].index, 0u);
  EXPECT_EQ(r[2].index, 1u);
  EXPECT_THROW(ruc::rescore_nbest({}, 0.5), ruc::DataError);
}

TEST(Sweep, DefaultGrid) {
  const auto g = ruc::default_alpha_grid();
  ASSERT_EQ(g.size(), 9u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 0.8);
}

// A: three correct tokens at -1 (seven deletions). B: the full reference at
// -0.48 per token. B outranks A only when 1.875^alpha > 1.6.
std::vector<ruc::NbestSet> flip_sets() {
  ruc::NbestSet set;
  set.reference = words(10);
  set.nbest = {hyp(words(3), {-1.0, -1.0, -1.0}), hyp(words(10), std::vector<double>(10, -0.48))};
  return {set};
}

TEST(Sweep, PicksOnlyFlippingAlpha) {
  const auto sets = flip_sets();
  const auto res = ruc::sweep_alpha(sets, ruc::default_alpha_grid());
  EXPECT_DOUBLE_EQ(res.best_alpha, 0.8);
  for (const auto &[alpha, report] : res.wer_by_alpha) {
    // independent evaluation of which hypothesis wins
    const double a = -3.0 / std::pow(8.0 / 6.0, alpha), b = -4.8 / std::pow(15.0 / 6.0, alpha);
    EXPECT_DOUBLE_EQ(report.wer_percent, b > a ? 0.0 : 70.0) << alpha;
  }
}

TEST(Sweep, TieGoesToSmallerAlpha) {
  ruc::NbestSet set;
  set.reference = {"a", "b"};
  set.nbest = {hyp({"a", "b"}, {-0.1, -0.1})};
  const auto res = ruc::sweep_alpha({set}, {0.6, 0.2, 0.4});
  EXPECT_DOUBLE_EQ(res.best_alpha, 0.2);
  EXPECT_THROW(ruc::sweep_alpha({set}, {}), ruc::ConfigError);
}

TEST(Sweep, ThreadsAgree) {
  ruc::RandomStream rng(14, ruc::StreamPurpose::kTest);
  std::vector<ruc::NbestSet> sets;
  for (int u = 0; u < 40; ++u) {
    ruc::NbestSet s;
    s.reference = words(3 + rng.uniform_below(20));
    for (int h = 0; h < 5; ++h) {
      const std::size_t n = 1 + rng.uniform_below(25);
      std::vector<double> lps(n);
      for (auto &lp : lps) lp = -rng.uniform01();
      s.nbest.push_back(hyp(words(n, rng.uniform_below(3)), lps));
    }
    sets.push_back(std::move(s));
  }
  const auto a = ruc::sweep_alpha(sets, ruc::default_alpha_grid(), 1);
  const auto b = ruc::sweep_alpha(sets, ruc::default_alpha_grid(), 4);
  EXPECT_EQ(a.best_alpha, b.best_alpha);
  for (std::size_t i = 0; i < a.wer_by_alpha.size(); ++i)
    EXPECT_EQ(a.wer_by_alpha[i].second.wer_percent, b.wer_by_alpha[i].second.wer_percent);
}

TEST(NbestFile, ParsesAndOrdersByRank) {
  testutil::TempDir dir;
  testutil::write_text(dir / "n.txt",
                       "u1 2 b:-0.5 c:-1\n"
                       "u1 1 a:-0.25\n"
                       "# comment\n"
                       "u0 1 x:y:-0.125\n");
  const auto lists = ruc::read_nbest_file((dir / "n.txt").string());
  ASSERT_EQ(lists.size(), 2u);
  EXPECT_EQ(lists[0].utterance_id, "u1");
  ASSERT_EQ(lists[0].hypotheses.size(), 2u);
  EXPECT_EQ(lists[0].hypotheses[0].tokens, ruc::TokenSeq{"a"});
  EXPECT_EQ(lists[0].hypotheses[1].token_logprobs, (std::vector<double>{-0.5, -1.0}));
  EXPECT_EQ(lists[1].hypotheses[0].tokens, ruc::TokenSeq{"x:y"});
  EXPECT_DOUBLE_EQ(lists[1].hypotheses[0].token_logprobs[0], -0.125);
}

TEST(NbestFile, BadLines) {
  testutil::TempDir dir;
  const std::vector<std::string> bad = {"u1\n", "u1 x a:-1\n", "u1 1 a\n", "u1 1 a:zz\n", "u1 1 a:0.5\n"};
  for (std::size_t i = 0; i < bad.size(); ++i) {
    const auto p = dir / ("b" + std::to_string(i));
    testutil::write_text(p, bad[i]);
    EXPECT_THROW(ruc::read_nbest_file(p.string()), ruc::MalformedRecord) << bad[i];
  }
}

}  // namespace
