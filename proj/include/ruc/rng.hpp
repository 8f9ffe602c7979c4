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

// Counter-based random numbers.
//
// Every random decision in the toolkit comes from Philox4x64-10 (the
// Random123 construction). A stream is identified by (seed, purpose,
// substream): seed and purpose form the 128-bit key, the substream sits in
// counter word 1 and counter word 0 counts blocks. Each block yields four
// 64-bit words consumed in order. Nothing about a stream depends on which
// thread evaluates it, so the output of a seeded run is fixed by the seed.
//
// Derived quantities are defined bit-for-bit so golden files stay portable:
//   uniform_below(n): rejection on x < (2^64 mod n), then x mod n
//   uniform01():      (x >> 11) * 2^-53

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "ruc/errors.hpp"

namespace ruc {

inline constexpr std::string_view kRngName = "philox4x64-10";

class Philox4x64 {
 public:
  using Counter = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    ctr = round(ctr, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

  // 64x64 -> 128 multiply from 32-bit limbs.
  static constexpr void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t &hi,
                                std::uint64_t &lo) {
    const std::uint64_t a_lo = a & 0xffffffffULL, a_hi = a >> 32;
    const std::uint64_t b_lo = b & 0xffffffffULL, b_hi = b >> 32;
    const std::uint64_t ll = a_lo * b_lo;
    const std::uint64_t lh = a_lo * b_hi;
    const std::uint64_t hl = a_hi * b_lo;
    const std::uint64_t hh = a_hi * b_hi;
    const std::uint64_t mid = (ll >> 32) + (lh & 0xffffffffULL) + (hl & 0xffffffffULL);
    lo = (mid << 32) | (ll & 0xffffffffULL);
    hi = hh + (lh >> 32) + (hl >> 32) + (mid >> 32);
  }

  static constexpr Counter round(const Counter &c, const Key &k) {
    std::uint64_t hi0 = 0, lo0 = 0, hi1 = 0, lo1 = 0;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Purposes partition the key space so unrelated consumers of one seed never
/// share a stream.
enum class StreamPurpose : std::uint64_t {
  kBatch = 1,
  kSynthetic = 2,
  kTest = 3,
};

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t substream = 0)
      : key_{seed, static_cast<std::uint64_t>(purpose)}, substream_(substream) {}

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      block_ = Philox4x64::generate({block_index_, substream_, 0, 0}, key_);
      ++block_index_;
      pos_ = 0;
    }
    return block_[pos_++];
  }

  /// Uniform on [0, n). n must be positive.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw ConfigError("uniform_below: empty range");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  /// Uniform on [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw ConfigError("uniform_int: empty range");
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit range
    return lo + static_cast<std::int64_t>(uniform_below(span));
  }

  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t substream() const { return substream_; }

 private:
  Philox4x64::Key key_;
  std::uint64_t substream_;
  std::uint64_t block_index_ = 0;
  Philox4x64::Counter block_{};
  int pos_ = 4;
};

}  // namespace ruc
