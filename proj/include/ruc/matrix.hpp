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

#pragma once

#include <cstddef>
#include <cstring>
#include <span>
#include <utility>
#include <vector>

namespace ruc {

/// Frame-major feature matrix: rows are 10 ms frames, columns are MEL bins.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  std::span<const float> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }
  std::span<float> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

  float &operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  float operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  void reserve_rows(std::size_t rows) { values_.reserve(rows * cols_); }

  /// Appends `other` below this matrix. An empty matrix adopts other's width.
  /// Callers check widths.
  void append_rows(const FeatureMatrix &other) {
    if (rows_ == 0 && values_.empty()) cols_ = other.cols_;
    values_.insert(values_.end(), other.values_.begin(), other.values_.end());
    rows_ += other.rows_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

/// Bitwise equality (distinguishes -0.0 from 0.0 and compares NaN payloads).
inline bool bit_equal(const FeatureMatrix &a, const FeatureMatrix &b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const auto av = a.values(), bv = b.values();
  return av.empty() || std::memcmp(av.data(), bv.data(), av.size_bytes()) == 0;
}

}  // namespace ruc
