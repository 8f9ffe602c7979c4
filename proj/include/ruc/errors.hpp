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
#include <stdexcept>
#include <string>

namespace ruc {

/// Root of every error the toolkit throws. Data problems (bad files, bad
/// records, impossible requests) derive from DataError; ConfigError marks
/// invalid knobs and maps to a usage error at the CLI.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// corpus

class EmptyManifest : public DataError {
 public:
  explicit EmptyManifest(const std::string &path)
      : DataError("manifest has no records: " + path) {}
};

class MalformedRecord : public DataError {
 public:
  MalformedRecord(std::size_t line_no, const std::string &why)
      : DataError("malformed record at line " + std::to_string(line_no) + ": " + why),
        line_no_(line_no) {}
  std::size_t line_no() const { return line_no_; }

 private:
  std::size_t line_no_;
};

class DimMismatch : public DataError {
 public:
  DimMismatch(const std::string &id, std::size_t expected, std::size_t got)
      : DataError("feature dim mismatch for '" + id + "': expected " + std::to_string(expected) +
                  ", got " + std::to_string(got)),
        id_(id) {}
  const std::string &id() const { return id_; }

 private:
  std::string id_;
};

class MissingFeatureFile : public DataError {
 public:
  MissingFeatureFile(const std::string &id, const std::string &path)
      : DataError("feature file for '" + id + "' not found: " + path), id_(id) {}
  const std::string &id() const { return id_; }

 private:
  std::string id_;
};

class HeaderMismatch : public DataError {
 public:
  using DataError::DataError;
};

class TruncatedFile : public DataError {
 public:
  using DataError::DataError;
};

class IoFailure : public DataError {
 public:
  using DataError::DataError;
};

// augment

class CallbackFailure : public DataError {
 public:
  CallbackFailure(std::size_t step, const std::string &what)
      : DataError("training step " + std::to_string(step) + " failed: " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

// vadsim

class InvalidSpans : public DataError {
 public:
  using DataError::DataError;
};

class Unachievable : public DataError {
 public:
  Unachievable(double target, double lo, double hi)
      : DataError("target mean " + std::to_string(target) + " s outside attainable range (" +
                  std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        target_(target), lo_(lo), hi_(hi) {}
  double target() const { return target_; }
  double attainable_low() const { return lo_; }
  double attainable_high() const { return hi_; }

 private:
  double target_, lo_, hi_;
};

// scoring / eval

class EmptyHypothesis : public DataError {
 public:
  EmptyHypothesis() : DataError("hypothesis has no tokens") {}
};

class EmptyReference : public DataError {
 public:
  explicit EmptyReference(std::size_t index)
      : DataError("reference " + std::to_string(index) + " is empty"), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class ZeroBaseline : public DataError {
 public:
  ZeroBaseline() : DataError("baseline WER must be positive") {}
};

class TooFewSettings : public DataError {
 public:
  explicit TooFewSettings(std::size_t n)
      : DataError("need at least 2 settings for a standard deviation, got " + std::to_string(n)) {}
};

}  // namespace ruc
