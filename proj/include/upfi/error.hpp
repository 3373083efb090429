// Copyright 2026 The upfi Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace upfi {

// Base of every error thrown by the library. kind() is a short stable tag
// used as the machine-readable prefix of CLI error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Argument violates a documented precondition or a type invariant.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error("input", what) {}
};

// Malformed or unreadable data file; the message names the row/column.
class IngestError : public Error {
 public:
  explicit IngestError(const std::string& what) : Error("ingest", what) {}
};

class FitError : public Error {
 public:
  explicit FitError(const std::string& what) : Error("fit", what) {}
};

class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& what) : Error("calibration", what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error("format", what) {}
};

}  // namespace upfi
