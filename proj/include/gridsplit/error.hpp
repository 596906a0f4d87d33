// Copyright 2026 The gridsplit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridsplit {

enum class ErrorCode {
  parse = 1,
  validation,
  partition,
  singular_matrix,
  divergence,
  steady_state,
  io,
  argument,
  missing_benchmark,
  non_finite,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& what)
      : Error(ErrorCode::parse, source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(std::size_t pivot, const std::string& context)
      : Error(ErrorCode::singular_matrix,
              context + ": singular matrix, pivot failure at index " + std::to_string(pivot)),
        pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(double time, int iterations, double mismatch, const std::string& what)
      : Error(ErrorCode::divergence, what), time_(time), iterations_(iterations),
        mismatch_(mismatch) {}
  double time() const noexcept { return time_; }
  int iterations() const noexcept { return iterations_; }
  double mismatch() const noexcept { return mismatch_; }

 private:
  double time_;
  int iterations_;
  double mismatch_;
};

}  // namespace gridsplit
