#pragma once

#include <stdexcept>
#include <string>

namespace kgbench {

// Base class for every error raised by the library. Callers that only care
// about "did the benchmark machinery fail" catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files (TSV, CSV, JSONL, config).
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A generator could not produce a valid instance within its retry budget.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// Gold answer failed re-verification. Always a bug, never bad luck.
class OracleMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace kgbench
