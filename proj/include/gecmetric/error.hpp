#pragma once

#include <stdexcept>
#include <string>

namespace gecmetric {

// Input data violates a structural invariant (misaligned files, bad spans).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be parsed. Carries the 1-based line number when known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An error detector (typically an external checker process) failed.
class DetectorError : public std::runtime_error {
 public:
  DetectorError(const std::string& detector, const std::string& what)
      : std::runtime_error("detector '" + detector + "': " + what), detector_(detector) {}

  const std::string& detector() const { return detector_; }

 private:
  std::string detector_;
};

// A statistic is undefined for the given input (zero variance, |r| = 1, ...).
class StatisticsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace gecmetric
