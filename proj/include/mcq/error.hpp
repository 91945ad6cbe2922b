#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mcq {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. The message carries a "source:line N" or
// "source:record N" locator.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a data invariant. Carries every finding,
// not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> findings)
      : Error(join_findings(findings)), findings_(std::move(findings)) {}

  const std::vector<std::string>& findings() const noexcept { return findings_; }

 private:
  static std::string join_findings(const std::vector<std::string>& findings) {
    std::string out;
    for (const auto& f : findings) {
      if (!out.empty()) out += "; ";
      out += f;
    }
    return out;
  }

  std::vector<std::string> findings_;
};

// Argument outside the domain of an operation (alpha outside [0,1], tau <= 0,
// empty input where a mean is required, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// File system failure: unreadable or unwritable path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcq
