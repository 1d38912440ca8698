#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scgrpo {

// Bad taxonomy, grid or training configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Probability mass that should be positive is zero, or the supports differ.
class NumericDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed input file. `line()` is 1-based; 0 means the file as a whole.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::string source, std::size_t line, const std::string& what)
      : std::runtime_error(compose(source, line, what)),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string compose(const std::string& source, std::size_t line,
                             const std::string& what) {
    if (line == 0) return source + ": " + what;
    return source + ":" + std::to_string(line) + ": " + what;
  }

  std::string source_;
  std::size_t line_;
};

}  // namespace scgrpo
