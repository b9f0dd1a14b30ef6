#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace embeval {

// Root of every error the library throws on bad input. Anything else escaping
// a public function is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed file content. `line` is 1-based, 0 when the format has no lines.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }
  // Same error with `prefix` (usually a file path) prepended to the message.
  ParseError with_prefix(const std::string& prefix) const {
    return ParseError(prefix + ": " + what(), line_, 0);
  }

 private:
  ParseError(const std::string& message, std::size_t line, int) : Error(message), line_(line) {}
  std::size_t line_;
};

// Caller passed arguments that violate a precondition (shapes, counts, ranges).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Mathematically undefined input, e.g. a zero-norm vector for cosine.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A word or key that is not present.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that fails a data-level consistency check.
class DataError : public Error {
 public:
  using Error::Error;
};

// File system problems (missing file, unwritable directory).
class IoError : public Error {
 public:
  using Error::Error;
};

using WarningHandler = std::function<void(std::string_view)>;

// Installs a process-wide sink for non-fatal diagnostics and returns the
// previous one. The default handler writes "warning: ..." lines to stderr.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace embeval
