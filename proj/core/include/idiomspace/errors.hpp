#ifndef IDIOMSPACE_ERRORS_HPP
#define IDIOMSPACE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace idiomspace {

// Broad failure classes. The command-line tool maps each one to an exit code.
enum class ErrorKind {
  config,
  data,
  provider,
  analysis,
  contract,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& what)
      : Error(ErrorKind::analysis, what) {}
};

class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what) : Error(ErrorKind::analysis, what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorKind::contract, what) {}
};

class TransportError : public Error {
 public:
  explicit TransportError(const std::string& what) : Error(ErrorKind::provider, what) {}
};

class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(ErrorKind::provider, what) {}
};

/// Exact enumeration would visit more completions than the configured ceiling.
class EnumerationLimitError : public Error {
 public:
  explicit EnumerationLimitError(const std::string& what)
      : Error(ErrorKind::contract, what) {}
};

}  // namespace idiomspace

#endif  // IDIOMSPACE_ERRORS_HPP
