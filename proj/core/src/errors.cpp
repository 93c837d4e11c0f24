#include "idiomspace/errors.hpp"

namespace idiomspace {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::data: return "data";
    case ErrorKind::provider: return "provider";
    case ErrorKind::analysis: return "analysis";
    case ErrorKind::contract: return "contract";
  }
  return "unknown";
}

namespace {
std::string located(const std::string& what, std::size_t line, std::size_t column) {
  if (line == 0) return what;
  std::string out = "line " + std::to_string(line);
  if (column != 0) out += ", column " + std::to_string(column);
  return out + ": " + what;
}
}  // namespace

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : Error(ErrorKind::data, located(what, line, column)), line_(line), column_(column) {}

}  // namespace idiomspace
