#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace enfuse {

enum class ErrorKind {
  io,
  schema,
  data,
  config,
  numeric,
  degenerate,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
    case ErrorKind::data: return "data";
    case ErrorKind::config: return "config";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::degenerate: return "degenerate";
  }
  return "unknown";
}

/// Library-wide exception. The message is a short lowercase phrase with no
/// newlines so the CLI can emit it as a single machine-parseable line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace enfuse
