#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace formeclust {

/// Process exit codes used by the CLI. Every library error maps to one.
enum class ExitCode : int {
  ok = 0,
  config = 1,
  io = 2,
  numerical = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }
  const char* kind() const noexcept;

 private:
  ExitCode code_;
};

/// Invalid input documents, flags, or arguments that violate a precondition.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

/// Unreadable or unwritable files. Carries the page index when a title image is involved.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what, std::optional<int> page_index = std::nullopt)
      : Error(ExitCode::io, what), page_index_(page_index) {}
  std::optional<int> page_index() const noexcept { return page_index_; }

 private:
  std::optional<int> page_index_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ExitCode::numerical, what) {}
};

}  // namespace formeclust
