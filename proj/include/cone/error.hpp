#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cone {

// Root of every error the library throws. `module` names the pipeline stage
// that raised it so the CLI can report where a run went wrong.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error("corpus-io", line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  // 1-based; 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
  explicit ValidationError(const std::string& what) : Error("corpus-io", what) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what) : Error("backend-gateway", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("cli-report", what) {}
};

}  // namespace cone
