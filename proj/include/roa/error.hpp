#pragma once

#include <stdexcept>
#include <string>

namespace roa {

// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind {
  InvalidConfiguration,
  NoStabilizingSolution,
  EmptyDataset,
  NonFiniteLoss,
  EmptyOutput,
  DegenerateInput,
  NoCertifiableLevel,
  MissingInput,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

// 2 config/input error, 3 numerical failure, 4 degenerate geometry.
int exit_code(ErrorKind kind) noexcept;

}  // namespace roa
