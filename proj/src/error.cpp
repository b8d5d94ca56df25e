#include "roa/error.hpp"

namespace roa {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidConfiguration: return "invalid-configuration";
    case ErrorKind::NoStabilizingSolution: return "no-stabilizing-solution";
    case ErrorKind::EmptyDataset: return "empty-dataset";
    case ErrorKind::NonFiniteLoss: return "non-finite-loss";
    case ErrorKind::EmptyOutput: return "empty-output";
    case ErrorKind::DegenerateInput: return "degenerate-input";
    case ErrorKind::NoCertifiableLevel: return "no-certifiable-level";
    case ErrorKind::MissingInput: return "missing-input";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidConfiguration:
    case ErrorKind::EmptyDataset:
    case ErrorKind::EmptyOutput:
    case ErrorKind::MissingInput:
    case ErrorKind::Io:
      return 2;
    case ErrorKind::NoStabilizingSolution:
    case ErrorKind::NonFiniteLoss:
    case ErrorKind::NoCertifiableLevel:
      return 3;
    case ErrorKind::DegenerateInput:
      return 4;
  }
  return 1;
}

}  // namespace roa
