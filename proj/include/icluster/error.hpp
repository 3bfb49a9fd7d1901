#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace icluster {

enum class ErrorKind {
  EmptyInput,
  NonPositiveWeight,
  NonFiniteValue,
  ParseError,
  DomainViolation,
  IndexOutOfRange,
  NoConvergence,
  UnsupportedCombination,
  InfeasibleConstraints,
  KTooLarge,
  SupportViolation,
  DegenerateCluster,
  TooFewSamples,
  SearchSpaceTooLarge,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the ErrorKind tags so
/// that callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace icluster
