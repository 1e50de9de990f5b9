#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sdml {

enum class ErrorKind {
  NonFiniteCoordinate,
  JointCountMismatch,
  InvalidTarget,
  InvalidTopology,
  MalformedHeader,
  TruncatedFrame,
  NonNumericField,
  MissingReferenceSample,
  UnknownAuxiliarySize,
  BadLength,
  TooShort,
  WrongJointCount,
  InvalidSpec,
  ShapeMismatch,
  SingleClassDataset,
  CorruptCheckpoint,
  VersionMismatch,
  DuplicateClass,
  MissingClass,
  EmptyGallery,
  DimMismatch,
  UnknownLabel,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported through this type.
/// `first`/`second` carry the positional payload of the error where one
/// exists (frame and joint, line number, class id), otherwise -1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::int64_t first = -1,
        std::int64_t second = -1)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        first_(first),
        second_(second) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::int64_t first() const noexcept { return first_; }
  std::int64_t second() const noexcept { return second_; }

 private:
  ErrorKind kind_;
  std::int64_t first_;
  std::int64_t second_;
};

}  // namespace sdml
