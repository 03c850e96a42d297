#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thprs {

enum class ErrorKind {
  kRankDeficient,
  kDimensionMismatch,
  kZeroMatrix,
  kNonFinite,
  kInvalidVariance,
  kInvalidPowerSplit,
  kSchemeMismatch,
  kNonUnitDiagonal,
  kEmptyGrid,
  kInvalidConfig,
  kIoError,
};

std::string_view ToString(ErrorKind kind);

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ToString(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace thprs
