#include "thprs/error.h"

namespace thprs {

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRankDeficient: return "RankDeficient";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kZeroMatrix: return "ZeroMatrix";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kInvalidVariance: return "InvalidVariance";
    case ErrorKind::kInvalidPowerSplit: return "InvalidPowerSplit";
    case ErrorKind::kSchemeMismatch: return "SchemeMismatch";
    case ErrorKind::kNonUnitDiagonal: return "NonUnitDiagonal";
    case ErrorKind::kEmptyGrid: return "EmptyGrid";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace thprs
