#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "thprs/linalg.h"

namespace thprs {

// Independent random streams, keyed so that any (channel, realization) cell
// can be generated on its own, in any order.
enum class StreamTag : std::uint64_t {
  kChannel = 1,
  kEstimationError = 2,
  kEvaluationError = 3,
  kSymbols = 4,
  kNoise = 5,
  kMonteCarlo = 6,
  kPerturbation = 7,
};

std::uint64_t DeriveSeed(std::uint64_t master, StreamTag tag,
                         std::uint64_t i = 0, std::uint64_t j = 0);

using Engine = std::mt19937_64;

// Circularly symmetric CN(0, variance) sample.
Complex DrawComplexGaussian(Engine& engine, double variance = 1.0);

struct ErrorRegime {
  enum class Kind { kPerfect, kFixedVariance, kSnrScaled };

  Kind kind = Kind::kPerfect;
  double variance = 0.0;  // kFixedVariance
  double alpha = 0.0;     // kSnrScaled: variance = e_tr^-alpha

  static ErrorRegime Perfect() { return {}; }
  static ErrorRegime FixedVariance(double variance);
  static ErrorRegime SnrScaled(double alpha);

  // Per-entry CSIT error variance at total transmit power e_tr.
  double ErrorVariance(double e_tr) const;
  bool IsPerfect() const;
};

struct ChannelSet {
  ComplexMatrix h_true;  // K x N_t, row k = h_k^H
  ComplexMatrix h_est;
  std::vector<ComplexMatrix> errors;
  double sigma_e2 = 0.0;
};

// K x N_t matrix with i.i.d. CN(0, 1) entries. Requires 2 <= K <= N_t.
ComplexMatrix DrawChannel(int users, int tx_antennas, std::uint64_t seed);

// `count` error matrices with i.i.d. CN(0, 1) entries; realization m depends
// only on (seed, m). Callers scale by sqrt(sigma_e2).
std::vector<ComplexMatrix> DrawUnitErrors(int users, int tx_antennas,
                                          int count, std::uint64_t seed);

// Builds estimate and evaluation errors around a known channel. Under a
// perfect regime the estimate equals h_true and every error is zero. Otherwise
// h_est = h_true - e_true for a separate draw e_true, and errors[m] are
// independent CN(0, sigma_e2) matrices. `e_tr` is only read by kSnrScaled.
ChannelSet DrawEstimateAndErrors(const ComplexMatrix& h_true,
                                 const ErrorRegime& regime, int count,
                                 std::uint64_t seed, double e_tr = 1.0);

// Structured-text (JSON) fixture of channel sets for regression tests.
struct ChannelRecord {
  std::uint64_t seed = 0;
  ChannelSet set;
};

void WriteChannelDump(const std::filesystem::path& path,
                      const std::vector<ChannelRecord>& records);
std::vector<ChannelRecord> ReadChannelDump(const std::filesystem::path& path);

}  // namespace thprs
