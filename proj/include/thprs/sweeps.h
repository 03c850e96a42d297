#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "thprs/channel.h"
#include "thprs/linalg.h"
#include "thprs/precoder.h"

namespace thprs {

enum class SweepAxis { kSnrDb, kErrorVariance, kSnrDbAlpha };

// "snr_db", "error_variance", "snr_db_alpha"
std::string_view AxisName(SweepAxis axis);

std::vector<double> DefaultPowerSplitGrid();  // 0, 0.05, ..., 0.95

struct SweepConfig {
  int users = 4;
  int tx_antennas = 4;
  SweepAxis axis = SweepAxis::kSnrDb;
  // SNR in dB on the SNR axes, per-entry error variance on the error axis.
  std::vector<double> grid = {0, 5, 10, 15, 20, 25, 30};
  double fixed_snr_db = 15.0;  // error-variance axis only
  // Error model on the SNR axes. The error-variance axis uses a fixed
  // variance per grid point; the alpha axis uses kSnrScaled.
  ErrorRegime error_regime;
  std::vector<SchemeTag> schemes = SchemeTag::All();
  int n_channels = 50;
  int n_error_samples = 100;
  double lambda = 0.75;
  double noise_variance = 1.0;
  std::vector<double> power_split_grid = DefaultPowerSplitGrid();
  std::uint64_t master_seed = 1;
  int threads = 0;  // 0: hardware concurrency, 1: serial

  // Throws Error(kInvalidConfig) or Error(kEmptyGrid).
  void Validate() const;
  // Perfect CSIT needs a single, zero, error sample.
  int EffectiveErrorSamples() const;
};

struct GridPoint {
  double x = 0.0;
  double e_tr = 1.0;
  double sigma_e2 = 0.0;
  bool perfect = true;
};

std::vector<GridPoint> ResolveGrid(const SweepConfig& config);

// Mean sum rate over error realizations sqrt(sigma_e2) * unit_errors[m] for
// one channel estimate. With `perfect` set the closed-form perfect-CSIT rate
// is returned and the errors are ignored. Per-realization sum rates are
// appended to `log` when given.
double AverageSumRate(const PrecoderBasis& basis, SchemeTag scheme,
                      double e_tr, double lambda, double power_split,
                      bool perfect, double sigma_e2,
                      std::span<const ComplexMatrix> unit_errors,
                      double noise_variance,
                      std::vector<double>* log = nullptr);

// Convenience form drawing `count` error realizations from `seed`.
double AverageSumRate(const ComplexMatrix& h_est, SchemeTag scheme,
                      double e_tr, double lambda, double power_split,
                      const ErrorRegime& regime, int count,
                      std::uint64_t seed, double noise_variance = 1.0);

struct SplitChoice {
  double split = 0.0;
  double asr = 0.0;
};

// Grid search over the common-power fraction with the same error
// realizations for every candidate. Ties go to the smaller split.
SplitChoice OptimizePowerSplit(const PrecoderBasis& basis, SchemeTag scheme,
                               double e_tr, double lambda, bool perfect,
                               double sigma_e2,
                               std::span<const ComplexMatrix> unit_errors,
                               std::span<const double> grid,
                               double noise_variance);

struct CellResult {
  SchemeTag scheme;
  GridPoint point;
  double esr = 0.0;
  double ci_halfwidth = 0.0;  // 95% normal approximation over channels
  double chosen_split_mean = 0.0;
  std::vector<double> channel_asr;
  std::vector<double> channel_split;
  std::vector<std::uint64_t> error_checksum;  // per channel
};

struct SweepResult {
  SweepConfig config;
  std::vector<CellResult> cells;  // sorted by (scheme name, x)
  double runtime_seconds = 0.0;

  const CellResult& Cell(SchemeTag scheme, double x) const;
};

// Channel c of a sweep: estimate and unit errors depend only on
// (master_seed, c), so every scheme and grid point sees the same draws.
ComplexMatrix SweepChannel(const SweepConfig& config, int channel);
std::vector<ComplexMatrix> SweepErrors(const SweepConfig& config, int channel);

std::uint64_t ErrorChecksum(std::span<const ComplexMatrix> errors);

CellResult ErgodicSumRate(const SweepConfig& config, SchemeTag scheme,
                          const GridPoint& point);

SweepResult RunSweep(const SweepConfig& config);

}  // namespace thprs
