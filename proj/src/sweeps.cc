#include "thprs/sweeps.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <string>
#include <thread>

#include "thprs/error.h"
#include "thprs/rates.h"

namespace thprs {
namespace {

struct ChannelOutcome {
  // [scheme][point]
  std::vector<std::vector<SplitChoice>> choice;
  std::uint64_t checksum = 0;
};

double PerfectSumRate(const PrecoderSet& set, const ComplexMatrix& h_est,
                      double noise_variance) {
  const SinrReport r = set.scheme.IsThpFamily()
                           ? SinrPerfectCsit(set, h_est, noise_variance)
                           : SinrLinear(set, h_est, noise_variance);
  return RatesFromSinr(r).sum_rate;
}

ChannelOutcome EvaluateChannel(const SweepConfig& config, int channel,
                               std::span<const GridPoint> points,
                               std::span<const SchemeTag> schemes) {
  const PrecoderBasis basis = MakePrecoderBasis(SweepChannel(config, channel));
  const std::vector<ComplexMatrix> errors = SweepErrors(config, channel);
  const std::vector<double> no_split = {0.0};

  ChannelOutcome out;
  out.checksum = ErrorChecksum(errors);
  out.choice.resize(schemes.size());
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const SchemeTag scheme = schemes[s];
    for (const GridPoint& p : points) {
      out.choice[s].push_back(OptimizePowerSplit(
          basis, scheme, p.e_tr, config.lambda, p.perfect, p.sigma_e2, errors,
          scheme.rs ? std::span<const double>(config.power_split_grid)
                    : std::span<const double>(no_split),
          config.noise_variance));
    }
  }
  return out;
}

std::vector<ChannelOutcome> EvaluateChannels(const SweepConfig& config,
                                             std::span<const GridPoint> points,
                                             std::span<const SchemeTag> schemes) {
  std::vector<ChannelOutcome> outcomes(
      static_cast<std::size_t>(config.n_channels));
  int workers = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, config.n_channels);
  if (workers == 1) {
    for (int c = 0; c < config.n_channels; ++c) {
      outcomes[static_cast<std::size_t>(c)] =
          EvaluateChannel(config, c, points, schemes);
    }
    return outcomes;
  }

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int c = next++; c < config.n_channels && !failed; c = next++) {
          try {
            outcomes[static_cast<std::size_t>(c)] =
                EvaluateChannel(config, c, points, schemes);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

CellResult Aggregate(SchemeTag scheme, const GridPoint& point,
                     std::span<const ChannelOutcome> outcomes,
                     std::size_t scheme_index, std::size_t point_index) {
  CellResult cell;
  cell.scheme = scheme;
  cell.point = point;
  for (const ChannelOutcome& o : outcomes) {
    const SplitChoice& c = o.choice[scheme_index][point_index];
    cell.channel_asr.push_back(c.asr);
    cell.channel_split.push_back(c.split);
    cell.error_checksum.push_back(o.checksum);
  }
  const double n = static_cast<double>(cell.channel_asr.size());
  double sum = 0.0, split_sum = 0.0;
  for (std::size_t i = 0; i < cell.channel_asr.size(); ++i) {
    sum += cell.channel_asr[i];
    split_sum += cell.channel_split[i];
  }
  cell.esr = sum / n;
  cell.chosen_split_mean = split_sum / n;
  if (cell.channel_asr.size() > 1) {
    double ss = 0.0;
    for (double a : cell.channel_asr) ss += (a - cell.esr) * (a - cell.esr);
    cell.ci_halfwidth = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return cell;
}

}  // namespace

std::string_view AxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kSnrDb: return "snr_db";
    case SweepAxis::kErrorVariance: return "error_variance";
    case SweepAxis::kSnrDbAlpha: return "snr_db_alpha";
  }
  return "unknown";
}

std::vector<double> DefaultPowerSplitGrid() {
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(0.05 * i);
  return grid;
}

void SweepConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidConfig, what);
  };
  if (users < 2 || users > tx_antennas) {
    fail("need 2 <= users <= tx_antennas");
  }
  if (grid.empty()) throw Error(ErrorKind::kEmptyGrid, "sweep grid is empty");
  if (schemes.empty()) fail("no schemes selected");
  if (n_channels < 1) fail("channels must be >= 1");
  if (n_error_samples < 1) fail("error samples must be >= 1");
  if (!(lambda > 0.0) || lambda > 1.0) fail("lambda must lie in (0, 1]");
  if (!(noise_variance > 0.0)) fail("noise variance must be positive");
  if (power_split_grid.empty()) {
    throw Error(ErrorKind::kEmptyGrid, "power split grid is empty");
  }
  for (double t : power_split_grid) {
    if (!(t >= 0.0) || !(t < 1.0)) fail("power splits must lie in [0, 1)");
  }
  if (axis == SweepAxis::kErrorVariance) {
    for (double v : grid) {
      if (!(v >= 0.0)) {
        throw Error(ErrorKind::kInvalidVariance, "error variance must be >= 0");
      }
    }
  }
  if (axis == SweepAxis::kSnrDbAlpha &&
      error_regime.kind != ErrorRegime::Kind::kSnrScaled) {
    fail("alpha sweep needs an SNR-scaled error regime");
  }
}

int SweepConfig::EffectiveErrorSamples() const {
  const bool perfect =
      axis == SweepAxis::kSnrDb && error_regime.IsPerfect();
  return perfect ? 1 : n_error_samples;
}

std::vector<GridPoint> ResolveGrid(const SweepConfig& config) {
  std::vector<GridPoint> points;
  for (double x : config.grid) {
    GridPoint p;
    p.x = x;
    switch (config.axis) {
      case SweepAxis::kSnrDb:
      case SweepAxis::kSnrDbAlpha:
        p.e_tr = config.noise_variance * std::pow(10.0, x / 10.0);
        p.sigma_e2 = config.error_regime.ErrorVariance(p.e_tr);
        break;
      case SweepAxis::kErrorVariance:
        p.e_tr = config.noise_variance *
                 std::pow(10.0, config.fixed_snr_db / 10.0);
        p.sigma_e2 = x;
        break;
    }
    // A zero-variance point is evaluated with the perfect-CSIT closed forms.
    p.perfect = p.sigma_e2 == 0.0;
    points.push_back(p);
  }
  return points;
}

double AverageSumRate(const PrecoderBasis& basis, SchemeTag scheme,
                      double e_tr, double lambda, double power_split,
                      bool perfect, double sigma_e2,
                      std::span<const ComplexMatrix> unit_errors,
                      double noise_variance, std::vector<double>* log) {
  const PrecoderSet set =
      BuildPrecoderSet(basis, scheme, e_tr, lambda, power_split);
  if (perfect) {
    const double rate = PerfectSumRate(set, basis.h_est, noise_variance);
    if (log) log->push_back(rate);
    return rate;
  }
  if (unit_errors.empty()) {
    throw Error(ErrorKind::kInvalidConfig, "no error realizations supplied");
  }
  if (!(sigma_e2 >= 0.0)) {
    throw Error(ErrorKind::kInvalidVariance, "negative error variance");
  }
  const double scale = std::sqrt(sigma_e2);
  double total = 0.0;
  for (const ComplexMatrix& unit : unit_errors) {
    const ComplexMatrix h_err = scale * unit;
    const double rate =
        RatesFromSinr(EvaluateSinr(set, basis.h_est, h_err, noise_variance))
            .sum_rate;
    if (log) log->push_back(rate);
    total += rate;
  }
  return total / static_cast<double>(unit_errors.size());
}

double AverageSumRate(const ComplexMatrix& h_est, SchemeTag scheme,
                      double e_tr, double lambda, double power_split,
                      const ErrorRegime& regime, int count,
                      std::uint64_t seed, double noise_variance) {
  const PrecoderBasis basis = MakePrecoderBasis(h_est);
  const std::vector<ComplexMatrix> errors = DrawUnitErrors(
      static_cast<int>(h_est.rows()), static_cast<int>(h_est.cols()), count,
      seed);
  return AverageSumRate(basis, scheme, e_tr, lambda, power_split,
                        regime.IsPerfect(), regime.ErrorVariance(e_tr), errors,
                        noise_variance);
}

SplitChoice OptimizePowerSplit(const PrecoderBasis& basis, SchemeTag scheme,
                               double e_tr, double lambda, bool perfect,
                               double sigma_e2,
                               std::span<const ComplexMatrix> unit_errors,
                               std::span<const double> grid,
                               double noise_variance) {
  if (grid.empty()) {
    throw Error(ErrorKind::kEmptyGrid, "power split grid is empty");
  }
  SplitChoice best;
  bool first = true;
  for (double t : grid) {
    const double asr =
        AverageSumRate(basis, scheme, e_tr, lambda, t, perfect, sigma_e2,
                       unit_errors, noise_variance);
    if (first || asr > best.asr || (asr == best.asr && t < best.split)) {
      best = {t, asr};
      first = false;
    }
  }
  return best;
}

ComplexMatrix SweepChannel(const SweepConfig& config, int channel) {
  return DrawChannel(config.users, config.tx_antennas,
                     DeriveSeed(config.master_seed, StreamTag::kChannel,
                                static_cast<std::uint64_t>(channel)));
}

std::vector<ComplexMatrix> SweepErrors(const SweepConfig& config,
                                       int channel) {
  return DrawUnitErrors(
      config.users, config.tx_antennas, config.EffectiveErrorSamples(),
      DeriveSeed(config.master_seed, StreamTag::kEvaluationError,
                 static_cast<std::uint64_t>(channel)));
}

std::uint64_t ErrorChecksum(std::span<const ComplexMatrix> errors) {
  // FNV-1a over the raw entries.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const ComplexMatrix& e : errors) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(e.data());
    const std::size_t n = static_cast<std::size_t>(e.size()) * sizeof(Complex);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

CellResult ErgodicSumRate(const SweepConfig& config, SchemeTag scheme,
                          const GridPoint& point) {
  config.Validate();
  const std::vector<GridPoint> points = {point};
  const std::vector<SchemeTag> schemes = {scheme};
  const auto outcomes = EvaluateChannels(config, points, schemes);
  return Aggregate(scheme, point, outcomes, 0, 0);
}

const CellResult& SweepResult::Cell(SchemeTag scheme, double x) const {
  for (const CellResult& c : cells) {
    if (c.scheme == scheme && c.point.x == x) return c;
  }
  throw Error(ErrorKind::kInvalidConfig,
              "no cell for " + scheme.Name() + " at " + std::to_string(x));
}

SweepResult RunSweep(const SweepConfig& config) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  const std::vector<GridPoint> points = ResolveGrid(config);
  const auto outcomes = EvaluateChannels(config, points, config.schemes);

  SweepResult result;
  result.config = config;
  for (std::size_t s = 0; s < config.schemes.size(); ++s) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      result.cells.push_back(
          Aggregate(config.schemes[s], points[p], outcomes, s, p));
    }
  }
  std::stable_sort(result.cells.begin(), result.cells.end(),
                   [](const CellResult& a, const CellResult& b) {
                     const std::string na = a.scheme.Name();
                     const std::string nb = b.scheme.Name();
                     if (na != nb) return na < nb;
                     return a.point.x < b.point.x;
                   });
  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

}  // namespace thprs
