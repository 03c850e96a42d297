#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thprs/linalg.h"
#include "thprs/precoder.h"

namespace thprs {

// SINRs are capped here and the report marked saturated when a denominator
// vanishes (zero noise with perfect cancellation).
inline constexpr double kSinrCap = 1e12;

enum class CsitKind { kPerfect, kImperfect };

struct SinrReport {
  SchemeTag scheme;
  CsitKind csit = CsitKind::kPerfect;
  int realization = -1;  // error realization index for kImperfect, if known
  RealVector private_sinr;
  std::optional<RealVector> common_sinr;
  bool saturated = false;
};

struct RateReport {
  RealVector private_rates;           // bps/Hz
  std::optional<RealVector> common_per_user;
  double common_rate = 0.0;           // min over users, 0 without RS
  double sum_rate = 0.0;
};

// Closed-form perfect-CSIT SINRs of a THP-family set (cTHP, dTHP, ZF-DPC):
//   dTHP private  lambda P l_kk^2 / (K sigma^2)
//   cTHP private  lambda P / (sigma^2 sum_i l_ii^-2)
//   dTHP common   K |h_k^H p_c|^2 / (lambda l_kk^2 P + K sigma^2)
//   cTHP common   S |h_k^H p_c|^2 / (lambda P + sigma^2 S),  S = sum_i l_ii^-2
// with P = E_tr - |p_c|^2 the private power.
SinrReport SinrPerfectCsit(const PrecoderSet& set, const ComplexMatrix& h_est,
                           double sigma_n2);

// Linear (ZF / RS-linear) SINRs from the received-power decomposition on the
// channel the signal actually crosses.
SinrReport SinrLinear(const PrecoderSet& set, const ComplexMatrix& h_true,
                      double sigma_n2);

// Closed-form imperfect-CSIT SINRs of a THP-family set when the true channel
// is h_est + h_err. g_ki = h_{e,k}^H p~_i uses the unit-gain filter columns
// p~ (set.p_unit).
//   dTHP private  |1 + g_kk / l_kk^2|^2
//                 / (sum_{i!=k} |g_ki|^2 / l_kk^2 + K sigma^2 / (lambda P l_kk^2))
//   cTHP private  |1 + g_kk|^2 / (sum_{i!=k} |g_ki|^2 + sigma^2 S / (lambda P))
//   dTHP common   (|h_k^H p_c|^2 / beta^2)
//                 / (|l_kk + g_kk|^2 + sum_{i!=k} |g_ki|^2 + sigma^2 / beta^2)
//   cTHP common   (|h_k^H p_c|^2 / beta^2)
//                 / (|1 + g_kk|^2 + sum_{i!=k} |g_ki|^2 + sigma^2 / beta^2)
// With h_err = 0 every entry equals SinrPerfectCsit.
SinrReport SinrImperfectCsit(const PrecoderSet& set, const ComplexMatrix& h_est,
                             const ComplexMatrix& h_err, double sigma_n2);

// Dispatches on the scheme; linear sets see h_est + h_err.
SinrReport EvaluateSinr(const PrecoderSet& set, const ComplexMatrix& h_est,
                        const ComplexMatrix& h_err, double sigma_n2);

RateReport RatesFromSinr(const SinrReport& report);

// Signal-model SINR estimate. Simulates
//   r_k = a_k (h_k^H p_c s_c + sum_i h_k^H p_i v_i + n_k)
// with a_k the receive scaling (1/(beta l_kk) dTHP, 1/beta cTHP, 1 linear),
// v = s + d, s ~ CN(0, I), d ~ CN(0, (1/lambda - 1) I) so E[v v^H] =
// lambda^-1 I. The private stream is decoded after the receive modulo has
// removed d_k and the common stream has been cancelled; the common stream
// sees every private term as interference.
struct MonteCarloSinr {
  SinrReport report;
  RealVector private_rel_stderr;
  std::optional<RealVector> common_rel_stderr;
};

MonteCarloSinr EstimateSinrMonteCarlo(const PrecoderSet& set,
                                      const ComplexMatrix& h_est,
                                      const ComplexMatrix& h_err,
                                      double sigma_n2, int n_samples,
                                      std::uint64_t seed);

// Relative gaps (estimate - closed) / closed per user.
struct SinrComparison {
  RealVector private_gap;
  std::optional<RealVector> common_gap;
  double max_abs_gap = 0.0;
  bool within_tolerance = true;
  std::string annotation;  // empty when within tolerance
};

SinrComparison CompareSinr(const SinrReport& closed_form,
                           const SinrReport& estimate, double tolerance);

}  // namespace thprs
