#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thprs/linalg.h"

namespace thprs {

enum class BaseScheme { kZfLinear, kCthp, kDthp, kZfDpc };
enum class ThpStructure { kCentralized, kDecentralized };

struct SchemeTag {
  BaseScheme base = BaseScheme::kZfLinear;
  bool rs = false;

  bool IsThpFamily() const { return base != BaseScheme::kZfLinear; }
  ThpStructure Structure() const {
    return base == BaseScheme::kCthp ? ThpStructure::kCentralized
                                     : ThpStructure::kDecentralized;
  }
  SchemeTag WithoutRs() const { return {base, false}; }

  // zf, rs-linear, cthp, dthp, cthp-rs, dthp-rs, zf-dpc, zf-dpc-rs
  std::string Name() const;
  static std::optional<SchemeTag> Parse(std::string_view name);
  static std::vector<SchemeTag> All();

  friend bool operator==(const SchemeTag&, const SchemeTag&) = default;
};

struct ThpFilters {
  ComplexMatrix F;  // N_t x K, Q^H
  RealVector G;     // diagonal of diag(l_kk)^-1
  ComplexMatrix B;  // K x K unit lower triangular feedback filter
  LqFactors lq;
};

// F = Q^H, G = diag(l_kk)^-1, B = G L (decentralized) or L G (centralized),
// from the LQ factors of the K x N_t downlink estimate.
ThpFilters BuildThpFilters(const ComplexMatrix& h_est, ThpStructure structure);
ThpFilters BuildThpFilters(const LqFactors& lq, ThpStructure structure);

// Scaling factor meeting the private power budget:
//   decentralized: sqrt(lambda (E_tr - |p_c|^2) / K)
//   centralized:   sqrt(lambda (E_tr - |p_c|^2) / sum_k l_kk^-2)
double ComputeBeta(ThpStructure structure, double e_tr, double lambda,
                   const LqFactors& lq, double common_power);

// Everything about one channel estimate that does not depend on the scheme,
// power or split. Building it once per channel keeps power-split searches
// cheap.
struct PrecoderBasis {
  ComplexMatrix h_est;
  LqFactors lq;
  ComplexMatrix zf_unit;        // pseudo-inverse with unit-norm columns
  ComplexVector common_dir;     // dominant right singular vector of h_est
  ThpFilters dthp;
  ThpFilters cthp;
  ComplexMatrix dthp_unit;      // F B_d^-1
  ComplexMatrix cthp_unit;      // F G B_c^-1
};

PrecoderBasis MakePrecoderBasis(const ComplexMatrix& h_est);

struct PrecoderSet {
  SchemeTag scheme;
  std::optional<ComplexVector> p_common;
  ComplexMatrix p_private;  // N_t x K, column k = p_k
  // p_private with beta removed (F B^-1 or F G B^-1); the unit-norm ZF
  // directions for the linear scheme.
  ComplexMatrix p_unit;
  std::optional<ComplexMatrix> F;
  std::optional<RealVector> G;
  std::optional<ComplexMatrix> B;
  std::optional<double> beta;
  double lambda = 1.0;
  std::optional<LqFactors> lq;
  double power_split = 0.0;
  double e_tr = 0.0;

  double CommonPower() const {
    return p_common ? p_common->squaredNorm() : 0.0;
  }
};

// Builds the precoders of `scheme` for a downlink estimate. `lambda` is the
// THP power-loss factor; linear and ZF-DPC schemes always use 1.
// `power_split` is |p_c|^2 / E_tr and must be 0 for schemes without RS.
PrecoderSet BuildPrecoderSet(const PrecoderBasis& basis, SchemeTag scheme,
                             double e_tr, double lambda, double power_split);
PrecoderSet BuildPrecoderSet(const ComplexMatrix& h_est, SchemeTag scheme,
                             double e_tr, double lambda, double power_split);

// Average transmit power |p_c|^2 + E|x_private|^2. THP streams leave the
// modulo with power 1/lambda, so x = P B w has power |P B|_F^2 / lambda.
double TransmitPower(const PrecoderSet& set);

}  // namespace thprs
