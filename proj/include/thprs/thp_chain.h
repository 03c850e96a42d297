#pragma once

#include <cstdint>

#include "thprs/channel.h"
#include "thprs/linalg.h"
#include "thprs/precoder.h"

namespace thprs {

enum class Constellation { kQam4, kQam16, kQam64 };

int ConstellationOrder(Constellation c);

// Square lattice tau (Z + jZ) used by the modulo operator.
struct ModuloLattice {
  double tau = 2.0;

  // tau = spacing * sqrt(M) for unit-energy square M-QAM.
  static ModuloLattice ForConstellation(Constellation c);
};

// Reduces real and imaginary parts independently into [-tau/2, tau/2).
Complex ModuloReduce(Complex z, const ModuloLattice& lattice);

// Uniformly drawn unit-energy square QAM symbols.
ComplexVector DrawQamSymbols(Constellation c, Eigen::Index count,
                             Engine& engine);

struct ThpEncoding {
  ComplexVector w;  // feedback outputs
  ComplexVector d;  // lattice perturbation, B w = s + d
};

// Successive feedback w_k = mod(s_k - sum_{i<k} b_ki w_i). Stream 0 has no
// feedback and is passed through unwrapped, so d_0 = 0.
// Throws Error(kNonUnitDiagonal) unless |b_kk - 1| < 1e-12.
ThpEncoding ThpEncode(const ComplexVector& s, const ComplexMatrix& b,
                      const ModuloLattice& lattice);

struct ChainTrace {
  ComplexVector s;
  ComplexVector v;
  ComplexVector d;
  ComplexVector w;
  ComplexVector x;
  ComplexVector received;  // after the structure's receive scaling
};

// Encodes s, precodes the private streams (x = beta F w for dTHP,
// beta F G w for cTHP), passes x through h_true plus noise and applies the
// receive scaling (G / beta for dTHP, 1 / beta for cTHP). The common stream
// of an RS set is not transmitted. `receiver_beta_scale` multiplies the beta
// assumed by the receivers; values other than 1 model a mismatched receiver.
// Throws Error(kSchemeMismatch) for non-THP sets.
ChainTrace RunPerfectCsitChain(const PrecoderSet& set,
                               const ComplexMatrix& h_true,
                               const ComplexVector& noise,
                               const ComplexVector& s,
                               const ModuloLattice& lattice,
                               double receiver_beta_scale = 1.0);

// lambda_hat = E|s|^2 / E|w|^2 over the precoded streams 1..K-1 (stream 0 is
// never wrapped and carries no power loss). Draws n_symbols symbols per
// stream.
double MeasurePowerLoss(Constellation constellation, const ComplexMatrix& b,
                        const ModuloLattice& lattice, int n_symbols,
                        std::uint64_t seed);

}  // namespace thprs
