#include "thprs/thp_chain.h"

#include <cmath>
#include <string>

#include "thprs/error.h"

namespace thprs {
namespace {

// Half the spacing between adjacent unit-energy QAM levels.
double QamHalfSpacing(int order) {
  return std::sqrt(3.0 / (2.0 * (order - 1)));
}

double ReduceReal(double x, double tau) {
  double r = x - tau * std::floor(x / tau + 0.5);
  // Rounding can land exactly on +tau/2; fold it to the closed end.
  if (r >= tau / 2.0) r -= tau;
  if (r < -tau / 2.0) r += tau;
  return r;
}

}  // namespace

int ConstellationOrder(Constellation c) {
  switch (c) {
    case Constellation::kQam4: return 4;
    case Constellation::kQam16: return 16;
    case Constellation::kQam64: return 64;
  }
  return 0;
}

ModuloLattice ModuloLattice::ForConstellation(Constellation c) {
  const int order = ConstellationOrder(c);
  const double spacing = 2.0 * QamHalfSpacing(order);
  return {spacing * std::sqrt(static_cast<double>(order))};
}

Complex ModuloReduce(Complex z, const ModuloLattice& lattice) {
  return {ReduceReal(z.real(), lattice.tau), ReduceReal(z.imag(), lattice.tau)};
}

ComplexVector DrawQamSymbols(Constellation c, Eigen::Index count,
                             Engine& engine) {
  const int order = ConstellationOrder(c);
  const int levels = static_cast<int>(std::lround(std::sqrt(order)));
  const double a = QamHalfSpacing(order);
  std::uniform_int_distribution<int> pick(0, levels - 1);
  ComplexVector s(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const int re = pick(engine);
    const int im = pick(engine);
    s(i) = Complex(a * (2 * re - levels + 1), a * (2 * im - levels + 1));
  }
  return s;
}

ThpEncoding ThpEncode(const ComplexVector& s, const ComplexMatrix& b,
                      const ModuloLattice& lattice) {
  const Eigen::Index k = s.size();
  if (b.rows() != k || b.cols() != k) {
    throw Error(ErrorKind::kDimensionMismatch, "B must be K x K");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(b(i, i) - Complex(1.0, 0.0)) >= 1e-12) {
      throw Error(ErrorKind::kNonUnitDiagonal,
                  "b_kk != 1 at k=" + std::to_string(i));
    }
  }
  ThpEncoding out;
  out.w.resize(k);
  out.d = ComplexVector::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    Complex pre = s(i);
    for (Eigen::Index j = 0; j < i; ++j) pre -= b(i, j) * out.w(j);
    if (i == 0) {
      out.w(i) = pre;
      continue;
    }
    out.w(i) = ModuloReduce(pre, lattice);
    // The wrap is an exact lattice point; store it as tau * integer.
    const Complex shift = (out.w(i) - pre) / lattice.tau;
    out.d(i) = lattice.tau * Complex(std::round(shift.real()),
                                     std::round(shift.imag()));
  }
  return out;
}

ChainTrace RunPerfectCsitChain(const PrecoderSet& set,
                               const ComplexMatrix& h_true,
                               const ComplexVector& noise,
                               const ComplexVector& s,
                               const ModuloLattice& lattice,
                               double receiver_beta_scale) {
  if (set.scheme.base != BaseScheme::kCthp &&
      set.scheme.base != BaseScheme::kDthp) {
    throw Error(ErrorKind::kSchemeMismatch,
                "symbol chain needs a cTHP or dTHP set, got " +
                    set.scheme.Name());
  }
  const ThpEncoding enc = ThpEncode(s, *set.B, lattice);
  ChainTrace t;
  t.s = s;
  t.d = enc.d;
  t.v = s + enc.d;
  t.w = enc.w;
  // P B = beta F (dTHP) or beta F G (cTHP).
  t.x = set.p_private * (*set.B) * enc.w;
  const ComplexVector y = h_true * t.x + noise;
  const double beta = *set.beta * receiver_beta_scale;
  if (set.scheme.base == BaseScheme::kDthp) {
    t.received = set.G->cast<Complex>().cwiseProduct(y) / beta;
  } else {
    t.received = y / beta;
  }
  return t;
}

double MeasurePowerLoss(Constellation constellation, const ComplexMatrix& b,
                        const ModuloLattice& lattice, int n_symbols,
                        std::uint64_t seed) {
  const Eigen::Index k = b.rows();
  if (k < 2) {
    throw Error(ErrorKind::kDimensionMismatch,
                "power loss needs at least two streams");
  }
  Engine engine(DeriveSeed(seed, StreamTag::kSymbols));
  double symbol_energy = 0.0;
  double output_energy = 0.0;
  for (int n = 0; n < n_symbols; ++n) {
    const ComplexVector s = DrawQamSymbols(constellation, k, engine);
    const ThpEncoding enc = ThpEncode(s, b, lattice);
    symbol_energy += s.tail(k - 1).squaredNorm();
    output_energy += enc.w.tail(k - 1).squaredNorm();
  }
  return symbol_energy / output_energy;
}

}  // namespace thprs
