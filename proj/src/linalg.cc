#include "thprs/linalg.h"

#include <cmath>
#include <string>
#include <vector>

#include "thprs/error.h"

namespace thprs {
namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kPowerIterationTolerance = 1e-12;
constexpr int kPowerIterationMaxSteps = 10000;

void CheckFinite(const ComplexMatrix& a) {
  if (a.size() == 0) {
    throw Error(ErrorKind::kDimensionMismatch, "empty matrix");
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a.data()[i].real()) ||
        !std::isfinite(a.data()[i].imag())) {
      throw Error(ErrorKind::kNonFinite, "matrix has NaN or Inf entries");
    }
  }
}

void CheckFullRowRank(const ComplexMatrix& a) {
  if (a.rows() > a.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "expected rows <= cols, got " + std::to_string(a.rows()) +
                    "x" + std::to_string(a.cols()));
  }
  const RealVector sv = Eigen::JacobiSVD<ComplexMatrix>(a).singularValues();
  const double largest = sv(0);
  const double smallest = sv(sv.size() - 1);
  if (!(largest > 0.0) || smallest <= kRankTolerance * largest) {
    throw Error(ErrorKind::kRankDeficient,
                "smallest singular value " + std::to_string(smallest) +
                    " vs largest " + std::to_string(largest));
  }
}

// Rotates v so that its first non-negligible entry is real positive.
void FixPhase(ComplexVector& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > 1e-12 * scale) {
      v *= std::conj(v(i)) / mag;
      v(i) = Complex(mag, 0.0);
      return;
    }
  }
}

}  // namespace

LqFactors LqDecompose(const ComplexMatrix& a) {
  CheckFinite(a);
  CheckFullRowRank(a);

  const Eigen::Index k = a.rows();
  const Eigen::Index n = a.cols();

  // Householder QR of A^H (n x k), column by column.
  ComplexMatrix r = a.adjoint();
  std::vector<ComplexVector> reflectors;
  reflectors.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index len = n - j;
    ComplexVector x = r.block(j, j, len, 1);
    const double norm_x = x.norm();
    const Complex x0 = x(0);
    const Complex phase =
        std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex(1.0, 0.0);
    const Complex alpha = -phase * norm_x;
    ComplexVector v = x;
    v(0) -= alpha;
    const double norm_v = v.norm();
    if (norm_v > 0.0) {
      v /= norm_v;
      auto tail = r.block(j, j, len, k - j);
      tail -= 2.0 * v * (v.adjoint() * tail);
    }
    reflectors.push_back(std::move(v));
  }

  // Thin Q~ = H_0 H_1 ... H_{k-1} applied to the first k columns of I.
  ComplexMatrix q_thin = ComplexMatrix::Identity(n, k);
  for (Eigen::Index j = k - 1; j >= 0; --j) {
    const ComplexVector& v = reflectors[static_cast<std::size_t>(j)];
    if (v.norm() == 0.0) continue;
    const Eigen::Index len = n - j;
    auto tail = q_thin.block(j, 0, len, k);
    tail -= 2.0 * v * (v.adjoint() * tail);
  }

  // Move the phase of each r_jj into Q~ so the diagonal is real positive.
  LqFactors out;
  out.diag.resize(k);
  ComplexMatrix r_top = r.topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < k; ++j) {
    const Complex rjj = r_top(j, j);
    const double mag = std::abs(rjj);
    const Complex phase = rjj / mag;
    r_top.row(j) *= std::conj(phase);
    q_thin.col(j) *= phase;
    r_top(j, j) = Complex(mag, 0.0);
    out.diag(j) = mag;
  }

  out.L = r_top.adjoint();
  out.Q = q_thin.adjoint();
  return out;
}

ComplexMatrix PseudoInverse(const ComplexMatrix& a) {
  CheckFinite(a);
  CheckFullRowRank(a);
  const ComplexMatrix gram = a * a.adjoint();
  return a.adjoint() * gram.llt().solve(
                           ComplexMatrix::Identity(a.rows(), a.rows()));
}

ComplexVector DominantRightSingularVector(const ComplexMatrix& a) {
  CheckFinite(a);
  if (a.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorKind::kZeroMatrix, "dominant singular vector of zero");
  }
  const ComplexMatrix gram = a.adjoint() * a;
  ComplexVector v = ComplexVector::Ones(a.cols()) /
                    std::sqrt(static_cast<double>(a.cols()));
  for (int step = 0; step < kPowerIterationMaxSteps; ++step) {
    ComplexVector next = gram * v;
    const double norm = next.norm();
    if (norm == 0.0) {
      // Start vector lies in the null space; restart from a basis vector.
      v = ComplexVector::Unit(a.cols(), step % a.cols());
      continue;
    }
    next /= norm;
    FixPhase(next);
    const double change = (next - v).norm();
    v = std::move(next);
    if (change < kPowerIterationTolerance) break;
  }
  FixPhase(v);
  return v;
}

double ReconstructionError(const LqFactors& lq, const ComplexMatrix& a) {
  return (lq.L * lq.Q - a).norm() / a.norm();
}

}  // namespace thprs
