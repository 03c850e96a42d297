#pragma once

#include <complex>

#include <Eigen/Dense>

namespace thprs {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Factors of A = L * Q for a K x N matrix A with K <= N.
struct LqFactors {
  ComplexMatrix L;  // K x K lower triangular, real positive diagonal
  ComplexMatrix Q;  // K x N with orthonormal rows
  RealVector diag;  // l_kk, k = 0..K-1
};

// LQ decomposition via Householder QR of A^H. Each l_kk is made real
// positive; its phase is moved into the matching row of Q, so identical
// inputs give bit-identical factors.
//
// Throws Error(kDimensionMismatch) if rows > cols, Error(kRankDeficient) if
// the smallest singular value is below 1e-10 of the largest, and
// Error(kNonFinite) on NaN/Inf entries.
LqFactors LqDecompose(const ComplexMatrix& a);

// Right inverse A^H (A A^H)^-1 of a full-row-rank K x N matrix.
ComplexMatrix PseudoInverse(const ComplexMatrix& a);

// Unit vector maximizing |A v|, by power iteration on A^H A from the
// normalized all-ones vector. The first non-negligible component is made
// real positive. For (near-)equal leading singular values the result is
// whatever the fixed start vector converges to.
ComplexVector DominantRightSingularVector(const ComplexMatrix& a);

// Relative reconstruction error |L Q - A|_F / |A|_F.
double ReconstructionError(const LqFactors& lq, const ComplexMatrix& a);

}  // namespace thprs
