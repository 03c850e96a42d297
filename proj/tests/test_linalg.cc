#include <cmath>

#include "doctest.h"
#include "test_util.h"
#include "thprs/error.h"
#include "thprs/linalg.h"

using namespace thprs;
using thprs::testing::RandomMatrix;

namespace {

// Classical Gram-Schmidt on the rows of A: row k of Q is the normalized
// residual of a_k against q_0..q_{k-1}, and l_ki = <a_k, q_i>.
LqFactors GramSchmidtLq(const ComplexMatrix& a) {
  const Eigen::Index k = a.rows();
  LqFactors out{ComplexMatrix::Zero(k, k), ComplexMatrix::Zero(k, a.cols()),
                RealVector::Zero(k)};
  for (Eigen::Index r = 0; r < k; ++r) {
    Eigen::RowVectorXcd v = a.row(r);
    for (Eigen::Index i = 0; i < r; ++i) {
      const Complex c = a.row(r).dot(out.Q.row(i));  // conj(a) . q
      out.L(r, i) = std::conj(c);
      v -= out.L(r, i) * out.Q.row(i);
    }
    const double n = v.norm();
    out.L(r, r) = n;
    out.diag(r) = n;
    out.Q.row(r) = v / n;
  }
  return out;
}

}  // namespace

TEST_CASE("lq of identity and of a lower triangular matrix") {
  const LqFactors id = LqDecompose(ComplexMatrix::Identity(2, 2));
  CHECK((id.L - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
  CHECK((id.Q - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);

  ComplexMatrix a(2, 2);
  a << 2, 0, 1, 1;
  const LqFactors f = LqDecompose(a);
  CHECK((f.L - a).norm() < 1e-14);
  CHECK((f.Q - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("lq matches a Gram-Schmidt oracle") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const ComplexMatrix a = RandomMatrix(4, 4, seed);
    const LqFactors f = LqDecompose(a);
    const LqFactors g = GramSchmidtLq(a);
    CHECK((f.L - g.L).norm() < 1e-10);
    CHECK((f.Q - g.Q).norm() < 1e-10);
    for (int k = 0; k < 4; ++k) {
      CHECK(f.diag(k) > 0.0);
      CHECK(std::abs(f.L(k, k).imag()) < 1e-12);
      for (int j = k + 1; j < 4; ++j) CHECK(std::abs(f.L(k, j)) < 1e-12);
    }
    CHECK((f.Q * f.Q.adjoint() - ComplexMatrix::Identity(4, 4)).norm() <
          1e-10);
  }
}

TEST_CASE("lq of a wide matrix") {
  const ComplexMatrix a = RandomMatrix(3, 5, 21);
  const LqFactors f = LqDecompose(a);
  CHECK(f.L.rows() == 3);
  CHECK(f.Q.cols() == 5);
  CHECK(ReconstructionError(f, a) < 1e-10);
  CHECK((f.Q * f.Q.adjoint() - ComplexMatrix::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("lq reconstruction over 1000 random matrices") {
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ComplexMatrix a = RandomMatrix(4, 4, 1000 + i);
    worst = std::max(worst, ReconstructionError(LqDecompose(a), a));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("lq is bitwise deterministic") {
  const ComplexMatrix a = RandomMatrix(4, 4, 5);
  const LqFactors x = LqDecompose(a);
  const LqFactors y = LqDecompose(a);
  CHECK(x.L == y.L);
  CHECK(x.Q == y.Q);
  CHECK(x.diag == y.diag);
}

TEST_CASE("lq preconditions") {
  try {
    LqDecompose(RandomMatrix(5, 4, 1));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDimensionMismatch);
  }
  ComplexMatrix a = RandomMatrix(3, 4, 2);
  a.row(2) = a.row(0) + a.row(1);
  try {
    LqDecompose(a);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kRankDeficient);
  }
  a = RandomMatrix(2, 2, 3);
  a(0, 1) = std::nan("");
  try {
    LqDecompose(a);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNonFinite);
  }
}

TEST_CASE("pseudo inverse examples") {
  CHECK((PseudoInverse(ComplexMatrix::Identity(4, 4)) -
         ComplexMatrix::Identity(4, 4))
            .norm() < 1e-14);
  ComplexMatrix a(2, 2);
  a << 2, 0, 0, 4;
  ComplexMatrix expect(2, 2);
  expect << 0.5, 0, 0, 0.25;
  CHECK((PseudoInverse(a) - expect).norm() < 1e-14);

  const ComplexMatrix r = RandomMatrix(4, 4, 7);
  CHECK((r * PseudoInverse(r) - ComplexMatrix::Identity(4, 4)).norm() < 1e-9);
  const ComplexMatrix w = RandomMatrix(3, 6, 8);
  CHECK((w * PseudoInverse(w) - ComplexMatrix::Identity(3, 3)).norm() < 1e-9);
}

TEST_CASE("pseudo inverse residual whenever condition number < 1e6") {
  for (int i = 0; i < 200; ++i) {
    const ComplexMatrix a = RandomMatrix(4, 4, 5000 + i);
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    const auto s = svd.singularValues();
    if (s(0) / s(s.size() - 1) >= 1e6) continue;
    CHECK((a * PseudoInverse(a) - ComplexMatrix::Identity(4, 4)).norm() <
          1e-9);
  }
}

TEST_CASE("dominant right singular vector") {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 0) = 3;
  a(1, 1) = 1;
  ComplexVector v = DominantRightSingularVector(a);
  CHECK(std::abs(v(0) - Complex(1, 0)) < 1e-12);
  CHECK(std::abs(v(1)) < 1e-12);

  a(0, 0) = 1;
  a(1, 1) = 5;
  v = DominantRightSingularVector(a);
  CHECK(std::abs(v(0)) < 1e-12);
  CHECK(std::abs(v(1) - Complex(1, 0)) < 1e-12);

  try {
    DominantRightSingularVector(ComplexMatrix::Zero(3, 3));
    FAIL("expected ZeroMatrix");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kZeroMatrix);
  }
}

TEST_CASE("dominant singular vector against a full SVD oracle") {
  Engine eng(99);
  for (int m = 0; m < 20; ++m) {
    const ComplexMatrix a = RandomMatrix(4, 4, 300 + m);
    const ComplexVector v = DominantRightSingularVector(a);
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    CHECK(std::abs((a * v).norm() - svd.singularValues()(0)) < 1e-8);
    // First non-negligible component is real positive.
    CHECK(std::abs(v(0).imag()) < 1e-12);
    CHECK(v(0).real() > 0.0);
    const double best = (a * v).norm();
    for (int u = 0; u < 100; ++u) {
      ComplexVector x(4);
      for (int i = 0; i < 4; ++i) x(i) = DrawComplexGaussian(eng);
      x.normalize();
      CHECK(best >= (a * x).norm() - 1e-8);
    }
  }
}
