#include <cmath>

#include "doctest.h"
#include "test_util.h"
#include "thprs/error.h"
#include "thprs/rates.h"

using namespace thprs;
using thprs::testing::RandomMatrix;

namespace {

const double kEtr = std::pow(10.0, 1.5);
const SchemeTag kDthp{BaseScheme::kDthp, false};
const SchemeTag kCthp{BaseScheme::kCthp, false};
const SchemeTag kZf{BaseScheme::kZfLinear, false};

double Rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("identity channel perfect csit") {
  const ComplexMatrix id = ComplexMatrix::Identity(4, 4);
  SinrReport r =
      SinrPerfectCsit(BuildPrecoderSet(id, kDthp, 4, 1, 0), id, 1.0);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(r.private_sinr(k) - 1) < 1e-12);
  CHECK(!r.common_sinr.has_value());
  r = SinrPerfectCsit(BuildPrecoderSet(id, kDthp, 4, 0.75, 0), id, 1.0);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(r.private_sinr(k) - 0.75) < 1e-12);
  }
  r = SinrPerfectCsit(BuildPrecoderSet(id, kCthp, 4, 1, 0), id, 1.0);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(r.private_sinr(k) - 1) < 1e-12);
}

TEST_CASE("perfect csit closed forms on a random channel") {
  const ComplexMatrix h = RandomMatrix(4, 4, 3);
  const LqFactors lq = LqDecompose(h);
  double inv = 0;
  for (int k = 0; k < 4; ++k) inv += 1 / (lq.diag(k) * lq.diag(k));
  const SinrReport d =
      SinrPerfectCsit(BuildPrecoderSet(h, kDthp, kEtr, 0.75, 0), h, 1.0);
  const SinrReport c =
      SinrPerfectCsit(BuildPrecoderSet(h, kCthp, kEtr, 0.75, 0), h, 1.0);
  for (int k = 0; k < 4; ++k) {
    const double l2 = lq.diag(k) * lq.diag(k);
    CHECK(Rel(d.private_sinr(k), 0.75 * kEtr * l2 / 4) < 1e-12);
    CHECK(Rel(c.private_sinr(k), 0.75 * kEtr / inv) < 1e-12);
  }
}

TEST_CASE("zf linear has no interference") {
  const ComplexMatrix h = RandomMatrix(4, 4, 4);
  const PrecoderSet set = BuildPrecoderSet(h, kZf, kEtr, 1, 0);
  const SinrReport r = SinrLinear(set, h, 1.0);
  CHECK(!r.common_sinr.has_value());
  for (int k = 0; k < 4; ++k) {
    const double desired = std::norm((h.row(k) * set.p_private.col(k)).value());
    CHECK(Rel(r.private_sinr(k), desired / 1.0) < 1e-9);
  }
}

TEST_CASE("linear common sinr against term-by-term accumulation") {
  const ComplexMatrix h = RandomMatrix(4, 4, 5);
  const ComplexMatrix h_true = h + 0.3 * RandomMatrix(4, 4, 6);
  const PrecoderSet set =
      BuildPrecoderSet(h, {BaseScheme::kZfLinear, true}, kEtr, 1, 0.5);
  const SinrReport r = SinrLinear(set, h_true, 1.0);
  REQUIRE(r.common_sinr.has_value());
  for (int k = 0; k < 4; ++k) {
    double interference = 1.0;
    double all = 1.0;
    for (int i = 0; i < 4; ++i) {
      const double term = std::norm((h_true.row(k) * set.p_private.col(i)).value());
      all += term;
      if (i != k) interference += term;
    }
    const double desired = std::norm((h_true.row(k) * set.p_private.col(k)).value());
    const double common =
        std::norm((h_true.row(k) * (*set.p_common)).value());
    CHECK(std::abs(r.private_sinr(k) - desired / interference) <
          1e-12 * (1 + desired / interference));
    CHECK(std::abs((*r.common_sinr)(k) - common / all) <
          1e-12 * (1 + common / all));
  }
}

TEST_CASE("imperfect csit against an independently coded sum") {
  const ComplexMatrix h = RandomMatrix(4, 4, 7);
  const ComplexMatrix e = std::sqrt(0.2) * RandomMatrix(4, 4, 8);
  const LqFactors lq = LqDecompose(h);
  double inv = 0;
  for (int k = 0; k < 4; ++k) inv += 1 / (lq.diag(k) * lq.diag(k));
  for (const SchemeTag s : {SchemeTag{BaseScheme::kDthp, true},
                            SchemeTag{BaseScheme::kCthp, true}}) {
    const PrecoderSet set = BuildPrecoderSet(h, s, kEtr, 0.75, 0.2);
    const SinrReport r = SinrImperfectCsit(set, h, e, 1.0);
    const double p = 0.8 * kEtr;
    const double beta = *set.beta;
    for (int k = 0; k < 4; ++k) {
      const double l = lq.diag(k);
      // beta-free precoder columns: p_i / beta.
      double cross = 0;
      Complex self = 0;
      for (int i = 0; i < 4; ++i) {
        Complex gi = 0;
        for (int n = 0; n < 4; ++n) {
          gi += e(k, n) * set.p_private(n, i) / beta;
        }
        if (i == k) {
          self = gi;
        } else {
          cross += std::norm(gi);
        }
      }
      double expect;
      double expect_c;
      Complex hc = 0;
      for (int n = 0; n < 4; ++n) hc += (h(k, n) + e(k, n)) * (*set.p_common)(n);
      if (s.base == BaseScheme::kDthp) {
        expect = std::norm(1.0 + self / (l * l)) /
                 (cross / (l * l) + 4.0 / (0.75 * p * l * l));
        expect_c = (std::norm(hc) / (beta * beta)) /
                   (std::norm(l + self) + cross + 1 / (beta * beta));
      } else {
        expect = std::norm(1.0 + self) / (cross + inv / (0.75 * p));
        expect_c = (std::norm(hc) / (beta * beta)) /
                   (std::norm(1.0 + self) + cross + 1 / (beta * beta));
      }
      CHECK(Rel(r.private_sinr(k), expect) < 1e-12);
      CHECK(Rel((*r.common_sinr)(k), expect_c) < 1e-12);
    }
  }
}

TEST_CASE("zero error reduces to perfect csit for every scheme") {
  const ComplexMatrix h = RandomMatrix(4, 4, 9);
  const ComplexMatrix zero = ComplexMatrix::Zero(4, 4);
  for (const SchemeTag& s : SchemeTag::All()) {
    for (double t : {0.0, 0.2}) {
      if (!s.rs && t > 0) continue;
      const PrecoderSet set = BuildPrecoderSet(h, s, kEtr, 0.75, t);
      const SinrReport perfect = s.IsThpFamily() ? SinrPerfectCsit(set, h, 1.0)
                                                 : SinrLinear(set, h, 1.0);
      const SinrReport imperfect = EvaluateSinr(set, h, zero, 1.0);
      const RateReport a = RatesFromSinr(perfect);
      const RateReport b = RatesFromSinr(imperfect);
      CHECK((a.private_rates - b.private_rates).cwiseAbs().maxCoeff() < 1e-12);
      if (t == 0.0) {
        CHECK(std::abs(a.sum_rate - b.sum_rate) < 1e-12);
      }
    }
  }
}

TEST_CASE("t = 0 makes every RS scheme equal its base scheme") {
  const ComplexMatrix h = RandomMatrix(4, 4, 10);
  const ComplexMatrix e = std::sqrt(0.2) * RandomMatrix(4, 4, 11);
  for (const SchemeTag& s : SchemeTag::All()) {
    if (!s.rs) continue;
    const RateReport a = RatesFromSinr(
        EvaluateSinr(BuildPrecoderSet(h, s, kEtr, 0.75, 0), h, e, 1.0));
    const RateReport b = RatesFromSinr(EvaluateSinr(
        BuildPrecoderSet(h, s.WithoutRs(), kEtr, 0.75, 0), h, e, 1.0));
    CHECK(std::abs(a.sum_rate - b.sum_rate) < 1e-12);
    CHECK(a.common_rate == 0.0);
  }
}

TEST_CASE("zf-dpc equals dthp at lambda = 1") {
  const ComplexMatrix h = RandomMatrix(4, 4, 12);
  const ComplexMatrix e = std::sqrt(0.2) * RandomMatrix(4, 4, 13);
  for (double t : {0.0, 0.3}) {
    const SchemeTag zf{BaseScheme::kZfDpc, t > 0};
    const SchemeTag d{BaseScheme::kDthp, t > 0};
    const PrecoderSet zs = BuildPrecoderSet(h, zf, kEtr, 0.75, t);
    const PrecoderSet ds = BuildPrecoderSet(h, d, kEtr, 1.0, t);
    CHECK(std::abs(RatesFromSinr(SinrPerfectCsit(zs, h, 1)).sum_rate -
                   RatesFromSinr(SinrPerfectCsit(ds, h, 1)).sum_rate) < 1e-12);
    CHECK(std::abs(RatesFromSinr(SinrImperfectCsit(zs, h, e, 1)).sum_rate -
                   RatesFromSinr(SinrImperfectCsit(ds, h, e, 1)).sum_rate) <
          1e-12);
  }
}

TEST_CASE("rates from sinr") {
  SinrReport r;
  r.private_sinr = RealVector::Ones(4);
  CHECK(std::abs(RatesFromSinr(r).sum_rate - 4) < 1e-15);
  CHECK(RatesFromSinr(r).common_rate == 0);
  RealVector c(4);
  c << 3, 1, 7, 1;
  r.common_sinr = c;
  const RateReport out = RatesFromSinr(r);
  CHECK(std::abs(out.common_rate - 1) < 1e-15);
  CHECK(std::abs(out.sum_rate - (out.common_rate + out.private_rates.sum())) <
        1e-12);
  for (int k = 0; k < 4; ++k) {
    CHECK(out.common_rate <= (*out.common_per_user)(k));
  }
}

TEST_CASE("perfect csit monotone in power and scheme dominance") {
  double mean_d = 0;
  double mean_c = 0;
  for (int ch = 0; ch < 50; ++ch) {
    const ComplexMatrix h = RandomMatrix(4, 4, 400 + ch);
    for (const SchemeTag& s : SchemeTag::All()) {
      if (s.rs) continue;
      double prev = -1;
      for (double db = 0; db <= 30; db += 5) {
        const PrecoderSet set =
            BuildPrecoderSet(h, s, std::pow(10, db / 10), 0.75, 0);
        const double rate = RatesFromSinr(EvaluateSinr(
            set, h, ComplexMatrix::Zero(4, 4), 1.0)).sum_rate;
        CHECK(rate >= prev);
        prev = rate;
      }
    }
    const double d = RatesFromSinr(SinrPerfectCsit(
        BuildPrecoderSet(h, kDthp, kEtr, 0.75, 0), h, 1)).sum_rate;
    const double z = RatesFromSinr(SinrPerfectCsit(
        BuildPrecoderSet(h, {BaseScheme::kZfDpc, false}, kEtr, 0.75, 0), h, 1))
                         .sum_rate;
    CHECK(z >= d);
    mean_d += d / 50;
    mean_c += RatesFromSinr(SinrPerfectCsit(
        BuildPrecoderSet(h, kCthp, kEtr, 0.75, 0), h, 1)).sum_rate / 50;
  }
  CHECK(mean_d >= mean_c);
}

TEST_CASE("monte carlo matches perfect csit private closed forms") {
  for (int ch = 0; ch < 3; ++ch) {
    const ComplexMatrix h = RandomMatrix(4, 4, 500 + ch);
    const ComplexMatrix zero = ComplexMatrix::Zero(4, 4);
    for (const SchemeTag& s : SchemeTag::All()) {
      const PrecoderSet set =
          BuildPrecoderSet(h, s, kEtr, 0.75, s.rs ? 0.2 : 0.0);
      const SinrReport closed = EvaluateSinr(set, h, zero, 1.0);
      const MonteCarloSinr mc =
          EstimateSinrMonteCarlo(set, h, zero, 1.0, 100000, 7 + ch);
      for (int k = 0; k < 4; ++k) {
        CHECK(Rel(mc.report.private_sinr(k), closed.private_sinr(k)) < 0.05);
        CHECK(mc.private_rel_stderr(k) <= 0.02);
      }
      if (!s.IsThpFamily() || s.base == BaseScheme::kZfDpc) {
        // No lambda placement issue: common streams agree too.
        if (closed.common_sinr) {
          for (int k = 0; k < 4; ++k) {
            CHECK(Rel((*mc.report.common_sinr)(k), (*closed.common_sinr)(k)) <
                  0.05);
          }
        }
      }
    }
  }
}

TEST_CASE("comparison flags gaps beyond tolerance") {
  SinrReport a;
  a.private_sinr = RealVector::Constant(2, 10.0);
  SinrReport b = a;
  b.private_sinr(1) = 12.0;
  const SinrComparison cmp = CompareSinr(a, b, 0.05);
  CHECK(!cmp.within_tolerance);
  CHECK(std::abs(cmp.max_abs_gap - 0.2) < 1e-12);
  CHECK(!cmp.annotation.empty());
  CHECK(CompareSinr(a, a, 0.05).within_tolerance);
}

TEST_CASE("zero noise saturates at the cap") {
  const ComplexMatrix h = RandomMatrix(4, 4, 14);
  const SinrReport r =
      SinrPerfectCsit(BuildPrecoderSet(h, kDthp, kEtr, 0.75, 0), h, 0.0);
  CHECK(r.saturated);
  for (int k = 0; k < 4; ++k) CHECK(r.private_sinr(k) == kSinrCap);
  const MonteCarloSinr mc = EstimateSinrMonteCarlo(
      BuildPrecoderSet(h, kDthp, kEtr, 0.75, 0), h, ComplexMatrix::Zero(4, 4),
      0.0, 1000, 1);
  CHECK(mc.report.saturated);
  for (int k = 0; k < 4; ++k) CHECK(mc.report.private_sinr(k) == kSinrCap);
  CHECK(std::isfinite(RatesFromSinr(r).sum_rate));
}
