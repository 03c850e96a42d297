#include "thprs/rates.h"

#include <cmath>
#include <sstream>

#include "thprs/channel.h"
#include "thprs/error.h"

namespace thprs {
namespace {

double Ratio(double num, double den, bool& saturated) {
  if (!(den > 0.0) || num >= kSinrCap * den) {
    saturated = true;
    return kSinrCap;
  }
  return num / den;
}

void RequireThp(const PrecoderSet& set) {
  if (!set.scheme.IsThpFamily()) {
    throw Error(ErrorKind::kSchemeMismatch,
                "closed form needs a THP-family set, got " + set.scheme.Name());
  }
}

double SumInverseSquares(const LqFactors& lq) {
  return lq.diag.array().square().inverse().sum();
}

}  // namespace

SinrReport SinrPerfectCsit(const PrecoderSet& set, const ComplexMatrix& h_est,
                           double sigma_n2) {
  RequireThp(set);
  const LqFactors& lq = *set.lq;
  const Eigen::Index k_users = lq.diag.size();
  const double users = static_cast<double>(k_users);
  const double lambda = set.lambda;
  const double private_power = set.e_tr - set.CommonPower();
  const double inv_sq_sum = SumInverseSquares(lq);
  const bool centralized = set.scheme.Structure() == ThpStructure::kCentralized;

  SinrReport r;
  r.scheme = set.scheme;
  r.csit = CsitKind::kPerfect;
  r.private_sinr.resize(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    const double l2 = lq.diag(k) * lq.diag(k);
    r.private_sinr(k) =
        centralized
            ? Ratio(lambda * private_power, sigma_n2 * inv_sq_sum, r.saturated)
            : Ratio(lambda * private_power * l2, users * sigma_n2,
                    r.saturated);
  }
  if (set.p_common) {
    const ComplexVector hp = h_est * (*set.p_common);
    RealVector common(k_users);
    for (Eigen::Index k = 0; k < k_users; ++k) {
      const double gain = std::norm(hp(k));
      const double l2 = lq.diag(k) * lq.diag(k);
      common(k) =
          centralized
              ? Ratio(inv_sq_sum * gain,
                      lambda * private_power + sigma_n2 * inv_sq_sum,
                      r.saturated)
              : Ratio(users * gain, lambda * l2 * private_power +
                                        users * sigma_n2,
                      r.saturated);
    }
    r.common_sinr = std::move(common);
  }
  return r;
}

SinrReport SinrLinear(const PrecoderSet& set, const ComplexMatrix& h_true,
                      double sigma_n2) {
  if (set.scheme.base != BaseScheme::kZfLinear) {
    throw Error(ErrorKind::kSchemeMismatch,
                "linear SINR needs a linear set, got " + set.scheme.Name());
  }
  const Eigen::Index k_users = h_true.rows();
  const ComplexMatrix hp = h_true * set.p_private;  // (k, i) = h_k^H p_i
  SinrReport r;
  r.scheme = set.scheme;
  r.private_sinr.resize(k_users);
  RealVector private_interference(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    double interference = sigma_n2;
    for (Eigen::Index i = 0; i < k_users; ++i) {
      if (i != k) interference += std::norm(hp(k, i));
    }
    private_interference(k) = interference;
    r.private_sinr(k) = Ratio(std::norm(hp(k, k)), interference, r.saturated);
  }
  if (set.p_common) {
    const ComplexVector hc = h_true * (*set.p_common);
    RealVector common(k_users);
    for (Eigen::Index k = 0; k < k_users; ++k) {
      common(k) = Ratio(std::norm(hc(k)),
                        std::norm(hp(k, k)) + private_interference(k),
                        r.saturated);
    }
    r.common_sinr = std::move(common);
  }
  return r;
}

SinrReport SinrImperfectCsit(const PrecoderSet& set, const ComplexMatrix& h_est,
                             const ComplexMatrix& h_err, double sigma_n2) {
  RequireThp(set);
  if (h_err.rows() != h_est.rows() || h_err.cols() != h_est.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "error realization must match the channel dimensions");
  }
  const LqFactors& lq = *set.lq;
  const Eigen::Index k_users = lq.diag.size();
  const double users = static_cast<double>(k_users);
  const double lambda = set.lambda;
  const double private_power = set.e_tr - set.CommonPower();
  const double inv_sq_sum = SumInverseSquares(lq);
  const double beta2 = (*set.beta) * (*set.beta);
  const bool centralized = set.scheme.Structure() == ThpStructure::kCentralized;

  const ComplexMatrix g = h_err * set.p_unit;  // (k, i) = h_{e,k}^H p~_i

  SinrReport r;
  r.scheme = set.scheme;
  r.csit = CsitKind::kImperfect;
  r.private_sinr.resize(k_users);
  RealVector leakage(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    double cross = 0.0;
    for (Eigen::Index i = 0; i < k_users; ++i) {
      if (i != k) cross += std::norm(g(k, i));
    }
    leakage(k) = cross;
    const double l2 = lq.diag(k) * lq.diag(k);
    if (centralized) {
      r.private_sinr(k) = Ratio(
          std::norm(1.0 + g(k, k)),
          cross + sigma_n2 * inv_sq_sum / (lambda * private_power),
          r.saturated);
    } else {
      r.private_sinr(k) = Ratio(
          std::norm(1.0 + g(k, k) / l2),
          cross / l2 + users * sigma_n2 / (lambda * private_power * l2),
          r.saturated);
    }
  }
  if (set.p_common) {
    const ComplexVector hc = (h_est + h_err) * (*set.p_common);
    RealVector common(k_users);
    for (Eigen::Index k = 0; k < k_users; ++k) {
      const Complex self =
          centralized ? 1.0 + g(k, k) : lq.diag(k) + g(k, k);
      common(k) = Ratio(std::norm(hc(k)) / beta2,
                        std::norm(self) + leakage(k) + sigma_n2 / beta2,
                        r.saturated);
    }
    r.common_sinr = std::move(common);
  }
  return r;
}

SinrReport EvaluateSinr(const PrecoderSet& set, const ComplexMatrix& h_est,
                        const ComplexMatrix& h_err, double sigma_n2) {
  if (set.scheme.base == BaseScheme::kZfLinear) {
    SinrReport r = SinrLinear(set, h_est + h_err, sigma_n2);
    r.csit = CsitKind::kImperfect;
    return r;
  }
  return SinrImperfectCsit(set, h_est, h_err, sigma_n2);
}

RateReport RatesFromSinr(const SinrReport& report) {
  RateReport out;
  out.private_rates = report.private_sinr.unaryExpr(
      [](double g) { return std::log2(1.0 + g); });
  out.sum_rate = out.private_rates.sum();
  if (report.common_sinr) {
    out.common_per_user = report.common_sinr->unaryExpr(
        [](double g) { return std::log2(1.0 + g); });
    out.common_rate = out.common_per_user->minCoeff();
    out.sum_rate += out.common_rate;
  }
  return out;
}

MonteCarloSinr EstimateSinrMonteCarlo(const PrecoderSet& set,
                                      const ComplexMatrix& h_est,
                                      const ComplexMatrix& h_err,
                                      double sigma_n2, int n_samples,
                                      std::uint64_t seed) {
  const Eigen::Index k_users = h_est.rows();
  const ComplexMatrix h_true = h_est + h_err;

  RealVector scale = RealVector::Ones(k_users);
  double perturbation_var = 0.0;
  if (set.scheme.IsThpFamily()) {
    const double beta = *set.beta;
    for (Eigen::Index k = 0; k < k_users; ++k) {
      scale(k) = set.scheme.Structure() == ThpStructure::kDecentralized
                     ? 1.0 / (beta * set.lq->diag(k))
                     : 1.0 / beta;
    }
    perturbation_var = 1.0 / set.lambda - 1.0;
  }
  const ComplexMatrix c_private =
      scale.cast<Complex>().asDiagonal() * (h_true * set.p_private);
  ComplexVector c_common = ComplexVector::Zero(k_users);
  if (set.p_common) {
    c_common = scale.cast<Complex>().cwiseProduct(h_true * (*set.p_common));
  }

  Engine engine(DeriveSeed(seed, StreamTag::kMonteCarlo));
  // Per-user running sums of |desired|^2, |residual|^2 and their squares.
  RealVector p_des = RealVector::Zero(k_users), p_res = p_des;
  RealVector p_des2 = p_des, p_res2 = p_des;
  RealVector c_des = p_des, c_res = p_des, c_des2 = p_des, c_res2 = p_des;

  ComplexVector s(k_users), d(k_users), v(k_users), n(k_users);
  for (int t = 0; t < n_samples; ++t) {
    const Complex s_c = DrawComplexGaussian(engine, 1.0);
    for (Eigen::Index i = 0; i < k_users; ++i) {
      s(i) = DrawComplexGaussian(engine, 1.0);
      d(i) = perturbation_var > 0.0
                 ? DrawComplexGaussian(engine, perturbation_var)
                 : Complex(0.0, 0.0);
      n(i) = DrawComplexGaussian(engine, sigma_n2);
    }
    v = s + d;
    const ComplexVector private_rx = c_private * v;
    for (Eigen::Index k = 0; k < k_users; ++k) {
      const Complex noise = scale(k) * n(k);
      const Complex desired = c_private(k, k) * s(k);
      const Complex residual = private_rx(k) - desired - d(k) + noise;
      const double a = std::norm(desired), b = std::norm(residual);
      p_des(k) += a;
      p_res(k) += b;
      p_des2(k) += a * a;
      p_res2(k) += b * b;
      if (set.p_common) {
        const Complex common = c_common(k) * s_c;
        const Complex common_res = private_rx(k) + noise;
        const double ca = std::norm(common), cb = std::norm(common_res);
        c_des(k) += ca;
        c_res(k) += cb;
        c_des2(k) += ca * ca;
        c_res2(k) += cb * cb;
      }
    }
  }

  const double count = static_cast<double>(n_samples);
  auto rel_stderr = [count](double sum, double sum2) {
    if (sum <= 0.0) return 0.0;
    const double mean = sum / count;
    const double var = std::max(sum2 / count - mean * mean, 0.0);
    return std::sqrt(var / count) / mean;
  };

  MonteCarloSinr out;
  out.report.scheme = set.scheme;
  out.report.csit = h_err.cwiseAbs().maxCoeff() > 0.0 ? CsitKind::kImperfect
                                                      : CsitKind::kPerfect;
  out.report.private_sinr.resize(k_users);
  out.private_rel_stderr.resize(k_users);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    out.report.private_sinr(k) = Ratio(p_des(k), p_res(k), out.report.saturated);
    out.private_rel_stderr(k) =
        std::hypot(rel_stderr(p_des(k), p_des2(k)),
                   rel_stderr(p_res(k), p_res2(k)));
  }
  if (set.p_common) {
    RealVector common(k_users), err(k_users);
    for (Eigen::Index k = 0; k < k_users; ++k) {
      common(k) = Ratio(c_des(k), c_res(k), out.report.saturated);
      err(k) = std::hypot(rel_stderr(c_des(k), c_des2(k)),
                          rel_stderr(c_res(k), c_res2(k)));
    }
    out.report.common_sinr = std::move(common);
    out.common_rel_stderr = std::move(err);
  }
  return out;
}

SinrComparison CompareSinr(const SinrReport& closed_form,
                           const SinrReport& estimate, double tolerance) {
  SinrComparison cmp;
  auto gaps = [&cmp](const RealVector& ref, const RealVector& est) {
    RealVector g = (est - ref).cwiseQuotient(ref);
    cmp.max_abs_gap = std::max(cmp.max_abs_gap, g.cwiseAbs().maxCoeff());
    return g;
  };
  cmp.private_gap = gaps(closed_form.private_sinr, estimate.private_sinr);
  if (closed_form.common_sinr && estimate.common_sinr) {
    cmp.common_gap = gaps(*closed_form.common_sinr, *estimate.common_sinr);
  }
  cmp.within_tolerance = cmp.max_abs_gap <= tolerance;
  if (!cmp.within_tolerance) {
    std::ostringstream os;
    os << closed_form.scheme.Name() << ": signal-model SINR deviates from the "
       << "closed form by up to " << 100.0 * cmp.max_abs_gap << "% (tolerance "
       << 100.0 * tolerance << "%)";
    cmp.annotation = os.str();
  }
  return cmp;
}

}  // namespace thprs
