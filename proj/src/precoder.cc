#include "thprs/precoder.h"

#include <array>
#include <cmath>
#include <string>

#include "thprs/error.h"

namespace thprs {
namespace {

struct NamedScheme {
  std::string_view name;
  SchemeTag tag;
};

constexpr std::array<NamedScheme, 8> kSchemes = {{
    {"zf", {BaseScheme::kZfLinear, false}},
    {"rs-linear", {BaseScheme::kZfLinear, true}},
    {"cthp", {BaseScheme::kCthp, false}},
    {"dthp", {BaseScheme::kDthp, false}},
    {"cthp-rs", {BaseScheme::kCthp, true}},
    {"dthp-rs", {BaseScheme::kDthp, true}},
    {"zf-dpc", {BaseScheme::kZfDpc, false}},
    {"zf-dpc-rs", {BaseScheme::kZfDpc, true}},
}};

ComplexMatrix UnitLowerInverse(const ComplexMatrix& b) {
  return b.triangularView<Eigen::Lower>().solve(
      ComplexMatrix::Identity(b.rows(), b.cols()));
}

}  // namespace

std::string SchemeTag::Name() const {
  for (const auto& s : kSchemes) {
    if (s.tag == *this) return std::string(s.name);
  }
  return "unknown";
}

std::optional<SchemeTag> SchemeTag::Parse(std::string_view name) {
  for (const auto& s : kSchemes) {
    if (s.name == name) return s.tag;
  }
  return std::nullopt;
}

std::vector<SchemeTag> SchemeTag::All() {
  std::vector<SchemeTag> out;
  for (const auto& s : kSchemes) out.push_back(s.tag);
  return out;
}

ThpFilters BuildThpFilters(const LqFactors& lq, ThpStructure structure) {
  ThpFilters f;
  f.lq = lq;
  f.F = lq.Q.adjoint();
  f.G = lq.diag.cwiseInverse();
  const auto g = f.G.cast<Complex>().asDiagonal();
  if (structure == ThpStructure::kDecentralized) {
    f.B = g * lq.L;
  } else {
    f.B = lq.L * g;
  }
  // Unit diagonal by construction; pin it exactly.
  f.B.diagonal().setOnes();
  f.B.triangularView<Eigen::StrictlyUpper>().setZero();
  return f;
}

ThpFilters BuildThpFilters(const ComplexMatrix& h_est,
                           ThpStructure structure) {
  return BuildThpFilters(LqDecompose(h_est), structure);
}

double ComputeBeta(ThpStructure structure, double e_tr, double lambda,
                   const LqFactors& lq, double common_power) {
  if (!(common_power >= 0.0) || !(common_power < e_tr)) {
    throw Error(ErrorKind::kInvalidPowerSplit,
                "common power " + std::to_string(common_power) +
                    " outside [0, E_tr=" + std::to_string(e_tr) + ")");
  }
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw Error(ErrorKind::kInvalidConfig,
                "lambda must lie in (0, 1], got " + std::to_string(lambda));
  }
  const double private_power = lambda * (e_tr - common_power);
  const double denom =
      structure == ThpStructure::kDecentralized
          ? static_cast<double>(lq.diag.size())
          : lq.diag.array().square().inverse().sum();
  return std::sqrt(private_power / denom);
}

PrecoderBasis MakePrecoderBasis(const ComplexMatrix& h_est) {
  PrecoderBasis b;
  b.h_est = h_est;
  b.lq = LqDecompose(h_est);
  b.zf_unit = PseudoInverse(h_est);
  b.zf_unit.colwise().normalize();
  b.common_dir = DominantRightSingularVector(h_est);
  b.dthp = BuildThpFilters(b.lq, ThpStructure::kDecentralized);
  b.cthp = BuildThpFilters(b.lq, ThpStructure::kCentralized);
  b.dthp_unit = b.dthp.F * UnitLowerInverse(b.dthp.B);
  b.cthp_unit = b.cthp.F * b.cthp.G.cast<Complex>().asDiagonal() *
                UnitLowerInverse(b.cthp.B);
  return b;
}

PrecoderSet BuildPrecoderSet(const PrecoderBasis& basis, SchemeTag scheme,
                             double e_tr, double lambda, double power_split) {
  if (!(e_tr > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "E_tr must be positive");
  }
  if (!(power_split >= 0.0) || !(power_split < 1.0)) {
    throw Error(ErrorKind::kInvalidPowerSplit,
                "power split must lie in [0, 1), got " +
                    std::to_string(power_split));
  }
  if (!scheme.rs && power_split != 0.0) {
    throw Error(ErrorKind::kInvalidPowerSplit,
                scheme.Name() + " has no common stream; split must be 0");
  }

  PrecoderSet set;
  set.scheme = scheme;
  set.e_tr = e_tr;
  set.power_split = power_split;
  double common_power = 0.0;
  if (scheme.rs && power_split > 0.0) {
    common_power = power_split * e_tr;
    set.p_common = std::sqrt(common_power) * basis.common_dir;
  }

  const auto users = static_cast<double>(basis.h_est.rows());
  switch (scheme.base) {
    case BaseScheme::kZfLinear: {
      set.lambda = 1.0;
      set.p_unit = basis.zf_unit;
      set.p_private =
          std::sqrt((e_tr - common_power) / users) * basis.zf_unit;
      break;
    }
    case BaseScheme::kCthp:
    case BaseScheme::kDthp:
    case BaseScheme::kZfDpc: {
      // ZF-DPC keeps the dTHP filters but carries no power loss.
      set.lambda = scheme.base == BaseScheme::kZfDpc ? 1.0 : lambda;
      const ThpStructure structure = scheme.Structure();
      const ThpFilters& f = structure == ThpStructure::kDecentralized
                                ? basis.dthp
                                : basis.cthp;
      const double beta = ComputeBeta(structure, e_tr, set.lambda, basis.lq,
                                      common_power);
      set.p_unit = structure == ThpStructure::kDecentralized
                       ? basis.dthp_unit
                       : basis.cthp_unit;
      set.p_private = beta * set.p_unit;
      set.F = f.F;
      set.G = f.G;
      set.B = f.B;
      set.beta = beta;
      set.lq = basis.lq;
      break;
    }
  }
  return set;
}

PrecoderSet BuildPrecoderSet(const ComplexMatrix& h_est, SchemeTag scheme,
                             double e_tr, double lambda, double power_split) {
  return BuildPrecoderSet(MakePrecoderBasis(h_est), scheme, e_tr, lambda,
                          power_split);
}

double TransmitPower(const PrecoderSet& set) {
  double power = set.CommonPower();
  if (set.B) {
    power += (set.p_private * (*set.B)).squaredNorm() / set.lambda;
  } else {
    power += set.p_private.squaredNorm();
  }
  return power;
}

}  // namespace thprs
