#include "thprs/channel.h"

#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"
#include "thprs/error.h"

namespace thprs {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void CheckDimensions(int users, int tx_antennas) {
  if (users < 2 || users > tx_antennas) {
    throw Error(ErrorKind::kDimensionMismatch,
                "need 2 <= K <= N_t, got K=" + std::to_string(users) +
                    " N_t=" + std::to_string(tx_antennas));
  }
}

ComplexMatrix DrawGaussianMatrix(Engine& engine, Eigen::Index rows,
                                 Eigen::Index cols, double variance) {
  ComplexMatrix m(rows, cols);
  // Row-major fill order so the layout of the stream matches the dump format.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = DrawComplexGaussian(engine, variance);
    }
  }
  return m;
}

nlohmann::json MatrixToJson(const ComplexMatrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(2 * m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      data.push_back(m(r, c).real());
      data.push_back(m(r, c).imag());
    }
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"re_im", data}};
}

ComplexMatrix MatrixFromJson(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("re_im").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != 2 * rows * cols) {
    throw Error(ErrorKind::kIoError, "matrix payload size mismatch");
  }
  ComplexMatrix m(rows, cols);
  std::size_t idx = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = Complex(data[idx], data[idx + 1]);
      idx += 2;
    }
  }
  return m;
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t master, StreamTag tag, std::uint64_t i,
                         std::uint64_t j) {
  std::uint64_t h = SplitMix64(master);
  h = SplitMix64(h ^ static_cast<std::uint64_t>(tag));
  h = SplitMix64(h ^ i);
  h = SplitMix64(h ^ (j * 0xD1B54A32D192ED03ULL));
  return h;
}

Complex DrawComplexGaussian(Engine& engine, double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  const double re = normal(engine);
  const double im = normal(engine);
  return {re, im};
}

ErrorRegime ErrorRegime::FixedVariance(double variance) {
  if (!(variance >= 0.0)) {
    throw Error(ErrorKind::kInvalidVariance,
                "error variance must be >= 0, got " + std::to_string(variance));
  }
  ErrorRegime r;
  r.kind = Kind::kFixedVariance;
  r.variance = variance;
  return r;
}

ErrorRegime ErrorRegime::SnrScaled(double alpha) {
  if (!(alpha >= 0.0)) {
    throw Error(ErrorKind::kInvalidVariance,
                "alpha must be >= 0, got " + std::to_string(alpha));
  }
  ErrorRegime r;
  r.kind = Kind::kSnrScaled;
  r.alpha = alpha;
  return r;
}

double ErrorRegime::ErrorVariance(double e_tr) const {
  switch (kind) {
    case Kind::kPerfect: return 0.0;
    case Kind::kFixedVariance: return variance;
    case Kind::kSnrScaled: return std::pow(e_tr, -alpha);
  }
  return 0.0;
}

bool ErrorRegime::IsPerfect() const { return kind == Kind::kPerfect; }

ComplexMatrix DrawChannel(int users, int tx_antennas, std::uint64_t seed) {
  CheckDimensions(users, tx_antennas);
  Engine engine(seed);
  return DrawGaussianMatrix(engine, users, tx_antennas, 1.0);
}

std::vector<ComplexMatrix> DrawUnitErrors(int users, int tx_antennas,
                                          int count, std::uint64_t seed) {
  if (count < 1) {
    throw Error(ErrorKind::kInvalidConfig, "need at least one error sample");
  }
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) {
    Engine engine(DeriveSeed(seed, StreamTag::kEvaluationError,
                             static_cast<std::uint64_t>(m)));
    out.push_back(DrawGaussianMatrix(engine, users, tx_antennas, 1.0));
  }
  return out;
}

ChannelSet DrawEstimateAndErrors(const ComplexMatrix& h_true,
                                 const ErrorRegime& regime, int count,
                                 std::uint64_t seed, double e_tr) {
  if (count < 1) {
    throw Error(ErrorKind::kInvalidConfig, "need at least one error sample");
  }
  const double sigma_e2 = regime.ErrorVariance(e_tr);
  if (!(sigma_e2 >= 0.0)) {
    throw Error(ErrorKind::kInvalidVariance, "negative error variance");
  }
  ChannelSet set;
  set.h_true = h_true;
  if (regime.IsPerfect()) {
    set.h_est = h_true;
    set.errors.assign(static_cast<std::size_t>(count),
                      ComplexMatrix::Zero(h_true.rows(), h_true.cols()));
    return set;
  }
  set.sigma_e2 = sigma_e2;
  const double scale = std::sqrt(sigma_e2);
  Engine engine(DeriveSeed(seed, StreamTag::kEstimationError));
  set.h_est =
      h_true - scale * DrawGaussianMatrix(engine, h_true.rows(),
                                          h_true.cols(), 1.0);
  set.errors = DrawUnitErrors(static_cast<int>(h_true.rows()),
                              static_cast<int>(h_true.cols()), count, seed);
  for (auto& e : set.errors) e *= scale;
  return set;
}

void WriteChannelDump(const std::filesystem::path& path,
                      const std::vector<ChannelRecord>& records) {
  nlohmann::json doc;
  doc["format"] = "thprs-channel-dump";
  doc["version"] = 1;
  doc["records"] = nlohmann::json::array();
  for (const auto& rec : records) {
    nlohmann::json j;
    j["seed"] = rec.seed;
    j["users"] = rec.set.h_true.rows();
    j["tx_antennas"] = rec.set.h_true.cols();
    j["sigma_e2"] = rec.set.sigma_e2;
    j["h_true"] = MatrixToJson(rec.set.h_true);
    j["h_est"] = MatrixToJson(rec.set.h_est);
    j["errors"] = nlohmann::json::array();
    for (const auto& e : rec.set.errors) j["errors"].push_back(MatrixToJson(e));
    doc["records"].push_back(std::move(j));
  }
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  }
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
}

std::vector<ChannelRecord> ReadChannelDump(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIoError, e.what());
  }
  if (doc.value("format", "") != "thprs-channel-dump") {
    throw Error(ErrorKind::kIoError, "not a channel dump: " + path.string());
  }
  std::vector<ChannelRecord> records;
  for (const auto& j : doc.at("records")) {
    ChannelRecord rec;
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.set.sigma_e2 = j.at("sigma_e2").get<double>();
    rec.set.h_true = MatrixFromJson(j.at("h_true"));
    rec.set.h_est = MatrixFromJson(j.at("h_est"));
    for (const auto& e : j.at("errors")) {
      rec.set.errors.push_back(MatrixFromJson(e));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace thprs
