#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "thprs/channel.h"
#include "thprs/error.h"

using namespace thprs;

TEST_CASE("draw channel is deterministic and rejects K > N_t") {
  CHECK(DrawChannel(4, 4, 17) == DrawChannel(4, 4, 17));
  CHECK(DrawChannel(4, 4, 17) != DrawChannel(4, 4, 18));
  try {
    DrawChannel(5, 4, 1);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDimensionMismatch);
  }
}

TEST_CASE("channel entries are CN(0, 1)") {
  Complex sum = 0;
  double power = 0;
  int n = 0;
  for (int c = 0; c < 6250; ++c) {  // 6250 * 16 = 1e5 entries
    const ComplexMatrix h = DrawChannel(4, 4, DeriveSeed(3, StreamTag::kChannel, c));
    sum += h.sum();
    power += h.squaredNorm();
    n += 16;
  }
  const Complex mean = sum / double(n);
  const double var = power / n - std::norm(mean);
  CHECK(std::abs(mean) < 0.02);
  CHECK(var >= 0.98);
  CHECK(var <= 1.02);
}

TEST_CASE("perfect regime gives zero errors and h_est == h_true") {
  const ComplexMatrix h = DrawChannel(4, 4, 5);
  const ChannelSet s = DrawEstimateAndErrors(h, ErrorRegime::Perfect(), 10, 6);
  CHECK(s.h_est == h);
  CHECK(s.errors.size() == 10);
  for (const auto& e : s.errors) CHECK(e.isZero(0.0));
  CHECK(s.sigma_e2 == 0.0);
}

TEST_CASE("fixed variance 0.2 gives pooled variance in [0.17, 0.23]") {
  const ComplexMatrix h = DrawChannel(4, 4, 5);
  const ChannelSet s =
      DrawEstimateAndErrors(h, ErrorRegime::FixedVariance(0.2), 100, 6);
  CHECK(s.errors.size() == 100);
  double power = 0;
  Complex sum = 0;
  for (const auto& e : s.errors) {
    CHECK(e.rows() == 4);
    CHECK(e.cols() == 4);
    power += e.squaredNorm();
    sum += e.sum();
  }
  const double var = power / 1600.0;
  CHECK(var >= 0.17);
  CHECK(var <= 0.23);
  CHECK(std::abs(sum / 1600.0) < 0.05);
  CHECK(s.h_est != h);
  CHECK(s.h_est.rows() == 4);
}

TEST_CASE("snr-scaled regime") {
  const ErrorRegime r = ErrorRegime::SnrScaled(0.6);
  const double e_tr = std::pow(10.0, 1.5);
  CHECK(std::abs(r.ErrorVariance(e_tr) - std::pow(10.0, -0.9)) < 1e-15);
  CHECK(std::abs(r.ErrorVariance(e_tr) - 0.12589) < 1e-4);
  for (double e : {1.0, 3.7, 100.0, 1e3}) {
    CHECK(std::abs(r.ErrorVariance(e) * std::pow(e, 0.6) - 1.0) < 1e-14);
  }
  try {
    ErrorRegime::FixedVariance(-0.1);
    FAIL("expected InvalidVariance");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidVariance);
  }
}

TEST_CASE("error realization m depends only on (seed, m)") {
  const auto a = DrawUnitErrors(4, 4, 100, 77);
  const auto b = DrawUnitErrors(4, 4, 50, 77);
  for (int m = 0; m < 50; ++m) CHECK(a[m] == b[m]);
  const ComplexMatrix h = DrawChannel(4, 4, 5);
  const auto x = DrawEstimateAndErrors(h, ErrorRegime::FixedVariance(0.2), 100, 9);
  const auto y = DrawEstimateAndErrors(h, ErrorRegime::FixedVariance(0.2), 50, 9);
  CHECK(x.h_est == y.h_est);
  for (int m = 0; m < 50; ++m) CHECK(x.errors[m] == y.errors[m]);
}

TEST_CASE("derived seeds differ across tags and indices") {
  CHECK(DeriveSeed(1, StreamTag::kChannel, 0) !=
        DeriveSeed(1, StreamTag::kEvaluationError, 0));
  CHECK(DeriveSeed(1, StreamTag::kChannel, 0) !=
        DeriveSeed(1, StreamTag::kChannel, 1));
  CHECK(DeriveSeed(1, StreamTag::kChannel, 0, 1) !=
        DeriveSeed(1, StreamTag::kChannel, 1, 0));
  CHECK(DeriveSeed(1, StreamTag::kChannel, 3) ==
        DeriveSeed(1, StreamTag::kChannel, 3));
}

TEST_CASE("channel dump round trip") {
  const auto path =
      std::filesystem::temp_directory_path() / "thprs_channel_dump_test.json";
  std::vector<ChannelRecord> records;
  for (std::uint64_t seed : {1u, 2u}) {
    const ComplexMatrix h = DrawChannel(3, 4, seed);
    records.push_back(
        {seed, DrawEstimateAndErrors(h, ErrorRegime::FixedVariance(0.2), 3, seed)});
  }
  WriteChannelDump(path, records);
  const auto back = ReadChannelDump(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back[i].seed == records[i].seed);
    CHECK(back[i].set.h_true == records[i].set.h_true);
    CHECK(back[i].set.h_est == records[i].set.h_est);
    CHECK(back[i].set.sigma_e2 == records[i].set.sigma_e2);
    REQUIRE(back[i].set.errors.size() == 3);
    for (int m = 0; m < 3; ++m) {
      CHECK(back[i].set.errors[m] == records[i].set.errors[m]);
    }
  }
  std::filesystem::remove(path);
  try {
    ReadChannelDump(path);
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIoError);
  }
}
