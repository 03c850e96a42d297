#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "thprs/sweeps.h"

namespace thprs {

enum class Subcommand {
  kSweepSnr,
  kSweepErrorVariance,
  kSweepAlpha,
  kValidateChain,
  kCrossCheckSinr,
};

enum class OutputFormat { kCsv, kStructuredText };

// Environment variable that overrides the default --seed.
inline constexpr const char* kSeedEnvVar = "THPRS_SEED";

struct ExperimentSpec {
  Subcommand subcommand = Subcommand::kSweepSnr;
  SweepConfig config;
  std::filesystem::path output_path = "results.csv";
  OutputFormat format = OutputFormat::kCsv;
  // Validation knobs.
  int mc_samples = 100000;
  double beta_mismatch = 1.0;  // receiver beta multiplier (negative control)
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Carries the help text for --help.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses argv (argv[0] is the program name). Throws UsageError naming the
// offending flag. A range "start:step:stop" (0:5:30) or a comma list is
// accepted wherever a grid is expected.
ExperimentSpec ParseArgs(int argc, const char* const argv[]);

std::vector<double> ParseGrid(const std::string& text);

// CSV with header scheme,x_value,x_kind,esr_bps_hz,ci_halfwidth,
// chosen_split_mean,seed and one row per (scheme, x).
std::string FormatCsv(const SweepResult& result);
std::string FormatStructured(const SweepResult& result);
// Every parameter that affects the numbers, as JSON.
std::string FormatConfigEcho(const ExperimentSpec& spec);

// Writes the results to spec.output_path and the resolved config to
// "<output_path>.config.json". Throws Error(kIoError).
void EmitResults(const SweepResult& result, const ExperimentSpec& spec);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool AllPassed() const;
  void Print(std::ostream& out) const;
};

// Modulo algebra, encoder inversion, perfect-CSIT cancellation for both THP
// structures over config.n_channels channels, and lambda_hat for 4-QAM.
ValidationReport ValidateChain(const ExperimentSpec& spec);

// Closed-form vs signal-model SINR. Perfect-CSIT private SINRs must agree
// within 5%; common-stream and imperfect-CSIT gaps are reported but never
// fail the run.
ValidationReport CrossCheckSinr(const ExperimentSpec& spec);

// Full CLI: returns 0 on success, 1 on validation failure, 2 on usage error.
int RunCli(int argc, const char* const argv[], std::ostream& out,
           std::ostream& err);

}  // namespace thprs
