#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>

#include "kam/errors.hpp"
#include "kam/manifest.hpp"

namespace kam {

enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitUsage = 2,
  kExitSchema = 3,
  kExitDiverged = 4,
  kExitExcluded = 5,
  kExitDivisor = 6,
  kExitArtifact = 7,
  kExitNoFrequency = 8,
};

class UsageError : public Error {
 public:
  using Error::Error;
};

struct CliOptions {
  std::string command;
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
};

int exit_code_for(const std::exception& e);

/// Runs one subcommand; returns the process exit code. Errors are reported on err.
int run_cli(const CliOptions& opts, std::ostream& out, std::ostream& err);

int cmd_frequencies(const RunManifest& m, const std::string& dir, std::ostream& out);
int cmd_reduce(const RunManifest& m, const std::string& dir, std::ostream& out);
int cmd_verify(const RunManifest& m, const std::string& dir, std::ostream& out);
int cmd_spectrum(const RunManifest& m, const std::string& dir, std::ostream& out);
int cmd_model(const RunManifest& m, const std::string& dir, std::ostream& out);

struct BuiltModel {
  DiagonalPart A0;
  OperatorSeries P0;  // scaled so that ‖P0‖_{δ,s} = ε
  std::optional<Oscillator> oscillator;
};

BuiltModel build_model(const RunManifest& m);
/// The manifest frequency, or the first admissible sample at the settings' γ and τ.
Frequency resolve_frequency(const RunManifest& m, const DiagonalPart& A0, int* sample_index = nullptr);

}  // namespace kam
