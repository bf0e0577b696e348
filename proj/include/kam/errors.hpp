#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Grid too coarse to represent the requested Fourier cutoff.
class AliasingError : public Error {
 public:
  using Error::Error;
};

class HermiticityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A small divisor ω·k + E fell below the configured floor.
class DivisorTooSmall : public Error {
 public:
  DivisorTooSmall(int i, int j, std::vector<int> k, double divisor, double floor);

  int i;
  int j;
  std::vector<int> k;
  double divisor;
  double floor;
};

/// The frequency vector violates a diophantine condition at a certified triple.
class FrequencyExcluded : public Error {
 public:
  FrequencyExcluded(int step, int i, int j, std::vector<int> k, double divisor, double bound);

  int step;
  int i;
  int j;
  std::vector<int> k;
  double divisor;
  double bound;
};

class GuardViolated : public Error {
 public:
  using Error::Error;
};

/// Artifact content does not match its recorded checksum, or is unreadable.
class ChecksumError : public Error {
 public:
  using Error::Error;
};

/// Manifest field missing or of the wrong type; `path` names the field.
class SchemaError : public Error {
 public:
  SchemaError(std::string path_, const std::string& what)
      : Error("manifest field '" + path_ + "': " + what), path(std::move(path_)) {}

  std::string path;
};

/// Sampling produced no admissible frequency (γ too large).
class NoAdmissibleFrequency : public Error {
 public:
  using Error::Error;
};

std::string format_mode(const std::vector<int>& k);

}  // namespace kam
