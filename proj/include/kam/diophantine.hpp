#pragma once

#include <cstdint>
#include <vector>

#include "kam/lattice.hpp"
#include "kam/torus_series.hpp"

namespace kam {

struct Dio1Certificate {
  bool pass = true;
  int Kmax = 0;
  double gamma = 0.0;      // γ tested
  double gamma_max = 0.0;  // min_k |ω·k|·|k|_1^τ: largest γ that passes
  Mode witness;            // argmin (the violating k on failure)
  double witness_value = 0.0;
};

struct Dio2Certificate {
  bool pass = true;
  int Kmax = 0;
  int Nmax = 0;
  double gamma = 0.0;
  double gamma_max = 0.0;  // min of |λ_i−λ_j+ω·k|(1+|k|^τ)/|i^d−j^d| over tested triples
  int i = 0;               // 1-based witness triple
  int j = 0;
  Mode k;
  double divisor = 0.0;
  double bound = 0.0;
  std::int64_t checked = 0;
  std::int64_t pruned = 0;
  double c_lambda = 0.0;
  bool tail_safe = false;  // pairs beyond Nmax cannot violate for |k|_1 ≤ Kmax
};

/// |ω·k| ≥ γ/|k|_1^τ for 0 < |k|_1 ≤ Kmax.
Dio1Certificate check_dio1(const Frequency& omega, int Kmax);

/// |λ_i−λ_j+ω·k| ≥ γ|i^d−j^d|/(1+|k|_1^τ) for i≠j ≤ Nmax, |k|_1 ≤ Kmax.
/// With prune, triples with |k|_1·max ω < (C_λ/2)|i^d−j^d| are skipped when γ ≤ C_λ/2.
Dio2Certificate check_dio2(const Frequency& omega, const DiagonalPart& base, int Kmax, int Nmax,
                           bool prune = true);

struct AdmissibleSample {
  std::vector<std::vector<double>> accepted;
  double rejection_fraction = 0.0;
  int count = 0;
};

/// Uniform samples of [0,1]^n filtered by check_dio1 ∧ check_dio2; throws
/// NoAdmissibleFrequency if none is accepted.
AdmissibleSample sample_admissible(int count, int n, double gamma, double tau, const DiagonalPart& base,
                                   int Kmax, int Nmax, std::uint64_t seed);

/// Per-sample largest passing γ, min(gamma_max of dio1, dio2); the admissible
/// set at γ is {samples with value ≥ γ}. Used for γ sweeps.
std::vector<double> sample_gamma_max(int count, int n, double tau, const DiagonalPart& base, int Kmax, int Nmax,
                                     std::uint64_t seed);
std::vector<double> sample_point(int n, std::uint64_t seed, int index);

/// {ω ∈ [0,1]^n : |center + ω·k| ≤ alpha}, center = λ_i − λ_j.
struct ResonanceSet {
  int i = 0;
  int j = 0;
  Mode k;
  double alpha = 0.0;
  double center = 0.0;
};

/// 4α/|k|_1.
double resonance_measure_bound(const ResonanceSet& rs);
/// Exact Lebesgue measure for n ≤ 2 (polygon clipping).
double resonance_measure_exact(const ResonanceSet& rs);
double resonance_measure_mc(const ResonanceSet& rs, int samples, std::uint64_t seed);

}  // namespace kam
