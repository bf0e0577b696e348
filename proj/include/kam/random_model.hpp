#pragma once

#include <cstdint>
#include <random>

#include "kam/torus_series.hpp"

namespace kam {

using Rng = std::mt19937_64;

/// splitmix64 step; derives independent child seeds from a root seed.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

struct RandomOperatorSpec {
  int N = 4;
  int n = 1;
  int K = 2;
  double decay = 1.0;          // coefficient envelope e^{−decay·|k|_1}
  double offdiag_decay = 0.0;  // extra envelope e^{−offdiag_decay·|i−j|}
};

/// Gaussian coefficients under the envelope; real on the torus when `real`.
TorusSeries random_series(int n, int K, double decay, Rng& rng, bool real = true, bool zero_average = false);
OperatorSeries random_hermitian(const RandomOperatorSpec& spec, Rng& rng);
OperatorSeries random_antihermitian(const RandomOperatorSpec& spec, Rng& rng);

/// P rescaled so that delta_norm(P, base, s) = target.
OperatorSeries normalized(const OperatorSeries& P, const DiagonalPart& base, double s, double target);

}  // namespace kam
