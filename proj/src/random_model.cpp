#include "kam/random_model.hpp"

#include <cmath>

#include "kam/errors.hpp"
#include "kam/norms.hpp"

namespace kam {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t state = root ^ (stream * 0xd1b54a32d192ed03ULL);
  splitmix64(state);
  return splitmix64(state);
}

namespace {

cplx gaussian(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

// Fills f (and its mirror g with g_{−k} = sign·conj(f_k)) under the envelope.
void fill_pair(TorusSeries& f, TorusSeries* g, double decay, double scale, double sign, Rng& rng) {
  const auto& lat = f.lattice();
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    const cplx c = scale * std::exp(-decay * lat.l1(idx)) * gaussian(rng);
    f[idx] = c;
    if (g) (*g)[lat.negated(idx)] = sign * std::conj(c);
  }
}

// Self-mirrored entry: f_{−k} = sign·conj(f_k).
void fill_self(TorusSeries& f, double decay, double scale, double sign, Rng& rng) {
  const auto& lat = f.lattice();
  const auto zero = lat.zero_index();
  for (std::size_t idx = 0; idx < zero; ++idx) {
    const cplx c = scale * std::exp(-decay * lat.l1(idx)) * gaussian(rng);
    f[idx] = c;
    f[lat.negated(idx)] = sign * std::conj(c);
  }
  const cplx c0 = scale * gaussian(rng);
  f[zero] = sign > 0 ? cplx(c0.real(), 0.0) : cplx(0.0, c0.imag());
}

OperatorSeries random_symmetric(const RandomOperatorSpec& spec, double sign, Rng& rng) {
  OperatorSeries op(spec.N, spec.n, spec.K);
  for (int j = 0; j < spec.N; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double scale = std::exp(-spec.offdiag_decay * (j - i));
      if (i == j)
        fill_self(op(i, i), spec.decay, scale, sign, rng);
      else
        fill_pair(op(i, j), &op(j, i), spec.decay, scale, sign, rng);
    }
  }
  return op;
}

}  // namespace

TorusSeries random_series(int n, int K, double decay, Rng& rng, bool real, bool zero_average) {
  TorusSeries f(n, K);
  if (real)
    fill_self(f, decay, 1.0, 1.0, rng);
  else
    fill_pair(f, nullptr, decay, 1.0, 1.0, rng);
  if (zero_average) f[f.lattice().zero_index()] = cplx{};
  return f;
}

OperatorSeries random_hermitian(const RandomOperatorSpec& spec, Rng& rng) {
  return random_symmetric(spec, +1.0, rng);
}

OperatorSeries random_antihermitian(const RandomOperatorSpec& spec, Rng& rng) {
  return random_symmetric(spec, -1.0, rng);
}

OperatorSeries normalized(const OperatorSeries& P, const DiagonalPart& base, double s, double target) {
  const double norm = delta_norm(P, base, s);
  if (norm == 0.0) {
    if (target == 0.0) return P;
    throw InvalidArgument("cannot normalize a zero operator");
  }
  OperatorSeries out = P;
  out *= target / norm;
  return out;
}

}  // namespace kam
