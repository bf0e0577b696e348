#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kam/diophantine.hpp"
#include "kam/fourier.hpp"
#include "kam/linalg.hpp"
#include "kam/norms.hpp"
#include "kam/random_model.hpp"

namespace kam::checks {

struct Outcome {
  int instances = 0;
  int violations = 0;
  double worst = 0.0;  // largest lhs/rhs (or worst slope deviation)
};

// Coefficients k scaled by e^{−k·y}: the function at φ + iy.
inline TorusSeries shifted(const TorusSeries& f, const std::vector<double>& y) {
  TorusSeries out = f;
  const auto& lat = f.lattice();
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    double e = 0.0;
    auto k = lat.mode(idx);
    for (std::size_t l = 0; l < y.size(); ++l) e -= k[l] * y[l];
    out[idx] *= std::exp(e);
  }
  return out;
}

// Lower estimate of sup over the strip |Im φ| ≤ s of (Σ_j |f_j|²)^{1/2}, sampled on
// the distinguished boundary Im φ_l = ±s.
inline double strip_sup_family(const std::vector<TorusSeries>& fs, double s, int M) {
  const int n = fs.front().dim();
  double best = 0.0;
  for (int corner = 0; corner < (1 << n); ++corner) {
    std::vector<double> y(n);
    for (int l = 0; l < n; ++l) y[l] = (corner >> l & 1) ? s : -s;
    std::vector<double> acc(GridSpec{n, M}.points(), 0.0);
    for (const auto& f : fs) {
      const auto v = sample(shifted(f, y), M);
      for (std::size_t g = 0; g < v.size(); ++g) acc[g] += std::norm(v[g]);
    }
    best = std::max(best, std::sqrt(*std::max_element(acc.begin(), acc.end())));
  }
  return best;
}

// ‖R‖_{0,s−σ} ≤ (4^{n+1}/σ^n)‖F‖_{0,s} with R_ij = e^{iθ}F_ij/|i−j|, norms as coefficient bounds.
inline Outcome gap_division_bound(int instances, std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  std::uniform_int_distribution<int> Nd(2, 16), nd(1, 2), Kd(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int q = 0; q < instances; ++q) {
    const int N = Nd(rng), n = nd(rng), K = Kd(rng);
    auto F = random_hermitian({N, n, K, 0.5 + u(rng), 0.0}, rng);
    OperatorSeries R(N, n, K);
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        if (i == j) continue;
        for (std::size_t idx = 0; idx < F.modes(); ++idx)
          R(i, j)[idx] = std::polar(1.0, 2 * M_PI * u(rng)) * F(i, j)[idx] / static_cast<double>(std::abs(i - j));
      }
    const double s = 0.2 + u(rng);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(N);
    for (double frac : {0.05, 0.3, 0.7, 0.95}) {
      const double sigma = frac * s;
      const double lhs = coefficient_strip_bound(R, one, one, s - sigma);
      const double rhs = std::pow(4.0, n + 1) / std::pow(sigma, n) * coefficient_strip_bound(F, one, one, s);
      out.worst = std::max(out.worst, lhs / rhs);
      if (lhs > rhs) ++out.violations;
    }
    ++out.instances;
  }
  return out;
}

// (Σ_j ‖f_j‖²_{s−σ})^{1/2} ≤ (4^n/σ^n)·sup_strip (Σ_j |f_j|²)^{1/2}.
inline Outcome family_cauchy_bound(int instances, std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  std::uniform_int_distribution<int> Jd(1, 8), nd(1, 2), Kd(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int q = 0; q < instances; ++q) {
    const int J = Jd(rng), n = nd(rng), K = Kd(rng);
    std::vector<TorusSeries> fs;
    for (int j = 0; j < J; ++j) fs.push_back(random_series(n, K, 0.5 + u(rng), rng, u(rng) < 0.5));
    const double s = 0.2 + u(rng);
    const double rhs_sup = strip_sup_family(fs, s, grid_size_for(K, 4));
    for (double frac : {0.05, 0.3, 0.7, 0.95}) {
      const double sigma = frac * s;
      double lhs = 0.0;
      for (const auto& f : fs) lhs += std::pow(sup_norm_s(f, s - sigma), 2);
      lhs = std::sqrt(lhs);
      const double rhs = std::pow(4.0, n) / std::pow(sigma, n) * rhs_sup;
      out.worst = std::max(out.worst, lhs / rhs);
      if (lhs > rhs) ++out.violations;
    }
    ++out.instances;
  }
  return out;
}

struct PointwiseInstance {
  DiagonalPart base;
  std::vector<Eigen::MatrixXcd> P;
  std::vector<Eigen::MatrixXcd> B;
  Eigen::VectorXd W;
};

inline PointwiseInstance pointwise_instance(Rng& rng, double g_target) {
  std::uniform_int_distribution<int> Nd(2, 10), Kd(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int N = Nd(rng), n = 1, K = Kd(rng);
  PointwiseInstance in;
  in.base = DiagonalPart::power_law(N, n, 4.0 / 3.0, 0.2);
  in.W = in.base.weights();
  const auto P = random_hermitian({N, n, K, 1.0, 0.0}, rng);
  const auto B = random_antihermitian({N, n, K, 1.0, 0.0}, rng);
  const int M = grid_size_for(K, 2);
  double g = 0.0;
  for (int q = 0; q < M; ++q) {
    const std::vector<double> phi{2 * M_PI * q / M};
    in.P.push_back(P(phi));
    in.B.push_back(B(phi));
    const auto& b = in.B.back();
    g = std::max({g, op_norm(b), op_norm(in.W.asDiagonal() * b * in.W.cwiseInverse().asDiagonal())});
  }
  for (auto& b : in.B) b *= g_target / g;
  return in;
}

// ‖e^{−B}Pe^{B} − P‖_δ ≤ 4‖P‖_δ‖B‖_G for ‖B‖_G ≤ 1/2, grid max on both sides.
inline Outcome conjugation_bound(int instances, std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int q = 0; q < instances; ++q) {
    const double g = 0.5 * (0.01 + 0.99 * u(rng));
    const auto in = pointwise_instance(rng, g);
    double lhs = 0.0, pn = 0.0;
    for (std::size_t p = 0; p < in.P.size(); ++p) {
      const Eigen::MatrixXcd E = expm(in.B[p]);
      const Eigen::MatrixXcd X = E.adjoint() * in.P[p] * E - in.P[p];
      lhs = std::max(lhs, op_norm(in.W.asDiagonal() * X));
      pn = std::max(pn, op_norm(in.W.asDiagonal() * in.P[p]));
    }
    const double rhs = 4.0 * pn * g;
    out.worst = std::max(out.worst, lhs / rhs);
    if (lhs > rhs) ++out.violations;
    ++out.instances;
  }
  return out;
}

// ‖e^{−tB}Ae^{tB} − A − t[A,B]‖_δ scales like t² as t → 0: log-log slope within 2 ± 0.1.
inline Outcome commutator_remainder_scaling(int instances, std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  for (int q = 0; q < instances; ++q) {
    const auto in = pointwise_instance(rng, 0.25);
    const Eigen::MatrixXcd A = Eigen::Map<const Eigen::VectorXd>(in.base.lambda.data(), in.base.size())
                                   .cast<cplx>()
                                   .asDiagonal();
    auto remainder = [&](double t) {
      double r = 0.0;
      for (const auto& b : in.B) {
        const Eigen::MatrixXcd tb = t * b;
        const Eigen::MatrixXcd E = expm(tb);
        const Eigen::MatrixXcd X = E.adjoint() * A * E - A - (A * tb - tb * A);
        r = std::max(r, op_norm(in.W.asDiagonal() * X));
      }
      return r;
    };
    const double t1 = 1e-1, t2 = 1e-2;
    const double slope = std::log(remainder(t1) / remainder(t2)) / std::log(t1 / t2);
    out.worst = std::max(out.worst, std::abs(slope - 2.0));
    if (!(std::abs(slope - 2.0) <= 0.1)) ++out.violations;
    ++out.instances;
  }
  return out;
}

// Exact slab measure of every R_ijk(γ|i^d−j^d|/(1+|k|^τ)) against 4α/|k|_1, n = 2.
inline Outcome slab_measures(double gamma, double tau, const DiagonalPart& base, int Kmax, int Nmax) {
  Outcome out;
  const auto ball = half_l1_ball(2, Kmax);
  for (int i = 1; i <= Nmax; ++i)
    for (int j = i + 1; j <= Nmax; ++j) {
      const double gap = std::pow(j, base.d) - std::pow(i, base.d);
      for (const auto& k : ball) {
        const int a = std::abs(k[0]) + std::abs(k[1]);
        ResonanceSet rs{i, j, k, gamma * gap / (1.0 + std::pow(a, tau)), base.lambda[i - 1] - base.lambda[j - 1]};
        const double m = resonance_measure_exact(rs);
        const double b = resonance_measure_bound(rs);
        out.worst = std::max(out.worst, m / b);
        if (m > b * (1 + 1e-12)) ++out.violations;
        ++out.instances;
      }
    }
  return out;
}

}  // namespace kam::checks
