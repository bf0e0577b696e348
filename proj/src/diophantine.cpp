#include "kam/diophantine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "kam/errors.hpp"
#include "kam/random_model.hpp"

namespace kam {

namespace {

struct Ball {
  std::vector<Mode> modes;
  std::vector<int> l1;
  std::vector<double> weight;  // 1 + |k|_1^τ
};

Ball make_ball(int n, int Kmax, double tau, bool half) {
  Ball b;
  b.modes = half ? half_l1_ball(n, Kmax) : l1_ball(n, Kmax);
  for (const auto& k : b.modes) {
    int a = 0;
    for (int c : k) a += std::abs(c);
    b.l1.push_back(a);
    b.weight.push_back(1.0 + (a == 0 ? 0.0 : std::pow(static_cast<double>(a), tau)));
  }
  return b;
}

double dot(const std::vector<double>& omega, const Mode& k) {
  double acc = 0.0;
  for (std::size_t l = 0; l < k.size(); ++l) acc += omega[l] * k[l];
  return acc;
}

Dio1Certificate dio1_with(const std::vector<double>& omega, double gamma, double tau, int Kmax, const Ball& ball) {
  Dio1Certificate cert;
  cert.Kmax = Kmax;
  cert.gamma = gamma;
  cert.gamma_max = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < ball.modes.size(); ++m) {
    const double v = std::abs(dot(omega, ball.modes[m]));
    const double ratio = v * std::pow(static_cast<double>(ball.l1[m]), tau);
    if (ratio < cert.gamma_max) {
      cert.gamma_max = ratio;
      cert.witness = ball.modes[m];
      cert.witness_value = v;
    }
  }
  cert.pass = gamma <= 0.0 || cert.gamma_max >= gamma;
  return cert;
}

Dio2Certificate dio2_with(const std::vector<double>& omega, double gamma, const DiagonalPart& base, int Kmax,
                          int Nmax, bool prune, double c_lambda, const Ball& ball) {
  Dio2Certificate cert;
  cert.Kmax = Kmax;
  cert.Nmax = Nmax;
  cert.gamma = gamma;
  cert.c_lambda = c_lambda;
  cert.gamma_max = std::numeric_limits<double>::infinity();
  double wmax = 0.0;
  for (double w : omega) wmax = std::max(wmax, std::abs(w));
  const bool may_prune = prune && gamma <= c_lambda / 2.0;

  std::vector<double> wk(ball.modes.size());
  for (std::size_t m = 0; m < wk.size(); ++m) wk[m] = dot(omega, ball.modes[m]);

  for (int i = 1; i <= Nmax; ++i) {
    for (int j = i + 1; j <= Nmax; ++j) {
      const double delta = std::pow(j, base.d) - std::pow(i, base.d);
      const double gap = base.lambda[i - 1] - base.lambda[j - 1];
      for (std::size_t m = 0; m < wk.size(); ++m) {
        if (may_prune && ball.l1[m] * wmax < 0.5 * c_lambda * delta) {
          ++cert.pruned;
          continue;
        }
        ++cert.checked;
        const double div = gap + wk[m];
        const double ratio = std::abs(div) * ball.weight[m] / delta;
        if (ratio < cert.gamma_max) {
          cert.gamma_max = ratio;
          cert.i = i;
          cert.j = j;
          cert.k = ball.modes[m];
          cert.divisor = div;
          cert.bound = gamma * delta / ball.weight[m];
        }
      }
    }
  }
  if (cert.pruned > 0) cert.gamma_max = std::min(cert.gamma_max, 0.5 * c_lambda);
  cert.pass = gamma <= 0.0 || cert.gamma_max >= gamma;
  return cert;
}

double c_lambda_of(const DiagonalPart& base) {
  return base.size() >= 2 ? base.lambda_separation() : 1.0;
}

void tail_check(Dio2Certificate& cert, const std::vector<double>& omega, const DiagonalPart& base) {
  double wmax = 0.0;
  for (double w : omega) wmax = std::max(wmax, std::abs(w));
  const double step = std::pow(cert.Nmax + 1.0, base.d) - std::pow(static_cast<double>(cert.Nmax), base.d);
  cert.tail_safe = (cert.c_lambda - cert.gamma) * step > cert.Kmax * wmax;
}

}  // namespace

Dio1Certificate check_dio1(const Frequency& omega, int Kmax) {
  if (Kmax < 1) throw InvalidArgument("dio1 horizon must be at least 1");
  return dio1_with(omega.omega, omega.gamma, omega.tau, Kmax, make_ball(omega.dim(), Kmax, omega.tau, true));
}

Dio2Certificate check_dio2(const Frequency& omega, const DiagonalPart& base, int Kmax, int Nmax, bool prune) {
  if (Kmax < 0 || Nmax < 1) throw InvalidArgument("dio2 horizon must be positive");
  if (base.size() < Nmax) throw InvalidArgument("diagonal part has fewer than Nmax modes");
  const double cl = c_lambda_of(base);
  auto cert = dio2_with(omega.omega, omega.gamma, base, Kmax, Nmax, prune, cl,
                        make_ball(omega.dim(), Kmax, omega.tau, false));
  tail_check(cert, omega.omega, base);
  return cert;
}

std::vector<double> sample_point(int n, std::uint64_t seed, int index) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> w(n);
  for (auto& x : w) x = uniform(rng);
  return w;
}

std::vector<double> sample_gamma_max(int count, int n, double tau, const DiagonalPart& base, int Kmax, int Nmax,
                                     std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample count must be positive");
  if (base.size() < Nmax) throw InvalidArgument("diagonal part has fewer than Nmax modes");
  const Ball half = make_ball(n, Kmax, tau, true);
  const Ball full = make_ball(n, Kmax, tau, false);
  const double cl = c_lambda_of(base);
  std::vector<double> out(count);
#pragma omp parallel for schedule(dynamic, 64)
  for (int s = 0; s < count; ++s) {
    const auto w = sample_point(n, seed, s);
    const double g1 = dio1_with(w, 0.0, tau, Kmax, half).gamma_max;
    const double g2 = dio2_with(w, 0.0, base, Kmax, Nmax, true, cl, full).gamma_max;
    out[s] = std::min(g1, g2);
  }
  return out;
}

AdmissibleSample sample_admissible(int count, int n, double gamma, double tau, const DiagonalPart& base,
                                   int Kmax, int Nmax, std::uint64_t seed) {
  if (!(gamma <= 0.5 * c_lambda_of(base)))
    throw InvalidArgument("sampling needs γ ≤ C_λ/2 for the pruned certificate");
  const auto gmax = sample_gamma_max(count, n, tau, base, Kmax, Nmax, seed);
  AdmissibleSample result;
  result.count = count;
  for (int s = 0; s < count; ++s)
    if (gmax[s] >= gamma) result.accepted.push_back(sample_point(n, seed, s));
  result.rejection_fraction = 1.0 - static_cast<double>(result.accepted.size()) / count;
  if (result.accepted.empty())
    throw NoAdmissibleFrequency("no admissible frequency among " + std::to_string(count) +
                                " samples at γ = " + std::to_string(gamma));
  return result;
}

double resonance_measure_bound(const ResonanceSet& rs) {
  int a = 0;
  for (int c : rs.k) a += std::abs(c);
  if (a == 0) throw InvalidArgument("resonance set needs k ≠ 0");
  return 4.0 * rs.alpha / a;
}

namespace {

using Point = std::array<double, 2>;

// Keeps the part of poly with a·x ≤ b.
std::vector<Point> clip(const std::vector<Point>& poly, Point a, double b) {
  std::vector<Point> out;
  const std::size_t m = poly.size();
  for (std::size_t q = 0; q < m; ++q) {
    const Point& p0 = poly[q];
    const Point& p1 = poly[(q + 1) % m];
    const double f0 = a[0] * p0[0] + a[1] * p0[1] - b;
    const double f1 = a[0] * p1[0] + a[1] * p1[1] - b;
    if (f0 <= 0) out.push_back(p0);
    if ((f0 < 0 && f1 > 0) || (f0 > 0 && f1 < 0)) {
      const double t = f0 / (f0 - f1);
      out.push_back({p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])});
    }
  }
  return out;
}

double area(const std::vector<Point>& poly) {
  double acc = 0.0;
  for (std::size_t q = 0; q < poly.size(); ++q) {
    const Point& p0 = poly[q];
    const Point& p1 = poly[(q + 1) % poly.size()];
    acc += p0[0] * p1[1] - p1[0] * p0[1];
  }
  return std::abs(acc) / 2.0;
}

}  // namespace

double resonance_measure_exact(const ResonanceSet& rs) {
  resonance_measure_bound(rs);
  if (rs.alpha <= 0.0) return 0.0;
  if (rs.k.size() == 1) {
    const double k = rs.k[0];
    double lo = (-rs.alpha - rs.center) / k, hi = (rs.alpha - rs.center) / k;
    if (lo > hi) std::swap(lo, hi);
    return std::max(0.0, std::min(hi, 1.0) - std::max(lo, 0.0));
  }
  if (rs.k.size() != 2) throw InvalidArgument("exact slab measure implemented for n ≤ 2");
  std::vector<Point> square = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const Point a = {static_cast<double>(rs.k[0]), static_cast<double>(rs.k[1])};
  auto poly = clip(square, a, rs.alpha - rs.center);
  if (poly.empty()) return 0.0;
  poly = clip(poly, {-a[0], -a[1]}, rs.alpha + rs.center);
  return poly.size() < 3 ? 0.0 : area(poly);
}

double resonance_measure_mc(const ResonanceSet& rs, int samples, std::uint64_t seed) {
  resonance_measure_bound(rs);
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const std::size_t n = rs.k.size();
  std::vector<double> w(n);
  int hits = 0;
  for (int s = 0; s < samples; ++s) {
    for (auto& x : w) x = uniform(rng);
    if (std::abs(rs.center + dot(w, rs.k)) <= rs.alpha) ++hits;
  }
  return static_cast<double>(hits) / samples;
}

}  // namespace kam
