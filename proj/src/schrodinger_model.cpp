#include "kam/schrodinger_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <lapacke.h>

#include "kam/errors.hpp"
#include "kam/norms.hpp"

namespace kam {

double OscillatorSpec::potential(double x) const {
  if (Q.empty()) return std::pow(std::abs(x), alpha);
  double v = 0.0;
  for (const auto& t : Q) v += t.coef * std::pow(std::abs(x), t.power);
  return v;
}

double SpatialTerm::operator()(double x) const {
  if (kind == "monomial") return std::pow(x, static_cast<int>(std::lround(power)));
  if (kind == "smooth") return std::pow(1.0 + x * x, power / 2.0);
  if (kind == "abs") return std::pow(std::abs(x), power);
  if (kind == "const") return power;
  throw InvalidArgument("unknown spatial term kind '" + kind + "'");
}

namespace {

double turning_point(const OscillatorSpec& spec, double lambda) {
  double hi = 1.0;
  while (spec.potential(hi) < lambda) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (spec.potential(mid) < lambda ? lo : hi) = mid;
  }
  return hi;
}

// ∫_{−x_t}^{x_t} sqrt(λ − Q) dx with x = x_t sin θ.
double action(const OscillatorSpec& spec, double lambda) {
  const double xt = turning_point(spec, lambda);
  const int m = 2000;
  double acc = 0.0;
  for (int q = 0; q < m; ++q) {
    const double th = -std::numbers::pi / 2 + (q + 0.5) * std::numbers::pi / m;
    const double x = xt * std::sin(th);
    acc += std::sqrt(std::max(0.0, lambda - spec.potential(x))) * xt * std::cos(th);
  }
  return acc * std::numbers::pi / m;
}

// λ with action = π(mode − 1/2).
double wkb_level(const OscillatorSpec& spec, int mode) {
  const double target = std::numbers::pi * (mode - 0.5);
  double lo = 0.0, hi = 1.0;
  while (action(spec, hi) < target) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (action(spec, mid) < target ? lo : hi) = mid;
  }
  return hi;
}

double domain_half_width(const OscillatorSpec& spec, double lambda) {
  double x = turning_point(spec, lambda);
  const double h = 1e-3 * std::max(1.0, x);
  double acc = 0.0;
  while (acc < spec.decay) {
    acc += std::sqrt(std::max(0.0, spec.potential(x + 0.5 * h) - lambda)) * h;
    x += h;
  }
  return x;
}

}  // namespace

Oscillator discretize_oscillator(const OscillatorSpec& spec, double dx, double L, int N) {
  const int m = static_cast<int>(std::ceil(L / dx));
  const int size = 2 * m + 1;
  if (N > size) throw InvalidArgument("grid too small for the requested number of modes");
  Oscillator osc;
  osc.dx = dx;
  osc.L = L;
  osc.spec = spec;
  osc.x.resize(size);
  for (int g = 0; g < size; ++g) osc.x[g] = (g - m) * dx;

  std::vector<double> H(static_cast<std::size_t>(size) * size);
  const double t0 = std::numbers::pi * std::numbers::pi / (3.0 * dx * dx);
  for (int c = 0; c < size; ++c) {
    for (int r = 0; r < size; ++r) {
      double v;
      if (r == c) {
        v = t0 + spec.potential(osc.x[r]);
      } else {
        const int dd = r - c;
        v = ((dd % 2) ? -2.0 : 2.0) / (dx * dx * dd * dd);
      }
      H[static_cast<std::size_t>(c) * size + r] = v;
    }
  }
  std::vector<double> w(size), z(static_cast<std::size_t>(size) * N);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(N));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', size, H.data(), size, 0.0, 0.0, 1, N,
                                         0.0, &found, w.data(), z.data(), size, support.data());
  if (info != 0 || found != N) throw ConvergenceError("eigensolver failed (info " + std::to_string(info) + ")");

  osc.lambda.assign(w.begin(), w.begin() + N);
  osc.psi = Eigen::Map<Eigen::MatrixXd>(z.data(), size, N);
  for (int i = 0; i < N; ++i) {
    auto col = osc.psi.col(i);
    const double peak = col.cwiseAbs().maxCoeff();
    for (int g = size - 1; g >= 0; --g) {
      if (std::abs(col(g)) > 1e-3 * peak) {
        if (col(g) < 0) col *= -1.0;
        break;
      }
    }
  }
  osc.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < N; ++i) osc.min_gap = std::min(osc.min_gap, osc.lambda[i + 1] - osc.lambda[i]);
  return osc;
}

Oscillator build_oscillator(const OscillatorSpec& spec) {
  if (!spec.allow_alpha_le_2 && !(spec.alpha > 2.0)) throw InvalidArgument("need α > 2");
  if (spec.N < 1) throw InvalidArgument("need at least one mode");
  const double lmax = 1.2 * wkb_level(spec, spec.N + spec.extra_modes);
  const double L = domain_half_width(spec, lmax);
  double resolution = spec.resolution;
  for (int attempt = 0; attempt < 4; ++attempt, resolution *= 1.25) {
    const double dx = std::numbers::pi / (resolution * std::sqrt(lmax));
    Oscillator coarse = discretize_oscillator(spec, dx, L, spec.N);
    const Oscillator fine = discretize_oscillator(spec, dx / 2.0, L, spec.N);
    double worst = 0.0;
    int bad = -1;
    for (int i = 0; i < spec.N; ++i) {
      const double rel = std::abs(coarse.lambda[i] - fine.lambda[i]) / std::abs(fine.lambda[i]);
      if (rel > spec.tolerance && bad < 0) bad = i;
      worst = std::max(worst, rel);
    }
    if (bad >= 0 && attempt < 3) continue;
    if (bad >= 0)
      throw ConvergenceError("oscillator mode " + std::to_string(bad + 1) + " not converged (relative change " +
                             std::to_string(worst) + ")");
    if (!(coarse.min_gap > 0.0)) throw ConvergenceError("oscillator spectrum is not simple");
    coarse.certificate = worst;
    coarse.lambda_fine = fine.lambda;
    return coarse;
  }
  throw ConvergenceError("oscillator discretization did not converge");
}

FitResult asymptotic_exponent_fit(const std::vector<double>& lambdas, int i_lo, int i_hi) {
  if (i_lo < 1 || i_hi > static_cast<int>(lambdas.size()) || i_hi - i_lo + 1 < 5)
    throw InvalidArgument("exponent fit needs at least 5 computed modes");
  const int m = i_hi - i_lo + 1;
  double sx = 0, sy = 0;
  for (int i = i_lo; i <= i_hi; ++i) {
    if (!(lambdas[i - 1] > 0.0)) throw InvalidArgument("exponent fit needs positive eigenvalues");
    sx += std::log(i);
    sy += std::log(lambdas[i - 1]);
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (int i = i_lo; i <= i_hi; ++i) {
    const double dx = std::log(i) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(lambdas[i - 1]) - my);
  }
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0;
  for (int i = i_lo; i <= i_hi; ++i) {
    const double r = std::log(lambdas[i - 1]) - fit.intercept - fit.slope * std::log(i);
    rss += r * r;
  }
  fit.stderr_ = std::sqrt(rss / std::max(1, m - 2) / sxx);
  return fit;
}

Eigen::MatrixXd matrix_elements(const SpatialTerm& v, const Oscillator& osc, int N) {
  if (N > osc.psi.cols()) throw InvalidArgument("more modes requested than computed");
  Eigen::VectorXd vx(static_cast<Eigen::Index>(osc.x.size()));
  for (std::size_t g = 0; g < osc.x.size(); ++g) vx(g) = v(osc.x[g]);
  const auto Psi = osc.psi.leftCols(N);
  Eigen::MatrixXd out = Psi.transpose() * vx.asDiagonal() * Psi;
  return (out + out.transpose()) / 2.0;
}

OperatorSeries perturbation_matrix(const PerturbationSpec& spec, const Oscillator& osc, int N, int K,
                                   double tolerance) {
  if (N > osc.psi.cols()) throw InvalidArgument("more modes requested than computed");
  OperatorSeries P(N, spec.n, K);
  Oscillator fine;
  bool have_fine = false;
  for (std::size_t m = 0; m < spec.terms.size(); ++m) {
    const auto& term = spec.terms[m];
    if (term.g.dim() != spec.n) throw InvalidArgument("angular factor dimension mismatch");
    if (term.g.cutoff() > K) throw InvalidArgument("angular factor exceeds the cutoff");
    if (!term.g.is_real_on_torus(1e-14)) throw InvalidArgument("angular factor must be real on the torus");
    const Eigen::MatrixXd V = matrix_elements(term.v, osc, N);
    if (tolerance > 0.0) {
      if (!have_fine) {
        fine = discretize_oscillator(osc.spec, osc.dx / 2.0, osc.L, N);
        have_fine = true;
      }
      const Eigen::MatrixXd Vf = matrix_elements(term.v, fine, N);
      Eigen::Index r, c;
      const double worst = (V - Vf).cwiseAbs().maxCoeff(&r, &c);
      if (worst > tolerance)
        throw ConvergenceError("matrix element (" + std::to_string(r + 1) + "," + std::to_string(c + 1) +
                               ") of term " + std::to_string(m + 1) + " not converged: change " +
                               std::to_string(worst));
    }
    const TorusSeries g = term.g.resized(K);
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) {
        if (V(i, j) == 0.0) continue;
        TorusSeries add = g;
        add *= V(i, j);
        P(i, j) += add;
      }
  }
  return P;
}

BoundednessReport delta_boundedness_check(const OperatorSeries& P, const DiagonalPart& base,
                                          const std::vector<double>& delta_grid, double flat_tol) {
  if (P.rows() != base.size()) throw InvalidArgument("operator and diagonal part differ in size");
  BoundednessReport rep;
  const int half = P.rows() / 2;
  if (half < 1) throw InvalidArgument("boundedness check needs N ≥ 2");
  const OperatorSeries Ph = leading_block(P, half);
  for (double delta : delta_grid) {
    DiagonalPart b = base;
    b.delta = delta;
    BoundednessRow row;
    row.delta = delta;
    row.norm_half = delta_norm(Ph, leading_block(b, half), 0.0);
    row.norm_full = delta_norm(P, b, 0.0);
    row.increment = row.norm_half > 0.0 ? (row.norm_full - row.norm_half) / row.norm_half : 0.0;
    row.flat = row.increment < flat_tol;
    rep.rows.push_back(row);
  }
  return rep;
}

OperatorSeries leading_block(const OperatorSeries& P, int M) {
  if (M > P.rows()) throw InvalidArgument("block larger than operator");
  OperatorSeries out(M, P.dim(), P.cutoff());
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) out(i, j) = P(i, j);
  return out;
}

DiagonalPart leading_block(const DiagonalPart& A, int M) {
  if (M > A.size()) throw InvalidArgument("block larger than diagonal part");
  DiagonalPart out = A;
  out.lambda.resize(M);
  out.mu.resize(M);
  return out;
}

DiagonalPart diagonal_from(const Oscillator& osc, int N, int n, double d, double delta) {
  if (N > static_cast<int>(osc.lambda.size())) throw InvalidArgument("more modes requested than computed");
  DiagonalPart A;
  A.d = d;
  A.delta = delta;
  A.lambda.assign(osc.lambda.begin(), osc.lambda.begin() + N);
  A.mu.assign(N, TorusSeries(n, 0));
  return A;
}

}  // namespace kam
