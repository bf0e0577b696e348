#include "kam/homological.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>

#include "kam/errors.hpp"
#include "kam/fourier.hpp"
#include "kam/norms.hpp"

namespace kam {

namespace {

constexpr cplx I1{0.0, 1.0};

double floor_at(const HomologicalOptions& opts, double tau, int l1) {
  return opts.divisor_floor * std::pow(1.0 + l1, -tau);
}

double tau_of(const HomologicalOptions& opts, const Frequency& omega) {
  return opts.tau > 0.0 ? opts.tau : omega.tau;
}

void check_frequency(const Frequency& omega, int n) {
  if (omega.dim() != n) throw InvalidArgument("frequency dimension differs from angle dimension");
}

}  // namespace

HomologicalSolution solve_constant(const OperatorSeries& P, const DiagonalPart& base, const Frequency& omega,
                                   const HomologicalOptions& opts) {
  if (P.rows() != base.size()) throw InvalidArgument("operator and diagonal part differ in size");
  if (!base.mu_vanishes()) throw InvalidArgument("solve_constant needs μ ≡ 0");
  check_frequency(omega, P.dim());
  const int N = P.rows();
  const double tau = tau_of(opts, omega);
  const auto& lat = P.lattice();
  HomologicalSolution sol;
  sol.B = OperatorSeries(N, P.dim(), P.cutoff());
  sol.divisor_floor = std::numeric_limits<double>::infinity();
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      if (i == j) continue;
      const auto& p = P(i, j);
      auto& b = sol.B(i, j);
      for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        if (p[idx] == cplx{}) continue;
        const double div = lat.dot(omega.omega, idx) + (base.lambda[i] - base.lambda[j]);
        const double fl = floor_at(opts, tau, lat.l1(idx));
        sol.divisor_floor = std::min(sol.divisor_floor, std::abs(div));
        if (std::abs(div) < fl) throw DivisorTooSmall(i + 1, j + 1, lat.mode_vector(idx), div, fl);
        b[idx] = -p[idx] / div;
      }
    }
  }
  if (opts.compute_residual) {
    const double pn = delta_norm(P, base, 0.0);
    sol.residual = pn > 0.0 ? homological_defect(sol.B, P, base, omega) / pn : 0.0;
  }
  return sol;
}

TorusSeries torus_primitive(const TorusSeries& h, const Frequency& omega, double floor) {
  check_frequency(omega, h.dim());
  if (!h.has_zero_average(1e-14 * std::max(1.0, h.max_abs_coeff())))
    throw InvalidArgument("primitive needs a zero-average function");
  const auto& lat = h.lattice();
  TorusSeries H(h.dim(), h.cutoff());
  for (std::size_t idx = 0; idx < h.size(); ++idx) {
    if (idx == lat.zero_index() || h[idx] == cplx{}) continue;
    const double wk = lat.dot(omega.omega, idx);
    const double fl = floor * std::pow(1.0 + lat.l1(idx), -omega.tau);
    if (std::abs(wk) < fl) throw DivisorTooSmall(0, 0, lat.mode_vector(idx), wk, fl);
    H[idx] = h[idx] / (I1 * wk);
  }
  return H;
}

KuksinSolution solve_kuksin(const TorusSeries& b, const TorusSeries& h, double E1, double E2,
                            const Frequency& omega, const HomologicalOptions& opts) {
  if (!(E1 > 0.0)) throw InvalidArgument("Kuksin equation needs E1 > 0");
  if (E2 < 0.0) throw InvalidArgument("Kuksin equation needs E2 ≥ 0");
  check_frequency(omega, b.dim());
  if (h.dim() != b.dim()) throw InvalidArgument("b and h differ in angle dimension");
  if (!h.has_zero_average(1e-14 * std::max(1.0, h.max_abs_coeff())))
    throw InvalidArgument("h must have zero average");
  const double tau = tau_of(opts, omega);
  const int n = b.dim();

  KuksinSolution out;
  out.guard_ok = std::pow(E1, opts.theta) >= opts.guard_C * E2;
  out.min_divisor = std::numeric_limits<double>::infinity();

  auto divide = [&](const TorusSeries& f, int K) {
    TorusSeries u(n, K);
    const auto& lat = u.lattice();
    const TorusSeries fr = f.resized(K);
    for (std::size_t idx = 0; idx < lat.size(); ++idx) {
      const double div = lat.dot(omega.omega, idx) + E1;
      out.min_divisor = std::min(out.min_divisor, std::abs(div));
      if (fr[idx] == cplx{}) continue;
      const double fl = floor_at(opts, tau, lat.l1(idx));
      if (std::abs(div) < fl) throw DivisorTooSmall(0, 0, lat.mode_vector(idx), div, fl);
      u[idx] = fr[idx] / div;
    }
    return u;
  };

  const bool constant = E2 == 0.0 || h.max_abs_coeff() == 0.0;
  const int K_out = opts.K_out >= 0 ? opts.K_out : (constant ? b.cutoff() : 2 * std::max(b.cutoff(), h.cutoff()));
  if (constant) {
    out.chi = divide(b, K_out);
    return out;
  }

  const TorusSeries H = torus_primitive(h, omega, opts.divisor_floor);
  const int K_ref = std::max({K_out, b.cutoff(), h.cutoff()});
  const int M = fft_friendly(opts.oversample * (2 * K_ref + 2));
  const int K_u = (M - 2) / 2;

  const auto gH = sample(H, M);
  const auto gb = sample(b, M);
  std::vector<cplx> plus(gH.size()), f(gH.size());
  for (std::size_t g = 0; g < gH.size(); ++g) {
    plus[g] = std::exp(I1 * E2 * gH[g]);
    out.unimodularity_defect = std::max(out.unimodularity_defect, std::abs(std::abs(plus[g]) - 1.0));
    f[g] = plus[g] * gb[g];
  }
  const TorusSeries u = divide(project(f, n, M, K_u), K_u);
  auto gu = sample(u, M);
  for (std::size_t g = 0; g < gu.size(); ++g) gu[g] /= plus[g];
  out.chi = project(gu, n, M, K_out);
  return out;
}

TorusSeries solve_kuksin_dense(const TorusSeries& b, const TorusSeries& h, double E1, double E2,
                               const Frequency& omega, int K) {
  const int n = b.dim();
  check_frequency(omega, n);
  auto lat = Lattice::get(n, K);
  const auto size = static_cast<Eigen::Index>(lat->size());
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(size, size);
  Eigen::VectorXcd rhs(size);
  std::vector<int> diff(n);
  for (Eigen::Index r = 0; r < size; ++r) {
    A(r, r) = lat->dot(omega.omega, r) + E1;
    rhs(r) = b.coeff(lat->mode(r));
    const auto kr = lat->mode(r);
    for (Eigen::Index c = 0; c < size; ++c) {
      const auto kc = lat->mode(c);
      for (int l = 0; l < n; ++l) diff[l] = kr[l] - kc[l];
      A(r, c) += E2 * h.coeff(diff);
    }
  }
  const Eigen::VectorXcd x = A.partialPivLu().solve(rhs);
  TorusSeries chi(n, K);
  for (Eigen::Index r = 0; r < size; ++r) chi[r] = x(r);
  return chi;
}

HomologicalSolution solve_variable(const OperatorSeries& P, const DiagonalPart& base, const Frequency& omega,
                                   const HomologicalOptions& opts) {
  if (P.rows() != base.size()) throw InvalidArgument("operator and diagonal part differ in size");
  check_frequency(omega, P.dim());
  const int N = P.rows();
  const int n = P.dim();
  int K_mu = 0;
  for (const auto& m : base.mu) K_mu = std::max(K_mu, m.cutoff());
  HomologicalOptions local = opts;
  if (local.K_out < 0) local.K_out = base.mu_vanishes() ? P.cutoff() : P.cutoff() + K_mu;

  HomologicalSolution sol;
  sol.B = OperatorSeries(N, n, local.K_out);
  sol.divisor_floor = std::numeric_limits<double>::infinity();
  if (opts.C_lambda > 0.0 && !(opts.C_mu / opts.C_lambda < opts.Cstar)) {
    sol.guard_ok = false;
    sol.warnings.push_back("C_mu/C_lambda guard exceeds C*");
  }

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) pairs.emplace_back(i, j);
  std::vector<KuksinSolution> results(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t q = 0; q < static_cast<std::int64_t>(pairs.size()); ++q) {
    const auto [i, j] = pairs[q];
    try {
      TorusSeries diff = base.mu.empty() ? TorusSeries(n, 0) : base.mu[j] - base.mu[i];
      const double E2 = sup_norm_s(diff, opts.s);
      TorusSeries h = diff;
      if (E2 > 0.0) h *= 1.0 / E2;
      TorusSeries b = P(j, i);
      b *= -1.0;
      results[q] = solve_kuksin(b, h, base.lambda[j] - base.lambda[i], E2, omega, local);
    } catch (const DivisorTooSmall& e) {
      try {
        throw DivisorTooSmall(j + 1, i + 1, e.k, e.divisor, e.floor);
      } catch (...) {
        errors[q] = std::current_exception();
      }
    } catch (...) {
      errors[q] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    sol.B(j, i) = results[q].chi.resized(local.K_out);
    sol.B(i, j) = sol.B(j, i).conj_on_torus();
    sol.B(i, j) *= -1.0;
    sol.divisor_floor = std::min(sol.divisor_floor, results[q].min_divisor);
    if (!results[q].guard_ok && sol.guard_ok) {
      sol.guard_ok = false;
      sol.warnings.push_back("Kuksin guard E1^theta >= C*E2 violated at pair (" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1) + ")");
    }
    if (results[q].unimodularity_defect > 1e-12)
      sol.warnings.push_back("integrating factor not unimodular at pair (" + std::to_string(i + 1) + "," +
                             std::to_string(j + 1) + ")");
  }
  if (opts.compute_residual) {
    const double pn = delta_norm(P, base, 0.0);
    sol.residual = pn > 0.0 ? homological_defect(sol.B, P, base, omega) / pn : 0.0;
  }
  return sol;
}

double homological_defect(const OperatorSeries& B, const OperatorSeries& P, const DiagonalPart& base,
                          const Frequency& omega) {
  const int N = B.rows();
  int K_mu = 0;
  for (const auto& m : base.mu) K_mu = std::max(K_mu, m.cutoff());
  const int K = std::max(B.cutoff() + K_mu, P.cutoff());
  const int M = fft_friendly(2 * K + 2);
  const auto gB = sample(B, M);
  const auto gBdot = sample(directional_derivative(B, omega.omega), M);
  const auto gP = sample(P, M);
  const auto gmu = sample_diagonal(base.mu, M);
  const Eigen::VectorXd w = base.weights();
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (std::int64_t g = 0; g < static_cast<std::int64_t>(gB.points()); ++g) {
    const auto b = gB.at(g);
    const auto bd = gBdot.at(g);
    const auto p = gP.at(g);
    const cplx* mu = gmu.empty() ? nullptr : gmu.data() + g * N;
    double acc = 0.0;
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) {
        cplx gap = base.lambda[i] - base.lambda[j];
        if (mu) gap += mu[i] - mu[j];
        cplx r = gap * b(i, j) - I1 * bd(i, j);
        if (i != j) r += p(i, j);
        acc += w(i) * w(i) * std::norm(r);
      }
    }
    worst = std::max(worst, std::sqrt(acc));
  }
  return worst;
}

}  // namespace kam
