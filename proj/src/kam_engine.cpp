#include "kam/kam_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "kam/diophantine.hpp"
#include "kam/errors.hpp"
#include "kam/fourier.hpp"
#include "kam/homological.hpp"
#include "kam/kernels.hpp"
#include "kam/linalg.hpp"
#include "kam/norms.hpp"

namespace kam {

double KamSettings::tau_for(int n) const { return tau > 0.0 ? tau : n + 2.0 / (d - 1.0) + 1.0; }

double KamSettings::theta_value() const { return theta > 0.0 ? theta : (delta / (d - 1.0) + 1.0) / 2.0; }

std::vector<std::string> KamSettings::validate(int n) const {
  if (!(d > 1.0)) throw InvalidArgument("growth exponent d must exceed 1");
  if (!(delta < d - 1.0)) throw InvalidArgument("need δ < d − 1");
  if (!(epsilon >= 0.0)) throw InvalidArgument("ε must be non-negative");
  if (!(s > 0.0)) throw InvalidArgument("strip width s must be positive");
  if (!(gamma > 0.0)) throw InvalidArgument("γ must be positive");
  const double th = theta_value();
  if (!(th > 0.0 && th < 1.0)) throw InvalidArgument("θ must lie in (0, 1)");
  if (K < 1 || N < 2) throw InvalidArgument("need K ≥ 1 and N ≥ 2");
  if (l_max < 0) throw InvalidArgument("l_max must be non-negative");
  if (oversample < 1) throw InvalidArgument("oversampling factor must be positive");
  std::vector<std::string> warnings;
  const double bound = n + 2.0 / (d - 1.0);
  if (!(tau_for(n) > bound))
    warnings.push_back("tau = " + std::to_string(tau_for(n)) + " does not exceed n + 2/(d-1) = " +
                       std::to_string(bound));
  return warnings;
}

double KamSettings::sigma(double s, int l) { return s / (4.0 * l * l); }

double KamSettings::strip(double s, int l) {
  double sl = s;
  for (int m = 1; m <= l; ++m) sl -= sigma(s, m);
  return sl;
}

double KamSettings::scheduled_epsilon(double epsilon, int l) { return std::pow(epsilon, std::pow(4.0 / 3.0, l)); }

DiagSplit diag_split(const OperatorSeries& P) {
  DiagSplit out;
  out.offdiag = P.offdiagonal();
  for (int i = 0; i < P.rows(); ++i) {
    const cplx mean = P(i, i).mean();
    if (std::abs(mean.imag()) > 1e-12 * std::max(1.0, std::abs(mean)))
      throw HermiticityError("diagonal entry " + std::to_string(i + 1) + " has a non-real average");
    out.lambda_shift.push_back(mean.real());
    TorusSeries mu = P(i, i);
    mu[mu.lattice().zero_index()] = cplx{};
    out.mu_add.push_back(std::move(mu));
  }
  return out;
}

namespace {

OperatorSeries hermitian_part(const OperatorSeries& X) {
  OperatorSeries out = X;
  const auto& lat = X.lattice();
  for (int j = 0; j < X.rows(); ++j) {
    for (int i = 0; i <= j; ++i) {
      const auto& a = X(i, j);
      const auto& b = X(j, i);
      auto& oa = out(i, j);
      auto& ob = out(j, i);
      for (std::size_t idx = 0; idx < lat.size(); ++idx) {
        const cplx v = (a[idx] + std::conj(b[lat.negated(idx)])) / 2.0;
        oa[idx] = v;
        ob[lat.negated(idx)] = std::conj(v);
      }
    }
  }
  return out;
}

int mu_cutoff(const DiagonalPart& A) {
  int K = 0;
  for (const auto& m : A.mu) K = std::max(K, m.cutoff());
  return K;
}

double residue_beyond(const OperatorSeries& full, int K_out, const Eigen::VectorXd& w) {
  const auto& lat = full.lattice();
  double acc = 0.0;
  for (std::size_t idx = 0; idx < lat.size(); ++idx) {
    if (lat.linf(idx) <= K_out) continue;
    double fro = 0.0;
    for (int j = 0; j < full.rows(); ++j)
      for (int i = 0; i < full.rows(); ++i) fro += w(i) * w(i) * std::norm(full(i, j)[idx]);
    acc += std::sqrt(fro);
  }
  return acc;
}

}  // namespace

OperatorSeries conjugate(const DiagonalPart& A, const OperatorSeries& P, const OperatorSeries& B,
                         const Frequency& omega, const ConjugateOptions& opts, ConjugateReport* report) {
  if (P.rows() != A.size() || B.rows() != A.size()) throw InvalidArgument("conjugation operands differ in size");
  if (omega.dim() != P.dim()) throw InvalidArgument("frequency dimension differs from angle dimension");
  const int N = P.rows();
  const int n = P.dim();
  const int K_in = std::max({P.cutoff(), B.cutoff(), mu_cutoff(A)});
  const int K_out = opts.K_out >= 0 ? opts.K_out : K_in;
  const int M = fft_friendly(opts.oversample * (2 * std::max(K_in, K_out) + 2));
  const int K_big = (M - 2) / 2;

  const OperatorGrid gP = sample(P, M);
  const OperatorGrid gB = sample(B, M);
  const OperatorGrid gBdot = sample(directional_derivative(B, omega.omega), M);
  const auto gmu = sample_diagonal(A.mu, M);
  kernels::ConjugationInput in{A.lambda, gmu, &gP, &gB, &gBdot};
  OperatorGrid out(N, GridSpec{n, M});

  kernels::ConjugationStats stats;
  if (opts.reference) {
    OperatorGrid E(N, GridSpec{n, M});
    if (opts.parallel)
      kernels::omp::expm_grid(gB, E);
    else
      kernels::ref::expm_grid(gB, E);
    const OperatorGrid Edot = sample(directional_derivative(project(E, K_big), omega.omega), M);
    stats = opts.parallel ? kernels::omp::expm_assemble(in, E, Edot, out)
                          : kernels::ref::expm_assemble(in, E, Edot, out);
  } else {
    stats = opts.parallel ? kernels::omp::lie_conjugate(in, out, opts.max_order, opts.tol)
                          : kernels::ref::lie_conjugate(in, out, opts.max_order, opts.tol);
  }
  const OperatorSeries full = project(out, K_big);
  if (report) {
    report->order = stats.order;
    report->hermiticity_defect = stats.hermiticity_defect;
    report->truncation_residue = residue_beyond(full, K_out, A.weights());
    report->grid = M;
  }
  return hermitian_part(full.resized(K_out));
}

Eigen::MatrixXcd compose_transformations(const std::vector<OperatorSeries>& generators,
                                         std::span<const double> phi) {
  if (generators.empty()) return Eigen::MatrixXcd::Identity(1, 1);
  const int N = generators.front().rows();
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(N, N);
  for (const auto& B : generators) U = U * expm(B(phi));
  return U;
}

double composed_unitarity_defect(const std::vector<OperatorSeries>& generators, int M) {
  if (generators.empty() || M <= 0) return 0.0;
  const int N = generators.front().rows();
  const int n = generators.front().dim();
  GridSpec coarse{n, M};
  OperatorGrid U(N, coarse), E(N, coarse), tmp(N, coarse);
  for (std::size_t g = 0; g < coarse.points(); ++g) U.at(g).setIdentity();
  for (const auto& B : generators) {
    int factor = 1;
    while (M * factor < 2 * B.cutoff() + 2) ++factor;
    const OperatorGrid fine = sample(B, M * factor);
    OperatorGrid sub(N, coarse);
    const std::size_t pts = coarse.points();
    for (std::size_t g = 0; g < pts; ++g) {
      std::size_t rest = g, pos = 0;
      std::vector<std::size_t> digits(n);
      for (int l = n - 1; l >= 0; --l) {
        digits[l] = rest % M;
        rest /= M;
      }
      for (int l = 0; l < n; ++l) pos = pos * (M * factor) + digits[l] * factor;
      sub.at(g) = fine.at(pos);
    }
    kernels::omp::expm_grid(sub, E);
    for (std::size_t g = 0; g < pts; ++g) tmp.at(g) = U.at(g) * E.at(g);
    std::swap(U, tmp);
  }
  return kernels::omp::max_unitarity_defect(U);
}

KamState initial_state(const DiagonalPart& A0, const OperatorSeries& P0, const KamSettings& settings) {
  A0.validate();
  if (P0.rows() != A0.size()) throw InvalidArgument("perturbation and diagonal part differ in size");
  KamState st;
  st.A = A0;
  st.P = P0;
  st.gamma = settings.gamma;
  st.C_lambda = settings.C_lambda > 0.0 ? settings.C_lambda : A0.lambda_separation();
  st.s = settings.s;
  st.initial_norm = delta_norm(P0, A0, settings.s);
  return st;
}

namespace {

void certify(const KamState& st, const Frequency& omega, const KamSettings& settings, double gamma, int step,
             double* gamma_max) {
  Frequency f = omega;
  f.gamma = gamma;
  f.tau = settings.tau_for(omega.dim());
  const int Nmax = settings.cert_N > 0 ? std::min(settings.cert_N, st.A.size()) : st.A.size();
  const auto cert = check_dio2(f, st.A, settings.cert_cutoff(omega.dim()), Nmax);
  if (gamma_max) *gamma_max = cert.gamma_max;
  if (!cert.pass) throw FrequencyExcluded(step, cert.i, cert.j, cert.k, cert.divisor, cert.bound);
}

int effective_cutoff(int K_l, double tau, double gamma, double p) {
  int best = -1;
  for (int K = 0; K <= K_l; ++K) {
    const double w = 1.0 + (K == 0 ? 0.0 : std::pow(static_cast<double>(K), tau));
    if (w < gamma / p) best = K;
  }
  return std::max(best, 0);
}

}  // namespace

KamState kam_step(const KamState& state, const Frequency& omega, const KamSettings& settings,
                  StepRecord* record) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = omega.dim();
  const int l1 = state.l + 1;
  const double tau = settings.tau_for(n);
  StepRecord rec;
  rec.l = l1;
  rec.s_in = state.s;
  rec.s_out = state.s - KamSettings::sigma(settings.s, l1);
  rec.K_l = l1 * settings.K;
  rec.eps_scheduled = KamSettings::scheduled_epsilon(settings.epsilon, state.l);

  const double p = delta_norm(state.P, state.A, state.s);
  rec.norm_in = p;
  KamState next = state;
  next.l = l1;
  if (p == 0.0) {
    rec.gamma = state.gamma;
    rec.C_mu = state.C_mu;
    rec.C_lambda = state.C_lambda;
    rec.C_omega = state.C_omega;
    if (record) *record = rec;
    return next;
  }
  auto warn = [&](const std::string& msg) {
    if (settings.strict_guards) throw GuardViolated(msg);
    rec.warnings.push_back(msg);
  };
  if (state.l >= 1 && p > rec.eps_scheduled * (1.0 + 1e-12))
    rec.warnings.push_back("measured norm exceeds scheduled epsilon_l");

  certify(state, omega, settings, state.gamma, l1, nullptr);

  const DiagSplit split = diag_split(state.P);
  HomologicalOptions hopts;
  hopts.divisor_floor = settings.divisor_floor;
  hopts.tau = tau;
  hopts.s = state.s;
  hopts.theta = settings.theta_value();
  hopts.guard_C = settings.guard_C;
  hopts.Cstar = settings.Cstar;
  hopts.C_mu = state.C_mu;
  hopts.C_lambda = state.C_lambda;
  const int K_work = settings.work_cutoff();
  hopts.K_out = std::min(K_work, state.P.cutoff() + (state.A.mu_vanishes() ? 0 : mu_cutoff(state.A)));
  const HomologicalSolution sol = solve_variable(state.P, state.A, omega, hopts);
  rec.hom_residual = sol.residual;
  rec.divisor_floor = sol.divisor_floor;
  for (const auto& w : sol.warnings) warn(w);
  if (state.C_omega > settings.Comega_star) warn("C_omega exceeds C_omega*");

  rec.g_norm_B = g_norm(sol.B, state.A, 0.0);
  if (rec.g_norm_B > 0.5) warn("generator norm exceeds 1/2");

  ConjugateOptions copts;
  copts.K_out = K_work;
  copts.oversample = settings.oversample;
  copts.max_order = settings.lie_max_order;
  copts.tol = settings.lie_tol;
  ConjugateReport crep;
  next.P = conjugate(state.A, state.P, sol.B, omega, copts, &crep);
  rec.hermiticity_defect = crep.hermiticity_defect;
  rec.lie_order = crep.order;
  rec.truncation_residue = crep.truncation_residue;

  for (int i = 0; i < state.A.size(); ++i) {
    next.A.lambda[i] += split.lambda_shift[i];
    next.A.mu[i] += split.mu_add[i];
  }
  next.generators.push_back(sol.B);

  rec.K_eff = effective_cutoff(rec.K_l, tau, state.gamma, p);
  if (rec.K_eff < rec.K_l) warn("K-threshold guard: using K_eff = " + std::to_string(rec.K_eff));
  next.gamma = state.gamma - p * (1.0 + (rec.K_eff == 0 ? 0.0 : std::pow(rec.K_eff, tau)));
  next.C_mu = state.C_mu + p;
  next.C_omega = state.C_omega + p;
  next.C_lambda = state.C_lambda - 2.0 * p;
  rec.gamma = next.gamma;
  rec.C_mu = next.C_mu;
  rec.C_lambda = next.C_lambda;
  rec.C_omega = next.C_omega;
  if (!(next.gamma > 0.0)) throw GuardViolated("gamma_" + std::to_string(l1) + " is not positive");
  if (!(next.C_lambda > 0.0)) throw GuardViolated("C_lambda_" + std::to_string(l1) + " is not positive");

  certify(next, omega, settings, next.gamma, l1, &rec.cert_gamma_max);

  next.s = rec.s_out;
  rec.norm_out = delta_norm(next.P, next.A, next.s);
  next.norm_history.push_back(rec.norm_out);
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (record) *record = rec;
  return next;
}

RunResult run_schedule(const DiagonalPart& A0, const OperatorSeries& P0, const Frequency& omega,
                       const KamSettings& settings, const StepCallback& on_step) {
  const int n = omega.dim();
  if (P0.dim() != n) throw InvalidArgument("frequency dimension differs from angle dimension");
  RunResult result;
  const auto warnings = settings.validate(n);
  result.reason = warnings.empty() ? "" : warnings.front();

  Frequency f1 = omega;
  f1.gamma = settings.gamma;
  f1.tau = settings.tau_for(n);
  const auto d1 = check_dio1(f1, settings.cert_cutoff(n));
  if (!d1.pass) throw FrequencyExcluded(0, 0, 0, d1.witness, d1.witness_value, d1.gamma);

  KamState state = initial_state(A0, P0, settings);
  double current = state.initial_norm;
  for (;;) {
    if (current < settings.tol) {
      result.converged = true;
      result.reason = "converged";
      break;
    }
    if (state.l >= settings.l_max) {
      result.diverged = true;
      result.reason = "l_max reached";
      break;
    }
    StepRecord rec;
    KamState next;
    try {
      next = kam_step(state, omega, settings, &rec);
    } catch (const GuardViolated& e) {
      result.diverged = true;
      result.reason = std::string("guard violated: ") + e.what();
      break;
    } catch (const ConvergenceError& e) {
      result.diverged = true;
      result.reason = std::string("conjugation failed: ") + e.what();
      break;
    }
    if (settings.unitarity_grid > 0) {
      rec.unitarity_defect = composed_unitarity_defect(next.generators, settings.unitarity_grid);
      result.max_unitarity_defect = std::max(result.max_unitarity_defect, rec.unitarity_defect);
    }
    result.steps.push_back(rec);
    if (on_step) on_step(rec);
    const bool increased = rec.norm_out >= current;
    state = std::move(next);
    current = rec.norm_out;
    if (increased) {
      result.diverged = true;
      result.reason = "perturbation norm increased";
      break;
    }
  }
  result.reduced.lambda_inf = state.A.lambda;
  result.reduced.mu_inf = state.A.mu;
  result.reduced.generators = state.generators;
  result.reduced.omega = omega;
  for (int i = 0; i < A0.size(); ++i) {
    if (settings.epsilon <= 0.0) break;
    const double c = std::abs(state.A.lambda[i] - A0.lambda[i]) / (std::pow(i + 1.0, settings.delta) * settings.epsilon);
    result.lambda_shift_constant = std::max(result.lambda_shift_constant, c);
  }
  result.final = std::move(state);
  return result;
}

}  // namespace kam
