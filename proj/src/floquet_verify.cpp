#include "kam/floquet_verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "kam/diophantine.hpp"
#include "kam/errors.hpp"
#include "kam/linalg.hpp"

namespace kam {

namespace {
constexpr cplx I1{0.0, 1.0};
}

std::vector<FloquetEigenvalue> floquet_spectrum(const ReducedSystem& rs, int Kmax) {
  if (Kmax < 0) throw InvalidArgument("Kmax must be non-negative");
  const int n = rs.omega.dim();
  std::vector<FloquetEigenvalue> out;
  const auto ball = l1_ball(std::max(n, 1), Kmax);
  for (std::size_t j = 0; j < rs.lambda_inf.size(); ++j) {
    for (const auto& k : ball) {
      double wk = 0.0;
      for (int l = 0; l < n; ++l) wk += rs.omega.omega[l] * k[l];
      out.push_back({static_cast<int>(j) + 1, n ? k : Mode{}, rs.lambda_inf[j] + wk, 1});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.nu < b.nu; });
  for (std::size_t a = 0; a < out.size();) {
    std::size_t b = a + 1;
    while (b < out.size() && out[b].nu - out[b - 1].nu <= 1e-12) ++b;
    for (std::size_t c = a; c < b; ++c) out[c].multiplicity = static_cast<int>(b - a);
    a = b;
  }
  return out;
}

Eigen::VectorXcd reduced_phase(const ReducedSystem& rs, double t, double floor) {
  const int N = static_cast<int>(rs.lambda_inf.size());
  Eigen::VectorXcd F = Eigen::VectorXcd::Zero(N);
  for (int j = 0; j < N && j < static_cast<int>(rs.mu_inf.size()); ++j) {
    const auto& mu = rs.mu_inf[j];
    if (mu.empty()) continue;
    const auto& lat = mu.lattice();
    for (std::size_t idx = 0; idx < mu.size(); ++idx) {
      if (idx == lat.zero_index() || mu[idx] == cplx{}) continue;
      const double wk = lat.dot(rs.omega.omega, idx);
      if (std::abs(wk) < floor) throw DivisorTooSmall(j + 1, j + 1, lat.mode_vector(idx), wk, floor);
      F(j) += mu[idx] * (std::exp(I1 * (wk * t)) - 1.0) / (I1 * wk);
    }
  }
  return F;
}

Eigen::VectorXcd reduced_state(const ReducedSystem& rs, const Eigen::VectorXcd& chi0, double t) {
  const Eigen::VectorXcd F = reduced_phase(rs, t);
  Eigen::VectorXcd chi(chi0.size());
  for (Eigen::Index j = 0; j < chi0.size(); ++j) chi(j) = chi0(j) * std::exp(-I1 * (rs.lambda_inf[j] * t + F(j)));
  return chi;
}

Eigen::VectorXcd reconstruct_solution(const ReducedSystem& rs, const Eigen::VectorXcd& chi0, double t) {
  if (static_cast<std::size_t>(chi0.size()) != rs.lambda_inf.size()) throw InvalidArgument("state size mismatch");
  const Eigen::VectorXcd chi = reduced_state(rs, chi0, t);
  if (rs.generators.empty()) return chi;
  std::vector<double> phi(rs.omega.omega);
  for (auto& p : phi) p *= t;
  return compose_transformations(rs.generators, phi) * chi;
}

namespace {

// Hermitian evaluation from the half lattice: P(φ) = P̂_0 + Σ_{k>0} (P̂_k e^{ik·φ} + h.c.).
class HamiltonianEvaluator {
 public:
  HamiltonianEvaluator(const DiagonalPart& A0, const OperatorSeries& P0, double epsilon,
                       const std::vector<double>& omega)
      : A0_(A0), omega_(omega), N_(P0.rows()) {
    const auto& lat = P0.lattice();
    const auto zero = lat.zero_index();
    base_ = epsilon * P0.coefficient(zero);
    std::vector<std::size_t> live;
    for (std::size_t idx = zero + 1; idx < lat.size(); ++idx) {
      if (P0.coefficient(idx).cwiseAbs().maxCoeff() == 0.0) continue;
      live.push_back(idx);
      modes_.push_back(lat.mode_vector(idx));
    }
    stacked_.resize(static_cast<Eigen::Index>(N_) * N_, static_cast<Eigen::Index>(live.size()));
    for (std::size_t q = 0; q < live.size(); ++q) {
      const Eigen::MatrixXcd c = epsilon * P0.coefficient(live[q]);
      stacked_.col(static_cast<Eigen::Index>(q)) = Eigen::Map<const Eigen::VectorXcd>(c.data(), c.size());
    }
    phase_.resize(static_cast<Eigen::Index>(live.size()));
    for (const auto& m : A0.mu) {
      if (m.empty() || m.max_abs_coeff() == 0.0) continue;
      if (m.dim() != static_cast<int>(omega.size())) throw InvalidArgument("μ angle dimension mismatch");
      varying_mu_ = true;
    }
  }

  Eigen::MatrixXcd operator()(double t) const {
    for (std::size_t q = 0; q < modes_.size(); ++q) {
      double phase = 0.0;
      for (std::size_t l = 0; l < omega_.size(); ++l) phase += modes_[q][l] * omega_[l] * t;
      phase_(static_cast<Eigen::Index>(q)) = std::polar(1.0, phase);
    }
    Eigen::MatrixXcd half(N_, N_);
    Eigen::Map<Eigen::VectorXcd>(half.data(), half.size()).noalias() = stacked_ * phase_;
    Eigen::MatrixXcd H = base_ + half + half.adjoint();
    for (int i = 0; i < N_; ++i) H(i, i) += A0_.lambda[i];
    if (varying_mu_) {
      std::vector<double> phi(omega_);
      for (auto& p : phi) p *= t;
      for (int i = 0; i < N_ && i < static_cast<int>(A0_.mu.size()); ++i)
        if (!A0_.mu[i].empty()) H(i, i) += A0_.mu[i](phi);
    }
    return H;
  }

 private:
  const DiagonalPart& A0_;
  std::vector<double> omega_;
  int N_;
  Eigen::MatrixXcd base_;
  std::vector<Mode> modes_;
  Eigen::MatrixXcd stacked_;
  mutable Eigen::VectorXcd phase_;
  bool varying_mu_ = false;
};

void check_step(const DiagonalPart& A0, double dt) {
  double lmax = 0.0;
  for (double l : A0.lambda) lmax = std::max(lmax, std::abs(l));
  if (!(dt > 0.0) || !(dt * lmax < 0.1))
    throw InvalidArgument("time step " + std::to_string(dt) + " does not resolve max|λ| = " + std::to_string(lmax));
}

}  // namespace

Eigen::MatrixXcd hamiltonian_at(const DiagonalPart& A0, const OperatorSeries& P0, double epsilon,
                                const std::vector<double>& omega, double t) {
  return HamiltonianEvaluator(A0, P0, epsilon, omega)(t);
}

Trajectory propagate_direct(const DiagonalPart& A0, const OperatorSeries& P0, double epsilon,
                            const std::vector<double>& omega, const Eigen::VectorXcd& psi0,
                            const std::vector<double>& times, double dt) {
  check_step(A0, dt);
  if (psi0.size() != A0.size()) throw InvalidArgument("state size mismatch");
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0))
    throw InvalidArgument("sample times must be sorted and non-negative");
  const HamiltonianEvaluator H(A0, P0, epsilon, omega);
  Trajectory traj;
  traj.dt = dt;
  Eigen::VectorXcd psi = psi0;
  const double norm0 = psi0.norm();
  double t = 0.0;
  for (double target : times) {
    const double span = target - t;
    const int steps = span > 0.0 ? static_cast<int>(std::ceil(span / dt - 1e-12)) : 0;
    const double h = steps > 0 ? span / steps : 0.0;
    for (int q = 0; q < steps; ++q) {
      const double tm = t + (q + 0.5) * h;
      psi = expm(-I1 * h * H(tm)) * psi;
    }
    t = target;
    traj.t.push_back(t);
    traj.psi.push_back(psi);
    traj.norm_drift = std::max(traj.norm_drift, std::abs(psi.norm() - norm0));
  }
  return traj;
}

Monodromy monodromy_quasienergies(const DiagonalPart& A0, const OperatorSeries& P0, double epsilon, double omega,
                                  double dt) {
  if (P0.dim() != 1) throw InvalidArgument("monodromy needs a periodic (n = 1) system");
  if (!(omega > 0.0)) throw InvalidArgument("frequency must be positive");
  check_step(A0, dt);
  Monodromy out;
  out.period = 2.0 * std::numbers::pi / omega;
  const std::vector<double> w{omega};
  const HamiltonianEvaluator H(A0, P0, epsilon, w);
  const int steps = static_cast<int>(std::ceil(out.period / dt));
  const double h = out.period / steps;
  const int N = A0.size();
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(N, N);
  for (int q = 0; q < steps; ++q) U = expm(-I1 * h * H((q + 0.5) * h)) * U;
  out.matrix = U;
  out.unitarity_defect = unitarity_defect(U);
  if (out.unitarity_defect > 1e-8)
    throw ConvergenceError("monodromy is not unitary: defect " + std::to_string(out.unitarity_defect));
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(U);
  const double band = 2.0 * std::numbers::pi / out.period;
  for (Eigen::Index q = 0; q < es.eigenvalues().size(); ++q) {
    double e = -std::arg(es.eigenvalues()(q)) / out.period;
    e = std::fmod(e, band);
    if (e < 0.0) e += band;
    out.quasienergies.push_back(e);
  }
  std::sort(out.quasienergies.begin(), out.quasienergies.end());
  return out;
}

std::vector<double> quasienergy_mismatch(const std::vector<double>& quasienergies,
                                         const std::vector<double>& lambda, double period) {
  const double band = 2.0 * std::numbers::pi / period;
  std::vector<double> out;
  for (double l : lambda) {
    double best = band;
    for (double q : quasienergies) {
      double d = std::fmod(std::abs(l - q), band);
      best = std::min({best, d, band - d});
    }
    out.push_back(best);
  }
  return out;
}

std::vector<double> comparison_times(double t_max, int count, double t_min) {
  std::vector<double> t{0.0};
  if (count < 2 || t_max <= 0.0) return t;
  const double a = std::log(t_min), b = std::log(t_max);
  for (int q = 0; q < count - 1; ++q) t.push_back(std::exp(a + (b - a) * q / (count - 2 > 0 ? count - 2 : 1)));
  t.back() = t_max;
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

}  // namespace kam
