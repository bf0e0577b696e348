#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kam/torus_series.hpp"

namespace kam {

struct KamSettings {
  double epsilon = 1e-3;
  double s = 0.5;
  double gamma = 0.05;
  double tau = 0.0;  // 0: n + 2/(d−1) + 1
  int K = 6;
  int N = 20;
  double d = 4.0 / 3.0;
  double delta = 0.2;
  double theta = 0.0;  // 0: (δ/(d−1) + 1)/2
  double Cstar = 10.0;
  double Comega_star = 1.0;
  double guard_C = 1.0;
  double C_lambda = 0.0;  // 0: measured separation of the initial λ
  double tol = 1e-12;
  int l_max = 8;
  int oversample = 2;
  int K_work = 0;  // 0: 4K
  int cert_K = 0;  // 0: n·K_work
  int cert_N = 0;  // 0: N
  double divisor_floor = 1e-12;
  int lie_max_order = 30;
  double lie_tol = 1e-17;
  bool strict_guards = false;
  int unitarity_grid = 32;  // 0 disables the per-step unitarity scan

  double tau_for(int n) const;
  double theta_value() const;
  int work_cutoff() const { return K_work > 0 ? K_work : 4 * K; }
  int cert_cutoff(int n) const { return cert_K > 0 ? cert_K : n * work_cutoff(); }
  /// Throws InvalidArgument on hard invariant failures; returns warnings for soft ones.
  std::vector<std::string> validate(int n) const;

  static double sigma(double s, int l);
  static double strip(double s, int l);
  static double scheduled_epsilon(double epsilon, int l);
};

struct KamState {
  int l = 0;
  DiagonalPart A;
  OperatorSeries P;
  double gamma = 0.0;
  double C_mu = 0.0;
  double C_lambda = 0.0;
  double C_omega = 0.0;
  double s = 0.0;
  double initial_norm = 0.0;
  std::vector<double> norm_history;  // ‖P^l‖_{δ,s_l} after each completed step
  std::vector<OperatorSeries> generators;
};

struct StepRecord {
  int l = 0;  // index of the step's output perturbation
  double norm_in = 0.0;
  double norm_out = 0.0;
  double s_in = 0.0;
  double s_out = 0.0;
  double eps_scheduled = 0.0;
  int K_l = 0;
  int K_eff = 0;
  double gamma = 0.0;
  double C_mu = 0.0;
  double C_lambda = 0.0;
  double C_omega = 0.0;
  double hom_residual = 0.0;
  double divisor_floor = 0.0;
  double g_norm_B = 0.0;
  double hermiticity_defect = 0.0;
  int lie_order = 0;
  double truncation_residue = 0.0;
  double unitarity_defect = 0.0;
  double cert_gamma_max = 0.0;
  double seconds = 0.0;
  std::vector<std::string> warnings;
};

struct ReducedSystem {
  std::vector<double> lambda_inf;
  std::vector<TorusSeries> mu_inf;
  std::vector<OperatorSeries> generators;
  Frequency omega;
};

struct RunResult {
  KamState final;
  ReducedSystem reduced;
  std::vector<StepRecord> steps;
  bool converged = false;
  bool diverged = false;
  std::string reason;
  double max_unitarity_defect = 0.0;
  double lambda_shift_constant = 0.0;  // max_i |λ_i^∞ − λ_i|/(i^δ ε)
};

struct DiagSplit {
  std::vector<double> lambda_shift;
  std::vector<TorusSeries> mu_add;
  OperatorSeries offdiag;
};

DiagSplit diag_split(const OperatorSeries& P);

struct ConjugateOptions {
  int K_out = -1;  // −1: cutoff of the largest input
  int oversample = 2;
  bool reference = false;  // E = exp(B) per grid point instead of the commutator series
  bool parallel = true;
  int max_order = 30;
  double tol = 1e-17;
};

struct ConjugateReport {
  int order = 0;
  double hermiticity_defect = 0.0;
  double truncation_residue = 0.0;  // Σ_{|k|_∞ > K_out} ‖Ŵ P̂_k‖_F at strip 0
  int grid = 0;
};

/// P^+ = e^{−B}(A+P)e^{B} − i e^{−B}ω·∂e^{B} − A − diag P.
OperatorSeries conjugate(const DiagonalPart& A, const OperatorSeries& P, const OperatorSeries& B,
                         const Frequency& omega, const ConjugateOptions& opts = {},
                         ConjugateReport* report = nullptr);

KamState initial_state(const DiagonalPart& A0, const OperatorSeries& P0, const KamSettings& settings);

KamState kam_step(const KamState& state, const Frequency& omega, const KamSettings& settings,
                  StepRecord* record = nullptr);

using StepCallback = std::function<void(const StepRecord&)>;

RunResult run_schedule(const DiagonalPart& A0, const OperatorSeries& P0, const Frequency& omega,
                       const KamSettings& settings, const StepCallback& on_step = {});

/// e^{B¹(φ)} ··· e^{B^L(φ)}.
Eigen::MatrixXcd compose_transformations(const std::vector<OperatorSeries>& generators,
                                         std::span<const double> phi);

/// max over an M^n grid of ‖U*U − I‖ for the composed transformation.
double composed_unitarity_defect(const std::vector<OperatorSeries>& generators, int M);

}  // namespace kam
