#pragma once

#include <string>
#include <vector>

#include "kam/torus_series.hpp"

namespace kam {

struct HomologicalOptions {
  double divisor_floor = 1e-12;  // scaled by (1+|k|_1)^{−τ}
  double tau = 0.0;              // 0: use the frequency's τ
  double s = 0.0;                // strip used to normalize h in the Kuksin reduction
  int oversample = 4;            // Kuksin grid oversampling
  int K_out = -1;                // cutoff of B; −1: K_P + K_μ
  double theta = 0.5;            // Kuksin guard E1^θ ≥ guard_C·E2
  double guard_C = 1.0;
  double Cstar = 10.0;           // guard C_μ/C_λ < C*
  double C_mu = 0.0;
  double C_lambda = 1.0;
  bool compute_residual = true;
};

struct HomologicalSolution {
  OperatorSeries B;
  double residual = 0.0;       // grid max of ‖W·defect‖_F / ‖P‖_{δ,0}
  double divisor_floor = 0.0;  // smallest |ω·k+λ_i−λ_j| encountered
  bool guard_ok = true;
  std::vector<std::string> warnings;
};

/// B̂_ij,k = −P̂_ij,k/(ω·k+λ_i−λ_j), B_ii = 0; requires μ ≡ 0.
HomologicalSolution solve_constant(const OperatorSeries& P, const DiagonalPart& base, const Frequency& omega,
                                   const HomologicalOptions& opts = {});

/// H with ω·∂H = h, Ĥ_k = ĥ_k/(iω·k).
TorusSeries torus_primitive(const TorusSeries& h, const Frequency& omega, double floor = 1e-12);

struct KuksinSolution {
  TorusSeries chi;
  double min_divisor = 0.0;
  double unimodularity_defect = 0.0;
  bool guard_ok = true;
};

/// Solves −iω·∂χ + E1χ + E2hχ = b with the integrating factor e^{−iE2H}.
KuksinSolution solve_kuksin(const TorusSeries& b, const TorusSeries& h, double E1, double E2,
                            const Frequency& omega, const HomologicalOptions& opts = {});

/// Dense Galerkin solve of the same equation truncated to |k|_∞ ≤ K.
TorusSeries solve_kuksin_dense(const TorusSeries& b, const TorusSeries& h, double E1, double E2,
                               const Frequency& omega, int K);

/// Solves [A,B] − iω·∂B + (P − diag P) = 0 with A = diag(λ + μ(φ)).
HomologicalSolution solve_variable(const OperatorSeries& P, const DiagonalPart& base, const Frequency& omega,
                                   const HomologicalOptions& opts = {});

/// Defect [A,B] − iω·∂B + (P − diag P) sampled on a grid fine enough for its products.
double homological_defect(const OperatorSeries& B, const OperatorSeries& P, const DiagonalPart& base,
                          const Frequency& omega);

}  // namespace kam
