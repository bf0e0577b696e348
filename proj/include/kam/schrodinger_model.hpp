#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kam/torus_series.hpp"

namespace kam {

/// c·|x|^p term of the potential Q.
struct PotentialTerm {
  double coef = 1.0;
  double power = 4.0;
};

struct OscillatorSpec {
  double alpha = 4.0;
  std::vector<PotentialTerm> Q;  // empty: |x|^alpha
  int N = 20;                    // modes returned
  double resolution = 1.6;       // grid momentum cutoff in units of sqrt(λ_max)
  double decay = 40.0;           // WKB decay integral required beyond the turning point
  int extra_modes = 5;           // λ_{N+extra} sizes the domain
  double tolerance = 1e-8;       // relative eigenvalue change on halving the spacing
  bool allow_alpha_le_2 = false; // harmonic check of the machinery

  double potential(double x) const;
};

struct Oscillator {
  std::vector<double> lambda;  // first N eigenvalues, increasing
  std::vector<double> x;       // grid
  double dx = 0.0;
  Eigen::MatrixXd psi;         // orthonormal columns, ψ_i(x_g)·sqrt(dx)
  double certificate = 0.0;    // max_i |λ_i − λ_i^{fine}|/λ_i
  std::vector<double> lambda_fine;
  double min_gap = 0.0;
  double L = 0.0;
  OscillatorSpec spec;
};

/// Sinc-DVR discretization of −d²/dx² + Q(x) with a halving certificate.
Oscillator build_oscillator(const OscillatorSpec& spec);
/// Single discretization at spacing dx on [−L, L] (no certificate).
Oscillator discretize_oscillator(const OscillatorSpec& spec, double dx, double L, int N);

struct FitResult {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
};

/// OLS slope of log λ_i against log i for i ∈ [i_lo, i_hi] (1-based).
FitResult asymptotic_exponent_fit(const std::vector<double>& lambdas, int i_lo, int i_hi);

/// v(x): "monomial" x^p (integer p), "smooth" (1+x²)^{p/2}, "abs" |x|^p.
struct SpatialTerm {
  std::string kind = "monomial";
  double power = 1.0;

  double operator()(double x) const;
};

struct PerturbationTerm {
  SpatialTerm v;
  TorusSeries g;
};

struct PerturbationSpec {
  double beta = 0.0;
  int n = 1;
  std::vector<PerturbationTerm> terms;
};

/// P_ij(φ) = Σ_m ⟨ψ_i, v_m ψ_j⟩ g_m(φ) on the first N modes with cutoff K;
/// matrix elements are certified against the finer resolution.
OperatorSeries perturbation_matrix(const PerturbationSpec& spec, const Oscillator& osc, int N, int K,
                                   double tolerance = 1e-9);
/// Matrix of ⟨ψ_i, v ψ_j⟩, i,j < N.
Eigen::MatrixXd matrix_elements(const SpatialTerm& v, const Oscillator& osc, int N);

struct BoundednessRow {
  double delta = 0.0;
  double norm_half = 0.0;  // leading N/2 block
  double norm_full = 0.0;
  double increment = 0.0;  // (full − half)/half
  bool flat = false;
};

struct BoundednessReport {
  std::vector<BoundednessRow> rows;
  double beta = 0.0;
  double alpha = 0.0;
  double boundary = 0.0;  // (α − 2)/2
};

/// δ-norms of the leading N/2 and N blocks for every δ in the grid; flat when
/// the relative increment is below flat_tol.
BoundednessReport delta_boundedness_check(const OperatorSeries& P, const DiagonalPart& base,
                                          const std::vector<double>& delta_grid, double flat_tol = 0.01);

/// Leading M×M block of P.
OperatorSeries leading_block(const OperatorSeries& P, int M);
DiagonalPart leading_block(const DiagonalPart& A, int M);

/// DiagonalPart built from the oscillator spectrum (μ ≡ 0).
DiagonalPart diagonal_from(const Oscillator& osc, int N, int n, double d, double delta);

}  // namespace kam
