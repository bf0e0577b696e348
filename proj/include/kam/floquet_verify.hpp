#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kam/kam_engine.hpp"

namespace kam {

struct FloquetEigenvalue {
  int j = 0;  // 1-based mode
  Mode k;
  double nu = 0.0;
  int multiplicity = 1;  // size of the cluster of values within 1e-12
};

/// ν_{j,k} = λ_j^∞ + ω·k for |k|_1 ≤ Kmax, sorted by value.
std::vector<FloquetEigenvalue> floquet_spectrum(const ReducedSystem& rs, int Kmax);

/// F_j(t) = Σ_{k≠0} μ̂_{j,k}(e^{iω·k t} − 1)/(iω·k).
Eigen::VectorXcd reduced_phase(const ReducedSystem& rs, double t, double floor = 1e-12);
/// χ_j(t) = χ_j(0)·exp(−iλ_j^∞ t − iF_j(t)).
Eigen::VectorXcd reduced_state(const ReducedSystem& rs, const Eigen::VectorXcd& chi0, double t);
/// ψ(t) = U(ωt)·χ(t).
Eigen::VectorXcd reconstruct_solution(const ReducedSystem& rs, const Eigen::VectorXcd& chi0, double t);

/// A(φ) + εP(φ) at φ = ωt.
Eigen::MatrixXcd hamiltonian_at(const DiagonalPart& A0, const OperatorSeries& P0, double epsilon,
                                const std::vector<double>& omega, double t);

struct Trajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXcd> psi;
  double norm_drift = 0.0;
  double dt = 0.0;
};

/// Exponential mid-point integration of iψ̇ = (A + εP(ωt))ψ; ψ is recorded at
/// every entry of `times` (sorted, ≥ 0). Requires dt·max|λ| < 0.1.
Trajectory propagate_direct(const DiagonalPart& A0, const OperatorSeries& P0, double epsilon,
                            const std::vector<double>& omega, const Eigen::VectorXcd& psi0,
                            const std::vector<double>& times, double dt);

struct Monodromy {
  Eigen::MatrixXcd matrix;
  std::vector<double> quasienergies;  // −arg(z)/T in [0, 2π/T), sorted
  double period = 0.0;
  double unitarity_defect = 0.0;
};

/// Fundamental matrix over T = 2π/ω for n = 1.
Monodromy monodromy_quasienergies(const DiagonalPart& A0, const OperatorSeries& P0, double epsilon,
                                  double omega, double dt);

/// For each λ_j, the distance on the circle ℝ/(2π/T) to the nearest quasi-energy.
std::vector<double> quasienergy_mismatch(const std::vector<double>& quasienergies,
                                         const std::vector<double>& lambda, double period);

/// Log-uniform sample of [0, t_max] including both endpoints.
std::vector<double> comparison_times(double t_max, int count, double t_min = 1e-2);

}  // namespace kam
