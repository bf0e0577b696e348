#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

#include "kam/fourier.hpp"

namespace kam::kernels {

/// Diagnostics of one grid conjugation.
struct ConjugationStats {
  int order = 0;                  // highest commutator order used
  double hermiticity_defect = 0;  // max pointwise |X − X*| before symmetrization
};

/// Inputs of the pointwise conjugation: A(φ) = diag(λ + μ(φ)) and P, B, ω·∂B on one grid.
struct ConjugationInput {
  std::span<const double> lambda;
  std::span<const cplx> mu;  // mu[g·N + i]
  const OperatorGrid* P = nullptr;
  const OperatorGrid* B = nullptr;
  const OperatorGrid* Bdot = nullptr;
};

namespace ref {

double grid_max_opnorm(const OperatorGrid& X, const Eigen::VectorXd& left, const Eigen::VectorXd& right);
ConjugationStats lie_conjugate(const ConjugationInput& in, OperatorGrid& out, int max_order, double tol);
void expm_grid(const OperatorGrid& B, OperatorGrid& E);
ConjugationStats expm_assemble(const ConjugationInput& in, const OperatorGrid& E, const OperatorGrid& Edot,
                               OperatorGrid& out);
double max_unitarity_defect(const OperatorGrid& U);

}  // namespace ref

namespace omp {

double grid_max_opnorm(const OperatorGrid& X, const Eigen::VectorXd& left, const Eigen::VectorXd& right);
ConjugationStats lie_conjugate(const ConjugationInput& in, OperatorGrid& out, int max_order, double tol);
void expm_grid(const OperatorGrid& B, OperatorGrid& E);
ConjugationStats expm_assemble(const ConjugationInput& in, const OperatorGrid& E, const OperatorGrid& Edot,
                               OperatorGrid& out);
double max_unitarity_defect(const OperatorGrid& U);

}  // namespace omp

}  // namespace kam::kernels
