#include "kam/norms.hpp"

#include "kam/fourier.hpp"
#include "kam/kernels.hpp"
#include "kam/linalg.hpp"

namespace kam {

double sup_norm_s(const TorusSeries& f, double s) {
  if (s < 0.0) throw InvalidArgument("strip width must be non-negative");
  if (f.empty()) return 0.0;
  const auto& lat = f.lattice();
  double acc = 0.0;
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    if (f[idx] == cplx{}) continue;
    acc += std::abs(f[idx]) * std::exp(s * lat.l1(idx));
  }
  return acc;
}

double coefficient_strip_bound(const OperatorSeries& P, const Eigen::VectorXd& left,
                               const Eigen::VectorXd& right, double s) {
  const auto& lat = P.lattice();
  double acc = 0.0;
  for (std::size_t idx = 0; idx < lat.size(); ++idx) {
    const Eigen::MatrixXcd c = P.coefficient(idx);
    if (c.cwiseAbs().maxCoeff() == 0.0) continue;
    acc += std::exp(s * lat.l1(idx)) * op_norm(left.asDiagonal() * c * right.asDiagonal());
  }
  return acc;
}

double grid_operator_max(const OperatorSeries& P, const Eigen::VectorXd& left, const Eigen::VectorXd& right,
                         int M) {
  if (M <= 0) M = grid_size_for(P.cutoff());
  return kernels::omp::grid_max_opnorm(sample(P, M), left, right);
}

namespace {

void check_base(const OperatorSeries& P, const DiagonalPart& base, double s) {
  if (P.rows() != base.size()) throw InvalidArgument("operator and diagonal part differ in size");
  if (s < 0.0) throw InvalidArgument("strip width must be non-negative");
}

}  // namespace

double delta_norm(const OperatorSeries& P, const DiagonalPart& base, double s) {
  check_base(P, base, s);
  const Eigen::VectorXd w = base.weights();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(P.rows());
  if (s == 0.0) return grid_operator_max(P, w, one);
  return coefficient_strip_bound(P, w, one, s);
}

double g_norm(const OperatorSeries& B, const DiagonalPart& base, double s) {
  check_base(B, base, s);
  const Eigen::VectorXd w = base.weights();
  const Eigen::VectorXd winv = w.cwiseInverse();
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(B.rows());
  if (s == 0.0) {
    const int M = grid_size_for(B.cutoff());
    const auto grid = sample(B, M);
    return std::max(kernels::omp::grid_max_opnorm(grid, one, one), kernels::omp::grid_max_opnorm(grid, w, winv));
  }
  return std::max(coefficient_strip_bound(B, one, one, s), coefficient_strip_bound(B, w, winv, s));
}

}  // namespace kam
