#include "kam/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>

#include "kam/errors.hpp"
#include "kam/linalg.hpp"

namespace kam::kernels {

namespace {

using Mat = Eigen::MatrixXcd;
constexpr cplx I1{0.0, 1.0};

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double point_opnorm(const Eigen::Map<const Mat>& X, const Eigen::VectorXd& left, const Eigen::VectorXd& right) {
  return op_norm(left.asDiagonal() * X * right.asDiagonal());
}

// Returns false if the series did not reach tol within max_order.
bool lie_point(const ConjugationInput& in, std::size_t g, Eigen::Map<Mat> out, int max_order, double tol,
               ConjugationStats& stats) {
  const auto P = in.P->at(g);
  const auto B = in.B->at(g);
  const auto Bdot = in.Bdot->at(g);
  const int N = static_cast<int>(P.rows());
  const cplx* mu = in.mu.empty() ? nullptr : in.mu.data() + g * N;

  Mat AB(N, N), C(N, N);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      cplx gap = in.lambda[i] - in.lambda[j];
      if (mu) gap += mu[i] - mu[j];
      AB(i, j) = gap * B(i, j);
      C(i, j) = (i == j ? cplx{} : P(i, j)) - I1 * Bdot(i, j) + AB(i, j);
    }
  }
  const Mat PB = P * B - B * P;
  Mat Y = AB + PB;
  Mat Z = (Bdot * B - B * Bdot) / 2.0;
  Mat acc = C + PB - I1 * Z;

  int m = 1;
  for (;;) {
    ++m;
    Y = (Y * B - B * Y) / static_cast<double>(m);
    Z = (Z * B - B * Z) / static_cast<double>(m + 1);
    acc += Y - I1 * Z;
    const double term = std::max(max_abs(Y), max_abs(Z));
    if (term == 0.0 || term <= tol * max_abs(acc)) break;
    if (m >= max_order) return false;
  }
  stats.order = std::max(stats.order, m);
  stats.hermiticity_defect = std::max(stats.hermiticity_defect, max_abs(acc - acc.adjoint()));
  out = (acc + acc.adjoint()) / 2.0;
  return true;
}

void expm_assemble_point(const ConjugationInput& in, const OperatorGrid& E, const OperatorGrid& Edot,
                         std::size_t g, Eigen::Map<Mat> out, ConjugationStats& stats) {
  const auto P = in.P->at(g);
  const auto Eg = E.at(g);
  const int N = static_cast<int>(P.rows());
  const cplx* mu = in.mu.empty() ? nullptr : in.mu.data() + g * N;
  Mat H = P;
  Eigen::VectorXcd a(N);
  for (int i = 0; i < N; ++i) a(i) = in.lambda[i] + (mu ? mu[i] : cplx{});
  H.diagonal() += a;
  const Mat Einv = Eg.adjoint();
  Mat X = Einv * H * Eg - I1 * (Einv * Edot.at(g));
  X.diagonal() -= a + P.diagonal();
  stats.hermiticity_defect = std::max(stats.hermiticity_defect, max_abs(X - X.adjoint()));
  out = (X + X.adjoint()) / 2.0;
}

void merge(ConjugationStats& into, const ConjugationStats& s) {
  into.order = std::max(into.order, s.order);
  into.hermiticity_defect = std::max(into.hermiticity_defect, s.hermiticity_defect);
}

void check_shapes(const ConjugationInput& in, const OperatorGrid& out) {
  if (!in.P || !in.B || !in.Bdot) throw InvalidArgument("conjugation input incomplete");
  const auto pts = in.P->points();
  if (in.B->points() != pts || in.Bdot->points() != pts || out.points() != pts)
    throw InvalidArgument("conjugation grids differ");
  if (static_cast<int>(in.lambda.size()) != in.P->rows()) throw InvalidArgument("λ length mismatch");
}

[[noreturn]] void throw_nonconvergence(int max_order) {
  throw ConvergenceError("commutator series did not converge within order " + std::to_string(max_order));
}

}  // namespace

namespace ref {

double grid_max_opnorm(const OperatorGrid& X, const Eigen::VectorXd& left, const Eigen::VectorXd& right) {
  double best = 0.0;
  for (std::size_t g = 0; g < X.points(); ++g) best = std::max(best, point_opnorm(X.at(g), left, right));
  return best;
}

ConjugationStats lie_conjugate(const ConjugationInput& in, OperatorGrid& out, int max_order, double tol) {
  check_shapes(in, out);
  ConjugationStats stats;
  for (std::size_t g = 0; g < out.points(); ++g)
    if (!lie_point(in, g, out.at(g), max_order, tol, stats)) throw_nonconvergence(max_order);
  return stats;
}

void expm_grid(const OperatorGrid& B, OperatorGrid& E) {
  for (std::size_t g = 0; g < B.points(); ++g) E.at(g) = expm(B.at(g));
}

ConjugationStats expm_assemble(const ConjugationInput& in, const OperatorGrid& E, const OperatorGrid& Edot,
                               OperatorGrid& out) {
  check_shapes(in, out);
  ConjugationStats stats;
  for (std::size_t g = 0; g < out.points(); ++g) expm_assemble_point(in, E, Edot, g, out.at(g), stats);
  return stats;
}

double max_unitarity_defect(const OperatorGrid& U) {
  double worst = 0.0;
  for (std::size_t g = 0; g < U.points(); ++g) worst = std::max(worst, unitarity_defect(U.at(g)));
  return worst;
}

}  // namespace ref

namespace omp {

double grid_max_opnorm(const OperatorGrid& X, const Eigen::VectorXd& left, const Eigen::VectorXd& right) {
  const auto pts = static_cast<std::int64_t>(X.points());
  double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(static)
  for (std::int64_t g = 0; g < pts; ++g) best = std::max(best, point_opnorm(X.at(g), left, right));
  return best;
}

ConjugationStats lie_conjugate(const ConjugationInput& in, OperatorGrid& out, int max_order, double tol) {
  check_shapes(in, out);
  const auto pts = static_cast<std::int64_t>(out.points());
  ConjugationStats total;
  std::atomic<bool> failed{false};
#pragma omp parallel
  {
    ConjugationStats local;
#pragma omp for schedule(static)
    for (std::int64_t g = 0; g < pts; ++g)
      if (!lie_point(in, g, out.at(g), max_order, tol, local)) failed = true;
#pragma omp critical
    merge(total, local);
  }
  if (failed) throw_nonconvergence(max_order);
  return total;
}

void expm_grid(const OperatorGrid& B, OperatorGrid& E) {
  const auto pts = static_cast<std::int64_t>(B.points());
#pragma omp parallel for schedule(static)
  for (std::int64_t g = 0; g < pts; ++g) E.at(g) = expm(B.at(g));
}

ConjugationStats expm_assemble(const ConjugationInput& in, const OperatorGrid& E, const OperatorGrid& Edot,
                               OperatorGrid& out) {
  check_shapes(in, out);
  const auto pts = static_cast<std::int64_t>(out.points());
  ConjugationStats total;
#pragma omp parallel
  {
    ConjugationStats local;
#pragma omp for schedule(static)
    for (std::int64_t g = 0; g < pts; ++g) expm_assemble_point(in, E, Edot, g, out.at(g), local);
#pragma omp critical
    merge(total, local);
  }
  return total;
}

double max_unitarity_defect(const OperatorGrid& U) {
  const auto pts = static_cast<std::int64_t>(U.points());
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (std::int64_t g = 0; g < pts; ++g) worst = std::max(worst, unitarity_defect(U.at(g)));
  return worst;
}

}  // namespace omp

}  // namespace kam::kernels
