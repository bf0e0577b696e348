#include "kam/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace kam {

namespace {

constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

constexpr double kTheta13 = 5.371920351148152;

struct LowOrder {
  int m;
  double theta;
  std::array<double, 10> b;
};

constexpr std::array<LowOrder, 4> kLow = {{
    {3, 1.495585217958292e-2, {120.0, 60.0, 12.0, 1.0}},
    {5, 2.539398330063230e-1, {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0}},
    {7, 9.504178996162932e-1, {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0}},
    {9, 2.097847961257068e0,
     {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0,
      1.0}},
}};

Eigen::MatrixXcd pade_low(const Eigen::MatrixXcd& A, const LowOrder& p) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd A2 = A * A;
  Eigen::MatrixXcd power = I;
  Eigen::MatrixXcd U = p.b[1] * I;
  Eigen::MatrixXcd V = p.b[0] * I;
  for (int k = 1; 2 * k <= p.m; ++k) {
    power = power * A2;
    U += p.b[2 * k + 1] * power;
    V += p.b[2 * k] * power;
  }
  U = A * U;
  return (V - U).partialPivLu().solve(V + U);
}

}  // namespace

Eigen::MatrixXcd expm(const Eigen::MatrixXcd& A) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  if (n == 0) return A;
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return I;
  for (const auto& p : kLow)
    if (norm1 <= p.theta) return pade_low(A, p);

  int squarings = 0;
  if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const Eigen::MatrixXcd X = A / std::ldexp(1.0, squarings);

  const Eigen::MatrixXcd X2 = X * X;
  const Eigen::MatrixXcd X4 = X2 * X2;
  const Eigen::MatrixXcd X6 = X4 * X2;
  const auto& b = kPade13;
  Eigen::MatrixXcd U = X6 * (b[13] * X6 + b[11] * X4 + b[9] * X2);
  U += b[7] * X6 + b[5] * X4 + b[3] * X2 + b[1] * I;
  U = X * U;
  Eigen::MatrixXcd V = X6 * (b[12] * X6 + b[10] * X4 + b[8] * X2);
  V += b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * I;

  Eigen::MatrixXcd R = (V - U).partialPivLu().solve(V + U);
  for (int s = 0; s < squarings; ++s) R = R * R;
  return R;
}

double op_norm(const Eigen::Ref<const Eigen::MatrixXcd>& A) {
  if (A.size() == 0) return 0.0;
  Eigen::MatrixXcd G = A.rows() >= A.cols() ? Eigen::MatrixXcd(A.adjoint() * A)
                                            : Eigen::MatrixXcd(A * A.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double unitarity_defect(const Eigen::MatrixXcd& U) {
  const Eigen::MatrixXcd D = U.adjoint() * U - Eigen::MatrixXcd::Identity(U.rows(), U.cols());
  return op_norm(D);
}

}  // namespace kam
