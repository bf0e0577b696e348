#include "doctest.h"
#include "kam/kernels.hpp"
#include "kam/linalg.hpp"
#include "kam/random_model.hpp"

using namespace kam;

namespace {

struct Fixture {
  DiagonalPart A;
  OperatorGrid P, B, Bdot, E, Edot;
  std::vector<cplx> mu;

  Fixture(int N, int n, int K, std::uint64_t seed, int oversample = 2) {
    Rng rng(seed);
    A = DiagonalPart::power_law(N, n, 4.0 / 3.0, 0.2);
    for (auto& m : A.mu) m = 0.01 * random_series(n, K, 1.0, rng, true, true);
    const int M = grid_size_for(K, oversample);
    const std::vector<double> w{0.7548776662, 0.5698402910};
    const std::span<const double> omega(w.data(), n);
    auto Ps = random_hermitian({N, n, K, 1.0, 0.0}, rng);
    auto Bs = 0.05 * random_antihermitian({N, n, K, 1.0, 0.0}, rng);
    P = sample(Ps, M);
    B = sample(Bs, M);
    Bdot = sample(directional_derivative(Bs, omega), M);
    mu = sample_diagonal(A.mu, M);
    E = OperatorGrid(N, GridSpec{n, M});
    kernels::ref::expm_grid(B, E);
    Edot = sample(directional_derivative(project(E, (M - 2) / 2), omega), M);
  }

  kernels::ConjugationInput input() const { return {A.lambda, mu, &P, &B, &Bdot}; }
};

double max_diff(const OperatorGrid& a, const OperatorGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) m = std::max(m, std::abs(a.raw()[i] - b.raw()[i]));
  return m;
}

}  // namespace

TEST_CASE("parallel kernels reproduce the serial reference") {
  for (int n : {1, 2}) {
    Fixture f(7, n, 3, 40 + n);
    const Eigen::VectorXd W = f.A.weights();
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(7);
    CHECK(kernels::omp::grid_max_opnorm(f.P, W, one) == kernels::ref::grid_max_opnorm(f.P, W, one));

    OperatorGrid e1(7, f.B.grid()), e2(7, f.B.grid());
    kernels::ref::expm_grid(f.B, e1);
    kernels::omp::expm_grid(f.B, e2);
    CHECK(max_diff(e1, e2) == 0.0);
    CHECK(kernels::ref::max_unitarity_defect(e1) < 1e-13);
    CHECK(kernels::omp::max_unitarity_defect(e1) == kernels::ref::max_unitarity_defect(e1));

    OperatorGrid o1(7, f.B.grid()), o2(7, f.B.grid());
    auto s1 = kernels::ref::lie_conjugate(f.input(), o1, 30, 1e-17);
    auto s2 = kernels::omp::lie_conjugate(f.input(), o2, 30, 1e-17);
    CHECK(s1.order == s2.order);
    CHECK(max_diff(o1, o2) == 0.0);

    OperatorGrid a1(7, f.B.grid()), a2(7, f.B.grid());
    kernels::ref::expm_assemble(f.input(), f.E, f.Edot, a1);
    kernels::omp::expm_assemble(f.input(), f.E, f.Edot, a2);
    CHECK(max_diff(a1, a2) == 0.0);
  }
}

TEST_CASE("commutator series agrees with explicit exponentials") {
  for (int n : {1, 2}) {
    Fixture f(6, n, 2, 60 + n, 8);
    OperatorGrid o(6, f.B.grid()), a(6, f.B.grid());
    kernels::ref::lie_conjugate(f.input(), o, 30, 1e-17);
    kernels::ref::expm_assemble(f.input(), f.E, f.Edot, a);
    CHECK(max_diff(o, a) < 1e-11);
  }
}

TEST_CASE("grid operator norm matches a dense singular value scan") {
  Fixture f(5, 1, 2, 7);
  const Eigen::VectorXd W = f.A.weights();
  double best = 0.0;
  for (std::size_t g = 0; g < f.P.points(); ++g) best = std::max(best, op_norm(W.asDiagonal() * f.P.at(g)));
  CHECK(kernels::omp::grid_max_opnorm(f.P, W, Eigen::VectorXd::Ones(5)) == doctest::Approx(best).epsilon(1e-13));
}
