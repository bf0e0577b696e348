#include <benchmark/benchmark.h>

#include <span>
#include <vector>

#include "kam/kernels.hpp"
#include "kam/random_model.hpp"

using namespace kam;

namespace {

struct Workload {
  DiagonalPart A;
  OperatorGrid P, B, Bdot, E, Edot, out;
  std::vector<cplx> mu;
  Eigen::VectorXd W;

  Workload(int N, int n, int K) {
    Rng rng(7);
    A = DiagonalPart::power_law(N, n, 4.0 / 3.0, 0.2);
    for (auto& m : A.mu) m = 0.01 * random_series(n, K, 1.0, rng, true, true);
    const int M = grid_size_for(K, 2);
    const std::vector<double> w{0.7548776662, 0.5698402910};
    const std::span<const double> omega(w.data(), n);
    const auto Bs = 0.05 * random_antihermitian({N, n, K, 1.0, 0.0}, rng);
    P = sample(random_hermitian({N, n, K, 1.0, 0.0}, rng), M);
    B = sample(Bs, M);
    Bdot = sample(directional_derivative(Bs, omega), M);
    mu = sample_diagonal(A.mu, M);
    E = OperatorGrid(N, GridSpec{n, M});
    kernels::ref::expm_grid(B, E);
    Edot = sample(directional_derivative(project(E, (M - 2) / 2), omega), M);
    out = OperatorGrid(N, GridSpec{n, M});
    W = A.weights();
  }

  kernels::ConjugationInput input() const { return {A.lambda, mu, &P, &B, &Bdot}; }
};

Workload& workload(int N) {
  static Workload w12(12, 2, 4), w20(20, 2, 4);
  return N == 12 ? w12 : w20;
}

template <bool Parallel>
void BM_LieConjugate(benchmark::State& st) {
  auto& w = workload(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    auto s = Parallel ? kernels::omp::lie_conjugate(w.input(), w.out, 30, 1e-17)
                      : kernels::ref::lie_conjugate(w.input(), w.out, 30, 1e-17);
    benchmark::DoNotOptimize(s);
  }
}

template <bool Parallel>
void BM_ExpmGrid(benchmark::State& st) {
  auto& w = workload(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    if (Parallel)
      kernels::omp::expm_grid(w.B, w.E);
    else
      kernels::ref::expm_grid(w.B, w.E);
    benchmark::ClobberMemory();
  }
}

template <bool Parallel>
void BM_GridOpnorm(benchmark::State& st) {
  auto& w = workload(static_cast<int>(st.range(0)));
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(w.W.size());
  for (auto _ : st) {
    double v = Parallel ? kernels::omp::grid_max_opnorm(w.P, w.W, one) : kernels::ref::grid_max_opnorm(w.P, w.W, one);
    benchmark::DoNotOptimize(v);
  }
}

template <bool Parallel>
void BM_ExpmAssemble(benchmark::State& st) {
  auto& w = workload(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    auto s = Parallel ? kernels::omp::expm_assemble(w.input(), w.E, w.Edot, w.out)
                      : kernels::ref::expm_assemble(w.input(), w.E, w.Edot, w.out);
    benchmark::DoNotOptimize(s);
  }
}

}  // namespace

BENCHMARK(BM_LieConjugate<false>)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LieConjugate<true>)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpmGrid<false>)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpmGrid<true>)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridOpnorm<false>)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridOpnorm<true>)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpmAssemble<false>)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpmAssemble<true>)->Arg(12)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
