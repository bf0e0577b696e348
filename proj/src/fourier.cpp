#include "kam/fourier.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

#include "kam/errors.hpp"

namespace kam {

std::size_t GridSpec::points() const {
  std::size_t p = 1;
  for (int l = 0; l < n; ++l) p *= static_cast<std::size_t>(M);
  return p;
}

std::vector<double> GridSpec::angles(std::size_t g) const {
  std::vector<double> phi(n);
  for (int l = n - 1; l >= 0; --l) {
    phi[l] = 2.0 * std::numbers::pi * static_cast<double>(g % M) / M;
    g /= M;
  }
  return phi;
}

int fft_friendly(int target) {
  int m = std::max(target, 2);
  for (;; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

int grid_size_for(int K, int oversample) { return fft_friendly(oversample * (2 * K + 2)); }

namespace {

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  // In-place transform of `howmany` interleaved arrays (stride howmany, distance 1).
  fftw_plan get(int n, int M, int howmany, int sign, cplx* data) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(n, M, howmany, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<int> dims(n, M);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_plan plan = fftw_plan_many_dft(n, dims.data(), howmany, buf, nullptr, howmany, 1, buf, nullptr,
                                        howmany, 1, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw Error("FFTW plan creation failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void fft_inplace(cplx* data, int n, int M, int howmany, int sign) {
  fftw_plan plan = plan_cache().get(n, M, howmany, sign, data);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, buf, buf);
}

// Linear grid position of the frequency k (mod M).
std::size_t grid_slot(std::span<const int> k, int M) {
  std::size_t pos = 0;
  for (int c : k) pos = pos * M + static_cast<std::size_t>(((c % M) + M) % M);
  return pos;
}

void check_resolution(int M, int K) {
  if (M < 2 * K + 2)
    throw AliasingError("grid of " + std::to_string(M) + " points per angle cannot resolve cutoff " +
                        std::to_string(K) + " (need at least " + std::to_string(2 * K + 2) + ")");
}

// Scatter `count` series into an interleaved grid buffer and transform to values.
void synthesize(const TorusSeries* const* series, int count, int n, int M, std::vector<cplx>& buf) {
  GridSpec grid{n, M};
  buf.assign(grid.points() * count, cplx{});
  for (int e = 0; e < count; ++e) {
    const auto& f = *series[e];
    if (f.empty()) continue;
    check_resolution(M, f.cutoff());
    const auto& lat = f.lattice();
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      if (f[idx] == cplx{}) continue;
      buf[grid_slot(lat.mode(idx), M) * count + e] = f[idx];
    }
  }
  fft_inplace(buf.data(), n, M, count, FFTW_BACKWARD);
}

// Inverse of synthesize (destroys buf).
void analyze(std::vector<cplx>& buf, int count, int n, int M, int K, TorusSeries* const* out) {
  check_resolution(M, K);
  GridSpec grid{n, M};
  fft_inplace(buf.data(), n, M, count, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(grid.points());
  auto lat = Lattice::get(n, K);
  for (int e = 0; e < count; ++e) {
    auto& f = *out[e];
    f = TorusSeries(n, K);
    for (std::size_t idx = 0; idx < lat->size(); ++idx)
      f[idx] = buf[grid_slot(lat->mode(idx), M) * count + e] * scale;
  }
}

}  // namespace

std::vector<cplx> sample(const TorusSeries& f, int M) {
  std::vector<cplx> buf;
  const TorusSeries* ptr = &f;
  synthesize(&ptr, 1, f.dim(), M, buf);
  return buf;
}

TorusSeries project(std::span<const cplx> values, int n, int M, int K) {
  if (values.size() != GridSpec{n, M}.points()) throw InvalidArgument("grid sample count mismatch");
  std::vector<cplx> buf(values.begin(), values.end());
  TorusSeries out;
  TorusSeries* ptr = &out;
  analyze(buf, 1, n, M, K, &ptr);
  return out;
}

TorusSeries transform_roundtrip(const TorusSeries& f, int grid_size_per_angle) {
  check_resolution(grid_size_per_angle, f.cutoff());
  return project(sample(f, grid_size_per_angle), f.dim(), grid_size_per_angle, f.cutoff());
}

OperatorGrid::OperatorGrid(int N, GridSpec grid)
    : N_(N), grid_(grid), data_(grid.points() * static_cast<std::size_t>(N) * N) {}

OperatorGrid sample(const OperatorSeries& op, int M) {
  const int N = op.rows();
  std::vector<const TorusSeries*> ptrs;
  ptrs.reserve(static_cast<std::size_t>(N) * N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) ptrs.push_back(&op(i, j));
  OperatorGrid grid(N, GridSpec{op.dim(), M});
  std::vector<cplx> buf;
  synthesize(ptrs.data(), N * N, op.dim(), M, buf);
  std::copy(buf.begin(), buf.end(), grid.raw().begin());
  return grid;
}

OperatorSeries project(const OperatorGrid& values, int K) {
  const int N = values.rows();
  const auto& g = values.grid();
  OperatorSeries op(N, g.n, K);
  std::vector<TorusSeries*> ptrs;
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) ptrs.push_back(&op(i, j));
  std::vector<cplx> buf(values.raw().begin(), values.raw().end());
  analyze(buf, N * N, g.n, g.M, K, ptrs.data());
  return op;
}

std::vector<cplx> sample_diagonal(std::span<const TorusSeries> mu, int M) {
  if (mu.empty()) return {};
  std::vector<const TorusSeries*> ptrs;
  for (const auto& m : mu) ptrs.push_back(&m);
  std::vector<cplx> buf;
  synthesize(ptrs.data(), static_cast<int>(ptrs.size()), mu.front().dim(), M, buf);
  return buf;
}

TorusSeries directional_derivative(const TorusSeries& f, std::span<const double> omega) {
  if (static_cast<int>(omega.size()) != f.dim()) throw InvalidArgument("frequency dimension mismatch");
  TorusSeries out = f;
  const auto& lat = f.lattice();
  for (std::size_t idx = 0; idx < f.size(); ++idx) out[idx] *= cplx(0.0, lat.dot(omega, idx));
  return out;
}

OperatorSeries directional_derivative(const OperatorSeries& op, std::span<const double> omega) {
  OperatorSeries out = op;
  for (int j = 0; j < op.rows(); ++j)
    for (int i = 0; i < op.rows(); ++i) out(i, j) = directional_derivative(op(i, j), omega);
  return out;
}

}  // namespace kam
