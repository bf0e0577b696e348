#include "kam/lattice.hpp"

#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <utility>

#include "kam/errors.hpp"

namespace kam {

DivisorTooSmall::DivisorTooSmall(int i_, int j_, std::vector<int> k_, double divisor_, double floor_)
    : Error("divisor too small at (i=" + std::to_string(i_) + ", j=" + std::to_string(j_) +
            ", k=" + format_mode(k_) + "): |" + std::to_string(divisor_) + "| < " +
            std::to_string(floor_)),
      i(i_), j(j_), k(std::move(k_)), divisor(divisor_), floor(floor_) {}

FrequencyExcluded::FrequencyExcluded(int step_, int i_, int j_, std::vector<int> k_, double divisor_,
                                     double bound_)
    : Error("frequency excluded at step " + std::to_string(step_) + ": (i=" + std::to_string(i_) +
            ", j=" + std::to_string(j_) + ", k=" + format_mode(k_) + ") divisor " +
            std::to_string(divisor_) + " below bound " + std::to_string(bound_)),
      step(step_), i(i_), j(j_), k(std::move(k_)), divisor(divisor_), bound(bound_) {}

std::string format_mode(const std::vector<int>& k) {
  std::ostringstream os;
  os << '(';
  for (std::size_t l = 0; l < k.size(); ++l) os << (l ? "," : "") << k[l];
  os << ')';
  return os.str();
}

Lattice::Lattice(int n, int K) : n_(n), K_(K) {
  if (n < 1) throw InvalidArgument("lattice dimension must be positive");
  if (K < 0) throw InvalidArgument("Fourier cutoff must be non-negative");
  const int side = 2 * K + 1;
  size_ = 1;
  for (int l = 0; l < n; ++l) size_ *= static_cast<std::size_t>(side);
  modes_.resize(size_ * n);
  l1_.resize(size_);
  linf_.resize(size_);
  for (std::size_t idx = 0; idx < size_; ++idx) {
    std::size_t rest = idx;
    int a1 = 0, ainf = 0;
    for (int l = n - 1; l >= 0; --l) {
      const int k = static_cast<int>(rest % side) - K;
      rest /= side;
      modes_[idx * n + l] = k;
      a1 += std::abs(k);
      ainf = std::max(ainf, std::abs(k));
    }
    l1_[idx] = a1;
    linf_[idx] = ainf;
  }
}

std::shared_ptr<const Lattice> Lattice::get(int n, int K) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const Lattice>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, K}];
  if (!slot) slot = std::make_shared<const Lattice>(n, K);
  return slot;
}

Mode Lattice::mode_vector(std::size_t idx) const {
  auto k = mode(idx);
  return Mode(k.begin(), k.end());
}

std::size_t Lattice::index(std::span<const int> k) const {
  std::size_t idx = 0;
  const std::size_t side = 2 * K_ + 1;
  for (int l = 0; l < n_; ++l) idx = idx * side + static_cast<std::size_t>(k[l] + K_);
  return idx;
}

std::optional<std::size_t> Lattice::find(std::span<const int> k) const {
  if (static_cast<int>(k.size()) != n_) return std::nullopt;
  for (int c : k)
    if (std::abs(c) > K_) return std::nullopt;
  return index(k);
}

double Lattice::dot(std::span<const double> omega, std::size_t idx) const {
  const int* k = modes_.data() + idx * n_;
  double acc = 0.0;
  for (int l = 0; l < n_; ++l) acc += omega[l] * k[l];
  return acc;
}

namespace {

void enumerate_l1(int n, int kmax, int l, int budget, Mode& current, std::vector<Mode>& out) {
  if (l == n) {
    out.push_back(current);
    return;
  }
  for (int c = -budget; c <= budget; ++c) {
    current[l] = c;
    enumerate_l1(n, kmax, l + 1, budget - std::abs(c), current, out);
  }
}

}  // namespace

std::vector<Mode> l1_ball(int n, int kmax) {
  std::vector<Mode> out;
  Mode current(n, 0);
  enumerate_l1(n, kmax, 0, kmax, current, out);
  return out;
}

std::vector<Mode> half_l1_ball(int n, int kmax) {
  std::vector<Mode> out;
  for (auto& k : l1_ball(n, kmax)) {
    for (int c : k) {
      if (c == 0) continue;
      if (c > 0) out.push_back(k);
      break;
    }
  }
  return out;
}

}  // namespace kam
