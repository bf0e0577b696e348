#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace kam {

using Mode = std::vector<int>;

/// Box of integer modes k ∈ ℤ^n with |k|_∞ ≤ K, stored row-major
/// (k_0 varies slowest). Instances are shared and immutable.
class Lattice {
 public:
  static std::shared_ptr<const Lattice> get(int n, int K);

  int dim() const { return n_; }
  int cutoff() const { return K_; }
  int side() const { return 2 * K_ + 1; }
  std::size_t size() const { return size_; }

  std::span<const int> mode(std::size_t idx) const {
    return {modes_.data() + idx * static_cast<std::size_t>(n_), static_cast<std::size_t>(n_)};
  }
  Mode mode_vector(std::size_t idx) const;
  int l1(std::size_t idx) const { return l1_[idx]; }
  int linf(std::size_t idx) const { return linf_[idx]; }

  /// Index of k; k must lie in the box.
  std::size_t index(std::span<const int> k) const;
  std::optional<std::size_t> find(std::span<const int> k) const;
  std::size_t zero_index() const { return size_ / 2; }
  /// Index of −k.
  std::size_t negated(std::size_t idx) const { return size_ - 1 - idx; }

  double dot(std::span<const double> omega, std::size_t idx) const;

  Lattice(int n, int K);

 private:
  int n_;
  int K_;
  std::size_t size_;
  std::vector<int> modes_;
  std::vector<int> l1_;
  std::vector<int> linf_;
};

/// All k ∈ ℤ^n with 0 < |k|_1 ≤ kmax, each pair {k, −k} represented once
/// (first nonzero component positive).
std::vector<Mode> half_l1_ball(int n, int kmax);

/// All k ∈ ℤ^n with |k|_1 ≤ kmax, including 0.
std::vector<Mode> l1_ball(int n, int kmax);

}  // namespace kam
