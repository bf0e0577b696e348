#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kam/lattice.hpp"

namespace kam {

using cplx = std::complex<double>;

/// Truncated Fourier series f(φ) = Σ_{|k|_∞ ≤ K} ĉ_k e^{ik·φ} on the n-torus.
class TorusSeries {
 public:
  TorusSeries() = default;
  TorusSeries(int n, int K);

  static TorusSeries constant(int n, int K, cplx value);
  /// Single Fourier mode c·e^{ik·φ}; K defaults to |k|_∞.
  static TorusSeries mode(std::span<const int> k, cplx c, int K = -1);

  int dim() const { return lattice_ ? lattice_->dim() : 0; }
  int cutoff() const { return lattice_ ? lattice_->cutoff() : 0; }
  std::size_t size() const { return coeffs_.size(); }
  bool empty() const { return coeffs_.empty(); }
  const Lattice& lattice() const { return *lattice_; }
  const std::shared_ptr<const Lattice>& lattice_ptr() const { return lattice_; }

  cplx& operator[](std::size_t idx) { return coeffs_[idx]; }
  const cplx& operator[](std::size_t idx) const { return coeffs_[idx]; }
  std::span<cplx> coeffs() { return coeffs_; }
  std::span<const cplx> coeffs() const { return coeffs_; }

  /// Coefficient of mode k, zero outside the stored box.
  cplx coeff(std::span<const int> k) const;
  void set(std::span<const int> k, cplx value);

  cplx mean() const { return coeffs_[lattice_->zero_index()]; }
  cplx operator()(std::span<const double> phi) const;

  /// The function φ ↦ conj(f(φ)) on the real torus: ĉ_k → conj(ĉ_{−k}).
  TorusSeries conj_on_torus() const;
  /// Truncated (or zero-padded) copy with cutoff K.
  TorusSeries resized(int K) const;

  /// max_k |ĉ_k − conj(ĉ_{−k})|.
  double reality_defect() const;
  bool is_real_on_torus(double tol = 1e-12) const;
  bool has_zero_average(double tol = 0.0) const { return std::abs(mean()) <= tol; }
  double max_abs_coeff() const;

  TorusSeries& operator+=(const TorusSeries& other);
  TorusSeries& operator-=(const TorusSeries& other);
  TorusSeries& operator*=(cplx a);

  friend TorusSeries operator+(TorusSeries a, const TorusSeries& b) { return a += b; }
  friend TorusSeries operator-(TorusSeries a, const TorusSeries& b) { return a -= b; }
  friend TorusSeries operator*(cplx a, TorusSeries f) { return f *= a; }

 private:
  std::shared_ptr<const Lattice> lattice_;
  std::vector<cplx> coeffs_;
};

/// N×N matrix of TorusSeries sharing (n, K); the operator P(φ) or B(φ)
/// written in the eigenbasis of the unperturbed diagonal part.
class OperatorSeries {
 public:
  OperatorSeries() = default;
  OperatorSeries(int N, int n, int K);

  static OperatorSeries from_constant(const Eigen::MatrixXcd& m, int n, int K);

  int rows() const { return N_; }
  int dim() const { return n_; }
  int cutoff() const { return K_; }
  std::size_t modes() const { return entries_.empty() ? 0 : entries_.front().size(); }
  const Lattice& lattice() const { return entries_.front().lattice(); }

  TorusSeries& operator()(int i, int j) { return entries_[static_cast<std::size_t>(j) * N_ + i]; }
  const TorusSeries& operator()(int i, int j) const {
    return entries_[static_cast<std::size_t>(j) * N_ + i];
  }

  /// Matrix of coefficients (P̂_ij,k)_ij for lattice index idx.
  Eigen::MatrixXcd coefficient(std::size_t idx) const;
  void set_coefficient(std::size_t idx, const Eigen::MatrixXcd& m);
  Eigen::MatrixXcd operator()(std::span<const double> phi) const;

  /// (B*)_ij = conj_on_torus(B_ji).
  OperatorSeries adjoint() const;
  /// max over coefficients of |P − P*|; sign = −1 measures anti-hermiticity.
  double hermiticity_defect(int sign = +1) const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect(+1) <= tol; }
  bool is_antihermitian(double tol = 1e-12) const { return hermiticity_defect(-1) <= tol; }

  OperatorSeries resized(int K) const;
  OperatorSeries diagonal() const;
  OperatorSeries offdiagonal() const;
  double max_abs_coeff() const;

  OperatorSeries& operator+=(const OperatorSeries& other);
  OperatorSeries& operator-=(const OperatorSeries& other);
  OperatorSeries& operator*=(cplx a);
  friend OperatorSeries operator+(OperatorSeries a, const OperatorSeries& b) { return a += b; }
  friend OperatorSeries operator-(OperatorSeries a, const OperatorSeries& b) { return a -= b; }
  friend OperatorSeries operator*(cplx a, OperatorSeries f) { return f *= a; }

 private:
  int N_ = 0;
  int n_ = 0;
  int K_ = 0;
  std::vector<TorusSeries> entries_;  // column-major
};

/// diag(λ_i + μ_i(φ)) with constant λ and zero-average μ; d and δ are the
/// growth exponent of λ and the order of the perturbation class.
struct DiagonalPart {
  std::vector<double> lambda;
  std::vector<TorusSeries> mu;
  double d = 1.0;
  double delta = 0.0;

  static DiagonalPart power_law(int N, int n, double d, double delta, double scale = 1.0);

  int size() const { return static_cast<int>(lambda.size()); }
  int dim() const { return mu.empty() ? 0 : mu.front().dim(); }
  /// W_i = λ_i^{−δ/d}; throws if some λ_i ≤ 0.
  Eigen::VectorXd weights() const;
  bool mu_vanishes() const;
  /// Throws InvalidArgument if an invariant fails (zero average, ordering,
  /// positivity, δ < d − 1).
  void validate() const;
  /// min_{i<j} |λ_i − λ_j| / |i^d − j^d| over the first `count` modes.
  double lambda_separation(int count = -1) const;
};

/// Frequency vector with the diophantine parameters it was certified at.
struct Frequency {
  std::vector<double> omega;
  double gamma = 0.0;
  double tau = 0.0;
  int certified_K = 0;
  int certified_N = 0;

  int dim() const { return static_cast<int>(omega.size()); }
};

}  // namespace kam
