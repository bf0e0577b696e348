#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "kam/torus_series.hpp"

namespace kam {

/// Equispaced grid φ_g = 2π g / M on T^n, points stored row-major.
struct GridSpec {
  int n = 1;
  int M = 2;

  std::size_t points() const;
  std::vector<double> angles(std::size_t g) const;
};

/// Smallest 2·3·5-smooth size ≥ max(target, 2).
int fft_friendly(int target);
/// Grid size for resolving cutoff K with the given oversampling factor:
/// fft_friendly(oversample·(2K+2)).
int grid_size_for(int K, int oversample = 2);

/// Samples f on the M^n grid.
std::vector<cplx> sample(const TorusSeries& f, int M);
/// Coefficients |k|_∞ ≤ K of grid data; throws AliasingError if M < 2K+2.
TorusSeries project(std::span<const cplx> values, int n, int M, int K);
/// project(sample(f, M), n, M, K).
TorusSeries transform_roundtrip(const TorusSeries& f, int grid_size_per_angle);

/// Operator values on a grid; entry (i,j) of point g is data[g·N² + j·N + i].
class OperatorGrid {
 public:
  OperatorGrid() = default;
  OperatorGrid(int N, GridSpec grid);

  int rows() const { return N_; }
  const GridSpec& grid() const { return grid_; }
  std::size_t points() const { return grid_.points(); }

  Eigen::Map<Eigen::MatrixXcd> at(std::size_t g) {
    return {data_.data() + g * N_ * N_, N_, N_};
  }
  Eigen::Map<const Eigen::MatrixXcd> at(std::size_t g) const {
    return {data_.data() + g * N_ * N_, N_, N_};
  }
  std::span<cplx> raw() { return data_; }
  std::span<const cplx> raw() const { return data_; }

 private:
  int N_ = 0;
  GridSpec grid_;
  std::vector<cplx> data_;
};

OperatorGrid sample(const OperatorSeries& op, int M);
OperatorSeries project(const OperatorGrid& values, int K);

/// Grid values of μ_i for every i: result[g·N + i].
std::vector<cplx> sample_diagonal(std::span<const TorusSeries> mu, int M);

/// ω·∂_φ f: coefficient k multiplied by i(ω·k).
TorusSeries directional_derivative(const TorusSeries& f, std::span<const double> omega);
OperatorSeries directional_derivative(const OperatorSeries& op, std::span<const double> omega);

}  // namespace kam
