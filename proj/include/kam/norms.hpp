#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "kam/errors.hpp"
#include "kam/torus_series.hpp"

namespace kam {

/// Σ_k |ĉ_k| e^{s|k|_1}, an upper bound for the sup of f on the strip of width s.
double sup_norm_s(const TorusSeries& f, double s);

/// ‖W P‖ with W = diag(λ_i^{−δ/d}) from base. For s = 0 the max over a
/// real grid of the pointwise operator norm; for s > 0 the coefficient bound
/// Σ_k e^{s|k|_1} ‖W P̂_k‖.
double delta_norm(const OperatorSeries& P, const DiagonalPart& base, double s);

/// max{‖B‖, ‖W B W^{−1}‖} with the same conventions as delta_norm.
double g_norm(const OperatorSeries& B, const DiagonalPart& base, double s);

/// Σ_k e^{s|k|_1} ‖diag(left) P̂_k diag(right)‖.
double coefficient_strip_bound(const OperatorSeries& P, const Eigen::VectorXd& left,
                               const Eigen::VectorXd& right, double s);
/// Max over the real grid of ‖diag(left) P(φ) diag(right)‖ (grid size M, default 2× oversampled).
double grid_operator_max(const OperatorSeries& P, const Eigen::VectorXd& left, const Eigen::VectorXd& right,
                         int M = 0);

/// max over pairs of ‖f(ω) − f(ω′)‖ / |ω − ω′|_2 for a finite family of samples.
template <class T, class Norm>
double lipschitz_seminorm(std::span<const std::pair<std::vector<double>, T>> family, Norm&& norm) {
  if (family.size() < 2) throw InvalidArgument("Lipschitz seminorm needs at least two ω samples");
  double best = 0.0;
  for (std::size_t a = 0; a < family.size(); ++a) {
    for (std::size_t b = a + 1; b < family.size(); ++b) {
      const auto& wa = family[a].first;
      const auto& wb = family[b].first;
      if (wa.size() != wb.size()) throw InvalidArgument("ω samples differ in dimension");
      double dist = 0.0;
      for (std::size_t l = 0; l < wa.size(); ++l) dist += (wa[l] - wb[l]) * (wa[l] - wb[l]);
      dist = std::sqrt(dist);
      if (dist == 0.0) throw InvalidArgument("repeated ω sample in Lipschitz family");
      best = std::max(best, norm(family[a].second - family[b].second) / dist);
    }
  }
  return best;
}

}  // namespace kam
