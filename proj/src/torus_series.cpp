#include "kam/torus_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kam/errors.hpp"

namespace kam {

TorusSeries::TorusSeries(int n, int K) : lattice_(Lattice::get(n, K)), coeffs_(lattice_->size()) {}

TorusSeries TorusSeries::constant(int n, int K, cplx value) {
  TorusSeries f(n, K);
  f.coeffs_[f.lattice_->zero_index()] = value;
  return f;
}

TorusSeries TorusSeries::mode(std::span<const int> k, cplx c, int K) {
  int kinf = 0;
  for (int v : k) kinf = std::max(kinf, std::abs(v));
  TorusSeries f(static_cast<int>(k.size()), K < 0 ? kinf : K);
  f.set(k, c);
  return f;
}

cplx TorusSeries::coeff(std::span<const int> k) const {
  auto idx = lattice_->find(k);
  return idx ? coeffs_[*idx] : cplx{};
}

void TorusSeries::set(std::span<const int> k, cplx value) {
  auto idx = lattice_->find(k);
  if (!idx) throw InvalidArgument("mode " + format_mode(Mode(k.begin(), k.end())) + " outside cutoff");
  coeffs_[*idx] = value;
}

namespace {

// phase[l][k+K] = e^{i k φ_l}
std::vector<cplx> phase_table(int n, int K, std::span<const double> phi) {
  const int side = 2 * K + 1;
  std::vector<cplx> table(static_cast<std::size_t>(n) * side);
  for (int l = 0; l < n; ++l) {
    for (int k = -K; k <= K; ++k) table[l * side + k + K] = std::polar(1.0, k * phi[l]);
  }
  return table;
}

}  // namespace

cplx TorusSeries::operator()(std::span<const double> phi) const {
  const int n = dim(), K = cutoff(), side = 2 * K + 1;
  if (static_cast<int>(phi.size()) != n) throw InvalidArgument("angle dimension mismatch");
  const auto table = phase_table(n, K, phi);
  cplx acc{};
  for (std::size_t idx = 0; idx < coeffs_.size(); ++idx) {
    if (coeffs_[idx] == cplx{}) continue;
    auto k = lattice_->mode(idx);
    cplx e{1.0, 0.0};
    for (int l = 0; l < n; ++l) e *= table[l * side + k[l] + K];
    acc += coeffs_[idx] * e;
  }
  return acc;
}

TorusSeries TorusSeries::conj_on_torus() const {
  TorusSeries out(dim(), cutoff());
  for (std::size_t idx = 0; idx < coeffs_.size(); ++idx)
    out.coeffs_[idx] = std::conj(coeffs_[lattice_->negated(idx)]);
  return out;
}

TorusSeries TorusSeries::resized(int K) const {
  if (K == cutoff()) return *this;
  TorusSeries out(dim(), K);
  const auto& src = *lattice_;
  for (std::size_t idx = 0; idx < coeffs_.size(); ++idx) {
    if (src.linf(idx) > K) continue;
    out.coeffs_[out.lattice_->index(src.mode(idx))] = coeffs_[idx];
  }
  return out;
}

double TorusSeries::reality_defect() const {
  double worst = 0.0;
  for (std::size_t idx = 0; idx < coeffs_.size(); ++idx)
    worst = std::max(worst, std::abs(coeffs_[idx] - std::conj(coeffs_[lattice_->negated(idx)])));
  return worst;
}

bool TorusSeries::is_real_on_torus(double tol) const { return reality_defect() <= tol; }

double TorusSeries::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

TorusSeries& TorusSeries::operator+=(const TorusSeries& other) {
  if (empty()) return *this = other;
  if (other.dim() != dim()) throw InvalidArgument("angle dimension mismatch in series sum");
  if (other.cutoff() > cutoff()) *this = resized(other.cutoff());
  if (other.cutoff() == cutoff()) {
    for (std::size_t idx = 0; idx < coeffs_.size(); ++idx) coeffs_[idx] += other.coeffs_[idx];
  } else {
    const auto& src = other.lattice();
    for (std::size_t idx = 0; idx < other.size(); ++idx)
      coeffs_[lattice_->index(src.mode(idx))] += other.coeffs_[idx];
  }
  return *this;
}

TorusSeries& TorusSeries::operator-=(const TorusSeries& other) {
  TorusSeries neg = other;
  neg *= -1.0;
  return *this += neg;
}

TorusSeries& TorusSeries::operator*=(cplx a) {
  for (auto& c : coeffs_) c *= a;
  return *this;
}

// ---------------------------------------------------------------------------

OperatorSeries::OperatorSeries(int N, int n, int K)
    : N_(N), n_(n), K_(K), entries_(static_cast<std::size_t>(N) * N, TorusSeries(n, K)) {
  if (N < 1) throw InvalidArgument("operator dimension must be positive");
}

OperatorSeries OperatorSeries::from_constant(const Eigen::MatrixXcd& m, int n, int K) {
  if (m.rows() != m.cols()) throw InvalidArgument("constant operator must be square");
  OperatorSeries op(static_cast<int>(m.rows()), n, K);
  const auto zero = op.lattice().zero_index();
  for (int j = 0; j < op.N_; ++j)
    for (int i = 0; i < op.N_; ++i) op(i, j)[zero] = m(i, j);
  return op;
}

Eigen::MatrixXcd OperatorSeries::coefficient(std::size_t idx) const {
  Eigen::MatrixXcd m(N_, N_);
  for (int j = 0; j < N_; ++j)
    for (int i = 0; i < N_; ++i) m(i, j) = (*this)(i, j)[idx];
  return m;
}

void OperatorSeries::set_coefficient(std::size_t idx, const Eigen::MatrixXcd& m) {
  for (int j = 0; j < N_; ++j)
    for (int i = 0; i < N_; ++i) (*this)(i, j)[idx] = m(i, j);
}

Eigen::MatrixXcd OperatorSeries::operator()(std::span<const double> phi) const {
  if (static_cast<int>(phi.size()) != n_) throw InvalidArgument("angle dimension mismatch");
  const int side = 2 * K_ + 1;
  const auto table = phase_table(n_, K_, phi);
  const auto& lat = lattice();
  std::vector<cplx> phase(lat.size());
  for (std::size_t idx = 0; idx < lat.size(); ++idx) {
    auto k = lat.mode(idx);
    cplx e{1.0, 0.0};
    for (int l = 0; l < n_; ++l) e *= table[l * side + k[l] + K_];
    phase[idx] = e;
  }
  Eigen::MatrixXcd m(N_, N_);
  for (int j = 0; j < N_; ++j) {
    for (int i = 0; i < N_; ++i) {
      const auto& f = (*this)(i, j);
      cplx acc{};
      for (std::size_t idx = 0; idx < phase.size(); ++idx) acc += f[idx] * phase[idx];
      m(i, j) = acc;
    }
  }
  return m;
}

OperatorSeries OperatorSeries::adjoint() const {
  OperatorSeries out(N_, n_, K_);
  for (int j = 0; j < N_; ++j)
    for (int i = 0; i < N_; ++i) out(i, j) = (*this)(j, i).conj_on_torus();
  return out;
}

double OperatorSeries::hermiticity_defect(int sign) const {
  double worst = 0.0;
  const auto& lat = lattice();
  for (int j = 0; j < N_; ++j) {
    for (int i = 0; i <= j; ++i) {
      const auto& a = (*this)(i, j);
      const auto& b = (*this)(j, i);
      for (std::size_t idx = 0; idx < a.size(); ++idx) {
        const cplx mirrored = std::conj(b[lat.negated(idx)]);
        worst = std::max(worst, std::abs(a[idx] - static_cast<double>(sign) * mirrored));
      }
    }
  }
  return worst;
}

OperatorSeries OperatorSeries::resized(int K) const {
  if (K == K_) return *this;
  OperatorSeries out(N_, n_, K);
  for (std::size_t e = 0; e < entries_.size(); ++e) out.entries_[e] = entries_[e].resized(K);
  return out;
}

OperatorSeries OperatorSeries::diagonal() const {
  OperatorSeries out(N_, n_, K_);
  for (int i = 0; i < N_; ++i) out(i, i) = (*this)(i, i);
  return out;
}

OperatorSeries OperatorSeries::offdiagonal() const {
  OperatorSeries out = *this;
  for (int i = 0; i < N_; ++i) out(i, i) = TorusSeries(n_, K_);
  return out;
}

double OperatorSeries::max_abs_coeff() const {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, e.max_abs_coeff());
  return m;
}

OperatorSeries& OperatorSeries::operator+=(const OperatorSeries& other) {
  if (other.N_ != N_ || other.n_ != n_) throw InvalidArgument("operator shape mismatch in sum");
  for (std::size_t e = 0; e < entries_.size(); ++e) entries_[e] += other.entries_[e];
  K_ = std::max(K_, other.K_);
  return *this;
}

OperatorSeries& OperatorSeries::operator-=(const OperatorSeries& other) {
  if (other.N_ != N_ || other.n_ != n_) throw InvalidArgument("operator shape mismatch in sum");
  for (std::size_t e = 0; e < entries_.size(); ++e) entries_[e] -= other.entries_[e];
  K_ = std::max(K_, other.K_);
  return *this;
}

OperatorSeries& OperatorSeries::operator*=(cplx a) {
  for (auto& e : entries_) e *= a;
  return *this;
}

// ---------------------------------------------------------------------------

DiagonalPart DiagonalPart::power_law(int N, int n, double d, double delta, double scale) {
  DiagonalPart A;
  A.d = d;
  A.delta = delta;
  A.lambda.resize(N);
  A.mu.assign(N, TorusSeries(n, 0));
  for (int i = 0; i < N; ++i) A.lambda[i] = scale * std::pow(static_cast<double>(i + 1), d);
  return A;
}

Eigen::VectorXd DiagonalPart::weights() const {
  Eigen::VectorXd w(size());
  for (int i = 0; i < size(); ++i) {
    if (!(lambda[i] > 0.0))
      throw InvalidArgument("non-positive eigenvalue λ_" + std::to_string(i + 1) + " in weight");
    w(i) = std::pow(lambda[i], -delta / d);
  }
  return w;
}

bool DiagonalPart::mu_vanishes() const {
  for (const auto& m : mu)
    if (m.max_abs_coeff() != 0.0) return false;
  return true;
}

void DiagonalPart::validate() const {
  if (lambda.empty()) throw InvalidArgument("diagonal part is empty");
  if (mu.size() != lambda.size()) throw InvalidArgument("μ list length differs from λ list");
  if (!(delta < d - 1.0)) throw InvalidArgument("need δ < d − 1");
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] > 0.0)) throw InvalidArgument("λ must be positive");
    if (i > 0 && !(lambda[i] > lambda[i - 1])) throw InvalidArgument("λ must be strictly increasing");
    if (mu[i].dim() != mu.front().dim()) throw InvalidArgument("μ angle dimensions differ");
    if (!mu[i].has_zero_average()) throw InvalidArgument("μ_i must have zero average");
  }
}

double DiagonalPart::lambda_separation(int count) const {
  const int n = count < 0 ? size() : std::min(count, size());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double scale = std::abs(std::pow(i + 1.0, d) - std::pow(j + 1.0, d));
      best = std::min(best, std::abs(lambda[i] - lambda[j]) / scale);
    }
  return best;
}

}  // namespace kam
