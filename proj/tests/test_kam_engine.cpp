#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "kam/errors.hpp"
#include "kam/homological.hpp"
#include "kam/kam_engine.hpp"
#include "kam/linalg.hpp"
#include "kam/norms.hpp"
#include "kam/random_model.hpp"
#include "support/checks.hpp"

using namespace kam;

namespace {

const Frequency kOmega2{{0.7548776662, 0.5698402910}, 0.05, 5.5};
const Frequency kOmega1{{0.6180339887}, 0.05, 8.0};

KamSettings small_settings(int N, double eps) {
  KamSettings s;
  s.N = N;
  s.epsilon = eps;
  s.K = 2;
  s.K_work = 8;
  s.cert_K = 12;
  s.unitarity_grid = 16;
  return s;
}

struct Problem {
  DiagonalPart A;
  OperatorSeries P;
};

Problem make_problem(int N, int n, int K, double eps, double s, std::uint64_t seed) {
  Rng rng(seed);
  auto A = DiagonalPart::power_law(N, n, 4.0 / 3.0, 0.2);
  auto P = random_hermitian({N, n, K, 1.0, 0.0}, rng);
  return {A, eps > 0 ? normalized(P, A, s, eps) : OperatorSeries(N, n, K)};
}

Eigen::MatrixXcd diag_at(const DiagonalPart& A, std::span<const double> phi) {
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(A.size(), A.size());
  for (int i = 0; i < A.size(); ++i) D(i, i) = A.lambda[i] + (A.mu.empty() ? cplx{} : A.mu[i](phi));
  return D;
}

}  // namespace

TEST_CASE("diagonal split") {
  SUBCASE("mean and fluctuation") {
    OperatorSeries P(1, 1, 1);
    const std::vector<int> z{0}, p{1}, m{-1};
    P(0, 0).set(z, 2.0);
    P(0, 0).set(p, 0.5);
    P(0, 0).set(m, 0.5);
    auto s = diag_split(P);
    CHECK(s.lambda_shift[0] == 2.0);
    CHECK(s.mu_add[0].mean() == cplx{});
    CHECK(s.mu_add[0].coeff(p) == cplx(0.5));
    CHECK(s.offdiag.max_abs_coeff() == 0.0);
  }
  SUBCASE("zero diagonal") {
    Rng rng(1);
    auto P = random_hermitian({4, 2, 2, 1.0, 0.0}, rng).offdiagonal();
    auto s = diag_split(P);
    for (int i = 0; i < 4; ++i) {
      CHECK(s.lambda_shift[i] == 0.0);
      CHECK(s.mu_add[i].max_abs_coeff() == 0.0);
    }
    CHECK((s.offdiag - P).max_abs_coeff() == 0.0);
  }
  SUBCASE("reassembly") {
    Rng rng(2);
    auto P = random_hermitian({5, 2, 3, 1.0, 0.0}, rng);
    auto s = diag_split(P);
    OperatorSeries R = s.offdiag;
    for (int i = 0; i < 5; ++i) {
      R(i, i) = s.mu_add[i];
      R(i, i)[R(i, i).lattice().zero_index()] += s.lambda_shift[i];
      CHECK(s.mu_add[i].is_real_on_torus(0.0));
    }
    CHECK((R - P).max_abs_coeff() == 0.0);
  }
  SUBCASE("non-real average") {
    OperatorSeries P(2, 1, 1);
    const std::vector<int> z{0};
    P(0, 0).set(z, cplx(1.0, 0.1));
    CHECK_THROWS_AS(diag_split(P), HermiticityError);
  }
}

TEST_CASE("conjugation") {
  SUBCASE("identity conjugation moves the diagonal out") {
    Rng rng(3);
    auto A = DiagonalPart::power_law(5, 2, 4.0 / 3.0, 0.2);
    auto P = random_hermitian({5, 2, 2, 1.0, 0.0}, rng);
    auto Pp = conjugate(A, P, OperatorSeries(5, 2, 2), kOmega2);
    CHECK((Pp - P.offdiagonal()).max_abs_coeff() < 1e-14);
  }
  SUBCASE("commuting constant generator") {
    auto A = DiagonalPart::power_law(4, 1, 4.0 / 3.0, 0.2);
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(4, 4);
    for (int i = 0; i < 4; ++i) b(i, i) = cplx(0, 0.3 * (i + 1));
    auto B = OperatorSeries::from_constant(b, 1, 2);
    auto Pp = conjugate(A, OperatorSeries(4, 1, 2), B, kOmega1);
    CHECK(Pp.max_abs_coeff() < 1e-14);
  }
  SUBCASE("exponential and commutator paths agree") {
    auto pr = make_problem(6, 2, 2, 1e-2, 0.5, 4);
    auto sol = solve_variable(pr.P, pr.A, kOmega2);
    ConjugateOptions lie, ex;
    ex.reference = true;
    ex.oversample = 4;
    lie.oversample = 4;
    auto a = conjugate(pr.A, pr.P, sol.B, kOmega2, lie);
    auto b = conjugate(pr.A, pr.P, sol.B, kOmega2, ex);
    CHECK((a - b).max_abs_coeff() < 1e-12);
    ConjugateOptions serial = lie;
    serial.parallel = false;
    CHECK((conjugate(pr.A, pr.P, sol.B, kOmega2, serial) - a).max_abs_coeff() == 0.0);
  }
  SUBCASE("quadratic size of the new perturbation") {
    std::vector<double> C;
    for (int seed = 0; seed < 20; ++seed) {
      auto pr = make_problem(6, 1, 2, 1e-3, 0.5, 100 + seed);
      const double s = 0.5, sigma = 0.125;
      auto sol = solve_variable(pr.P, pr.A, kOmega1);
      ConjugateOptions opts;
      opts.K_out = 8;
      auto Pp = conjugate(pr.A, pr.P, sol.B, kOmega1, opts);
      const double p = delta_norm(pr.P, pr.A, s);
      C.push_back(delta_norm(Pp, pr.A, s - sigma) / (p * p));
      CHECK(Pp.is_hermitian(1e-11 * Pp.max_abs_coeff() + 1e-300));
    }
    const auto [lo, hi] = std::minmax_element(C.begin(), C.end());
    MESSAGE("fitted quadratic constant range [" << *lo << ", " << *hi << "]");
    CHECK(*hi / *lo < 10.0);
  }
}

TEST_CASE("single step") {
  SUBCASE("zero perturbation leaves the state untouched") {
    auto pr = make_problem(5, 1, 2, 0.0, 0.5, 5);
    auto settings = small_settings(5, 0.0);
    auto st = initial_state(pr.A, pr.P, settings);
    auto next = kam_step(st, kOmega1, settings);
    CHECK(next.l == 1);
    CHECK(next.gamma == st.gamma);
    CHECK(next.C_lambda == st.C_lambda);
    CHECK(next.C_mu == st.C_mu);
    CHECK(next.A.lambda == st.A.lambda);
    CHECK(next.generators.empty());
  }
  SUBCASE("superlinear decrease") {
    KamSettings settings;
    settings.N = 12;
    settings.unitarity_grid = 0;
    auto pr = make_problem(12, 2, 6, 1e-3, 0.5, 6);
    auto st = initial_state(pr.A, pr.P, settings);
    StepRecord rec;
    auto next = kam_step(st, kOmega2, settings, &rec);
    CHECK(rec.norm_in == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(rec.norm_out <= std::pow(1e-3, 1.2));
    CHECK(next.gamma == doctest::Approx(st.gamma - rec.norm_in * (1 + std::pow(rec.K_eff, settings.tau_for(2)))));
    CHECK(next.C_mu == doctest::Approx(rec.norm_in));
    CHECK(next.C_lambda == doctest::Approx(st.C_lambda - 2 * rec.norm_in));
    CHECK(next.generators.size() == 1);
    CHECK(next.generators.front().is_antihermitian(0.0));
  }
  SUBCASE("resonant frequency is excluded") {
    auto pr = make_problem(6, 1, 2, 1e-3, 0.5, 7);
    auto settings = small_settings(6, 1e-3);
    const double w = (pr.A.lambda[1] - pr.A.lambda[0]) / 2.0;
    auto st = initial_state(pr.A, pr.P, settings);
    try {
      kam_step(st, Frequency{{w}, 0.05, 8.0}, settings);
      FAIL("expected exclusion");
    } catch (const FrequencyExcluded& e) {
      const bool forward = e.i == 1 && e.j == 2 && e.k == Mode{2};
      const bool mirrored = e.i == 2 && e.j == 1 && e.k == Mode{-2};
      CHECK((forward || mirrored));
      CHECK(e.step == 1);
    }
  }
}

TEST_CASE("full schedule") {
  SUBCASE("zero perturbation") {
    auto pr = make_problem(5, 1, 2, 0.0, 0.5, 8);
    auto r = run_schedule(pr.A, pr.P, kOmega1, small_settings(5, 0.0));
    CHECK(r.converged);
    CHECK(r.steps.empty());
    CHECK(r.reduced.lambda_inf == pr.A.lambda);
    CHECK(r.reduced.generators.empty());
  }
  SUBCASE("periodic run with bookkeeping invariants") {
    auto settings = small_settings(8, 1e-3);
    auto pr = make_problem(8, 1, 2, 1e-3, settings.s, 9);
    auto r = run_schedule(pr.A, pr.P, kOmega1, settings);
    REQUIRE(r.converged);
    CHECK(r.steps.size() <= 4);
    CHECK(r.max_unitarity_defect < 1e-10);
    for (std::size_t q = 0; q < r.steps.size(); ++q) {
      const auto& s = r.steps[q];
      CHECK(s.hom_residual < 1e-9);
      if (q > 0) {
        const auto& p = r.steps[q - 1];
        CHECK(s.gamma <= p.gamma);
        CHECK(s.C_mu >= p.C_mu);
        CHECK(s.C_omega >= p.C_omega);
        CHECK(s.C_lambda <= p.C_lambda);
        CHECK(s.norm_out < p.norm_out);
      }
    }
    for (int i = 0; i < 8; ++i) {
      CHECK(r.reduced.mu_inf[i].has_zero_average(1e-15));
      CHECK(std::abs(r.reduced.lambda_inf[i] - pr.A.lambda[i]) <=
            r.lambda_shift_constant * std::pow(i + 1.0, 0.2) * 1e-3 * (1 + 1e-12));
    }
  }
  SUBCASE("large perturbation leaves the perturbative regime") {
    auto settings = small_settings(8, 0.3);
    auto pr = make_problem(8, 1, 2, 0.3, settings.s, 10);
    auto r = run_schedule(pr.A, pr.P, kOmega1, settings);
    CHECK_FALSE(r.converged);
    CHECK(r.diverged);
    CHECK_FALSE(r.reason.empty());
  }
}

TEST_CASE("transformed system equals the reduced one") {
  auto settings = small_settings(6, 1e-3);
  auto pr = make_problem(6, 1, 2, 1e-3, settings.s, 11);
  auto r = run_schedule(pr.A, pr.P, kOmega1, settings);
  REQUIRE(r.converged);
  const double w = kOmega1.omega[0];
  const double h = 1e-3;
  auto U = [&](double phi) {
    const std::vector<double> p{phi};
    return compose_transformations(r.reduced.generators, p);
  };
  double worst = 0.0;
  for (int q = 0; q < 8; ++q) {
    const std::vector<double> phi{2 * M_PI * q / 8};
    const Eigen::MatrixXcd u = U(phi[0]);
    const Eigen::MatrixXcd du =
        (U(phi[0] - 2 * w * h) - 8.0 * U(phi[0] - w * h) + 8.0 * U(phi[0] + w * h) - U(phi[0] + 2 * w * h)) /
        (12 * h);
    const Eigen::MatrixXcd H = diag_at(pr.A, phi) + pr.P(phi);
    const Eigen::MatrixXcd lhs = u.adjoint() * H * u - cplx(0, 1) * u.adjoint() * du;
    const Eigen::MatrixXcd rhs = diag_at(r.final.A, phi) + r.final.P(phi);
    worst = std::max(worst, op_norm(lhs - rhs));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("composition of exponentials") {
  const std::vector<double> phi{0.4};
  auto I = compose_transformations({}, phi);
  CHECK(I.rows() == 1);
  CHECK(I(0, 0) == cplx(1.0));

  const double theta = 0.37;
  Eigen::MatrixXcd J(2, 2);
  J << 0, -theta, theta, 0;
  auto R = compose_transformations({OperatorSeries::from_constant(J, 1, 0)}, phi);
  Eigen::MatrixXcd expect(2, 2);
  expect << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  CHECK((R - expect).norm() < 1e-15);

  Rng rng(12);
  std::vector<OperatorSeries> gens;
  for (int q = 0; q < 3; ++q) gens.push_back(0.1 * random_antihermitian({6, 2, 2, 1.0, 0.0}, rng));
  const std::vector<double> phi2{1.1, 2.3};
  CHECK(unitarity_defect(compose_transformations(gens, phi2)) < 1e-10);
  CHECK(composed_unitarity_defect(gens, 32) < 1e-10);
}

TEST_CASE("conjugation size estimates") {
  auto sti = checks::conjugation_bound(30, 201);
  CHECK(sti.violations == 0);
  auto stia = checks::commutator_remainder_scaling(30, 202);
  CHECK(stia.violations == 0);
}

TEST_CASE("settings validation") {
  KamSettings s;
  CHECK(s.validate(2).empty());
  CHECK(s.tau_for(2) == doctest::Approx(2 + 6 + 1));
  s.delta = 0.5;
  CHECK_THROWS_AS(s.validate(2), InvalidArgument);
  s = KamSettings{};
  s.tau = 3.0;
  CHECK_FALSE(s.validate(2).empty());
  CHECK(KamSettings::scheduled_epsilon(1e-3, 1) == doctest::Approx(std::pow(1e-3, 4.0 / 3.0)));
  CHECK(KamSettings::strip(0.5, 2) == doctest::Approx(0.5 - 0.125 - 0.5 / 16));
}
