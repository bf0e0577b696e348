#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "kam/cli.hpp"
#include "kam/diophantine.hpp"
#include "kam/homological.hpp"
#include "kam/norms.hpp"
#include "kam/random_model.hpp"
#include "kam/schrodinger_model.hpp"
#include "kam/serialization.hpp"
#include "support/checks.hpp"

using namespace kam;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("kam_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

RunManifest manifest(const std::string& name) { return load_manifest(std::string(MANIFEST_DIR) + "/" + name); }

std::vector<json> read_steps(const fs::path& dir) {
  std::ifstream in(dir / "steps.jsonl");
  std::vector<json> steps;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) steps.push_back(json::parse(line));
  return steps;
}

DiagonalPart fluctuating(int N, int n, Rng& rng) {
  auto base = DiagonalPart::power_law(N, n, 4.0 / 3.0, 0.2);
  base.mu.resize(N);
  for (int i = 0; i < N; ++i) {
    auto m = random_series(n, 2, 1.0, rng, true, true);
    m *= 0.05 / sup_norm_s(m, 0.0);
    base.mu[i] = m;
  }
  return base;
}

Frequency certified(int n, const DiagonalPart& base, int Kmax, std::uint64_t seed) {
  const double tau = n + 2.0 / (base.d - 1.0) + 1.0;
  const auto s = sample_admissible(200, n, 0.02, tau, base, Kmax, base.size(), seed);
  return Frequency{s.accepted.front(), 0.02, tau, Kmax, base.size()};
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Homological residual on random certified instances.
Verdict homological_residual() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  std::uniform_int_distribution<int> Nd(2, 12), nd(1, 2), Kd(1, 6);
  double worst = 0.0;
  for (int q = 0; q < 50; ++q) {
    const int N = Nd(rng), n = nd(rng), K = Kd(rng);
    const auto base = fluctuating(N, n, rng);
    const auto w = certified(n, base, 2 * K + 4, 5000 + q);
    const auto P = random_hermitian({N, n, K, 1.0, 0.0}, rng);
    HomologicalOptions opts;
    opts.K_out = K + 12;
    worst = std::max(worst, solve_variable(P, base, w, opts).residual);
  }
  const double t = elapsed(t0);
  return {worst < 1e-9 && t < 10.0, "max relative defect " + num(worst) + " over 50 instances, " + num(t) + " s"};
}

// 2. Integrating-factor solver against a dense Galerkin solve.
Verdict kuksin_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1002);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int q = 0; q < 20; ++q) {
    const int n = 1 + q % 2;
    const int K = n == 1 ? 1 + q % 8 : 1 + q % 6;
    const int margin = n == 1 ? 24 : 6;
    auto h = random_series(n, 1, 1.0, rng, true, true);
    h *= 1.0 / sup_norm_s(h, 0.0);
    const auto b = random_series(n, K, 0.5, rng, false);
    const double E1 = 1.0 + 3.0 * u(rng);
    const double E2 = n == 1 ? 0.05 + 0.25 * u(rng) : 0.02 + 0.08 * u(rng);
    const Frequency w = n == 1 ? Frequency{{0.6180339887}, 0.0, 0.0} : Frequency{{0.7548776662, 0.5698402910}, 0.0, 0.0};
    HomologicalOptions opts;
    opts.K_out = K + margin;
    const auto chi = solve_kuksin(b, h, E1, E2, w, opts).chi;
    const auto dense = solve_kuksin_dense(b, h, E1, E2, w, K + margin);
    const int M = grid_size_for(K + margin);
    const auto va = sample(chi, M), vb = sample(dense, M);
    for (std::size_t g = 0; g < va.size(); ++g) worst = std::max(worst, std::abs(va[g] - vb[g]));
  }
  const double t = elapsed(t0);
  return {worst < 1e-8 && t < 5.0, "max sup difference " + num(worst) + " over 20 instances, " + num(t) + " s"};
}

struct ReferenceRun {
  fs::path dir;
  int rc = -1;
  double seconds = 0.0;
  std::vector<json> steps;
};

ReferenceRun reference_run() {
  ReferenceRun r;
  r.dir = scratch("reference");
  std::ostringstream log;
  const auto t0 = std::chrono::steady_clock::now();
  r.rc = cmd_reduce(manifest("reference.json"), r.dir.string(), log);
  r.seconds = elapsed(t0);
  r.steps = read_steps(r.dir);
  return r;
}

// 3. Superlinear decay of the perturbation along the schedule.
Verdict superlinear(const ReferenceRun& r) {
  if (r.rc != kExitOk || r.steps.empty()) return {false, "reduce exited with " + std::to_string(r.rc)};
  double prev = r.steps.front()["norm_in"].get<double>();
  double min_ratio = 1e300;
  std::string hist = num(prev);
  for (const auto& s : r.steps) {
    const double cur = s["norm_out"].get<double>();
    min_ratio = std::min(min_ratio, std::log(cur) / std::log(prev));
    prev = cur;
    hist += " -> " + num(cur);
  }
  const bool ok = r.steps.size() <= 4 && prev < 1e-12 && min_ratio >= 1.3 && r.seconds < 60.0;
  return {ok, "norms " + hist + ", min log-ratio " + num(min_ratio) + ", " + num(r.seconds) + " s"};
}

// 4. Unitarity of every composed transformation on the 32^n grid.
Verdict unitarity(const ReferenceRun& r) {
  if (r.steps.empty()) return {false, "no steps recorded"};
  double worst = 0.0;
  for (const auto& s : r.steps) worst = std::max(worst, s["unitarity_defect"].get<double>());
  const bool grid32 = manifest("reference.json").settings.unitarity_grid == 32;
  return {grid32 && worst < 1e-10, "max |U*U - I| " + num(worst) + " over " + std::to_string(r.steps.size()) + " steps"};
}

// 5. Monodromy quasi-energies of the periodic system against the reduced eigenvalues.
Verdict spectral_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = scratch("periodic");
  std::ostringstream log;
  auto m = manifest("periodic.json");
  if (cmd_reduce(m, dir.string(), log) != kExitOk) return {false, "periodic reduce did not converge"};
  cmd_verify(m, dir.string(), log);
  const auto v = read_artifact(dir / "verify.json");
  const auto& mono = v["monodromy"];
  const auto& mis = mono["mismatch"];
  double worst = 0.0;
  for (std::size_t q = 0; q < std::min<std::size_t>(10, mis.size()); ++q) worst = std::max(worst, mis[q].get<double>());
  const double t = elapsed(t0);
  return {mis.size() >= 10 && worst < 1e-6 && t < 120.0,
          "max mismatch " + num(worst) + " over the first 10 modes, " + num(t) + " s"};
}

// 6. Reconstructed solution against direct propagation.
Verdict trajectory(const ReferenceRun& r) {
  if (r.rc != kExitOk) return {false, "reference run unavailable"};
  std::ostringstream log;
  const auto t0 = std::chrono::steady_clock::now();
  cmd_verify(manifest("reference.json"), r.dir.string(), log);
  const auto v = read_artifact(r.dir / "verify.json");
  const double dev = v["max_relative_deviation"].get<double>();
  return {dev < 1e-4 && v["t_max"].get<double>() >= 50.0,
          "max relative deviation " + num(dev) + " over t <= 50, " + num(elapsed(t0)) + " s"};
}

// 7. Affine rejection fraction and per-slab measure bound.
Verdict measure_scaling() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = scratch("survey");
  std::ostringstream log;
  const auto m = manifest("survey.json");
  cmd_frequencies(m, dir.string(), log);
  const auto f = read_artifact(dir / "frequencies.json");
  const double r2 = f["survey"]["affine_fit"]["r2"].get<double>();
  const auto base = DiagonalPart::power_law(12, 2, m.model.d, m.model.delta);
  checks::Outcome slabs;
  for (double g : m.survey.gamma_grid) {
    const auto o = checks::slab_measures(g, m.survey.tau, base, 12, 12);
    slabs.instances += o.instances;
    slabs.violations += o.violations;
    slabs.worst = std::max(slabs.worst, o.worst);
  }
  const double t = elapsed(t0);
  const bool ok = r2 > 0.9 && slabs.violations == 0 && m.survey.samples >= 10000 && t < 60.0;
  return {ok, "R^2 " + num(r2) + ", " + std::to_string(slabs.violations) + "/" + std::to_string(slabs.instances) +
                  " slabs above 4a/|k| (worst ratio " + num(slabs.worst) + "), " + num(t) + " s"};
}

// 8. Norm inequalities on randomized instances.
Verdict inequalities() {
  const auto a = checks::gap_division_bound(100, 2001);
  const auto b = checks::family_cauchy_bound(100, 2002);
  const auto c = checks::conjugation_bound(100, 2003);
  const auto d = checks::commutator_remainder_scaling(100, 2004);
  const int v = a.violations + b.violations + c.violations + d.violations;
  return {v == 0 && a.instances == 100 && b.instances == 100 && c.instances == 100 && d.instances == 100,
          "violations " + std::to_string(v) + "; worst ratios " + num(a.worst) + ", " + num(b.worst) + ", " +
              num(c.worst) + "; worst slope deviation " + num(d.worst)};
}

// 9. Growth exponents of the anharmonic oscillators.
Verdict oscillator_asymptotics() {
  const auto t0 = std::chrono::steady_clock::now();
  auto fit = [](double alpha) {
    OscillatorSpec s;
    s.alpha = alpha;
    s.N = 200;
    const auto osc = build_oscillator(s);
    return asymptotic_exponent_fit(osc.lambda, 20, 200).slope;
  };
  const double f4 = fit(4.0), f6 = fit(6.0);
  const double e4 = std::abs(f4 - 4.0 / 3.0) / (4.0 / 3.0), e6 = std::abs(f6 - 1.5) / 1.5;
  OscillatorSpec h;
  h.alpha = 2.0;
  h.Q = {{1.0, 2.0}};
  h.N = 30;
  h.allow_alpha_le_2 = true;
  const auto osc = build_oscillator(h);
  double herr = 0.0;
  for (int i = 0; i < 30; ++i) herr = std::max(herr, std::abs(osc.lambda[i] - (2.0 * i + 1.0)));
  const double t = elapsed(t0);
  return {e4 < 0.03 && e6 < 0.03 && herr < 1e-9 && t < 120.0,
          "alpha=4 fit " + num(f4) + " (" + num(100 * e4) + "%), alpha=6 fit " + num(f6) + " (" + num(100 * e6) +
              "%), harmonic error " + num(herr) + ", " + num(t) + " s"};
}

// 10. Flatness of the weighted norm in N below the boundary and growth above it.
Verdict boundary_behavior() {
  OscillatorSpec s;
  s.alpha = 4.0;
  s.N = 140;
  const auto osc = build_oscillator(s);
  const double d = 4.0 / 3.0;
  TorusSeries g(1, 1);
  const std::vector<int> p{1}, m{-1};
  g.set(p, 0.5);
  g.set(m, 0.5);
  auto report = [&](double beta, const std::vector<double>& grid) {
    PerturbationSpec spec{beta, 1, {{SpatialTerm{"smooth", beta}, g}}};
    const auto P = perturbation_matrix(spec, osc, 128, 1);
    return delta_boundedness_check(P, diagonal_from(osc, 128, 1, d, 0.0), grid);
  };
  const double delta_flat = 0.5 * d / 4.0 + 0.1;
  const auto flat = report(0.5, {delta_flat});
  const auto grow = report(1.5, {0.0, 0.1, 0.2, 0.3});
  bool ok = flat.rows.front().flat;
  std::string grow_detail;
  for (const auto& r : grow.rows) {
    ok = ok && !r.flat;
    grow_detail += " " + num(r.increment);
  }
  return {ok, "beta=0.5 increment " + num(flat.rows.front().increment) + " at delta " + num(delta_flat) +
                  "; beta=1.5 increments" + grow_detail + " at delta 0, 0.1, 0.2, 0.3"};
}

// 11. Byte-identical JSON artifacts on replay.
Verdict determinism() {
  struct Case {
    std::string manifest;
    std::vector<std::string> commands;
  };
  const std::vector<Case> cases = {{"periodic.json", {"reduce", "verify", "spectrum"}},
                                   {"sampled.json", {"reduce"}},
                                   {"survey.json", {"frequencies"}},
                                   {"oscillator.json", {"model"}},
                                   {"resonant.json", {"reduce"}},
                                   {"reference.json", {"reduce"}}};
  int compared = 0;
  std::string differing;
  for (const auto& c : cases) {
    fs::path dirs[2] = {scratch("det_a"), scratch("det_b")};
    for (const auto& d : dirs) {
      std::ostringstream o, e;
      for (const auto& cmd : c.commands)
        run_cli({cmd, std::string(MANIFEST_DIR) + "/" + c.manifest, std::nullopt, d.string(), 0}, o, e);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const auto name = entry.path().filename().string();
      const auto ext = entry.path().extension().string();
      if (ext != ".json" && ext != ".jsonl") continue;
      ++compared;
      if (!fs::exists(dirs[1] / name) || read_text(entry.path()) != read_text(dirs[1] / name))
        differing += " " + c.manifest + ":" + name;
    }
    for (const auto& d : dirs) fs::remove_all(d);
  }
  return {compared > 0 && differing.empty(),
          std::to_string(compared) + " JSON artifacts compared" + (differing.empty() ? "" : ", differing:" + differing)};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Verdict()>& fn) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failures;
    std::printf("[%s] %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "homological residual", homological_residual);
  report(2, "transport solver vs dense Galerkin", kuksin_oracle);
  ReferenceRun ref;
  try {
    ref = reference_run();
  } catch (const std::exception& e) {
    std::printf("reference run failed: %s\n", e.what());
  }
  report(3, "superlinear decay", [&] { return superlinear(ref); });
  report(4, "unitarity", [&] { return unitarity(ref); });
  report(5, "periodic spectral oracle", spectral_oracle);
  report(6, "trajectory cross-check", [&] { return trajectory(ref); });
  report(7, "measure scaling", measure_scaling);
  report(8, "norm inequalities", inequalities);
  report(9, "oscillator asymptotics", oscillator_asymptotics);
  report(10, "boundary behavior", boundary_behavior);
  report(11, "determinism", determinism);
  fs::remove_all(fs::temp_directory_path() / "kam_acceptance_reference");
  fs::remove_all(fs::temp_directory_path() / "kam_acceptance_periodic");
  fs::remove_all(fs::temp_directory_path() / "kam_acceptance_survey");
  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
