#include "kam/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <omp.h>

#include "kam/diophantine.hpp"
#include "kam/errors.hpp"
#include "kam/floquet_verify.hpp"
#include "kam/norms.hpp"
#include "kam/random_model.hpp"
#include "kam/serialization.hpp"

namespace fs = std::filesystem;

namespace kam {

namespace {

constexpr double kPrune = 1e-20;

enum Stream : std::uint64_t { kPerturbationStream = 1, kFrequencyStream = 2, kSurveyStream = 3, kStateStream = 4 };

std::string fmt(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

json cert_json(const Dio1Certificate& c) {
  return {{"pass", c.pass},           {"Kmax", c.Kmax},       {"gamma", c.gamma},
          {"gamma_max", c.gamma_max}, {"witness", c.witness}, {"witness_value", c.witness_value}};
}

json cert_json(const Dio2Certificate& c) {
  return {{"pass", c.pass},     {"Kmax", c.Kmax},           {"Nmax", c.Nmax},   {"gamma", c.gamma},
          {"gamma_max", c.gamma_max}, {"i", c.i},         {"j", c.j},         {"k", c.k},
          {"divisor", c.divisor}, {"bound", c.bound},     {"checked", c.checked}, {"pruned", c.pruned},
          {"c_lambda", c.c_lambda}, {"tail_safe", c.tail_safe}};
}

json step_json(const StepRecord& r) {
  json w = json::array();
  for (const auto& s : r.warnings) w.push_back(s);
  return {{"l", r.l},
          {"norm_in", r.norm_in},
          {"norm_out", r.norm_out},
          {"s_in", r.s_in},
          {"s_out", r.s_out},
          {"eps_scheduled", r.eps_scheduled},
          {"K_l", r.K_l},
          {"K_eff", r.K_eff},
          {"gamma", r.gamma},
          {"C_mu", r.C_mu},
          {"C_lambda", r.C_lambda},
          {"C_omega", r.C_omega},
          {"hom_residual", r.hom_residual},
          {"divisor_floor", r.divisor_floor},
          {"g_norm_B", r.g_norm_B},
          {"hermiticity_defect", r.hermiticity_defect},
          {"lie_order", r.lie_order},
          {"truncation_residue", r.truncation_residue},
          {"unitarity_defect", r.unitarity_defect},
          {"cert_gamma_max", r.cert_gamma_max},
          {"warnings", w}};
}

json series_list(const std::vector<TorusSeries>& v) {
  json a = json::array();
  for (const auto& f : v) a.push_back(to_json(f, kPrune));
  return a;
}

std::vector<TorusSeries> series_list_from(const json& a) {
  std::vector<TorusSeries> v;
  for (const auto& f : a) v.push_back(series_from_json(f));
  return v;
}

json reduced_json(const RunResult& r) {
  json gens = json::array();
  for (const auto& g : r.reduced.generators) gens.push_back(to_json(g, kPrune));
  return {{"converged", r.converged},
          {"diverged", r.diverged},
          {"reason", r.reason},
          {"initial_norm", r.final.initial_norm},
          {"norm_history", r.final.norm_history},
          {"lambda_inf", r.reduced.lambda_inf},
          {"mu_inf", series_list(r.reduced.mu_inf)},
          {"generators", gens},
          {"omega", r.reduced.omega.omega},
          {"gamma", r.reduced.omega.gamma},
          {"tau", r.reduced.omega.tau},
          {"max_unitarity_defect", r.max_unitarity_defect},
          {"lambda_shift_constant", r.lambda_shift_constant},
          {"prune", kPrune}};
}

ReducedSystem reduced_from(const json& j) {
  try {
    ReducedSystem rs;
    rs.lambda_inf = j.at("lambda_inf").get<std::vector<double>>();
    rs.mu_inf = series_list_from(j.at("mu_inf"));
    for (const auto& g : j.at("generators")) rs.generators.push_back(operator_from_json(g));
    rs.omega.omega = j.at("omega").get<std::vector<double>>();
    rs.omega.gamma = j.at("gamma").get<double>();
    rs.omega.tau = j.at("tau").get<double>();
    return rs;
  } catch (const json::exception& e) {
    throw ChecksumError(std::string("malformed reduced artifact: ") + e.what());
  }
}

json model_json(const BuiltModel& bm, double epsilon) {
  return {{"lambda", bm.A0.lambda}, {"mu", series_list(bm.A0.mu)}, {"d", bm.A0.d}, {"delta", bm.A0.delta},
          {"epsilon", epsilon},     {"P0", to_json(bm.P0)}};
}

std::pair<DiagonalPart, OperatorSeries> model_from(const json& j) {
  try {
    DiagonalPart A;
    A.lambda = j.at("lambda").get<std::vector<double>>();
    A.mu = series_list_from(j.at("mu"));
    A.d = j.at("d").get<double>();
    A.delta = j.at("delta").get<double>();
    return {A, operator_from_json(j.at("P0"))};
  } catch (const json::exception& e) {
    throw ChecksumError(std::string("malformed model artifact: ") + e.what());
  }
}

json read_required(const fs::path& path) {
  if (!fs::exists(path)) throw ChecksumError("missing artifact " + path.string() + " (run reduce first)");
  return read_artifact(path);
}

void write_error(const fs::path& dir, const std::exception& e) {
  json j = {{"kind", "error"}, {"exit_code", exit_code_for(e)}, {"message", e.what()}};
  if (const auto* fe = dynamic_cast<const FrequencyExcluded*>(&e)) {
    j["kind"] = "frequency_excluded";
    j["step"] = fe->step;
    j["i"] = fe->i;
    j["j"] = fe->j;
    j["k"] = fe->k;
    j["divisor"] = fe->divisor;
    j["bound"] = fe->bound;
  } else if (const auto* de = dynamic_cast<const DivisorTooSmall*>(&e)) {
    j["kind"] = "divisor_too_small";
    j["i"] = de->i;
    j["j"] = de->j;
    j["k"] = de->k;
    j["divisor"] = de->divisor;
    j["floor"] = de->floor;
  }
  write_artifact(dir / "error.json", j);
}

OperatorSeries raw_perturbation(const RunManifest& m, const std::optional<Oscillator>& osc) {
  const auto& src = m.model.perturbation;
  const int N = m.model.N, n = m.model.n;
  if (src.kind == "zero") return OperatorSeries(N, n, src.K);
  if (src.kind == "series") {
    if (src.series.rows() != N || src.series.dim() != n)
      throw SchemaError("model.perturbation.series", "shape differs from model N and n");
    return src.series;
  }
  if (src.kind == "terms") {
    PerturbationSpec spec;
    spec.beta = src.beta;
    spec.n = n;
    spec.terms = src.terms;
    return perturbation_matrix(spec, *osc, N, src.K);
  }
  Rng rng(derive_seed(m.seed, kPerturbationStream));
  return random_hermitian({N, n, src.K, src.decay, src.offdiag_decay}, rng);
}

DiagonalPart survey_base(const RunManifest& m, int Nmax) {
  if (m.model.kind == "power_law" && m.model.lambda.empty())
    return DiagonalPart::power_law(std::max(Nmax, m.model.N), m.model.n, m.model.d, m.model.delta);
  auto A = build_model(m).A0;
  if (A.size() < Nmax) throw SchemaError("survey.Nmax", "exceeds the number of model modes");
  return A;
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) s += (s.empty() ? "" : ",") + c;
  return s + "\n";
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SchemaError*>(&e)) return kExitSchema;
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const FrequencyExcluded*>(&e)) return kExitExcluded;
  if (dynamic_cast<const DivisorTooSmall*>(&e)) return kExitDivisor;
  if (dynamic_cast<const ChecksumError*>(&e)) return kExitArtifact;
  if (dynamic_cast<const NoAdmissibleFrequency*>(&e)) return kExitNoFrequency;
  if (dynamic_cast<const GuardViolated*>(&e) || dynamic_cast<const ConvergenceError*>(&e)) return kExitDiverged;
  return kExitError;
}

BuiltModel build_model(const RunManifest& m) {
  BuiltModel bm;
  const auto& src = m.model;
  if (src.kind == "oscillator") {
    OscillatorSpec spec = src.oscillator;
    spec.N = std::max(spec.N, src.N);
    bm.oscillator = build_oscillator(spec);
    bm.A0 = diagonal_from(*bm.oscillator, src.N, src.n, src.d, src.delta);
  } else if (src.lambda.empty()) {
    bm.A0 = DiagonalPart::power_law(src.N, src.n, src.d, src.delta);
  } else {
    bm.A0.lambda = src.lambda;
    bm.A0.mu.assign(src.N, TorusSeries(src.n, 0));
    bm.A0.d = src.d;
    bm.A0.delta = src.delta;
  }
  try {
    bm.A0.validate();
  } catch (const InvalidArgument& e) {
    throw SchemaError("model", e.what());
  }
  OperatorSeries P = raw_perturbation(m, bm.oscillator);
  const double norm = delta_norm(P, bm.A0, m.settings.s);
  if (m.settings.epsilon == 0.0 || norm == 0.0) {
    bm.P0 = OperatorSeries(src.N, src.n, P.cutoff());
  } else {
    bm.P0 = normalized(P, bm.A0, m.settings.s, m.settings.epsilon);
  }
  return bm;
}

Frequency resolve_frequency(const RunManifest& m, const DiagonalPart& A0, int* sample_index) {
  const int n = m.model.n;
  Frequency f;
  f.gamma = m.settings.gamma;
  f.tau = m.settings.tau_for(n);
  f.certified_K = m.frequency.Kmax > 0 ? m.frequency.Kmax : m.settings.cert_cutoff(n);
  f.certified_N = m.frequency.Nmax > 0 ? std::min(m.frequency.Nmax, A0.size()) : A0.size();
  if (sample_index) *sample_index = -1;
  if (!m.frequency.omega.empty()) {
    f.omega = m.frequency.omega;
    return f;
  }
  const std::uint64_t seed = derive_seed(m.seed, kFrequencyStream);
  for (int q = 0; q < m.frequency.sample_count; ++q) {
    f.omega = sample_point(n, seed, q);
    if (!check_dio1(f, f.certified_K).pass) continue;
    if (!check_dio2(f, A0, f.certified_K, f.certified_N).pass) continue;
    if (sample_index) *sample_index = q;
    return f;
  }
  throw NoAdmissibleFrequency("no admissible frequency among " + std::to_string(m.frequency.sample_count) +
                              " samples at gamma = " + fmt(f.gamma));
}

int cmd_frequencies(const RunManifest& m, const std::string& dir_, std::ostream& out) {
  const fs::path dir(dir_);
  const bool survey = !m.survey.gamma_grid.empty();
  if (!survey && m.frequency.omega.empty())
    throw UsageError("frequencies needs a non-empty survey.gamma_grid or a frequency.omega");
  fs::create_directories(dir);
  write_artifact(dir / "manifest.json", to_json(m));
  json report = {{"scenario", m.scenario}, {"seed", m.seed}};
  bool ok = true;

  if (!m.frequency.omega.empty()) {
    const auto A0 = build_model(m).A0;
    const Frequency f = resolve_frequency(m, A0);
    const auto c1 = check_dio1(f, f.certified_K);
    const auto c2 = check_dio2(f, A0, f.certified_K, f.certified_N);
    report["certificate"] = {{"omega", f.omega}, {"dio1", cert_json(c1)}, {"dio2", cert_json(c2)}};
    ok = c1.pass && c2.pass;
    out << "omega certificate: dio1 " << (c1.pass ? "pass" : "fail") << " (gamma_max " << fmt(c1.gamma_max)
        << "), dio2 " << (c2.pass ? "pass" : "fail") << " (gamma_max " << fmt(c2.gamma_max) << ")\n";
  }

  if (survey) {
    const auto& s = m.survey;
    const double tau = s.tau > 0.0 ? s.tau : m.settings.tau_for(m.model.n);
    const auto base = survey_base(m, s.Nmax);
    const auto gmax = sample_gamma_max(s.samples, m.model.n, tau, base, s.Kmax, s.Nmax, derive_seed(m.seed, kSurveyStream));
    std::string csv = csv_line({"gamma", "rejected", "accepted", "fraction"});
    json rows = json::array();
    std::vector<double> xs, ys;
    for (double g : s.gamma_grid) {
      int rejected = 0;
      for (double v : gmax) rejected += v < g;
      const double frac = static_cast<double>(rejected) / s.samples;
      csv += csv_line({fmt(g), std::to_string(rejected), std::to_string(s.samples - rejected), fmt(frac)});
      rows.push_back({{"gamma", g}, {"rejected", rejected}, {"fraction", frac}});
      xs.push_back(g);
      ys.push_back(frac);
    }
    write_text(dir / "rejection.csv", csv);
    json fit = nullptr;
    if (xs.size() >= 2) {
      double mx = 0, my = 0;
      for (std::size_t q = 0; q < xs.size(); ++q) mx += xs[q], my += ys[q];
      mx /= xs.size();
      my /= xs.size();
      double sxx = 0, sxy = 0, syy = 0;
      for (std::size_t q = 0; q < xs.size(); ++q) {
        sxx += (xs[q] - mx) * (xs[q] - mx);
        sxy += (xs[q] - mx) * (ys[q] - my);
        syy += (ys[q] - my) * (ys[q] - my);
      }
      const double slope = sxx > 0 ? sxy / sxx : 0.0;
      fit = {{"slope", slope}, {"intercept", my - slope * mx}, {"r2", syy > 0 ? sxy * sxy / (sxx * syy) : 1.0}};
    }
    report["survey"] = {{"tau", tau}, {"Kmax", s.Kmax}, {"Nmax", s.Nmax}, {"samples", s.samples},
                        {"rows", rows}, {"affine_fit", fit}};
    out << "survey: " << s.gamma_grid.size() << " gamma values, " << s.samples << " samples\n";
  }
  write_artifact(dir / "frequencies.json", report);
  return ok ? kExitOk : kExitExcluded;
}

int cmd_reduce(const RunManifest& m, const std::string& dir_, std::ostream& out) {
  const fs::path dir(dir_);
  fs::create_directories(dir);
  fs::remove(dir / "error.json");
  write_artifact(dir / "manifest.json", to_json(m));
  try {
    const BuiltModel bm = build_model(m);
    write_artifact(dir / "model.json", model_json(bm, m.settings.epsilon));
    int sample_index = -1;
    const Frequency f = resolve_frequency(m, bm.A0, &sample_index);
    write_artifact(dir / "frequency.json", {{"omega", f.omega},
                                            {"gamma", f.gamma},
                                            {"tau", f.tau},
                                            {"certified_K", f.certified_K},
                                            {"certified_N", f.certified_N},
                                            {"sample_index", sample_index}});

    std::ofstream steps(dir / "steps.jsonl", std::ios::binary);
    std::string timing = csv_line({"l", "seconds"});
    const RunResult r = run_schedule(bm.A0, bm.P0, f, m.settings, [&](const StepRecord& rec) {
      steps << step_json(rec).dump() << "\n";
      steps.flush();
      timing += csv_line({std::to_string(rec.l), fmt(rec.seconds)});
      out << "step " << rec.l << ": norm " << fmt(rec.norm_out) << "\n";
    });
    write_text(dir / "timing.csv", timing);
    write_artifact(dir / "reduced.json", reduced_json(r));

    const auto spec = floquet_spectrum(r.reduced, m.spectrum.Kmax);
    std::string csv = csv_line({"j", "k", "nu", "multiplicity"});
    for (const auto& e : spec) csv += csv_line({std::to_string(e.j), format_mode(e.k), fmt(e.nu), std::to_string(e.multiplicity)});
    write_text(dir / "floquet_spectrum.csv", csv);

    out << "reduce: " << r.reason << " after " << r.steps.size() << " steps\n";
    return r.converged ? kExitOk : kExitDiverged;
  } catch (const std::exception& e) {
    write_error(dir, e);
    throw;
  }
}

int cmd_verify(const RunManifest& m, const std::string& dir_, std::ostream& out) {
  const fs::path dir(dir_);
  const auto [A0, P0] = model_from(read_required(dir / "model.json"));
  const ReducedSystem rs = reduced_from(read_required(dir / "reduced.json"));
  const int N = A0.size();
  if (static_cast<int>(rs.lambda_inf.size()) != N) throw ChecksumError("model and reduced artifacts disagree on N");

  Rng rng(derive_seed(m.seed, kStateStream));
  std::normal_distribution<double> normal;
  Eigen::VectorXcd chi0(N);
  for (int i = 0; i < N; ++i) chi0(i) = cplx(normal(rng), normal(rng)) / (1.0 + i);
  chi0.normalize();

  const auto times = comparison_times(m.verify.t_max, m.verify.samples);
  const Eigen::VectorXcd psi0 = reconstruct_solution(rs, chi0, 0.0);
  const Trajectory traj = propagate_direct(A0, P0, 1.0, rs.omega.omega, psi0, times, m.verify.dt);

  std::string csv = csv_line({"t", "deviation", "relative", "reconstructed_norm"});
  double worst = 0.0, recon_drift = 0.0;
  json rows = json::array();
  for (std::size_t q = 0; q < times.size(); ++q) {
    const Eigen::VectorXcd r = reconstruct_solution(rs, chi0, times[q]);
    const double dev = (r - traj.psi[q]).norm();
    const double rel = dev / traj.psi[q].norm();
    worst = std::max(worst, rel);
    recon_drift = std::max(recon_drift, std::abs(r.norm() - psi0.norm()));
    csv += csv_line({fmt(times[q]), fmt(dev), fmt(rel), fmt(r.norm())});
    rows.push_back({{"t", times[q]}, {"deviation", dev}, {"relative", rel}});
  }
  write_text(dir / "trajectory_deviation.csv", csv);
  json report = {{"t_max", m.verify.t_max},
                 {"dt", m.verify.dt},
                 {"max_relative_deviation", worst},
                 {"direct_norm_drift", traj.norm_drift},
                 {"reconstruction_norm_drift", recon_drift},
                 {"rows", rows}};
  bool ok = worst < 1e-4 && traj.norm_drift < 1e-9 && recon_drift < 1e-9;

  if (rs.omega.dim() == 1) {
    const auto mono = monodromy_quasienergies(A0, P0, 1.0, rs.omega.omega[0], m.verify.dt);
    const int modes = std::min(m.verify.modes, N);
    const std::vector<double> lead(rs.lambda_inf.begin(), rs.lambda_inf.begin() + modes);
    const auto mis = quasienergy_mismatch(mono.quasienergies, lead, mono.period);
    double mmax = 0.0;
    for (double v : mis) mmax = std::max(mmax, v);
    report["monodromy"] = {{"period", mono.period},
                           {"quasienergies", mono.quasienergies},
                           {"mismatch", mis},
                           {"max_mismatch", mmax},
                           {"unitarity_defect", mono.unitarity_defect}};
    ok = ok && mmax < 1e-6;
    out << "monodromy: max quasi-energy mismatch " << fmt(mmax) << " over " << modes << " modes\n";
  }
  report["pass"] = ok;
  write_artifact(dir / "verify.json", report);
  out << "verify: max relative deviation " << fmt(worst) << ", norm drift " << fmt(traj.norm_drift) << "\n";
  return ok ? kExitOk : kExitError;
}

int cmd_spectrum(const RunManifest& m, const std::string& dir_, std::ostream& out) {
  const fs::path dir(dir_);
  const ReducedSystem rs = reduced_from(read_required(dir / "reduced.json"));
  const auto spec = floquet_spectrum(rs, m.spectrum.Kmax);
  std::string csv = csv_line({"j", "k", "nu", "multiplicity"});
  json rows = json::array();
  for (const auto& e : spec) {
    csv += csv_line({std::to_string(e.j), format_mode(e.k), fmt(e.nu), std::to_string(e.multiplicity)});
    rows.push_back({{"j", e.j}, {"k", e.k}, {"nu", e.nu}, {"multiplicity", e.multiplicity}});
  }
  write_text(dir / "spectrum.csv", csv);
  write_artifact(dir / "spectrum.json", {{"Kmax", m.spectrum.Kmax}, {"omega", rs.omega.omega}, {"eigenvalues", rows}});
  out << "spectrum: " << spec.size() << " Floquet eigenvalues with |k|_1 <= " << m.spectrum.Kmax << "\n";
  return kExitOk;
}

int cmd_model(const RunManifest& m, const std::string& dir_, std::ostream& out) {
  const fs::path dir(dir_);
  fs::create_directories(dir);
  write_artifact(dir / "manifest.json", to_json(m));
  const BuiltModel bm = build_model(m);
  json report = {{"kind", m.model.kind}, {"N", m.model.N}, {"c_lambda", bm.A0.lambda_separation()}};
  std::vector<double> lambdas = bm.A0.lambda;
  std::string csv = csv_line({"i", "lambda", "lambda_fine", "relative_change"});
  if (bm.oscillator) {
    const auto& o = *bm.oscillator;
    lambdas = o.lambda;
    for (std::size_t i = 0; i < o.lambda.size(); ++i)
      csv += csv_line({std::to_string(i + 1), fmt(o.lambda[i]), fmt(o.lambda_fine[i]),
                       fmt(std::abs(o.lambda[i] - o.lambda_fine[i]) / std::abs(o.lambda[i]))});
    report["alpha"] = o.spec.alpha;
    report["d_expected"] = 2.0 * o.spec.alpha / (o.spec.alpha + 2.0);
    report["certificate"] = o.certificate;
    report["min_gap"] = o.min_gap;
    report["grid_points"] = o.x.size();
    report["half_width"] = o.L;
  } else {
    for (std::size_t i = 0; i < lambdas.size(); ++i)
      csv += csv_line({std::to_string(i + 1), fmt(lambdas[i]), fmt(lambdas[i]), "0"});
  }
  write_text(dir / "eigenvalues.csv", csv);

  const int hi = std::min(m.report.fit_hi, static_cast<int>(lambdas.size()));
  if (hi - m.report.fit_lo + 1 >= 5) {
    const auto fit = asymptotic_exponent_fit(lambdas, m.report.fit_lo, hi);
    report["fit"] = {{"lo", m.report.fit_lo}, {"hi", hi}, {"d_fit", fit.slope}, {"stderr", fit.stderr_}};
    out << "model: fitted growth exponent " << fmt(fit.slope) << " over modes " << m.report.fit_lo << "-" << hi << "\n";
  }
  if (!m.report.delta_grid.empty() && m.model.perturbation.kind != "zero") {
    const auto rep = delta_boundedness_check(bm.P0, bm.A0, m.report.delta_grid);
    json rows = json::array();
    for (const auto& r : rep.rows)
      rows.push_back({{"delta", r.delta}, {"norm_half", r.norm_half}, {"norm_full", r.norm_full},
                      {"increment", r.increment}, {"flat", r.flat}});
    report["boundedness"] = {{"beta", m.model.perturbation.beta}, {"rows", rows}};
  }
  write_artifact(dir / "model_report.json", report);
  out << "model: " << lambdas.size() << " eigenvalues written\n";
  return kExitOk;
}

int run_cli(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.manifest.empty()) throw UsageError("--manifest is required");
    RunManifest m = load_manifest(opts.manifest);
    if (opts.seed) m.seed = *opts.seed;
    if (opts.threads > 0) omp_set_num_threads(opts.threads);
    std::string dir = !opts.out.empty() ? opts.out : m.output;
    if (dir.empty()) dir = "kam_out/" + m.scenario;
    if (opts.command == "frequencies") return cmd_frequencies(m, dir, out);
    if (opts.command == "reduce") return cmd_reduce(m, dir, out);
    if (opts.command == "verify") return cmd_verify(m, dir, out);
    if (opts.command == "spectrum") return cmd_spectrum(m, dir, out);
    if (opts.command == "model") return cmd_model(m, dir, out);
    throw UsageError("unknown command '" + opts.command + "'");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace kam
