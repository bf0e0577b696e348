#include "kam/manifest.hpp"

#include <fstream>
#include <set>

#include "kam/errors.hpp"
#include "kam/serialization.hpp"

namespace kam {

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_.empty() ? "$" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& raw(const std::string& key) { return j_.at(key); }

  void get(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw SchemaError(at(key), "expected a number");
    out = v.get<double>();
  }
  void get(const std::string& key, int& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer()) throw SchemaError(at(key), "expected an integer");
    out = v.get<int>();
  }
  void get(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw SchemaError(at(key), "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void get(const std::string& key, bool& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_boolean()) throw SchemaError(at(key), "expected true or false");
    out = v.get<bool>();
  }
  void get(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw SchemaError(at(key), "expected a string");
    out = v.get<std::string>();
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw SchemaError(at(key), "expected an array of numbers");
    out.clear();
    for (std::size_t q = 0; q < v.size(); ++q) {
      if (!v[q].is_number()) throw SchemaError(at(key) + "[" + std::to_string(q) + "]", "expected a number");
      out.push_back(v[q].get<double>());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw SchemaError(at(it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw SchemaError(path, what);
}

template <class F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(path, e.what());
  }
}

PotentialTerm potential_from(const json& j, const std::string& path) {
  Reader r(j, path);
  PotentialTerm t;
  r.get("coef", t.coef);
  r.get("power", t.power);
  r.finish();
  return t;
}

OscillatorSpec oscillator_from(const json& j, const std::string& path) {
  Reader r(j, path);
  OscillatorSpec o;
  r.get("alpha", o.alpha);
  if (r.has("Q")) {
    const auto& q = r.raw("Q");
    require(q.is_array(), r.at("Q"), "expected an array");
    for (std::size_t a = 0; a < q.size(); ++a) o.Q.push_back(potential_from(q[a], r.at("Q") + "[" + std::to_string(a) + "]"));
  }
  r.get("N", o.N);
  r.get("resolution", o.resolution);
  r.get("decay", o.decay);
  r.get("extra_modes", o.extra_modes);
  r.get("tolerance", o.tolerance);
  r.get("allow_alpha_le_2", o.allow_alpha_le_2);
  r.finish();
  require(o.N >= 1, r.at("N"), "must be positive");
  return o;
}

PerturbationTerm term_from(const json& j, const std::string& path) {
  Reader r(j, path);
  PerturbationTerm t;
  require(r.has("v"), r.at("v"), "required");
  {
    Reader v(r.raw("v"), r.at("v"));
    v.get("kind", t.v.kind);
    v.get("power", t.v.power);
    v.finish();
    require(t.v.kind == "monomial" || t.v.kind == "smooth" || t.v.kind == "abs" || t.v.kind == "const",
            v.at("kind"), "expected monomial, smooth, abs or const");
  }
  require(r.has("g"), r.at("g"), "required");
  t.g = guarded(r.at("g"), [&] { return series_from_json(r.raw("g")); });
  r.finish();
  return t;
}

PerturbationSource perturbation_from(const json& j, const std::string& path) {
  Reader r(j, path);
  PerturbationSource p;
  r.get("kind", p.kind);
  r.get("K", p.K);
  r.get("decay", p.decay);
  r.get("offdiag_decay", p.offdiag_decay);
  r.get("beta", p.beta);
  if (r.has("terms")) {
    const auto& t = r.raw("terms");
    require(t.is_array(), r.at("terms"), "expected an array");
    for (std::size_t a = 0; a < t.size(); ++a)
      p.terms.push_back(term_from(t[a], r.at("terms") + "[" + std::to_string(a) + "]"));
  }
  if (r.has("series")) p.series = guarded(r.at("series"), [&] { return operator_from_json(r.raw("series")); });
  r.finish();
  require(p.kind == "random" || p.kind == "terms" || p.kind == "series" || p.kind == "zero", r.at("kind"),
          "expected random, terms, series or zero");
  require(p.K >= 0, r.at("K"), "must be non-negative");
  if (p.kind == "terms") require(!p.terms.empty(), r.at("terms"), "required for kind terms");
  if (p.kind == "series") require(p.series.rows() > 0, r.at("series"), "required for kind series");
  return p;
}

ModelSource model_from(const json& j, const std::string& path) {
  Reader r(j, path);
  ModelSource m;
  r.get("kind", m.kind);
  r.get("N", m.N);
  r.get("n", m.n);
  r.get("d", m.d);
  r.get("delta", m.delta);
  r.get("lambda", m.lambda);
  if (r.has("oscillator")) m.oscillator = oscillator_from(r.raw("oscillator"), r.at("oscillator"));
  if (r.has("perturbation")) m.perturbation = perturbation_from(r.raw("perturbation"), r.at("perturbation"));
  r.finish();
  require(m.kind == "power_law" || m.kind == "oscillator", r.at("kind"), "expected power_law or oscillator");
  require(m.N >= 2, r.at("N"), "need at least two modes");
  require(m.n >= 1, r.at("n"), "need at least one angle");
  require(m.lambda.empty() || static_cast<int>(m.lambda.size()) == m.N, r.at("lambda"), "length differs from N");
  if (m.perturbation.kind == "terms") require(m.kind == "oscillator", r.at("perturbation.kind"), "terms need an oscillator model");
  return m;
}

KamSettings settings_from(const json& j, const std::string& path) {
  Reader r(j, path);
  KamSettings s;
  r.get("epsilon", s.epsilon);
  r.get("s", s.s);
  r.get("gamma", s.gamma);
  r.get("tau", s.tau);
  r.get("K", s.K);
  r.get("theta", s.theta);
  r.get("Cstar", s.Cstar);
  r.get("Comega_star", s.Comega_star);
  r.get("guard_C", s.guard_C);
  r.get("C_lambda", s.C_lambda);
  r.get("tol", s.tol);
  r.get("l_max", s.l_max);
  r.get("oversample", s.oversample);
  r.get("K_work", s.K_work);
  r.get("cert_K", s.cert_K);
  r.get("cert_N", s.cert_N);
  r.get("divisor_floor", s.divisor_floor);
  r.get("lie_max_order", s.lie_max_order);
  r.get("lie_tol", s.lie_tol);
  r.get("strict_guards", s.strict_guards);
  r.get("unitarity_grid", s.unitarity_grid);
  r.finish();
  require(s.epsilon >= 0.0, r.at("epsilon"), "must be non-negative");
  require(s.s > 0.0, r.at("s"), "must be positive");
  require(s.gamma > 0.0, r.at("gamma"), "must be positive");
  require(s.K >= 1, r.at("K"), "must be at least 1");
  require(s.l_max >= 0, r.at("l_max"), "must be non-negative");
  return s;
}

FrequencySource frequency_from(const json& j, const std::string& path) {
  Reader r(j, path);
  FrequencySource f;
  r.get("omega", f.omega);
  r.get("sample_count", f.sample_count);
  r.get("Kmax", f.Kmax);
  r.get("Nmax", f.Nmax);
  r.finish();
  require(f.sample_count >= 1, r.at("sample_count"), "must be positive");
  return f;
}

SurveySource survey_from(const json& j, const std::string& path) {
  Reader r(j, path);
  SurveySource s;
  r.get("gamma_grid", s.gamma_grid);
  r.get("samples", s.samples);
  r.get("tau", s.tau);
  r.get("Kmax", s.Kmax);
  r.get("Nmax", s.Nmax);
  r.finish();
  require(s.samples >= 1, r.at("samples"), "must be positive");
  for (double g : s.gamma_grid) require(g > 0.0, r.at("gamma_grid"), "entries must be positive");
  return s;
}

VerifySource verify_from(const json& j, const std::string& path) {
  Reader r(j, path);
  VerifySource v;
  r.get("t_max", v.t_max);
  r.get("samples", v.samples);
  r.get("dt", v.dt);
  r.get("modes", v.modes);
  r.finish();
  require(v.t_max > 0.0, r.at("t_max"), "must be positive");
  require(v.samples >= 2, r.at("samples"), "need at least two times");
  require(v.dt > 0.0, r.at("dt"), "must be positive");
  return v;
}

}  // namespace

RunManifest manifest_from_json(const json& j) {
  Reader r(j, "");
  RunManifest m;
  r.get("scenario", m.scenario);
  r.get("seed", m.seed);
  r.get("output", m.output);
  if (r.has("model")) m.model = model_from(r.raw("model"), "model");
  if (r.has("settings")) m.settings = settings_from(r.raw("settings"), "settings");
  if (r.has("frequency")) m.frequency = frequency_from(r.raw("frequency"), "frequency");
  if (r.has("survey")) m.survey = survey_from(r.raw("survey"), "survey");
  if (r.has("verify")) m.verify = verify_from(r.raw("verify"), "verify");
  if (r.has("spectrum")) {
    Reader s(r.raw("spectrum"), "spectrum");
    s.get("Kmax", m.spectrum.Kmax);
    s.finish();
    require(m.spectrum.Kmax >= 0, "spectrum.Kmax", "must be non-negative");
  }
  if (r.has("report")) {
    Reader s(r.raw("report"), "report");
    s.get("fit_lo", m.report.fit_lo);
    s.get("fit_hi", m.report.fit_hi);
    s.get("delta_grid", m.report.delta_grid);
    s.finish();
  }
  r.finish();
  if (!m.frequency.omega.empty())
    require(static_cast<int>(m.frequency.omega.size()) == m.model.n, "frequency.omega", "length differs from model.n");
  m.settings.N = m.model.N;
  m.settings.d = m.model.d;
  m.settings.delta = m.model.delta;
  return m;
}

json to_json(const RunManifest& m) {
  json model = {{"kind", m.model.kind}, {"N", m.model.N}, {"n", m.model.n}, {"d", m.model.d}, {"delta", m.model.delta}};
  if (!m.model.lambda.empty()) model["lambda"] = m.model.lambda;
  if (m.model.kind == "oscillator") {
    const auto& o = m.model.oscillator;
    json q = json::array();
    for (const auto& t : o.Q) q.push_back({{"coef", t.coef}, {"power", t.power}});
    model["oscillator"] = {{"alpha", o.alpha},         {"Q", q},
                           {"N", o.N},                 {"resolution", o.resolution},
                           {"decay", o.decay},         {"extra_modes", o.extra_modes},
                           {"tolerance", o.tolerance}, {"allow_alpha_le_2", o.allow_alpha_le_2}};
  }
  const auto& p = m.model.perturbation;
  json pert = {{"kind", p.kind}, {"K", p.K}, {"decay", p.decay}, {"offdiag_decay", p.offdiag_decay}, {"beta", p.beta}};
  if (!p.terms.empty()) {
    json terms = json::array();
    for (const auto& t : p.terms)
      terms.push_back({{"v", {{"kind", t.v.kind}, {"power", t.v.power}}}, {"g", kam::to_json(t.g)}});
    pert["terms"] = terms;
  }
  if (p.series.rows() > 0) pert["series"] = kam::to_json(p.series);
  model["perturbation"] = pert;

  const auto& s = m.settings;
  json settings = {{"epsilon", s.epsilon},
                   {"s", s.s},
                   {"gamma", s.gamma},
                   {"tau", s.tau},
                   {"K", s.K},
                   {"theta", s.theta},
                   {"Cstar", s.Cstar},
                   {"Comega_star", s.Comega_star},
                   {"guard_C", s.guard_C},
                   {"C_lambda", s.C_lambda},
                   {"tol", s.tol},
                   {"l_max", s.l_max},
                   {"oversample", s.oversample},
                   {"K_work", s.K_work},
                   {"cert_K", s.cert_K},
                   {"cert_N", s.cert_N},
                   {"divisor_floor", s.divisor_floor},
                   {"lie_max_order", s.lie_max_order},
                   {"lie_tol", s.lie_tol},
                   {"strict_guards", s.strict_guards},
                   {"unitarity_grid", s.unitarity_grid}};
  json out = {{"scenario", m.scenario},
              {"seed", m.seed},
              {"model", model},
              {"settings", settings},
              {"frequency",
               {{"omega", m.frequency.omega},
                {"sample_count", m.frequency.sample_count},
                {"Kmax", m.frequency.Kmax},
                {"Nmax", m.frequency.Nmax}}},
              {"survey",
               {{"gamma_grid", m.survey.gamma_grid},
                {"samples", m.survey.samples},
                {"tau", m.survey.tau},
                {"Kmax", m.survey.Kmax},
                {"Nmax", m.survey.Nmax}}},
              {"verify",
               {{"t_max", m.verify.t_max}, {"samples", m.verify.samples}, {"dt", m.verify.dt}, {"modes", m.verify.modes}}},
              {"spectrum", {{"Kmax", m.spectrum.Kmax}}},
              {"report",
               {{"fit_lo", m.report.fit_lo}, {"fit_hi", m.report.fit_hi}, {"delta_grid", m.report.delta_grid}}}};
  if (!m.output.empty()) out["output"] = m.output;
  return out;
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("$", "cannot open manifest " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("not valid JSON: ") + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace kam
