#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kam/kam_engine.hpp"
#include "kam/schrodinger_model.hpp"

namespace kam {

struct PerturbationSource {
  std::string kind = "random";  // random | terms | series | zero
  int K = 6;
  double decay = 1.0;
  double offdiag_decay = 0.0;
  double beta = 0.0;
  std::vector<PerturbationTerm> terms;  // kind = terms (oscillator model)
  OperatorSeries series;                // kind = series
};

struct ModelSource {
  std::string kind = "power_law";  // power_law | oscillator
  int N = 20;
  int n = 2;
  double d = 4.0 / 3.0;
  double delta = 0.2;
  std::vector<double> lambda;  // power_law: empty means λ_i = i^d
  OscillatorSpec oscillator;
  PerturbationSource perturbation;
};

struct FrequencySource {
  std::vector<double> omega;  // empty: sample one admissible vector
  int sample_count = 1000;
  int Kmax = 0;  // 0: the settings' certification horizon
  int Nmax = 0;
};

struct SurveySource {
  std::vector<double> gamma_grid;
  int samples = 10000;
  double tau = 0.0;  // 0: settings value
  int Kmax = 12;
  int Nmax = 12;
};

struct VerifySource {
  double t_max = 50.0;
  int samples = 12;
  double dt = 1e-3;
  int modes = 10;  // quasi-energies compared for n = 1
};

struct SpectrumSource {
  int Kmax = 2;
};

struct ModelReportSource {
  int fit_lo = 20;
  int fit_hi = 200;
  std::vector<double> delta_grid;
};

struct RunManifest {
  std::string scenario = "unnamed";
  std::uint64_t seed = 0;
  std::string output;
  ModelSource model;
  KamSettings settings;
  FrequencySource frequency;
  SurveySource survey;
  VerifySource verify;
  SpectrumSource spectrum;
  ModelReportSource report;
};

/// Throws SchemaError naming the offending field path.
RunManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunManifest& m);
RunManifest load_manifest(const std::string& path);

}  // namespace kam
