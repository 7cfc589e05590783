#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "plrf/curve.hpp"
#include "plrf/detequiv.hpp"
#include "plrf/fit.hpp"
#include "plrf/schedules.hpp"
#include "plrf/theory.hpp"

namespace plrf {

using json = nlohmann::ordered_json;

// SHA-1 of "blob <size>\0<data>", the git object id of the content.
std::string git_blob_sha1(const std::string& data);

struct ExperimentConfig {
  // model
  double alpha = 1.0;
  double beta = 0.7;
  std::vector<int> d_list{200};
  double v_ratio = 4.0;
  std::uint64_t instance_seed = 0;
  // algorithm
  std::string preset = "SGD";
  Overrides overrides;
  // execution
  std::string mode = "ode";  // stochastic | ode | detequiv-ode | volterra
  double horizon = 1e6;      // iterations
  std::optional<double> flops_budget;  // per-d horizon = flops / (B d) when set
  double step = 1e-2;
  std::string variant = "simplified";
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::string runner = "spectral";  // direct | spectral
  int jobs = 1;
  int volterra_n = 512;
  double eta_constant = 0.01;
  int grid_points = 2000;
  // fit
  bool fit_enabled = false;
  std::optional<std::pair<double, double>> fit_window;
  int n_slices = 200;
  // output
  std::string directory;
  std::vector<std::string> formats{"csv", "json"};

  json raw;  // the validated input, defaults filled in
};

// Validates against the schema; unknown keys and type errors raise ConfigError with a
// dotted path, e.g. "execution.mode: expected one of ...".
ExperimentConfig parse_config(const json& j);
json config_to_json(const ExperimentConfig& c);
std::string config_hash(const ExperimentConfig& c);

json schedule_to_json(const ScheduleSet& s);
ScheduleSet schedule_from_json(const json& j);

json to_json(const PhaseLabel& p);
json to_json(const ExponentPrediction& e);
json to_json(const FitResult& f);
json to_json(const Approach1Result& r);

void write_curves_csv(const std::string& path, const std::vector<LossCurve>& curves, const std::string& hash);
std::vector<LossCurve> read_curves_csv(const std::string& path);

void write_envelope_csv(const std::string& path, const std::vector<EnvelopePoint>& pts, const std::string& hash);
void write_measure_csv(const std::string& path, const SpectralMeasure& mu, const json& header,
                       const std::string& hash);
void write_json(const std::string& path, const json& j, const std::string& hash);
json read_json(const std::string& path);

}  // namespace plrf
