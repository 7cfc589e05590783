#pragma once

#include <string>
#include <vector>

#include "plrf/experiments.hpp"
#include "plrf/io.hpp"

namespace plrf {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitDivergence = 4 };

SweepSpec to_sweep_spec(const ExperimentConfig& c);

struct RunReport {
  int exit_code = kExitOk;
  std::vector<std::string> files;     // written, relative to the output directory
  std::vector<std::string> warnings;
};

// Default output directory: explicit flag, then config, then $PLRF_LAB_OUT, then ./plrf_out.
std::string resolve_output_dir(const std::string& flag, const ExperimentConfig* c);

// Executes the configured pipeline and writes curves.csv, theory.json, fits.json (when enabled and
// possible) and manifest.json into out_dir.
RunReport cmd_run(const ExperimentConfig& c, const std::string& out_dir);

// Reads the config back out of a manifest.json written by cmd_run.
ExperimentConfig config_from_manifest(const json& manifest);

// Phase, exponents, tradeoff and stability advice for the default preset at a nominal d.
json cmd_predict(double alpha, double beta, const std::string& algorithm, int d_nominal = 1000);

// Rows of (alpha, beta, algorithm, eta_hat, eta_theory, delta, xi_hat, xi_theory, delta) from run
// output directories containing fits.json and theory.json.
json compare_outputs(const std::vector<std::string>& dirs);
std::string format_compare_table(const json& rows);

struct FigureOptions {
  int d = 0;                 // main d for single-d figures; 0 keeps the built-in default
  int d_max = 0;             // largest d for sweeps
  double horizon = 0.0;      // 0 keeps the built-in default
  int seeds = 0;
};
const std::vector<std::string>& figure_ids();
RunReport reproduce_figure(const std::string& id, const FigureOptions& opts, const std::string& out_dir);

// Fixed point, measures, F0 and a summary for one (alpha, beta, d, v).
RunReport cmd_detequiv(double alpha, double beta, int d, int v, const GridOptions& grid, const std::string& out_dir);

// Approach 1 on an existing curves CSV.
RunReport cmd_fit(const std::string& curves_csv, std::optional<std::pair<double, double>> window, int n_slices,
                  const std::string& out_dir);

}  // namespace plrf
