#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "plrf/curve.hpp"
#include "plrf/detequiv.hpp"
#include "plrf/ode.hpp"
#include "plrf/runner.hpp"
#include "plrf/schedules.hpp"

namespace plrf {

enum class ExecMode { stochastic, ode, detequiv_ode, volterra };
ExecMode parse_exec_mode(const std::string& name);
std::string exec_mode_name(ExecMode m);

struct SweepSpec {
  double alpha = 1.0;
  double beta = 0.7;
  std::vector<int> d_list{200};
  double v_ratio = 4.0;
  std::uint64_t instance_seed = 0;
  Preset preset = Preset::sgd;
  Overrides overrides;
  ExecMode mode = ExecMode::ode;
  double horizon = 1e6;
  std::optional<double> flops_budget;  // overrides horizon: T_d = budget / (B d)
  OdeVariant variant = OdeVariant::simplified;
  double step = 1e-2;
  GridOptions grid;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  RunMode runner = RunMode::spectral;
  int volterra_n = 512;
  int jobs = 1;
};

struct SweepOutcome {
  std::vector<LossCurve> curves;                   // ascending d, failed d omitted
  std::vector<std::pair<int, std::string>> failures;  // (d, message)
};

// Caches deterministic spectra by (alpha, beta, d, v, C, points); not thread-safe.
class SpectrumCache {
 public:
  const Spectrum& detequiv(double alpha, double beta, int d, int v, const GridOptions& opts);
  const Spectrum& empirical(double alpha, double beta, int d, int v, std::uint64_t seed);

 private:
  std::map<std::tuple<double, double, int, int, double, int>, Spectrum> det_;
  std::map<std::tuple<double, double, int, int, std::uint64_t>, Spectrum> emp_;
};

double sweep_horizon(const SweepSpec& s, int d, int batch);

// Runs one curve per d. Numerical failures for a single d are collected, not thrown;
// config errors propagate.
SweepOutcome run_sweep(const SweepSpec& spec, SpectrumCache* cache = nullptr);

}  // namespace plrf
