#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plrf/schedules.hpp"

namespace plrf {

struct CurveMeta {
  std::string algorithm;
  double alpha = 0.0;
  double beta = 0.0;
  int d = 0;
  int v = 0;
  int batch = 1;
  std::string source = "stochastic";  // stochastic | ode | volterra
  std::string variant;                // ODE variant, empty for stochastic
  std::optional<DanaTags> tags;
};

// Loss against iteration count. flops = t * B * d.
struct LossCurve {
  std::vector<double> times;
  std::vector<double> losses;
  std::vector<double> stderrs;  // zero for deterministic sources
  std::vector<double> flops;
  bool diverged = false;
  double diverged_at = -1.0;  // iteration where divergence was detected
  CurveMeta meta;

  std::size_t size() const { return times.size(); }
  // Log-linear interpolation of the loss at iteration t (clamped to the recorded range).
  double loss_at(double t) const;
};

// Log-spaced integer grid on [0, T]: always contains 0 and T, at most per_decade points per decade
// and at most cap points overall.
std::vector<double> log_grid(double T, int per_decade = 200, int cap = 2000);

}  // namespace plrf
