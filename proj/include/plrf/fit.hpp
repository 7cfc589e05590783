#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "plrf/curve.hpp"

namespace plrf {

struct EnvelopePoint {
  double flops = 0.0;
  double best_loss = 0.0;
  int best_d = 0;
};

// Min over non-diverged curves of the interpolated loss, on n_slices geometric flops slices
// across the overlap of the curve supports.
std::vector<EnvelopePoint> envelope(const std::vector<LossCurve>& curves, int n_slices = 200);

struct FitResult {
  double exponent = 0.0;  // slope of log y against log x
  double prefactor = 0.0;
  double r_squared = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  int n_points = 0;
};

// OLS on (log x, log y) restricted to window (inclusive). Window defaults to all points.
FitResult fit_power_law(const std::vector<std::pair<double, double>>& points,
                        std::optional<std::pair<double, double>> window = std::nullopt);

struct WindowPolicy {
  std::optional<std::pair<double, double>> manual;  // flops window override
  int n_slices = 200;
  int median_width = 5;
};

struct Approach1Result {
  FitResult loss;    // exponent = -eta_hat
  FitResult params;  // exponent = xi_hat
  double eta_hat = 0.0;
  double xi_hat = 0.0;
  double data_exponent = 0.0;  // 1 - xi_hat
  std::vector<EnvelopePoint> envelope;
};

// Flops at which the curve for the larger d first drops to or below the one for the smaller d
// (both median-smoothed); nullopt when they never cross.
std::optional<double> crossover_flops(const LossCurve& small_d, const LossCurve& large_d, int median_width = 5);

Approach1Result approach1(const std::vector<LossCurve>& curves, const WindowPolicy& policy = {});

}  // namespace plrf
