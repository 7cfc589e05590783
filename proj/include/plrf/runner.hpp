#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "plrf/core.hpp"
#include "plrf/curve.hpp"
#include "plrf/schedules.hpp"

namespace plrf {

enum class RunMode {
  direct,    // x = D^{1/2} z in R^v, O(v d) per sample
  spectral,  // same law in the right-singular basis of D^{1/2} W, O(d) per sample
};

struct RunConfig {
  long max_iterations = 1000;
  std::vector<double> eval_grid;  // empty -> log_grid(max_iterations)
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  bool record_flops = true;
  RunMode mode = RunMode::direct;
  double divergence_threshold = 1e12;
  int jobs = 1;
};

// One Gen-Mom-SGD step on explicit samples xs (each length v):
//   g = sum_i W^T x_i (x_i^T (W theta - b)),  y <- (1-Delta) y + gamma1 g,  theta <- theta - gamma2 g - gamma3 y.
void gen_mom_step(const Instance& inst, const Rates& r, const std::vector<Eigen::VectorXd>& xs,
                  Eigen::VectorXd& theta, Eigen::VectorXd& y);

struct SeedTrace {
  std::vector<double> losses;  // aligned with the eval grid, truncated on divergence
  bool diverged = false;
  double diverged_at = -1.0;
};

// Single data stream; exposed for tests.
SeedTrace run_seed(const Instance& inst, const ScheduleSet& schedule, const std::vector<double>& grid,
                   std::uint64_t seed, RunMode mode, double divergence_threshold);

LossCurve run(const Instance& inst, const ScheduleSet& schedule, const RunConfig& config);

using ScheduleBuilder = std::function<ScheduleSet(const InstanceSummary&)>;

// One curve per d, v = v_ratio * d, instance seed and data streams derived from (instance_seed, d).
std::vector<LossCurve> sweep_dimensions(double alpha, double beta, const std::vector<int>& d_list,
                                        double v_ratio, const ScheduleBuilder& builder,
                                        const RunConfig& config, std::uint64_t instance_seed = 0);

// 64-bit mixing used to derive independent streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace plrf
