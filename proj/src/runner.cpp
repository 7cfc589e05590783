#include "plrf/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "plrf/error.hpp"

namespace plrf {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a * 0x9E3779B97F4A7C15ULL + b + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void gen_mom_step(const Instance& inst, const Rates& r, const std::vector<Eigen::VectorXd>& xs,
                  Eigen::VectorXd& theta, Eigen::VectorXd& y) {
  const Eigen::VectorXd res = inst.W * theta - inst.b;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(inst.d);
  for (const auto& x : xs) g.noalias() += inst.W.transpose() * x * x.dot(res);
  y = (1.0 - r.Delta) * y + r.gamma1 * g;
  theta -= r.gamma2 * g + r.gamma3 * y;
}

namespace {

struct Basis {
  Eigen::VectorXd sigma;  // singular values of D^{1/2} W
  Eigen::VectorXd c;      // U^T D^{1/2} b
  double b_perp = 0.0;    // || D^{1/2} b - U c ||
};

Basis spectral_basis(const Instance& inst) {
  const Eigen::VectorXd sqrtD = inst.D.cwiseSqrt();
  const Eigen::MatrixXd A = sqrtD.asDiagonal() * inst.W;
  const Eigen::VectorXd bt = sqrtD.cwiseProduct(inst.b);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD of D^{1/2} W failed; try another seed");
  Basis B;
  B.sigma = svd.singularValues();
  B.c = svd.matrixU().transpose() * bt;
  B.b_perp = (bt - svd.matrixU() * B.c).norm();
  return B;
}

SeedTrace run_seed_impl(const Instance& inst, const Basis* basis, const ScheduleSet& s,
                        const std::vector<double>& grid, std::uint64_t seed, RunMode mode, double thresh) {
  boost::random::mt19937_64 gen(mix_seed(seed, 0x5eedULL));
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  const int d = inst.d, v = inst.v, B = s.batch;
  SeedTrace tr;
  std::size_t k = 0;

  auto record = [&](double P, long t) -> bool {
    if (!std::isfinite(P) || P > thresh) {
      tr.diverged = true;
      tr.diverged_at = static_cast<double>(t);
      return false;
    }
    tr.losses.push_back(P);
    return true;
  };

  const long T = grid.empty() ? 0 : static_cast<long>(grid.back());
  if (mode == RunMode::spectral) {
    const Eigen::VectorXd& sg = basis->sigma;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d), yw = Eigen::VectorXd::Zero(d), g(d), zeta(d);
    auto loss = [&] { return (sg.cwiseProduct(w) - basis->c).squaredNorm() + basis->b_perp * basis->b_perp; };
    for (long t = 0;; ++t) {
      while (k < grid.size() && static_cast<long>(grid[k]) == t) {
        if (!record(loss(), t)) return tr;
        ++k;
      }
      if (t >= T) break;
      const Rates r = s.at(static_cast<double>(t));
      g.setZero();
      const Eigen::VectorXd e = sg.cwiseProduct(w) - basis->c;
      for (int i = 0; i < B; ++i) {
        for (int j = 0; j < d; ++j) zeta[j] = normal(gen);
        const double sc = e.dot(zeta) - basis->b_perp * normal(gen);
        g.noalias() += sc * sg.cwiseProduct(zeta);
      }
      yw = (1.0 - r.Delta) * yw + r.gamma1 * g;
      w -= r.gamma2 * g + r.gamma3 * yw;
      if (!std::isfinite(w[0])) {
        tr.diverged = true;
        tr.diverged_at = static_cast<double>(t);
        return tr;
      }
    }
    return tr;
  }

  const Eigen::VectorXd sqrtD = inst.D.cwiseSqrt();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d), y = Eigen::VectorXd::Zero(d);
  std::vector<Eigen::VectorXd> xs(B, Eigen::VectorXd(v));
  for (long t = 0;; ++t) {
    while (k < grid.size() && static_cast<long>(grid[k]) == t) {
      if (!record(population_risk(inst, theta), t)) return tr;
      ++k;
    }
    if (t >= T) break;
    for (auto& x : xs)
      for (int j = 0; j < v; ++j) x[j] = sqrtD[j] * normal(gen);
    gen_mom_step(inst, s.at(static_cast<double>(t)), xs, theta, y);
    if (!std::isfinite(theta[0])) {
      tr.diverged = true;
      tr.diverged_at = static_cast<double>(t);
      return tr;
    }
  }
  return tr;
}

std::vector<double> checked_grid(const RunConfig& c) {
  if (c.max_iterations < 1) throw ConfigError("max_iterations must be positive");
  std::vector<double> g = c.eval_grid.empty() ? log_grid(static_cast<double>(c.max_iterations)) : c.eval_grid;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] < 0.0 || g[i] > c.max_iterations || g[i] != std::floor(g[i]))
      throw ConfigError("eval_grid entries must be integers in [0, max_iterations]");
    if (i > 0 && !(g[i] > g[i - 1])) throw ConfigError("eval_grid must be strictly increasing");
  }
  return g;
}

}  // namespace

SeedTrace run_seed(const Instance& inst, const ScheduleSet& schedule, const std::vector<double>& grid,
                   std::uint64_t seed, RunMode mode, double divergence_threshold) {
  Basis b;
  if (mode == RunMode::spectral) b = spectral_basis(inst);
  return run_seed_impl(inst, &b, schedule, grid, seed, mode, divergence_threshold);
}

LossCurve run(const Instance& inst, const ScheduleSet& schedule, const RunConfig& config) {
  if (config.seeds.empty()) throw ConfigError("at least one seed is required");
  if (schedule.d != inst.d)
    throw ConfigError("schedule built for d=" + std::to_string(schedule.d) + " but instance has d=" +
                      std::to_string(inst.d));
  const std::vector<double> grid = checked_grid(config);
  Basis basis;
  if (config.mode == RunMode::spectral) basis = spectral_basis(inst);

  const std::size_t ns = config.seeds.size();
  std::vector<SeedTrace> traces(ns);
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(ns)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ns; i = next++)
      traces[i] = run_seed_impl(inst, &basis, schedule, grid, config.seeds[i], config.mode,
                                config.divergence_threshold);
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  LossCurve c;
  c.meta.algorithm = schedule.name;
  c.meta.alpha = inst.alpha;
  c.meta.beta = inst.beta;
  c.meta.d = inst.d;
  c.meta.v = inst.v;
  c.meta.batch = schedule.batch;
  c.meta.source = "stochastic";
  c.meta.tags = schedule.tags;

  std::size_t len = grid.size();
  for (const auto& tr : traces) {
    len = std::min(len, tr.losses.size());
    if (tr.diverged) {
      c.diverged = true;
      c.diverged_at = c.diverged_at < 0.0 ? tr.diverged_at : std::min(c.diverged_at, tr.diverged_at);
    }
  }
  for (std::size_t i = 0; i < len; ++i) {
    double m = 0.0;
    for (const auto& tr : traces) m += tr.losses[i];
    m /= static_cast<double>(ns);
    double var = 0.0;
    for (const auto& tr : traces) var += (tr.losses[i] - m) * (tr.losses[i] - m);
    const double se = ns > 1 ? std::sqrt(var / static_cast<double>(ns - 1) / static_cast<double>(ns)) : 0.0;
    c.times.push_back(grid[i]);
    c.losses.push_back(m);
    c.stderrs.push_back(se);
    c.flops.push_back(config.record_flops ? grid[i] * schedule.batch * inst.d : 0.0);
  }
  return c;
}

std::vector<LossCurve> sweep_dimensions(double alpha, double beta, const std::vector<int>& d_list,
                                        double v_ratio, const ScheduleBuilder& builder,
                                        const RunConfig& config, std::uint64_t instance_seed) {
  if (!std::is_sorted(d_list.begin(), d_list.end())) throw ConfigError("d_list must be ascending");
  if (!(v_ratio > 1.0)) throw ConfigError("v_ratio must exceed 1");
  std::vector<LossCurve> out;
  for (int d : d_list) {
    const int v = static_cast<int>(std::lround(v_ratio * d));
    const Instance inst = generate_instance(alpha, beta, d, v, mix_seed(instance_seed, static_cast<std::uint64_t>(d)));
    const ScheduleSet s = builder(InstanceSummary{d, v, trace_D(alpha, v)});
    RunConfig cfg = config;
    for (auto& sd : cfg.seeds) sd = mix_seed(sd, static_cast<std::uint64_t>(d));
    out.push_back(run(inst, s, cfg));
  }
  return out;
}

}  // namespace plrf
