#include "plrf/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "plrf/error.hpp"

namespace plrf {

ExecMode parse_exec_mode(const std::string& name) {
  if (name == "stochastic") return ExecMode::stochastic;
  if (name == "ode") return ExecMode::ode;
  if (name == "detequiv-ode") return ExecMode::detequiv_ode;
  if (name == "volterra") return ExecMode::volterra;
  throw ConfigError("unknown execution mode '" + name + "' (stochastic, ode, detequiv-ode, volterra)");
}

std::string exec_mode_name(ExecMode m) {
  switch (m) {
    case ExecMode::stochastic: return "stochastic";
    case ExecMode::ode: return "ode";
    case ExecMode::detequiv_ode: return "detequiv-ode";
    case ExecMode::volterra: return "volterra";
  }
  return "?";
}

const Spectrum& SpectrumCache::detequiv(double alpha, double beta, int d, int v, const GridOptions& opts) {
  auto key = std::make_tuple(alpha, beta, d, v, opts.eta_constant, opts.points);
  auto it = det_.find(key);
  if (it == det_.end()) it = det_.emplace(key, det_equiv_pipeline(alpha, beta, d, v, opts).spectrum).first;
  return it->second;
}

const Spectrum& SpectrumCache::empirical(double alpha, double beta, int d, int v, std::uint64_t seed) {
  auto key = std::make_tuple(alpha, beta, d, v, seed);
  auto it = emp_.find(key);
  if (it == emp_.end())
    it = emp_.emplace(key, to_spectrum(spectral_data(generate_instance(alpha, beta, d, v, seed)))).first;
  return it->second;
}

double sweep_horizon(const SweepSpec& s, int d, int batch) {
  if (!s.flops_budget) return s.horizon;
  return std::floor(*s.flops_budget / (static_cast<double>(batch) * d));
}

SweepOutcome run_sweep(const SweepSpec& spec, SpectrumCache* cache) {
  if (spec.d_list.empty()) throw ConfigError("d_list is empty");
  if (!std::is_sorted(spec.d_list.begin(), spec.d_list.end())) throw ConfigError("d_list must be ascending");
  SpectrumCache local;
  SpectrumCache& sc = cache ? *cache : local;
  SweepOutcome out;
  for (int d : spec.d_list) {
    const int v = static_cast<int>(std::lround(spec.v_ratio * d));
    if (v <= d) throw ConfigError("v_ratio * d must exceed d");
    const ScheduleSet s =
        build_preset(spec.preset, spec.alpha, spec.beta, InstanceSummary{d, v, trace_D(spec.alpha, v)}, spec.overrides);
    const double T = sweep_horizon(spec, d, s.batch);
    if (!(T >= 1.0)) {
      out.failures.push_back({d, "horizon below one iteration"});
      continue;
    }
    const std::uint64_t iseed = mix_seed(spec.instance_seed, static_cast<std::uint64_t>(d));
    try {
      LossCurve c;
      if (spec.mode == ExecMode::stochastic) {
        RunConfig rc;
        rc.max_iterations = static_cast<long>(T);
        rc.mode = spec.runner;
        rc.jobs = spec.jobs;
        rc.seeds = spec.seeds;
        for (auto& sd : rc.seeds) sd = mix_seed(sd, static_cast<std::uint64_t>(d));
        c = run(generate_instance(spec.alpha, spec.beta, d, v, iseed), s, rc);
      } else {
        const Spectrum& sp = spec.mode == ExecMode::detequiv_ode ? sc.detequiv(spec.alpha, spec.beta, d, v, spec.grid)
                                                                 : sc.empirical(spec.alpha, spec.beta, d, v, iseed);
        if (spec.mode == ExecMode::volterra) {
          c = volterra_oracle(sp, s, T, spec.volterra_n).curve;
        } else {
          OdeOptions o;
          o.h = spec.step;
          c = integrate(sp, spec.variant, s, T, o);
        }
        if (spec.mode == ExecMode::detequiv_ode) c.meta.source = "detequiv-ode";
      }
      c.meta.alpha = spec.alpha;
      c.meta.beta = spec.beta;
      c.meta.d = d;
      c.meta.v = v;
      out.curves.push_back(std::move(c));
    } catch (const NumericalError& e) {
      out.failures.push_back({d, e.what()});
    }
  }
  return out;
}

}  // namespace plrf
