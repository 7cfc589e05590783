// plrf-lab: command-line front end for the PLRF simulation toolkit.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "plrf/error.hpp"
#include "plrf/lab.hpp"

using namespace plrf;

namespace {

// Command-line values that override config keys when given.
struct ConfigFlags {
  std::string config, manifest, out;
  std::optional<double> alpha, beta, v_ratio, horizon, flops_budget, step, eta_constant;
  std::vector<int> d_list;
  std::optional<std::string> preset, mode, variant, runner;
  std::optional<int> seeds, jobs, volterra_n;
  std::vector<std::string> overrides;  // key=value
  bool fit = false;
  std::vector<double> window;
};

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--config,-c", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--manifest", f.manifest, "replay the config stored in a manifest.json")->check(CLI::ExistingFile);
  app->add_option("--out,-o", f.out, "output directory (default: $PLRF_LAB_OUT or ./plrf_out)");
  app->add_option("--alpha", f.alpha, "model.alpha");
  app->add_option("--beta", f.beta, "model.beta");
  app->add_option("--d-list", f.d_list, "model.d_list")->delimiter(',');
  app->add_option("--v-ratio", f.v_ratio, "model.v_ratio");
  app->add_option("--preset", f.preset, "algorithm.preset");
  app->add_option("--set", f.overrides, "algorithm.overrides entry key=value (repeatable)");
  app->add_option("--mode", f.mode, "execution.mode: stochastic|ode|detequiv-ode|volterra");
  app->add_option("--horizon", f.horizon, "execution.horizon (iterations)");
  app->add_option("--flops-budget", f.flops_budget, "execution.flops_budget (per-d horizon = flops/(B d))");
  app->add_option("--step", f.step, "execution.step (ODE step in log(1+t))");
  app->add_option("--variant", f.variant, "execution.variant: simplified|exact|coinflip");
  app->add_option("--seeds", f.seeds, "execution.seeds as a count");
  app->add_option("--runner", f.runner, "execution.runner: direct|spectral");
  app->add_option("--jobs,-j", f.jobs, "worker threads for stochastic seeds");
  app->add_option("--volterra-n", f.volterra_n, "execution.volterra_n");
  app->add_option("--eta-constant", f.eta_constant, "execution.eta_constant (det-equiv grid)");
  app->add_flag("--fit", f.fit, "fit.enabled = true");
  app->add_option("--window", f.window, "fit.window LO HI (flops)")->expected(2);
}

ExperimentConfig build_config(const ConfigFlags& f) {
  json j = json::object();
  if (!f.manifest.empty()) j = config_to_json(config_from_manifest(read_json(f.manifest)));
  else if (!f.config.empty()) j = read_json(f.config);
  auto sec = [&](const char* k) -> json& {
    if (!j.contains(k)) j[k] = json::object();
    return j[k];
  };
  if (f.alpha) sec("model")["alpha"] = *f.alpha;
  if (f.beta) sec("model")["beta"] = *f.beta;
  if (!f.d_list.empty()) sec("model")["d_list"] = f.d_list;
  if (f.v_ratio) sec("model")["v_ratio"] = *f.v_ratio;
  if (f.preset) sec("algorithm")["preset"] = *f.preset;
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    json& o = sec("algorithm");
    if (!o.contains("overrides")) o["overrides"] = json::object();
    try {
      o["overrides"][kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw ConfigError("--set " + kv + ": value is not a number");
    }
  }
  if (f.mode) sec("execution")["mode"] = *f.mode;
  if (f.horizon) sec("execution")["horizon"] = *f.horizon;
  if (f.flops_budget) sec("execution")["flops_budget"] = *f.flops_budget;
  if (f.step) sec("execution")["step"] = *f.step;
  if (f.variant) sec("execution")["variant"] = *f.variant;
  if (f.seeds) sec("execution")["seeds"] = *f.seeds;
  if (f.runner) sec("execution")["runner"] = *f.runner;
  if (f.jobs) sec("execution")["jobs"] = *f.jobs;
  if (f.volterra_n) sec("execution")["volterra_n"] = *f.volterra_n;
  if (f.eta_constant) sec("execution")["eta_constant"] = *f.eta_constant;
  if (f.fit) sec("fit")["enabled"] = true;
  if (!f.window.empty()) sec("fit")["window"] = f.window;
  return parse_config(j);
}

int report(const RunReport& r, const std::string& dir) {
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const auto& f : r.files) std::printf("wrote %s/%s\n", dir.c_str(), f.c_str());
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plrf-lab: scaling-law experiments on power-law random features"};
  app.require_subcommand(1);

  ConfigFlags run_f;
  auto* run = app.add_subcommand("run", "run the pipeline described by a config");
  add_config_flags(run, run_f);

  ConfigFlags sweep_f;
  int d0 = 200, doublings = 6;
  auto* sweep = app.add_subcommand("sweep", "run over d = d0 * 2^i, i < count (fit enabled)");
  add_config_flags(sweep, sweep_f);
  sweep->add_option("--d0", d0, "smallest d")->check(CLI::PositiveNumber);
  sweep->add_option("--count", doublings, "number of dimensions")->check(CLI::Range(1, 20));

  double p_alpha = 0.0, p_beta = 0.0;
  std::string p_algo = "SGD";
  int p_d = 1000;
  bool p_json = false;
  auto* predict = app.add_subcommand("predict", "phase, compute-optimal exponents and stability advice");
  predict->add_option("--alpha", p_alpha, "data exponent")->required();
  predict->add_option("--beta", p_beta, "target exponent")->required();
  predict->add_option("--algorithm,-a", p_algo, "preset name");
  predict->add_option("--d", p_d, "nominal d for the stability advice");
  predict->add_flag("--json", p_json, "print JSON only");

  std::string fit_csv, fit_out;
  std::vector<double> fit_window;
  int fit_slices = 200;
  auto* fit = app.add_subcommand("fit", "Approach 1 on a curves CSV");
  fit->add_option("curves", fit_csv, "curves CSV from run/sweep")->required()->check(CLI::ExistingFile);
  fit->add_option("--window", fit_window, "flops window LO HI")->expected(2);
  fit->add_option("--slices", fit_slices, "envelope slices");
  fit->add_option("--out,-o", fit_out, "output directory");

  std::vector<std::string> cmp_dirs;
  bool cmp_json = false;
  auto* compare = app.add_subcommand("compare", "table of fitted vs predicted exponents");
  compare->add_option("dirs", cmp_dirs, "run output directories")->required()->check(CLI::ExistingDirectory);
  compare->add_flag("--json", cmp_json, "print JSON rows");

  std::string fig_id, fig_out;
  FigureOptions fig_opt;
  auto* figure = app.add_subcommand("reproduce-figure", "reduced-scale figure setups");
  figure->add_option("figure", fig_id, "fig1-left | fig2-sweeps | fig3-phases | fig6-exponents")->required();
  figure->add_option("--d", fig_opt.d, "d for single-d figures");
  figure->add_option("--d-max", fig_opt.d_max, "largest d for sweep figures");
  figure->add_option("--horizon", fig_opt.horizon, "iterations (single-d) or flops budget (sweeps)");
  figure->add_option("--seeds", fig_opt.seeds, "stochastic seeds (fig1-left)");
  figure->add_option("--out,-o", fig_out, "output directory");

  double de_alpha = 0.0, de_beta = 0.0;
  int de_d = 500, de_v = 0;
  GridOptions de_grid;
  std::string de_out;
  auto* detequiv = app.add_subcommand("detequiv", "deterministic-equivalent measures and F0");
  detequiv->add_option("--alpha", de_alpha)->required();
  detequiv->add_option("--beta", de_beta)->required();
  detequiv->add_option("--d", de_d)->check(CLI::PositiveNumber);
  detequiv->add_option("--v", de_v, "hidden dimension (default 4d)");
  detequiv->add_option("--points", de_grid.points);
  detequiv->add_option("--eta-constant", de_grid.eta_constant);
  detequiv->add_option("--out,-o", de_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const ExperimentConfig c = build_config(run_f);
      const std::string dir = resolve_output_dir(run_f.out, &c);
      return report(cmd_run(c, dir), dir);
    }
    if (*sweep) {
      sweep_f.d_list.clear();
      for (int i = 0; i < doublings; ++i) sweep_f.d_list.push_back(d0 << i);
      sweep_f.fit = true;
      const ExperimentConfig c = build_config(sweep_f);
      const std::string dir = resolve_output_dir(sweep_f.out, &c);
      return report(cmd_run(c, dir), dir);
    }
    if (*predict) {
      const json j = cmd_predict(p_alpha, p_beta, p_algo, p_d);
      if (p_json) {
        std::cout << j.dump(2) << "\n";
        return kExitOk;
      }
      const json& ph = j["phase"];
      std::printf("%s at (alpha, beta) = (%g, %g): Phase %s\n", j["algorithm"].get<std::string>().c_str(), p_alpha,
                  p_beta, ph["phase"].get<std::string>().c_str());
      if (j.contains("prediction")) {
        const json& p = j["prediction"];
        std::printf("  loss exponent eta   = %.6f   (P* ~ f^-eta)\n", p["eta"].get<double>());
        std::printf("  param exponent xi   = %.6f   (d* ~ f^xi)\n", p["xi"].get<double>());
        std::printf("  data exponent zeta  = %.6f\n", p["zeta"].get<double>());
        std::printf("  tradeoff            : %s%s\n", p["tradeoff"].get<std::string>().c_str(),
                    p["conjectured"].get<bool>() ? "  (conjectured)" : "");
      }
      if (j.contains("note")) std::printf("  note: %s\n", j["note"].get<std::string>().c_str());
      if (j.contains("stability")) {
        const json& s = j["stability"];
        std::printf("  default preset at d=%d: %s (%s)\n", p_d, s["verdict"].get<std::string>().c_str(),
                    s["reason"].get<std::string>().c_str());
      }
      if (!ph["kernel_available"].get<bool>()) std::printf("  note: kernel asymptotics unavailable for alpha <= 1/4\n");
      return kExitOk;
    }
    if (*fit) {
      std::optional<std::pair<double, double>> w;
      if (fit_window.size() == 2) w = std::make_pair(fit_window[0], fit_window[1]);
      const std::string dir = resolve_output_dir(fit_out, nullptr);
      return report(cmd_fit(fit_csv, w, fit_slices, dir), dir);
    }
    if (*compare) {
      const json rows = compare_outputs(cmp_dirs);
      if (cmp_json) std::cout << rows.dump(2) << "\n";
      else std::cout << format_compare_table(rows);
      return kExitOk;
    }
    if (*figure) {
      const std::string dir = resolve_output_dir(fig_out, nullptr);
      return report(reproduce_figure(fig_id, fig_opt, dir), dir);
    }
    if (*detequiv) {
      const std::string dir = resolve_output_dir(de_out, nullptr);
      return report(cmd_detequiv(de_alpha, de_beta, de_d, de_v > 0 ? de_v : default_v(de_d), de_grid, dir), dir);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
