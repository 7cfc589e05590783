#include "plrf/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "plrf/error.hpp"
#include "plrf/fit.hpp"
#include "plrf/theory.hpp"

namespace plrf {

namespace fs = std::filesystem;

SweepSpec to_sweep_spec(const ExperimentConfig& c) {
  SweepSpec s;
  s.alpha = c.alpha;
  s.beta = c.beta;
  s.d_list = c.d_list;
  s.v_ratio = c.v_ratio;
  s.instance_seed = c.instance_seed;
  s.preset = parse_preset(c.preset);
  s.overrides = c.overrides;
  s.mode = parse_exec_mode(c.mode);
  s.horizon = c.horizon;
  s.flops_budget = c.flops_budget;
  s.variant = parse_variant(c.variant);
  s.step = c.step;
  s.grid.eta_constant = c.eta_constant;
  s.grid.points = c.grid_points;
  s.seeds = c.seeds;
  s.runner = c.runner == "direct" ? RunMode::direct : RunMode::spectral;
  s.volterra_n = c.volterra_n;
  s.jobs = c.jobs;
  return s;
}

std::string resolve_output_dir(const std::string& flag, const ExperimentConfig* c) {
  if (!flag.empty()) return flag;
  if (c && !c->directory.empty()) return c->directory;
  if (const char* env = std::getenv("PLRF_LAB_OUT"); env && *env) return env;
  return "plrf_out";
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool wants(const ExperimentConfig& c, const std::string& fmt) {
  return std::find(c.formats.begin(), c.formats.end(), fmt) != c.formats.end();
}

json stability_json(const StabilityReport& r) {
  json j = {{"verdict", verdict_name(r.verdict)}, {"reason", r.reason}, {"worst_ratio", r.worst_ratio},
            {"caveat", r.caveat ? "sharp stability constant unknown; verdict uses c = 1" : ""}};
  if (r.order_verdict) j["order_verdict"] = verdict_name(*r.order_verdict);
  return j;
}

// Table entry for presets with a proven or conjectured law.
std::optional<ExponentPrediction> prediction_for(Preset p, double a, double b, const ScheduleSet* s,
                                                 std::string* note) {
  switch (p) {
    case Preset::sgd: return compute_optimal_exponents(TheoryAlgo::sgd, a, b);
    case Preset::sgd_m: return compute_optimal_exponents(TheoryAlgo::sgd_m, a, b);
    case Preset::dana_constant:
    case Preset::dana_decaying: {
      const bool overridden = s && s->tags &&
                              (p == Preset::dana_decaying ? std::abs(s->tags->kappa3 - 1.0 / (2.0 * a)) > 1e-12
                                                          : s->tags->kappa3 != 0.0);
      if (overridden) {
        if (note) *note = "kappa overrides: conjectured exponents from the loss-term min-max";
        return conjectured_exponents(a, b, s->tags->kappa1, s->tags->kappa2, s->tags->kappa3);
      }
      return compute_optimal_exponents(p == Preset::dana_constant ? TheoryAlgo::dana_constant
                                                                  : TheoryAlgo::dana_decaying,
                                       a, b);
    }
    case Preset::schedule_free: {
      auto e = compute_optimal_exponents(TheoryAlgo::sgd, a, b);
      e.algorithm = "ScheduleFreeSGD";
      e.conjectured = true;
      if (note) *note = "conjectured to share SGD's scaling law";
      return e;
    }
    case Preset::acsgd: {
      auto e = compute_optimal_exponents(TheoryAlgo::dana_constant, a, b);
      e.algorithm = "AcSGD";
      e.conjectured = true;
      if (note) *note = "conjectured to share DANA-constant's scaling law";
      return e;
    }
    case Preset::nesterov:
      if (note) *note = "conjectured to diverge at large times; no exponent";
      return std::nullopt;
  }
  return std::nullopt;
}

json theory_json(const SweepSpec& spec, const std::vector<ScheduleSet>& schedules) {
  json j = {{"alpha", spec.alpha}, {"beta", spec.beta}, {"algorithm", preset_name(spec.preset)}};
  try {
    std::string note;
    auto pred = prediction_for(spec.preset, spec.alpha, spec.beta, schedules.empty() ? nullptr : &schedules[0], &note);
    if (pred) j["prediction"] = to_json(*pred);
    if (!note.empty()) j["note"] = note;
    const TheoryAlgo ta = spec.preset == Preset::dana_constant   ? TheoryAlgo::dana_constant
                          : spec.preset == Preset::dana_decaying ? TheoryAlgo::dana_decaying
                                                                 : TheoryAlgo::sgd;
    j["phase"] = to_json(classify_phase(spec.alpha, spec.beta, ta));
  } catch (const ConfigError& e) {
    j["theory_error"] = e.what();
  }
  json st = json::array();
  for (const auto& s : schedules) {
    json row = stability_json(stability_check(s, spec.alpha));
    row["d"] = s.d;
    row["schedule"] = schedule_to_json(s);
    st.push_back(row);
  }
  j["stability"] = st;
  return j;
}

struct Writer {
  std::string dir;
  std::string hash;
  RunReport* report;
  std::string path(const std::string& name) const { return (fs::path(dir) / name).string(); }
  void json_file(const std::string& name, const json& j) {
    write_json(path(name), j, hash);
    report->files.push_back(name);
  }
  void curves(const std::string& name, const std::vector<LossCurve>& cs) {
    write_curves_csv(path(name), cs, hash);
    report->files.push_back(name);
  }
  void envelope(const std::string& name, const std::vector<EnvelopePoint>& pts) {
    write_envelope_csv(path(name), pts, hash);
    report->files.push_back(name);
  }
  // free-form table with a hash header line
  void table(const std::string& name, const std::string& header, const std::vector<std::vector<std::string>>& rows) {
    std::ofstream f(path(name));
    if (!f) throw ConfigError("cannot open '" + path(name) + "' for writing");
    f << "# plrf-lab config_hash=" << hash << "\n" << header << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
      f << "\n";
    }
    report->files.push_back(name);
  }
};

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

}  // namespace

RunReport cmd_run(const ExperimentConfig& c, const std::string& out_dir) {
  const SweepSpec spec = to_sweep_spec(c);
  RunReport rep;
  ensure_dir(out_dir);
  Writer w{out_dir, config_hash(c), &rep};

  std::vector<ScheduleSet> schedules;
  for (int d : spec.d_list) {
    const int v = static_cast<int>(std::lround(spec.v_ratio * d));
    schedules.push_back(build_preset(spec.preset, spec.alpha, spec.beta, {d, v, trace_D(spec.alpha, v)}, spec.overrides));
  }
  const SweepOutcome out = run_sweep(spec);
  for (const auto& [d, msg] : out.failures) rep.warnings.push_back("d=" + std::to_string(d) + " failed: " + msg);

  std::size_t diverged = 0;
  for (const auto& cv : out.curves) {
    if (!cv.diverged) continue;
    ++diverged;
    rep.warnings.push_back("d=" + std::to_string(cv.meta.d) + " diverged at t=" + g17(cv.diverged_at));
  }
  if (!out.curves.empty() && wants(c, "csv")) w.curves("curves.csv", out.curves);
  if (wants(c, "json")) w.json_file("theory.json", theory_json(spec, schedules));

  if (c.fit_enabled && !out.curves.empty()) {
    if (diverged > 0) {
      rep.warnings.push_back("fit skipped: " + std::to_string(diverged) + " curve(s) diverged");
    } else {
      try {
        WindowPolicy pol;
        pol.manual = c.fit_window;
        pol.n_slices = c.n_slices;
        const Approach1Result r = approach1(out.curves, pol);
        json fj = {{"alpha", c.alpha}, {"beta", c.beta}, {"algorithm", preset_name(spec.preset)},
                   {"approach1", to_json(r)}};
        if (wants(c, "json")) w.json_file("fits.json", fj);
        if (wants(c, "csv")) w.envelope("envelope.csv", r.envelope);
      } catch (const ConfigError& e) {
        rep.warnings.push_back(std::string("fit skipped: ") + e.what());
      }
    }
  }

  json manifest = {{"tool", "plrf-lab"}, {"config", config_to_json(c)}, {"config_hash", w.hash},
                   {"instance_seed", c.instance_seed}, {"seeds", c.seeds}};
  json fails = json::array();
  for (const auto& [d, msg] : out.failures) fails.push_back({{"d", d}, {"error", msg}});
  manifest["failures"] = fails;
  manifest["warnings"] = rep.warnings;
  json files = json::object();
  for (const auto& f : rep.files) files[f] = git_blob_sha1(slurp(w.path(f)));
  manifest["files"] = files;
  w.json_file("manifest.json", manifest);

  if (out.curves.empty()) rep.exit_code = kExitNumerical;
  else if (diverged == out.curves.size()) rep.exit_code = kExitDivergence;
  return rep;
}

ExperimentConfig config_from_manifest(const json& manifest) {
  if (!manifest.is_object() || !manifest.contains("config")) throw ConfigError("manifest: missing 'config'");
  ExperimentConfig c = parse_config(manifest.at("config"));
  if (manifest.contains("config_hash") && manifest.at("config_hash") != config_hash(c))
    throw ConfigError("manifest: config_hash does not match the embedded config");
  return c;
}

json cmd_predict(double alpha, double beta, const std::string& algorithm, int d_nominal) {
  const Preset p = parse_preset(algorithm);
  const int v = default_v(d_nominal);
  const TheoryAlgo ta = p == Preset::dana_constant   ? TheoryAlgo::dana_constant
                        : p == Preset::dana_decaying ? TheoryAlgo::dana_decaying
                        : p == Preset::sgd_m         ? TheoryAlgo::sgd_m
                                                     : TheoryAlgo::sgd;
  const PhaseLabel ph = classify_phase(alpha, beta, ta);
  json j = {{"alpha", alpha}, {"beta", beta}, {"algorithm", preset_name(p)}, {"phase", to_json(ph)}};
  std::optional<ScheduleSet> s;
  try {
    s = build_preset(p, alpha, beta, {d_nominal, v, trace_D(alpha, v)});
  } catch (const ConfigError& e) {
    j["preset_error"] = e.what();
  }
  std::string note;
  auto pred = prediction_for(p, alpha, beta, s ? &*s : nullptr, &note);
  if (pred) j["prediction"] = to_json(*pred);
  if (!note.empty()) j["note"] = note;
  if (s) {
    json st = stability_json(stability_check(*s, alpha));
    st["d"] = d_nominal;
    st["v"] = v;
    j["stability"] = st;
  }
  return j;
}

json compare_outputs(const std::vector<std::string>& dirs) {
  json rows = json::array();
  for (const auto& dir : dirs) {
    const fs::path fits = fs::path(dir) / "fits.json", theory = fs::path(dir) / "theory.json";
    if (!fs::exists(fits)) throw ConfigError(dir + ": no fits.json (was fit.enabled set?)");
    if (!fs::exists(theory)) throw ConfigError(dir + ": no theory.json");
    const json f = read_json(fits.string()), t = read_json(theory.string());
    if (!t.contains("prediction")) throw ConfigError(dir + ": theory.json has no prediction");
    const json& a1 = f.at("approach1");
    const json& pr = t.at("prediction");
    const double eh = a1.at("eta_hat"), et = pr.at("eta"), xh = a1.at("xi_hat"), xt = pr.at("xi");
    rows.push_back({{"dir", dir},
                    {"alpha", f.at("alpha")},
                    {"beta", f.at("beta")},
                    {"algorithm", f.at("algorithm")},
                    {"phase", pr.at("phase")},
                    {"eta_hat", eh},
                    {"eta_theory", et},
                    {"eta_delta", eh - et},
                    {"xi_hat", xh},
                    {"xi_theory", xt},
                    {"xi_delta", xh - xt}});
  }
  return rows;
}

std::string format_compare_table(const json& rows) {
  std::ostringstream o;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-6s %-6s %-15s %-5s %8s %8s %8s %8s %8s %8s\n", "alpha", "beta", "algorithm",
                "phase", "eta_hat", "eta_th", "d_eta", "xi_hat", "xi_th", "d_xi");
  o << buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-6.3g %-6.3g %-15s %-5s %8.4f %8.4f %+8.4f %8.4f %8.4f %+8.4f\n",
                  r.at("alpha").get<double>(), r.at("beta").get<double>(),
                  r.at("algorithm").get<std::string>().c_str(), r.at("phase").get<std::string>().c_str(),
                  r.at("eta_hat").get<double>(), r.at("eta_theory").get<double>(), r.at("eta_delta").get<double>(),
                  r.at("xi_hat").get<double>(), r.at("xi_theory").get<double>(), r.at("xi_delta").get<double>());
    o << buf;
  }
  return o.str();
}

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1-left", "fig2-sweeps", "fig3-phases", "fig6-exponents"};
  return ids;
}

namespace {

Overrides figure_overrides(Preset p, double alpha, int d, double tr) {
  // gamma2 = 0.5/tr for every method; DANA-constant gamma3 = 0.1/(tr d); DANA-decaying 0.1 (1+t)^{-1/(2a)}
  Overrides o{{"gamma2", 0.5 / tr}};
  if (p == Preset::dana_constant) {
    const double k2 = std::max(0.0, 1.0 - 2.0 * alpha) + 1.0;
    o["gamma3_tilde"] = 0.1 / (tr * d) * std::pow(static_cast<double>(d), k2);
  }
  if (p == Preset::dana_decaying) o["gamma3_tilde"] = 0.1;
  return o;
}

RunReport figure1(const FigureOptions& opt, Writer& w) {
  const double a = 1.2, b = 0.7;
  const int d = opt.d > 0 ? opt.d : 500, v = 5 * d;
  const double T = opt.horizon > 0.0 ? opt.horizon : 1e6;
  const Instance inst = generate_instance(a, b, d, v, 1);
  const Spectrum spec = to_spectrum(spectral_data(inst));
  const std::vector<double> grid = log_grid(T);
  std::vector<LossCurve> curves;
  for (Preset p : {Preset::sgd, Preset::dana_constant}) {
    const double tr = trace_D(a, v);
    const ScheduleSet s = build_preset(p, a, b, {d, v, tr}, figure_overrides(p, a, d, tr));
    OdeOptions o;
    o.output_times = grid;
    LossCurve ode = integrate(spec, OdeVariant::simplified, s, T, o);
    ode.meta.alpha = a;
    ode.meta.beta = b;
    ode.meta.v = v;
    RunConfig rc;
    rc.max_iterations = static_cast<long>(T);
    rc.eval_grid = grid;
    rc.mode = RunMode::spectral;
    rc.seeds.clear();
    for (int i = 0; i < std::max(1, opt.seeds); ++i) rc.seeds.push_back(static_cast<std::uint64_t>(i));
    curves.push_back(run(inst, s, rc));
    curves.push_back(std::move(ode));
  }
  w.curves("curves.csv", curves);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<std::string> r{g17(grid[i]), g17(grid[i] * d)};
    for (int k : {1, 3, 0, 2}) r.push_back(i < curves[k].size() ? g17(curves[k].losses[i]) : "");
    r.push_back(std::to_string(d));
    rows.push_back(r);
  }
  w.table("fig1_left.csv", "t,flops,sgd_ode,dana_constant_ode,sgd_run,dana_constant_run,transition_t", rows);
  return *w.report;
}

RunReport figure2(const FigureOptions& opt, Writer& w) {
  const double a = 1.0, b = 0.7;
  const int d = opt.d > 0 ? opt.d : 800, v = 5 * d;
  const double T = opt.horizon > 0.0 ? opt.horizon : 1e9;
  const Spectrum spec = to_spectrum(spectral_data(generate_instance(a, b, d, v, 1)));
  const double tr = trace_D(a, v);
  std::vector<LossCurve> curves;
  json summary = json::array();
  for (int i = 0; i <= 8; ++i) {
    const double k3 = 0.2 + 0.1 * i;
    Overrides o = figure_overrides(Preset::dana_decaying, a, d, tr);
    o["kappa3"] = k3;
    ScheduleSet s = build_preset(Preset::dana_decaying, a, b, {d, v, tr}, o);
    char name[64];
    std::snprintf(name, sizeof name, "DANA-decaying(kappa3=%.2f)", k3);
    s.name = name;
    LossCurve c = integrate(spec, OdeVariant::simplified, s, T);
    c.meta.alpha = a;
    c.meta.beta = b;
    c.meta.v = v;
    const double peak = *std::max_element(c.losses.begin() + 1, c.losses.end());
    summary.push_back({{"kappa3", k3},
                       {"diverged", c.diverged},
                       {"diverged_at", c.diverged_at},
                       {"final_loss", c.losses.back()},
                       {"peak_after_start", peak},
                       {"stability", stability_json(stability_check(s, a))}});
    curves.push_back(std::move(c));
  }
  w.curves("curves.csv", curves);
  w.json_file("fig2_sweeps.json", {{"alpha", a}, {"beta", b}, {"d", d}, {"v", v}, {"kappa3_critical", 1.0 / (2.0 * a)},
                                   {"runs", summary}});
  return *w.report;
}

struct PhasePoint {
  double a, b;
};

// Deterministic-equivalent ODE sweeps, Approach 1 per algorithm, theory overlay.
RunReport sweep_figure(const std::vector<PhasePoint>& points, int d_max, double flops, const std::string& stem,
                       Writer& w) {
  SpectrumCache cache;
  std::vector<int> ds;
  for (int d = 200; d <= d_max; d *= 2) ds.push_back(d);
  if (ds.size() < 4) throw ConfigError("d_max must allow at least 4 doublings from 200");
  std::vector<LossCurve> all;
  std::vector<std::vector<std::string>> overlay, table;
  for (const PhasePoint& pt : points) {
    std::vector<Preset> algos{Preset::sgd, Preset::dana_constant};
    if (2.0 * pt.a > 1.0) algos.push_back(Preset::dana_decaying);
    for (Preset p : algos) {
      SweepSpec sp;
      sp.alpha = pt.a;
      sp.beta = pt.b;
      sp.d_list = ds;
      sp.preset = p;
      sp.mode = ExecMode::detequiv_ode;
      sp.flops_budget = flops;
      SweepOutcome out = run_sweep(sp, &cache);
      for (const auto& [d, msg] : out.failures)
        w.report->warnings.push_back(preset_name(p) + " d=" + std::to_string(d) + ": " + msg);
      const ExponentPrediction th = *prediction_for(p, pt.a, pt.b, nullptr, nullptr);
      std::vector<std::string> row{g17(pt.a), g17(pt.b), preset_name(p), th.phase};
      try {
        const Approach1Result r = approach1(out.curves, {});
        const double fmid = std::sqrt(r.loss.window_lo * r.loss.window_hi);
        double pmid = r.envelope.front().best_loss;
        for (const auto& e : r.envelope)
          if (e.flops <= fmid) pmid = e.best_loss;
        for (const auto& e : r.envelope)
          overlay.push_back({g17(pt.a), g17(pt.b), preset_name(p), g17(e.flops), g17(e.best_loss),
                             std::to_string(e.best_d), g17(pmid * std::pow(e.flops / fmid, -th.eta)),
                             (e.flops >= r.loss.window_lo && e.flops <= r.loss.window_hi) ? "1" : "0"});
        row.insert(row.end(), {g17(r.eta_hat), g17(th.eta), g17(r.xi_hat), g17(th.xi), g17(r.loss.r_squared), ""});
      } catch (const ConfigError& e) {
        row.insert(row.end(), {"", g17(th.eta), "", g17(th.xi), "", e.what()});
      }
      table.push_back(row);
      for (auto& c : out.curves) all.push_back(std::move(c));
    }
  }
  w.curves("curves.csv", all);
  w.table(stem + "_overlay.csv", "alpha,beta,algorithm,flops,envelope_loss,best_d,predicted_loss,in_fit_window",
          overlay);
  w.table(stem + "_exponents.csv", "alpha,beta,algorithm,phase,eta_hat,eta_theory,xi_hat,xi_theory,r2,error", table);
  return *w.report;
}

}  // namespace

RunReport reproduce_figure(const std::string& id, const FigureOptions& opt, const std::string& out_dir) {
  const auto& ids = figure_ids();
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
    std::string all;
    for (const auto& s : ids) all += (all.empty() ? "" : ", ") + s;
    throw ConfigError("unknown figure id '" + id + "' (known: " + all + ")");
  }
  ensure_dir(out_dir);
  RunReport rep;
  const json key = {{"figure", id}, {"d", opt.d}, {"d_max", opt.d_max}, {"horizon", opt.horizon}, {"seeds", opt.seeds}};
  Writer w{out_dir, git_blob_sha1(key.dump()), &rep};
  if (id == "fig1-left") figure1(opt, w);
  if (id == "fig2-sweeps") figure2(opt, w);
  if (id == "fig3-phases")
    sweep_figure({{1.0, 0.4}, {1.0, 0.7}, {0.8, 1.2}}, opt.d_max > 0 ? opt.d_max : 3200,
                 opt.horizon > 0.0 ? opt.horizon : 1e11, "fig3", w);
  if (id == "fig6-exponents")
    sweep_figure({{1.0, 0.4}, {0.8, 0.3}, {1.0, 0.7}, {1.5, 0.8}, {0.8, 1.2}, {0.4, 1.0}},
                 opt.d_max > 0 ? opt.d_max : 1600, opt.horizon > 0.0 ? opt.horizon : 1e11, "fig6", w);
  w.json_file("manifest.json", {{"tool", "plrf-lab"}, {"figure", key}, {"config_hash", w.hash},
                                {"warnings", rep.warnings}});
  return rep;
}

RunReport cmd_detequiv(double alpha, double beta, int d, int v, const GridOptions& grid, const std::string& out_dir) {
  ensure_dir(out_dir);
  RunReport rep;
  const json key = {{"alpha", alpha}, {"beta", beta}, {"d", d}, {"v", v}, {"points", grid.points},
                    {"lower_factor", grid.lower_factor}, {"upper", grid_upper(d, grid)}, {"eta_constant", grid.eta_constant}};
  Writer w{out_dir, git_blob_sha1(key.dump()), &rep};
  const DetEquiv de = det_equiv_pipeline(alpha, beta, d, v, grid);
  const auto& R = de.resolvent;
  double max_res = 0.0, max_im = -1e300;
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < R.size(); ++i) {
    max_res = std::max(max_res, R.residuals[i]);
    max_im = std::max(max_im, R.m[i].imag());
    rows.push_back({g17(R.z[i].real()), g17(R.z[i].imag()), g17(R.m[i].real()), g17(R.m[i].imag()),
                    g17(R.residuals[i]), std::to_string(R.iterations[i])});
  }
  w.table("resolvent.csv", "x,eta,re_m,im_m,residual,iterations", rows);
  write_measure_csv(w.path("muF.csv"), de.muF, {{"measure", "F"}, {"atom_at_zero", de.muF.atom_at_zero}}, w.hash);
  write_measure_csv(w.path("muK.csv"), de.muK, {{"measure", "K"}, {"atom_at_zero", de.muK.atom_at_zero}}, w.hash);
  rep.files.push_back("muF.csv");
  rep.files.push_back("muK.csv");
  const double target = initial_risk(alpha, beta, v);
  json s = key;
  s["max_residual"] = max_res;
  s["max_im_m"] = max_im;
  s["dropped_points"] = R.dropped_x.size();
  s["muF_total_mass"] = de.muF.total_mass();
  s["muF_target_mass"] = target;
  s["muF_mass_rel_err"] = de.muF.total_mass() / target - 1.0;
  s["muK_bulk_mass"] = de.muK.bulk_mass();
  s["mode_count"] = de.spectrum.counts.sum();
  s["F0"] = compute_F0(alpha, beta, d, v);
  w.json_file("detequiv.json", s);
  if (!R.dropped_x.empty())
    rep.warnings.push_back(std::to_string(R.dropped_x.size()) + " grid point(s) did not converge and were dropped");
  return rep;
}

RunReport cmd_fit(const std::string& curves_csv, std::optional<std::pair<double, double>> window, int n_slices,
                  const std::string& out_dir) {
  const std::vector<LossCurve> curves = read_curves_csv(curves_csv);
  ensure_dir(out_dir);
  RunReport rep;
  Writer w{out_dir, git_blob_sha1(slurp(curves_csv)), &rep};
  std::map<std::string, std::vector<LossCurve>> by_algo;
  for (const auto& c : curves) by_algo[c.meta.algorithm + "|" + c.meta.source].push_back(c);
  json out = json::array();
  for (auto& [key, cs] : by_algo) {
    WindowPolicy pol;
    pol.manual = window;
    pol.n_slices = n_slices;
    json row = {{"algorithm", cs[0].meta.algorithm}, {"source", cs[0].meta.source}, {"alpha", cs[0].meta.alpha},
                {"beta", cs[0].meta.beta}};
    try {
      const Approach1Result r = approach1(cs, pol);
      row["approach1"] = to_json(r);
      std::string name = "envelope_" + cs[0].meta.algorithm + ".csv";
      std::replace(name.begin(), name.end(), '(', '_');
      std::replace(name.begin(), name.end(), ')', '_');
      w.envelope(name, r.envelope);
    } catch (const ConfigError& e) {
      row["error"] = e.what();
      rep.warnings.push_back(cs[0].meta.algorithm + ": " + e.what());
    }
    out.push_back(row);
  }
  w.json_file("fit.json", {{"input", curves_csv}, {"fits", out}});
  return rep;
}

}  // namespace plrf
