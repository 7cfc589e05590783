#include "plrf/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <openssl/sha.h>

#include "plrf/error.hpp"

namespace plrf {

std::string git_blob_sha1(const std::string& data) {
  const std::string blob = "blob " + std::to_string(data.size()) + std::string(1, '\0') + data;
  unsigned char out[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), out);
  std::ostringstream hex;
  for (unsigned char c : out) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return hex.str();
}

namespace {

std::string join(const std::set<std::string>& s) {
  std::string out;
  for (const auto& k : s) out += (out.empty() ? "" : ", ") + k;
  return out;
}

void check_object(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(path + "." + k + ": unknown key (allowed: " + join(allowed) + ")");
}

double num(const json& j, const std::string& key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path + "." + key + ": must be finite");
  return x;
}

int integer(const json& j, const std::string& key, const std::string& path, int fallback, int min_value) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  const long long x = v.get<long long>();
  if (x < min_value) throw ConfigError(path + "." + key + ": must be >= " + std::to_string(min_value));
  return static_cast<int>(x);
}

std::string choice(const json& j, const std::string& key, const std::string& path, const std::string& fallback,
                   const std::set<std::string>& options) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
  const std::string s = v.get<std::string>();
  if (!options.empty() && !options.count(s))
    throw ConfigError(path + "." + key + ": expected one of " + join(options) + ", got '" + s + "'");
  return s;
}

json section(const json& j, const std::string& key) { return j.contains(key) ? j.at(key) : json::object(); }

}  // namespace

ExperimentConfig parse_config(const json& j) {
  check_object(j, "config", {"model", "algorithm", "execution", "fit", "output"});
  ExperimentConfig c;

  const json m = section(j, "model");
  check_object(m, "model", {"alpha", "beta", "d_list", "v_ratio", "instance_seed"});
  c.alpha = num(m, "alpha", "model", c.alpha);
  c.beta = num(m, "beta", "model", c.beta);
  if (!(c.alpha > 0.0)) throw ConfigError("model.alpha: must be positive");
  if (!(2.0 * c.alpha + 2.0 * c.beta > 1.0)) throw ConfigError("model.beta: 2*alpha + 2*beta must exceed 1");
  if (m.contains("d_list")) {
    const json& dl = m.at("d_list");
    if (!dl.is_array() || dl.empty()) throw ConfigError("model.d_list: expected a nonempty array");
    c.d_list.clear();
    for (std::size_t i = 0; i < dl.size(); ++i) {
      if (!dl[i].is_number_integer() || dl[i].get<long long>() < 1)
        throw ConfigError("model.d_list[" + std::to_string(i) + "]: expected a positive integer");
      c.d_list.push_back(dl[i].get<int>());
      if (i > 0 && c.d_list[i] <= c.d_list[i - 1]) throw ConfigError("model.d_list: must be strictly ascending");
    }
  }
  c.v_ratio = num(m, "v_ratio", "model", c.v_ratio);
  if (!(c.v_ratio > 1.0)) throw ConfigError("model.v_ratio: must exceed 1");
  if (m.contains("instance_seed")) {
    if (!m.at("instance_seed").is_number_unsigned()) throw ConfigError("model.instance_seed: expected a nonnegative integer");
    c.instance_seed = m.at("instance_seed").get<std::uint64_t>();
  }

  const json a = section(j, "algorithm");
  check_object(a, "algorithm", {"preset", "overrides"});
  c.preset = choice(a, "preset", "algorithm", c.preset, {});
  try {
    c.preset = preset_name(parse_preset(c.preset));
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("algorithm.preset: ") + e.what());
  }
  if (a.contains("overrides")) {
    const json& o = a.at("overrides");
    if (!o.is_object()) throw ConfigError("algorithm.overrides: expected an object");
    for (const auto& [k, v] : o.items()) {
      if (!v.is_number()) throw ConfigError("algorithm.overrides." + k + ": expected a number");
      c.overrides[k] = v.get<double>();
    }
  }

  const json e = section(j, "execution");
  check_object(e, "execution",
               {"mode", "horizon", "flops_budget", "step", "variant", "seeds", "runner", "jobs", "volterra_n",
                "eta_constant", "grid_points"});
  c.mode = choice(e, "mode", "execution", c.mode, {"stochastic", "ode", "detequiv-ode", "volterra"});
  c.horizon = num(e, "horizon", "execution", c.horizon);
  if (!(c.horizon >= 1.0)) throw ConfigError("execution.horizon: must be >= 1");
  if (e.contains("flops_budget")) {
    c.flops_budget = num(e, "flops_budget", "execution", 0.0);
    if (!(*c.flops_budget > 0.0)) throw ConfigError("execution.flops_budget: must be positive");
  }
  c.step = num(e, "step", "execution", c.step);
  if (!(c.step > 0.0)) throw ConfigError("execution.step: must be positive");
  c.variant = choice(e, "variant", "execution", c.variant, {"simplified", "exact", "coinflip"});
  if (e.contains("seeds")) {
    const json& s = e.at("seeds");
    c.seeds.clear();
    if (s.is_number_integer()) {
      if (s.get<long long>() < 1) throw ConfigError("execution.seeds: count must be positive");
      for (long long i = 0; i < s.get<long long>(); ++i) c.seeds.push_back(static_cast<std::uint64_t>(i));
    } else if (s.is_array() && !s.empty()) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s[i].is_number_unsigned())
          throw ConfigError("execution.seeds[" + std::to_string(i) + "]: expected a nonnegative integer");
        c.seeds.push_back(s[i].get<std::uint64_t>());
      }
    } else {
      throw ConfigError("execution.seeds: expected a positive count or a nonempty array");
    }
  }
  c.runner = choice(e, "runner", "execution", c.runner, {"direct", "spectral"});
  c.jobs = integer(e, "jobs", "execution", c.jobs, 1);
  c.volterra_n = integer(e, "volterra_n", "execution", c.volterra_n, 4);
  if (c.volterra_n > 4096 || c.volterra_n % 2) throw ConfigError("execution.volterra_n: must be even and <= 4096");
  c.eta_constant = num(e, "eta_constant", "execution", c.eta_constant);
  if (!(c.eta_constant > 0.0)) throw ConfigError("execution.eta_constant: must be positive");
  c.grid_points = integer(e, "grid_points", "execution", c.grid_points, 2);

  const json f = section(j, "fit");
  check_object(f, "fit", {"enabled", "window", "n_slices"});
  if (f.contains("enabled")) {
    if (!f.at("enabled").is_boolean()) throw ConfigError("fit.enabled: expected a boolean");
    c.fit_enabled = f.at("enabled").get<bool>();
  }
  if (f.contains("window")) {
    const json& w = f.at("window");
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number() ||
        !(w[0].get<double>() > 0.0) || !(w[1].get<double>() > w[0].get<double>()))
      throw ConfigError("fit.window: expected [lo, hi] with 0 < lo < hi");
    c.fit_window = std::make_pair(w[0].get<double>(), w[1].get<double>());
  }
  c.n_slices = integer(f, "n_slices", "fit", c.n_slices, 2);

  const json o = section(j, "output");
  check_object(o, "output", {"directory", "formats"});
  c.directory = choice(o, "directory", "output", c.directory, {});
  if (o.contains("formats")) {
    const json& fm = o.at("formats");
    if (!fm.is_array()) throw ConfigError("output.formats: expected an array");
    c.formats.clear();
    for (std::size_t i = 0; i < fm.size(); ++i) {
      if (!fm[i].is_string() || (fm[i] != "csv" && fm[i] != "json"))
        throw ConfigError("output.formats[" + std::to_string(i) + "]: expected \"csv\" or \"json\"");
      c.formats.push_back(fm[i].get<std::string>());
    }
  }
  c.raw = config_to_json(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = {{"alpha", c.alpha}, {"beta", c.beta}, {"d_list", c.d_list}, {"v_ratio", c.v_ratio},
                {"instance_seed", c.instance_seed}};
  json ov = json::object();
  for (const auto& [k, v] : c.overrides) ov[k] = v;
  j["algorithm"] = {{"preset", c.preset}, {"overrides", ov}};
  json e = {{"mode", c.mode},       {"horizon", c.horizon}, {"step", c.step},
            {"variant", c.variant}, {"seeds", c.seeds},     {"runner", c.runner},
            {"jobs", c.jobs},       {"volterra_n", c.volterra_n}, {"eta_constant", c.eta_constant},
            {"grid_points", c.grid_points}};
  if (c.flops_budget) e["flops_budget"] = *c.flops_budget;
  j["execution"] = e;
  json f = {{"enabled", c.fit_enabled}, {"n_slices", c.n_slices}};
  if (c.fit_window) f["window"] = {c.fit_window->first, c.fit_window->second};
  j["fit"] = f;
  j["output"] = {{"directory", c.directory}, {"formats", c.formats}};
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  // output location does not change results
  json j = config_to_json(c);
  j["output"].erase("directory");
  j["execution"].erase("jobs");
  return git_blob_sha1(j.dump());
}

json schedule_to_json(const ScheduleSet& s) {
  json j = {{"name", s.name},        {"family", family_name(s.family)},
            {"batch", s.batch},      {"d", s.d},
            {"gamma2", s.gamma2},    {"gamma3", s.gamma3},
            {"delta", s.delta},      {"gamma_tilde", s.gamma_tilde},
            {"alpha_tilde", s.alpha_tilde}, {"beta_tilde", s.beta_tilde}};
  if (s.tags) {
    const DanaTags& k = *s.tags;
    j["tags"] = {{"kappa1", k.kappa1}, {"kappa2", k.kappa2}, {"kappa3", k.kappa3},         {"kappa_b", k.kappa_b},
                 {"delta", k.delta},   {"gamma2_tilde", k.gamma2_tilde}, {"gamma3_tilde", k.gamma3_tilde}};
  }
  return j;
}

ScheduleSet schedule_from_json(const json& j) {
  check_object(j, "schedule",
               {"name", "family", "batch", "d", "gamma2", "gamma3", "delta", "gamma_tilde", "alpha_tilde",
                "beta_tilde", "tags"});
  ScheduleSet s;
  s.name = choice(j, "name", "schedule", "", {});
  s.family = parse_family(choice(j, "family", "schedule", "sgd", {}));
  s.batch = integer(j, "batch", "schedule", 1, 1);
  s.d = integer(j, "d", "schedule", 1, 1);
  s.gamma2 = num(j, "gamma2", "schedule", 0.0);
  s.gamma3 = num(j, "gamma3", "schedule", 0.0);
  s.delta = num(j, "delta", "schedule", 1.0);
  s.gamma_tilde = num(j, "gamma_tilde", "schedule", 0.0);
  s.alpha_tilde = num(j, "alpha_tilde", "schedule", 0.0);
  s.beta_tilde = num(j, "beta_tilde", "schedule", 0.0);
  if (j.contains("tags")) {
    const json& t = j.at("tags");
    check_object(t, "schedule.tags", {"kappa1", "kappa2", "kappa3", "kappa_b", "delta", "gamma2_tilde", "gamma3_tilde"});
    DanaTags k;
    k.kappa1 = num(t, "kappa1", "schedule.tags", 0.0);
    k.kappa2 = num(t, "kappa2", "schedule.tags", 0.0);
    k.kappa3 = num(t, "kappa3", "schedule.tags", 0.0);
    k.kappa_b = num(t, "kappa_b", "schedule.tags", 0.0);
    k.delta = num(t, "delta", "schedule.tags", 0.0);
    k.gamma2_tilde = num(t, "gamma2_tilde", "schedule.tags", 0.0);
    k.gamma3_tilde = num(t, "gamma3_tilde", "schedule.tags", 0.0);
    s.tags = k;
  }
  if (s.family == Family::dana && !s.tags) throw ConfigError("schedule.tags: required for the dana family");
  return s;
}

json to_json(const PhaseLabel& p) {
  return {{"phase", p.phase},
          {"algorithm", p.algorithm},
          {"boundary_distance", p.boundary_distance},
          {"kernel_available", p.kernel_available}};
}

json to_json(const ExponentPrediction& e) {
  return {{"algorithm", e.algorithm}, {"phase", e.phase}, {"eta", e.eta},           {"xi", e.xi},
          {"zeta", e.zeta},           {"tradeoff", e.tradeoff}, {"conjectured", e.conjectured}};
}

json to_json(const FitResult& f) {
  return {{"exponent", f.exponent},
          {"prefactor", f.prefactor},
          {"r_squared", f.r_squared},
          {"window", {f.window_lo, f.window_hi}},
          {"n_points", f.n_points}};
}

json to_json(const Approach1Result& r) {
  return {{"eta_hat", r.eta_hat},
          {"xi_hat", r.xi_hat},
          {"zeta_hat", r.data_exponent},
          {"window", {r.loss.window_lo, r.loss.window_hi}},
          {"r2", r.loss.r_squared},
          {"r2_params", r.params.r_squared},
          {"loss_fit", to_json(r.loss)},
          {"param_fit", to_json(r.params)}};
}

namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "' for writing");
  return f;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_curves_csv(const std::string& path, const std::vector<LossCurve>& curves, const std::string& hash) {
  bool extra = false;
  for (const auto& c : curves) extra = extra || c.meta.source != "stochastic";
  std::ofstream f = open_out(path);
  f << "# plrf-lab config_hash=" << hash << "\n";
  f << "t,flops,loss_mean,loss_stderr,d,v,alpha,beta,algorithm,diverged";
  if (extra) f << ",source,variant";
  f << "\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      f << g17(c.times[i]) << ',' << g17(c.flops[i]) << ',' << g17(c.losses[i]) << ',' << g17(c.stderrs[i]) << ','
        << c.meta.d << ',' << c.meta.v << ',' << g17(c.meta.alpha) << ',' << g17(c.meta.beta) << ','
        << c.meta.algorithm << ',' << (c.diverged ? 1 : 0);
      if (extra) f << ',' << c.meta.source << ',' << c.meta.variant;
      f << "\n";
    }
  }
}

std::vector<LossCurve> read_curves_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split_csv(line);
    break;
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"t", "flops", "loss_mean", "loss_stderr", "d", "v", "alpha", "beta", "algorithm", "diverged"})
    if (!col.count(need)) throw ConfigError(path + ": missing column '" + need + "'");

  std::vector<LossCurve> curves;
  std::map<std::tuple<int, std::string, std::string, std::string>, std::size_t> index;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto v = split_csv(line);
    if (v.size() != header.size()) throw ConfigError(path + ":" + std::to_string(lineno) + ": wrong number of fields");
    try {
      const int d = std::stoi(v[col["d"]]);
      const std::string alg = v[col["algorithm"]];
      const std::string src = col.count("source") ? v[col["source"]] : "stochastic";
      const std::string var = col.count("variant") ? v[col["variant"]] : "";
      auto key = std::make_tuple(d, alg, src, var);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, curves.size()).first;
        LossCurve c;
        c.meta.d = d;
        c.meta.v = std::stoi(v[col["v"]]);
        c.meta.alpha = std::stod(v[col["alpha"]]);
        c.meta.beta = std::stod(v[col["beta"]]);
        c.meta.algorithm = alg;
        c.meta.source = src;
        c.meta.variant = var;
        curves.push_back(c);
      }
      LossCurve& c = curves[it->second];
      c.times.push_back(std::stod(v[col["t"]]));
      c.flops.push_back(std::stod(v[col["flops"]]));
      c.losses.push_back(std::stod(v[col["loss_mean"]]));
      c.stderrs.push_back(std::stod(v[col["loss_stderr"]]));
      c.diverged = c.diverged || v[col["diverged"]] == "1";
    } catch (const std::logic_error&) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  for (auto& c : curves)
    if (c.times.size() >= 2 && c.flops[1] > 0.0 && c.times[1] > 0.0)
      c.meta.batch = static_cast<int>(std::lround(c.flops[1] / (c.times[1] * c.meta.d)));
  return curves;
}

void write_envelope_csv(const std::string& path, const std::vector<EnvelopePoint>& pts, const std::string& hash) {
  std::ofstream f = open_out(path);
  f << "# plrf-lab config_hash=" << hash << "\n";
  f << "flops,best_loss,best_d\n";
  for (const auto& p : pts) f << g17(p.flops) << ',' << g17(p.best_loss) << ',' << p.best_d << "\n";
}

void write_measure_csv(const std::string& path, const SpectralMeasure& mu, const json& header,
                       const std::string& hash) {
  std::ofstream f = open_out(path);
  f << "# plrf-lab config_hash=" << hash << "\n";
  f << "# " << header.dump() << "\n";
  f << "x,density,mass\n";
  for (std::size_t k = 0; k < mu.x.size(); ++k)
    f << g17(mu.x[k]) << ',' << g17(mu.density[k]) << ',' << g17(mu.masses[k]) << "\n";
}

void write_json(const std::string& path, const json& j, const std::string& hash) {
  json out;
  out["config_hash"] = hash;
  if (j.is_object())
    for (const auto& [k, v] : j.items()) out[k] = v;
  else
    out["data"] = j;
  std::ofstream f = open_out(path);
  f << out.dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(f, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace plrf
