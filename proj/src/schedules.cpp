#include "plrf/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "plrf/core.hpp"
#include "plrf/error.hpp"

namespace plrf {

Rates ScheduleSet::at(double t) const {
  Rates r;
  switch (family) {
    case Family::sgd:
      r.gamma1 = 0.0;
      r.gamma2 = gamma2;
      r.gamma3 = 0.0;
      r.Delta = 1.0;
      break;
    case Family::sgd_m:
      r.gamma1 = 1.0;
      r.gamma2 = gamma2;
      r.gamma3 = gamma3;
      r.Delta = delta;
      break;
    case Family::dana: {
      const DanaTags& k = *tags;
      const double dd = static_cast<double>(d);
      r.gamma1 = 1.0;
      r.gamma2 = k.gamma2_tilde * std::pow(dd, -k.kappa1);
      r.gamma3 = k.gamma3_tilde * std::pow(dd, -k.kappa2) * std::pow(1.0 + t, -k.kappa3);
      r.Delta = k.delta / (1.0 + t);
      break;
    }
    case Family::schedule_free:
      r.gamma1 = 1.0;
      r.gamma2 = gamma_tilde * (1.0 - beta_tilde);
      r.gamma3 = gamma_tilde * beta_tilde / (t + 1.0);
      r.Delta = 1.0 / (t + 1.0);
      break;
    case Family::acsgd:
      r.gamma1 = alpha_tilde * (t + 1.0) * (t + 1.0) / (t + 2.0) - (t + 1.0) / (t + 2.0) * beta_tilde;
      r.gamma2 = beta_tilde;
      r.gamma3 = 1.0 / (t + 1.0);
      r.Delta = 1.0 / (t + 2.0);
      break;
  }
  return r;
}

namespace {

struct PresetEntry {
  Preset p;
  const char* name;
};

const PresetEntry kPresets[] = {
    {Preset::sgd, "SGD"},
    {Preset::sgd_m, "SGD-M"},
    {Preset::dana_constant, "DANA-constant"},
    {Preset::dana_decaying, "DANA-decaying"},
    {Preset::schedule_free, "ScheduleFreeSGD"},
    {Preset::nesterov, "StochasticNesterov"},
    {Preset::acsgd, "AcSGD"},
};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  s.erase(std::remove(s.begin(), s.end(), '_'), s.end());
  s.erase(std::remove(s.begin(), s.end(), '-'), s.end());
  return s;
}

double get_or(const Overrides& o, const std::string& key, double fallback) {
  auto it = o.find(key);
  return it == o.end() ? fallback : it->second;
}

void check_keys(const Overrides& o, const std::set<std::string>& allowed, const std::string& preset) {
  for (const auto& [k, v] : o) {
    if (!allowed.count(k)) {
      std::ostringstream msg;
      msg << "override '" << k << "' is not recognized for preset " << preset << " (allowed:";
      for (const auto& a : allowed) msg << ' ' << a;
      msg << ')';
      throw ConfigError(msg.str());
    }
    if (!std::isfinite(v)) throw ConfigError("override '" + k + "' must be finite");
  }
}

int batch_from(const Overrides& o) {
  double b = get_or(o, "batch", 1.0);
  if (b < 1.0 || b != std::floor(b)) throw ConfigError("batch must be a positive integer");
  return static_cast<int>(b);
}

}  // namespace

Preset parse_preset(const std::string& name) {
  const std::string key = lower(name);
  for (const auto& e : kPresets)
    if (lower(e.name) == key) return e.p;
  if (key == "nesterov" || key == "snesterov") return Preset::nesterov;
  if (key == "schedulefree") return Preset::schedule_free;
  if (key == "sgdm") return Preset::sgd_m;
  std::string all;
  for (const auto& e : kPresets) all += std::string(" ") + e.name;
  throw ConfigError("unknown algorithm preset '" + name + "' (expected one of:" + all + ")");
}

std::string preset_name(Preset p) {
  for (const auto& e : kPresets)
    if (e.p == p) return e.name;
  return "unknown";
}

std::string family_name(Family f) {
  switch (f) {
    case Family::sgd: return "sgd";
    case Family::sgd_m: return "sgd_m";
    case Family::dana: return "dana";
    case Family::schedule_free: return "schedule_free";
    case Family::acsgd: return "acsgd";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::sgd, Family::sgd_m, Family::dana, Family::schedule_free, Family::acsgd})
    if (family_name(f) == name) return f;
  throw ConfigError("unknown schedule family '" + name + "'");
}

double default_delta(double alpha, double beta) {
  return std::max((2.0 * alpha + 2.0 * beta - 1.0) / alpha, 2.0 - 1.0 / alpha) + 1.0;
}

ScheduleSet build_preset(Preset preset, double alpha, std::optional<double> beta,
                         const InstanceSummary& summary, const Overrides& o) {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (summary.d < 1) throw ConfigError("instance summary needs d >= 1");
  if (!(summary.trace_D > 0.0)) throw ConfigError("instance summary needs trace_D > 0");

  const double tr = summary.trace_D;
  const double dd = static_cast<double>(summary.d);
  ScheduleSet s;
  s.name = preset_name(preset);
  s.d = summary.d;

  // Without beta the target-dependent term drops out of the default.
  const double delta0 =
      beta ? default_delta(alpha, *beta) : std::max(1.0, 2.0 - 1.0 / alpha) + 1.0;

  switch (preset) {
    case Preset::sgd:
      check_keys(o, {"gamma2", "batch"}, s.name);
      s.family = Family::sgd;
      s.gamma2 = get_or(o, "gamma2", 1.0 / (2.0 * tr));
      break;

    case Preset::sgd_m: {
      check_keys(o, {"gamma2", "gamma3", "delta", "batch"}, s.name);
      s.family = Family::sgd_m;
      s.delta = get_or(o, "delta", 0.1);
      // Split the SGD rate 1/(2 tr) evenly between the direct and momentum paths.
      const double eff = 1.0 / (2.0 * tr);
      s.gamma2 = get_or(o, "gamma2", 0.5 * eff);
      s.gamma3 = get_or(o, "gamma3", 0.5 * eff * s.delta);
      break;
    }

    case Preset::dana_constant:
    case Preset::dana_decaying: {
      check_keys(o,
                 {"gamma2", "gamma2_tilde", "gamma3_tilde", "kappa1", "kappa2", "kappa3", "kappa_b",
                  "delta", "batch"},
                 s.name);
      s.family = Family::dana;
      DanaTags k;
      if (preset == Preset::dana_constant) {
        k.kappa1 = std::max(0.0, 1.0 - 2.0 * alpha);
        k.kappa2 = k.kappa1 + 1.0;
        k.kappa3 = 0.0;
      } else {
        if (!(2.0 * alpha > 1.0) && !o.count("kappa3"))
          throw ConfigError(
              "DANA-decaying default needs 2*alpha > 1; pass an explicit kappa3 override");
        k.kappa1 = 0.0;
        k.kappa2 = 0.0;
        k.kappa3 = 1.0 / (2.0 * alpha);
      }
      k.kappa1 = get_or(o, "kappa1", k.kappa1);
      k.kappa2 = get_or(o, "kappa2", k.kappa2);
      k.kappa3 = get_or(o, "kappa3", k.kappa3);
      k.kappa_b = get_or(o, "kappa_b", 0.0);
      k.delta = get_or(o, "delta", delta0);
      // gamma2 = 1/(2 Tr D) by default; the tilde constant absorbs d^{kappa1}.
      const double g2 = get_or(o, "gamma2", 1.0 / (2.0 * tr));
      k.gamma2_tilde = get_or(o, "gamma2_tilde", g2 * std::pow(dd, k.kappa1));
      k.gamma3_tilde = get_or(o, "gamma3_tilde", k.gamma2_tilde / 5.0);
      s.tags = k;
      break;
    }

    case Preset::schedule_free:
      check_keys(o, {"gamma_tilde", "beta_tilde", "batch"}, s.name);
      s.family = Family::schedule_free;
      s.gamma_tilde = get_or(o, "gamma_tilde", 0.5 / tr);
      s.beta_tilde = get_or(o, "beta_tilde", 0.9);
      break;

    case Preset::acsgd: {
      check_keys(o, {"alpha_tilde", "beta_tilde", "c1", "c2", "batch"}, s.name);
      s.family = Family::acsgd;
      const double c1 = get_or(o, "c1", 0.1);
      const double c2 = get_or(o, "c2", 0.4);
      s.alpha_tilde = get_or(o, "alpha_tilde", c1 / (dd * tr));
      s.beta_tilde = get_or(o, "beta_tilde", c2 / tr);
      break;
    }

    case Preset::nesterov: {
      check_keys(o, {"gamma_tilde", "c2", "batch"}, s.name);
      s.family = Family::acsgd;
      const double c2 = get_or(o, "c2", 0.1);
      s.alpha_tilde = s.beta_tilde = get_or(o, "gamma_tilde", c2 / tr);
      s.gamma_tilde = s.alpha_tilde;
      break;
    }
  }
  s.batch = batch_from(o);

  // Spot check of the rates. The AcSGD gamma1 is negative while alpha_tilde (t+1) < beta_tilde,
  // which the hyperparameter correspondence allows, so it is only checked for finiteness.
  for (double t : {0.0, 1.0, 1e3, 1e9}) {
    Rates r = s.at(t);
    if (!std::isfinite(r.gamma1) || (s.family != Family::acsgd && r.gamma1 < 0.0))
      throw ConfigError("preset " + s.name + " produced an invalid gamma1 at t=" + std::to_string(t));
    for (double x : {r.gamma2, r.gamma3, r.Delta})
      if (!std::isfinite(x) || x < 0.0)
        throw ConfigError("preset " + s.name + " produced a negative or non-finite rate at t=" +
                          std::to_string(t) + "; check overrides");
  }
  return s;
}

double effective_sgd_rate(const ScheduleSet& s) {
  if (s.family == Family::sgd) return s.gamma2;
  if (s.family != Family::sgd_m)
    throw ConfigError("effective_sgd_rate needs a constant SGD-M schedule, got family " +
                      family_name(s.family));
  if (!(s.delta > 0.0)) throw ConfigError("SGD-M schedule needs delta > 0");
  return s.gamma2 + s.gamma3 / s.delta;
}

ScheduleSet sgd_equivalent(const ScheduleSet& s) {
  ScheduleSet out;
  out.name = "SGD";
  out.family = Family::sgd;
  out.batch = s.batch;
  out.d = s.d;
  out.gamma2 = effective_sgd_rate(s);
  return out;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::boundary: return "boundary";
    case Verdict::unstable: return "unstable";
  }
  return "unknown";
}

namespace {

struct Constraint {
  double lhs, rhs;
  std::string text;
};

Verdict verdict_of(double ratio) {
  if (ratio > 1.05) return Verdict::unstable;
  if (ratio >= 0.95) return Verdict::boundary;
  return Verdict::stable;
}

}  // namespace

StabilityReport stability_check(const ScheduleSet& s, double alpha, double c) {
  if (!(c > 0.0)) throw ConfigError("safety constant c must be positive");
  const double tr = power_sum(2.0 * alpha, s.d);
  const double B = s.batch;
  const double cap = c * std::min(1.0 / B, 1.0 / tr);
  std::vector<Constraint> cs;
  StabilityReport rep;

  switch (s.family) {
    case Family::sgd:
      if (s.gamma2 >= 2.0 / (B + 1.0)) {
        rep.verdict = Verdict::unstable;
        rep.reason = "gamma2 < 2/(B+1) violated";
        rep.worst_ratio = s.gamma2 * (B + 1.0) / 2.0;
        return rep;
      }
      cs.push_back({s.gamma2, cap, "gamma2 <= c*min(1/B, 1/tr)"});
      break;
    case Family::sgd_m:
      cs.push_back({s.delta, 2.0, "delta < 2"});
      cs.push_back({s.gamma2 + s.gamma3 / s.delta, cap, "gamma2 + gamma3/delta <= c*min(1/B, 1/tr)"});
      break;
    case Family::dana: {
      const DanaTags& k = *s.tags;
      const double dd = s.d;
      const double g2 = k.gamma2_tilde * std::pow(dd, -k.kappa1);
      const double g3 = k.gamma3_tilde * std::pow(dd, -k.kappa2);
      const double crit = 1.0 / (2.0 * alpha);
      cs.push_back({g2, cap, "gamma2 <= c*min(1/B, 1/tr)"});
      cs.push_back({1.0 / c, k.delta, "c*delta > 1"});
      if (k.kappa3 >= crit) {
        cs.push_back({g3, c * g2, "gamma3_tilde d^{-kappa2} <= c*gamma2"});
      } else {
        cs.push_back({g3, c * g2 * std::pow(dd, 2.0 * alpha * (k.kappa3 - crit)),
                      "gamma3_tilde d^{-kappa2} <= c*gamma2 d^{2alpha(kappa3 - 1/(2alpha))}"});
      }
      // Exponent-only form: the same constraints read as powers of d.
      const double need1 = std::max(0.0, 1.0 - 2.0 * alpha);
      const double need2 = k.kappa3 >= crit ? k.kappa1 : k.kappa1 + 1.0 - 2.0 * alpha * k.kappa3;
      const double slack = std::min(k.kappa1 - need1, k.kappa2 - need2);
      rep.order_verdict = slack >= -1e-12 ? Verdict::stable : Verdict::unstable;
      break;
    }
    default:
      throw ConfigError("stability_check: unrecognized schedule family " + family_name(s.family) +
                        " (supported: sgd, sgd_m, dana)");
  }

  for (const auto& con : cs) {
    const double ratio = con.lhs / con.rhs;
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.reason = con.text;
    }
  }
  rep.verdict = verdict_of(rep.worst_ratio);
  if (rep.verdict == Verdict::stable) rep.reason = "all constraints hold (binding: " + rep.reason + ")";
  else if (rep.verdict == Verdict::unstable) rep.reason += " violated";
  else rep.reason += " within 5%";
  return rep;
}

}  // namespace plrf
