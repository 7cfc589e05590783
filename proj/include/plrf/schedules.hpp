#pragma once

#include <map>
#include <optional>
#include <string>

namespace plrf {

// Gen-Mom-SGD:
//   y_t       = (1 - Delta(t)) y_{t-1} + gamma1(t) g_t
//   theta_t+1 = theta_t - gamma2(t) g_t - gamma3(t) y_t
enum class Family { sgd, sgd_m, dana, schedule_free, acsgd };

enum class Preset { sgd, sgd_m, dana_constant, dana_decaying, schedule_free, nesterov, acsgd };

struct Rates {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double Delta = 0.0;
};

// Exponents of the DANA power-law form:
//   gamma2 = g2t d^{-k1},  gamma3 = g3t d^{-k2} (1+t)^{-k3},  Delta = delta/(1+t)
struct DanaTags {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;
  double kappa_b = 0.0;
  double delta = 0.0;
  double gamma2_tilde = 0.0;
  double gamma3_tilde = 0.0;
};

struct ScheduleSet {
  std::string name;
  Family family = Family::sgd;
  int batch = 1;
  int d = 1;

  // sgd: gamma2.  sgd_m: gamma2, gamma3 constant and Delta == delta.
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double delta = 1.0;

  std::optional<DanaTags> tags;  // family == dana

  // schedule_free: gamma_tilde, beta_tilde.  acsgd (also S-Nesterov): alpha_tilde, beta_tilde.
  double gamma_tilde = 0.0;
  double alpha_tilde = 0.0;
  double beta_tilde = 0.0;

  Rates at(double t) const;
};

struct InstanceSummary {
  int d = 0;
  int v = 0;
  double trace_D = 0.0;  // sum_{j<=v} j^{-2alpha}
};

using Overrides = std::map<std::string, double>;

Preset parse_preset(const std::string& name);
std::string preset_name(Preset p);
std::string family_name(Family f);
Family parse_family(const std::string& name);

// max{(2a+2b-1)/a, 2-1/a} + 1
double default_delta(double alpha, double beta);

// Recognized override keys: gamma2, gamma3, delta, batch, kappa1, kappa2, kappa3, kappa_b,
// gamma2_tilde, gamma3_tilde, gamma_tilde, beta_tilde, alpha_tilde, c1, c2.
ScheduleSet build_preset(Preset preset, double alpha, std::optional<double> beta,
                         const InstanceSummary& summary, const Overrides& overrides = {});

// gamma2 + gamma3/delta for SGD-M form schedules (gamma2 for plain SGD).
double effective_sgd_rate(const ScheduleSet& s);

// SGD schedule with the same effective rate as an SGD-M schedule.
ScheduleSet sgd_equivalent(const ScheduleSet& s);

enum class Verdict { stable, boundary, unstable };
std::string verdict_name(Verdict v);

struct StabilityReport {
  Verdict verdict = Verdict::stable;   // with the explicit constant c
  std::string reason;
  double worst_ratio = 0.0;            // max over constraints of lhs / rhs
  // Verdict from the d-exponents alone (DANA form); empty when not applicable.
  std::optional<Verdict> order_verdict;
  bool caveat = true;                  // the sharp constant is unknown
};

// tr = sum_{j<=d} j^{-2alpha}; boundary when within 5% of the binding constraint.
StabilityReport stability_check(const ScheduleSet& s, double alpha, double c = 1.0);

}  // namespace plrf
