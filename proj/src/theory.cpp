#include "plrf/theory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "plrf/error.hpp"

namespace plrf {

TheoryAlgo parse_theory_algo(const std::string& name) {
  switch (parse_preset(name)) {
    case Preset::sgd: return TheoryAlgo::sgd;
    case Preset::sgd_m: return TheoryAlgo::sgd_m;
    case Preset::dana_constant: return TheoryAlgo::dana_constant;
    case Preset::dana_decaying: return TheoryAlgo::dana_decaying;
    default:
      throw ConfigError("no proven scaling law for '" + name +
                        "' (supported: SGD, SGD-M, DANA-constant, DANA-decaying)");
  }
}

std::string theory_algo_name(TheoryAlgo a) {
  switch (a) {
    case TheoryAlgo::sgd: return "SGD";
    case TheoryAlgo::sgd_m: return "SGD-M";
    case TheoryAlgo::dana_constant: return "DANA-constant";
    case TheoryAlgo::dana_decaying: return "DANA-decaying";
  }
  return "unknown";
}

PhaseLabel classify_phase(double alpha, double beta, TheoryAlgo algo) {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  const double tol = 1e-9;
  std::vector<std::pair<double, std::string>> lines = {
      {std::abs(alpha + beta - 0.5) / std::sqrt(2.0), "2a+2b=1"},
      {std::abs(alpha - 0.5), "2a=1 (high-dimensional line)"},
      {std::abs(beta - 0.5), "2b=1"},
  };
  const bool above = 2.0 * alpha > 1.0, bigbeta = 2.0 * beta > 1.0;
  if (bigbeta && !above) {
    lines.push_back({std::abs(alpha - 0.25), "a=1/4"});
    lines.push_back({std::abs(alpha - kIvBoundary), "a=(2-sqrt2)/2 (IVa/IVb)"});
  }
  if (bigbeta && above) {
    lines.push_back({std::abs(alpha - beta) / std::sqrt(2.0), "a=b"});
    if (algo == TheoryAlgo::dana_constant) lines.push_back({std::abs(alpha - kDanaConstantSplit), "a=3/4"});
    if (algo == TheoryAlgo::dana_decaying)
      lines.push_back({std::abs(alpha - kDanaDecayingSplit), "a=(3+sqrt5)/4"});
  }
  auto nearest = std::min_element(lines.begin(), lines.end());
  if (nearest->first < tol) {
    std::ostringstream msg;
    msg << "(alpha, beta) = (" << alpha << ", " << beta << ") lies on the critical line "
        << nearest->second << "; move off it, e.g. (" << alpha + 0.01 << ", " << beta + 0.01 << ")";
    throw ConfigError(msg.str());
  }
  if (!(2.0 * alpha + 2.0 * beta > 1.0))
    throw ConfigError("2*alpha + 2*beta <= 1: target energy not summable, no power law");

  PhaseLabel out;
  out.algorithm = theory_algo_name(algo);
  out.boundary_distance = nearest->first;
  out.kernel_available = alpha > 0.25;

  const bool split = algo == TheoryAlgo::dana_constant || algo == TheoryAlgo::dana_decaying;
  const double split_at = algo == TheoryAlgo::dana_constant ? kDanaConstantSplit : kDanaDecayingSplit;
  if (!bigbeta) {
    out.phase = above ? "Ia" : "Ib";
  } else if (!above) {
    out.phase = alpha < 0.25 ? "Ic" : (alpha < kIvBoundary ? "IVb" : "IVa");
  } else {
    std::string base = beta < alpha ? "II" : "III";
    if (split) base += alpha > split_at ? "a" : "b";
    out.phase = base;
  }
  return out;
}

namespace {

// (int_0^t sqrt(g(s)) ds)^2 for g(s) = c (1+s)^{-k}
double momentum_part(double c, double k, double t) {
  if (c <= 0.0 || t <= 0.0) return 0.0;
  const double e = 1.0 - 0.5 * k;
  const double I = std::abs(e) < 1e-12 ? std::log1p(t) : (std::pow(1.0 + t, e) - 1.0) / e;
  return c * I * I;
}

}  // namespace

double theta_timechange(const ScheduleSet& s, double t) {
  const double B = s.batch;
  switch (s.family) {
    case Family::sgd: return 1.0 + 2.0 * s.gamma2 * B * t;
    case Family::sgd_m: return 1.0 + 2.0 * effective_sgd_rate(s) * B * t;
    case Family::dana: {
      const DanaTags& k = *s.tags;
      const double g2 = k.gamma2_tilde * std::pow(static_cast<double>(s.d), -k.kappa1);
      const double c3 = k.gamma3_tilde * std::pow(static_cast<double>(s.d), -k.kappa2) * B;
      return 1.0 + 2.0 * g2 * B * t + momentum_part(c3, k.kappa3, t);
    }
    case Family::schedule_free:
    case Family::acsgd: {
      // gamma1*gamma3 as the effective momentum rate; integral in u = log(1+s)
      auto f = [&](double u) {
        const double sv = std::expm1(u);
        const Rates r = s.at(sv);
        return std::sqrt(std::max(0.0, r.gamma1 * r.gamma3 * B)) * std::exp(u);
      };
      const double I = t > 0.0 ? boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                                     f, 0.0, std::log1p(t), 15, 1e-10)
                               : 0.0;
      return 1.0 + 2.0 * s.at(t).gamma2 * B * t + I * I;
    }
  }
  return 1.0;
}

LossTerms loss_asymptotics(double alpha, double beta, double t, const ScheduleSet& s) {
  if (!(t >= 1.0) || s.d < 1) throw ConfigError("loss_asymptotics needs t >= 1 and d >= 1");
  if (!(2.0 * alpha + 2.0 * beta > 1.0)) throw ConfigError("2*alpha + 2*beta must exceed 1");
  const double d = s.d;
  const double th = theta_timechange(s, t);
  const double p = 1.0 / (2.0 * alpha);
  LossTerms out;
  out.F_pp = std::pow(th, -(2.0 * alpha + 2.0 * beta - 1.0) * p);
  out.F_ac = (2.0 * alpha > 1.0 && 2.0 * beta > 1.0) ? std::pow(d, -1.0) * std::pow(th, -1.0 + p) : 0.0;
  out.F_0 = std::pow(d, -2.0 * alpha + std::max(0.0, 1.0 - 2.0 * beta));
  double gamma = s.family == Family::sgd_m ? effective_sgd_rate(s) : s.at(t).gamma2;
  out.kernel_available = alpha > 0.25;
  out.K_term = out.kernel_available ? gamma * std::pow(th, -2.0 + p) : 0.0;
  out.total = out.F_pp + out.F_ac + out.F_0 + out.K_term;
  return out;
}

namespace {

ExponentPrediction pack(const PhaseLabel& ph, double eta, double xi, const std::string& tradeoff) {
  ExponentPrediction e;
  e.phase = ph.phase;
  e.algorithm = ph.algorithm;
  e.eta = eta;
  e.xi = xi;
  e.zeta = 1.0 - xi;
  e.tradeoff = tradeoff;
  return e;
}

ExponentPrediction sgd_table(const PhaseLabel& ph, double a, double b) {
  const double s = 2.0 * a + 2.0 * b - 1.0;
  const std::string& P = ph.phase;
  if (P == "Ia") return pack(ph, s / (2.0 * a + 1.0), 1.0 / (2.0 * a + 1.0), "F_pp = F_0");
  if (P == "Ib") return pack(ph, a + b - 0.5, 0.5, "F_pp = F_0");
  if (P == "Ic") {
    const double q = a * (2.0 * b - 3.0) - 2.0 * b + 1.0;
    return pack(ph, -a * s / q, -s / (2.0 * q), "F_pp = F_0");
  }
  if (P == "II") return pack(ph, s / (2.0 * (a + b)), b / (a + b), "F_pp = F_ac");
  if (P == "III") return pack(ph, 1.0 - 1.0 / (4.0 * a), 0.5, "K_pp = F_ac");
  if (P == "IVa") return pack(ph, a, 0.5, "K_pp = F_0");
  if (P == "IVb") {
    const double q = 2.0 * a * b + a - 2.0 * b;
    return pack(ph, -(1.0 - 2.0 * a) * s / (2.0 * q), (a - b) / q, "K_pp = F_pp");
  }
  throw ConfigError("phase " + P + " has no SGD table entry");
}

ExponentPrediction dana_constant_table(const PhaseLabel& ph, double a, double b) {
  const double s = 2.0 * a + 2.0 * b - 1.0;
  const std::string& P = ph.phase;
  if (P == "Ia") return pack(ph, s / (1.5 + a), 1.0 / (1.5 + a), "F_pp = F_0");
  const double q = 4.0 * a * a + 4.0 * a - 3.0;
  if (P == "IIa" || P == "IIIa") return pack(ph, 2.0 * a * (4.0 * a - 2.0) / q, (4.0 * a - 2.0) / q, "F_ac = F_0");
  if (P == "IIb") return pack(ph, s / (3.0 * b + a), 2.0 * b / (3.0 * b + a), "F_pp = F_ac");
  if (P == "IIIb") return pack(ph, 1.0 - 1.0 / (4.0 * a), 0.5, "K_pp = F_ac");
  throw ConfigError("phase " + P + " has no DANA-constant table entry");
}

ExponentPrediction dana_decaying_table(const PhaseLabel& ph, double a, double b) {
  const double s = 2.0 * a + 2.0 * b - 1.0;
  const std::string& P = ph.phase;
  const double q = 4.0 * a * a + 4.0 * a - 1.0;
  if (P == "Ia") return pack(ph, s * (4.0 * a - 1.0) / q, (4.0 * a - 1.0) / q, "F_pp = F_0");
  if (P == "IIa" || P == "IIIa") return pack(ph, 2.0 * a * (4.0 * a - 1.0) / q, (4.0 * a - 1.0) / q, "F_ac = F_0");
  if (P == "IIb") {
    const double r = 2.0 * a * a + 4.0 * a * b - b;
    return pack(ph, s * (4.0 * a - 1.0) / (2.0 * r), (4.0 * a - 1.0) * b / r, "F_pp = F_ac");
  }
  if (P == "IIIb")
    return pack(ph, (4.0 * a - 1.0) * (4.0 * a - 1.0) / (2.0 * a * (6.0 * a - 1.0)),
                (4.0 * a - 1.0) / (6.0 * a - 1.0), "K_pp = F_ac");
  throw ConfigError("phase " + P + " has no DANA-decaying table entry");
}

}  // namespace

ExponentPrediction compute_optimal_exponents(TheoryAlgo algo, double alpha, double beta) {
  const PhaseLabel ph = classify_phase(alpha, beta, algo);
  // Below the high-dimensional line every algorithm shares SGD's entries.
  if (algo == TheoryAlgo::sgd || algo == TheoryAlgo::sgd_m || 2.0 * alpha < 1.0)
    return sgd_table(ph, alpha, beta);
  if (algo == TheoryAlgo::dana_constant) return dana_constant_table(ph, alpha, beta);
  return dana_decaying_table(ph, alpha, beta);
}

ExponentPrediction conjectured_exponents(double alpha, double beta, double k1, double k2, double k3) {
  if (!(2.0 * alpha + 2.0 * beta > 1.0)) throw ConfigError("2*alpha + 2*beta must exceed 1");
  if (!(k3 < 2.0)) throw ConfigError("conjectured exponents need kappa3 < 2");
  // Everything is homogeneous of degree one in (log f, log d): solve at log f = 1,
  // x = log d / log f in [0, 1], tau = 1 - x the log-iteration count.
  const double p = 1.0 / (2.0 * alpha);
  const bool fac = 2.0 * alpha > 1.0 && 2.0 * beta > 1.0;
  const bool kern = alpha > 0.25;
  struct Terms {
    double value;
    int arg;
  };
  auto worst = [&](double x) -> Terms {
    const double tau = 1.0 - x;
    const double lth = std::max({0.0, tau - k1 * x, -k2 * x + (2.0 - k3) * tau});
    const double t[4] = {
        -(2.0 * alpha + 2.0 * beta - 1.0) * p * lth,
        fac ? -x + (-1.0 + p) * lth : -1e300,
        (-2.0 * alpha + std::max(0.0, 1.0 - 2.0 * beta)) * x,
        kern ? -k1 * x + (-2.0 + p) * lth : -1e300,
    };
    int arg = static_cast<int>(std::max_element(t, t + 4) - t);
    return {t[arg], arg};
  };
  const int n = 200000;
  double best = 1e300, bx = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double w = worst(x).value;
    if (w < best) {
      best = w;
      bx = x;
    }
  }
  // golden-section polish inside the bracketing cell
  double lo = std::max(0.0, bx - 1.0 / n), hi = std::min(1.0, bx + 1.0 / n);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    if (worst(c).value < worst(d).value) hi = d;
    else lo = c;
  }
  bx = 0.5 * (lo + hi);
  static const char* names[4] = {"F_pp", "F_ac", "F_0", "K_pp"};
  // the two terms tied at the optimum
  const double eps = 1e-6;
  const Terms left = worst(std::max(0.0, bx - eps)), right = worst(std::min(1.0, bx + eps));
  ExponentPrediction e;
  e.phase = "conjectured";
  e.algorithm = "DANA-class";
  e.eta = -worst(bx).value;
  e.xi = bx;
  e.zeta = 1.0 - bx;
  e.tradeoff = left.arg == right.arg ? std::string(names[left.arg]) + " (interior)"
                                     : std::string(names[left.arg]) + " = " + names[right.arg];
  e.conjectured = true;
  return e;
}

OutscalingVerdict outscaling_verdict(double alpha, double /*beta*/, double ell) {
  if (!(ell > 0.0)) throw ConfigError("regime exponent ell must be positive");
  OutscalingVerdict v;
  if (2.0 * alpha > 1.0) {
    v.dana_decaying_outscales = ell < 2.0 * alpha;
    v.dana_constant_outscales = ell > 1.0 && ell < 2.0 * alpha;
  }
  return v;
}

}  // namespace plrf
