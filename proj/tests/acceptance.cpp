// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.
// Usage: plrf_acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "plrf/core.hpp"
#include "plrf/detequiv.hpp"
#include "plrf/error.hpp"
#include "plrf/experiments.hpp"
#include "plrf/fit.hpp"
#include "plrf/ode.hpp"
#include "plrf/runner.hpp"
#include "plrf/schedules.hpp"
#include "plrf/theory.hpp"

using namespace plrf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

InstanceSummary summary_for(double alpha, int d, int v) { return {d, v, trace_D(alpha, v)}; }

// max |a/b - 1| over shared times in [lo, hi]
double max_rel_err(const LossCurve& a, const LossCurve& b, double lo, double hi) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a.times[i];
    if (t < lo || t > hi) continue;
    worst = std::max(worst, std::abs(a.losses[i] / b.loss_at(t) - 1.0));
  }
  return worst;
}

// Same comparison after averaging both curves over log-time bins (10 per decade). Diagnostic only.
double binned_rel_err(const LossCurve& a, const LossCurve& b, double lo, double hi) {
  std::vector<double> sa(static_cast<std::size_t>(10 * std::log10(hi / lo)) + 1, 0.0), sb(sa.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a.times[i];
    if (t < lo || t > hi) continue;
    const auto k = static_cast<std::size_t>(10 * std::log10(t / lo));
    sa[k] += a.losses[i];
    sb[k] += b.loss_at(t);
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < sa.size(); ++k)
    if (sb[k] > 0) worst = std::max(worst, std::abs(sa[k] / sb[k] - 1.0));
  return worst;
}

// 1. Stochastic mean vs simplified ODE on the same instance.
Outcome criterion1() {
  const std::vector<std::pair<double, double>> points{{1.0, 0.7}, {0.7, 1.0}, {1.5, 0.4}};
  const std::vector<Preset> presets{Preset::sgd, Preset::sgd_m, Preset::dana_constant, Preset::dana_decaying};
  const int d = 200, v = 800;
  const long T = 1000000;
  double worst = 0.0, worst_binned = 0.0, worst_exact = 0.0;
  std::string where;
  for (auto [a, b] : points) {
    const Instance inst = generate_instance(a, b, d, v, 11);
    const Spectrum spec = to_spectrum(spectral_data(inst));
    for (Preset p : presets) {
      const ScheduleSet s = build_preset(p, a, b, summary_for(a, d, v));
      RunConfig rc;
      rc.max_iterations = T;
      rc.mode = RunMode::spectral;
      const LossCurve sto = run(inst, s, rc);
      OdeOptions o;
      o.output_times = sto.times;
      const LossCurve ode = integrate(spec, OdeVariant::simplified, s, static_cast<double>(T), o);
      const bool bad = sto.diverged || ode.diverged;
      const double e = bad ? 1e9 : max_rel_err(sto, ode, 1e2, 1e6);
      const double eb = bad ? 1e9 : binned_rel_err(sto, ode, 1e2, 1e6);
      // diagnostic: the same binned comparison against the exact-variant ODE
      const LossCurve ex = integrate(spec, OdeVariant::exact, s, static_cast<double>(T), o);
      const double ee = bad || ex.diverged ? 1e9 : binned_rel_err(sto, ex, 1e2, 1e6);
      worst_binned = std::max(worst_binned, eb);
      worst_exact = std::max(worst_exact, ee);
      std::printf("  (%.1f,%.1f) %-14s max rel err %.4f  log-binned %.4f  log-binned vs exact ODE %.4f\n", a, b,
                  preset_name(p).c_str(), e, eb, ee);
      std::fflush(stdout);
      if (e > worst) {
        worst = e;
        where = "(" + fmt("%.1f", a) + "," + fmt("%.1f", b) + ") " + preset_name(p);
      }
    }
  }
  return {worst < 0.10, "worst max rel err " + fmt("%.4f", worst) + " at " + where +
                           " (tol 0.10); log-binned diagnostic " + fmt("%.4f", worst_binned) + ", vs exact ODE " +
                           fmt("%.4f", worst_exact)};
}

// 2. Approach-1 exponents from deterministic-equivalent ODE sweeps.
Outcome criterion2() {
  struct Point {
    double a, b;
  };
  const std::vector<Point> points{{1.0, 0.4}, {0.8, 0.3}, {1.0, 0.7}, {1.5, 0.8}, {0.8, 1.2}, {0.4, 1.0}};
  SpectrumCache cache;
  double worst_eta = 0.0, worst_xi = 0.0;
  bool ok = true;
  for (const Point& pt : points) {
    std::vector<std::pair<Preset, TheoryAlgo>> algos{{Preset::sgd, TheoryAlgo::sgd},
                                                     {Preset::dana_constant, TheoryAlgo::dana_constant}};
    if (2.0 * pt.a > 1.0) algos.push_back({Preset::dana_decaying, TheoryAlgo::dana_decaying});
    for (auto [preset, algo] : algos) {
      SweepSpec sp;
      sp.alpha = pt.a;
      sp.beta = pt.b;
      sp.d_list = {200, 400, 800, 1600, 3200, 6400};
      sp.preset = preset;
      sp.mode = ExecMode::detequiv_ode;
      sp.flops_budget = 1e12;
      const SweepOutcome out = run_sweep(sp, &cache);
      const ExponentPrediction th = compute_optimal_exponents(algo, pt.a, pt.b);
      std::string line;
      try {
        if (!out.failures.empty()) throw NumericalError("sweep failed at d=" + std::to_string(out.failures[0].first));
        const Approach1Result r = approach1(out.curves, {});
        const double de = std::abs(r.eta_hat - th.eta), dx = std::abs(r.xi_hat - th.xi);
        worst_eta = std::max(worst_eta, de);
        worst_xi = std::max(worst_xi, dx);
        ok = ok && de < 0.1 && dx < 0.14;
        std::printf("  (%.2f,%.2f) %-14s %-5s eta %.3f vs %.3f  xi %.3f vs %.3f\n", pt.a, pt.b,
                    preset_name(preset).c_str(), th.phase.c_str(), r.eta_hat, th.eta, r.xi_hat, th.xi);
      } catch (const std::exception& e) {
        ok = false;
        std::printf("  (%.2f,%.2f) %-14s error: %s\n", pt.a, pt.b, preset_name(preset).c_str(), e.what());
      }
      std::fflush(stdout);
    }
  }
  return {ok, "worst |eta - theory| " + fmt("%.3f", worst_eta) + " (tol 0.1), worst |xi - theory| " +
                  fmt("%.3f", worst_xi) + " (tol 0.14)"};
}

// 3. SGD-M and its SGD equivalent under the simplified ODE. Heavy-ball form (gamma2 = 0,
// Delta = 0.1, gamma3 = Delta * gamma_SGD) across a range of SGD rates.
Outcome criterion3() {
  const std::vector<std::pair<double, double>> points{{1.0, 0.7}, {0.7, 1.0}, {1.5, 0.4}};
  const double delta = 0.1, T = 1e6;
  double worst = 0.0, worst_onset = 0.0;
  for (auto [a, b] : points) {
    const int d = 200, v = 800;
    const Spectrum spec = to_spectrum(spectral_data(generate_instance(a, b, d, v, 3)));
    const double tr = power_sum(2.0 * a, d);
    for (double c : {0.1, 0.5, 1.0}) {
      const ScheduleSet m = build_preset(Preset::sgd_m, a, b, summary_for(a, d, v),
                                         {{"delta", delta}, {"gamma2", 0.0}, {"gamma3", delta * c / tr}});
      const ScheduleSet s = sgd_equivalent(m);
      const LossCurve cm = integrate(spec, OdeVariant::simplified, m, T);
      const LossCurve cs = integrate(spec, OdeVariant::simplified, s, T);
      const double e = max_rel_err(cm, cs, 1.0 / delta, T);
      // first time after which the curves stay within 5%
      double onset = 0.0;
      for (std::size_t i = 0; i < cm.size(); ++i)
        if (std::abs(cm.losses[i] / cs.loss_at(cm.times[i]) - 1.0) >= 0.05) onset = cm.times[i];
      std::printf("  (%.1f,%.1f) gamma_SGD %.1f/tr  max rel err %.4f  within 5%% after t = %.0f\n", a, b, c, e,
                  onset);
      worst = std::max(worst, e);
      worst_onset = std::max(worst_onset, onset);
    }
  }
  return {worst < 0.05, "worst max rel err for t >= 1/delta " + fmt("%.4f", worst) +
                            " (tol 0.05); agreement within 5% from t = " + fmt("%.0f", worst_onset)};
}

// 4. DANA-constant follows SGD until t ~ d, then accelerates.
Outcome criterion4() {
  const double a = 1.2, b = 0.7;
  const int d = 1000, v = 4000;
  const Spectrum spec = to_spectrum(spectral_data(generate_instance(a, b, d, v, 5)));
  const ScheduleSet sgd = build_preset(Preset::sgd, a, b, summary_for(a, d, v));
  const ScheduleSet dc = build_preset(Preset::dana_constant, a, b, summary_for(a, d, v));
  const double T = static_cast<double>(d) * d;
  const LossCurve cs = integrate(spec, OdeVariant::simplified, sgd, T);
  const LossCurve cd = integrate(spec, OdeVariant::simplified, dc, T);
  if (cs.diverged || cd.diverged) return {false, "an ODE curve diverged"};
  const double early = max_rel_err(cd, cs, 0.0, d);
  const double ratio = cs.loss_at(T) / cd.loss_at(T);
  return {early < 0.15 && ratio >= 2.0,
          "max rel diff for t <= d " + fmt("%.4f", early) + " (tol 0.15), SGD/DANA-constant at t = d^2 " +
              fmt("%.3f", ratio) + " (need >= 2)"};
}

// 5. kappa3 sweep for DANA-decaying (gamma3 = 0.1 (1+t)^{-kappa3}, v = 5d).
Outcome criterion5() {
  const double a = 1.0, b = 0.7;
  const int d = 800, v = 5 * d;
  const Spectrum spec = to_spectrum(spectral_data(generate_instance(a, b, d, v, 9)));
  const double T = 1e9;
  std::vector<LossCurve> cs;
  for (double k3 : {1.0 / (2.0 * a) - 0.2, 1.0 / (2.0 * a), 1.0}) {
    const ScheduleSet s = build_preset(Preset::dana_decaying, a, b, summary_for(a, d, v),
                                       {{"kappa3", k3}, {"gamma3_tilde", 0.1}});
    cs.push_back(integrate(spec, OdeVariant::simplified, s, T));
  }
  const bool first = cs[0].diverged && cs[0].diverged_at < T;
  bool dominates = !cs[1].diverged && !cs[2].diverged;
  double worst = 0.0;
  for (std::size_t i = 0; dominates && i < cs[1].size(); ++i) {
    const double t = cs[1].times[i];
    if (t < 1e3) continue;
    const double r = cs[1].losses[i] / cs[2].loss_at(t);
    worst = std::max(worst, r);
  }
  dominates = dominates && worst <= 1.0;
  return {first && dominates, std::string("kappa3 = 1/(2a) - 0.2 ") +
                                  (first ? "diverged at t=" + fmt("%.3g", cs[0].diverged_at) : "did not diverge") +
                                  "; max P(1/(2a))/P(1) for t >= 1e3 " + fmt("%.4f", worst) + " (need <= 1)"};
}

// 6. Deterministic equivalent: residuals, sign, mass and histogram overlay.
Outcome criterion6() {
  const double a = 1.2, b = 0.6;
  const int d = 500, v = 2000;
  const DetEquiv de = det_equiv_pipeline(a, b, d, v);
  const auto& R = de.resolvent;
  double max_res = 0.0, max_im = -1e300;
  for (std::size_t i = 0; i < R.size(); ++i) {
    max_res = std::max(max_res, R.residuals[i]);
    max_im = std::max(max_im, R.m[i].imag());
  }
  const bool full = R.dropped_x.empty();
  const double target = initial_risk(a, b, v);
  const double mass_err = std::abs(de.muF.total_mass() / target - 1.0);

  // Empirical weighted histogram: eigenvalue lambda_j with weight (u_j^T D^{1/2} b)^2 = lambda_j rho_j^2.
  const int n_inst = 100;
  // Bulk excludes the 20 largest modes and the lowest tenth of the spectrum.
  const double x_hi = std::pow(20.0, -2.0 * a), x_lo = std::pow(0.9 * d, -2.0 * a);
  const int nb = 30;
  std::vector<double> edges(nb + 1);
  for (int k = 0; k <= nb; ++k) edges[k] = x_lo * std::pow(x_hi / x_lo, static_cast<double>(k) / nb);
  auto bin_of = [&](double x) -> int {
    if (x < x_lo || x >= x_hi) return -1;
    return std::min(nb - 1, static_cast<int>(std::log(x / x_lo) / std::log(x_hi / x_lo) * nb));
  };
  std::vector<double> emp(nb, 0.0), det(nb, 0.0);
  for (int i = 0; i < n_inst; ++i) {
    const SpectralData sd = spectral_data(generate_instance(a, b, d, v, 1000 + i));
    for (int j = 0; j < d; ++j) {
      const int k = bin_of(sd.lambdas[j]);
      if (k >= 0) emp[k] += sd.lambdas[j] * sd.rho0[j] / n_inst;
    }
  }
  const auto& F = de.muF;
  for (std::size_t c = 0; c < F.x.size(); ++c) {
    // spread each cell's mass over the bins it overlaps, uniformly in log x
    const double lo = F.lo[c], hi = F.hi[c], L = std::log(hi / lo);
    for (int k = 0; k < nb; ++k) {
      const double ov = std::log(std::min(hi, edges[k + 1]) / std::max(lo, edges[k]));
      if (ov > 0.0) det[k] += F.masses[c] * ov / L;
    }
  }
  double sup = 0.0;
  for (int k = 0; k < nb; ++k) {
    const double dev = (emp[k] > 0.0 && det[k] > 0.0) ? std::abs(std::log(emp[k] / det[k])) : 1e9;
    sup = std::max(sup, dev);
  }
  const bool ok = max_res < 1e-10 && full && max_im <= 0.0 && mass_err < 0.05 && sup < 0.3;
  return {ok, "max residual " + fmt("%.2e", max_res) + (full ? "" : " (points dropped)") + ", max Im m " +
                  fmt("%.2e", max_im) + ", muF mass rel err " + fmt("%.4f", mass_err) +
                  ", sup log-density deviation " + fmt("%.3f", sup) + " (tol 0.3)"};
}

// 7. F0 scaling in d and agreement with Monte-Carlo p_inf.
Outcome criterion7() {
  double worst_ratio = 0.0, worst_mc = 0.0;
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1.0, 0.7}, {0.7, 0.3}}) {
    const double expect = std::pow(2.0, -2.0 * a + std::max(0.0, 1.0 - 2.0 * b));
    double prev = compute_F0(a, b, 400, 1600);
    for (int d : {800, 1600}) {
      const double f = compute_F0(a, b, d, 4 * d);
      worst_ratio = std::max(worst_ratio, std::abs(f / prev / expect - 1.0));
      prev = f;
    }
    const int n = 200, d = 100, v = 400;
    double mc = 0.0;
    for (int i = 0; i < n; ++i) mc += spectral_data(generate_instance(a, b, d, v, 500 + i)).p_inf / n;
    const double f0 = compute_F0(a, b, d, v);
    std::printf("  (%.1f,%.1f) F0(100) %.5g  MC p_inf %.5g\n", a, b, f0, mc);
    worst_mc = std::max(worst_mc, std::abs(f0 / mc - 1.0));
  }
  return {worst_ratio < 0.1 && worst_mc < 0.1,
          "worst doubling-ratio rel err " + fmt("%.4f", worst_ratio) + ", worst F0 vs MC rel err " +
              fmt("%.4f", worst_mc) + " (tol 0.1 each)"};
}

// 8. Volterra oracle vs implicit Euler on a 4-mode toy spectrum.
Outcome criterion8() {
  Spectrum spec;
  spec.lambdas = Eigen::Vector4d(1.0, 0.3, 0.1, 0.03);
  spec.rho0 = Eigen::Vector4d(1.0, 0.8, 0.6, 0.4);
  spec.p_inf = 0.01;
  const double tr = spec.lambdas.sum();
  const InstanceSummary sm{4, 16, tr};
  double worst = 0.0;
  for (Preset p : {Preset::sgd, Preset::dana_constant}) {
    ScheduleSet s = build_preset(p, 1.0, 0.5, sm, {{"gamma2", 0.25 / tr}});
    const double T = 1e3;
    const VolterraResult vr = volterra_oracle(spec, s, T, 1024);
    OdeOptions o;
    o.h = 2e-5;
    o.output_times = vr.curve.times;
    const LossCurve ode = integrate(spec, OdeVariant::simplified, s, T, o);
    const double e = max_rel_err(vr.curve, ode, 0.0, T);
    std::printf("  %-14s volterra residual %.2e  max rel diff %.2e\n", preset_name(p).c_str(), vr.residual, e);
    worst = std::max(worst, e);
  }
  return {worst < 1e-3, "worst max rel diff " + fmt("%.2e", worst) + " (tol 1e-3)"};
}

// 9. Theory tables: continuity across splits, exponent sum, DANA-decaying dominance.
Outcome criterion9() {
  // Jump across alpha = split at fixed beta, extrapolated to zero offset (linear in the offset).
  auto jump = [](TheoryAlgo algo, double split, double beta) {
    auto j = [&](double e) {
      return compute_optimal_exponents(algo, split + e, beta).eta - compute_optimal_exponents(algo, split - e, beta).eta;
    };
    const double e = 1e-5;
    return std::abs(2.0 * j(e / 2.0) - j(e));
  };
  double worst_jump = 0.0;
  for (double beta : {0.55, 0.6, 0.7}) worst_jump = std::max(worst_jump, jump(TheoryAlgo::dana_constant, kDanaConstantSplit, beta));
  for (double beta : {0.8, 1.0, 1.2}) worst_jump = std::max(worst_jump, jump(TheoryAlgo::dana_decaying, kDanaDecayingSplit, beta));
  for (double beta : {1.0, 1.5, 2.0}) worst_jump = std::max(worst_jump, jump(TheoryAlgo::dana_constant, kDanaConstantSplit, beta));
  for (double beta : {1.5, 2.0, 3.0}) worst_jump = std::max(worst_jump, jump(TheoryAlgo::dana_decaying, kDanaDecayingSplit, beta));

  double worst_sum = 0.0;
  int violations = 0, checked = 0;
  for (int i = 0; i < 20; ++i) {
    for (int k = 0; k < 20; ++k) {
      const double a = 0.5 + 0.0123 + i * 0.1, b = 0.05 + 0.0071 + k * 0.1;
      for (TheoryAlgo algo : {TheoryAlgo::sgd, TheoryAlgo::dana_constant, TheoryAlgo::dana_decaying}) {
        const ExponentPrediction e = compute_optimal_exponents(algo, a, b);
        worst_sum = std::max(worst_sum, std::abs(e.xi + e.zeta - 1.0));
      }
      const double es = compute_optimal_exponents(TheoryAlgo::sgd, a, b).eta;
      const double ed = compute_optimal_exponents(TheoryAlgo::dana_decaying, a, b).eta;
      ++checked;
      if (ed < es - 1e-12) ++violations;
    }
  }
  const bool ok = worst_jump < 1e-9 && worst_sum < 1e-12 && violations == 0;
  return {ok, "worst extrapolated eta jump " + fmt("%.2e", worst_jump) + ", worst |xi+zeta-1| " +
                  fmt("%.1e", worst_sum) + ", dominance violations " + std::to_string(violations) + "/" +
                  std::to_string(checked)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                  criterion6, criterion7, criterion8, criterion9};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (int k = 1; k <= static_cast<int>(all.size()); ++k) {
    if (!pick.empty() && !pick.count(k)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s  %s  [%.1fs]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
