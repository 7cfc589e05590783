#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "plrf/core.hpp"
#include "plrf/error.hpp"
#include "plrf/schedules.hpp"
#include "plrf/theory.hpp"

using namespace plrf;

namespace {

// Brute-force compute-optimal exponents from the unit-constant loss terms, for 2 alpha > 1.
// log f = 1, log d = x, log t = 1 - x; the loss exponent is the max over terms.
std::pair<double, double> brute_force(TheoryAlgo algo, double a, double b) {
  const double p = 1.0 / (2.0 * a);
  auto log_theta = [&](double x) {
    const double tau = 1.0 - x;
    switch (algo) {
      case TheoryAlgo::dana_constant: return std::max(tau, 2.0 * tau - x);
      case TheoryAlgo::dana_decaying: return std::max(tau, (2.0 - p) * tau);
      default: return tau;
    }
  };
  auto worst = [&](double x) {
    const double th = log_theta(x);
    double w = -(2 * a + 2 * b - 1) * p * th;
    if (2 * b > 1) w = std::max(w, -x + (-1 + p) * th);
    w = std::max(w, (-2 * a + std::max(0.0, 1 - 2 * b)) * x);
    w = std::max(w, (-2 + p) * th);
    return w;
  };
  double best = 1e300, bx = 0;
  const int n = 400000;
  for (int i = 0; i <= n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double w = worst(x);
    if (w < best) {
      best = w;
      bx = x;
    }
  }
  return {-best, bx};
}

}  // namespace

TEST(Phase, ExamplesFromTables) {
  EXPECT_EQ(classify_phase(1.0, 0.4, TheoryAlgo::sgd).phase, "Ia");
  EXPECT_EQ(classify_phase(1.0, 1.4, TheoryAlgo::dana_decaying).phase, "IIIb");
  EXPECT_THROW(classify_phase(0.5, 0.5, TheoryAlgo::sgd), ConfigError);
  EXPECT_THROW(classify_phase(0.8, 0.8, TheoryAlgo::sgd), ConfigError);  // alpha == beta
  EXPECT_FALSE(classify_phase(0.2, 1.0, TheoryAlgo::sgd).kernel_available);
}

TEST(Exponents, TableEntries) {
  ExponentPrediction e = compute_optimal_exponents(TheoryAlgo::sgd, 1.0, 1.2);
  EXPECT_EQ(e.phase, "III");
  EXPECT_NEAR(e.eta, 0.75, 1e-12);
  EXPECT_NEAR(e.xi, 0.5, 1e-12);
  EXPECT_NEAR(e.zeta, 0.5, 1e-12);
  e = compute_optimal_exponents(TheoryAlgo::dana_decaying, 1.0, 1.2);
  EXPECT_EQ(e.phase, "IIIb");
  EXPECT_NEAR(e.eta, 0.9, 1e-12);
  EXPECT_NEAR(e.xi, 0.6, 1e-12);
  e = compute_optimal_exponents(TheoryAlgo::dana_decaying, 1.0, 0.4);
  EXPECT_NEAR(e.xi, 3.0 / 7.0, 1e-12);
  EXPECT_NEAR(e.eta, 1.8 * 3.0 / 7.0, 1e-12);
  e = compute_optimal_exponents(TheoryAlgo::sgd, 1.0, 0.7);
  EXPECT_EQ(e.phase, "II");
  EXPECT_NEAR(e.eta, 2.4 / 3.4, 1e-12);
  EXPECT_NEAR(e.xi, 0.7 / 1.7, 1e-12);
}

TEST(Exponents, SgdMomentumMatchesSgd) {
  for (double a : {0.4, 1.0, 1.6})
    for (double b : {0.3, 0.7, 1.3}) {
      if (2 * a + 2 * b <= 1 || std::abs(a - b) < 1e-6) continue;
      const auto s = compute_optimal_exponents(TheoryAlgo::sgd, a, b);
      const auto m = compute_optimal_exponents(TheoryAlgo::sgd_m, a, b);
      EXPECT_DOUBLE_EQ(s.eta, m.eta);
      EXPECT_DOUBLE_EQ(s.xi, m.xi);
    }
}

// Property: table exponents agree with a direct min-max over the loss terms.
TEST(Exponents, MatchBruteForceMinMax) {
  for (TheoryAlgo algo : {TheoryAlgo::sgd, TheoryAlgo::dana_constant, TheoryAlgo::dana_decaying}) {
    for (double a = 0.55; a < 2.5; a += 0.173) {
      for (double b = 0.32; b < 2.5; b += 0.151) {
        PhaseLabel ph;
        try {
          ph = classify_phase(a, b, algo);
        } catch (const ConfigError&) {
          continue;
        }
        if (ph.boundary_distance < 0.02 || ph.phase.rfind("IV", 0) == 0) continue;
        const auto e = compute_optimal_exponents(algo, a, b);
        const auto [eta, xi] = brute_force(algo, a, b);
        EXPECT_NEAR(e.eta, eta, 1e-4) << theory_algo_name(algo) << " " << ph.phase << " a=" << a << " b=" << b;
        EXPECT_NEAR(e.xi, xi, 1e-4) << theory_algo_name(algo) << " " << ph.phase << " a=" << a << " b=" << b;
      }
    }
  }
}

TEST(Exponents, DataPlusParamIsOne) {
  for (TheoryAlgo algo : {TheoryAlgo::sgd, TheoryAlgo::dana_constant, TheoryAlgo::dana_decaying})
    for (double a = 0.55; a < 2.0; a += 0.21)
      for (double b = 0.33; b < 2.0; b += 0.19) {
        try {
          const auto e = compute_optimal_exponents(algo, a, b);
          EXPECT_NEAR(e.xi + e.zeta, 1.0, 1e-15);
        } catch (const ConfigError&) {
        }
      }
}

TEST(Exponents, ContinuousAcrossSubPhaseSplit) {
  const double eps = 1e-7;
  const double a = kDanaConstantSplit;
  const double bII = 0.6;  // 2b > 1, b < a: phase II
  const double l = compute_optimal_exponents(TheoryAlgo::dana_constant, a - eps, bII).eta;
  const double r = compute_optimal_exponents(TheoryAlgo::dana_constant, a + eps, bII).eta;
  EXPECT_NEAR(l, r, 1e-5);
  const double c = kDanaDecayingSplit;
  const double l2 = compute_optimal_exponents(TheoryAlgo::dana_decaying, c - eps, 1.7).eta;
  const double r2 = compute_optimal_exponents(TheoryAlgo::dana_decaying, c + eps, 1.7).eta;
  EXPECT_NEAR(l2, r2, 1e-5);
}

TEST(Exponents, DanaDecayingDominatesSgd) {
  for (double a = 0.55; a < 2.5; a += 0.1)
    for (double b = 0.05; b < 2.5; b += 0.1) {
      try {
        const double s = compute_optimal_exponents(TheoryAlgo::sgd, a, b).eta;
        const double d = compute_optimal_exponents(TheoryAlgo::dana_decaying, a, b).eta;
        EXPECT_GE(d, s - 1e-12) << a << " " << b;
      } catch (const ConfigError&) {
      }
    }
}

TEST(TimeChange, Reductions) {
  const InstanceSummary sm{100, 400, power_sum(2.0, 400)};
  const ScheduleSet sgd = build_preset(Preset::sgd, 1.0, 0.7, sm);
  EXPECT_DOUBLE_EQ(theta_timechange(sgd, 50.0), 1.0 + 2.0 * sgd.gamma2 * 50.0);
  // DANA-constant: quadratic growth with coefficient gamma3 B once t >> d
  const ScheduleSet dc = build_preset(Preset::dana_constant, 1.0, 0.7, sm);
  const double g3 = dc.at(0).gamma3;
  const double t = 1e8;
  EXPECT_NEAR(theta_timechange(dc, t) / (g3 * t * t), 1.0, 1e-3);
  // DANA-decaying with unit constants: (int_0^t (1+s)^{-k/2} ds)^2 ~ t^{2 - k}
  const ScheduleSet dd = build_preset(Preset::dana_decaying, 1.0, 0.7, sm, {{"gamma3_tilde", 1.0}});
  const double r = theta_timechange(dd, 1e10) / theta_timechange(dd, 1e9);
  EXPECT_NEAR(std::log10(r), 1.5, 1e-3);
}

TEST(Asymptotics, LongTimeLimitIsIrreducible) {
  const InstanceSummary sm{100, 400, power_sum(2.0, 400)};
  const ScheduleSet s = build_preset(Preset::sgd, 1.0, 0.7, sm);
  const LossTerms L = loss_asymptotics(1.0, 0.7, 1e30, s);
  EXPECT_NEAR(L.total / std::pow(100.0, -2.0), 1.0, 1e-6);
  const LossTerms k = loss_asymptotics(0.2, 1.0, 10.0, build_preset(Preset::sgd, 0.2, 1.0, {100, 400, 10.0}));
  EXPECT_FALSE(k.kernel_available);
  EXPECT_EQ(k.K_term, 0.0);
}

TEST(Outscaling, Regimes) {
  auto v = outscaling_verdict(1.0, 0.7, 1.5);
  EXPECT_TRUE(v.dana_constant_outscales);
  EXPECT_TRUE(v.dana_decaying_outscales);
  v = outscaling_verdict(0.4, 0.7, 1.5);
  EXPECT_FALSE(v.dana_constant_outscales || v.dana_decaying_outscales);
  v = outscaling_verdict(1.0, 0.7, 2.5);
  EXPECT_FALSE(v.dana_constant_outscales || v.dana_decaying_outscales);
}
