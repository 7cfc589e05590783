#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "plrf/error.hpp"
#include "plrf/fit.hpp"
#include "plrf/schedules.hpp"
#include "plrf/theory.hpp"

using namespace plrf;

namespace {

// Curve with loss(flops) = f(flops) sampled at log-spaced iterations.
LossCurve synthetic(int d, const std::function<double(double, double)>& loss, double T = 1e8) {
  LossCurve c;
  c.meta.d = d;
  c.meta.algorithm = "synthetic";
  for (double t : log_grid(T, 100)) {
    if (t < 1) continue;
    c.times.push_back(t);
    c.flops.push_back(t * d);
    c.losses.push_back(loss(t, d));
    c.stderrs.push_back(0.0);
  }
  return c;
}

}  // namespace

TEST(PowerLaw, ExactFit) {
  std::vector<std::pair<double, double>> pts;
  for (double x = 1; x < 1e4; x *= 1.7) pts.push_back({x, 2 * std::pow(x, -0.5)});
  const FitResult f = fit_power_law(pts);
  EXPECT_NEAR(f.exponent, -0.5, 1e-12);
  EXPECT_NEAR(f.prefactor, 2.0, 1e-10);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(PowerLaw, Constant) {
  std::vector<std::pair<double, double>> pts;
  for (double x = 1; x < 100; x *= 2) pts.push_back({x, 3.0});
  EXPECT_NEAR(fit_power_law(pts).exponent, 0.0, 1e-14);
}

TEST(PowerLaw, Noisy) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 200; ++i) {
    const double x = std::pow(10.0, i / 50.0);
    pts.push_back({x, std::pow(x, -0.75) * (1 + 0.01 * n01(rng))});
  }
  EXPECT_LT(std::abs(fit_power_law(pts).exponent + 0.75), 0.01);
}

TEST(PowerLaw, Errors) {
  EXPECT_THROW(fit_power_law({{1, 1}, {2, 2}}), ConfigError);
  EXPECT_THROW(fit_power_law({{2, 1}, {2, 2}, {2, 3}}), ConfigError);
  EXPECT_THROW(fit_power_law({{1, 1}, {2, -2}, {3, 3}}), ConfigError);
}

TEST(PowerLaw, ScaleInvarianceAndWindowStability) {
  std::vector<std::pair<double, double>> pts, scaled;
  for (double x = 1; x < 1e6; x *= 1.3) {
    pts.push_back({x, 5 * std::pow(x, -0.4)});
    scaled.push_back({x, 0.01 * 5 * std::pow(x, -0.4)});
  }
  const double e0 = fit_power_law(pts).exponent;
  EXPECT_NEAR(fit_power_law(scaled).exponent, e0, 1e-12);
  EXPECT_NEAR(fit_power_law(pts, std::make_pair(1e2, 1e4)).exponent, e0, 1e-6);
}

TEST(Envelope, AnalyticCrossover) {
  LossCurve a, b;
  a.meta.d = 1;
  b.meta.d = 2;
  for (double f = 2; f <= 1e4; f *= 1.05) {
    for (LossCurve* c : {&a, &b}) {
      c->times.push_back(f / c->meta.d);
      c->flops.push_back(f);
    }
    a.losses.push_back(std::pow(f, -0.5));
    b.losses.push_back(2 * std::pow(f, -0.7));
  }
  const auto env = envelope({a, b}, 400);
  for (const auto& p : env) {
    if (p.flops < 30) EXPECT_EQ(p.best_d, 1) << p.flops;
    if (p.flops > 34) EXPECT_EQ(p.best_d, 2) << p.flops;
  }
  EXPECT_THROW(envelope({a}), ConfigError);
}

TEST(Envelope, DivergedCurvesExcluded) {
  LossCurve a = synthetic(10, [](double t, double) { return 1 / (1 + t); });
  LossCurve b = synthetic(20, [](double t, double) { return 1e-9 / (1 + t); });
  LossCurve c = synthetic(40, [](double t, double) { return 0.5 / (1 + t); });
  b.diverged = true;
  for (const auto& p : envelope({a, b, c})) EXPECT_NE(p.best_d, 20);
}

// Synthetic sweep built from the order-only loss terms (their max, so every piece is an exact
// power law) recovers the table exponents.
TEST(Approach1, RecoversTableExponentsOnSyntheticSweep) {
  const double alpha = 1.0, beta = 0.7;
  const double p = 1 / (2 * alpha);
  auto loss = [&](double t, double d) {
    const double th = 1 + t;  // SGD with unit constants
    return std::max({std::pow(th, -(2 * alpha + 2 * beta - 1) * p), std::pow(th, -1 + p) / d,
                     std::pow(d, -2 * alpha), std::pow(th, -2 + p)});
  };
  std::vector<LossCurve> curves;
  for (double d = 100; d <= 102400; d *= std::pow(2.0, 0.25))
    curves.push_back(synthetic(static_cast<int>(std::lround(d)), loss, 1e14));
  const ExponentPrediction th = compute_optimal_exponents(TheoryAlgo::sgd, alpha, beta);
  WindowPolicy w;
  w.manual = std::make_pair(1e6, 1e11);  // optimal d stays inside [100, 102400]
  w.n_slices = 400;
  const Approach1Result r = approach1(curves, w);
  EXPECT_NEAR(r.eta_hat, th.eta, 1e-3);
  EXPECT_NEAR(r.xi_hat, th.xi, 1e-3);
  EXPECT_DOUBLE_EQ(r.data_exponent, 1 - r.xi_hat);
}

TEST(Approach1, EnvelopeNonIncreasing) {
  std::vector<LossCurve> curves;
  for (int d : {100, 200, 400, 800})
    curves.push_back(synthetic(d, [](double t, double d) { return std::pow(1 + t, -0.7) + 1 / (d * d); }));
  const auto env = envelope(curves);
  for (std::size_t i = 1; i < env.size(); ++i) EXPECT_LE(env[i].best_loss, env[i - 1].best_loss * (1 + 1e-12));
}

TEST(Approach1, NeedsFourCurves) {
  std::vector<LossCurve> curves;
  for (int d : {100, 200, 400})
    curves.push_back(synthetic(d, [](double t, double d) { return std::pow(1 + t, -0.7) + 1 / (d * d); }));
  EXPECT_THROW(approach1(curves), ConfigError);
}

TEST(Crossover, FindsIntersection) {
  const LossCurve small = synthetic(100, [](double t, double d) { return std::pow(1 + t, -1.0) + 1 / (d * d); });
  const LossCurve large = synthetic(200, [](double t, double d) { return std::pow(1 + t, -1.0) + 1 / (d * d); });
  const auto f = crossover_flops(small, large);
  ASSERT_TRUE(f);
  EXPECT_GT(*f, 200.0);
}
