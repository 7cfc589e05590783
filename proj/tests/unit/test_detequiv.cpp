#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "plrf/core.hpp"
#include "plrf/detequiv.hpp"
#include "plrf/ode.hpp"
#include "plrf/schedules.hpp"

using namespace plrf;

TEST(Resolvent, ScalarCaseIsQuadraticRoot) {
  // d = v = 1: m (1 + 1/(m - z)) = 1  <=>  m^2 - m z + z = 0
  for (cplx z : {cplx(0.5, 0.1), cplx(2.0, 0.3), cplx(5.0, 1e-3)}) {
    const ResolventSolution r = solve_m(0.7, 1, 1, {z});
    ASSERT_EQ(r.size(), 1u);
    const cplx s = std::sqrt(z * z - 4.0 * z);
    cplx m = (z - s) / 2.0;
    if (m.imag() > 0) m = (z + s) / 2.0;
    EXPECT_LT(std::abs(r.m[0] - m), 1e-10) << z;
    EXPECT_LE(r.m[0].imag(), 0.0);
  }
}

TEST(Resolvent, RealFixedPointAboveSpectrum) {
  const ResolventSolution r = solve_m(1.0, 2000, 8000, {cplx(2.0, 1e-6)});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r.m[0].real(), 1.0, 0.01);
  EXPECT_LT(std::abs(r.m[0].imag()), 1e-6);
}

TEST(Resolvent, ResidualsAndSignOnGrid) {
  const int d = 200, v = 800;
  const auto z = make_z_grid(1.0, d, GridOptions{400});
  const ResolventSolution r = solve_m(1.0, d, v, z);
  EXPECT_TRUE(r.dropped_x.empty());
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_LT(fixed_point_residual(1.0, d, v, r.z[i], r.m[i]), 1e-10);
    EXPECT_LE(r.m[i].imag(), 1e-12);
  }
}

TEST(Kappa, SolvesIntegralEquation) {
  for (double alpha : {0.6, 1.0, 1.5}) {
    for (double ratio : {2.0, 4.0}) {
      const double k = solve_kappa(alpha, ratio);
      const double I = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double u) { return k / (k + std::pow(u, 2 * alpha)); }, 0.0, ratio, 15, 1e-14);
      EXPECT_NEAR(I, 1.0, 1e-10) << alpha << " " << ratio;
    }
  }
}

TEST(F0, DoublingRatio) {
  const double r1 = compute_F0(1.0, 0.7, 800, 3200) / compute_F0(1.0, 0.7, 400, 1600);
  const double r2 = compute_F0(1.0, 0.7, 1600, 6400) / compute_F0(1.0, 0.7, 800, 3200);
  EXPECT_NEAR(r1 / 0.25, 1.0, 0.1);
  EXPECT_NEAR(r2 / 0.25, 1.0, 0.1);
}

TEST(F0, MatchesMonteCarloIrreducibleLoss) {
  double acc = 0;
  const int n = 20;
  for (int s = 0; s < n; ++s) acc += spectral_data(generate_instance(1.0, 1.0, 100, 400, 500 + s)).p_inf;
  EXPECT_NEAR(compute_F0(1.0, 1.0, 100, 400) / (acc / n), 1.0, 0.1);
}

class Measures : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { de_ = new DetEquiv(det_equiv_pipeline(1.0, 0.7, 200, 800)); }
  static void TearDownTestSuite() { delete de_; }
  static DetEquiv* de_;
};
DetEquiv* Measures::de_ = nullptr;

TEST_F(Measures, MuFMassMatchesTargetEnergy) {
  EXPECT_NEAR(de_->muF.total_mass() / initial_risk(1.0, 0.7, 800), 1.0, 0.05);
}

TEST_F(Measures, NonNegativeMasses) {
  for (double m : de_->muF.masses) EXPECT_GE(m, 0.0);
  for (double m : de_->muK.masses) EXPECT_GE(m, 0.0);
}

TEST_F(Measures, MuKNegligibleNearZero) {
  double tot = 0, left = 0;
  const double cut = 0.5 * std::pow(200.0, -2.0);
  for (std::size_t k = 0; k < de_->muK.x.size(); ++k) {
    tot += de_->muK.masses[k];
    if (de_->muK.hi[k] <= cut) left += de_->muK.masses[k];
  }
  EXPECT_LT(left, 1e-6 * tot);
}

TEST_F(Measures, SpectrumConservesBulkMass) {
  const Spectrum& s = de_->spectrum;
  EXPECT_NEAR(s.lambdas.dot(s.rho0), de_->muF.bulk_mass(), 1e-12 * de_->muF.bulk_mass());
  EXPECT_DOUBLE_EQ(s.p_inf, de_->muF.atom_at_zero);
}

TEST(DeterministicSpectrum, TracksInstanceAverage) {
  const int d = 50, v = 200;
  const ScheduleSet s = build_preset(Preset::sgd, 1.0, 0.7, {d, v, trace_D(1.0, v)});
  const LossCurve det = integrate(det_equiv_pipeline(1.0, 0.7, d, v).spectrum, OdeVariant::simplified, s, 1e5);
  std::vector<double> avg(det.size(), 0.0);
  const int n = 50;
  OdeOptions o;
  o.output_times = det.times;
  for (int k = 0; k < n; ++k) {
    const LossCurve c = integrate(to_spectrum(spectral_data(generate_instance(1.0, 0.7, d, v, 900 + k))),
                                  OdeVariant::simplified, s, 1e5, o);
    for (std::size_t i = 0; i < c.size(); ++i) avg[i] += c.losses[i] / n;
  }
  for (std::size_t i = 0; i < det.size(); ++i) EXPECT_LT(std::abs(det.losses[i] / avg[i] - 1), 0.1) << det.times[i];
}
