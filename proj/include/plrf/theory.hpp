#pragma once

#include <string>

#include "plrf/schedules.hpp"

namespace plrf {

// Algorithms with a proven scaling law.
enum class TheoryAlgo { sgd, sgd_m, dana_constant, dana_decaying };

TheoryAlgo parse_theory_algo(const std::string& name);
std::string theory_algo_name(TheoryAlgo a);

struct PhaseLabel {
  std::string phase;  // Ia Ib Ic II IIa IIb III IIIa IIIb IVa IVb
  std::string algorithm;
  double boundary_distance = 0.0;  // to the nearest critical line relevant at (alpha, beta)
  bool kernel_available = true;    // false for alpha <= 1/4
};

// Critical-line constants.
inline constexpr double kIvBoundary = 0.29289321881345247;      // (2 - sqrt 2)/2
inline constexpr double kDanaConstantSplit = 0.75;
inline constexpr double kDanaDecayingSplit = 1.3090169943749475;  // (3 + sqrt 5)/4

// Throws ConfigError within 1e-9 of a critical line or when 2a + 2b <= 1.
PhaseLabel classify_phase(double alpha, double beta, TheoryAlgo algo);

// theta(t): 1 + 2 gamma2 B t (+ (int_0^t sqrt(gamma3 B))^2 for DANA). For Schedule-Free and
// AcSGD families gamma1*gamma3 plays the role of gamma3 (conjectural).
double theta_timechange(const ScheduleSet& s, double t);

struct LossTerms {
  double F_pp = 0.0;
  double F_ac = 0.0;
  double F_0 = 0.0;
  double K_term = 0.0;
  double total = 0.0;
  bool kernel_available = true;
};

// Order-only shapes with unit constants.
LossTerms loss_asymptotics(double alpha, double beta, double t, const ScheduleSet& s);

struct ExponentPrediction {
  std::string phase;
  std::string algorithm;
  double eta = 0.0;   // P* ~ f^{-eta}
  double xi = 0.0;    // d* ~ f^{xi}
  double zeta = 0.0;  // 1 - xi
  std::string tradeoff;
  bool conjectured = false;
};

ExponentPrediction compute_optimal_exponents(TheoryAlgo algo, double alpha, double beta);

// Conjectured exponents for a general DANA-class schedule gamma2 ~ d^{-k1},
// gamma3 ~ d^{-k2} (1+t)^{-k3}, from a direct min-max over the order-only loss terms.
ExponentPrediction conjectured_exponents(double alpha, double beta, double kappa1, double kappa2,
                                         double kappa3);

struct OutscalingVerdict {
  bool dana_constant_outscales = false;
  bool dana_decaying_outscales = false;
};

OutscalingVerdict outscaling_verdict(double alpha, double beta, double ell);

}  // namespace plrf
