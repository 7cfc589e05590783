#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plrf/core.hpp"
#include "plrf/curve.hpp"
#include "plrf/schedules.hpp"

namespace plrf {

enum class OdeVariant { simplified, exact, coinflip };

OdeVariant parse_variant(const std::string& name);
std::string variant_name(OdeVariant v);

// Spectrum the ODE runs on: eigenvalues, rho_j^2(0) weights and the irreducible loss.
// Empirical (from spectral_data) or a deterministic quadrature (from det-equiv).
// Each node may stand for several modes: counts[j] multiplies the noise (kernel) coupling of node j
// and rho0[j] is the aggregate over those modes. Empty counts means one mode per node.
struct Spectrum {
  Eigen::VectorXd lambdas;
  Eigen::VectorXd rho0;
  double p_inf = 0.0;
  Eigen::VectorXd counts;

  double initial_loss() const { return p_inf + lambdas.dot(rho0); }
  double count(long j) const { return counts.size() == 0 ? 1.0 : counts[j]; }
};

Spectrum to_spectrum(const SpectralData& s);

// Per-eigenvalue system for nu = (rho^2, xi^2, chi):  d nu/dt = Omega nu + lambda B P(t) dir.
struct OmegaG {
  Eigen::Matrix3d omega;
  Eigen::Vector3d dir;
};

OmegaG omega_and_g(OdeVariant variant, const Rates& r, double lambda, int batch);

struct OdeOptions {
  double h = 1e-2;                 // step in log(1+t)
  int max_halvings = 20;
  double divergence_threshold = 1e12;
  std::vector<double> output_times;  // empty -> log_grid(T)
  bool zero_forcing = false;       // test hook: drop the lambda B P dir term
};

struct OdeTrace {
  long steps = 0;
  long rejected = 0;
};

LossCurve integrate(const Spectrum& spec, OdeVariant variant, const ScheduleSet& schedule, double T,
                    const OdeOptions& opts = {}, OdeTrace* trace = nullptr);

// Per-eigenvalue rho_j^2 at the output times (used by tests on single modes).
std::vector<Eigen::VectorXd> integrate_rho(const Spectrum& spec, OdeVariant variant,
                                           const ScheduleSet& schedule, double T,
                                           const OdeOptions& opts = {});

struct VolterraOptions {
  bool zero_kernel = false;     // test hook: K == 0 so P == F
  double tolerance = 1e-3;      // grid-refinement residual gate
};

struct VolterraResult {
  LossCurve curve;
  std::vector<double> forcing;  // F(t) on the grid
  double residual = 0.0;        // max rel. change between grids n/2 and n
};

// Solves P(t) = F(t) + int_0^t K_s(t) P(s) ds with the simplified-variant kernel.
// Grid: n+1 points uniform in log(1+t) over [0, T]. n <= 4096 and even.
VolterraResult volterra_oracle(const Spectrum& spec, const ScheduleSet& schedule, double T, int n,
                               const VolterraOptions& opts = {});

}  // namespace plrf
