#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "plrf/ode.hpp"

namespace plrf {

using cplx = std::complex<double>;

// Fixed point m = 1 / (1 + (1/d) sum_{j<=v} a_j / (a_j m - z)), a_j = j^{-2 alpha}, Im m <= 0.
struct ResolventSolution {
  double alpha = 0.0;
  int d = 0;
  int v = 0;
  std::vector<cplx> z;
  std::vector<cplx> m;
  std::vector<double> residuals;
  std::vector<int> iterations;
  std::vector<double> dropped_x;  // grid points where Newton did not converge

  std::size_t size() const { return z.size(); }
};

struct GridOptions {
  int points = 2000;
  double lower_factor = 0.1;  // x_min = lower_factor * d^{-2 alpha}
  double upper = 0.0;         // 0: max(1.2, 1 + 5/sqrt(d)), wide enough for the top mode at small d
  double eta_constant = 0.01;  // C in eta(x)
};

double grid_upper(int d, const GridOptions& opts);

// Log-spaced x grid with eta(x) = C max{x^{1+1/(2a)}, (pi/(2a)) x^{1-1/(2a)} / d}.
std::vector<cplx> make_z_grid(double alpha, int d, const GridOptions& opts = {});

ResolventSolution solve_m(double alpha, int d, int v, const std::vector<cplx>& z_grid);

// Fixed-point map residual |m - 1/(1+S(m))| (exposed for tests).
double fixed_point_residual(double alpha, int d, int v, cplx z, cplx m);

enum class MeasureKind { F, K };

struct SpectralMeasure {
  MeasureKind kind = MeasureKind::F;
  std::vector<double> x;        // ascending nodes
  std::vector<double> lo, hi;   // cell edges
  std::vector<double> density;
  std::vector<double> masses;
  double atom_at_zero = 0.0;

  double bulk_mass() const;
  double total_mass() const { return bulk_mass() + atom_at_zero; }
};

std::pair<SpectralMeasure, SpectralMeasure> build_measures(const ResolventSolution& res, double alpha,
                                                           double beta, int d, int v);

// kappa solving int_0^{v/d} kappa / (kappa + u^{2 alpha}) du = 1.
double solve_kappa(double alpha, double ratio);
double compute_F0(double alpha, double beta, int d, int v);

// Quadrature spectrum for the ODE: lambda_k = x_k, aggregate rho^2 = muF mass / x_k,
// mode counts = muK mass / x_k^2 (muK weights each mode by lambda^2), p_inf = muF atom.
Spectrum deterministic_spectrum(const SpectralMeasure& muF, const SpectralMeasure& muK, double alpha);

// Convenience: grid, fixed point, measures and spectrum in one call.
struct DetEquiv {
  ResolventSolution resolvent;
  SpectralMeasure muF, muK;
  Spectrum spectrum;
};
DetEquiv det_equiv_pipeline(double alpha, double beta, int d, int v, const GridOptions& opts = {});

}  // namespace plrf
