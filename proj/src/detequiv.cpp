#include "plrf/detequiv.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "plrf/core.hpp"
#include "plrf/error.hpp"

namespace plrf {

namespace {

std::vector<double> diag_entries(double alpha, int v) {
  std::vector<double> a(v);
  for (int j = 1; j <= v; ++j) a[j - 1] = std::pow(static_cast<double>(j), -2.0 * alpha);
  return a;
}

struct SEval {
  cplx S, dS;
};

// S(m) = (1/d) sum a_j/(a_j m - z) and its m-derivative.
SEval eval_S(const std::vector<double>& a, int d, cplx z, cplx m) {
  cplx S = 0.0, dS = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) {
    const cplx q = 1.0 / (*it * m - z);
    S += *it * q;
    dS -= (*it * *it) * q * q;
  }
  return {S / static_cast<double>(d), dS / static_cast<double>(d)};
}

cplx fixed_point_f(const std::vector<double>& a, int d, cplx z, cplx m, cplx* fprime) {
  SEval e = eval_S(a, d, z, m);
  const cplx onePlus = 1.0 + e.S;
  if (fprime) *fprime = 1.0 + e.dS / (onePlus * onePlus);
  return m - 1.0 / onePlus;
}

}  // namespace

double grid_upper(int d, const GridOptions& o) {
  return o.upper > 0.0 ? o.upper : std::max(1.2, 1.0 + 5.0 / std::sqrt(static_cast<double>(d)));
}

std::vector<cplx> make_z_grid(double alpha, int d, const GridOptions& o) {
  if (o.points < 2) throw ConfigError("det-equiv grid needs at least 2 points");
  if (!(o.eta_constant > 0.0)) throw ConfigError("eta constant must be positive");
  const double xmin = o.lower_factor * std::pow(static_cast<double>(d), -2.0 * alpha);
  const double upper = grid_upper(d, o);
  if (!(xmin < upper)) throw ConfigError("det-equiv grid lower bound exceeds upper bound");
  const double p = 1.0 / (2.0 * alpha);
  std::vector<cplx> z(o.points);
  for (int k = 0; k < o.points; ++k) {
    const double x = xmin * std::pow(upper / xmin, static_cast<double>(k) / (o.points - 1));
    const double eta = o.eta_constant *
                       std::max(std::pow(x, 1.0 + p), std::numbers::pi * p * std::pow(x, 1.0 - p) / d);
    z[k] = cplx(x, eta);
  }
  return z;
}

double fixed_point_residual(double alpha, int d, int v, cplx z, cplx m) {
  return std::abs(fixed_point_f(diag_entries(alpha, v), d, z, m, nullptr));
}

ResolventSolution solve_m(double alpha, int d, int v, const std::vector<cplx>& z_grid) {
  if (d < 1 || v < 1) throw ConfigError("solve_m needs d, v >= 1");
  for (const auto& z : z_grid)
    if (!(z.imag() > 0.0)) throw ConfigError("solve_m needs Im z > 0 on every grid point");

  const std::vector<double> a = diag_entries(alpha, v);
  // Process from the largest Re z downward, warm starting from the previous root.
  std::vector<std::size_t> order(z_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return z_grid[i].real() > z_grid[j].real(); });

  struct Pt {
    cplx z, m;
    double res;
    int it;
    bool ok;
  };
  std::vector<Pt> pts(z_grid.size());
  cplx m = 1.0;
  for (std::size_t idx : order) {
    const cplx z = z_grid[idx];
    cplx mk = m;
    cplx fp;
    cplx f = fixed_point_f(a, d, z, mk, &fp);
    double r = std::abs(f);
    int it = 0;
    for (; it < 200 && r >= 1e-12; ++it) {
      const cplx step = -f / fp;
      double lam = 1.0;
      bool moved = false;
      for (int h = 0; h < 60; ++h, lam *= 0.5) {
        cplx mn = mk + lam * step;
        if (mn.imag() > 0.0) continue;
        cplx fpn;
        cplx fn = fixed_point_f(a, d, z, mn, &fpn);
        if (std::abs(fn) < r) {
          mk = mn;
          f = fn;
          fp = fpn;
          r = std::abs(fn);
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    pts[idx] = {z, mk, r, it, r < 1e-10};
    if (pts[idx].ok) m = mk;
  }

  ResolventSolution out;
  out.alpha = alpha;
  out.d = d;
  out.v = v;
  for (const auto& p : pts) {
    if (!p.ok) {
      out.dropped_x.push_back(p.z.real());
      continue;
    }
    out.z.push_back(p.z);
    out.m.push_back(p.m);
    out.residuals.push_back(p.res);
    out.iterations.push_back(p.it);
  }
  return out;
}

double SpectralMeasure::bulk_mass() const {
  double s = 0.0;
  for (double w : masses) s += w;
  return s;
}

std::pair<SpectralMeasure, SpectralMeasure> build_measures(const ResolventSolution& res, double alpha,
                                                           double beta, int d, int v) {
  const std::size_t n = res.size();
  if (n < 2) throw NumericalError("det-equiv grid has fewer than two converged points");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return res.z[i].real() < res.z[j].real(); });

  std::vector<double> a = diag_entries(alpha, v);
  std::vector<double> w(v);
  for (int j = 1; j <= v; ++j) w[j - 1] = std::pow(static_cast<double>(j), -2.0 * alpha - 2.0 * beta);

  SpectralMeasure F, K;
  F.kind = MeasureKind::F;
  K.kind = MeasureKind::K;
  for (std::size_t i : order) {
    const cplx z = res.z[i], m = res.m[i];
    cplx s = 0.0;
    for (int j = v - 1; j >= 0; --j) s += w[j] / (a[j] * m - z);
    F.x.push_back(z.real());
    F.density.push_back(s.imag() / std::numbers::pi);
    K.density.push_back(-z.real() * d * m.imag() / std::numbers::pi);
  }
  K.x = F.x;

  const auto& x = F.x;
  for (std::size_t k = 0; k < n; ++k) {
    const double lo = k == 0 ? x[0] * std::sqrt(x[0] / x[1]) : std::sqrt(x[k - 1] * x[k]);
    const double hi = k + 1 == n ? x[k] * std::sqrt(x[k] / x[k - 1]) : std::sqrt(x[k] * x[k + 1]);
    F.lo.push_back(lo);
    F.hi.push_back(hi);
  }
  K.lo = F.lo;
  K.hi = F.hi;

  for (SpectralMeasure* mu : {&F, &K}) {
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) scale = std::max(scale, std::abs(mu->density[k]) * (mu->hi[k] - mu->lo[k]));
    for (std::size_t k = 0; k < n; ++k) {
      double mass = mu->density[k] * (mu->hi[k] - mu->lo[k]);
      if (mass < -1e-8 * std::max(scale, 1.0))
        throw NumericalError("negative cell mass at x=" + std::to_string(mu->x[k]) +
                             "; eta too small, refine the grid");
      if (mass < 0.0) {
        mass = 0.0;
        mu->density[k] = 0.0;
      }
      mu->masses.push_back(mass);
    }
  }
  F.atom_at_zero = compute_F0(alpha, beta, d, v);
  return {F, K};
}

double solve_kappa(double alpha, double ratio) {
  if (!(ratio > 1.0)) throw ConfigError("v/d must exceed 1");
  auto g = [&](double kappa) {
    auto f = [&](double u) { return kappa / (kappa + std::pow(u, 2.0 * alpha)); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, ratio, 20, 1e-14) - 1.0;
  };
  double lo = 1e-12, hi = 1e12;
  if (!(g(lo) < 0.0 && g(hi) > 0.0))
    throw NumericalError("kappa bracket [1e-12, 1e12] does not contain a root");
  for (int it = 0; it < 400 && hi / lo - 1.0 > 1e-13; ++it) {
    const double mid = std::sqrt(lo * hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

double compute_F0(double alpha, double beta, int d, int v) {
  if (!(2.0 * alpha + 2.0 * beta > 1.0)) throw ConfigError("2*alpha + 2*beta must exceed 1");
  const double kappa = solve_kappa(alpha, static_cast<double>(v) / d);
  const double dk = std::pow(static_cast<double>(d), 2.0 * alpha) * kappa;
  double s = 0.0;
  for (int j = v; j >= 1; --j) {
    const double jj = j;
    s += std::pow(jj, -2.0 * alpha - 2.0 * beta) / (1.0 + std::pow(jj, -2.0 * alpha) * dk);
  }
  return s;
}

Spectrum deterministic_spectrum(const SpectralMeasure& muF, const SpectralMeasure& muK, double) {
  if (muF.x.size() != muK.x.size()) throw ConfigError("muF and muK grids differ");
  std::vector<double> lam, rho, cnt;
  for (std::size_t k = 0; k < muF.x.size(); ++k) {
    if (muF.masses[k] <= 0.0 && muK.masses[k] <= 0.0) continue;
    lam.push_back(muF.x[k]);
    rho.push_back(muF.masses[k] / muF.x[k]);
    cnt.push_back(muK.masses[k] / (muK.x[k] * muK.x[k]));
  }
  if (lam.empty()) throw NumericalError("deterministic spectrum has an empty bulk");
  Spectrum s;
  s.lambdas = Eigen::Map<Eigen::VectorXd>(lam.data(), static_cast<long>(lam.size()));
  s.rho0 = Eigen::Map<Eigen::VectorXd>(rho.data(), static_cast<long>(rho.size()));
  s.counts = Eigen::Map<Eigen::VectorXd>(cnt.data(), static_cast<long>(cnt.size()));
  s.p_inf = muF.atom_at_zero;
  return s;
}

DetEquiv det_equiv_pipeline(double alpha, double beta, int d, int v, const GridOptions& opts) {
  DetEquiv out;
  out.resolvent = solve_m(alpha, d, v, make_z_grid(alpha, d, opts));
  auto [F, K] = build_measures(out.resolvent, alpha, beta, d, v);
  out.muF = std::move(F);
  out.muK = std::move(K);
  out.spectrum = deterministic_spectrum(out.muF, out.muK, alpha);
  return out;
}

}  // namespace plrf
