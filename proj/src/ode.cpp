#include "plrf/ode.hpp"

#include <algorithm>
#include <cmath>

#include "plrf/error.hpp"

namespace plrf {

OdeVariant parse_variant(const std::string& name) {
  if (name == "simplified") return OdeVariant::simplified;
  if (name == "exact") return OdeVariant::exact;
  if (name == "coinflip" || name == "coin-flip") return OdeVariant::coinflip;
  throw ConfigError("unknown ODE variant '" + name + "' (expected simplified, exact, coinflip)");
}

std::string variant_name(OdeVariant v) {
  switch (v) {
    case OdeVariant::simplified: return "simplified";
    case OdeVariant::exact: return "exact";
    case OdeVariant::coinflip: return "coinflip";
  }
  return "unknown";
}

Spectrum to_spectrum(const SpectralData& s) { return Spectrum{s.lambdas, s.rho0, s.p_inf, {}}; }

OmegaG omega_and_g(OdeVariant variant, const Rates& r, double lambda, int batch) {
  const double g1 = r.gamma1, g2 = r.gamma2, g3 = r.gamma3, D = r.Delta;
  const double B = batch;
  const double bl = B * lambda;
  const double bbl2 = B * (B + 1.0) * lambda * lambda;
  OmegaG out;
  Eigen::Matrix3d& W = out.omega;

  if (variant == OdeVariant::coinflip) {
    W << -2.0 * g2 * bl + bbl2 * g2 * g2, g3 * g3, 2.0 * g3 * (-1.0 + g2 * bl),
        g1 * g1 * bbl2, -2.0 * D + D * D, 2.0 * g1 * bl * (1.0 - D),
        g1 * bl, -g3, -D - g2 * bl;
    out.dir << g2 * g2, g1 * g1, 0.0;
    return out;
  }

  W << -2.0 * g2 * bl, 0.0, -2.0 * g3,
      0.0, -2.0 * D, 2.0 * g1 * bl,
      g1 * bl, -g3, -D - g2 * bl;
  out.dir << g2 * g2, g1 * g1, 0.0;
  if (variant == OdeVariant::simplified) return out;

  // exact: second-order corrections
  Eigen::Matrix3d E;
  E << -2.0 * g1 * g3 * bl + (2.0 * g1 * g2 * g3 + g2 * g2 + g1 * g1 * g3 * g3) * bbl2,
      g3 * g3 * (1.0 - D) * (1.0 - D),
      2.0 * g3 * D + 2.0 * (g2 * g3 + g3 * g3 * g1) * (1.0 - D) * bl,
      //
      g1 * g1 * bbl2, D * D, -2.0 * g1 * D * bl,
      //
      -(g1 * g2 + g1 * g1 * g3) * bbl2, g3 * D * (2.0 - D),
      (g2 * D - 2.0 * (1.0 - D) * g1 * g3) * bl;
  W += E;
  out.dir << g2 * g2 + 2.0 * g1 * g2 * g3 + g1 * g1 * g3 * g3, g1 * g1, -g1 * g2 - g1 * g1 * g3;
  return out;
}

namespace {

using Recorder = std::function<void(double t, double P, const Eigen::Matrix3Xd& nu)>;

// Returns false when the run diverged; *t_div then holds the time.
bool run_ode(const Spectrum& spec, OdeVariant variant, const ScheduleSet& schedule, double T,
             const OdeOptions& opts, OdeTrace* trace, const std::vector<double>& outs,
             const Recorder& record, double* t_div) {
  const long n = spec.lambdas.size();
  if (n == 0) throw ConfigError("empty spectrum");
  if (spec.rho0.size() != n) throw ConfigError("spectrum lambdas/rho0 length mismatch");
  if (spec.counts.size() != 0 && spec.counts.size() != n)
    throw ConfigError("spectrum counts length mismatch");
  if (!(opts.h > 0.0)) throw ConfigError("ODE step h must be positive");
  for (long j = 0; j < n; ++j)
    if (spec.lambdas[j] < 0.0 || spec.rho0[j] < 0.0)
      throw ConfigError("spectrum weights and eigenvalues must be nonnegative");

  const int B = schedule.batch;
  Eigen::Matrix3Xd nu = Eigen::Matrix3Xd::Zero(3, n);
  nu.row(0) = spec.rho0.transpose();
  Eigen::Matrix3Xd a(3, n), c(3, n);
  double P = spec.initial_loss();
  double t = 0.0;
  std::size_t k = 0;
  while (k < outs.size() && outs[k] <= 0.0) record(outs[k++], P, nu);

  while (k < outs.size()) {
    const double target = outs[k];
    double hp = opts.h * (1.0 + t);
    bool clamped = false;
    if (t + hp >= target) {
      hp = target - t;
      clamped = true;
    }
    const Rates r = schedule.at(t);
    bool accepted = false;
    double Pn = 0.0;
    for (int halv = 0; halv <= opts.max_halvings; ++halv) {
      double Sa = 0.0, Sc = 0.0;
      bool ok = true;
      for (long j = 0; j < n && ok; ++j) {
        const double lam = spec.lambdas[j];
        OmegaG og = omega_and_g(variant, r, lam, B);
        Eigen::Matrix3d M = Eigen::Matrix3d::Identity() - hp * og.omega;
        Eigen::Matrix3d Minv;
        bool invertible = false;
        double det = 0.0;
        M.computeInverseAndDetWithCheck(Minv, det, invertible, 1e-14);
        if (!invertible) {
          ok = false;
          break;
        }
        a.col(j) = Minv * nu.col(j);
        if (opts.zero_forcing)
          c.col(j).setZero();
        else
          c.col(j) = Minv * (hp * lam * B * spec.count(j) * og.dir);
        Sa += lam * a(0, j);
        Sc += lam * c(0, j);
      }
      if (ok) {
        const double denom = 1.0 - Sc;
        if (!(denom > 0.0)) {
          *t_div = t;
          return false;
        }
        Pn = (spec.p_inf + Sa) / denom;
        if (!std::isfinite(Pn) || Pn > opts.divergence_threshold) {
          *t_div = t + hp;
          return false;
        }
        for (long j = 0; j < n; ++j) {
          a.col(j) += Pn * c.col(j);
          if (a(0, j) < -1e-10 || a(1, j) < -1e-10) {
            ok = false;
            break;
          }
        }
      }
      if (ok) {
        accepted = true;
        break;
      }
      if (trace) ++trace->rejected;
      hp *= 0.5;
      clamped = false;
    }
    if (!accepted)
      throw NumericalError("implicit Euler step rejected after " + std::to_string(opts.max_halvings) +
                           " halvings at t=" + std::to_string(t));
    if (trace) ++trace->steps;
    nu.swap(a);
    P = Pn;
    t = clamped ? target : t + hp;
    while (k < outs.size() && outs[k] <= t) record(outs[k++], P, nu);
  }
  return true;
}

LossCurve make_curve(const ScheduleSet& schedule, const std::string& source, const std::string& variant) {
  LossCurve c;
  c.meta.algorithm = schedule.name;
  c.meta.d = schedule.d;
  c.meta.batch = schedule.batch;
  c.meta.source = source;
  c.meta.variant = variant;
  c.meta.tags = schedule.tags;
  return c;
}

void push_point(LossCurve& c, double t, double P) {
  c.times.push_back(t);
  c.losses.push_back(P);
  c.stderrs.push_back(0.0);
  c.flops.push_back(t * c.meta.batch * c.meta.d);
}

}  // namespace

LossCurve integrate(const Spectrum& spec, OdeVariant variant, const ScheduleSet& schedule, double T,
                    const OdeOptions& opts, OdeTrace* trace) {
  const std::vector<double> outs = opts.output_times.empty() ? log_grid(T) : opts.output_times;
  if (!std::is_sorted(outs.begin(), outs.end()) || outs.empty())
    throw ConfigError("ODE output times must be nonempty and ascending");
  LossCurve curve = make_curve(schedule, "ode", variant_name(variant));
  double t_div = -1.0;
  bool ok = run_ode(spec, variant, schedule, T, opts, trace, outs,
                    [&](double t, double P, const Eigen::Matrix3Xd&) { push_point(curve, t, P); },
                    &t_div);
  if (!ok) {
    curve.diverged = true;
    curve.diverged_at = t_div;
  }
  return curve;
}

std::vector<Eigen::VectorXd> integrate_rho(const Spectrum& spec, OdeVariant variant,
                                           const ScheduleSet& schedule, double T,
                                           const OdeOptions& opts) {
  const std::vector<double> outs = opts.output_times.empty() ? log_grid(T) : opts.output_times;
  std::vector<Eigen::VectorXd> rows;
  double t_div = -1.0;
  run_ode(spec, variant, schedule, T, opts, nullptr, outs,
          [&](double, double, const Eigen::Matrix3Xd& nu) { rows.push_back(nu.row(0).transpose()); },
          &t_div);
  return rows;
}

namespace {

// Simplified-variant RK4 over [t0, t1] on three columns sharing Omega(t):
//   col 0: psi' = Omega psi                          (forcing transport)
//   col 1: x'   = Omega x + dir * p0 * (1 - u)        (convolution, known left value)
//   col 2: x'   = Omega x + dir * u                   (response to the unknown right value)
// with u = (t - t0)/(t1 - t0). Substeps are sized by ||Omega(t0)|| dt.
void rk4_block(Eigen::Matrix3d& X, double t0, double t1, double p0, double lam, const ScheduleSet& s) {
  const int B = s.batch;
  const double span = t1 - t0;
  auto f = [&](double t, const Eigen::Matrix3d& Y) -> Eigen::Matrix3d {
    const OmegaG og = omega_and_g(OdeVariant::simplified, s.at(t), lam, B);
    const double u = (t - t0) / span;
    Eigen::Matrix3d out = og.omega * Y;
    out.col(1) += og.dir * (p0 * (1.0 - u));
    out.col(2) += og.dir * u;
    return out;
  };
  const double norm =
      omega_and_g(OdeVariant::simplified, s.at(t0), lam, B).omega.cwiseAbs().rowwise().sum().maxCoeff();
  const int m = std::max(2, static_cast<int>(std::ceil(span * norm / 0.05)));
  const double dt = span / m;
  double t = t0;
  for (int i = 0; i < m; ++i) {
    const Eigen::Matrix3d k1 = f(t, X);
    const Eigen::Matrix3d k2 = f(t + 0.5 * dt, X + 0.5 * dt * k1);
    const Eigen::Matrix3d k3 = f(t + 0.5 * dt, X + 0.5 * dt * k2);
    const Eigen::Matrix3d k4 = f(t + dt, X + dt * k3);
    X += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
  }
}

struct VolterraSolve {
  std::vector<double> t, F, P;
};

// Product integration with P piecewise linear on the grid: the kernel moments over each cell
// are integrated exactly (to RK4 accuracy) per mode, so the rule stays accurate when the kernel
// decays much faster than the grid spacing.
VolterraSolve volterra_solve(const Spectrum& spec, const ScheduleSet& s, double T, int n,
                             bool zero_kernel) {
  const double U = std::log1p(T);
  VolterraSolve out;
  out.t.resize(n + 1);
  for (int i = 0; i <= n; ++i) out.t[i] = std::expm1(U * i / n);
  out.t[n] = T;
  const auto& t = out.t;
  const long dn = spec.lambdas.size();
  const int B = s.batch;

  std::vector<Eigen::Vector3d> psi(dn), x(dn, Eigen::Vector3d::Zero());
  double F0 = spec.p_inf;
  for (long j = 0; j < dn; ++j) {
    psi[j] = Eigen::Vector3d(spec.rho0[j], 0.0, 0.0);
    F0 += spec.lambdas[j] * spec.rho0[j];
  }
  out.F.assign(n + 1, spec.p_inf);
  out.P.assign(n + 1, 0.0);
  out.F[0] = out.P[0] = F0;

  for (int i = 1; i <= n; ++i) {
    double Fi = spec.p_inf, known = 0.0, self = 0.0;
    std::vector<Eigen::Vector3d> resp(dn);
    for (long j = 0; j < dn; ++j) {
      const double lam = spec.lambdas[j];
      Eigen::Matrix3d X;
      X.col(0) = psi[j];
      X.col(1) = x[j];
      X.col(2).setZero();
      rk4_block(X, t[i - 1], t[i], out.P[i - 1], lam, s);
      psi[j] = X.col(0);
      Fi += lam * psi[j][0];
      const double c = B * spec.count(j) * lam * lam;
      x[j] = X.col(1);
      resp[j] = X.col(2);
      known += c * x[j][0];
      self += c * resp[j][0];
    }
    if (zero_kernel) known = self = 0.0;
    const double denom = 1.0 - self;
    if (!(denom > 0.0)) throw NumericalError("Volterra diagonal weight non-positive; refine grid");
    out.F[i] = Fi;
    out.P[i] = (Fi + known) / denom;
    for (long j = 0; j < dn; ++j) x[j] += out.P[i] * resp[j];
  }
  return out;
}

}  // namespace

VolterraResult volterra_oracle(const Spectrum& spec, const ScheduleSet& schedule, double T, int n,
                               const VolterraOptions& opts) {
  if (n < 4 || n > 4096 || n % 2 != 0) throw ConfigError("Volterra grid n must be even and in [4, 4096]");
  if (!(T > 0.0)) throw ConfigError("Volterra horizon must be positive");
  VolterraSolve fine = volterra_solve(spec, schedule, T, n, opts.zero_kernel);
  VolterraSolve coarse = volterra_solve(spec, schedule, T, n / 2, opts.zero_kernel);
  double res = 0.0;
  for (int i = 0; i <= n / 2; ++i)
    res = std::max(res, std::abs(fine.P[2 * i] - coarse.P[i]) / std::abs(fine.P[2 * i]));

  VolterraResult out;
  out.residual = res;
  if (res > opts.tolerance)
    throw NumericalError("Volterra grid too coarse: refinement residual " + std::to_string(res) +
                         " exceeds " + std::to_string(opts.tolerance) + "; increase n");
  out.curve = make_curve(schedule, "volterra", "simplified");
  for (int i = 0; i <= n; ++i) push_point(out.curve, fine.t[i], fine.P[i]);
  out.forcing = fine.F;
  return out;
}

}  // namespace plrf
