#include "plrf/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plrf/error.hpp"

namespace plrf {

namespace {

std::vector<const LossCurve*> usable(const std::vector<LossCurve>& curves) {
  std::vector<const LossCurve*> out;
  for (const auto& c : curves)
    if (!c.diverged && c.size() >= 2) out.push_back(&c);
  std::sort(out.begin(), out.end(), [](const LossCurve* a, const LossCurve* b) { return a->meta.d < b->meta.d; });
  return out;
}

double min_positive_flops(const LossCurve& c) {
  for (double f : c.flops)
    if (f > 0.0) return f;
  throw ConfigError("curve has no positive flops");
}

double loss_at_flops(const LossCurve& c, double f) {
  return c.loss_at(f / (static_cast<double>(c.meta.batch) * c.meta.d));
}

// Running median of log-loss over the curve's own eval points.
LossCurve smoothed(const LossCurve& c, int width) {
  LossCurve s = c;
  if (width <= 1) return s;
  const int n = static_cast<int>(c.size()), h = width / 2;
  std::vector<double> win;
  for (int i = 0; i < n; ++i) {
    win.clear();
    for (int k = std::max(0, i - h); k <= std::min(n - 1, i + h); ++k) win.push_back(c.losses[k]);
    std::nth_element(win.begin(), win.begin() + win.size() / 2, win.end());
    s.losses[i] = win[win.size() / 2];
  }
  return s;
}

}  // namespace

std::vector<EnvelopePoint> envelope(const std::vector<LossCurve>& curves, int n_slices) {
  auto cs = usable(curves);
  if (cs.size() < 2) throw ConfigError("envelope needs at least two non-diverged curves");
  if (n_slices < 2) throw ConfigError("envelope needs at least two slices");
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (const LossCurve* c : cs) {
    lo = std::max(lo, min_positive_flops(*c));
    hi = std::min(hi, c->flops.back());
  }
  if (!(lo < hi)) throw ConfigError("curve flops supports do not overlap");
  std::vector<EnvelopePoint> out;
  for (int k = 0; k < n_slices; ++k) {
    const double f = lo * std::pow(hi / lo, static_cast<double>(k) / (n_slices - 1));
    EnvelopePoint p{f, std::numeric_limits<double>::infinity(), 0};
    for (const LossCurve* c : cs) {
      const double L = loss_at_flops(*c, f);
      if (L < p.best_loss) {
        p.best_loss = L;
        p.best_d = c->meta.d;
      }
    }
    out.push_back(p);
  }
  return out;
}

FitResult fit_power_law(const std::vector<std::pair<double, double>>& points,
                        std::optional<std::pair<double, double>> window) {
  std::vector<double> X, Y;
  for (const auto& [x, y] : points) {
    if (window && (x < window->first || x > window->second)) continue;
    if (!(x > 0.0) || !(y > 0.0)) throw ConfigError("power-law fit needs positive points");
    X.push_back(std::log(x));
    Y.push_back(std::log(y));
  }
  const int n = static_cast<int>(X.size());
  if (n < 3) throw ConfigError("power-law fit needs at least 3 points in the window, got " + std::to_string(n));
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += X[i];
    my += Y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
    syy += (Y[i] - my) * (Y[i] - my);
  }
  if (!(sxx > 1e-300)) throw ConfigError("power-law fit is degenerate: all x equal");
  FitResult r;
  r.exponent = sxy / sxx;
  r.prefactor = std::exp(my - r.exponent * mx);
  double ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = Y[i] - (my + r.exponent * (X[i] - mx));
    ssr += e * e;
  }
  r.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  r.n_points = n;
  r.window_lo = std::exp(*std::min_element(X.begin(), X.end()));
  r.window_hi = std::exp(*std::max_element(X.begin(), X.end()));
  return r;
}

std::optional<double> crossover_flops(const LossCurve& small_d, const LossCurve& large_d, int width) {
  const LossCurve a = smoothed(small_d, width), b = smoothed(large_d, width);
  const double lo = std::max(min_positive_flops(a), min_positive_flops(b));
  const double hi = std::min(a.flops.back(), b.flops.back());
  if (!(lo < hi)) return std::nullopt;
  const int n = 2000;
  bool above = false;
  double prev_f = lo, prev_gap = 0.0;
  for (int k = 0; k < n; ++k) {
    const double f = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
    const double gap = std::log(loss_at_flops(b, f)) - std::log(loss_at_flops(a, f));
    if (gap > 0.0) {
      above = true;
    } else if (above) {
      // log-linear interpolation of the sign change
      const double w = prev_gap / (prev_gap - gap);
      return std::exp(std::log(prev_f) + w * (std::log(f) - std::log(prev_f)));
    }
    prev_f = f;
    prev_gap = gap;
  }
  return std::nullopt;
}

Approach1Result approach1(const std::vector<LossCurve>& curves, const WindowPolicy& policy) {
  auto cs = usable(curves);
  if (cs.size() < 4) throw ConfigError("Approach 1 needs at least 4 non-diverged curves");
  std::pair<double, double> window;
  if (policy.manual) {
    window = *policy.manual;
  } else {
    auto lo = crossover_flops(*cs[0], *cs[1], policy.median_width);
    std::optional<double> hi;
    for (std::size_t k = cs.size() - 1; k >= 1 && !hi; --k)
      hi = crossover_flops(*cs[k - 1], *cs[k], policy.median_width);
    if (!lo || !hi || !(*hi > *lo))
      throw ConfigError("no usable crossovers found for the Approach 1 window; pass a manual window");
    window = {*lo, *hi};
  }

  Approach1Result out;
  out.envelope = envelope(curves, policy.n_slices);
  std::vector<std::pair<double, double>> lp, dp;
  for (const auto& p : out.envelope) {
    lp.push_back({p.flops, p.best_loss});
    dp.push_back({p.flops, static_cast<double>(p.best_d)});
  }
  out.loss = fit_power_law(lp, window);
  out.params = fit_power_law(dp, window);
  out.eta_hat = -out.loss.exponent;
  out.xi_hat = out.params.exponent;
  out.data_exponent = 1.0 - out.xi_hat;
  out.loss.window_lo = out.params.window_lo = window.first;
  out.loss.window_hi = out.params.window_hi = window.second;
  return out;
}

}  // namespace plrf
