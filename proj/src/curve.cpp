#include "plrf/curve.hpp"

#include <algorithm>
#include <cmath>

#include "plrf/error.hpp"

namespace plrf {

double LossCurve::loss_at(double t) const {
  if (times.empty()) throw ConfigError("loss_at on an empty curve");
  if (t <= times.front()) return losses.front();
  if (t >= times.back()) return losses.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times.begin());
  const double x0 = std::log1p(times[i - 1]), x1 = std::log1p(times[i]);
  const double y0 = std::log(losses[i - 1]), y1 = std::log(losses[i]);
  const double w = (std::log1p(t) - x0) / (x1 - x0);
  return std::exp(y0 + w * (y1 - y0));
}

std::vector<double> log_grid(double T, int per_decade, int cap) {
  if (!(T >= 1.0)) throw ConfigError("horizon must be at least 1");
  if (per_decade < 1 || cap < 3) throw ConfigError("grid density must be positive");
  const double decades = std::max(std::log10(T), 1e-9);
  const int per = std::max(1, std::min(per_decade, static_cast<int>((cap - 2) / decades)));
  std::vector<double> g{0.0};
  const int n = static_cast<int>(std::ceil(decades * per));
  for (int i = 0; i <= n; ++i) {
    double t = std::round(std::pow(10.0, static_cast<double>(i) / per));
    if (t > T) break;
    if (t > g.back()) g.push_back(t);
  }
  if (g.back() < T) g.push_back(std::floor(T));
  return g;
}

}  // namespace plrf
