#include "plrf/core.hpp"

#include <cmath>
#include <string>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "plrf/error.hpp"

namespace plrf {

double power_sum(double p, int n) {
  // smallest terms first
  double s = 0.0;
  for (int j = n; j >= 1; --j) s += std::pow(static_cast<double>(j), -p);
  return s;
}

Instance generate_instance(double alpha, double beta, int d, int v, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(2.0 * alpha + 2.0 * beta > 1.0))
    throw ConfigError("2*alpha + 2*beta must exceed 1 (target energy not summable)");
  if (d < 1) throw ConfigError("d must be at least 1");
  if (v <= d) throw ConfigError("v must be larger than d");

  Instance inst;
  inst.alpha = alpha;
  inst.beta = beta;
  inst.d = d;
  inst.v = v;
  inst.seed = seed;
  inst.D.resize(v);
  inst.b.resize(v);
  for (int j = 1; j <= v; ++j) {
    inst.D[j - 1] = std::pow(static_cast<double>(j), -2.0 * alpha);
    inst.b[j - 1] = std::pow(static_cast<double>(j), -beta);
  }

  boost::random::mt19937_64 gen(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  inst.W.resize(v, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < v; ++r) inst.W(r, c) = normal(gen);
  return inst;
}

double population_risk(const Instance& inst, const Eigen::VectorXd& theta) {
  if (theta.size() != inst.d)
    throw ConfigError("theta has length " + std::to_string(theta.size()) + ", expected " +
                      std::to_string(inst.d));
  Eigen::VectorXd r = inst.W * theta - inst.b;
  return r.cwiseProduct(inst.D).dot(r);
}

SpectralData spectral_data(const Instance& inst) {
  Eigen::VectorXd sqrtD = inst.D.cwiseSqrt();
  Eigen::MatrixXd A = sqrtD.asDiagonal() * inst.W;
  Eigen::VectorXd bt = sqrtD.cwiseProduct(inst.b);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success)
    throw NumericalError("SVD of D^{1/2} W failed; try another seed");

  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::MatrixXd& U = svd.matrixU();
  Eigen::VectorXd proj = U.transpose() * bt;

  SpectralData out;
  out.lambdas = s.array().square();
  if (out.lambdas.size() != inst.d || out.lambdas.minCoeff() <= 0.0)
    throw NumericalError("D^{1/2} W is rank deficient; try another seed");
  out.rho0 = proj.array().square() / out.lambdas.array();
  out.p_inf = (bt - U * proj).squaredNorm();
  out.trace_D = inst.D.sum();
  return out;
}

}  // namespace plrf
