#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace plrf {

// Power-law random features problem:
//   x_j = j^{-alpha} z_j,  target b_j = j^{-beta},  W is v x d with N(0, 1/d) entries.
// Risk convention: P(theta) = (W theta - b)^T D (W theta - b), no 1/2 factor.
struct Instance {
  double alpha = 0.0;
  double beta = 0.0;
  int d = 0;
  int v = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd W;  // v x d
  Eigen::VectorXd D;  // j^{-2 alpha}
  Eigen::VectorXd b;  // j^{-beta}
};

struct SpectralData {
  Eigen::VectorXd lambdas;  // descending, length d
  Eigen::VectorXd rho0;     // rho_j^2(0)
  double p_inf = 0.0;
  double trace_D = 0.0;     // sum_{j<=v} j^{-2 alpha}
};

// Default hidden dimension for a given d.
inline int default_v(int d, double ratio = 4.0) { return static_cast<int>(ratio * d); }

Instance generate_instance(double alpha, double beta, int d, int v, std::uint64_t seed);

double population_risk(const Instance& inst, const Eigen::VectorXd& theta);

SpectralData spectral_data(const Instance& inst);

// sum_{j=1}^{n} j^{-p}
double power_sum(double p, int n);

inline double trace_D(double alpha, int v) { return power_sum(2.0 * alpha, v); }

// ||D^{1/2} b||^2 = sum_{j<=v} j^{-2alpha-2beta}
inline double initial_risk(double alpha, double beta, int v) {
  return power_sum(2.0 * alpha + 2.0 * beta, v);
}

}  // namespace plrf
