#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "localest/kernels.hpp"
#include "localest/measurements.hpp"

namespace localest {

/// <f, e_k> for e_k(x) = sqrt(2) sin(k pi x), k = 1..k_max, f supported in [lo, hi].
Eigen::VectorXd sine_coefficients(const std::function<double(double)>& f, double lo, double hi,
                                  int k_max);

/// Constant-coefficient model A = theta Lap on (0, 1), B = sigma I, in the sine eigenbasis.
///
/// Column 2p of `coef` holds <probe_p, e_k>, column 2p + 1 holds <Lap probe_p, e_k>.
struct OracleModel {
  double theta = 1.0;
  double sigma = 1.0;
  int k_max = 0;
  std::vector<RescaledProbe> probes;
  Eigen::VectorXd lambda;  // theta pi^2 k^2
  Eigen::MatrixXd coef;
  double tail_ratio = 0.0;  // truncation tail over total, worst functional

  static constexpr int value(int probe) { return 2 * probe; }
  static constexpr int laplacian(int probe) { return 2 * probe + 1; }
  int functionals() const { return static_cast<int>(coef.cols()); }
};

struct OracleOptions {
  double tol = 1e-10;
  int k_max = 0;  // 0: smallest k with every functional's tail below tol, capped at 32 / delta
};

OracleModel make_oracle(double theta, double sigma, std::vector<RescaledProbe> probes,
                        OracleOptions options = {});

/// max_k |d_k + pi^2 k^2 c_k| over max_k |d_k|, worst probe.
double laplacian_consistency(const OracleModel& model);

/// Cov of functionals i at t and j at s, started from 0 or in stationarity.
double covariance(const OracleModel& model, double t, double s, int i, int j, bool stationary);

Eigen::MatrixXd covariance_matrix(const OracleModel& model, const std::vector<double>& times,
                                  int functional, bool stationary);

/// Exact OU transitions of the modes on a uniform grid, one path per probe.
///
/// Each step samples the exact joint law of the mode increment and its driving
/// Brownian increment, so paths also carry the martingale increments of X_delta.
std::vector<MeasurementPath> simulate_exact(const OracleModel& model, long n, double T,
                                            std::uint64_t seed, bool stationary);

/// Stationary (X_delta, X_delta^Lap) paths by circulant embedding of the exact covariance.
///
/// Every mode contributes a decaying exponential, whose minimal circulant
/// embedding is nonnegative definite, so the 2x2 spectral matrix at each
/// frequency is a sum of PSD rank-one terms and factors without clipping.
/// One sample call yields two independent paths.
class StationarySampler {
 public:
  StationarySampler(const OracleModel& model, int probe, long n, double T);

  std::pair<MeasurementPath, MeasurementPath> sample(std::uint64_t seed) const;

  /// Smallest eigenvalue of the embedded spectral matrices over their largest, before clipping.
  double min_relative_eigenvalue() const noexcept { return min_rel_eig_; }

 private:
  long n_;
  double T_;
  MeasurementPath prototype_;
  Eigen::VectorXd l11_;
  Eigen::VectorXd l21_;
  Eigen::VectorXd l22_;
  double min_rel_eig_ = 0.0;
};

struct FisherRow {
  double delta;
  double value;     // delta^2 E[I^A] by time quadrature
  double analytic;  // same, integrated mode by mode in closed form
  double limit;     // T sigma^2 ||K'||^2 / (2 theta)
  double rel_gap;
};

std::vector<FisherRow> fisher_limit_check(const KernelSpec& k, double theta, double sigma,
                                          const std::vector<double>& deltas, double T,
                                          double x0 = 0.5);

/// 2 int int c(t, s)^2 over [0, T]^2 for a symmetric covariance.
///
/// Integrates in (t, t - s) on dyadic blocks graded towards t = 0 and the
/// diagonal, with n_quad Gauss-Legendre panels per block.
double wick_variance(const std::function<double(double, double)>& cov, double T, int n_quad = 1);

double wick_variance(const OracleModel& model, double T, int functional, bool stationary,
                     int n_quad = 1);

struct ScalingRow {
  double delta;
  double rescaled;  // delta^-2 Cov(X_delta(t delta^2), X_delta(t' delta^2))
  double limit;
  double gap;
};

std::vector<ScalingRow> scaling_limit_check(double theta, double sigma, const KernelSpec& k,
                                            const std::vector<double>& deltas, double t = 1.0,
                                            double t_prime = 2.0, double x0 = 0.5);

}  // namespace localest
