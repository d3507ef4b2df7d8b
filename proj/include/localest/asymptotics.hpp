#pragma once

#include <functional>

#include "localest/fd_solver.hpp"
#include "localest/fourier.hpp"
#include "localest/kernels.hpp"

namespace localest {

/// Coefficients frozen at the measurement location.
struct LocalCoefficients {
  double theta0 = 1.0;
  double grad_theta0 = 0.0;
  double a0 = 0.0;
  double sigma0 = 1.0;
  double grad_sigma2_0 = 0.0;

  static LocalCoefficients at(const CoefficientField& field, double x0);
  void validate() const;
};

/// sigma0^2 (1/2pi) int F z1 conj(F z2) / (2 omega^2); both tables on the same grid.
double psi(const FourierTable& z1, const FourierTable& z2, double sigma0);

/// Psi of two functions supported in [-radius, radius].
double psi(const std::function<double(double)>& z1, const std::function<double(double)>& z2,
           double radius, double sigma0);

struct MuA {
  double general;   // Psi(Lap K, beta) / Psi(Lap K, Lap K)
  double shortcut;  // grad_theta * int x K'^2 / ||K'||^2
};

/// Both routes; InternalInconsistency if they differ by more than 1e-5.
MuA mu_A(const KernelSpec& k, const LocalCoefficients& c);

struct SigmaA {
  double closed_form;  // 2 ||K||^2 / (T ||K'||^2)
  double psi_route;    // ||sigma0 K||^2 / (T Psi(Lap K, Lap K))
};

SigmaA sigma_A(const KernelSpec& k, const LocalCoefficients& c, double T);

struct ProxyConstants {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma_P = 0.0;  // route (a)
  double sigma_P_route_a = 0.0;
  double sigma_P_route_b = 0.0;
};

/// RouteDisagreement if the two Sigma^P routes differ by more than 1e-5 relative.
ProxyConstants proxy_constants(const KernelSpec& k, const LocalCoefficients& c, double T);

struct VarianceOrdering {
  double sigma_P;
  double mid;  // 2 ||K~'||^2 / (T ||K||^2)
  double sigma_A;
  bool ordered;
  double ratio;  // sigma_P / sigma_A
};

/// OrderingViolated unless sigma_P >= mid >= sigma_A.
VarianceOrdering variance_ordering(const KernelSpec& k, const LocalCoefficients& c, double T);

/// Standard normal quantile.
double normal_quantile(double p);

struct ConfidenceInterval {
  double lo;
  double hi;
  double level;  // nominal coverage 1 - alpha_bar
};

/// theta_hat +- delta sqrt(theta_hat sigma_const) q_{1 - alpha_bar/2}.
ConfidenceInterval confidence_interval(double theta_hat, double delta, double sigma_const,
                                       double alpha_bar);

/// Whole-line limit sigma^2 int_0^t <e^{theta(t-s)Lap} K, e^{theta(t'-s)Lap} K> ds, t <= t'.
double whole_line_covariance(const FourierTable& k, double theta, double sigma, double t,
                             double t_prime);

}  // namespace localest
