#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace localest {

/// Quadrature nodes on (0, omega_max]: dyadic panels towards 0, unit-width panels beyond 1.
struct OmegaGrid {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  double omega_max = 0.0;

  static OmegaGrid make(double omega_max);
};

/// F z(omega) = int z(x) exp(-i omega x) dx on the positive half of an omega grid.
///
/// Real z gives conjugate-symmetric transforms, so integrals over the line are
/// twice the real part of integrals over (0, inf).
struct FourierTable {
  OmegaGrid grid;
  Eigen::VectorXcd values;
  double zero_value = 0.0;  // F z(0) = int z
  double norm2 = 0.0;       // ||z||^2 by direct quadrature

  /// ||z||^2 = (1/pi) int_0^inf |F z|^2.
  double parseval_norm2() const;
  double parseval_rel_error() const;
};

/// Smallest omega_max (a multiple of 8, at least 40) past which |F z|^2 stays below
/// 1e-16 of its peak. NonConvergence if none up to 640 / radius.
double choose_omega_max(const std::function<double(double)>& z, double radius);

FourierTable fourier_table(const std::function<double(double)>& z, double radius,
                           double omega_max = 0.0);

/// z tabulated on a fixed rule over [-radius, radius], transformed on demand.
class FourierTransform {
 public:
  FourierTransform(const std::function<double(double)>& z, double radius);
  std::complex<double> operator()(double omega) const;
  double zero_value() const { return wz_.sum(); }

 private:
  Eigen::ArrayXd x_;
  Eigen::ArrayXd wz_;  // weight * z(x)
};

}  // namespace localest
