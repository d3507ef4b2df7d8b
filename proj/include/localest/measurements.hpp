#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>

#include "localest/kernels.hpp"

namespace localest {

/// Time series (X_delta(t_k), X_delta^Lap(t_k)), k = 0..n.
struct MeasurementPath {
  double delta = 0.0;
  double x0 = 0.0;
  double dt = 0.0;
  double T = 0.0;
  std::uint64_t seed = 0;
  Eigen::VectorXd x_series;
  Eigen::VectorXd xlap_series;
  std::optional<double> qv_analytic;  // T * ||sigma * probe||^2
  // Martingale increments of X_delta over each step, when the simulator knows them.
  std::optional<Eigen::VectorXd> noise_increments;

  Eigen::Index steps() const noexcept { return x_series.size() - 1; }
  void validate() const;
};

/// Trapezoid sum h * sum_j field_j probe(y_j) for a nodal field on y_j = j / m, j = 0..m.
double probe_inner_product(const Eigen::VectorXd& field, const RescaledProbe& probe);

/// Left-point sum of X^Lap_k (X_{k+1} - X_k).
double ito_integral(const MeasurementPath& path);

/// Left Riemann sum of series_k^power * dt over k = 0..n-1.
double time_integral(const Eigen::VectorXd& series, int power, double dt);

enum class QvMode { Realized, Analytic };

double quadratic_variation(const MeasurementPath& path, QvMode mode);

/// T * ||sigma * probe||^2 by quadrature over the probe support.
double analytic_quadratic_variation(const RescaledProbe& probe,
                                    const std::function<double(double)>& sigma, double T);

/// CSV with a comment header (delta, x0, dt, seed) and columns t, x, xlap.
void write_csv(const MeasurementPath& path, std::ostream& out);
MeasurementPath read_csv(std::istream& in);

}  // namespace localest
