#pragma once

#include <optional>
#include <string>
#include <vector>

#include "localest/asymptotics.hpp"
#include "localest/kernels.hpp"
#include "localest/measurements.hpp"

namespace localest {

enum class EstimatorKind { Augmented, Proxy };

std::string_view to_string(EstimatorKind kind) noexcept;

struct AsymptoticConstants {
  double mu = 0.0;
  double sigma_const = 0.0;
};

struct EstimateReport {
  EstimatorKind estimator = EstimatorKind::Augmented;
  double theta_hat = 0.0;
  double delta = 0.0;
  double x0 = 0.0;
  double fisher_observed = 0.0;  // int (X^Lap)^2 dt, or delta^-2 int X^2 dt for the proxy
  double qv_used = 0.0;
  std::optional<ConfidenceInterval> ci;
  std::optional<AsymptoticConstants> asymptotics;
  bool assumption_violated = false;  // proxy without an antiderivative pair
  std::string error;                 // non-empty when the estimate failed

  bool ok() const noexcept { return error.empty(); }
};

/// int X^Lap dX / int (X^Lap)^2 dt; also the least-squares estimator.
EstimateReport augmented_mle(const MeasurementPath& path);

/// Pieces of theta_hat - theta = sum X^Lap_k dN_k / I + R / I for a path with known
/// martingale increments dN_k.
struct AugmentedDecomposition {
  double fisher;      // I = sum (X^Lap_k)^2 dt
  double martingale;  // sum X^Lap_k dN_k
  double remainder;   // R = sum X^Lap_k (dX_k - dN_k - theta X^Lap_k dt)
  double theta_hat;   // discrete estimate
  /// Estimate with the discretisation remainder removed: theta + martingale / I.
  double continuous_estimate(double theta) const { return theta + martingale / fisher; }
};

AugmentedDecomposition augmented_decomposition(const MeasurementPath& path, double theta);

/// ||K~'||^2 / (2 ||K||^2), or its stand-in for kernels without K~.
struct ProxyConstant {
  double value = 0.0;
  bool assumption_violated = false;
};

/// Without K~, ||K~'||^2 is replaced by (1/pi) int_{pi delta}^inf |F K|^2 / omega^2,
/// the inverse-gradient norm with frequencies below the lowest mode of (0, 1) removed.
ProxyConstant proxy_constant(const KernelSpec& k, double delta);

EstimateReport proxy_mle(const MeasurementPath& path, const ProxyConstant& constant, QvMode qv_mode);
EstimateReport proxy_mle(const MeasurementPath& path, const KernelSpec& k, QvMode qv_mode);

/// Independent estimates per path; failures are recorded in the report, not thrown.
std::vector<EstimateReport> estimate_curve(const std::vector<MeasurementPath>& paths,
                                           EstimatorKind kind, const KernelSpec& k,
                                           QvMode qv_mode = QvMode::Realized);

}  // namespace localest
