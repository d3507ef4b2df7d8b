#include "localest/estimators.hpp"

#include <cmath>
#include <limits>

#include "localest/error.hpp"
#include "localest/fourier.hpp"
#include "localest/quadrature.hpp"

namespace localest {

std::string_view to_string(EstimatorKind kind) noexcept {
  return kind == EstimatorKind::Augmented ? "augmented" : "proxy";
}

EstimateReport augmented_mle(const MeasurementPath& path) {
  path.validate();
  const double denom = time_integral(path.xlap_series, 2, path.dt);
  if (!(denom > 1e-300) || !std::isfinite(denom)) {
    throw Error(Errc::DegenerateInformation, "int (X^Lap)^2 dt vanishes");
  }
  EstimateReport r;
  r.estimator = EstimatorKind::Augmented;
  r.theta_hat = ito_integral(path) / denom;
  r.delta = path.delta;
  r.x0 = path.x0;
  r.fisher_observed = denom;
  r.qv_used = quadratic_variation(path, QvMode::Realized);
  return r;
}

AugmentedDecomposition augmented_decomposition(const MeasurementPath& path, double theta) {
  path.validate();
  if (!path.noise_increments) {
    throw Error(Errc::AnalyticUnavailable, "path carries no martingale increments");
  }
  const Eigen::Index n = path.steps();
  const auto lap = path.xlap_series.head(n);
  const Eigen::VectorXd dx = path.x_series.tail(n) - path.x_series.head(n);
  const Eigen::VectorXd& dn = *path.noise_increments;
  AugmentedDecomposition d;
  d.fisher = time_integral(path.xlap_series, 2, path.dt);
  if (!(d.fisher > 1e-300)) throw Error(Errc::DegenerateInformation, "int (X^Lap)^2 dt vanishes");
  d.martingale = lap.dot(dn);
  d.remainder = lap.dot(dx - dn - theta * path.dt * lap);
  d.theta_hat = lap.dot(dx) / d.fisher;
  return d;
}

ProxyConstant proxy_constant(const KernelSpec& k, double delta) {
  const double k_norm2 = std::pow(l2_norm(k, 0), 2);
  if (k.antiderivative) {
    return {std::pow(antiderivative_gradient_norm(k), 2) / (2.0 * k_norm2), false};
  }
  if (!(delta > 0)) throw Error(Errc::InvalidArgument, "delta must be positive");
  const auto z = [&](double x) { return k.eval(x); };
  const FourierTransform f(z, k.support_radius);
  const double omega_max = choose_omega_max(z, k.support_radius);
  const double inv_grad2 = integrate([&](double w) { return std::norm(f(w)) / (w * w); },
                                     M_PI * delta, omega_max) / M_PI;
  return {inv_grad2 / (2.0 * k_norm2), true};
}

EstimateReport proxy_mle(const MeasurementPath& path, const ProxyConstant& constant, QvMode qv_mode) {
  path.validate();
  const double energy = time_integral(path.x_series, 2, path.dt) / (path.delta * path.delta);
  if (!(energy > 1e-300)) {
    throw Error(Errc::DegenerateInformation, "int X^2 dt = " + std::to_string(energy));
  }
  EstimateReport r;
  r.estimator = EstimatorKind::Proxy;
  r.qv_used = quadratic_variation(path, qv_mode);
  r.theta_hat = constant.value * r.qv_used / energy;
  r.delta = path.delta;
  r.x0 = path.x0;
  r.fisher_observed = energy;
  r.assumption_violated = constant.assumption_violated;
  return r;
}

EstimateReport proxy_mle(const MeasurementPath& path, const KernelSpec& k, QvMode qv_mode) {
  return proxy_mle(path, proxy_constant(k, path.delta), qv_mode);
}

std::vector<EstimateReport> estimate_curve(const std::vector<MeasurementPath>& paths,
                                           EstimatorKind kind, const KernelSpec& k,
                                           QvMode qv_mode) {
  std::vector<EstimateReport> out;
  out.reserve(paths.size());
  std::optional<ProxyConstant> constant;
  double constant_delta = -1.0;
  for (const auto& path : paths) {
    try {
      if (kind == EstimatorKind::Augmented) {
        out.push_back(augmented_mle(path));
      } else {
        if (!constant || constant_delta != path.delta) {
          constant = proxy_constant(k, path.delta);
          constant_delta = path.delta;
        }
        out.push_back(proxy_mle(path, *constant, qv_mode));
      }
    } catch (const std::exception& e) {
      EstimateReport r;
      r.estimator = kind;
      r.theta_hat = std::numeric_limits<double>::quiet_NaN();
      r.delta = path.delta;
      r.x0 = path.x0;
      r.error = e.what();
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace localest
