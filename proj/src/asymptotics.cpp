#include "localest/asymptotics.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

#include "localest/error.hpp"
#include "localest/quadrature.hpp"

namespace localest {

namespace {

double eval_or(const ScalarField& f, double x, double fallback) { return f ? f(x) : fallback; }

FourierTable antiderivative_table(const KernelSpec& k) {
  if (!k.antiderivative) {
    throw Error(Errc::MomentConditionViolated, "kernel '" + k.name + "' has no antiderivative pair");
  }
  const auto& kt = *k.antiderivative;
  return fourier_table([&](double x) { return kt(x, 0); }, k.support_radius);
}

// int x f(x)^2 over the kernel support.
double first_moment_of_square(const std::function<double(double)>& f, double radius) {
  return integrate([&](double x) {
    const double v = f(x);
    return x * v * v;
  }, -radius, radius);
}

}  // namespace

LocalCoefficients LocalCoefficients::at(const CoefficientField& field, double x0) {
  LocalCoefficients c;
  c.theta0 = field.theta(x0);
  c.grad_theta0 = eval_or(field.grad_theta, x0, 0.0);
  c.a0 = eval_or(field.a, x0, 0.0);
  c.sigma0 = eval_or(field.sigma, x0, 1.0);
  c.grad_sigma2_0 = eval_or(field.grad_sigma2, x0, 0.0);
  c.validate();
  return c;
}

void LocalCoefficients::validate() const {
  if (!(theta0 > 0)) throw Error(Errc::NonPositiveDiffusivity, "theta(x0) must be positive");
  if (!(sigma0 > 0)) throw Error(Errc::InvalidArgument, "sigma(x0) must be positive");
}

double psi(const FourierTable& z1, const FourierTable& z2, double sigma0) {
  if (z1.values.size() != z2.values.size() || z1.grid.omega_max != z2.grid.omega_max) {
    throw Error(Errc::InvalidArgument, "psi needs tables on a common omega grid");
  }
  for (const FourierTable* t : {&z1, &z2}) {
    if (std::abs(t->zero_value) > 1e-9) {
      throw Error(Errc::ZeroModeDivergence,
                  "F z(0) = " + std::to_string(t->zero_value) + " makes psi diverge");
    }
  }
  const Eigen::ArrayXd w2 = z1.grid.nodes.array().square();
  const Eigen::ArrayXd cross = (z1.values.array() * z2.values.array().conjugate()).real();
  return sigma0 * sigma0 * (z1.grid.weights.array() * cross / (2.0 * w2)).sum() / M_PI;
}

double psi(const std::function<double(double)>& z1, const std::function<double(double)>& z2,
           double radius, double sigma0) {
  const double omega_max = std::max(choose_omega_max(z1, radius), choose_omega_max(z2, radius));
  return psi(fourier_table(z1, radius, omega_max), fourier_table(z2, radius, omega_max), sigma0);
}

MuA mu_A(const KernelSpec& k, const LocalCoefficients& c) {
  c.validate();
  const double g = c.grad_theta0;
  const double a = c.a0;
  const double r = k.support_radius;
  auto lap = [&](double x) { return k.deriv2(x); };
  auto beta = [&](double x) { return g * (k.deriv1(x) + x * k.deriv2(x)) + a * k.deriv1(x); };
  const double omega_max = std::max(choose_omega_max(lap, r), choose_omega_max(beta, r));
  const FourierTable lap_table = fourier_table(lap, r, omega_max);
  const double denom = psi(lap_table, lap_table, c.sigma0);
  if (!(denom > 0)) throw Error(Errc::DegeneratePsi, "Psi(Lap K, Lap K) is not positive");
  MuA mu;
  mu.general = psi(lap_table, fourier_table(beta, r, omega_max), c.sigma0) / denom;
  const double grad_norm2 = std::pow(l2_norm(k, 1), 2);
  mu.shortcut = g * first_moment_of_square([&](double x) { return k.deriv1(x); }, r) / grad_norm2;
  if (std::abs(mu.general - mu.shortcut) > 1e-5 * std::max(1.0, std::abs(mu.shortcut))) {
    throw Error(Errc::InternalInconsistency, "mu_A routes disagree: " + std::to_string(mu.general) +
                                                 " vs " + std::to_string(mu.shortcut));
  }
  return mu;
}

SigmaA sigma_A(const KernelSpec& k, const LocalCoefficients& c, double T) {
  if (!(T > 0)) throw Error(Errc::InvalidArgument, "horizon must be positive");
  const double norm2 = std::pow(l2_norm(k, 0), 2);
  const double grad_norm2 = std::pow(l2_norm(k, 1), 2);
  auto lap = [&](double x) { return k.deriv2(x); };
  const FourierTable lap_table = fourier_table(lap, k.support_radius);
  const double psi_lap = psi(lap_table, lap_table, c.sigma0);
  if (!(psi_lap > 0) || !(grad_norm2 > 0)) {
    throw Error(Errc::DegeneratePsi, "Psi(Lap K, Lap K) is not positive");
  }
  return {2.0 * norm2 / (T * grad_norm2), c.sigma0 * c.sigma0 * norm2 / (T * psi_lap)};
}

ProxyConstants proxy_constants(const KernelSpec& k, const LocalCoefficients& c, double T) {
  c.validate();
  if (!(T > 0)) throw Error(Errc::InvalidArgument, "horizon must be positive");
  const FourierTable table = antiderivative_table(k);
  const auto& kt = *k.antiderivative;
  const double r = k.support_radius;
  const double kt_grad2 = std::pow(antiderivative_gradient_norm(k), 2);
  const double k_norm2 = std::pow(l2_norm(k, 0), 2);

  ProxyConstants out;
  const double s2 = c.sigma0 * c.sigma0;
  // grad(sigma^2 / theta) at x0
  const double grad_ratio = (c.grad_sigma2_0 * c.theta0 - s2 * c.grad_theta0) / (c.theta0 * c.theta0);
  out.mu1 = -(c.theta0 * c.theta0 / s2) / kt_grad2 * grad_ratio *
            first_moment_of_square([&](double x) { return kt(x, 1); }, r);
  out.mu2 = (c.theta0 / s2) / k_norm2 * c.grad_sigma2_0 *
            first_moment_of_square([&](double x) { return k.eval(x); }, r);

  const Eigen::ArrayXd w2 = table.grid.nodes.array().square();
  const Eigen::ArrayXd mass = table.grid.weights.array() * w2 * table.values.cwiseAbs2().array();

  // (a) trapezoid in u = log s of s g(s)^2, g(s) = (1/pi) int_0^inf w^2 e^{-s w^2} |F K~|^2
  constexpr int nodes = 2000;
  constexpr double u_lo = -30.0;
  constexpr double u_hi = 10.0;
  const double du = (u_hi - u_lo) / (nodes - 1);
  auto g = [&](double s) { return (mass * (-s * w2).exp()).sum() / M_PI; };
  double integral = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double s = std::exp(u_lo + i * du);
    const double v = s * std::pow(g(s), 2);
    integral += (i == 0 || i == nodes - 1 ? 0.5 : 1.0) * v;
  }
  integral *= du;
  const double s_lo = std::exp(u_lo);
  integral += s_lo * std::pow(g(s_lo), 2);
  const double s_hi = std::exp(u_hi);
  const double g_hi = g(s_hi);
  const double g_prev = g(std::exp(u_hi - du));
  // g^2 ~ s^{-p} in the tail
  const double p = 2.0 * std::log(g_prev / g_hi) / du;
  if (g_hi > 0 && p > 1.0) integral += g_hi * g_hi * s_hi / (p - 1.0);
  out.sigma_P_route_a = 4.0 / T / (kt_grad2 * kt_grad2) * integral;

  // (b) tensor double integral with int_0^inf e^{-s(w^2+v^2)} ds = 1/(w^2+v^2)
  double tensor = 0.0;
  for (Eigen::Index i = 0; i < mass.size(); ++i) {
    tensor += mass[i] * (mass / (w2 + w2[i])).sum();
  }
  tensor /= M_PI * M_PI;
  out.sigma_P_route_b = 4.0 / T / (kt_grad2 * kt_grad2) * tensor;

  out.sigma_P = out.sigma_P_route_a;
  if (std::abs(out.sigma_P_route_a - out.sigma_P_route_b) > 1e-5 * out.sigma_P_route_b) {
    throw Error(Errc::RouteDisagreement, "Sigma^P routes disagree: " +
                                             std::to_string(out.sigma_P_route_a) + " vs " +
                                             std::to_string(out.sigma_P_route_b));
  }
  return out;
}

VarianceOrdering variance_ordering(const KernelSpec& k, const LocalCoefficients& c, double T) {
  VarianceOrdering v;
  v.sigma_P = proxy_constants(k, c, T).sigma_P;
  v.mid = 2.0 * std::pow(antiderivative_gradient_norm(k), 2) / (T * std::pow(l2_norm(k, 0), 2));
  v.sigma_A = sigma_A(k, c, T).closed_form;
  v.ordered = v.sigma_P >= v.mid && v.mid >= v.sigma_A;
  v.ratio = v.sigma_P / v.sigma_A;
  if (!v.ordered) {
    throw Error(Errc::OrderingViolated, "Sigma^P=" + std::to_string(v.sigma_P) + " mid=" +
                                            std::to_string(v.mid) + " Sigma^A=" + std::to_string(v.sigma_A));
  }
  return v;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(Errc::InvalidLevel, "quantile level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

ConfidenceInterval confidence_interval(double theta_hat, double delta, double sigma_const,
                                       double alpha_bar) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) {
    throw Error(Errc::InvalidLevel, "alpha_bar must lie in (0, 1]");
  }
  if (!(theta_hat > 0)) throw Error(Errc::InvalidArgument, "interval needs a positive estimate");
  if (!(sigma_const > 0) || !(delta > 0)) {
    throw Error(Errc::InvalidArgument, "interval needs positive delta and variance constant");
  }
  const double q = alpha_bar == 1.0 ? 0.0 : normal_quantile(1.0 - alpha_bar / 2.0);
  const double half = delta * std::sqrt(theta_hat * sigma_const) * q;
  return {theta_hat - half, theta_hat + half, 1.0 - alpha_bar};
}

double whole_line_covariance(const FourierTable& k, double theta, double sigma, double t,
                             double t_prime) {
  if (t > t_prime) std::swap(t, t_prime);
  if (t < 0) throw Error(Errc::InvalidArgument, "times must be nonnegative");
  const Eigen::ArrayXd w2 = k.grid.nodes.array().square();
  // e^{-theta w^2 (t'-t)} - e^{-theta w^2 (t+t')} = e^{-a} (1 - e^{-theta w^2 2t})
  const Eigen::ArrayXd bracket = (-theta * w2 * (t_prime - t)).exp() * -(-2.0 * theta * t * w2).unaryExpr(
                                     [](double v) { return std::expm1(v); });
  const Eigen::ArrayXd integrand = k.values.cwiseAbs2().array() * bracket / (2.0 * theta * w2);
  return sigma * sigma * (k.grid.weights.array() * integrand).sum() / M_PI;
}

}  // namespace localest
