#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "localest/bump.hpp"

namespace localest {

/// A function of (x, derivative order).
using Shape = std::function<double(double, int)>;

/// One term coef * d^order/dx^order [phi_a(x / radius)].
struct BumpTerm {
  double coef = 1.0;
  double steepness = 12.0;
  int order = 0;
  double radius = 1.0;
};

/// Finite linear combination of scaled bump derivatives.
class BumpSeries {
 public:
  BumpSeries() = default;
  explicit BumpSeries(std::vector<BumpTerm> terms);

  /// Derivative of order `extra` of the series at x.
  double operator()(double x, int extra = 0) const;
  double support_radius() const noexcept;
  int max_extra_order() const noexcept;
  const std::vector<BumpTerm>& terms() const noexcept { return terms_; }

 private:
  std::vector<BumpTerm> terms_;
  std::vector<std::shared_ptr<const BumpFunction>> bumps_;
};

/// Compactly supported kernel K on (-R, R) with optional pair K~ (K~'' = K).
struct KernelSpec {
  std::string name;
  Shape shape;  // K^(order)(x) for order <= max_order
  int max_order = 2;
  std::optional<Shape> antiderivative;  // K~^(order)(x) for order <= 2
  double support_radius = 1.0;
  double moment0 = 0.0;
  double moment1 = 0.0;

  double eval(double x) const { return shape(x, 0); }
  double deriv1(double x) const { return shape(x, 1); }
  double deriv2(double x) const { return shape(x, 2); }
  double derivative(int order, double x) const { return shape(x, order); }
  bool has_antiderivative() const noexcept { return antiderivative.has_value(); }
};

/// Builds a kernel and fills its moments by quadrature.
KernelSpec make_kernel(std::string name, Shape shape, int max_order, double support_radius,
                       std::optional<Shape> antiderivative = std::nullopt);

/// Kernel K = K~'' from a bump series for K~.
KernelSpec make_bump_kernel_from_antiderivative(std::string name, BumpSeries ktilde);

/// Kernel given directly by a bump series, without an antiderivative pair.
KernelSpec make_bump_kernel(std::string name, BumpSeries k);

/// (K1, K2) = (phi''', phi'), K1 carrying K~ = phi'.
std::pair<KernelSpec, KernelSpec> standard_kernels();

/// "k1", "k2", or "custom:<path>" (two-column x, K(x) table on a uniform grid).
KernelSpec kernel_by_name(const std::string& name);

/// Kernel read from a uniformly spaced (x, K(x)) table, reconstructed by a cubic spline.
KernelSpec load_tabulated_kernel(const std::string& path);

/// c * K, with the pair scaled alongside.
KernelSpec scaled(const KernelSpec& k, double c);

/// K = K~'' for K~ a random combination of bump derivatives of orders 0..3.
KernelSpec random_zero_moment_kernel(std::uint64_t seed);

/// K~(x) = int_{-R}^{x} (x - u) K(u) du by quadrature; order 1 gives int K, order 2 gives K.
Shape antiderivative_pair(const KernelSpec& k);

/// ||f|| over [a, b].
double l2_norm(const std::function<double(double)>& f, double a, double b);

/// ||K^(order)|| over the support.
double l2_norm(const KernelSpec& k, int derivative_order);

/// ||K~'||; the kernel must carry an antiderivative pair.
double antiderivative_gradient_norm(const KernelSpec& k);

/// delta^{-1/2} K((x - center) / delta) together with its Laplacian.
struct RescaledProbe {
  KernelSpec kernel;
  double delta = 0.0;
  double x0 = 0.0;            // center after the boundary shift
  double requested_x0 = 0.0;  // center asked for

  double operator()(double x) const { return value(x); }
  double value(double x) const;
  double gradient(double x) const;
  double laplacian(double x) const;
  double lower() const noexcept { return x0 - delta * kernel.support_radius; }
  double upper() const noexcept { return x0 + delta * kernel.support_radius; }
};

/// Probe inside (0, 1): centers closer than delta to the boundary are moved to delta or 1 - delta.
RescaledProbe rescale(const KernelSpec& k, double delta, double x0);

/// Probe on the whole line, no domain checks.
RescaledProbe rescale_on_line(const KernelSpec& k, double delta, double center);

}  // namespace localest
