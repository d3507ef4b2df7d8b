#include "localest/quadrature.hpp"

#include <numbers>

namespace localest {

const GaussLegendre16& GaussLegendre16::get() {
  static const GaussLegendre16 rule = [] {
    GaussLegendre16 r{};
    constexpr int n = size;
    for (int i = 0; i < n; ++i) {
      // Newton on P_n starting from the Chebyshev-like guess.
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.nodes[i] = x;
      r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
  }();
  return rule;
}

QuadratureRule QuadratureRule::composite(double a, double b, int panels) {
  const auto& gl = GaussLegendre16::get();
  QuadratureRule rule;
  rule.nodes.resize(panels * GaussLegendre16::size);
  rule.weights.resize(panels * GaussLegendre16::size);
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    for (int i = 0; i < GaussLegendre16::size; ++i) {
      rule.nodes[p * GaussLegendre16::size + i] = mid + 0.5 * width * gl.nodes[i];
      rule.weights[p * GaussLegendre16::size + i] = 0.5 * width * gl.weights[i];
    }
  }
  return rule;
}

}  // namespace localest
