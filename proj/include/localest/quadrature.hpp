#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <utility>

#include "localest/error.hpp"

namespace localest {

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre16 {
  static constexpr int size = 16;
  std::array<double, size> nodes;
  std::array<double, size> weights;

  static const GaussLegendre16& get();
};

/// Composite 16-point Gauss-Legendre rule over `panels` equal panels of [a, b].
template <typename F>
double gauss_legendre(F&& f, double a, double b, int panels) {
  const auto& gl = GaussLegendre16::get();
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    double panel = 0.0;
    for (int i = 0; i < GaussLegendre16::size; ++i) {
      panel += gl.weights[i] * f(mid + 0.5 * width * gl.nodes[i]);
    }
    total += 0.5 * width * panel;
  }
  return total;
}

struct QuadratureOptions {
  double rel_tol = 1e-10;
  int min_level = 3;   // at least 2^min_level panels before testing convergence
  int max_level = 16;  // NonConvergence beyond 2^max_level panels
};

/// Integral of f over [a, b] by dyadic panel refinement.
///
/// Stops when successive levels differ by less than rel_tol times the
/// integral of |f|, which keeps vanishing integrals (zero moments) from
/// stalling the refinement.
template <typename F>
double integrate(F&& f, double a, double b, QuadratureOptions opts = {}) {
  if (!(b > a)) return 0.0;
  const auto& gl = GaussLegendre16::get();
  double previous = 0.0;
  for (int level = 0; level <= opts.max_level; ++level) {
    const int panels = 1 << level;
    const double width = (b - a) / panels;
    double total = 0.0;
    double total_abs = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * width;
      for (int i = 0; i < GaussLegendre16::size; ++i) {
        const double v = gl.weights[i] * f(mid + 0.5 * width * gl.nodes[i]);
        total += v;
        total_abs += std::abs(v);
      }
    }
    total *= 0.5 * width;
    total_abs *= 0.5 * width;
    if (level >= opts.min_level &&
        std::abs(total - previous) <= opts.rel_tol * total_abs + 1e-300) {
      return total;
    }
    previous = total;
  }
  throw Error(Errc::NonConvergence, "panel refinement exceeded 2^" +
                                        std::to_string(opts.max_level) + " panels");
}

/// A composite rule materialised as node/weight vectors, for tabulating
/// integrands that are reused many times (Fourier transforms, mode sums).
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  static QuadratureRule composite(double a, double b, int panels);
};

}  // namespace localest
