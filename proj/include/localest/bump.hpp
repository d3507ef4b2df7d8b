#pragma once

#include <Eigen/Dense>

#include <vector>

namespace localest {

/// phi_a(x) = exp(-a / (1 - x^2)) on (-1, 1), zero elsewhere, with derivatives.
///
/// phi^(n) = P_n(x) * exp(-a/u - 2n log u), u = 1 - x^2, where
/// P_{n+1} = P_n' u^2 + 4 n x u P_n - 2 a x P_n and P_0 = 1.
class BumpFunction {
 public:
  static constexpr int max_order = 10;

  explicit BumpFunction(double steepness = 12.0);

  double steepness() const noexcept { return a_; }
  double operator()(double x, int order = 0) const;

 private:
  double a_;
  std::vector<Eigen::VectorXd> poly_;  // ascending coefficients of P_n
};

double bump(double x);
double bump_derivative(int order, double x);

}  // namespace localest
