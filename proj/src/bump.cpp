#include "localest/bump.hpp"

#include <cmath>
#include <string>

#include "localest/error.hpp"

namespace localest {

namespace {

Eigen::VectorXd poly_derivative(const Eigen::VectorXd& p) {
  if (p.size() <= 1) return Eigen::VectorXd::Zero(1);
  Eigen::VectorXd d(p.size() - 1);
  for (Eigen::Index i = 1; i < p.size(); ++i) d[i - 1] = i * p[i];
  return d;
}

// Product of ascending-coefficient polynomials.
Eigen::VectorXd poly_mul(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(p.size() + q.size() - 1);
  for (Eigen::Index i = 0; i < p.size(); ++i) r.segment(i, q.size()) += p[i] * q;
  return r;
}

Eigen::VectorXd poly_add(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(std::max(p.size(), q.size()));
  r.head(p.size()) += p;
  r.head(q.size()) += q;
  return r;
}

}  // namespace

BumpFunction::BumpFunction(double steepness) : a_(steepness) {
  if (!(steepness > 0)) throw Error(Errc::InvalidArgument, "bump steepness must be positive");
  const Eigen::VectorXd u = (Eigen::VectorXd(3) << 1.0, 0.0, -1.0).finished();
  const Eigen::VectorXd u2 = poly_mul(u, u);
  const Eigen::VectorXd x = (Eigen::VectorXd(2) << 0.0, 1.0).finished();
  const Eigen::VectorXd xu = poly_mul(x, u);
  poly_.push_back(Eigen::VectorXd::Ones(1));
  for (int n = 0; n < max_order; ++n) {
    const Eigen::VectorXd& p = poly_.back();
    Eigen::VectorXd next = poly_mul(poly_derivative(p), u2);
    next = poly_add(next, 4.0 * n * poly_mul(xu, p));
    next = poly_add(next, -2.0 * a_ * poly_mul(x, p));
    poly_.push_back(std::move(next));
  }
}

double BumpFunction::operator()(double x, int order) const {
  if (order < 0 || order > max_order) {
    throw Error(Errc::InvalidArgument, "bump derivative order " + std::to_string(order));
  }
  if (!(std::abs(x) < 1.0 - 1e-12)) return 0.0;
  const double u = 1.0 - x * x;
  const Eigen::VectorXd& p = poly_[order];
  double value = 0.0;
  for (Eigen::Index i = p.size() - 1; i >= 0; --i) value = value * x + p[i];
  return value * std::exp(-a_ / u - 2.0 * order * std::log(u));
}

double bump(double x) { return bump_derivative(0, x); }

double bump_derivative(int order, double x) {
  static const BumpFunction phi(12.0);
  return phi(x, order);
}

}  // namespace localest
