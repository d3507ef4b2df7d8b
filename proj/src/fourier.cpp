#include "localest/fourier.hpp"

#include <cmath>
#include <complex>

#include "localest/error.hpp"
#include "localest/quadrature.hpp"

namespace localest {

namespace {

constexpr int x_panels = 128;
constexpr int zero_levels = 24;

}  // namespace

FourierTransform::FourierTransform(const std::function<double(double)>& z, double radius) {
  const QuadratureRule rule = QuadratureRule::composite(-radius, radius, x_panels);
  x_ = rule.nodes.array();
  wz_.resize(x_.size());
  for (Eigen::Index i = 0; i < x_.size(); ++i) wz_[i] = rule.weights[i] * z(x_[i]);
}

std::complex<double> FourierTransform::operator()(double omega) const {
  const Eigen::ArrayXd phase = -omega * x_;
  return {(wz_ * phase.cos()).sum(), (wz_ * phase.sin()).sum()};
}

OmegaGrid OmegaGrid::make(double omega_max) {
  if (!(omega_max > 1.0)) throw Error(Errc::InvalidArgument, "omega_max must exceed 1");
  const auto& gl = GaussLegendre16::get();
  std::vector<std::pair<double, double>> panels;
  panels.emplace_back(0.0, std::ldexp(1.0, -zero_levels));
  for (int j = zero_levels; j >= 1; --j) panels.emplace_back(std::ldexp(1.0, -j), std::ldexp(1.0, -j + 1));
  const int unit = static_cast<int>(std::ceil(omega_max - 1.0));
  const double width = (omega_max - 1.0) / unit;
  for (int p = 0; p < unit; ++p) panels.emplace_back(1.0 + p * width, 1.0 + (p + 1) * width);
  OmegaGrid g;
  g.omega_max = omega_max;
  g.nodes.resize(static_cast<Eigen::Index>(panels.size()) * GaussLegendre16::size);
  g.weights.resize(g.nodes.size());
  Eigen::Index k = 0;
  for (const auto& [a, b] : panels) {
    for (int i = 0; i < GaussLegendre16::size; ++i, ++k) {
      g.nodes[k] = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
      g.weights[k] = 0.5 * (b - a) * gl.weights[i];
    }
  }
  return g;
}

double FourierTable::parseval_norm2() const {
  return grid.weights.dot(values.cwiseAbs2()) / M_PI;
}

double FourierTable::parseval_rel_error() const {
  return std::abs(parseval_norm2() - norm2) / norm2;
}

double choose_omega_max(const std::function<double(double)>& z, double radius) {
  const FourierTransform t(z, radius);
  const double cap = 640.0 / radius;
  double peak = 0.0;
  for (double w = 0.0; w <= 40.0; w += 0.25) peak = std::max(peak, std::norm(t(w)));
  for (double top = 40.0; top <= cap; top += 8.0) {
    double tail = 0.0;
    for (double w = top - 8.0; w <= top; w += 0.25) {
      const double v = std::norm(t(w));
      peak = std::max(peak, v);
      tail = std::max(tail, v);
    }
    if (tail <= 1e-16 * peak) return top;
  }
  throw Error(Errc::NonConvergence, "Fourier transform does not decay below omega=" + std::to_string(cap));
}

FourierTable fourier_table(const std::function<double(double)>& z, double radius, double omega_max) {
  if (omega_max <= 0.0) omega_max = choose_omega_max(z, radius);
  const FourierTransform t(z, radius);
  FourierTable table;
  table.grid = OmegaGrid::make(omega_max);
  table.values.resize(table.grid.nodes.size());
  for (Eigen::Index k = 0; k < table.values.size(); ++k) {
    table.values[k] = t(table.grid.nodes[k]);
  }
  table.zero_value = t.zero_value();
  table.norm2 = integrate([&](double x) {
    const double v = z(x);
    return v * v;
  }, -radius, radius);
  return table;
}

}  // namespace localest
