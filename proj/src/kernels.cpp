#include "localest/kernels.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "localest/error.hpp"
#include "localest/quadrature.hpp"
#include "localest/rng.hpp"

namespace localest {

BumpSeries::BumpSeries(std::vector<BumpTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (!(t.radius > 0)) throw Error(Errc::InvalidArgument, "bump radius must be positive");
    bumps_.push_back(std::make_shared<const BumpFunction>(t.steepness));
  }
}

double BumpSeries::operator()(double x, int extra) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    const int n = t.order + extra;
    sum += t.coef * (*bumps_[i])(x / t.radius, n) * std::pow(t.radius, -n);
  }
  return sum;
}

double BumpSeries::support_radius() const noexcept {
  double r = 0.0;
  for (const auto& t : terms_) r = std::max(r, t.radius);
  return r;
}

int BumpSeries::max_extra_order() const noexcept {
  int highest = 0;
  for (const auto& t : terms_) highest = std::max(highest, t.order);
  return BumpFunction::max_order - highest;
}

KernelSpec make_kernel(std::string name, Shape shape, int max_order, double support_radius,
                       std::optional<Shape> antiderivative) {
  if (!(support_radius > 0)) throw Error(Errc::InvalidArgument, "support radius must be positive");
  KernelSpec k;
  k.name = std::move(name);
  k.shape = std::move(shape);
  k.max_order = max_order;
  k.antiderivative = std::move(antiderivative);
  k.support_radius = support_radius;
  const auto& f = k.shape;
  k.moment0 = integrate([&](double x) { return f(x, 0); }, -support_radius, support_radius);
  k.moment1 = integrate([&](double x) { return x * f(x, 0); }, -support_radius, support_radius);
  return k;
}

KernelSpec make_bump_kernel_from_antiderivative(std::string name, BumpSeries ktilde) {
  auto series = std::make_shared<const BumpSeries>(std::move(ktilde));
  Shape k = [series](double x, int order) { return (*series)(x, order + 2); };
  Shape kt = [series](double x, int order) { return (*series)(x, order); };
  return make_kernel(std::move(name), std::move(k), series->max_extra_order() - 2,
                     series->support_radius(), std::move(kt));
}

KernelSpec make_bump_kernel(std::string name, BumpSeries k) {
  auto series = std::make_shared<const BumpSeries>(std::move(k));
  Shape shape = [series](double x, int order) { return (*series)(x, order); };
  return make_kernel(std::move(name), std::move(shape), series->max_extra_order(),
                     series->support_radius());
}

std::pair<KernelSpec, KernelSpec> standard_kernels() {
  KernelSpec k1 = make_bump_kernel_from_antiderivative("k1", BumpSeries({{1.0, 12.0, 1, 1.0}}));
  KernelSpec k2 = make_bump_kernel("k2", BumpSeries({{1.0, 12.0, 1, 1.0}}));
  return {std::move(k1), std::move(k2)};
}

KernelSpec load_tabulated_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open kernel table " + path);
  std::vector<double> xs;
  std::vector<double> ys;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0.0;
    double y = 0.0;
    if (!(row >> x >> y)) throw Error(Errc::ConfigError, "malformed kernel table row: " + line);
    xs.push_back(x);
    ys.push_back(y);
  }
  if (xs.size() < 4) throw Error(Errc::ConfigError, "kernel table needs at least 4 rows");
  const double step = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (std::abs(xs[i] - xs[i - 1] - step) > 1e-9 * std::max(1.0, std::abs(step))) {
      throw Error(Errc::ConfigError, "kernel table must be uniformly spaced");
    }
  }
  const double lo = xs.front();
  const double hi = xs.back();
  auto spline = std::make_shared<const boost::math::interpolators::cardinal_cubic_b_spline<double>>(
      ys.begin(), ys.end(), lo, step, 0.0, 0.0);
  Shape shape = [spline, lo, hi](double x, int order) {
    if (x <= lo || x >= hi) return 0.0;
    switch (order) {
      case 0: return (*spline)(x);
      case 1: return spline->prime(x);
      case 2: return spline->double_prime(x);
      default: throw Error(Errc::InvalidArgument, "tabulated kernels have two derivatives");
    }
  };
  const double radius = std::max(std::abs(lo), std::abs(hi));
  KernelSpec k = make_kernel("custom:" + path, shape, 2, radius);
  if (std::abs(k.moment0) < 1e-9 && std::abs(k.moment1) < 1e-9) {
    k.antiderivative = antiderivative_pair(k);
  }
  return k;
}

KernelSpec kernel_by_name(const std::string& name) {
  if (name == "k1") return standard_kernels().first;
  if (name == "k2") return standard_kernels().second;
  if (name.rfind("custom:", 0) == 0) return load_tabulated_kernel(name.substr(7));
  throw Error(Errc::ConfigError, "unknown kernel '" + name + "'");
}

KernelSpec scaled(const KernelSpec& k, double c) {
  KernelSpec out = k;
  out.shape = [f = k.shape, c](double x, int order) { return c * f(x, order); };
  if (k.antiderivative) {
    out.antiderivative = [f = *k.antiderivative, c](double x, int order) {
      return c * f(x, order);
    };
  }
  out.moment0 *= c;
  out.moment1 *= c;
  return out;
}

KernelSpec random_zero_moment_kernel(std::uint64_t seed) {
  SplitMix64 gen(seed);
  boost::random::normal_distribution<double> coef;
  boost::random::uniform_real_distribution<double> steep(6.0, 18.0);
  boost::random::uniform_real_distribution<double> radius(0.5, 1.0);
  std::vector<BumpTerm> terms;
  for (int n = 0; n <= 3; ++n) terms.push_back({coef(gen), steep(gen), n, radius(gen)});
  return make_bump_kernel_from_antiderivative("random-" + std::to_string(seed),
                                              BumpSeries(std::move(terms)));
}

Shape antiderivative_pair(const KernelSpec& k) {
  if (std::abs(k.moment0) >= 1e-9 || std::abs(k.moment1) >= 1e-9) {
    throw Error(Errc::MomentConditionViolated,
                "kernel '" + k.name + "' has nonzero zeroth or first moment");
  }
  const double r = k.support_radius;
  return [f = k.shape, r](double x, int order) {
    if (order >= 2) return f(x, order - 2);
    const double top = std::min(x, r);
    if (top <= -r) return 0.0;
    if (order == 1) return integrate([&](double u) { return f(u, 0); }, -r, top);
    return integrate([&](double u) { return (x - u) * f(u, 0); }, -r, top);
  };
}

double l2_norm(const std::function<double(double)>& f, double a, double b) {
  return std::sqrt(integrate([&](double x) {
    const double v = f(x);
    return v * v;
  }, a, b));
}

double l2_norm(const KernelSpec& k, int derivative_order) {
  const double r = k.support_radius;
  return l2_norm([&](double x) { return k.shape(x, derivative_order); }, -r, r);
}

double antiderivative_gradient_norm(const KernelSpec& k) {
  if (!k.antiderivative) {
    throw Error(Errc::MomentConditionViolated, "kernel '" + k.name + "' has no antiderivative pair");
  }
  const double r = k.support_radius;
  const auto& kt = *k.antiderivative;
  return l2_norm([&](double x) { return kt(x, 1); }, -r, r);
}

double RescaledProbe::value(double x) const {
  return kernel.shape((x - x0) / delta, 0) / std::sqrt(delta);
}

double RescaledProbe::gradient(double x) const {
  return kernel.shape((x - x0) / delta, 1) * std::pow(delta, -1.5);
}

double RescaledProbe::laplacian(double x) const {
  return kernel.shape((x - x0) / delta, 2) * std::pow(delta, -2.5);
}

RescaledProbe rescale(const KernelSpec& k, double delta, double x0) {
  if (!(delta > 0)) throw Error(Errc::InvalidArgument, "delta must be positive");
  if (!(x0 > 0 && x0 < 1)) throw Error(Errc::InvalidArgument, "x0 must lie in (0, 1)");
  const double half_width = delta * k.support_radius;
  if (half_width >= 0.5) {
    throw Error(Errc::DomainTooSmall, "probe of half-width " + std::to_string(half_width) +
                                          " does not fit in (0, 1)");
  }
  RescaledProbe p = rescale_on_line(k, delta, std::clamp(x0, half_width, 1.0 - half_width));
  p.requested_x0 = x0;
  return p;
}

RescaledProbe rescale_on_line(const KernelSpec& k, double delta, double center) {
  if (!(delta > 0)) throw Error(Errc::InvalidArgument, "delta must be positive");
  RescaledProbe p;
  p.kernel = k;
  p.delta = delta;
  p.x0 = center;
  p.requested_x0 = center;
  return p;
}

}  // namespace localest
