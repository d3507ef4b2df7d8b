#include <doctest.h>

#include <boost/random/normal_distribution.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "localest/error.hpp"
#include "localest/fd_solver.hpp"
#include "localest/measurements.hpp"
#include "localest/quadrature.hpp"
#include "localest/rng.hpp"

using namespace localest;
using doctest::Approx;
using std::numbers::pi;

namespace {

MeasurementPath synthetic(long n, double T, auto x, auto xlap) {
  MeasurementPath p;
  p.delta = 0.1;
  p.x0 = 0.5;
  p.dt = T / n;
  p.T = T;
  p.x_series.resize(n + 1);
  p.xlap_series.resize(n + 1);
  for (long k = 0; k <= n; ++k) {
    p.x_series[k] = x(k * p.dt);
    p.xlap_series[k] = xlap(k * p.dt);
  }
  return p;
}

Eigen::VectorXd nodal(int m, auto f) {
  Eigen::VectorXd v(m + 1);
  for (int j = 0; j <= m; ++j) v[j] = f(static_cast<double>(j) / m);
  return v;
}

}  // namespace

TEST_CASE("probe inner products") {
  const auto [k1, k2] = standard_kernels();
  const RescaledProbe p = rescale(k2, 0.12, 0.6);
  CHECK(probe_inner_product(Eigen::VectorXd::Zero(501), p) == 0.0);

  const int k = 4;
  auto ek = [&](double y) { return std::sqrt(2.0) * std::sin(k * pi * y); };
  const double exact = integrate([&](double y) { return ek(y) * p(y); }, p.lower(), p.upper());
  double prev_err = 0.0;
  for (int m : {100, 200, 400}) {
    const double err = std::abs(probe_inner_product(nodal(m, ek), p) - exact);
    if (prev_err > 0) CHECK(err < prev_err / 3.0);
    prev_err = err;
  }

  const RescaledProbe q = rescale(k2, 0.3, 0.5);
  const double norm2 = std::pow(l2_norm(k2, 0), 2);
  CHECK(probe_inner_product(nodal(1000, [&](double y) { return q(y); }), q) == Approx(norm2).epsilon(1e-4));
}

TEST_CASE("Ito integral") {
  const MeasurementPath c = synthetic(100, 1.0, [](double t) { return std::sin(t); }, [](double) { return 2.5; });
  CHECK(ito_integral(c) == Approx(2.5 * (std::sin(1.0) - std::sin(0.0))));

  const MeasurementPath lin = synthetic(1000, 1.0, [](double t) { return t; }, [](double t) { return t; });
  CHECK(std::abs(ito_integral(lin) - 0.5) < 2.0 / 1000);
}

TEST_CASE("time integrals") {
  CHECK(time_integral(Eigen::VectorXd::Constant(101, 3.0), 2, 0.02) == Approx(9.0 * 2.0));
  CHECK(time_integral(Eigen::VectorXd::Constant(101, 3.0), 1, 0.01) == Approx(3.0));
  const long n = 1000;
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n + 1, 0.0, 1.0);
  CHECK(std::abs(time_integral(t, 2, 1.0 / n) - 1.0 / 3) < 1.0 / n);

  Eigen::VectorXd smooth = t.array().exp() * (3 * t.array()).cos();
  double simpson = 0.0;
  for (long k = 0; k < n; k += 2) {
    simpson += (std::pow(smooth[k], 2) + 4 * std::pow(smooth[k + 1], 2) + std::pow(smooth[k + 2], 2)) / (3.0 * n);
  }
  CHECK(std::abs(time_integral(smooth, 2, 1.0 / n) - simpson) < 5.0 / n);
  CHECK_THROWS_AS(time_integral(t, 3, 0.1), Error);
}

TEST_CASE("quadratic variation") {
  const long n = 10000;
  const double c = 1.7;
  SplitMix64 g(5);
  boost::random::normal_distribution<double> normal;
  const int reps = 50;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    double w = 0.0;
    const MeasurementPath p = synthetic(n, 1.0, [&](double t) {
      if (t > 0) w += c * std::sqrt(1.0 / n) * normal(g);
      return w;
    }, [](double) { return 0.0; });
    const double qv = quadratic_variation(p, QvMode::Realized);
    s += qv;
    s2 += qv * qv;
  }
  const double mean = s / reps;
  const double se = std::sqrt((s2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - c * c) <= 3 * se);

  const MeasurementPath smooth = synthetic(n, 1.0, [](double t) { return std::sin(t); }, [](double) { return 0.0; });
  CHECK(quadratic_variation(smooth, QvMode::Realized) < 1e-3);
  CHECK_THROWS_AS(quadratic_variation(smooth, QvMode::Analytic), Error);

  const auto [k1, k2] = standard_kernels();
  const RescaledProbe p = rescale(k1, 0.1, 0.4);
  CHECK(analytic_quadratic_variation(p, [](double) { return 1.0; }, 2.0) ==
        Approx(2.0 * std::pow(l2_norm(k1, 0), 2)).epsilon(1e-9));
}

TEST_CASE("path validation and csv round trip") {
  MeasurementPath p = synthetic(20, 1.0, [](double t) { return t * t; }, [](double t) { return -t; });
  p.seed = 99;
  std::stringstream buf;
  write_csv(p, buf);
  const MeasurementPath q = read_csv(buf);
  CHECK(q.delta == p.delta);
  CHECK(q.x0 == p.x0);
  CHECK(q.dt == p.dt);
  CHECK(q.seed == 99);
  CHECK(q.x_series == p.x_series);
  CHECK(q.xlap_series == p.xlap_series);

  MeasurementPath bad = p;
  bad.xlap_series.resize(5);
  CHECK_THROWS_AS(bad.validate(), Error);
  std::stringstream junk("t,x,xlap\n0,1\n");
  CHECK_THROWS_AS(read_csv(junk), Error);
}

TEST_CASE("noise-free measurements satisfy the probe dynamics") {
  const auto [k1, k2] = standard_kernels();
  SimConfig cfg;
  cfg.grid = {500, 20000, 0.05};
  cfg.coeffs = constant_coefficients(0.7, 0.0);
  cfg.x0_initial = InitialCondition::two_peaks();
  const MeasurementPath p = simulate(cfg, {rescale(k1, 0.1, 0.4)})[0];
  const double fisher = time_integral(p.xlap_series, 2, p.dt);
  CHECK(ito_integral(p) / fisher == Approx(0.7).epsilon(1e-2));
}
