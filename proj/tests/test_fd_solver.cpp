#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "localest/error.hpp"
#include "localest/fd_solver.hpp"
#include "localest/quadrature.hpp"
#include "localest/rng.hpp"
#include "localest/spectral_oracle.hpp"

using namespace localest;
using doctest::Approx;
using std::numbers::pi;

namespace {

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  SplitMix64 g(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<double>(g() >> 11) * 0x1.0p-53 - 0.5;
  return v;
}

}  // namespace

TEST_CASE("constant diffusivity gives the standard stencil") {
  const Grid g{10, 100, 1.0};
  const TridiagonalOperator op = build_operator(constant_coefficients(0.7), g);
  REQUIRE(op.size() == 9);
  const double s = 0.7 / (g.h() * g.h());
  for (Eigen::Index j = 0; j < op.size(); ++j) {
    CHECK(op.diag[j] == Approx(-2 * s));
    if (j > 0) CHECK(op.lower[j] == Approx(s));
    if (j + 1 < op.size()) CHECK(op.upper[j] == Approx(s));
  }
}

TEST_CASE("discrete eigenvectors of the Laplacian") {
  const Grid g{64, 100, 1.0};
  const double theta = 1.3;
  const TridiagonalOperator op = build_operator(constant_coefficients(theta), g);
  for (int k : {1, 5, 30}) {
    Eigen::VectorXd e(op.size());
    for (Eigen::Index j = 0; j < e.size(); ++j) e[j] = std::sin(k * pi * (j + 1) * g.h());
    const double mu = -theta * 4 / (g.h() * g.h()) * std::pow(std::sin(k * pi * g.h() / 2), 2);
    CHECK((op.apply(e) - mu * e).cwiseAbs().maxCoeff() < 1e-9 * std::abs(mu));
  }
}

TEST_CASE("variable diffusivity matches a dense flux assembly") {
  const Grid g{4, 10, 1.0};
  CoefficientField c = constant_coefficients(1.0);
  c.theta = [](double x) { return 1.0 + x; };
  c.grad_theta = [](double) { return 1.0; };
  const Eigen::MatrixXd a = build_operator(c, g).dense();

  const double h = g.h();
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(3, 3);
  for (int j = 1; j <= 3; ++j) {
    const double left = 0.5 * (c.theta((j - 1) * h) + c.theta(j * h));
    const double right = 0.5 * (c.theta(j * h) + c.theta((j + 1) * h));
    ref(j - 1, j - 1) = -(left + right) / (h * h);
    if (j > 1) ref(j - 1, j - 2) = left / (h * h);
    if (j < 3) ref(j - 1, j) = right / (h * h);
  }
  CHECK((a - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("drift and reaction terms") {
  const Grid g{8, 10, 1.0};
  CoefficientField c = constant_coefficients(1.0);
  c.a = [](double) { return 2.0; };
  c.b = [](double) { return -3.0; };
  const TridiagonalOperator op = build_operator(c, g);
  const double h = g.h();
  CHECK(op.upper[2] == Approx(1 / (h * h) + 2.0 / (2 * h)));
  CHECK(op.lower[2] == Approx(1 / (h * h) - 2.0 / (2 * h)));
  CHECK(op.diag[2] == Approx(-2 / (h * h) - 3.0));
  c.theta = [](double x) { return x - 0.5; };
  CHECK(code_of([&] { build_operator(c, g); }) == Errc::NonPositiveDiffusivity);
}

TEST_CASE("Thomas solver") {
  SUBCASE("identity") {
    TridiagonalOperator id{Eigen::VectorXd::Zero(5), Eigen::VectorXd::Ones(5), Eigen::VectorXd::Zero(5)};
    const Eigen::VectorXd r = random_vector(5, 1);
    CHECK((thomas_solve(id, r) - r).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("random diagonally dominant system against dense elimination") {
    const Eigen::Index n = 64;
    TridiagonalOperator sys{random_vector(n, 2), random_vector(n, 3), random_vector(n, 4)};
    sys.diag.array() += 2.5;
    const Eigen::VectorXd r = random_vector(n, 5);
    const Eigen::VectorXd dense = sys.dense().fullPivLu().solve(r);
    CHECK((thomas_solve(sys, r) - dense).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("implicit step round trip") {
    const Grid g{200, 1000, 1.0};
    const TridiagonalOperator sys = implicit_system(build_operator(constant_coefficients(0.5), g), g.dt());
    const Eigen::VectorXd v = random_vector(sys.size(), 6);
    CHECK((thomas_solve(sys, sys.apply(v)) - v).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("zero pivot") {
    TridiagonalOperator sys{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
    CHECK(code_of([&] { TridiagonalSolver s(sys); }) == Errc::ZeroPivot);
  }
}

TEST_CASE("noise-free eigenvector decay") {
  const auto [k1, k2] = standard_kernels();
  SimConfig cfg;
  cfg.grid = {100, 400, 0.1};
  const double theta = 0.8;
  cfg.coeffs = constant_coefficients(theta, 0.0);
  const int k = 3;
  cfg.x0_initial = InitialCondition::function([&](double y) { return std::sin(k * pi * y); });
  const RescaledProbe probe = rescale(k2, 0.2, 0.4);
  const MeasurementPath path = simulate(cfg, {probe})[0];
  const double h = cfg.grid.h();
  const double mu = 4 / (h * h) * std::pow(std::sin(k * pi * h / 2), 2);
  const double factor = 1.0 / (1.0 + cfg.grid.dt() * theta * mu);
  for (long i : {1L, 50L, 400L}) {
    CHECK(path.x_series[i] == Approx(path.x_series[0] * std::pow(factor, i)).epsilon(1e-10));
  }
}

TEST_CASE("zero initial data and the first sample") {
  const auto [k1, k2] = standard_kernels();
  SimConfig cfg;
  cfg.grid = {100, 200, 0.1};
  cfg.coeffs = constant_coefficients(1.0, 0.0);
  const RescaledProbe probe = rescale(k1, 0.2, 0.5);
  const MeasurementPath zero = simulate(cfg, {probe})[0];
  CHECK(zero.x_series.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.xlap_series.cwiseAbs().maxCoeff() == 0.0);

  cfg.x0_initial = InitialCondition::two_peaks();
  const MeasurementPath p = simulate(cfg, {probe})[0];
  CHECK(p.x_series[0] == probe_inner_product(cfg.x0_initial.nodal(cfg.grid), probe));
  const double exact = integrate([&](double y) { return cfg.x0_initial.value(y) * probe(y); }, probe.lower(),
                                 probe.upper());
  CHECK(p.x_series[0] == Approx(exact).epsilon(1e-3).scale(1e-8));
}

TEST_CASE("deterministic propagation matches the spectral sum") {
  const auto [k1, k2] = standard_kernels();
  SimConfig cfg;
  cfg.grid = {500, 25000, 0.1};
  cfg.coeffs = constant_coefficients(1.0, 0.0);
  cfg.x0_initial = InitialCondition::function([](double y) { return std::sin(pi * y); });
  const auto rows = deterministic_heat_check(cfg, rescale(k1, 0.12, 0.6));
  REQUIRE(rows.size() == 101);
  CHECK(rows.back().t == Approx(0.1));
  CHECK(std::abs(rows.back().fd_value - rows.back().spectral_value) <= 1e-3 * std::abs(rows.back().spectral_value));
  CHECK(rows.front().fd_value == Approx(rows.front().spectral_value).epsilon(1e-6));
}

TEST_CASE("simulation is reproducible and seed dependent") {
  const auto [k1, k2] = standard_kernels();
  SimConfig cfg;
  cfg.grid = {100, 1000, 1.0};
  cfg.coeffs = constant_coefficients(0.5, 1.0);
  cfg.seed = 11;
  const std::vector<RescaledProbe> probes{rescale(k1, 0.1, 0.3), rescale(k2, 0.2, 0.7)};
  const auto a = simulate(cfg, probes);
  const auto b = simulate(cfg, probes);
  CHECK(a[0].x_series == b[0].x_series);
  CHECK(a[1].xlap_series == b[1].xlap_series);
  cfg.seed = 12;
  CHECK(simulate(cfg, probes)[0].x_series != a[0].x_series);
  REQUIRE(a[0].qv_analytic.has_value());
  CHECK(*a[0].qv_analytic == Approx(std::pow(l2_norm(k1, 0), 2)).epsilon(1e-6));
}

TEST_CASE("finite-time variance against the spectral oracle") {
  const auto [k1, k2] = standard_kernels();
  const double theta = 0.5;
  const double T = 0.1;
  const RescaledProbe probe = rescale(k1, 0.2, 0.5);
  SimConfig cfg;
  cfg.grid = {100, 5000, T};
  cfg.coeffs = constant_coefficients(theta, 1.0);
  const int reps = 2000;
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  for (int r = 0; r < reps; ++r) {
    cfg.seed = seed_derivation(77, r, 0);
    const double x = simulate(cfg, {probe})[0].x_series[cfg.grid.n];
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double var = s2 / reps - std::pow(s / reps, 2);
  const double se = std::sqrt((s4 / reps - std::pow(s2 / reps, 2)) / reps);
  const OracleModel m = make_oracle(theta, 1.0, {probe});
  const double exact = covariance(m, T, T, OracleModel::value(0), OracleModel::value(0), false);
  CHECK(std::abs(var - exact) <= 3 * se);
}

TEST_CASE("domain and grid errors") {
  const auto [k1, k2] = standard_kernels();
  SimConfig cfg;
  cfg.grid = {50, 100, 1.0};
  cfg.coeffs = constant_coefficients(1.0);
  CHECK(code_of([&] { simulate(cfg, {rescale_on_line(k1, 0.1, 0.05)}); }) == Errc::ProbeOutsideDomain);
  cfg.grid.m = 1;
  CHECK_THROWS_AS(simulate(cfg, {}), Error);
  CHECK_THROWS_AS((Grid{10, 0, 1.0}.validate()), Error);
  CHECK_THROWS_AS((Grid{10, 10, -1.0}.validate()), Error);
}

TEST_CASE("snapshot round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "localest_snap_test";
  std::filesystem::create_directories(dir);
  SimConfig cfg;
  cfg.grid = {20, 300, 1.0};
  cfg.coeffs = constant_coefficients(1.0, 0.0);
  cfg.x0_initial = InitialCondition::function([](double y) { return std::sin(pi * y); });
  cfg.snapshot_path = (dir / "s.bin").string();
  simulate(cfg, {});
  const Eigen::MatrixXd snaps = read_snapshots(cfg.snapshot_path, 20);
  REQUIRE(snaps.rows() == 101);
  REQUIRE(snaps.cols() == 21);
  CHECK(snaps(0, 10) == Approx(1.0));
  CHECK(snaps(0, 0) == 0.0);
  CHECK(snaps(100, 10) < snaps(50, 10));
  std::filesystem::remove_all(dir);
}
