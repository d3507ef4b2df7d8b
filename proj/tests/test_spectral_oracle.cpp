#include <doctest.h>

#include <cmath>
#include <numbers>

#include "localest/asymptotics.hpp"
#include "localest/error.hpp"
#include "localest/measurements.hpp"
#include "localest/rng.hpp"
#include "localest/spectral_oracle.hpp"

using namespace localest;
using doctest::Approx;
using std::numbers::pi;

namespace {

const KernelSpec& k1() {
  static const KernelSpec k = standard_kernels().first;
  return k;
}

constexpr int X = OracleModel::value(0);
constexpr int XL = OracleModel::laplacian(0);

}  // namespace

TEST_CASE("eigenvalues and trivial covariances") {
  const OracleModel m = make_oracle(1.0, 1.0, {rescale(k1(), 0.1, 0.5)});
  CHECK(m.lambda[0] == Approx(pi * pi));
  CHECK(covariance(m, 0.0, 0.0, X, X, false) == 0.0);
  CHECK(covariance(m, 0.0, 0.4, XL, X, false) == 0.0);
  CHECK(laplacian_consistency(m) < 1e-8);
  CHECK(m.tail_ratio <= 1e-10);
}

TEST_CASE("stationary variance identity") {
  const double g2 = std::pow(antiderivative_gradient_norm(k1()), 2);
  const double n2 = std::pow(l2_norm(k1(), 0), 2);
  for (double theta : {0.5, 1.0, 2.0}) {
    for (double delta : {0.2, 0.1, 0.05}) {
      for (double sigma : {1.0, 0.6}) {
        const OracleModel m = make_oracle(theta, sigma, {rescale(k1(), delta, 0.5)});
        CHECK(covariance(m, 0.7, 0.7, X, X, true) ==
              Approx(delta * delta * sigma * sigma * g2 / (2 * theta)).epsilon(1e-6));
        CHECK(covariance(m, 0.3, 0.3, XL, X, true) == Approx(-n2 * sigma * sigma / (2 * theta)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("single-mode model is an Ornstein-Uhlenbeck process") {
  OracleOptions opts;
  opts.k_max = 1;
  const OracleModel m = make_oracle(1.0, 1.0, {rescale(k1(), 0.2, 0.5)}, opts);
  const double v = covariance(m, 0.0, 0.0, X, X, true);
  for (double lag : {0.01, 0.1, 0.5}) {
    CHECK(covariance(m, 0.2, 0.2 + lag, X, X, true) == Approx(v * std::exp(-pi * pi * lag)).epsilon(1e-12));
  }
}

TEST_CASE("covariance matrices are symmetric and positive semidefinite") {
  const OracleModel m = make_oracle(1.0, 1.0, {rescale(k1(), 0.1, 0.4)});
  const Eigen::MatrixXd c = covariance_matrix(m, {0.1, 0.2, 0.35, 0.6, 1.0}, X, false);
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff() > -1e-15);
}

TEST_CASE("exact paths reproduce the covariance") {
  const OracleModel m = make_oracle(1.0, 1.0, {rescale(k1(), 0.2, 0.5)});
  const int reps = 5000;
  double sab = 0.0, sa = 0.0, sb = 0.0, sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    const MeasurementPath p = simulate_exact(m, 10, 1.0, seed_derivation(3, r, 0), false)[0];
    const double a = p.x_series[3];
    const double b = p.x_series[7];
    sa += a;
    sb += b;
    sab += a * b;
    sq += a * a * b * b;
  }
  const double cov = sab / reps - sa / reps * sb / reps;
  const double se = std::sqrt((sq / reps - std::pow(sab / reps, 2)) / reps);
  CHECK(std::abs(cov - covariance(m, 0.3, 0.7, X, X, false)) <= 3 * se);
}

TEST_CASE("exact paths carry their martingale increments") {
  const OracleModel m = make_oracle(2.0, 1.0, {rescale(k1(), 0.1, 0.5)});
  const MeasurementPath p = simulate_exact(m, 2048, 1.0, 5, true)[0];
  REQUIRE(p.noise_increments.has_value());
  const Eigen::VectorXd& dn = *p.noise_increments;
  CHECK(dn.size() == 2048);
  CHECK(dn.squaredNorm() == Approx(std::pow(l2_norm(k1(), 0), 2)).epsilon(0.1));
  CHECK(simulate_exact(m, 64, 1.0, 5, true)[0].x_series == simulate_exact(m, 64, 1.0, 5, true)[0].x_series);
}

TEST_CASE("stationary sampler") {
  const double delta = 0.1;
  const OracleModel m = make_oracle(1.0, 1.0, {rescale(k1(), delta, 0.5)});
  const StationarySampler sampler(m, 0, 4096, 1.0);
  CHECK(sampler.min_relative_eigenvalue() > -1e-10);
  const double v = covariance(m, 0, 0, X, X, true);
  const double vl = covariance(m, 0, 0, XL, XL, true);
  double sx = 0.0, sl = 0.0;
  int n = 0;
  for (int r = 0; r < 200; ++r) {
    const auto [a, b] = sampler.sample(seed_derivation(8, r, 0));
    for (const MeasurementPath* p : {&a, &b}) {
      for (Eigen::Index k = 0; k <= p->steps(); k += 256) {
        sx += p->x_series[k] * p->x_series[k];
        sl += p->xlap_series[k] * p->xlap_series[k];
        ++n;
      }
    }
  }
  CHECK(sx / n == Approx(v).epsilon(0.05));
  CHECK(sl / n == Approx(vl).epsilon(0.05));
}

TEST_CASE("Fisher information limit") {
  const auto rows = fisher_limit_check(k1(), 1.0, 1.0, {0.1, 0.05, 0.02}, 1.0);
  REQUIRE(rows.size() == 3);
  const double limit = std::pow(l2_norm(k1(), 1), 2) / 2;
  for (const auto& r : rows) {
    CHECK(r.limit == Approx(limit).epsilon(1e-8));
    CHECK(r.value == Approx(r.analytic).epsilon(1e-8));
  }
  CHECK(rows[2].rel_gap < 0.03);
  CHECK(rows[0].rel_gap > rows[1].rel_gap);
  CHECK(rows[1].rel_gap > rows[2].rel_gap);
  const auto doubled = fisher_limit_check(k1(), 1.0, 1.0, {0.05}, 2.0);
  CHECK(doubled[0].limit == Approx(2 * limit).epsilon(1e-12));
}

TEST_CASE("Wick variance quadrature") {
  for (double T : {0.5, 1.0, 3.0}) {
    CHECK(wick_variance([](double, double) { return 1.0; }, T) == Approx(2 * T * T).epsilon(1e-12));
  }
  OracleOptions opts;
  opts.k_max = 1;
  const OracleModel m = make_oracle(0.7, 1.3, {rescale(k1(), 0.2, 0.5)}, opts);
  const double lam = m.lambda[0];
  const double v = 1.3 * 1.3 * m.coef(0, X) * m.coef(0, X) / (2 * lam);
  for (double T : {0.05, 1.0}) {
    const double closed = v * v / (lam * lam) * (2 * lam * T - 1 + std::exp(-2 * lam * T));
    CHECK(wick_variance(m, T, X, true, 4) == Approx(closed).epsilon(1e-8));
  }
}

TEST_CASE("Monte Carlo energy variance") {
  const OracleModel m = make_oracle(1.0, 1.0, {rescale(k1(), 0.2, 0.5)});
  const StationarySampler sampler(m, 0, 8192, 1.0);
  const int pairs = 1000;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < pairs; ++r) {
    const auto [a, b] = sampler.sample(seed_derivation(4, r, 0));
    for (const MeasurementPath* p : {&a, &b}) {
      const double e = time_integral(p->x_series, 2, p->dt);
      s += e;
      s2 += e * e;
    }
  }
  const double var = (s2 - s * s / (2 * pairs)) / (2 * pairs - 1);
  CHECK(var == Approx(wick_variance(m, 1.0, X, true)).epsilon(0.12));
}

TEST_CASE("whole-line scaling limit") {
  const auto rows = scaling_limit_check(10.0, 1.0, k1(), {0.2, 0.1, 0.05, 0.02});
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].gap < rows[i - 1].gap);

  const FourierTable tab = fourier_table([](double x) { return k1().eval(x); }, 1.0);
  CHECK(whole_line_covariance(tab, 1.0, 1.0, 0.0, 0.0) == 0.0);
  CHECK(whole_line_covariance(tab, 2.0, 1.0, 0.5, 1.0) ==
        Approx(whole_line_covariance(tab, 1.0, 1.0, 1.0, 2.0) / 2).epsilon(1e-10));
}

TEST_CASE("oracle input errors") {
  CHECK_THROWS_AS(make_oracle(-1.0, 1.0, {rescale(k1(), 0.1, 0.5)}), Error);
  CHECK_THROWS_AS(make_oracle(1.0, 1.0, {}), Error);
  CHECK_THROWS_AS(make_oracle(1.0, 1.0, {rescale_on_line(k1(), 0.1, 0.02)}), Error);
}
