#include "localest/spectral_oracle.hpp"

#include <boost/random/normal_distribution.hpp>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <limits>

#include "localest/asymptotics.hpp"
#include "localest/error.hpp"
#include "localest/fourier.hpp"
#include "localest/quadrature.hpp"
#include "localest/rng.hpp"

namespace localest {

namespace {

// sqrt(2) sin(k pi x_j) for k = 1..k_max (rows) against the rule nodes (columns).
Eigen::MatrixXd sine_matrix(const Eigen::VectorXd& nodes, int k_max) {
  Eigen::MatrixXd s(k_max, nodes.size());
  for (Eigen::Index j = 0; j < nodes.size(); ++j) {
    for (int k = 0; k < k_max; ++k) s(k, j) = M_SQRT2 * std::sin((k + 1) * M_PI * nodes[j]);
  }
  return s;
}

QuadratureRule sine_rule(double lo, double hi, int k_max) {
  // two panels per half-period of the highest mode
  const int panels = std::max(32, static_cast<int>(std::ceil(2.0 * k_max * (hi - lo))));
  return QuadratureRule::composite(lo, hi, panels);
}

// Tail sums of f_k^2 / lambda_k from the top: tail[k] = sum over modes > k.
Eigen::VectorXd tails(const Eigen::VectorXd& energy) {
  Eigen::VectorXd t(energy.size() + 1);
  t[energy.size()] = 0.0;
  for (Eigen::Index k = energy.size() - 1; k >= 0; --k) t[k] = t[k + 1] + energy[k];
  return t;
}

double one_minus_2tanh_over(double x) {
  // 1 - 2 tanh(x/2) / x, stable for small x
  if (x < 1e-3) return x * x / 12.0 - x * x * x * x / 120.0;
  return 1.0 - 2.0 * std::tanh(0.5 * x) / x;
}

// Graded nodes on [0, L]: dyadic blocks towards 0, each split into `per_block` panels.
QuadratureRule graded_rule(double L, int per_block) {
  constexpr int levels = 48;
  const auto& gl = GaussLegendre16::get();
  QuadratureRule r;
  r.nodes.resize((levels + 1) * per_block * GaussLegendre16::size);
  r.weights.resize(r.nodes.size());
  Eigen::Index idx = 0;
  for (int j = 0; j <= levels; ++j) {
    const double top = L * std::ldexp(1.0, -j);
    const double bottom = j == levels ? 0.0 : top / 2.0;
    const double width = (top - bottom) / per_block;
    for (int p = 0; p < per_block; ++p) {
      const double mid = bottom + (p + 0.5) * width;
      for (int i = 0; i < GaussLegendre16::size; ++i, ++idx) {
        r.nodes[idx] = mid + 0.5 * width * gl.nodes[i];
        r.weights[idx] = 0.5 * width * gl.weights[i];
      }
    }
  }
  return r;
}

}  // namespace

Eigen::VectorXd sine_coefficients(const std::function<double(double)>& f, double lo, double hi,
                                  int k_max) {
  if (k_max < 1) throw Error(Errc::InvalidArgument, "k_max must be positive");
  const QuadratureRule rule = sine_rule(lo, hi, k_max);
  Eigen::VectorXd wf(rule.nodes.size());
  for (Eigen::Index j = 0; j < wf.size(); ++j) wf[j] = rule.weights[j] * f(rule.nodes[j]);
  return sine_matrix(rule.nodes, k_max) * wf;
}

OracleModel make_oracle(double theta, double sigma, std::vector<RescaledProbe> probes,
                        OracleOptions options) {
  if (!(theta > 0)) throw Error(Errc::NonPositiveDiffusivity, "theta must be positive");
  if (!(sigma > 0)) throw Error(Errc::InvalidArgument, "sigma must be positive");
  if (probes.empty()) throw Error(Errc::InvalidArgument, "oracle needs at least one probe");
  double lo = 1.0;
  double hi = 0.0;
  double delta_min = 1.0;
  for (const auto& p : probes) {
    if (p.lower() < 0.0 || p.upper() > 1.0) {
      throw Error(Errc::ProbeOutsideDomain, "probe support leaves (0, 1)");
    }
    lo = std::min(lo, p.lower());
    hi = std::max(hi, p.upper());
    delta_min = std::min(delta_min, p.delta);
  }
  // The Laplacian functional needs about twice the modes of the value functional.
  const int cap = static_cast<int>(std::ceil(32.0 / delta_min));
  const int scan = options.k_max > 0 ? options.k_max : cap + cap / 2;

  const auto nf = static_cast<Eigen::Index>(2 * probes.size());
  Eigen::MatrixXd coef(scan, nf);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto& probe = probes[p];
    const QuadratureRule rule = sine_rule(probe.lower(), probe.upper(), scan);
    Eigen::MatrixXd w(rule.nodes.size(), 2);
    for (Eigen::Index j = 0; j < rule.nodes.size(); ++j) {
      w(j, 0) = rule.weights[j] * probe.value(rule.nodes[j]);
      w(j, 1) = rule.weights[j] * probe.laplacian(rule.nodes[j]);
    }
    coef.middleCols(2 * static_cast<Eigen::Index>(p), 2) = sine_matrix(rule.nodes, scan) * w;
  }
  Eigen::VectorXd lambda(scan);
  for (int k = 0; k < scan; ++k) lambda[k] = theta * std::pow(M_PI * (k + 1), 2);

  OracleModel model;
  model.theta = theta;
  model.sigma = sigma;
  model.probes = std::move(probes);
  int k_max = scan;
  double worst = 0.0;
  if (options.k_max == 0) {
    k_max = 1;
    std::vector<Eigen::VectorXd> tail_sums;
    for (Eigen::Index f = 0; f < nf; ++f) {
      tail_sums.push_back(tails(coef.col(f).array().square().matrix().cwiseQuotient(lambda)));
    }
    auto tail_at = [&](int k) {
      double r = 0.0;
      for (const auto& t : tail_sums) r = std::max(r, t[k] / t[0]);
      return r;
    };
    while (k_max < cap && tail_at(k_max) >= options.tol) ++k_max;
    worst = tail_at(k_max);
    if (worst >= options.tol) {
      throw Error(Errc::TruncationInsufficient, "mode tail " + std::to_string(worst) +
                                                    " exceeds tolerance at k_max=" + std::to_string(k_max));
    }
  }
  model.k_max = k_max;
  model.lambda = lambda.head(k_max);
  model.coef = coef.topRows(k_max);
  model.tail_ratio = worst;
  return model;
}

double laplacian_consistency(const OracleModel& model) {
  double worst = 0.0;
  for (int p = 0; p < static_cast<int>(model.probes.size()); ++p) {
    const auto c = model.coef.col(OracleModel::value(p));
    const auto d = model.coef.col(OracleModel::laplacian(p));
    double err = 0.0;
    for (int k = 0; k < model.k_max; ++k) {
      err = std::max(err, std::abs(d[k] + std::pow(M_PI * (k + 1), 2) * c[k]));
    }
    worst = std::max(worst, err / d.cwiseAbs().maxCoeff());
  }
  return worst;
}

double covariance(const OracleModel& model, double t, double s, int i, int j, bool stationary) {
  if (t < 0 || s < 0) throw Error(Errc::InvalidArgument, "times must be nonnegative");
  const Eigen::ArrayXd l = model.lambda.array();
  Eigen::ArrayXd kernel = (-l * std::abs(t - s)).exp();
  if (!stationary) kernel -= (-l * (t + s)).exp();
  const Eigen::ArrayXd f = model.coef.col(i).array() * model.coef.col(j).array();
  return model.sigma * model.sigma * (f * kernel / (2.0 * l)).sum();
}

Eigen::MatrixXd covariance_matrix(const OracleModel& model, const std::vector<double>& times,
                                  int functional, bool stationary) {
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd c(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b <= a; ++b) {
      c(a, b) = c(b, a) = covariance(model, times[a], times[b], functional, functional, stationary);
    }
  }
  return c;
}

std::vector<MeasurementPath> simulate_exact(const OracleModel& model, long n, double T,
                                            std::uint64_t seed, bool stationary) {
  if (n < 1 || !(T > 0)) throw Error(Errc::InvalidArgument, "need n >= 1 and T > 0");
  const int K = model.k_max;
  const double dt = T / static_cast<double>(n);
  const double sigma = model.sigma;
  Eigen::ArrayXd decay(K), a11(K), a21(K), a22(K), stat_sd(K);
  for (int k = 0; k < K; ++k) {
    const double l = model.lambda[k];
    const double x = l * dt;
    const double var = sigma * sigma * -std::expm1(-2.0 * x) / (2.0 * l);
    const double cov = sigma * -std::expm1(-x) / l;
    decay[k] = std::exp(-x);
    a11[k] = std::sqrt(var);
    a21[k] = cov / a11[k];
    a22[k] = std::sqrt(dt * std::max(0.0, one_minus_2tanh_over(x)));
    stat_sd[k] = sigma / std::sqrt(2.0 * l);
  }

  const auto P = static_cast<int>(model.probes.size());
  Eigen::MatrixXd values(K, P), laps(K, P);
  for (int p = 0; p < P; ++p) {
    values.col(p) = model.coef.col(OracleModel::value(p));
    laps.col(p) = model.coef.col(OracleModel::laplacian(p));
  }
  std::vector<MeasurementPath> paths(P);
  for (int p = 0; p < P; ++p) {
    auto& path = paths[p];
    path.delta = model.probes[p].delta;
    path.x0 = model.probes[p].x0;
    path.dt = dt;
    path.T = T;
    path.seed = seed;
    path.x_series.resize(n + 1);
    path.xlap_series.resize(n + 1);
    path.noise_increments = Eigen::VectorXd(n);
    path.qv_analytic = analytic_quadratic_variation(model.probes[p], [sigma](double) { return sigma; }, T);
  }

  boost::random::normal_distribution<double> normal;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(K);
  if (stationary) {
    SplitMix64 gen = counter_stream(seed, 0);
    for (int k = 0; k < K; ++k) x[k] = stat_sd[k] * normal(gen);
  }
  Eigen::VectorXd dw(K);
  auto record = [&](long step) {
    const Eigen::VectorXd xv = values.transpose() * x;
    const Eigen::VectorXd xl = laps.transpose() * x;
    for (int p = 0; p < P; ++p) {
      paths[p].x_series[step] = xv[p];
      paths[p].xlap_series[step] = xl[p];
    }
  };
  record(0);
  for (long step = 0; step < n; ++step) {
    SplitMix64 gen = counter_stream(seed, static_cast<std::uint64_t>(step) + 1);
    for (int k = 0; k < K; ++k) {
      const double z1 = normal(gen);
      const double z2 = normal(gen);
      x[k] = decay[k] * x[k] + a11[k] * z1;
      dw[k] = a21[k] * z1 + a22[k] * z2;
    }
    const Eigen::VectorXd dn = sigma * (values.transpose() * dw);
    for (int p = 0; p < P; ++p) (*paths[p].noise_increments)[step] = dn[p];
    record(step + 1);
  }
  return paths;
}

StationarySampler::StationarySampler(const OracleModel& model, int probe, long n, double T)
    : n_(n), T_(T) {
  if (n < 1 || !(T > 0)) throw Error(Errc::InvalidArgument, "need n >= 1 and T > 0");
  if (probe < 0 || probe >= static_cast<int>(model.probes.size())) {
    throw Error(Errc::InvalidArgument, "probe index out of range");
  }
  const double dt = T / static_cast<double>(n);
  const Eigen::ArrayXd c = model.coef.col(OracleModel::value(probe)).array();
  const Eigen::ArrayXd d = model.coef.col(OracleModel::laplacian(probe)).array();
  const Eigen::ArrayXd scale = model.sigma * model.sigma / (2.0 * model.lambda.array());
  const Eigen::ArrayXd step = (-model.lambda.array() * dt).exp();

  // autocovariances at lags 0..n, embedded in a circulant of size 2n
  const long size = 2 * n;
  std::vector<std::complex<double>> rxx(size), rll(size), rxl(size);
  Eigen::ArrayXd power = Eigen::ArrayXd::Ones(model.k_max);
  for (long j = 0; j <= n; ++j) {
    const Eigen::ArrayXd e = scale * power;
    rxx[j] = (c * c * e).sum();
    rll[j] = (d * d * e).sum();
    rxl[j] = (c * d * e).sum();
    if (j > 0 && j < n) {
      rxx[size - j] = rxx[j];
      rll[size - j] = rll[j];
      rxl[size - j] = rxl[j];
    }
    power *= step;
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> sxx, sll, sxl;
  fft.fwd(sxx, rxx);
  fft.fwd(sll, rll);
  fft.fwd(sxl, rxl);

  l11_.resize(size);
  l21_.resize(size);
  l22_.resize(size);
  double top = 0.0;
  double low = std::numeric_limits<double>::infinity();
  for (long f = 0; f < size; ++f) {
    const double a = sxx[f].real();
    const double b = sxl[f].real();
    const double e = sll[f].real();
    const double half_trace = 0.5 * (a + e);
    const double root = std::sqrt(std::max(0.0, 0.25 * (a - e) * (a - e) + b * b));
    top = std::max(top, half_trace + root);
    low = std::min(low, half_trace - root);
    l11_[f] = std::sqrt(std::max(a, 0.0));
    l21_[f] = l11_[f] > 0 ? b / l11_[f] : 0.0;
    l22_[f] = std::sqrt(std::max(e - l21_[f] * l21_[f], 0.0));
  }
  min_rel_eig_ = low / top;

  prototype_.delta = model.probes[probe].delta;
  prototype_.x0 = model.probes[probe].x0;
  prototype_.dt = dt;
  prototype_.T = T;
  const double sigma = model.sigma;
  prototype_.qv_analytic =
      analytic_quadratic_variation(model.probes[probe], [sigma](double) { return sigma; }, T);
}

std::pair<MeasurementPath, MeasurementPath> StationarySampler::sample(std::uint64_t seed) const {
  const long size = 2 * n_;
  SplitMix64 gen(mix64(seed));
  boost::random::normal_distribution<double> normal;
  std::vector<std::complex<double>> yx(size), yl(size);
  for (long f = 0; f < size; ++f) {
    const std::complex<double> z1(normal(gen), normal(gen));
    const std::complex<double> z2(normal(gen), normal(gen));
    yx[f] = l11_[f] * z1;
    yl[f] = l21_[f] * z1 + l22_[f] * z2;
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> wx, wl;
  fft.fwd(wx, yx);
  fft.fwd(wl, yl);
  const double norm = 1.0 / std::sqrt(static_cast<double>(size));
  MeasurementPath a = prototype_;
  MeasurementPath b = prototype_;
  a.seed = b.seed = seed;
  a.x_series.resize(n_ + 1);
  a.xlap_series.resize(n_ + 1);
  b.x_series.resize(n_ + 1);
  b.xlap_series.resize(n_ + 1);
  for (long j = 0; j <= n_; ++j) {
    a.x_series[j] = norm * wx[j].real();
    b.x_series[j] = norm * wx[j].imag();
    a.xlap_series[j] = norm * wl[j].real();
    b.xlap_series[j] = norm * wl[j].imag();
  }
  return {std::move(a), std::move(b)};
}

std::vector<FisherRow> fisher_limit_check(const KernelSpec& k, double theta, double sigma,
                                          const std::vector<double>& deltas, double T, double x0) {
  if (!(T > 0)) throw Error(Errc::InvalidArgument, "horizon must be positive");
  const double limit = T * sigma * sigma * std::pow(l2_norm(k, 1), 2) / (2.0 * theta);
  std::vector<FisherRow> rows;
  for (double delta : deltas) {
    const OracleModel model = make_oracle(theta, sigma, {rescale(k, delta, x0)});
    const Eigen::ArrayXd l = model.lambda.array();
    const Eigen::ArrayXd d2 = model.coef.col(OracleModel::laplacian(0)).array().square();
    const double s2 = sigma * sigma;
    auto var = [&](double t) { return s2 * (d2 * -(-2.0 * t * l).unaryExpr([](double v) {
      return std::expm1(v);
    }) / (2.0 * l)).sum(); };

    // composite Simpson on dyadic blocks [T 2^{-j-1}, T 2^{-j}], panels doubled from 1024
    auto simpson = [&](int panels) {
      double total = 0.0;
      for (int j = 0; j < 60; ++j) {
        const double hi = T * std::ldexp(1.0, -j);
        const double lo = j == 59 ? 0.0 : hi / 2.0;
        const double h = (hi - lo) / panels;
        double s = var(lo) + var(hi);
        for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * var(lo + i * h);
        total += s * h / 3.0;
      }
      return total;
    };
    int panels = 1024;
    double value = simpson(panels);
    for (int round = 0; round < 8; ++round) {
      panels *= 2;
      const double next = simpson(panels);
      const bool done = std::abs(next - value) <= 1e-6 * std::abs(next);
      value = next;
      if (done) break;
    }
    const double analytic =
        s2 * (d2 / (2.0 * l) * (T + (-2.0 * l * T).unaryExpr([](double v) { return std::expm1(v); }) /
                                         (2.0 * l))).sum();
    const double scaled = delta * delta * value;
    rows.push_back({delta, scaled, delta * delta * analytic, limit, std::abs(scaled - limit) / limit});
  }
  return rows;
}

double wick_variance(const std::function<double(double, double)>& cov, double T, int n_quad) {
  if (!(T > 0)) throw Error(Errc::InvalidArgument, "horizon must be positive");
  if (n_quad < 1) throw Error(Errc::InvalidArgument, "n_quad must be positive");
  const QuadratureRule outer = graded_rule(T, n_quad);
  double total = 0.0;
  for (Eigen::Index a = 0; a < outer.nodes.size(); ++a) {
    const double t = outer.nodes[a];
    const QuadratureRule inner = graded_rule(t, n_quad);
    double s = 0.0;
    for (Eigen::Index b = 0; b < inner.nodes.size(); ++b) {
      const double c = cov(t, t - inner.nodes[b]);
      s += inner.weights[b] * c * c;
    }
    total += outer.weights[a] * s;
  }
  return 4.0 * total;
}

double wick_variance(const OracleModel& model, double T, int functional, bool stationary,
                     int n_quad) {
  return wick_variance(
      [&](double t, double s) { return covariance(model, t, s, functional, functional, stationary); },
      T, n_quad);
}

std::vector<ScalingRow> scaling_limit_check(double theta, double sigma, const KernelSpec& k,
                                            const std::vector<double>& deltas, double t,
                                            double t_prime, double x0) {
  const FourierTable table = fourier_table([&](double x) { return k.eval(x); }, k.support_radius);
  const double limit = whole_line_covariance(table, theta, sigma, t, t_prime);
  std::vector<ScalingRow> rows;
  for (double delta : deltas) {
    const OracleModel model = make_oracle(theta, sigma, {rescale(k, delta, x0)});
    const double d2 = delta * delta;
    const double rescaled =
        covariance(model, t * d2, t_prime * d2, OracleModel::value(0), OracleModel::value(0), false) / d2;
    rows.push_back({delta, rescaled, limit, std::abs(rescaled - limit)});
  }
  return rows;
}

}  // namespace localest
