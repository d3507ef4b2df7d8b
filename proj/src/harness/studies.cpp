#include "localest/harness/studies.hpp"

#include <nlohmann/json.hpp>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "localest/error.hpp"
#include "localest/fd_solver.hpp"
#include "localest/harness/csv.hpp"
#include "localest/rng.hpp"
#include "localest/spectral_oracle.hpp"

#ifndef LOCALEST_VERSION
#define LOCALEST_VERSION "unknown"
#endif

namespace localest::harness {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// stream tags for seed_derivation
constexpr std::uint16_t tag_rmse = 1;
constexpr std::uint16_t tag_center = 2;
constexpr std::uint16_t tag_exact = 3;
constexpr std::uint16_t tag_fine = 4;
constexpr std::uint16_t tag_wick = 5;
constexpr std::uint16_t tag_simulate = 6;

template <typename F>
void parallel_indices(int count, int threads, F&& body) {
  if (count <= 0) return;
  tbb::task_arena arena(threads);
  arena.execute([&] { tbb::parallel_for(0, count, [&](int i) { body(i); }); });
}

struct Probe {
  std::string kernel;
  double delta;
  double x0;
  RescaledProbe probe;
  ProxyConstant proxy;
};

std::vector<Probe> fd_probes(const ExperimentConfig& config, const std::vector<double>& deltas) {
  std::vector<Probe> out;
  for (const auto& name : config.kernels) {
    const KernelSpec k = kernel_by_name(name);
    for (double delta : deltas) {
      const ProxyConstant pc = proxy_constant(k, delta);
      for (double x0 : config.x0s) out.push_back({name, delta, x0, rescale(k, delta, x0), pc});
    }
  }
  return out;
}

SimConfig sim_config(const ExperimentConfig& config, std::uint64_t seed) {
  SimConfig sim;
  sim.grid = config.grid;
  sim.coeffs = coefficients(config);
  sim.x0_initial = initial_condition(config);
  sim.seed = seed;
  return sim;
}

std::string path_in(const ExperimentConfig& config, const std::string& file) {
  return (std::filesystem::path(config.output_dir) / file).string();
}

void print_warnings(const ExperimentConfig& config) {
  for (const auto& w : config.warnings()) std::cerr << "warning: " << w << '\n';
}

const KernelSpec first_paired_kernel(const ExperimentConfig& config) {
  for (const auto& name : config.kernels) {
    KernelSpec k = kernel_by_name(name);
    if (k.has_antiderivative()) return k;
  }
  throw Error(Errc::ConfigError, "kernels.names: study needs a kernel with an antiderivative pair");
}

struct Moments {
  double sum = 0.0;
  double sum2 = 0.0;
  int n = 0;
  void add(double v) {
    sum += v;
    sum2 += v * v;
    ++n;
  }
  double mean() const { return n ? sum / n : nan; }
  double var() const { return n ? sum2 / n - mean() * mean() : nan; }
};

}  // namespace

std::vector<RmseRow> rmse_study(const ExperimentConfig& config) {
  config.validate();
  print_warnings(config);
  const std::vector<Probe> probes = fd_probes(config, config.deltas);
  std::vector<RescaledProbe> rescaled;
  for (const auto& p : probes) rescaled.push_back(p.probe);
  const CoefficientField field = coefficients(config);
  const int reps = config.replications;
  const std::size_t np = probes.size();

  // estimates[rep][2 * probe + estimator], nan when the replication failed
  std::vector<std::vector<double>> estimates(reps, std::vector<double>(2 * np, nan));
  parallel_indices(reps, thread_count(config), [&](int rep) {
    try {
      const auto paths = simulate(sim_config(config, seed_derivation(config.seed, rep, tag_rmse)), rescaled);
      for (std::size_t p = 0; p < np; ++p) {
        try {
          estimates[rep][2 * p] = augmented_mle(paths[p]).theta_hat;
        } catch (const Error&) {
        }
        try {
          estimates[rep][2 * p + 1] = proxy_mle(paths[p], probes[p].proxy, config.qv_mode).theta_hat;
        } catch (const Error&) {
        }
      }
    } catch (const std::exception& e) {
      std::cerr << "replication " << rep << " failed: " << e.what() << '\n';
    }
  });

  std::vector<RmseRow> rows;
  for (std::size_t p = 0; p < np; ++p) {
    const double truth = field.theta(probes[p].probe.x0);
    for (int e = 0; e < 2; ++e) {
      Moments err;
      for (int rep = 0; rep < reps; ++rep) {
        const double v = estimates[rep][2 * p + e];
        if (std::isfinite(v)) err.add(v - truth);
      }
      const double sd = err.n > 1 ? std::sqrt(err.var() * err.n / (err.n - 1)) : nan;
      rows.push_back({probes[p].delta, std::string(to_string(e == 0 ? EstimatorKind::Augmented : EstimatorKind::Proxy)),
                      probes[p].kernel, probes[p].x0, err.n ? std::sqrt(err.sum2 / err.n) : nan, err.mean(),
                      sd, err.n, truth});
    }
  }
  return rows;
}

std::vector<CurveRow> center_study(const ExperimentConfig& config) {
  config.validate();
  print_warnings(config);
  const double delta = config.deltas.front();
  const std::vector<Probe> probes = fd_probes(config, {delta});
  std::vector<RescaledProbe> rescaled;
  for (const auto& p : probes) rescaled.push_back(p.probe);
  const CoefficientField field = coefficients(config);
  const auto paths = simulate(sim_config(config, seed_derivation(config.seed, 0, tag_center)), rescaled);

  std::vector<CurveRow> rows;
  std::string current;
  double sigma_a = nan;
  double sigma_p = nan;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const auto& probe = probes[p];
    if (probe.kernel != current) {
      current = probe.kernel;
      const KernelSpec k = kernel_by_name(current);
      const LocalCoefficients unit;
      sigma_a = sigma_A(k, unit, config.grid.T).closed_form;
      sigma_p = k.has_antiderivative() ? proxy_constants(k, unit, config.grid.T).sigma_P : nan;
    }
    for (int e = 0; e < 2; ++e) {
      const auto kind = e == 0 ? EstimatorKind::Augmented : EstimatorKind::Proxy;
      CurveRow row{probe.probe.x0, std::string(to_string(kind)), probe.kernel, nan, nan, nan,
                   field.theta(probe.probe.x0), "ok"};
      try {
        const EstimateReport r = kind == EstimatorKind::Augmented
                                     ? augmented_mle(paths[p])
                                     : proxy_mle(paths[p], probe.proxy, config.qv_mode);
        row.theta_hat = r.theta_hat;
        if (r.assumption_violated) row.status = "assumption-violated";
        const double s = kind == EstimatorKind::Augmented ? sigma_a : sigma_p;
        if (std::isfinite(s) && r.theta_hat > 0) {
          const ConfidenceInterval ci = confidence_interval(r.theta_hat, delta, s, config.alpha);
          row.ci_lo = ci.lo;
          row.ci_hi = ci.hi;
        }
      } catch (const Error& err) {
        row.status = std::string(to_string(err.code()));
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<CoverageRow> coverage_study(const ExperimentConfig& config) {
  config.validate();
  const KernelSpec k = first_paired_kernel(config);
  const double theta = config.oracle_theta;
  const double sigma = config.oracle_sigma;
  const double T = config.grid.T;
  const LocalCoefficients local{theta, 0.0, 0.0, sigma, 0.0};
  const double sigma_a = sigma_A(k, local, T).closed_form;
  const double sigma_p = proxy_constants(k, local, T).sigma_P;
  const int reps = config.replications;
  const int threads = thread_count(config);
  const double level = 1.0 - config.alpha;

  std::vector<CoverageRow> rows;
  for (double delta : config.deltas) {
    const OracleModel model = make_oracle(theta, sigma, {rescale(k, delta, config.x0s.front())});
    const double sd_a = delta * std::sqrt(theta * sigma_a);
    const double sd_p = delta * std::sqrt(theta * sigma_p);
    auto covered = [&](double est, double s) {
      if (!(est > 0)) return false;
      const ConfidenceInterval ci = confidence_interval(est, delta, s, config.alpha);
      return ci.lo <= theta && theta <= ci.hi;
    };

    // columns: continuous estimate, discrete estimate
    std::vector<std::array<double, 2>> aug(reps, {nan, nan});
    parallel_indices(reps, threads, [&](int rep) {
      const auto path = simulate_exact(model, config.oracle_steps, T,
                                       seed_derivation(config.seed, rep, tag_exact), true)[0];
      const AugmentedDecomposition d = augmented_decomposition(path, theta);
      aug[rep] = {d.continuous_estimate(theta), d.theta_hat};
    });

    const ProxyConstant pc = proxy_constant(k, delta);
    const StationarySampler sampler(model, 0, config.oracle_fine_steps, T);
    std::vector<std::array<double, 2>> prox(reps, {nan, nan});
    parallel_indices((reps + 1) / 2, threads, [&](int pair) {
      const auto [a, b] = sampler.sample(seed_derivation(config.seed, pair, tag_fine));
      const MeasurementPath* both[2] = {&a, &b};
      for (int i = 0; i < 2 && 2 * pair + i < reps; ++i) {
        prox[2 * pair + i] = {proxy_mle(*both[i], pc, QvMode::Analytic).theta_hat,
                              proxy_mle(*both[i], pc, QvMode::Realized).theta_hat};
      }
    });

    const char* names[4] = {"augmented", "augmented-discrete", "proxy", "proxy-realized"};
    for (int e = 0; e < 4; ++e) {
      const auto& src = e < 2 ? aug : prox;
      const double s = e < 2 ? sigma_a : sigma_p;
      const double sd = e < 2 ? sd_a : sd_p;
      Moments z;
      int hits = 0;
      for (int rep = 0; rep < reps; ++rep) {
        const double est = src[rep][e % 2];
        z.add((est - theta) / sd);
        hits += covered(est, s);
      }
      rows.push_back({delta, names[e], level, reps ? static_cast<double>(hits) / reps : nan, reps,
                      z.mean(), z.var()});
    }
  }
  return rows;
}

std::vector<OracleCheck> oracle_checks(const ExperimentConfig& config) {
  config.validate();
  const auto [k1, k2] = standard_kernels();
  std::vector<OracleCheck> rows;
  auto add = [&](const std::string& name, double value, double reference, double tol) {
    const double rel = reference != 0.0 ? std::abs(value - reference) / std::abs(reference) : std::abs(value);
    rows.push_back({name, value, reference, rel, rel <= tol});
  };
  const double n_k = l2_norm(k1, 0);
  const double n_dk = l2_norm(k1, 1);
  const double n_dkt = antiderivative_gradient_norm(k1);

  for (double theta : {0.5, 1.0, 2.0}) {
    for (double delta : {0.2, 0.1, 0.05}) {
      const OracleModel m = make_oracle(theta, 1.0, {rescale(k1, delta, 0.5)});
      std::ostringstream name;
      name << "stationary_var_theta" << theta << "_delta" << delta;
      add(name.str(), covariance(m, 0, 0, 0, 0, true), delta * delta * n_dkt * n_dkt / (2 * theta), 1e-5);
      if (theta == 1.0 && delta == 0.05) {
        add("stationary_cross_cov_delta0.05", covariance(m, 0, 0, 1, 0, true), -n_k * n_k / 2, 1e-5);
        add("laplacian_coefficients_delta0.05", laplacian_consistency(m), 0.0, 1e-8);
      }
    }
  }

  const auto fisher = fisher_limit_check(k1, 1.0, 1.0, {0.1, 0.05, 0.02}, 1.0);
  for (const auto& r : fisher) {
    std::ostringstream name;
    name << "fisher_limit_delta" << r.delta;
    add(name.str(), r.value, r.limit, 0.03);
  }
  add("fisher_gap_monotone", fisher[0].rel_gap > fisher[1].rel_gap && fisher[1].rel_gap > fisher[2].rel_gap,
      1.0, 0.0);

  for (const KernelSpec* k : {&k1, &k2}) {
    auto lap = [&](double x) { return k->deriv2(x); };
    const FourierTable t = fourier_table(lap, k->support_radius);
    add("parseval_lap_" + k->name, t.parseval_norm2(), t.norm2, 1e-6);
    add("psi_closed_form_" + k->name, psi(t, t, 1.0), 0.5 * std::pow(l2_norm(*k, 1), 2), 1e-6);
  }
  const LocalCoefficients unit;
  const ProxyConstants pc = proxy_constants(k1, unit, 1.0);
  add("sigmaP_routes_k1", pc.sigma_P_route_a, pc.sigma_P_route_b, 1e-5);
  const VarianceOrdering vo = variance_ordering(k1, unit, 1.0);
  add("ordering_sigmaP_over_mid_k1", vo.sigma_P / vo.mid, 1.0, std::numeric_limits<double>::infinity());
  rows.back().pass = vo.sigma_P >= vo.mid;
  add("ordering_mid_over_sigmaA_k1", vo.mid / vo.sigma_A, 1.0, std::numeric_limits<double>::infinity());
  rows.back().pass = vo.mid >= vo.sigma_A;
  add("sigmaA_psi_route_k1", sigma_A(k1, unit, 1.0).psi_route, 2 * n_k * n_k / (n_dk * n_dk), 1e-6);

  // Wick: Monte Carlo variance of int X^2 dt over fine stationary paths
  {
    const double delta = 0.1;
    const OracleModel m = make_oracle(1.0, 1.0, {rescale(k1, delta, 0.5)});
    const double reference = wick_variance(m, 1.0, OracleModel::value(0), true);
    const StationarySampler sampler(m, 0, config.oracle_fine_steps, 1.0);
    const int reps = std::max(2, config.replications);
    std::vector<double> energy(reps, nan);
    parallel_indices((reps + 1) / 2, thread_count(config), [&](int pair) {
      const auto [a, b] = sampler.sample(seed_derivation(config.seed, pair, tag_wick));
      energy[2 * pair] = time_integral(a.x_series, 2, a.dt);
      if (2 * pair + 1 < reps) energy[2 * pair + 1] = time_integral(b.x_series, 2, b.dt);
    });
    Moments mo;
    for (double v : energy) mo.add(v);
    add("wick_variance_delta0.1", mo.var() * reps / (reps - 1), reference, 0.10);
  }

  const auto scaling = scaling_limit_check(10.0, 1.0, k1, {0.2, 0.1, 0.05, 0.02});
  bool decreasing = true;
  for (std::size_t i = 0; i < scaling.size(); ++i) {
    std::ostringstream name;
    name << "scaling_limit_theta10_delta" << scaling[i].delta;
    add(name.str(), scaling[i].rescaled, scaling[i].limit, std::numeric_limits<double>::infinity());
    if (i > 0) decreasing = decreasing && scaling[i].gap < scaling[i - 1].gap;
  }
  add("scaling_gap_decreasing", decreasing, 1.0, 0.0);

  {
    const Grid g{64, 1, 1.0};
    const TridiagonalOperator sys = implicit_system(build_operator(constant_coefficients(0.7), g), 1e-3);
    Eigen::VectorXd rhs(sys.size());
    SplitMix64 gen(config.seed);
    for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs[i] = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    const Eigen::VectorXd dense = sys.dense().partialPivLu().solve(rhs);
    add("thomas_vs_dense_maxabs", (thomas_solve(sys, rhs) - dense).cwiseAbs().maxCoeff(), 0.0, 1e-10);
  }
  return rows;
}

std::vector<AsymptoticsRow> asymptotics_table(const ExperimentConfig& config) {
  config.validate();
  const CoefficientField field = coefficients(config);
  const LocalCoefficients local = LocalCoefficients::at(field, config.x0s.front());
  std::vector<AsymptoticsRow> rows;
  for (const auto& name : config.kernels) {
    const KernelSpec k = kernel_by_name(name);
    AsymptoticsRow row{name, mu_A(k, local).general, sigma_A(k, local, config.grid.T).closed_form,
                       nan, nan, nan, nan};
    if (k.has_antiderivative()) {
      const ProxyConstants pc = proxy_constants(k, local, config.grid.T);
      row.mu1_P = pc.mu1;
      row.mu2_P = pc.mu2;
      row.sigma_P = pc.sigma_P;
      row.ratio = variance_ordering(k, local, config.grid.T).ratio;
    }
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<double>& deltas, const std::vector<double>& rmse) {
  if (deltas.size() != rmse.size() || deltas.size() < 2) {
    throw Error(Errc::InvalidArgument, "slope fit needs two or more matching points");
  }
  Eigen::MatrixXd a(deltas.size(), 2);
  Eigen::VectorXd y(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log10(deltas[i]);
    y[i] = std::log10(rmse[i]);
  }
  return a.colPivHouseholderQr().solve(y)[1];
}

void write_manifest(const ExperimentConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs) {
  const std::string canonical = config.canonical();
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  nlohmann::ordered_json j;
  j["software"] = "localest";
  j["version"] = LOCALEST_VERSION;
  j["command"] = command;
  j["study"] = std::string(to_string(config.study));
  j["seed"] = config.seed;
  j["config_hash"] = hash;
  j["config"] = canonical;
  std::vector<std::string> names;
  for (const auto& o : outputs) names.push_back(std::filesystem::path(o).filename().string());
  j["outputs"] = names;
  write_file_atomic(path_in(config, "manifest.json"), j.dump(2) + "\n");
}

std::vector<std::string> run_simulation(const ExperimentConfig& config, bool snapshots) {
  config.validate();
  print_warnings(config);
  const std::vector<Probe> probes = fd_probes(config, config.deltas);
  std::vector<RescaledProbe> rescaled;
  for (const auto& p : probes) rescaled.push_back(p.probe);
  SimConfig sim = sim_config(config, seed_derivation(config.seed, 0, tag_simulate));
  std::vector<std::string> outputs;
  if (snapshots) {
    std::filesystem::create_directories(config.output_dir);
    sim.snapshot_path = path_in(config, "snapshots.bin");
    outputs.push_back(sim.snapshot_path);
  }
  const auto paths = simulate(sim, rescaled);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    std::ostringstream name;
    name << "path_" << probes[p].kernel << "_d" << format_double(probes[p].delta) << "_x"
         << format_double(probes[p].x0) << ".csv";
    std::ostringstream body;
    write_csv(paths[p], body);
    const std::string file = path_in(config, name.str());
    write_file_atomic(file, body.str());
    outputs.push_back(file);
  }
  write_manifest(config, "simulate", outputs);
  return outputs;
}

std::vector<std::string> run_estimation(const ExperimentConfig& config) {
  ExperimentConfig one = config;
  one.replications = 1;
  CsvTable table({"x0", "delta", "estimator", "kernel", "theta_hat", "ci_lo", "ci_hi", "theta_true", "status"});
  for (double delta : config.deltas) {
    one.deltas = {delta};
    for (const auto& r : center_study(one)) {
      table.add_row({format_double(r.x0), format_double(delta), r.estimator, r.kernel, format_double(r.theta_hat),
                     format_double(r.ci_lo), format_double(r.ci_hi), format_double(r.theta_true), r.status});
    }
  }
  const std::string file = path_in(config, "estimates.csv");
  table.write_atomic(file);
  write_manifest(config, "estimate", {file});
  return {file};
}

std::vector<std::string> run(const ExperimentConfig& config, const std::string& command) {
  config.validate();
  std::vector<std::string> outputs;
  switch (config.study) {
    case StudyKind::FigRmse: {
      CsvTable t({"delta", "estimator", "kernel", "x0", "rmse", "bias", "sd", "n_ok"});
      for (const auto& r : rmse_study(config)) {
        t.add_row({format_double(r.delta), r.estimator, r.kernel, format_double(r.x0), format_double(r.rmse),
                   format_double(r.bias), format_double(r.sd), std::to_string(r.n_ok)});
      }
      outputs.push_back(path_in(config, "rmse.csv"));
      t.write_atomic(outputs.back());
      break;
    }
    case StudyKind::FigCenter: {
      CsvTable t({"x0", "estimator", "kernel", "theta_hat", "ci_lo", "ci_hi", "theta_true", "status"});
      for (const auto& r : center_study(config)) {
        t.add_row({format_double(r.x0), r.estimator, r.kernel, format_double(r.theta_hat), format_double(r.ci_lo),
                   format_double(r.ci_hi), format_double(r.theta_true), r.status});
      }
      outputs.push_back(path_in(config, "curve.csv"));
      t.write_atomic(outputs.back());
      break;
    }
    case StudyKind::FigHeatmap: {
      print_warnings(config);
      std::filesystem::create_directories(config.output_dir);
      SimConfig sim = sim_config(config, seed_derivation(config.seed, 0, tag_simulate));
      sim.snapshot_path = path_in(config, "heatmap.bin");
      simulate(sim, {});
      outputs.push_back(sim.snapshot_path);
      nlohmann::ordered_json meta;
      const long every = std::max(1L, config.grid.n / 100);
      meta["m"] = config.grid.m;
      meta["rows"] = config.grid.n / every + 1;
      meta["row_dt"] = every * config.grid.dt();
      meta["format"] = "little-endian float64, one row of m+1 nodal values per snapshot";
      outputs.push_back(path_in(config, "heatmap.json"));
      write_file_atomic(outputs.back(), meta.dump(2) + "\n");
      break;
    }
    case StudyKind::Coverage: {
      CsvTable t({"delta", "estimator", "level", "covered_fraction", "n"});
      CsvTable clt({"delta", "estimator", "mean_z", "var_z", "n"});
      for (const auto& r : coverage_study(config)) {
        t.add_row({format_double(r.delta), r.estimator, format_double(r.level), format_double(r.covered_fraction),
                   std::to_string(r.n)});
        clt.add_row({format_double(r.delta), r.estimator, format_double(r.mean_z), format_double(r.var_z),
                     std::to_string(r.n)});
      }
      outputs.push_back(path_in(config, "coverage.csv"));
      t.write_atomic(outputs.back());
      outputs.push_back(path_in(config, "clt.csv"));
      clt.write_atomic(outputs.back());
      break;
    }
    case StudyKind::ValidateOracle: {
      CsvTable t({"check_name", "value", "reference", "rel_err", "pass"});
      for (const auto& r : oracle_checks(config)) {
        t.add_row({r.name, format_double(r.value), format_double(r.reference), format_double(r.rel_err),
                   r.pass ? "true" : "false"});
      }
      outputs.push_back(path_in(config, "oracle.csv"));
      t.write_atomic(outputs.back());
      break;
    }
    case StudyKind::AsymptoticsTable: {
      CsvTable t({"kernel", "mu_A", "sigma_A", "mu1_P", "mu2_P", "sigma_P", "ordering_ratio"});
      for (const auto& r : asymptotics_table(config)) {
        t.add_row({r.kernel, format_double(r.mu_A), format_double(r.sigma_A), format_double(r.mu1_P),
                   format_double(r.mu2_P), format_double(r.sigma_P), format_double(r.ratio)});
      }
      outputs.push_back(path_in(config, "asymptotics.csv"));
      t.write_atomic(outputs.back());
      break;
    }
  }
  write_manifest(config, command, outputs);
  return outputs;
}

}  // namespace localest::harness
