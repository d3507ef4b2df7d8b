#pragma once

#include <string>
#include <vector>

#include "localest/estimators.hpp"
#include "localest/harness/config.hpp"

namespace localest::harness {

struct RmseRow {
  double delta;
  std::string estimator;
  std::string kernel;
  double x0;
  double rmse;
  double bias;
  double sd;
  int n_ok;
  double theta_true;
};

/// Finite-difference Monte Carlo: every replication measures all (kernel, delta, x0) probes on one path.
std::vector<RmseRow> rmse_study(const ExperimentConfig& config);

struct CurveRow {
  double x0;
  std::string estimator;
  std::string kernel;
  double theta_hat;
  double ci_lo;  // nan when no interval is available
  double ci_hi;
  double theta_true;
  std::string status;
};

/// One finite-difference path, pointwise estimates over the x0 list at the first delta.
std::vector<CurveRow> center_study(const ExperimentConfig& config);

struct CoverageRow {
  double delta;
  std::string estimator;
  double level;
  double covered_fraction;
  int n;
  double mean_z;  // standardized error (theta_hat - theta) / (delta sqrt(theta Sigma))
  double var_z;
};

/// Exact-oracle stationary replications at constant theta.
///
/// "augmented" evaluates theta + sum X^Lap_k dN_k / sum (X^Lap_k)^2 dt on exact
/// mode paths, i.e. the continuous-time estimator through its error
/// decomposition; "augmented-discrete" is the left-point estimator on the same
/// paths. "proxy" uses the analytic quadratic variation on fine circulant-embedding
/// paths; "proxy-realized" uses the realized one on the same paths.
std::vector<CoverageRow> coverage_study(const ExperimentConfig& config);

struct OracleCheck {
  std::string name;
  double value;
  double reference;
  double rel_err;
  bool pass;
};

std::vector<OracleCheck> oracle_checks(const ExperimentConfig& config);

struct AsymptoticsRow {
  std::string kernel;
  double mu_A;
  double sigma_A;
  double mu1_P;  // nan without an antiderivative pair
  double mu2_P;
  double sigma_P;
  double ratio;  // sigma_P / sigma_A
};

std::vector<AsymptoticsRow> asymptotics_table(const ExperimentConfig& config);

/// Least-squares slope of log10(rmse) on log10(delta).
double loglog_slope(const std::vector<double>& deltas, const std::vector<double>& rmse);

/// Runs the configured study, writes its CSVs and manifest.json; returns written paths.
std::vector<std::string> run(const ExperimentConfig& config, const std::string& command = "experiment");

/// Finite-difference run writing one measurement CSV per probe (and snapshots when asked).
std::vector<std::string> run_simulation(const ExperimentConfig& config, bool snapshots);

/// Estimates from a finite-difference run, written to estimates.csv.
std::vector<std::string> run_estimation(const ExperimentConfig& config);

void write_manifest(const ExperimentConfig& config, const std::string& command,
                    const std::vector<std::string>& outputs);

}  // namespace localest::harness
