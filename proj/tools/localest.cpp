#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

#include "localest/asymptotics.hpp"
#include "localest/error.hpp"
#include "localest/estimators.hpp"
#include "localest/harness/config.hpp"
#include "localest/harness/csv.hpp"
#include "localest/harness/studies.hpp"

using namespace localest;
using namespace localest::harness;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config_path, "experiment config file")->check(CLI::ExistingFile);
  if (config_required) opt->required();
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--out", c.out, "output directory (overrides the config)");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig config = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  if (c.seed) config.seed = *c.seed;
  if (c.out) config.output_dir = *c.out;
  return config;
}

void list_outputs(const std::vector<std::string>& outputs) {
  for (const auto& o : outputs) std::cout << o << '\n';
}

int estimate_path(const ExperimentConfig& config, const std::string& file, const std::string& kernel_name) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::IoError, "cannot open " + file);
  const MeasurementPath path = read_csv(in);
  const KernelSpec k = kernel_by_name(kernel_name.empty() ? config.kernels.front() : kernel_name);
  const LocalCoefficients unit;
  CsvTable table({"estimator", "kernel", "delta", "x0", "theta_hat", "ci_lo", "ci_hi", "status"});
  for (auto kind : {EstimatorKind::Augmented, EstimatorKind::Proxy}) {
    std::vector<std::string> row{std::string(to_string(kind)), k.name, format_double(path.delta),
                                 format_double(path.x0)};
    try {
      const EstimateReport r =
          kind == EstimatorKind::Augmented ? augmented_mle(path) : proxy_mle(path, k, config.qv_mode);
      double lo = std::nan(""), hi = std::nan("");
      const bool have_constant = kind == EstimatorKind::Augmented || k.has_antiderivative();
      if (have_constant && r.theta_hat > 0) {
        const double s = kind == EstimatorKind::Augmented ? sigma_A(k, unit, config.grid.T).closed_form
                                                          : proxy_constants(k, unit, config.grid.T).sigma_P;
        const ConfidenceInterval ci = confidence_interval(r.theta_hat, path.delta, s, config.alpha);
        lo = ci.lo;
        hi = ci.hi;
      }
      row.insert(row.end(), {format_double(r.theta_hat), format_double(lo), format_double(hi),
                             r.assumption_violated ? "assumption-violated" : "ok"});
    } catch (const Error& e) {
      row.insert(row.end(), {"nan", "nan", "nan", std::string(to_string(e.code()))});
    }
    table.add_row(row);
  }
  std::cout << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local diffusivity estimation for linear stochastic heat equations"};
  app.set_version_flag("--version", LOCALEST_VERSION);
  app.require_subcommand(1);

  Common simulate_opts, estimate_opts, experiment_opts, oracle_opts, asym_opts;
  bool snapshots = false;
  std::string path_file, kernel_name;

  auto* simulate = app.add_subcommand("simulate", "run the finite-difference solver and write probe paths");
  add_common(simulate, simulate_opts, true);
  simulate->add_flag("--snapshots", snapshots, "also write binary field snapshots");

  auto* estimate = app.add_subcommand("estimate", "estimate diffusivity from a path file or a fresh simulation");
  add_common(estimate, estimate_opts, false);
  estimate->add_option("--path", path_file, "measurement CSV written by simulate")->check(CLI::ExistingFile);
  estimate->add_option("--kernel", kernel_name, "kernel used for the path (default: first configured)");

  auto* experiment = app.add_subcommand("experiment", "run the study named in the config");
  add_common(experiment, experiment_opts, true);

  auto* oracle = app.add_subcommand("validate-oracle", "cross-check the spectral oracle and constants");
  add_common(oracle, oracle_opts, false);

  auto* asym = app.add_subcommand("asymptotics", "print the asymptotic constants table as CSV");
  add_common(asym, asym_opts, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      list_outputs(run_simulation(resolve(simulate_opts), snapshots));
    } else if (*estimate) {
      const ExperimentConfig config = resolve(estimate_opts);
      if (!path_file.empty()) return estimate_path(config, path_file, kernel_name);
      if (estimate_opts.config_path.empty()) {
        std::cerr << "estimate: either --path or --config is required\n";
        return 2;
      }
      list_outputs(run_estimation(config));
    } else if (*experiment) {
      list_outputs(run(resolve(experiment_opts), "experiment"));
    } else if (*oracle) {
      ExperimentConfig config = resolve(oracle_opts);
      config.study = StudyKind::ValidateOracle;
      const auto outputs = run(config, "validate-oracle");
      int failed = 0;
      std::ifstream in(outputs.front());
      std::string line;
      while (std::getline(in, line)) {
        std::cout << line << '\n';
        failed += line.ends_with(",false");
      }
      if (failed) {
        std::cerr << failed << " oracle check(s) failed\n";
        return 1;
      }
    } else if (*asym) {
      ExperimentConfig config = resolve(asym_opts);
      config.study = StudyKind::AsymptoticsTable;
      const auto outputs = run(config, "asymptotics");
      std::ifstream in(outputs.front());
      std::cout << in.rdbuf();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
