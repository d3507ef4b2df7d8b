#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "localest/fd_solver.hpp"
#include "localest/measurements.hpp"

namespace localest::harness {

enum class StudyKind { FigHeatmap, FigCenter, FigRmse, Coverage, ValidateOracle, AsymptoticsTable };

std::string_view to_string(StudyKind kind) noexcept;
StudyKind parse_study(const std::string& name);

struct ExperimentConfig {
  StudyKind study = StudyKind::FigRmse;
  Grid grid;
  std::string theta_preset = "two-level";
  double sigma = 1.0;
  double drift = 0.0;       // constant a
  double reaction = 0.0;    // constant b
  std::string initial = "two-peaks";
  double peak_height = 5.0;
  double peak_width = 0.05;
  std::vector<std::string> kernels{"k1", "k2"};
  std::vector<double> deltas{0.05, 0.08, 0.12, 0.2, 0.3};
  std::vector<double> x0s{0.6};
  int replications = 200;
  std::uint64_t seed = 20240601;
  QvMode qv_mode = QvMode::Realized;
  double alpha = 0.05;
  std::string output_dir = "out";
  int threads = 0;  // 0: LOCALEST_THREADS, else all cores
  // exact-oracle studies
  double oracle_theta = 1.0;
  double oracle_sigma = 1.0;
  long oracle_steps = 4096;
  long oracle_fine_steps = 262144;

  void validate() const;
  std::vector<std::string> warnings() const;
  /// Canonical key=value text; the manifest hash is taken over it.
  std::string canonical() const;
};

/// Sectioned key=value file ([study], [grid], [coefficients], [kernels], [oracle]).
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

/// constant(c), two-level, or linear(slope); sigma and drift terms taken from the arguments.
CoefficientField preset_theta(const std::string& name, double sigma = 1.0, double a = 0.0,
                              double b = 0.0);

CoefficientField coefficients(const ExperimentConfig& config);
InitialCondition initial_condition(const ExperimentConfig& config);

/// Threads to use: config value, else LOCALEST_THREADS, else hardware concurrency.
int thread_count(const ExperimentConfig& config);

}  // namespace localest::harness
