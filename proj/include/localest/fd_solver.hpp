#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "localest/kernels.hpp"
#include "localest/measurements.hpp"

namespace localest {

/// Nodes y_j = j / m (j = 0..m), times t_k = k T / n (k = 0..n).
struct Grid {
  int m = 500;
  long n = 250000;
  double T = 1.0;

  double h() const noexcept { return 1.0 / m; }
  double dt() const noexcept { return T / static_cast<double>(n); }
  void validate() const;
};

using ScalarField = std::function<double(double)>;

/// Coefficients of A = div(theta grad) + a d/dx + b and the noise level sigma.
struct CoefficientField {
  std::string name;
  ScalarField theta;
  ScalarField grad_theta;
  ScalarField a;
  ScalarField b;
  ScalarField sigma;
  ScalarField grad_sigma2;
};

CoefficientField constant_coefficients(double theta, double sigma = 1.0);

/// Interior rows j = 1..m-1 of the discretised operator; lower[0] and upper[m-2] are unused.
struct TridiagonalOperator {
  Eigen::VectorXd lower;
  Eigen::VectorXd diag;
  Eigen::VectorXd upper;

  Eigen::Index size() const noexcept { return diag.size(); }
  Eigen::VectorXd apply(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd dense() const;
};

TridiagonalOperator build_operator(const CoefficientField& coeffs, const Grid& grid);

/// Thomas factorisation of a tridiagonal system, reusable across right-hand sides.
class TridiagonalSolver {
 public:
  explicit TridiagonalSolver(const TridiagonalOperator& system);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  void solve_in_place(Eigen::Ref<Eigen::VectorXd> x) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd inv_pivot_;
  Eigen::VectorXd upper_;
};

Eigen::VectorXd thomas_solve(const TridiagonalOperator& system, const Eigen::VectorXd& rhs);

/// I - dt * A.
TridiagonalOperator implicit_system(const TridiagonalOperator& op, double dt);

struct InitialCondition {
  enum class Kind { Zero, TwoPeaks, Function };
  Kind kind = Kind::Zero;
  double height = 5.0;
  double width = 0.05;
  ScalarField profile;  // Kind::Function, also used for tabulated profiles

  static InitialCondition zero() { return {}; }
  static InitialCondition two_peaks(double height = 5.0, double width = 0.05);
  static InitialCondition function(ScalarField f);

  double value(double y) const;
  Eigen::VectorXd nodal(const Grid& grid) const;
};

struct SimConfig {
  Grid grid;
  CoefficientField coeffs;
  InitialCondition x0_initial;
  std::uint64_t seed = 0;
  std::string snapshot_path;  // empty: no snapshots
  long snapshot_every = 0;    // 0: every n / 100 steps
};

/// Semi-implicit Euler run; one path per probe, measured at every step.
std::vector<MeasurementPath> simulate(const SimConfig& config,
                                      const std::vector<RescaledProbe>& probes);

/// Same, with a caller-supplied operator in place of the one built from config.coeffs.
std::vector<MeasurementPath> simulate(const TridiagonalOperator& op, const SimConfig& config,
                                      const std::vector<RescaledProbe>& probes);

struct HeatCheckRow {
  double t;
  double fd_value;
  double spectral_value;
};

/// Noise-free propagation of the initial condition against the spectral sum, constant theta.
std::vector<HeatCheckRow> deterministic_heat_check(const SimConfig& config,
                                                   const RescaledProbe& probe);

/// Reads a snapshot file: rows of m + 1 little-endian doubles.
Eigen::MatrixXd read_snapshots(const std::string& path, int m);

}  // namespace localest
