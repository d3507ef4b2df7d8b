#include "localest/fd_solver.hpp"

#include <boost/random/normal_distribution.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "localest/error.hpp"
#include "localest/quadrature.hpp"
#include "localest/rng.hpp"
#include "localest/spectral_oracle.hpp"

namespace localest {

void Grid::validate() const {
  if (m < 4) throw Error(Errc::InvalidArgument, "grid needs m >= 4");
  if (n < 1) throw Error(Errc::InvalidArgument, "grid needs n >= 1");
  if (!(T > 0)) throw Error(Errc::InvalidArgument, "horizon must be positive");
}

CoefficientField constant_coefficients(double theta, double sigma) {
  CoefficientField c;
  c.name = "constant(" + std::to_string(theta) + ")";
  c.theta = [theta](double) { return theta; };
  c.grad_theta = [](double) { return 0.0; };
  c.a = [](double) { return 0.0; };
  c.b = [](double) { return 0.0; };
  c.sigma = [sigma](double) { return sigma; };
  c.grad_sigma2 = [](double) { return 0.0; };
  return c;
}

Eigen::VectorXd TridiagonalOperator::apply(const Eigen::VectorXd& z) const {
  const Eigen::Index n = size();
  Eigen::VectorXd out = diag.cwiseProduct(z);
  if (n > 1) {
    out.tail(n - 1) += lower.tail(n - 1).cwiseProduct(z.head(n - 1));
    out.head(n - 1) += upper.head(n - 1).cwiseProduct(z.tail(n - 1));
  }
  return out;
}

Eigen::MatrixXd TridiagonalOperator::dense() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = diag[i];
    if (i > 0) a(i, i - 1) = lower[i];
    if (i + 1 < n) a(i, i + 1) = upper[i];
  }
  return a;
}

TridiagonalOperator build_operator(const CoefficientField& coeffs, const Grid& grid) {
  grid.validate();
  const int m = grid.m;
  const double h = grid.h();
  Eigen::VectorXd theta(m + 1);
  for (int j = 0; j <= m; ++j) theta[j] = coeffs.theta(j * h);
  TridiagonalOperator op;
  op.lower = Eigen::VectorXd::Zero(m - 1);
  op.diag = Eigen::VectorXd::Zero(m - 1);
  op.upper = Eigen::VectorXd::Zero(m - 1);
  for (int j = 1; j < m; ++j) {
    const double left = 0.5 * (theta[j - 1] + theta[j]);
    const double right = 0.5 * (theta[j] + theta[j + 1]);
    if (!(left > 0) || !(right > 0)) {
      throw Error(Errc::NonPositiveDiffusivity,
                  "theta at half node near y=" + std::to_string(j * h) + " is not positive");
    }
    const double y = j * h;
    const double drift = coeffs.a ? coeffs.a(y) / (2.0 * h) : 0.0;
    const int i = j - 1;
    op.lower[i] = left / (h * h) - drift;
    op.upper[i] = right / (h * h) + drift;
    op.diag[i] = -(left + right) / (h * h) + (coeffs.b ? coeffs.b(y) : 0.0);
  }
  op.lower[0] = 0.0;
  op.upper[m - 2] = 0.0;
  return op;
}

TridiagonalOperator implicit_system(const TridiagonalOperator& op, double dt) {
  TridiagonalOperator sys;
  sys.lower = -dt * op.lower;
  sys.upper = -dt * op.upper;
  sys.diag = Eigen::VectorXd::Ones(op.size()) - dt * op.diag;
  return sys;
}

TridiagonalSolver::TridiagonalSolver(const TridiagonalOperator& system)
    : lower_(system.lower), inv_pivot_(system.size()), upper_(system.upper) {
  const Eigen::Index n = system.size();
  double prev_upper = 0.0;
  double prev_inv = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pivot = system.diag[i] - (i > 0 ? lower_[i] * prev_upper * prev_inv : 0.0);
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw Error(Errc::ZeroPivot, "zero pivot in row " + std::to_string(i));
    }
    inv_pivot_[i] = 1.0 / pivot;
    prev_upper = upper_[i];
    prev_inv = inv_pivot_[i];
  }
}

void TridiagonalSolver::solve_in_place(Eigen::Ref<Eigen::VectorXd> x) const {
  const Eigen::Index n = inv_pivot_.size();
  x[0] *= inv_pivot_[0];
  for (Eigen::Index i = 1; i < n; ++i) {
    x[i] = (x[i] - lower_[i] * x[i - 1]) * inv_pivot_[i];
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    x[i] -= upper_[i] * inv_pivot_[i] * x[i + 1];
  }
}

Eigen::VectorXd TridiagonalSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = rhs;
  solve_in_place(x);
  return x;
}

Eigen::VectorXd thomas_solve(const TridiagonalOperator& system, const Eigen::VectorXd& rhs) {
  return TridiagonalSolver(system).solve(rhs);
}

InitialCondition InitialCondition::two_peaks(double height, double width) {
  InitialCondition ic;
  ic.kind = Kind::TwoPeaks;
  ic.height = height;
  ic.width = width;
  return ic;
}

InitialCondition InitialCondition::function(ScalarField f) {
  InitialCondition ic;
  ic.kind = Kind::Function;
  ic.profile = std::move(f);
  return ic;
}

double InitialCondition::value(double y) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::TwoPeaks: return height * (bump((y - 0.2) / width) + bump((y - 0.8) / width));
    case Kind::Function: return profile(y);
  }
  return 0.0;
}

Eigen::VectorXd InitialCondition::nodal(const Grid& grid) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(grid.m + 1);
  for (int j = 1; j < grid.m; ++j) x[j] = value(j * grid.h());
  return x;
}

namespace {

// Probe weights h * probe(y_j) on the interior nodes covering the support.
struct ProbeWeights {
  Eigen::Index first = 0;  // interior index of the first weight
  Eigen::VectorXd value;
  Eigen::VectorXd laplacian;
};

ProbeWeights probe_weights(const RescaledProbe& p, const Grid& grid) {
  if (p.lower() < 0.0 || p.upper() > 1.0) {
    throw Error(Errc::ProbeOutsideDomain, "probe support [" + std::to_string(p.lower()) + ", " +
                                              std::to_string(p.upper()) + "] leaves (0, 1)");
  }
  const int m = grid.m;
  const double h = grid.h();
  const int lo = std::max(1, static_cast<int>(std::floor(p.lower() * m)));
  const int hi = std::min(m - 1, static_cast<int>(std::ceil(p.upper() * m)));
  ProbeWeights w;
  w.first = lo - 1;
  w.value.resize(hi - lo + 1);
  w.laplacian.resize(hi - lo + 1);
  for (int j = lo; j <= hi; ++j) {
    w.value[j - lo] = h * p.value(j * h);
    w.laplacian[j - lo] = h * p.laplacian(j * h);
  }
  return w;
}

void write_row(std::ofstream& out, const Eigen::VectorXd& interior) {
  const Eigen::Index m = interior.size() + 1;
  std::vector<double> row(m + 1, 0.0);
  for (Eigen::Index j = 1; j < m; ++j) row[j] = interior[j - 1];
  if constexpr (std::endian::native == std::endian::big) {
    for (double& v : row) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      bits = __builtin_bswap64(bits);
      std::memcpy(&v, &bits, sizeof bits);
    }
  }
  out.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
}

}  // namespace

std::vector<MeasurementPath> simulate(const SimConfig& config,
                                      const std::vector<RescaledProbe>& probes) {
  return simulate(build_operator(config.coeffs, config.grid), config, probes);
}

std::vector<MeasurementPath> simulate(const TridiagonalOperator& op, const SimConfig& config,
                                      const std::vector<RescaledProbe>& probes) {
  const Grid& grid = config.grid;
  grid.validate();
  if (op.size() != grid.m - 1) throw Error(Errc::InvalidArgument, "operator size does not match grid");
  const double dt = grid.dt();
  const double h = grid.h();
  const TridiagonalSolver solver(implicit_system(op, dt));

  std::vector<ProbeWeights> weights;
  std::vector<MeasurementPath> paths(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    weights.push_back(probe_weights(probes[p], grid));
    auto& path = paths[p];
    path.delta = probes[p].delta;
    path.x0 = probes[p].x0;
    path.dt = dt;
    path.T = grid.T;
    path.seed = config.seed;
    path.x_series.resize(grid.n + 1);
    path.xlap_series.resize(grid.n + 1);
    if (config.coeffs.sigma) {
      path.qv_analytic = analytic_quadratic_variation(probes[p], config.coeffs.sigma, grid.T);
    }
  }

  const int interior = grid.m - 1;
  Eigen::VectorXd noise_scale(interior);
  for (int j = 1; j <= interior; ++j) {
    noise_scale[j - 1] = (config.coeffs.sigma ? config.coeffs.sigma(j * h) : 0.0) * std::sqrt(dt / h);
  }
  const bool noisy = (noise_scale.array() != 0.0).any();

  Eigen::VectorXd x = config.x0_initial.nodal(grid).segment(1, interior);
  auto record = [&](long k) {
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const auto& w = weights[p];
      const auto seg = x.segment(w.first, w.value.size());
      paths[p].x_series[k] = w.value.dot(seg);
      paths[p].xlap_series[k] = w.laplacian.dot(seg);
    }
  };

  std::ofstream snapshots;
  long every = 0;
  if (!config.snapshot_path.empty()) {
    snapshots.open(config.snapshot_path, std::ios::binary | std::ios::trunc);
    if (!snapshots) throw Error(Errc::IoError, "cannot open snapshot file " + config.snapshot_path);
    every = config.snapshot_every > 0 ? config.snapshot_every : std::max(1L, grid.n / 100);
    write_row(snapshots, x);
  }

  record(0);
  boost::random::normal_distribution<double> normal;
  for (long k = 0; k < grid.n; ++k) {
    if (noisy) {
      SplitMix64 gen = counter_stream(config.seed, static_cast<std::uint64_t>(k));
      for (int j = 0; j < interior; ++j) x[j] += noise_scale[j] * normal(gen);
    }
    solver.solve_in_place(x);
    record(k + 1);
    if (every > 0 && (k + 1) % every == 0) write_row(snapshots, x);
  }
  if (snapshots.is_open() && !snapshots) {
    throw Error(Errc::IoError, "failed writing snapshot file " + config.snapshot_path);
  }
  return paths;
}

std::vector<HeatCheckRow> deterministic_heat_check(const SimConfig& config,
                                                   const RescaledProbe& probe) {
  const Grid& grid = config.grid;
  const double theta = config.coeffs.theta(0.5);
  for (int j = 0; j <= 8; ++j) {
    if (std::abs(config.coeffs.theta(j / 8.0) - theta) > 1e-14 * theta) {
      throw Error(Errc::InvalidArgument, "heat check needs constant theta");
    }
  }
  SimConfig quiet = config;
  quiet.coeffs.sigma = [](double) { return 0.0; };
  quiet.snapshot_path.clear();
  const MeasurementPath fd = simulate(quiet, {probe}).front();

  const int k_max = std::max(64, static_cast<int>(std::ceil(16.0 / probe.delta)));
  const Eigen::VectorXd c = sine_coefficients([&](double y) { return probe(y); }, probe.lower(),
                                              probe.upper(), k_max);
  Eigen::VectorXd init = Eigen::VectorXd::Zero(k_max);
  if (config.x0_initial.kind != InitialCondition::Kind::Zero) {
    const InitialCondition& ic = config.x0_initial;
    init = sine_coefficients([&](double y) { return ic.value(y); }, 0.0, 1.0, k_max);
  }
  std::vector<HeatCheckRow> rows;
  const long stride = std::max(1L, grid.n / 100);
  for (long k = 0; k <= grid.n; k += stride) {
    const double t = k * grid.dt();
    double spectral = 0.0;
    for (int i = 0; i < k_max; ++i) {
      const double lambda = theta * std::pow(M_PI * (i + 1), 2);
      spectral += std::exp(-lambda * t) * init[i] * c[i];
    }
    rows.push_back({t, fd.x_series[k], spectral});
  }
  return rows;
}

Eigen::MatrixXd read_snapshots(const std::string& path, int m) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(Errc::IoError, "cannot open snapshot file " + path);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  const std::size_t row_bytes = static_cast<std::size_t>(m + 1) * sizeof(double);
  if (bytes % row_bytes != 0) throw Error(Errc::IoError, "snapshot file size is not a whole number of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(bytes / row_bytes);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> data(rows, m + 1);
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  if constexpr (std::endian::native == std::endian::big) {
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, data.data() + i, sizeof bits);
      bits = __builtin_bswap64(bits);
      std::memcpy(data.data() + i, &bits, sizeof bits);
    }
  }
  return data;
}

}  // namespace localest
