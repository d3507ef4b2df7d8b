#include "localest/measurements.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "localest/error.hpp"
#include "localest/quadrature.hpp"

namespace localest {

void MeasurementPath::validate() const {
  if (x_series.size() < 1 || x_series.size() != xlap_series.size()) {
    throw Error(Errc::InvalidArgument, "measurement series must have equal nonzero length");
  }
  if (!(dt > 0) || std::abs(dt * steps() - T) > 1e-9 * std::max(1.0, T)) {
    throw Error(Errc::InvalidArgument, "time step inconsistent with horizon");
  }
  if (!x_series.allFinite() || !xlap_series.allFinite()) {
    throw Error(Errc::InvalidArgument, "measurement series contains non-finite values");
  }
  if (noise_increments && noise_increments->size() != steps()) {
    throw Error(Errc::InvalidArgument, "noise increments must have one entry per step");
  }
}

double probe_inner_product(const Eigen::VectorXd& field, const RescaledProbe& probe) {
  const Eigen::Index m = field.size() - 1;
  if (m < 1) throw Error(Errc::InvalidArgument, "field needs at least two nodes");
  const double h = 1.0 / static_cast<double>(m);
  const Eigen::Index lo = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::floor(probe.lower() * m)));
  const Eigen::Index hi = std::min<Eigen::Index>(m - 1, static_cast<Eigen::Index>(std::ceil(probe.upper() * m)));
  double sum = 0.0;
  for (Eigen::Index j = lo; j <= hi; ++j) sum += field[j] * probe(j * h);
  return h * sum;
}

double ito_integral(const MeasurementPath& path) {
  const Eigen::Index n = path.steps();
  const auto dx = path.x_series.tail(n) - path.x_series.head(n);
  return path.xlap_series.head(n).dot(dx);
}

double time_integral(const Eigen::VectorXd& series, int power, double dt) {
  if (power != 1 && power != 2) throw Error(Errc::InvalidArgument, "power must be 1 or 2");
  const Eigen::Index n = series.size() - 1;
  if (n < 1) return 0.0;
  const auto head = series.head(n);
  return dt * (power == 1 ? head.sum() : head.squaredNorm());
}

double quadratic_variation(const MeasurementPath& path, QvMode mode) {
  if (mode == QvMode::Analytic) {
    if (!path.qv_analytic) {
      throw Error(Errc::AnalyticUnavailable, "path carries no analytic quadratic variation");
    }
    return *path.qv_analytic;
  }
  const Eigen::Index n = path.steps();
  return (path.x_series.tail(n) - path.x_series.head(n)).squaredNorm();
}

double analytic_quadratic_variation(const RescaledProbe& probe,
                                    const std::function<double(double)>& sigma, double T) {
  return T * integrate([&](double x) {
    const double v = sigma(x) * probe(x);
    return v * v;
  }, probe.lower(), probe.upper());
}

void write_csv(const MeasurementPath& path, std::ostream& out) {
  out.precision(17);
  out << "# delta=" << path.delta << " x0=" << path.x0 << " dt=" << path.dt
      << " seed=" << path.seed << '\n';
  out << "t,x,xlap\n";
  for (Eigen::Index k = 0; k < path.x_series.size(); ++k) {
    out << k * path.dt << ',' << path.x_series[k] << ',' << path.xlap_series[k] << '\n';
  }
}

MeasurementPath read_csv(std::istream& in) {
  MeasurementPath path;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw Error(Errc::IoError, "measurement CSV lacks its metadata line");
  }
  std::istringstream meta(line.substr(2));
  std::string field;
  while (meta >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "delta") path.delta = std::stod(value);
    else if (key == "x0") path.x0 = std::stod(value);
    else if (key == "dt") path.dt = std::stod(value);
    else if (key == "seed") path.seed = std::stoull(value);
  }
  if (!std::getline(in, line) || line != "t,x,xlap") {
    throw Error(Errc::IoError, "measurement CSV header must be t,x,xlap");
  }
  std::vector<double> xs;
  std::vector<double> ls;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t, x, l;
    if (!std::getline(row, t, ',') || !std::getline(row, x, ',') || !std::getline(row, l)) {
      throw Error(Errc::IoError, "malformed measurement row: " + line);
    }
    xs.push_back(std::stod(x));
    ls.push_back(std::stod(l));
  }
  path.x_series = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  path.xlap_series = Eigen::Map<Eigen::VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size()));
  path.T = path.dt * path.steps();
  return path;
}

}  // namespace localest
