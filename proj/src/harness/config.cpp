#include "localest/harness/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "localest/error.hpp"
#include "localest/harness/csv.hpp"

namespace localest::harness {

namespace pt = boost::property_tree;

std::string_view to_string(StudyKind kind) noexcept {
  switch (kind) {
    case StudyKind::FigHeatmap: return "fig-heatmap";
    case StudyKind::FigCenter: return "fig-center";
    case StudyKind::FigRmse: return "fig-rmse";
    case StudyKind::Coverage: return "coverage";
    case StudyKind::ValidateOracle: return "validate-oracle";
    case StudyKind::AsymptoticsTable: return "asymptotics-table";
  }
  return "unknown";
}

StudyKind parse_study(const std::string& name) {
  for (auto k : {StudyKind::FigHeatmap, StudyKind::FigCenter, StudyKind::FigRmse, StudyKind::Coverage,
                 StudyKind::ValidateOracle, StudyKind::AsymptoticsTable}) {
    if (name == to_string(k)) return k;
  }
  throw Error(Errc::ConfigError, "study.kind: unknown study '" + name + "'");
}

namespace {

template <typename T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto node = tree.get_child_optional(pt::ptree::path_type(key, '.'));
  if (!node) return fallback;
  try {
    return node->get_value<T>();
  } catch (const pt::ptree_error&) {
    throw Error(Errc::ConfigError, key + ": cannot parse '" + node->data() + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  boost::split(items, text, boost::is_any_of(","));
  for (auto& s : items) boost::trim(s);
  items.erase(std::remove(items.begin(), items.end(), std::string()), items.end());
  return items;
}

std::vector<double> double_list(const pt::ptree& tree, const std::string& key,
                                std::vector<double> fallback) {
  const auto text = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
  if (!text) return fallback;
  std::vector<double> out;
  for (const auto& s : split_list(*text)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, key + ": '" + s + "' is not a number");
    }
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

// Strips inline ';' comments, which the ini reader keeps as part of the value.
std::string strip_comments(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find(';');
    if (pos != std::string::npos && pos > 0) line = line.substr(0, pos);
    out << line << '\n';
  }
  return out.str();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(strip_comments(text));
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::ConfigError, std::string("config syntax: ") + e.what());
  }
  ExperimentConfig c;
  c.study = parse_study(get<std::string>(tree, "study.kind", std::string(to_string(c.study))));
  c.replications = get(tree, "study.replications", c.replications);
  c.seed = get(tree, "study.seed", c.seed);
  const std::string qv = get<std::string>(tree, "study.qv_mode", "realized");
  if (qv == "realized") c.qv_mode = QvMode::Realized;
  else if (qv == "analytic") c.qv_mode = QvMode::Analytic;
  else throw Error(Errc::ConfigError, "study.qv_mode: expected realized or analytic, got '" + qv + "'");
  c.alpha = get(tree, "study.alpha", c.alpha);
  c.output_dir = get(tree, "study.output_dir", c.output_dir);
  c.threads = get(tree, "study.threads", c.threads);
  c.deltas = double_list(tree, "study.deltas", c.deltas);
  c.x0s = double_list(tree, "study.x0", c.x0s);
  const int grid_points = get(tree, "study.x0_grid", 0);
  if (grid_points > 0) {
    c.x0s.clear();
    for (int i = 1; i <= grid_points; ++i) c.x0s.push_back(static_cast<double>(i) / (grid_points + 1));
  }

  c.grid.m = get(tree, "grid.m", c.grid.m);
  c.grid.n = get(tree, "grid.n", c.grid.n);
  c.grid.T = get(tree, "grid.T", c.grid.T);

  c.theta_preset = get(tree, "coefficients.theta", c.theta_preset);
  c.sigma = get(tree, "coefficients.sigma", c.sigma);
  c.drift = get(tree, "coefficients.a", c.drift);
  c.reaction = get(tree, "coefficients.b", c.reaction);
  c.initial = get(tree, "coefficients.initial", c.initial);
  c.peak_height = get(tree, "coefficients.peak_height", c.peak_height);
  c.peak_width = get(tree, "coefficients.peak_width", c.peak_width);

  if (const auto names = tree.get_optional<std::string>("kernels.names")) c.kernels = split_list(*names);

  c.oracle_theta = get(tree, "oracle.theta", c.oracle_theta);
  c.oracle_sigma = get(tree, "oracle.sigma", c.oracle_sigma);
  c.oracle_steps = get(tree, "oracle.n", c.oracle_steps);
  c.oracle_fine_steps = get(tree, "oracle.n_fine", c.oracle_fine_steps);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::ConfigError, msg); };
  if (grid.m < 4) fail("grid.m: must be at least 4");
  if (grid.n < 1) fail("grid.n: must be positive");
  if (!(grid.T > 0)) fail("grid.T: must be positive");
  if (replications < 0) fail("study.replications: must be nonnegative");
  if (!(alpha > 0 && alpha <= 1)) fail("study.alpha: must lie in (0, 1]");
  if (!(sigma > 0)) fail("coefficients.sigma: must be positive");
  if (initial != "zero" && initial != "two-peaks") fail("coefficients.initial: expected zero or two-peaks");
  if (kernels.empty()) fail("kernels.names: at least one kernel required");
  if (deltas.empty()) fail("study.deltas: at least one resolution required");
  for (double d : deltas) {
    if (!(d > 0 && d < 0.5)) fail("study.deltas: " + format_double(d) + " outside (0, 0.5)");
  }
  if (x0s.empty()) fail("study.x0: at least one location required");
  for (double x : x0s) {
    if (!(x > 0 && x < 1)) fail("study.x0: " + format_double(x) + " outside (0, 1)");
  }
  if (!(oracle_theta > 0) || !(oracle_sigma > 0)) fail("oracle.theta/oracle.sigma: must be positive");
  if (oracle_steps < 1 || oracle_fine_steps < 1) fail("oracle.n/oracle.n_fine: must be positive");
  if (threads < 0) fail("study.threads: must be nonnegative");
  preset_theta(theta_preset);
}

std::vector<std::string> ExperimentConfig::warnings() const {
  std::vector<std::string> w;
  const double m2 = static_cast<double>(grid.m) * grid.m;
  if (static_cast<double>(grid.n) < m2 / 8.0) {
    w.push_back("grid.n=" + std::to_string(grid.n) + " is below m^2/8; time stepping error may dominate");
  }
  return w;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "[study]\nkind = " << to_string(study) << "\nreplications = " << replications
      << "\nseed = " << seed << "\nqv_mode = " << (qv_mode == QvMode::Realized ? "realized" : "analytic")
      << "\nalpha = " << format_double(alpha) << "\ndeltas = " << join(deltas) << "\nx0 = " << join(x0s)
      << "\n[grid]\nm = " << grid.m << "\nn = " << grid.n << "\nT = " << format_double(grid.T)
      << "\n[coefficients]\ntheta = " << theta_preset << "\nsigma = " << format_double(sigma)
      << "\na = " << format_double(drift) << "\nb = " << format_double(reaction)
      << "\ninitial = " << initial << "\npeak_height = " << format_double(peak_height)
      << "\npeak_width = " << format_double(peak_width) << "\n[kernels]\nnames = ";
  for (std::size_t i = 0; i < kernels.size(); ++i) out << (i ? ", " : "") << kernels[i];
  out << "\n[oracle]\ntheta = " << format_double(oracle_theta) << "\nsigma = " << format_double(oracle_sigma)
      << "\nn = " << oracle_steps << "\nn_fine = " << oracle_fine_steps << "\n";
  return out.str();
}

CoefficientField preset_theta(const std::string& name, double sigma, double a, double b) {
  CoefficientField f;
  f.name = name;
  static const std::regex constant_re(R"(constant\(\s*([-+0-9.eE]+)\s*\))");
  static const std::regex linear_re(R"(linear\(\s*([-+0-9.eE]+)\s*\))");
  std::smatch match;
  if (std::regex_match(name, match, constant_re)) {
    const double c = std::stod(match[1]);
    if (!(c > 0)) throw Error(Errc::NonPositiveDiffusivity, "constant theta must be positive");
    f.theta = [c](double) { return c; };
    f.grad_theta = [](double) { return 0.0; };
  } else if (std::regex_match(name, match, linear_re)) {
    const double slope = std::stod(match[1]);
    if (!(1.0 + std::min(0.0, slope) > 0)) {
      throw Error(Errc::NonPositiveDiffusivity, "linear theta 1 + slope x must stay positive on [0, 1]");
    }
    f.theta = [slope](double x) { return 1.0 + slope * x; };
    f.grad_theta = [slope](double) { return slope; };
  } else if (name == "two-level") {
    f.theta = [](double x) { return 0.05 + 0.35 * (1.0 - std::tanh((x - 0.5) / 0.08)) / 2.0; };
    f.grad_theta = [](double x) {
      const double s = 1.0 / std::cosh((x - 0.5) / 0.08);
      return -0.35 / 2.0 * s * s / 0.08;
    };
  } else {
    throw Error(Errc::UnknownPreset, "unknown theta preset '" + name + "'");
  }
  f.a = [a](double) { return a; };
  f.b = [b](double) { return b; };
  f.sigma = [sigma](double) { return sigma; };
  f.grad_sigma2 = [](double) { return 0.0; };
  return f;
}

CoefficientField coefficients(const ExperimentConfig& config) {
  return preset_theta(config.theta_preset, config.sigma, config.drift, config.reaction);
}

InitialCondition initial_condition(const ExperimentConfig& config) {
  if (config.initial == "zero") return InitialCondition::zero();
  return InitialCondition::two_peaks(config.peak_height, config.peak_width);
}

int thread_count(const ExperimentConfig& config) {
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("LOCALEST_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace localest::harness
