#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "localest/error.hpp"
#include "localest/harness/config.hpp"
#include "localest/harness/csv.hpp"
#include "localest/harness/studies.hpp"

using namespace localest;
using namespace localest::harness;
using doctest::Approx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

ExperimentConfig small_rmse(const std::string& out) {
  ExperimentConfig c = parse_config(R"(
[study]
kind = fig-rmse
replications = 4
seed = 7
deltas = 0.1, 0.2   ; two resolutions
x0 = 0.6
[grid]
m = 60
n = 3600
[kernels]
names = k1, k2
)");
  c.output_dir = out;
  return c;
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(R"(
[study]
kind = coverage
replications = 12
seed = 99
qv_mode = analytic
alpha = 0.1
x0_grid = 3
[grid]
m = 100
n = 5000
T = 2
[coefficients]
theta = constant(0.5)
[kernels]
names = k1
[oracle]
theta = 2
n = 128
)");
  CHECK(c.study == StudyKind::Coverage);
  CHECK(c.replications == 12);
  CHECK(c.seed == 99);
  CHECK(c.qv_mode == QvMode::Analytic);
  CHECK(c.alpha == 0.1);
  REQUIRE(c.x0s.size() == 3);
  CHECK(c.x0s[1] == 0.5);
  CHECK(c.grid.T == 2.0);
  CHECK(c.kernels == std::vector<std::string>{"k1"});
  CHECK(c.oracle_theta == 2.0);
  CHECK(c.oracle_steps == 128);
  CHECK(parse_config(c.canonical()).canonical() == c.canonical());

  const ExperimentConfig d = parse_config("");
  CHECK(d.grid.m == 500);
  CHECK(d.grid.n == 250000);
  CHECK(d.replications == 200);
  CHECK(d.theta_preset == "two-level");
  CHECK(d.warnings().empty());
}

TEST_CASE("config errors name the field") {
  auto message = [](const std::string& text) -> std::string {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message("[study]\nkind = nope\n").find("study.kind") != std::string::npos);
  CHECK(message("[grid]\nm = abc\n").find("grid.m") != std::string::npos);
  CHECK(message("[study]\ndeltas = 0.1, 0.7\n").find("study.deltas") != std::string::npos);
  CHECK(message("[study]\nqv_mode = exact\n").find("study.qv_mode") != std::string::npos);
  CHECK(message("[study]\nreplications = -1\n").find("study.replications") != std::string::npos);
  CHECK(message("[kernels]\nnames =\n").find("kernels.names") != std::string::npos);
  CHECK_THROWS_AS(parse_config("[coefficients]\ntheta = wavy\n"), Error);

  ExperimentConfig coarse;
  coarse.grid.n = 100;
  CHECK(coarse.warnings().size() == 1);
}

TEST_CASE("diffusivity presets") {
  const CoefficientField c = preset_theta("constant(0.5)");
  CHECK(c.theta(0.1) == 0.5);
  CHECK(c.theta(0.9) == 0.5);
  const CoefficientField two = preset_theta("two-level");
  CHECK(two.theta(0.1) > two.theta(0.9));
  CHECK(two.theta(0.5) == Approx(0.225));
  const double h = 1e-6;
  CHECK(two.grad_theta(0.55) == Approx((two.theta(0.55 + h) - two.theta(0.55 - h)) / (2 * h)).epsilon(1e-6));
  const CoefficientField lin = preset_theta("linear(1)");
  for (double x : {0.0, 0.3, 1.0}) CHECK(lin.grad_theta(x) == 1.0);
  CHECK(lin.theta(0.5) == 1.5);
  try {
    preset_theta("cubic");
    FAIL("expected UnknownPreset");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownPreset);
  }
}

TEST_CASE("csv helpers") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-2.5e-20) == "-2.5e-20");
  CsvTable t({"a", "b"});
  t.add_row({"1", "x"});
  CHECK(t.str() == "a,b\n1,x\n");
  CHECK_THROWS_AS(t.add_row({"1"}), Error);
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("least-squares slope") {
  CHECK(loglog_slope({0.1, 0.2, 0.4}, {0.01, 0.02, 0.04}) == Approx(1.0).epsilon(1e-12));
  // hand computation: x = log10 d, y = log10 r, slope = Sxy / Sxx
  const std::vector<double> d{0.05, 0.08, 0.12, 0.2, 0.3};
  const std::vector<double> r{0.011, 0.016, 0.03, 0.041, 0.07};
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    mx += std::log10(d[i]) / 5;
    my += std::log10(r[i]) / 5;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    sxy += (std::log10(d[i]) - mx) * (std::log10(r[i]) - my);
    sxx += std::pow(std::log10(d[i]) - mx, 2);
  }
  CHECK(loglog_slope(d, r) == Approx(sxy / sxx).epsilon(1e-12));
  CHECK_THROWS_AS(loglog_slope({0.1}, {0.2}), Error);
}

TEST_CASE("rmse study output is byte-identical across thread counts") {
  TempDir dir("localest_rmse_test");
  ExperimentConfig c = small_rmse((dir.path / "a").string());
  c.threads = 1;
  run(c);
  c.output_dir = (dir.path / "b").string();
  c.threads = 3;
  run(c);
  const std::string a = slurp((dir.path / "a" / "rmse.csv").string());
  CHECK(a == slurp((dir.path / "b" / "rmse.csv").string()));
  CHECK(a.rfind("delta,estimator,kernel,x0,rmse,bias,sd,n_ok\n", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 9);
  CHECK(slurp((dir.path / "a" / "manifest.json").string()) ==
        slurp((dir.path / "b" / "manifest.json").string()));
  const std::string manifest = slurp((dir.path / "a" / "manifest.json").string());
  CHECK(manifest.find("\"config_hash\"") != std::string::npos);
  CHECK(manifest.find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("zero replications give header-only tables") {
  TempDir dir("localest_empty_test");
  ExperimentConfig c = small_rmse(dir.str());
  c.replications = 0;
  run(c);
  const std::string a = slurp((dir.path / "rmse.csv").string());
  CHECK(a.rfind("delta,estimator,kernel,x0,rmse,bias,sd,n_ok\n", 0) == 0);
  const auto rows = rmse_study(c);
  for (const auto& r : rows) CHECK(r.n_ok == 0);

  c.study = StudyKind::Coverage;
  c.deltas = {0.1};
  CHECK(slurp(run(c).front()) == "delta,estimator,level,covered_fraction,n\n0.1,augmented,0.95,nan,0\n"
                                 "0.1,augmented-discrete,0.95,nan,0\n0.1,proxy,0.95,nan,0\n"
                                 "0.1,proxy-realized,0.95,nan,0\n");
}

TEST_CASE("center study on a constant field") {
  ExperimentConfig c;
  c.study = StudyKind::FigCenter;
  c.theta_preset = "constant(0.5)";
  c.initial = "zero";
  c.grid = {200, 40000, 1.0};
  c.deltas = {0.2};
  c.x0s = {0.3, 0.5, 0.7};
  c.kernels = {"k1"};
  c.alpha = 0.001;
  const auto rows = center_study(c);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(r.status == "ok");
    CHECK(r.theta_true == 0.5);
    CHECK(r.ci_lo <= 0.5);
    CHECK(r.ci_hi >= 0.5);
  }
}

TEST_CASE("asymptotics table") {
  ExperimentConfig c;
  c.theta_preset = "constant(1)";
  const auto rows = asymptotics_table(c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].kernel == "k1");
  CHECK(std::abs(rows[0].mu_A) < 1e-8);
  CHECK(rows[0].ratio > 1.0);
  CHECK(std::isnan(rows[1].sigma_P));
  CHECK(rows[1].sigma_A > 0.0);
}

TEST_CASE("heatmap snapshots") {
  TempDir dir("localest_heatmap_test");
  ExperimentConfig c;
  c.study = StudyKind::FigHeatmap;
  c.grid = {40, 2000, 1.0};
  c.output_dir = dir.str();
  const auto outputs = run(c);
  REQUIRE(outputs.size() == 2);
  CHECK(std::filesystem::file_size(outputs[0]) == 101 * 41 * sizeof(double));
  CHECK(slurp(outputs[1]).find("\"rows\": 101") != std::string::npos);
}
