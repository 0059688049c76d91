#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ppf/csv.hpp"
#include "ppf/errors.hpp"
#include "ppf/experiments.hpp"
#include "test_util.hpp"

namespace {

ppf::HarnessOptions small_opts() {
  ppf::HarnessOptions opt;
  opt.ppf.num_trees = 10;
  opt.rf_trees = 25;
  opt.seed = 7;
  opt.num_threads = 1;
  return opt;
}

}  // namespace

TEST_CASE("gen_triangle: config validation") {
  ppf::TriangleSimConfig cfg;
  cfg.n_per_class = 0;
  CHECK_THROWS_AS(ppf::gen_triangle(cfg), ppf::Error);
  cfg = {};
  cfg.correlation = 1.0;
  CHECK_THROWS_AS(ppf::gen_triangle(cfg), ppf::Error);
  cfg = {};
  cfg.correlation = -0.1;
  CHECK_THROWS_AS(ppf::gen_triangle(cfg), ppf::Error);
  cfg = {};
  cfg.noise_sd = 0.0;
  CHECK_THROWS_AS(ppf::gen_triangle(cfg), ppf::Error);
}

TEST_CASE("gen_triangle: shape, labels, names") {
  ppf::TriangleSimConfig cfg;
  cfg.n_per_class = 7;
  const auto d = ppf::gen_triangle(cfg);
  CHECK(d.n() == 21);
  CHECK(d.p() == 2);
  CHECK(d.num_classes() == 3);
  CHECK(d.class_counts == std::vector<int>{7, 7, 7});
  CHECK(d.class_names == std::vector<std::string>{"A", "B", "C"});
  for (int i = 0; i < 21; ++i) CHECK(d.labels[i] == i / 7);
}

TEST_CASE("gen_triangle: 90-degree rotation is an exact coordinate swap") {
  ppf::TriangleSimConfig a, b;
  a.n_per_class = b.n_per_class = 40;
  a.seed = b.seed = 4242;
  a.angle_deg = 0.0;
  b.angle_deg = 90.0;
  const auto d0 = ppf::gen_triangle(a);
  const auto d90 = ppf::gen_triangle(b);
  for (int i = 0; i < d0.n(); ++i) {
    CHECK(d90.predictors(i, 0) == -d0.predictors(i, 1));
    CHECK(d90.predictors(i, 1) == d0.predictors(i, 0));
    CHECK(d90.labels[i] == d0.labels[i]);
  }
  // 180 degrees: exact negation.
  b.angle_deg = 180.0;
  const auto d180 = ppf::gen_triangle(b);
  for (int i = 0; i < d0.n(); ++i) {
    CHECK(d180.predictors(i, 0) == -d0.predictors(i, 0));
    CHECK(d180.predictors(i, 1) == -d0.predictors(i, 1));
  }
}

TEST_CASE("gen_triangle: class means, spreads, and correlation match the recipe") {
  ppf::TriangleSimConfig cfg;
  cfg.n_per_class = 2000;
  cfg.class_sep = 3.0;
  cfg.noise_sd = 1.0;
  cfg.correlation = 0.9;
  cfg.seed = 99;
  const auto d = ppf::gen_triangle(cfg);
  // Mean tolerance sized to the widest marginal, sd(x) = noise_sd*sqrt(1+rho).
  const double tol =
      3.0 * cfg.noise_sd * std::sqrt(1.0 + cfg.correlation) / std::sqrt(double(cfg.n_per_class));
  const double angles[3] = {90.0, 210.0, 330.0};
  for (int g = 0; g < 3; ++g) {
    double mx = 0, my = 0;
    for (int i = g * 2000; i < (g + 1) * 2000; ++i) {
      mx += d.predictors(i, 0);
      my += d.predictors(i, 1);
    }
    mx /= 2000;
    my /= 2000;
    const double rad = angles[g] * 3.14159265358979323846 / 180.0;
    CHECK(std::abs(mx - cfg.class_sep * std::cos(rad)) < tol);
    CHECK(std::abs(my - cfg.class_sep * std::sin(rad)) < tol);

    // At angle 0 the noise principal axes are the coordinate axes:
    // sd(x) = noise_sd*sqrt(1+rho), sd(y) = noise_sd*sqrt(1-rho), corr = 0.
    double sxx = 0, syy = 0, sxy = 0;
    for (int i = g * 2000; i < (g + 1) * 2000; ++i) {
      const double dx = d.predictors(i, 0) - mx;
      const double dy = d.predictors(i, 1) - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    const double sdx = std::sqrt(sxx / 1999), sdy = std::sqrt(syy / 1999);
    CHECK(sdx == doctest::Approx(cfg.noise_sd * std::sqrt(1.9)).epsilon(0.08));
    CHECK(sdy == doctest::Approx(cfg.noise_sd * std::sqrt(0.1)).epsilon(0.08));
    CHECK(std::abs(sxy / std::sqrt(sxx * syy)) < 0.07);
  }

  // Rotating by 45 degrees reproduces the equicorrelated covariance
  // noise_sd^2 * [[1, rho], [rho, 1]]: unit marginals, correlation rho.
  cfg.angle_deg = 45.0;
  const auto d45 = ppf::gen_triangle(cfg);
  for (int g = 0; g < 3; ++g) {
    double mx = 0, my = 0;
    for (int i = g * 2000; i < (g + 1) * 2000; ++i) {
      mx += d45.predictors(i, 0);
      my += d45.predictors(i, 1);
    }
    mx /= 2000;
    my /= 2000;
    double sxx = 0, syy = 0, sxy = 0;
    for (int i = g * 2000; i < (g + 1) * 2000; ++i) {
      const double dx = d45.predictors(i, 0) - mx;
      const double dy = d45.predictors(i, 1) - my;
      sxx += dx * dx;
      syy += dy * dy;
      sxy += dx * dy;
    }
    CHECK(std::sqrt(sxx / 1999) == doctest::Approx(cfg.noise_sd).epsilon(0.08));
    CHECK(std::sqrt(syy / 1999) == doctest::Approx(cfg.noise_sd).epsilon(0.08));
    CHECK(sxy / std::sqrt(sxx * syy) == doctest::Approx(0.9).epsilon(0.05));
  }
}

TEST_CASE("gen_triangle: huge separation is trivially classifiable") {
  ppf::TriangleSimConfig cfg;
  cfg.n_per_class = 30;
  cfg.class_sep = 50.0;
  cfg.angle_deg = 37.0;
  cfg.seed = 5;
  const auto d = ppf::gen_triangle(cfg);
  // Nearest true class mean recovers every label.
  const double angles[3] = {90.0, 210.0, 330.0};
  const double rot = 37.0 * 3.14159265358979323846 / 180.0;
  for (int i = 0; i < d.n(); ++i) {
    int best = -1;
    double best_d = 1e300;
    for (int g = 0; g < 3; ++g) {
      const double rad = angles[g] * 3.14159265358979323846 / 180.0;
      const double mx0 = cfg.class_sep * std::cos(rad);
      const double my0 = cfg.class_sep * std::sin(rad);
      const double mx = std::cos(rot) * mx0 - std::sin(rot) * my0;
      const double my = std::sin(rot) * mx0 + std::cos(rot) * my0;
      const double dist = std::hypot(d.predictors(i, 0) - mx, d.predictors(i, 1) - my);
      if (dist < best_d) {
        best_d = dist;
        best = g;
      }
    }
    CHECK(best == d.labels[i]);
  }
}

TEST_CASE("summarize: hand-checked mean, sd, stderr") {
  ppf::ExperimentResult r;
  r.rows = {{"m", 1.0, 0, 0.0, 0.1}, {"m", 1.0, 1, 0.0, 0.2}, {"m", 1.0, 2, 0.0, 0.3}};
  const auto s = ppf::summarize(r);
  REQUIRE(s.size() == 1);
  CHECK(s[0].method == "m");
  CHECK(s[0].axis == 1.0);
  CHECK(s[0].reps == 3);
  CHECK(s[0].mean_test_error == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(s[0].sd_test_error == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(s[0].stderr_test_error == doctest::Approx(0.1 / std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("summarize: single replicate has zero sd") {
  ppf::ExperimentResult r;
  r.rows = {{"m", 2.0, 0, 0.0, 0.4}};
  const auto s = ppf::summarize(r);
  REQUIRE(s.size() == 1);
  CHECK(s[0].sd_test_error == 0.0);
  CHECK(s[0].stderr_test_error == 0.0);
  CHECK(s[0].mean_test_error == 0.4);
}

TEST_CASE("best_ppf_mean: minimum over ppf fractions only") {
  ppf::ExperimentResult r;
  r.rows = {{"ppf", 0.6, 0, 0, 0.1},  {"ppf", 0.6, 1, 0, 0.3}, {"ppf", -1.0, 0, 0, 0.05},
            {"ppf", -1.0, 1, 0, 0.15}, {"rf", 0.0, 0, 0, 0.01}, {"rf", 0.0, 1, 0, 0.01}};
  CHECK(ppf::best_ppf_mean(r) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("run_angle_sweep: row inventory, determinism, and validation") {
  ppf::TriangleSimConfig sim;
  sim.n_per_class = 15;
  const auto opt = small_opts();

  CHECK_THROWS_AS(ppf::run_angle_sweep({0.0}, 0, sim, opt), ppf::Error);
  CHECK_THROWS_AS(ppf::run_angle_sweep({}, 2, sim, opt), ppf::Error);

  const auto r = ppf::run_angle_sweep({45.0}, 1, sim, opt);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].method == "ppf");
  CHECK(r.rows[1].method == "rf");
  for (const auto& row : r.rows) {
    CHECK(row.axis == 45.0);
    CHECK(row.replicate == 0);
    CHECK(row.test_error >= 0.0);
    CHECK(row.test_error <= 1.0);
    CHECK(row.train_error >= 0.0);
    CHECK(row.train_error <= 1.0);
  }

  const auto r2 = ppf::run_angle_sweep({45.0}, 1, sim, opt);
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    CHECK(r.rows[i].test_error == r2.rows[i].test_error);
    CHECK(r.rows[i].train_error == r2.rows[i].train_error);
  }

  // Two angles, two reps: 2 methods x 2 angles x 2 reps rows, sorted.
  const auto r3 = ppf::run_angle_sweep({0.0, 45.0}, 2, sim, opt);
  REQUIRE(r3.rows.size() == 8);
  for (std::size_t i = 1; i < r3.rows.size(); ++i) {
    const auto &a = r3.rows[i - 1], &b = r3.rows[i];
    const bool sorted = a.method < b.method ||
                        (a.method == b.method &&
                         (a.axis < b.axis || (a.axis == b.axis && a.replicate < b.replicate)));
    CHECK(sorted);
  }
}

TEST_CASE("run_benchmark: fraction axes, rf sentinel, reps guard") {
  ppf::TriangleSimConfig sim;
  sim.n_per_class = 20;
  sim.seed = 11;
  const auto d = ppf::gen_triangle(sim);
  const auto opt = small_opts();

  CHECK_THROWS_AS(ppf::run_benchmark(d, 0, {0.5}, opt), ppf::Error);
  CHECK_THROWS_AS(ppf::run_benchmark(d, 2, {}, opt), ppf::Error);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto r = ppf::run_benchmark(d, 2, {0.5, nan}, opt);
  // 2 reps x (2 ppf fractions + 1 rf row).
  REQUIRE(r.rows.size() == 6);
  int ppf_half = 0, ppf_default = 0, rf_rows = 0;
  for (const auto& row : r.rows) {
    if (row.method == "ppf" && row.axis == 0.5) ++ppf_half;
    if (row.method == "ppf" && row.axis == -1.0) ++ppf_default;
    if (row.method == "rf") {
      CHECK(row.axis == 0.0);
      ++rf_rows;
    }
  }
  CHECK(ppf_half == 2);
  CHECK(ppf_default == 2);
  CHECK(rf_rows == 2);
  CHECK(std::isfinite(ppf::best_ppf_mean(r)));
}

TEST_CASE("run_tree_count_sweep: prefix OOB errors per count") {
  ppf::TriangleSimConfig sim;
  sim.n_per_class = 20;
  sim.seed = 13;
  const auto d = ppf::gen_triangle(sim);
  auto opt = small_opts();

  CHECK_THROWS_AS(ppf::run_tree_count_sweep(d, {5}, 0, opt), ppf::Error);
  CHECK_THROWS_AS(ppf::run_tree_count_sweep(d, {}, 2, opt), ppf::Error);
  CHECK_THROWS_AS(ppf::run_tree_count_sweep(d, {0}, 2, opt), ppf::Error);

  const auto r = ppf::run_tree_count_sweep(d, {5, 15}, 2, opt);
  // 2 methods x 2 counts x 2 reps.
  REQUIRE(r.rows.size() == 8);
  for (const auto& row : r.rows) {
    CHECK((row.axis == 5.0 || row.axis == 15.0));
    CHECK(std::isnan(row.train_error));
    CHECK(row.test_error >= 0.0);
    CHECK(row.test_error <= 1.0);
  }
  // Determinism.
  const auto r2 = ppf::run_tree_count_sweep(d, {5, 15}, 2, opt);
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    CHECK(r.rows[i].test_error == r2.rows[i].test_error);
}

TEST_CASE("run_fraction_sweep: ppf-only rows across fractions") {
  ppf::TriangleSimConfig sim;
  sim.n_per_class = 15;
  sim.seed = 17;
  const auto d = ppf::gen_triangle(sim);
  const auto opt = small_opts();
  const auto r = ppf::run_fraction_sweep(d, {0.5, 1.0}, 2, opt);
  REQUIRE(r.rows.size() == 4);
  for (const auto& row : r.rows) {
    CHECK(row.method == "ppf");
    CHECK((row.axis == 0.5 || row.axis == 1.0));
    CHECK(row.test_error >= 0.0);
    CHECK(row.test_error <= 1.0);
  }
}

TEST_CASE("rasterize_boundary: geometry and validation") {
  CHECK_THROWS_AS(ppf::rasterize_boundary([](double, double) { return 0; }, {0, 1, 0, 1}, 1),
                  ppf::Error);
  CHECK_THROWS_AS(ppf::rasterize_boundary([](double, double) { return 0; }, {1, 1, 0, 1}, 4),
                  ppf::Error);

  const auto constant = ppf::rasterize_boundary([](double, double) { return 2; }, {0, 1, 0, 1}, 5);
  REQUIRE(constant.size() == 5);
  for (const auto& row : constant) {
    REQUIRE(row.size() == 5);
    for (const int v : row) CHECK(v == 2);
  }

  // Row index walks y, column index walks x, endpoints hit the bounds.
  const auto grid = ppf::rasterize_boundary(
      [](double x, double y) { return (x >= 0.5 ? 1 : 0) + (y >= 5.0 ? 2 : 0); },
      {0.0, 1.0, 4.0, 6.0}, 3);
  CHECK(grid[0][0] == 0);  // (0, 4)
  CHECK(grid[0][2] == 1);  // (1, 4)
  CHECK(grid[2][0] == 2);  // (0, 6)
  CHECK(grid[2][2] == 3);  // (1, 6)
  CHECK(grid[1][1] == 3);  // (0.5, 5): both halves inclusive
}

TEST_CASE("write_experiment_csv: NaN cells round-trip as empty") {
  const auto dir = ppftest::scratch_dir("expcsv");
  const std::string path = dir + "/rows.csv";
  ppf::ExperimentResult r;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.rows = {{"ppf", -1.0, 0, nan, 0.25}, {"rf", 0.0, 1, 0.5, nan}};
  ppf::write_experiment_csv(path, r, "var_fraction");

  const auto t = ppf::read_csv(path);
  REQUIRE(t.header == std::vector<std::string>{"method", "var_fraction", "replicate",
                                               "train_error", "test_error"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "ppf");
  CHECK(t.rows[0][1] == "-1");
  CHECK(t.rows[0][3] == "");      // NaN train error
  CHECK(t.rows[0][4] == "0.25");
  CHECK(t.rows[1][4] == "");      // NaN test error

  ppf::ExperimentSummary s;
  s.method = "ppf";
  s.axis = 45.0;
  s.reps = 3;
  s.mean_test_error = 0.125;
  s.sd_test_error = 0.5;
  s.stderr_test_error = 0.25;
  ppf::write_summary_csv(dir + "/sum.csv", {s}, "angle");
  const auto ts = ppf::read_csv(dir + "/sum.csv");
  REQUIRE(ts.rows.size() == 1);
  CHECK(ts.rows[0] == std::vector<std::string>{"ppf", "45", "3", "0.125", "0.5", "0.25"});
}
