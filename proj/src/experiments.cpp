#include "ppf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "ppf/axis_forest.hpp"
#include "ppf/csv.hpp"
#include "ppf/diagnostics.hpp"
#include "ppf/errors.hpp"
#include "ppf/parallel.hpp"
#include "ppf/rng.hpp"

namespace ppf {

namespace {

// cos/sin of a degree angle, exact on the axis multiples so e.g. the 0
// and 90 degree datasets are exact coordinate swaps.
std::pair<double, double> cos_sin_deg(double deg) {
  const double wrapped = std::fmod(deg, 360.0);
  const double canon = wrapped < 0.0 ? wrapped + 360.0 : wrapped;
  if (canon == 0.0) return {1.0, 0.0};
  if (canon == 90.0) return {0.0, 1.0};
  if (canon == 180.0) return {-1.0, 0.0};
  if (canon == 270.0) return {0.0, -1.0};
  const double rad = deg * std::numbers::pi / 180.0;
  return {std::cos(rad), std::sin(rad)};
}

int rf_default_vars(int p) {
  return std::clamp(static_cast<int>(std::lround(std::sqrt(static_cast<double>(p)))), 1, p);
}

double error_rate(const IntVector& predicted, const IntVector& truth) {
  int wrong = 0;
  for (int i = 0; i < truth.size(); ++i)
    if (predicted[i] != truth[i]) ++wrong;
  return truth.size() > 0 ? static_cast<double>(wrong) / truth.size() : 0.0;
}

struct SplitFit {
  Dataset train_raw;
  Dataset test_raw;
  Dataset train_std;
  Matrix test_std;  // test predictors in training coordinates
};

SplitFit split_and_standardize(const Dataset& d, double train_fraction, std::uint64_t seed) {
  SplitFit s;
  std::tie(s.train_raw, s.test_raw) = stratified_split(d, train_fraction, seed);
  s.train_std = standardize(s.train_raw);
  s.test_std = s.train_std.standardization->apply(s.test_raw.predictors);
  return s;
}

double ppf_test_error(const PPforestModel& model, const Dataset& test_raw) {
  auto [pred, votes] = predict_forest_batch(model, test_raw.predictors);
  return error_rate(pred, test_raw.labels);
}

double rf_test_error(const AxisForest& f, const Matrix& x_std, const IntVector& labels) {
  int wrong = 0;
  for (int i = 0; i < x_std.rows(); ++i)
    if (predict_axis_forest(f, x_std.row(i).transpose()) != labels[i]) ++wrong;
  return x_std.rows() > 0 ? static_cast<double>(wrong) / x_std.rows() : 0.0;
}

void sort_rows(ExperimentResult& r) {
  std::stable_sort(r.rows.begin(), r.rows.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.axis != b.axis) return a.axis < b.axis;
    return a.replicate < b.replicate;
  });
}

}  // namespace

Dataset gen_triangle(const TriangleSimConfig& cfg) {
  if (cfg.n_per_class < 1) fail(Errc::config, "gen_triangle: n_per_class must be >= 1");
  if (!(cfg.correlation >= 0.0 && cfg.correlation < 1.0))
    fail(Errc::config, "gen_triangle: correlation must be in [0,1)");
  if (!(cfg.noise_sd > 0.0)) fail(Errc::config, "gen_triangle: noise_sd must be positive");

  // Equilateral triangle of class means (circumradius class_sep).
  const double mean_angles[3] = {90.0, 210.0, 330.0};
  // Noise principal axes are the coordinate axes at angle 0; `correlation`
  // sets the eccentricity via eigenvalues noise_sd^2 * (1 +- rho). Rotating
  // by 45 degrees reproduces the equicorrelated covariance
  // noise_sd^2 * [[1, rho], [rho, 1]], so rho equals the within-class
  // Pearson correlation at the midpoint of the sweep. Keeping the base
  // ellipse axis-aligned puts the baseline forest at its best at 0 and 90
  // degrees and at its worst mid-sweep, where the class boundaries run
  // diagonally to the coordinate axes.
  const double l11 = cfg.noise_sd * std::sqrt(1.0 + cfg.correlation);
  const double l22 = cfg.noise_sd * std::sqrt(1.0 - cfg.correlation);
  const auto [rot_c, rot_s] = cos_sin_deg(cfg.angle_deg);

  Dataset d;
  const int n = 3 * cfg.n_per_class;
  d.predictors.resize(n, 2);
  d.labels.resize(n);
  d.class_names = {"A", "B", "C"};
  d.var_names = {"x1", "x2"};
  Rng rng(cfg.seed);
  int row = 0;
  for (int g = 0; g < 3; ++g) {
    const auto [mc, ms] = cos_sin_deg(mean_angles[g]);
    const double mx = cfg.class_sep * mc;
    const double my = cfg.class_sep * ms;
    for (int i = 0; i < cfg.n_per_class; ++i, ++row) {
      const double u1 = rng.normal();
      const double u2 = rng.normal();
      const double x = mx + l11 * u1;
      const double y = my + l22 * u2;
      d.predictors(row, 0) = rot_c * x - rot_s * y;
      d.predictors(row, 1) = rot_s * x + rot_c * y;
      d.labels[row] = g;
    }
  }
  d.recount_classes();
  return d;
}

std::vector<ExperimentSummary> summarize(const ExperimentResult& r) {
  std::map<std::pair<std::string, double>, std::vector<double>> groups;
  for (const auto& row : r.rows) groups[{row.method, row.axis}].push_back(row.test_error);
  std::vector<ExperimentSummary> out;
  for (const auto& [key, errors] : groups) {
    ExperimentSummary s;
    s.method = key.first;
    s.axis = key.second;
    s.reps = static_cast<int>(errors.size());
    double sum = 0.0;
    for (const double e : errors) sum += e;
    s.mean_test_error = sum / s.reps;
    double ss = 0.0;
    for (const double e : errors) ss += (e - s.mean_test_error) * (e - s.mean_test_error);
    s.sd_test_error = s.reps > 1 ? std::sqrt(ss / (s.reps - 1)) : 0.0;
    s.stderr_test_error = s.sd_test_error / std::sqrt(static_cast<double>(s.reps));
    out.push_back(s);
  }
  return out;
}

ExperimentResult run_angle_sweep(const std::vector<double>& angles, int reps,
                                 const TriangleSimConfig& sim, const HarnessOptions& opt) {
  if (reps < 1) fail(Errc::config, "run_angle_sweep: reps must be >= 1");
  if (angles.empty()) fail(Errc::config, "run_angle_sweep: no angles given");
  const int jobs = static_cast<int>(angles.size()) * reps;
  std::vector<std::array<ExperimentRow, 2>> slots(jobs);

  parallel_for(jobs, opt.num_threads, [&](int job) {
    const int ai = job / reps;
    const int rep = job % reps;
    const std::uint64_t base = mix_seed(opt.seed, static_cast<std::uint64_t>(job));
    try {
    TriangleSimConfig gen_cfg = sim;
    gen_cfg.angle_deg = angles[ai];
    gen_cfg.seed = mix_seed(base, 0);
    const Dataset data = gen_triangle(gen_cfg);
    const SplitFit s = split_and_standardize(data, opt.train_fraction, mix_seed(base, 1));

    ForestConfig ppf_cfg = opt.ppf;
    ppf_cfg.seed = mix_seed(base, 2);
    ppf_cfg.num_threads = 1;  // parallelism lives at the replicate level
    const PPforestModel ppf = fit_forest(s.train_std, ppf_cfg);
    slots[job][0] = {"ppf", angles[ai], rep, ppf_test_error(ppf, s.train_raw),
                     ppf_test_error(ppf, s.test_raw)};

    const AxisForest rf = fit_axis_forest(s.train_std, opt.rf_trees,
                                          rf_default_vars(data.p()), opt.rf_min_leaf,
                                          mix_seed(base, 3));
    slots[job][1] = {"rf", angles[ai], rep,
                     rf_test_error(rf, s.train_std.predictors, s.train_raw.labels),
                     rf_test_error(rf, s.test_std, s.test_raw.labels)};
    } catch (const Error& e) {
      // Reproduction triple: the failing cell of the sweep.
      fail(e.code(), "angle=" + format_double(angles[ai]) + " rep=" + std::to_string(rep) +
                         " seed=" + std::to_string(base) + ": " + e.what());
    }
  });

  ExperimentResult r;
  for (const auto& pair : slots) {
    r.rows.push_back(pair[0]);
    r.rows.push_back(pair[1]);
  }
  sort_rows(r);
  return r;
}

ExperimentResult run_benchmark(const Dataset& d, int reps, const std::vector<double>& var_fractions,
                               const HarnessOptions& opt) {
  if (reps < 1) fail(Errc::config, "run_benchmark: reps must be >= 1");
  if (var_fractions.empty()) fail(Errc::config, "run_benchmark: no var fractions given");
  const auto num_fractions = static_cast<int>(var_fractions.size());
  std::vector<std::vector<ExperimentRow>> slots(reps);

  parallel_for(reps, opt.num_threads, [&](int rep) {
    const std::uint64_t base = mix_seed(opt.seed, static_cast<std::uint64_t>(rep));
    const SplitFit s = split_and_standardize(d, opt.train_fraction, mix_seed(base, 0));
    auto& rows = slots[rep];
    for (int fi = 0; fi < num_fractions; ++fi) {
      ForestConfig cfg = opt.ppf;
      if (std::isnan(var_fractions[fi]))
        cfg.var_fraction.reset();  // forest default m = round(sqrt(p))
      else
        cfg.var_fraction = var_fractions[fi];
      cfg.seed = mix_seed(base, 2 + static_cast<std::uint64_t>(fi));
      cfg.num_threads = 1;
      const PPforestModel ppf = fit_forest(s.train_std, cfg);
      const double axis = std::isnan(var_fractions[fi]) ? -1.0 : var_fractions[fi];
      rows.push_back({"ppf", axis, rep, ppf_test_error(ppf, s.train_raw),
                      ppf_test_error(ppf, s.test_raw)});
    }
    const AxisForest rf = fit_axis_forest(s.train_std, opt.rf_trees, rf_default_vars(d.p()),
                                          opt.rf_min_leaf, mix_seed(base, 1));
    rows.push_back({"rf", 0.0, rep, rf_test_error(rf, s.train_std.predictors, s.train_raw.labels),
                    rf_test_error(rf, s.test_std, s.test_raw.labels)});
  });

  ExperimentResult r;
  for (const auto& rows : slots) r.rows.insert(r.rows.end(), rows.begin(), rows.end());
  sort_rows(r);
  return r;
}

double best_ppf_mean(const ExperimentResult& r) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : summarize(r)) {
    if (s.method == "ppf") best = std::min(best, s.mean_test_error);
  }
  return best;
}

ExperimentResult run_tree_count_sweep(const Dataset& d, const std::vector<int>& counts, int reps,
                                      const HarnessOptions& opt) {
  if (reps < 1) fail(Errc::config, "run_tree_count_sweep: reps must be >= 1");
  if (counts.empty()) fail(Errc::config, "run_tree_count_sweep: no tree counts given");
  for (const int c : counts)
    if (c < 1) fail(Errc::config, "run_tree_count_sweep: tree counts must be >= 1");
  const int max_count = *std::max_element(counts.begin(), counts.end());
  const Dataset d_std = standardize(d);
  std::vector<std::vector<ExperimentRow>> slots(reps);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  parallel_for(reps, opt.num_threads, [&](int rep) {
    const std::uint64_t base = mix_seed(opt.seed, static_cast<std::uint64_t>(rep));
    ForestConfig cfg = opt.ppf;
    cfg.num_trees = max_count;
    cfg.seed = mix_seed(base, 0);
    cfg.num_threads = 1;
    const PPforestModel ppf = fit_forest(d_std, cfg);

    // Vote counts accumulated tree by tree; every requested count is a
    // prefix of the same forest (tree seeds do not depend on the total).
    const int n = d_std.n();
    Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(n, d_std.num_classes());
    std::vector<int> wanted(counts.begin(), counts.end());
    std::sort(wanted.begin(), wanted.end());
    std::size_t next = 0;
    for (int k = 0; k < max_count && next < wanted.size(); ++k) {
      const auto& mask = ppf.oob_mask(k);
      for (int i = 0; i < n; ++i)
        if (mask[i]) votes(i, predict_tree(ppf.trees[k], d_std.predictors.row(i))) += 1;
      while (next < wanted.size() && wanted[next] == k + 1) {
        int counted = 0, wrong = 0;
        for (int i = 0; i < n; ++i) {
          if (votes.row(i).sum() == 0) continue;
          ++counted;
          int best = 0;
          for (int g = 1; g < d_std.num_classes(); ++g)
            if (votes(i, g) > votes(i, best)) best = g;
          if (best != d_std.labels[i]) ++wrong;
        }
        const double err = counted > 0 ? static_cast<double>(wrong) / counted : nan;
        slots[rep].push_back({"ppf", static_cast<double>(wanted[next]), rep, nan, err});
        ++next;
      }
    }

    const AxisForest rf = fit_axis_forest(d_std, max_count, rf_default_vars(d.p()),
                                          opt.rf_min_leaf, mix_seed(base, 1));
    for (const int c : wanted)
      slots[rep].push_back({"rf", static_cast<double>(c), rep, nan,
                            axis_forest_oob_error(rf, d_std, c)});
  });

  ExperimentResult r;
  for (const auto& rows : slots) r.rows.insert(r.rows.end(), rows.begin(), rows.end());
  sort_rows(r);
  return r;
}

ExperimentResult run_fraction_sweep(const Dataset& d, const std::vector<double>& fractions,
                                    int reps, const HarnessOptions& opt) {
  if (reps < 1) fail(Errc::config, "run_fraction_sweep: reps must be >= 1");
  if (fractions.empty()) fail(Errc::config, "run_fraction_sweep: no fractions given");
  const Dataset d_std = standardize(d);
  const int jobs = static_cast<int>(fractions.size()) * reps;
  std::vector<ExperimentRow> slots(jobs);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  parallel_for(jobs, opt.num_threads, [&](int job) {
    const auto fi = job / reps;
    const int rep = job % reps;
    const std::uint64_t base = mix_seed(opt.seed, static_cast<std::uint64_t>(job));
    ForestConfig cfg = opt.ppf;
    if (std::isnan(fractions[fi]))
      cfg.var_fraction.reset();
    else
      cfg.var_fraction = fractions[fi];
    cfg.seed = mix_seed(base, 0);
    cfg.num_threads = 1;
    const PPforestModel ppf = fit_forest(d_std, cfg);
    const double axis = std::isnan(fractions[fi]) ? -1.0 : fractions[fi];
    slots[job] = {"ppf", axis, rep, nan, oob_error(ppf, d_std)};
  });

  ExperimentResult r;
  r.rows = std::move(slots);
  sort_rows(r);
  return r;
}

std::vector<std::vector<int>> rasterize_boundary(const std::function<int(double, double)>& predict,
                                                 const std::array<double, 4>& bounds,
                                                 int resolution) {
  if (resolution < 2) fail(Errc::config, "rasterize_boundary: resolution must be >= 2");
  const auto [xmin, xmax, ymin, ymax] = bounds;
  if (!(xmax > xmin) || !(ymax > ymin)) fail(Errc::config, "rasterize_boundary: empty box");
  std::vector<std::vector<int>> grid(resolution, std::vector<int>(resolution));
  for (int r = 0; r < resolution; ++r) {
    const double y = ymin + (ymax - ymin) * r / (resolution - 1);
    for (int c = 0; c < resolution; ++c) {
      const double x = xmin + (xmax - xmin) * c / (resolution - 1);
      grid[r][c] = predict(x, y);
    }
  }
  return grid;
}

namespace {
std::string axis_cell(double axis) {
  if (std::isnan(axis)) return "";
  return format_double(axis);
}
std::string error_cell(double v) { return std::isnan(v) ? "" : format_double(v); }
}  // namespace

void write_experiment_csv(const std::string& path, const ExperimentResult& r,
                          const std::string& axis_name) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(r.rows.size());
  for (const auto& row : r.rows) {
    rows.push_back({row.method, axis_cell(row.axis), std::to_string(row.replicate),
                    error_cell(row.train_error), error_cell(row.test_error)});
  }
  write_csv(path, {"method", axis_name, "replicate", "train_error", "test_error"}, rows);
}

void write_summary_csv(const std::string& path, const std::vector<ExperimentSummary>& summaries,
                       const std::string& axis_name) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(summaries.size());
  for (const auto& s : summaries) {
    rows.push_back({s.method, axis_cell(s.axis), std::to_string(s.reps),
                    format_double(s.mean_test_error), format_double(s.sd_test_error),
                    format_double(s.stderr_test_error)});
  }
  write_csv(path, {"method", axis_name, "reps", "mean_test_error", "sd_test_error",
                   "stderr_test_error"},
            rows);
}

}  // namespace ppf
