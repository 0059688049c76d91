// ppf: projection pursuit random forest trainer / predictor / experiment
// harness. Subcommands: train, predict, diagnose, simulate, bench, sweep.
// Every run with a fixed --seed is byte-reproducible at any --threads.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ppf/axis_forest.hpp"
#include "ppf/csv.hpp"
#include "ppf/dataset.hpp"
#include "ppf/diagnostics.hpp"
#include "ppf/errors.hpp"
#include "ppf/experiments.hpp"
#include "ppf/forest.hpp"
#include "ppf/model_io.hpp"
#include "ppf/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ForestFlags {
  int trees = 500;
  std::string var_fraction = "rf-default";
  std::string index = "lda";
  double lambda = 0.1;
  int rule = 1;
  std::uint64_t seed = 0;
  int threads = 1;
};

std::optional<double> parse_var_fraction(const std::string& s) {
  if (s == "rf-default") return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !(v > 0.0 && v <= 1.0))
    ppf::fail(ppf::Errc::config, "var-fraction must be 'rf-default' or a real in (0,1]");
  return v;
}

ppf::ForestConfig to_config(const ForestFlags& f) {
  ppf::ForestConfig cfg;
  cfg.num_trees = f.trees;
  cfg.var_fraction = parse_var_fraction(f.var_fraction);
  cfg.index.kind = f.index == "pda" ? ppf::IndexKind::pda : ppf::IndexKind::lda;
  cfg.index.lambda = f.lambda;
  cfg.rule_id = f.rule;
  cfg.seed = f.seed;
  cfg.num_threads = f.threads;
  validate(cfg.index);
  return cfg;
}

// Registers the shared forest flags on a subcommand, with PPF_* env
// overrides.
void add_forest_flags(CLI::App* cmd, ForestFlags& f) {
  cmd->add_option("--trees", f.trees, "Number of trees")
      ->default_val(500)
      ->check(CLI::PositiveNumber)
      ->envname("PPF_TREES");
  cmd->add_option("--var-fraction", f.var_fraction,
                  "Fraction of variables drawn per node, or 'rf-default' (= round(sqrt(p)))")
      ->default_val("rf-default")
      ->check(
          [](const std::string& s) -> std::string {
            if (s == "rf-default") return "";
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size() || !(v > 0.0 && v <= 1.0))
              return "must be 'rf-default' or a real in (0,1]";
            return "";
          },
          "FRACTION")
      ->envname("PPF_VAR_FRACTION");
  cmd->add_option("--index", f.index, "Projection index: lda or pda")
      ->default_val("lda")
      ->check(CLI::IsMember({"lda", "pda"}))
      ->envname("PPF_INDEX");
  cmd->add_option("--lambda", f.lambda, "PDA shrinkage in [0,1)")
      ->default_val(0.1)
      ->check(
          [](const std::string& s) -> std::string {
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (end != s.c_str() + s.size() || !(v >= 0.0 && v < 1.0))
              return "must be a real in [0,1)";
            return "";
          },
          "LAMBDA")
      ->envname("PPF_LAMBDA");
  cmd->add_option("--rule", f.rule, "Cutoff rule 1..8")
      ->default_val(1)
      ->check(CLI::Range(1, 8))
      ->envname("PPF_RULE");
  cmd->add_option("--seed", f.seed, "Master random seed")
      ->default_val(0)
      ->envname("PPF_SEED");
  cmd->add_option("--threads", f.threads, "Worker threads (never changes results)")
      ->default_val(1)
      ->check(CLI::PositiveNumber)
      ->envname("PPF_THREADS");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size())
      ppf::fail(ppf::Errc::config, what + ": bad number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_fractions(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) {
    if (tok == "rf-default") {
      out.push_back(kNaN);
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size() || !(v > 0.0 && v <= 1.0))
      ppf::fail(ppf::Errc::config, "fractions: '" + tok + "' is not 'rf-default' or in (0,1]");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (const double v : parse_doubles(s, what)) {
    if (v != std::floor(v)) ppf::fail(ppf::Errc::config, what + ": expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) ppf::fail(ppf::Errc::io, dir + ": cannot create directory (" + ec.message() + ")");
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void note_written(const std::string& path) { std::cout << "wrote " << path << "\n"; }

int rf_default_m(int p) {
  return std::clamp(static_cast<int>(std::lround(std::sqrt(static_cast<double>(p)))), 1, p);
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data, label, out;
  ForestFlags forest;
};

void run_train(const TrainArgs& a) {
  const ppf::Dataset raw = ppf::load_csv(a.data, a.label);
  const ppf::Dataset train = ppf::standardize(raw);
  const ppf::ForestConfig cfg = to_config(a.forest);
  const ppf::PPforestModel model = ppf::fit_forest(train, cfg);
  ppf::save_model(model, a.out);

  const double oob = ppf::oob_error(model, train);
  std::cout << "trained: n=" << train.n() << " p=" << train.p() << " classes="
            << train.num_classes() << " trees=" << cfg.num_trees << " m="
            << ppf::vars_per_node(cfg, train.p()) << " index="
            << (cfg.index.kind == ppf::IndexKind::lda ? "lda" : "pda")
            << " lambda=" << ppf::format_double(cfg.index.lambda) << " rule=" << cfg.rule_id
            << " seed=" << cfg.seed << "\n";
  std::cout << "oob_error=" << ppf::format_double(oob) << "\n";
  note_written(a.out);
}

// -------------------------------------------------------------- predict

struct PredictArgs {
  std::string model, data, out;
};

void run_predict(const PredictArgs& a) {
  const ppf::PPforestModel model = ppf::load_model(a.model);
  ppf::Matrix x;
  try {
    x = ppf::load_matrix_csv(a.data, model.var_names);
  } catch (const ppf::Error& e) {
    if (e.code() != ppf::Errc::mismatch) throw;
    // Headers don't carry the training names; accept a positional match.
    x = ppf::load_matrix_csv(a.data, {});
    if (x.cols() != model.p)
      ppf::fail(ppf::Errc::mismatch, a.data + ": expected " + std::to_string(model.p) +
                                         " predictor columns, got " + std::to_string(x.cols()));
  }

  std::vector<std::string> header = {"row", "predicted_class"};
  for (const auto& name : model.class_names) header.push_back("vote_" + name);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(x.rows());
  for (int i = 0; i < x.rows(); ++i) {
    const auto [cls, votes] = ppf::predict_forest(model, x.row(i).transpose());
    std::vector<std::string> row = {std::to_string(i), model.class_names[cls]};
    for (int g = 0; g < votes.size(); ++g) row.push_back(ppf::format_double(votes[g]));
    rows.push_back(std::move(row));
  }
  ppf::write_csv(a.out, header, rows);
  note_written(a.out);
}

// ------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string model, data, label, outdir;
  std::uint64_t seed = 0;
  int threads = 1;
  int mds_dims = 2;
  bool oob_pair_proximity = false;
};

void run_diagnose(const DiagnoseArgs& a) {
  ppf::PPforestModel model = ppf::load_model(a.model);
  const ppf::Dataset raw = ppf::load_csv(a.data, a.label);
  const ppf::Dataset train = ppf::standardize(raw);
  ppf::regenerate_bootstraps(model, train);  // hash-checked

  const ppf::DiagnosticsReport rep =
      ppf::run_diagnostics(model, train, a.seed, a.threads, a.oob_pair_proximity);
  ensure_dir(a.outdir);

  {
    std::vector<std::vector<std::string>> rows;
    for (int j = 0; j < train.p(); ++j) {
      rows.push_back({train.var_names[j], ppf::format_double(rep.imp_permuted[j]),
                      ppf::format_double(rep.imp_forest_avg[j]),
                      ppf::format_double(rep.imp_forest_weighted[j])});
    }
    const auto path = join_path(a.outdir, "importance.csv");
    ppf::write_csv(path, {"variable", "imp_permuted", "imp_forest_avg", "imp_forest_weighted"},
                   rows);
    note_written(path);
  }
  {
    std::vector<std::string> header = {"tree"};
    for (const auto& name : train.var_names) header.push_back(name);
    std::vector<std::vector<std::string>> rows;
    for (int k = 0; k < rep.imp_pptree_per_tree.rows(); ++k) {
      std::vector<std::string> row = {std::to_string(k)};
      for (int j = 0; j < train.p(); ++j)
        row.push_back(ppf::format_double(rep.imp_pptree_per_tree(k, j)));
      rows.push_back(std::move(row));
    }
    const auto path = join_path(a.outdir, "importance_per_tree.csv");
    ppf::write_csv(path, header, rows);
    note_written(path);
  }
  {
    std::vector<std::string> header = {"row", "label"};
    for (const auto& name : model.class_names) header.push_back("vote_" + name);
    header.push_back("never_oob");
    std::vector<char> never(train.n(), 0);
    for (const int i : rep.never_oob) never[i] = 1;
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < train.n(); ++i) {
      std::vector<std::string> row = {std::to_string(i), train.class_names[train.labels[i]]};
      for (int g = 0; g < rep.vote_matrix.cols(); ++g)
        row.push_back(ppf::format_double(rep.vote_matrix(i, g)));
      row.push_back(never[i] ? "1" : "0");
      rows.push_back(std::move(row));
    }
    const auto path = join_path(a.outdir, "votes.csv");
    ppf::write_csv(path, header, rows);
    note_written(path);
  }
  if (train.num_classes() >= 3) {
    const ppf::Matrix tc = ppf::ternary_coords(rep.vote_matrix);
    std::vector<std::string> header = {"row", "label"};
    for (int c = 0; c < tc.cols(); ++c) header.push_back("t" + std::to_string(c + 1));
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < tc.rows(); ++i) {
      std::vector<std::string> row = {std::to_string(i), train.class_names[train.labels[i]]};
      for (int c = 0; c < tc.cols(); ++c) row.push_back(ppf::format_double(tc(i, c)));
      rows.push_back(std::move(row));
    }
    const auto path = join_path(a.outdir, "ternary.csv");
    ppf::write_csv(path, header, rows);
    note_written(path);
  }
  {
    std::vector<std::string> header = {"row"};
    for (int i = 0; i < train.n(); ++i) header.push_back(std::to_string(i));
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < train.n(); ++i) {
      std::vector<std::string> row = {std::to_string(i)};
      for (int j = 0; j < train.n(); ++j) row.push_back(ppf::format_double(rep.proximity(i, j)));
      rows.push_back(std::move(row));
    }
    const auto path = join_path(a.outdir, "proximity.csv");
    ppf::write_csv(path, header, rows);
    note_written(path);
  }
  std::vector<std::string> mds_warnings;
  {
    const ppf::Matrix coords = ppf::classical_mds(rep.proximity, a.mds_dims, &mds_warnings);
    std::vector<std::string> header = {"row", "label"};
    for (int c = 0; c < coords.cols(); ++c) header.push_back("dim" + std::to_string(c + 1));
    std::vector<std::vector<std::string>> rows;
    for (int i = 0; i < coords.rows(); ++i) {
      std::vector<std::string> row = {std::to_string(i), train.class_names[train.labels[i]]};
      for (int c = 0; c < coords.cols(); ++c) row.push_back(ppf::format_double(coords(i, c)));
      rows.push_back(std::move(row));
    }
    const auto path = join_path(a.outdir, "mds.csv");
    ppf::write_csv(path, header, rows);
    note_written(path);
  }
  {
    json j;
    j["oob_error"] = rep.oob_error;
    j["n"] = train.n();
    j["p"] = train.p();
    j["classes"] = train.class_names;
    j["num_trees"] = static_cast<int>(model.trees.size());
    j["never_oob_rows"] = rep.never_oob;
    j["proximity_oob_pairs_only"] = a.oob_pair_proximity;
    j["mds_dims"] = a.mds_dims;
    j["warnings"] = mds_warnings;
    const auto path = join_path(a.outdir, "summary.json");
    std::ofstream out(path, std::ios::binary);
    if (!out) ppf::fail(ppf::Errc::io, path + ": cannot write");
    out << j.dump(1, '\t') << "\n";
    note_written(path);
  }
  std::cout << "oob_error=" << ppf::format_double(rep.oob_error) << "\n";
}

// ------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string angles = "0,15,30,45,60,75,90";
  int reps = 20;
  int n_per_class = 50;
  double class_sep = ppf::TriangleSimConfig{}.class_sep;
  double correlation = ppf::TriangleSimConfig{}.correlation;
  double noise_sd = ppf::TriangleSimConfig{}.noise_sd;
  int rf_trees = 500;
  int raster = 0;
  double raster_angle = 45.0;
  std::string outdir;
  ForestFlags forest;
};

void run_simulate(const SimulateArgs& a) {
  ppf::TriangleSimConfig sim;
  sim.n_per_class = a.n_per_class;
  sim.class_sep = a.class_sep;
  sim.correlation = a.correlation;
  sim.noise_sd = a.noise_sd;

  ppf::HarnessOptions opt;
  opt.ppf = to_config(a.forest);
  opt.rf_trees = a.rf_trees;
  opt.seed = a.forest.seed;
  opt.num_threads = a.forest.threads;

  const std::vector<double> angles = parse_doubles(a.angles, "angles");
  const ppf::ExperimentResult result = ppf::run_angle_sweep(angles, a.reps, sim, opt);
  ensure_dir(a.outdir);
  const auto rows_path = join_path(a.outdir, "angles.csv");
  ppf::write_experiment_csv(rows_path, result, "angle");
  note_written(rows_path);
  const auto summary_path = join_path(a.outdir, "angles_summary.csv");
  ppf::write_summary_csv(summary_path, ppf::summarize(result), "angle");
  note_written(summary_path);

  if (a.raster > 0) {
    // One representative dataset and model pair per method at the
    // requested angle, rasterized over the data's bounding box.
    ppf::TriangleSimConfig cfg = sim;
    cfg.angle_deg = a.raster_angle;
    cfg.seed = ppf::mix_seed(opt.seed, 0xb0a0d);
    const ppf::Dataset data = ppf::gen_triangle(cfg);
    const ppf::Dataset train = ppf::standardize(data);
    ppf::ForestConfig fc = opt.ppf;
    fc.seed = ppf::mix_seed(opt.seed, 0xb0a0e);
    const ppf::PPforestModel ppf_model = ppf::fit_forest(train, fc);
    const ppf::AxisForest rf = ppf::fit_axis_forest(train, a.rf_trees, rf_default_m(2), 1,
                                                    ppf::mix_seed(opt.seed, 0xb0a0f),
                                                    a.forest.threads);

    const double x0 = data.predictors.col(0).minCoeff(), x1 = data.predictors.col(0).maxCoeff();
    const double y0 = data.predictors.col(1).minCoeff(), y1 = data.predictors.col(1).maxCoeff();
    const double mx = 0.1 * (x1 - x0), my = 0.1 * (y1 - y0);
    const std::array<double, 4> bounds = {x0 - mx, x1 + mx, y0 - my, y1 + my};

    const auto emit = [&](const std::string& name, const std::function<int(double, double)>& f) {
      const auto grid = ppf::rasterize_boundary(f, bounds, a.raster);
      std::vector<std::vector<std::string>> rows;
      for (int r = 0; r < a.raster; ++r) {
        const double y = bounds[2] + (bounds[3] - bounds[2]) * r / (a.raster - 1);
        for (int c = 0; c < a.raster; ++c) {
          const double x = bounds[0] + (bounds[1] - bounds[0]) * c / (a.raster - 1);
          rows.push_back({ppf::format_double(x), ppf::format_double(y),
                          data.class_names[grid[r][c]]});
        }
      }
      const auto path = join_path(a.outdir, name);
      ppf::write_csv(path, {"x", "y", "class"}, rows);
      note_written(path);
    };
    emit("boundary_ppf.csv", [&](double x, double y) {
      ppf::Vector v(2);
      v << x, y;
      return ppf::predict_forest(ppf_model, v).first;
    });
    const ppf::Standardization& st = *train.standardization;
    emit("boundary_rf.csv", [&](double x, double y) {
      ppf::Vector v(2);
      v << (x - st.mean[0]) / st.sd[0], (y - st.mean[1]) / st.sd[1];
      return ppf::predict_axis_forest(rf, v);
    });
  }

  for (const auto& s : ppf::summarize(result)) {
    std::cout << s.method << " angle=" << ppf::format_double(s.axis)
              << " mean_test_error=" << ppf::format_double(s.mean_test_error)
              << " stderr=" << ppf::format_double(s.stderr_test_error) << "\n";
  }
}

// ----------------------------------------------------------------- bench

struct BenchArgs {
  std::string data, label, outdir;
  std::string fractions = "0.6,0.9,rf-default";
  int reps = 50;
  int rf_trees = 500;
  ForestFlags forest;
};

void run_bench(const BenchArgs& a) {
  const ppf::Dataset d = ppf::load_csv(a.data, a.label);
  ppf::HarnessOptions opt;
  opt.ppf = to_config(a.forest);
  opt.rf_trees = a.rf_trees;
  opt.seed = a.forest.seed;
  opt.num_threads = a.forest.threads;

  const ppf::ExperimentResult result =
      ppf::run_benchmark(d, a.reps, parse_fractions(a.fractions), opt);
  ensure_dir(a.outdir);
  const auto rows_path = join_path(a.outdir, "bench.csv");
  ppf::write_experiment_csv(rows_path, result, "var_fraction");
  note_written(rows_path);
  const auto summary_path = join_path(a.outdir, "bench_summary.csv");
  ppf::write_summary_csv(summary_path, ppf::summarize(result), "var_fraction");
  note_written(summary_path);

  std::cout << "ppf_best_mean_test_error=" << ppf::format_double(ppf::best_ppf_mean(result))
            << "\n";
  for (const auto& s : ppf::summarize(result)) {
    if (s.method == "rf")
      std::cout << "rf_mean_test_error=" << ppf::format_double(s.mean_test_error) << "\n";
  }
}

// ----------------------------------------------------------------- sweep

struct SweepArgs {
  std::string data, label, outdir;
  std::string what = "trees";
  std::string counts = "1,10,50,100,200,500";
  std::string fractions = "0.2,0.4,0.6,0.8,1.0";
  int reps = 10;
  int rf_trees = 500;
  ForestFlags forest;
};

void run_sweep(const SweepArgs& a) {
  const ppf::Dataset d = ppf::load_csv(a.data, a.label);
  ppf::HarnessOptions opt;
  opt.ppf = to_config(a.forest);
  opt.rf_trees = a.rf_trees;
  opt.seed = a.forest.seed;
  opt.num_threads = a.forest.threads;

  ppf::ExperimentResult result;
  std::string axis_name;
  if (a.what == "trees") {
    result = ppf::run_tree_count_sweep(d, parse_ints(a.counts, "counts"), a.reps, opt);
    axis_name = "num_trees";
  } else {
    result = ppf::run_fraction_sweep(d, parse_fractions(a.fractions), a.reps, opt);
    axis_name = "var_fraction";
  }
  ensure_dir(a.outdir);
  const auto rows_path = join_path(a.outdir, "sweep.csv");
  ppf::write_experiment_csv(rows_path, result, axis_name);
  note_written(rows_path);
  const auto summary_path = join_path(a.outdir, "sweep_summary.csv");
  ppf::write_summary_csv(summary_path, ppf::summarize(result), axis_name);
  note_written(summary_path);
  for (const auto& s : ppf::summarize(result)) {
    std::cout << s.method << " " << axis_name << "=" << ppf::format_double(s.axis)
              << " mean_oob_error=" << ppf::format_double(s.mean_test_error) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection pursuit random forest: oblique-tree ensemble classifier"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Fit a forest on a labeled CSV");
  train->add_option("--data", train_args.data, "Training CSV (header row required)")->required();
  train->add_option("--label", train_args.label, "Label column name (or 0-based index)")
      ->required();
  train->add_option("--out", train_args.out, "Model JSON output path")->required();
  add_forest_flags(train, train_args.forest);

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Predict classes for new rows");
  predict->add_option("--model", predict_args.model, "Model JSON path")->required();
  predict->add_option("--data", predict_args.data, "Input CSV")->required();
  predict->add_option("--out", predict_args.out, "Predictions CSV output path")->required();

  DiagnoseArgs diagnose_args;
  auto* diagnose = app.add_subcommand("diagnose", "Write OOB diagnostics for a fitted model");
  diagnose->add_option("--model", diagnose_args.model, "Model JSON path")->required();
  diagnose->add_option("--data", diagnose_args.data, "The training CSV")->required();
  diagnose->add_option("--label", diagnose_args.label, "Label column name")->required();
  diagnose->add_option("--outdir", diagnose_args.outdir, "Directory for the CSV reports")
      ->required();
  diagnose->add_option("--seed", diagnose_args.seed, "Permutation seed")
      ->default_val(0)
      ->envname("PPF_SEED");
  diagnose->add_option("--threads", diagnose_args.threads, "Worker threads")
      ->default_val(1)
      ->check(CLI::PositiveNumber)
      ->envname("PPF_THREADS");
  diagnose->add_option("--mds-dims", diagnose_args.mds_dims, "Scaling dimensions")
      ->default_val(2)
      ->check(CLI::PositiveNumber);
  diagnose->add_flag("--oob-pair-proximity", diagnose_args.oob_pair_proximity,
                     "Count only trees where both rows are out-of-bag");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Rotated-triangle comparison study");
  simulate->add_option("--angles", sim_args.angles, "Comma list of rotation angles (degrees)")
      ->default_val(sim_args.angles);
  simulate->add_option("--reps", sim_args.reps, "Replicates per angle")
      ->default_val(20)
      ->check(CLI::PositiveNumber);
  simulate->add_option("--n-per-class", sim_args.n_per_class, "Points per class")
      ->default_val(50)
      ->check(CLI::PositiveNumber);
  simulate->add_option("--class-sep", sim_args.class_sep, "Triangle circumradius")
      ->default_val(sim_args.class_sep);
  simulate->add_option("--correlation", sim_args.correlation, "Noise correlation in [0,1)")
      ->default_val(sim_args.correlation);
  simulate->add_option("--noise-sd", sim_args.noise_sd, "Noise standard deviation")
      ->default_val(sim_args.noise_sd);
  simulate->add_option("--rf-trees", sim_args.rf_trees, "Baseline forest size")
      ->default_val(500)
      ->check(CLI::PositiveNumber);
  simulate->add_option("--raster", sim_args.raster,
                       "Also write NxN decision-boundary rasters (0 = off)")
      ->default_val(0);
  simulate->add_option("--raster-angle", sim_args.raster_angle, "Angle for the rasters")
      ->default_val(45.0);
  simulate->add_option("--outdir", sim_args.outdir, "Directory for result CSVs")->required();
  add_forest_flags(simulate, sim_args.forest);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Repeated-split benchmark on one dataset");
  bench->add_option("--data", bench_args.data, "CSV path")->required();
  bench->add_option("--label", bench_args.label, "Label column name")->required();
  bench->add_option("--reps", bench_args.reps, "Number of stratified 2/3-1/3 resamples")
      ->default_val(50)
      ->check(CLI::PositiveNumber);
  bench->add_option("--fractions", bench_args.fractions,
                    "Comma list of var fractions ('rf-default' allowed)")
      ->default_val(bench_args.fractions);
  bench->add_option("--rf-trees", bench_args.rf_trees, "Baseline forest size")
      ->default_val(500)
      ->check(CLI::PositiveNumber);
  bench->add_option("--outdir", bench_args.outdir, "Directory for result CSVs")->required();
  add_forest_flags(bench, bench_args.forest);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps (OOB error)");
  sweep->add_option("--data", sweep_args.data, "CSV path")->required();
  sweep->add_option("--label", sweep_args.label, "Label column name")->required();
  sweep->add_option("--what", sweep_args.what, "Sweep axis: trees or fraction")
      ->default_val("trees")
      ->check(CLI::IsMember({"trees", "fraction"}));
  sweep->add_option("--counts", sweep_args.counts, "Comma list of tree counts")
      ->default_val(sweep_args.counts);
  sweep->add_option("--fractions", sweep_args.fractions, "Comma list of var fractions")
      ->default_val(sweep_args.fractions);
  sweep->add_option("--reps", sweep_args.reps, "Replicates per point")
      ->default_val(10)
      ->check(CLI::PositiveNumber);
  sweep->add_option("--rf-trees", sweep_args.rf_trees, "Baseline forest size (trees sweep)")
      ->default_val(500)
      ->check(CLI::PositiveNumber);
  sweep->add_option("--outdir", sweep_args.outdir, "Directory for result CSVs")->required();
  add_forest_flags(sweep, sweep_args.forest);

  try {
    app.parse(argc, argv);
    if (train->parsed()) run_train(train_args);
    if (predict->parsed()) run_predict(predict_args);
    if (diagnose->parsed()) run_diagnose(diagnose_args);
    if (simulate->parsed()) run_simulate(sim_args);
    if (bench->parsed()) run_bench(bench_args);
    if (sweep->parsed()) run_sweep(sweep_args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "E_USAGE: " << e.what() << "\n";
    return 2;
  } catch (const ppf::Error& e) {
    std::cerr << ppf::errc_name(e.code()) << ": " << e.what() << "\n";
    return ppf::errc_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "E_INTERNAL: " << e.what() << "\n";
    return 10;
  }
  return 0;
}
