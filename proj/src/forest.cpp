#include "ppf/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "ppf/errors.hpp"
#include "ppf/parallel.hpp"
#include "ppf/rng.hpp"

namespace ppf {

void validate(const ForestConfig& cfg, int p) {
  if (cfg.num_trees < 1) fail(Errc::config, "forest config: num_trees must be >= 1");
  if (cfg.var_fraction && !(*cfg.var_fraction > 0.0 && *cfg.var_fraction <= 1.0))
    fail(Errc::config, "forest config: var_fraction must be in (0,1]");
  if (cfg.rule_id < 1 || cfg.rule_id > 8) fail(Errc::config, "forest config: rule must be 1..8");
  validate(cfg.index);
  if (p < 1) fail(Errc::config, "forest config: no predictors");
}

int vars_per_node(const ForestConfig& cfg, int p) {
  const double m = cfg.var_fraction ? *cfg.var_fraction * p : std::sqrt(static_cast<double>(p));
  return std::clamp(static_cast<int>(std::lround(m)), 1, p);
}

namespace {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* data, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void i32(int v) { bytes(&v, sizeof v); }
  void real(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
};

}  // namespace

std::string dataset_hash(const Dataset& d) {
  Fnv1a f;
  f.i32(d.n());
  f.i32(d.p());
  f.i32(d.num_classes());
  for (const auto& name : d.class_names) f.str(name);
  for (const auto& name : d.var_names) f.str(name);
  for (int i = 0; i < d.n(); ++i) f.i32(d.labels[i]);
  for (int i = 0; i < d.n(); ++i)
    for (int j = 0; j < d.p(); ++j) f.real(d.predictors(i, j));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(f.h));
  return buf;
}

PPforestModel fit_forest(const Dataset& d, const ForestConfig& cfg) {
  validate(cfg, d.p());
  if (d.num_classes() < 2) fail(Errc::degenerate, "fit_forest: need at least 2 classes");
  if (!d.standardization)
    fail(Errc::config, "fit_forest: dataset must be standardized (training statistics kept)");
  d.check_invariants();

  PPforestModel model;
  model.trees.resize(cfg.num_trees);
  model.randomness.resize(cfg.num_trees);
  model.per_tree_oob_accuracy.assign(cfg.num_trees, 0.0);
  model.training_standardization = *d.standardization;
  model.class_names = d.class_names;
  model.var_names = d.var_names;
  model.config = cfg;
  model.n_train = d.n();
  model.p = d.p();
  model.data_hash = dataset_hash(d);

  const int m_vars = vars_per_node(cfg, d.p());
  parallel_for(cfg.num_trees, cfg.num_threads, [&](int k) {
    try {
      // One stream per tree, consumed bootstrap-first, so tree k is the
      // same whatever the scheduling and however many trees follow it.
      TreeRandomness rnd;
      rnd.tree_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(k));
      Rng rng(rnd.tree_seed);
      rnd.bootstrap = stratified_bootstrap(d, rng);
      PPtreeModel tree = fit_pptree(d, rnd.bootstrap.indices, cfg.index, m_vars, cfg.rule_id, rng,
                                    &rnd.node_column_draws);

      int oob_total = 0;
      int oob_correct = 0;
      for (int i = 0; i < d.n(); ++i) {
        if (!rnd.bootstrap.oob_mask[i]) continue;
        ++oob_total;
        if (predict_tree(tree, d.predictors.row(i)) == d.labels[i]) ++oob_correct;
      }
      model.per_tree_oob_accuracy[k] =
          oob_total > 0 ? static_cast<double>(oob_correct) / oob_total : 0.0;
      model.trees[k] = std::move(tree);
      model.randomness[k] = std::move(rnd);
    } catch (const Error& e) {
      fail(e.code(), "tree " + std::to_string(k) + ": " + e.what());
    }
  });
  return model;
}

namespace {

Vector standardize_row(const PPforestModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.p) fail(Errc::mismatch, "predict: expected " + std::to_string(model.p) +
                                                    " predictors, got " + std::to_string(x.size()));
  return (x - model.training_standardization.mean).cwiseQuotient(model.training_standardization.sd);
}

int argmax_lowest(const Eigen::Ref<const Vector>& v) {
  int best = 0;
  for (int g = 1; g < v.size(); ++g)
    if (v[g] > v[best]) best = g;
  return best;
}

}  // namespace

std::pair<int, Vector> predict_forest(const PPforestModel& model,
                                      const Eigen::Ref<const Vector>& x) {
  const Vector z = standardize_row(model, x);
  Vector votes = Vector::Zero(model.num_classes());
  for (const auto& tree : model.trees) votes[predict_tree(tree, z)] += 1.0;
  votes /= static_cast<double>(model.trees.size());
  return {argmax_lowest(votes), votes};
}

std::pair<IntVector, Matrix> predict_forest_batch(const PPforestModel& model, const Matrix& x,
                                                  int num_threads) {
  IntVector classes(x.rows());
  Matrix votes(x.rows(), model.num_classes());
  parallel_for(static_cast<int>(x.rows()), num_threads, [&](int i) {
    auto [cls, share] = predict_forest(model, x.row(i).transpose());
    classes[i] = cls;
    votes.row(i) = share.transpose();
  });
  return {std::move(classes), std::move(votes)};
}

OobPrediction oob_predict(const PPforestModel& model, const Dataset& d) {
  if (d.n() != model.n_train || d.p() != model.p)
    fail(Errc::mismatch, "oob_predict: dataset shape differs from the training data");
  if (dataset_hash(d) != model.data_hash)
    fail(Errc::mismatch, "oob_predict: dataset does not match the model's training data");
  const int n = d.n();
  const int num_classes = model.num_classes();
  for (const auto& rnd : model.randomness) {
    if (static_cast<int>(rnd.bootstrap.oob_mask.size()) != n)
      fail(Errc::model, "oob_predict: OOB masks unavailable (regenerate_bootstraps first)");
  }

  Matrix counts = Matrix::Zero(n, num_classes);
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    const auto& mask = model.randomness[k].bootstrap.oob_mask;
    for (int i = 0; i < n; ++i) {
      if (mask[i]) counts(i, predict_tree(model.trees[k], d.predictors.row(i))) += 1.0;
    }
  }

  OobPrediction out;
  out.predicted.resize(n);
  out.votes = Matrix::Zero(n, num_classes);
  for (int i = 0; i < n; ++i) {
    const double total = counts.row(i).sum();
    if (total > 0.0) {
      out.votes.row(i) = counts.row(i) / total;
      out.predicted[i] = argmax_lowest(counts.row(i).transpose());
    } else {
      out.predicted[i] = -1;
      out.never_oob.push_back(i);
    }
  }
  return out;
}

}  // namespace ppf
