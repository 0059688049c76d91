#include <cmath>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ppf/csv.hpp"
#include "ppf/diagnostics.hpp"
#include "ppf/errors.hpp"
#include "ppf/forest.hpp"
#include "ppf/model_io.hpp"
#include "test_util.hpp"

using ppftest::gaussian_blobs;
using ppftest::make_dataset;

namespace {

ppf::Dataset easy_training_data(int n_per_class, std::uint64_t seed) {
  ppf::Vector m0(3), m1(3), m2(3);
  m0 << 0, 0, 0;
  m1 << 6, 0, 2;
  m2 << 0, 6, -2;
  return ppf::standardize(gaussian_blobs({m0, m1, m2}, n_per_class, 1.0, seed));
}

}  // namespace

TEST_CASE("vars_per_node: fraction and forest-default arithmetic") {
  ppf::ForestConfig cfg;
  CHECK(ppf::vars_per_node(cfg, 13) == 4);  // round(sqrt(13))
  CHECK(ppf::vars_per_node(cfg, 2) == 1);
  cfg.var_fraction = 0.9;
  CHECK(ppf::vars_per_node(cfg, 13) == 12);  // round(11.7)
  cfg.var_fraction = 1.0;
  CHECK(ppf::vars_per_node(cfg, 13) == 13);
  cfg.var_fraction = 0.01;
  CHECK(ppf::vars_per_node(cfg, 13) == 1);  // clamped up to 1
}

TEST_CASE("validate: bad forest configs rejected") {
  ppf::ForestConfig cfg;
  cfg.num_trees = 0;
  CHECK_THROWS_AS(ppf::validate(cfg, 5), ppf::Error);
  cfg.num_trees = 10;
  cfg.var_fraction = 0.0;
  CHECK_THROWS_AS(ppf::validate(cfg, 5), ppf::Error);
  cfg.var_fraction = 1.5;
  CHECK_THROWS_AS(ppf::validate(cfg, 5), ppf::Error);
  cfg.var_fraction = 0.5;
  cfg.rule_id = 9;
  CHECK_THROWS_AS(ppf::validate(cfg, 5), ppf::Error);
}

TEST_CASE("fit_forest: requires standardized input") {
  const auto raw = gaussian_blobs({ppf::Vector::Zero(2), 5 * ppf::Vector::Ones(2)}, 10, 1.0, 1);
  ppf::ForestConfig cfg;
  cfg.num_trees = 3;
  CHECK_THROWS_AS(ppf::fit_forest(raw, cfg), ppf::Error);
}

TEST_CASE("fit_forest: single tree forest predicts like its tree") {
  const auto d = easy_training_data(15, 2);
  ppf::ForestConfig cfg;
  cfg.num_trees = 1;
  cfg.seed = 5;
  const auto model = ppf::fit_forest(d, cfg);
  REQUIRE(model.trees.size() == 1);
  for (int i = 0; i < d.n(); ++i) {
    // predict_forest takes raw coordinates; the tree lives in standardized ones.
    const ppf::Vector raw = model.training_standardization.invert(d.predictors.row(i)).transpose();
    const auto [cls, votes] = ppf::predict_forest(model, raw);
    CHECK(cls == ppf::predict_tree(model.trees[0], d.predictors.row(i).transpose()));
    CHECK(votes.sum() == doctest::Approx(1.0));
  }
}

TEST_CASE("fit_forest: every bootstrap is stratified") {
  const auto d = easy_training_data(12, 3);
  ppf::ForestConfig cfg;
  cfg.num_trees = 8;
  cfg.seed = 11;
  const auto model = ppf::fit_forest(d, cfg);
  for (const auto& r : model.randomness) {
    std::vector<int> counts(3, 0);
    for (const int idx : r.bootstrap.indices) counts[d.labels[idx]]++;
    CHECK(counts == std::vector<int>{12, 12, 12});
  }
}

TEST_CASE("fit_forest: thread count never changes the model") {
  const auto d = easy_training_data(12, 4);
  ppf::ForestConfig cfg;
  cfg.num_trees = 12;
  cfg.seed = 21;
  cfg.num_threads = 1;
  const auto one = ppf::model_to_json(ppf::fit_forest(d, cfg));
  cfg.num_threads = 3;
  const auto three = ppf::model_to_json(ppf::fit_forest(d, cfg));
  CHECK(one == three);
}

TEST_CASE("fit_forest: growing the forest keeps the earlier trees") {
  const auto d = easy_training_data(10, 5);
  ppf::ForestConfig cfg;
  cfg.seed = 33;
  cfg.num_trees = 6;
  const auto small = ppf::fit_forest(d, cfg);
  cfg.num_trees = 12;
  const auto big = ppf::fit_forest(d, cfg);
  const auto js = nlohmann::json::parse(ppf::model_to_json(small));
  const auto jb = nlohmann::json::parse(ppf::model_to_json(big));
  for (int k = 0; k < 6; ++k) CHECK(js["trees"][k] == jb["trees"][k]);
}

TEST_CASE("predict_forest: vote tie resolves to the lowest class id") {
  // Hand-built forest: two single-leaf trees voting for different classes.
  ppf::PPforestModel model;
  model.p = 1;
  model.n_train = 2;
  model.class_names = {"A", "B"};
  model.var_names = {"x1"};
  model.training_standardization.mean = ppf::Vector::Zero(1);
  model.training_standardization.sd = ppf::Vector::Ones(1);
  ppf::PPtreeModel t0, t1;
  ppf::TreeNode leaf0, leaf1;
  leaf0.leaf_class = 0;
  leaf1.leaf_class = 1;
  t0.nodes = {leaf0};
  t1.nodes = {leaf1};
  t0.num_vars = t1.num_vars = 1;
  model.trees = {t0, t1};
  model.randomness.resize(2);
  model.per_tree_oob_accuracy = {1.0, 1.0};

  ppf::Vector x(1);
  x << 0.5;
  const auto [cls, votes] = ppf::predict_forest(model, x);
  CHECK(cls == 0);
  CHECK(votes[0] == doctest::Approx(0.5));
  CHECK(votes[1] == doctest::Approx(0.5));
}

TEST_CASE("predict_forest: dimension mismatch rejected") {
  const auto d = easy_training_data(10, 6);
  ppf::ForestConfig cfg;
  cfg.num_trees = 3;
  const auto model = ppf::fit_forest(d, cfg);
  ppf::Vector bad(2);
  bad << 0, 0;
  CHECK_THROWS_AS(ppf::predict_forest(model, bad), ppf::Error);
}

TEST_CASE("predict_forest_batch: equals the row-by-row form") {
  const auto d = easy_training_data(10, 7);
  ppf::ForestConfig cfg;
  cfg.num_trees = 20;
  cfg.seed = 3;
  const auto model = ppf::fit_forest(d, cfg);
  const ppf::Matrix raw = model.training_standardization.invert(d.predictors);
  const auto [batch_pred, batch_votes] = ppf::predict_forest_batch(model, raw, 3);
  for (int i = 0; i < raw.rows(); ++i) {
    const auto [cls, votes] = ppf::predict_forest(model, raw.row(i).transpose());
    CHECK(batch_pred[i] == cls);
    CHECK((batch_votes.row(i).transpose() - votes).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("predict_forest: votes recount exactly on a small forest") {
  const auto d = easy_training_data(7, 8);
  ppf::ForestConfig cfg;
  cfg.num_trees = 5;
  cfg.seed = 9;
  const auto model = ppf::fit_forest(d, cfg);
  const ppf::Matrix raw = model.training_standardization.invert(d.predictors);
  for (int i = 0; i < d.n(); ++i) {
    std::vector<int> counts(3, 0);
    for (const auto& t : model.trees)
      counts[ppf::predict_tree(t, d.predictors.row(i).transpose())]++;
    const auto [cls, votes] = ppf::predict_forest(model, raw.row(i).transpose());
    int best = 0;
    for (int g = 1; g < 3; ++g)
      if (counts[g] > counts[best]) best = g;
    CHECK(cls == best);
    for (int g = 0; g < 3; ++g) CHECK(votes[g] == doctest::Approx(counts[g] / 5.0));
  }
}

TEST_CASE("oob_predict: masks, never-oob rows, and vote normalization") {
  const auto d = easy_training_data(10, 10);
  ppf::ForestConfig cfg;
  cfg.num_trees = 40;
  cfg.seed = 2;
  const auto model = ppf::fit_forest(d, cfg);
  const auto oob = ppf::oob_predict(model, d);
  REQUIRE(oob.predicted.size() == d.n());
  std::vector<bool> flagged(d.n(), false);
  for (const int i : oob.never_oob) flagged[i] = true;
  for (int i = 0; i < d.n(); ++i) {
    int oob_trees = 0;
    for (std::size_t k = 0; k < model.trees.size(); ++k)
      oob_trees += model.oob_mask(static_cast<int>(k))[i] ? 1 : 0;
    if (oob_trees == 0) {
      CHECK(flagged[i]);
      CHECK(oob.predicted[i] == -1);
    } else {
      CHECK_FALSE(flagged[i]);
      CHECK(oob.votes.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("oob_predict: single-tree forest leaves in-bag rows unvoted") {
  const auto d = easy_training_data(10, 12);
  ppf::ForestConfig cfg;
  cfg.num_trees = 1;
  cfg.seed = 4;
  const auto model = ppf::fit_forest(d, cfg);
  const auto oob = ppf::oob_predict(model, d);
  for (int i = 0; i < d.n(); ++i) {
    if (!model.oob_mask(0)[i]) CHECK(oob.predicted[i] == -1);
  }
  CHECK_FALSE(oob.never_oob.empty());
}

TEST_CASE("oob_predict: refuses a different dataset") {
  const auto d = easy_training_data(10, 13);
  ppf::ForestConfig cfg;
  cfg.num_trees = 5;
  const auto model = ppf::fit_forest(d, cfg);
  auto other = d;
  other.predictors(0, 0) += 1.0;
  CHECK_THROWS_AS(ppf::oob_predict(model, other), ppf::Error);
}

TEST_CASE("fit_forest: easy data yields a tiny OOB error") {
  const auto d = easy_training_data(20, 14);
  ppf::ForestConfig cfg;
  cfg.num_trees = 60;
  cfg.seed = 6;
  const auto model = ppf::fit_forest(d, cfg);
  CHECK(ppf::oob_error(model, d) <= 0.05);
}

TEST_CASE("fit_forest: wine with 500 trees and fraction 0.9 beats 10% OOB") {
  ppf::Dataset wine = ppf::load_csv(ppftest::data_dir() + "/wine.csv", "Type");
  const auto d = ppf::standardize(wine);
  ppf::ForestConfig cfg;
  cfg.num_trees = 500;
  cfg.var_fraction = 0.9;
  cfg.seed = 1;
  const auto model = ppf::fit_forest(d, cfg);
  CHECK(ppf::oob_error(model, d) < 0.10);
}

TEST_CASE("dataset_hash: sensitive to every component") {
  const auto d = easy_training_data(8, 15);
  const auto base = ppf::dataset_hash(d);
  auto tweaked = d;
  tweaked.predictors(2, 1) += 1e-12;
  CHECK(ppf::dataset_hash(tweaked) != base);
  tweaked = d;
  tweaked.labels[0] = 1;
  tweaked.recount_classes();
  CHECK(ppf::dataset_hash(tweaked) != base);
  tweaked = d;
  tweaked.class_names[0] = "renamed";
  CHECK(ppf::dataset_hash(tweaked) != base);
  CHECK(ppf::dataset_hash(d) == base);
}
