#include "ppf/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"
#include "ppf/errors.hpp"
#include "ppf/rng.hpp"

namespace ppf {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from_json(const json& a) {
  Vector v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

json node_to_json(const TreeNode& nd) {
  json j;
  if (nd.is_leaf()) {
    j["leaf"] = nd.leaf_class;
    if (nd.forced_leaf) j["forced"] = true;
    return j;
  }
  json alpha = json::object();
  for (const int col : nd.sampled_cols) alpha[std::to_string(col)] = nd.alpha[col];
  j["alpha"] = std::move(alpha);
  j["cutoff"] = nd.cutoff;
  j["rule"] = nd.rule_id;
  j["left_sign"] = nd.left_sign == Side::less ? "less" : "greater_eq";
  j["m1"] = nd.projected_mean_g1;
  j["index1"] = nd.index_first_pass;
  j["index2"] = nd.index_second_pass;
  j["classes"] = nd.classes_in_node;
  j["less"] = nd.child_less;
  j["greater_eq"] = nd.child_greater_eq;
  return j;
}

TreeNode node_from_json(const json& j, int p) {
  TreeNode nd;
  if (j.contains("leaf")) {
    nd.leaf_class = j.at("leaf").get<int>();
    nd.forced_leaf = j.value("forced", false);
    return nd;
  }
  nd.alpha = Vector::Zero(p);
  for (const auto& [key, value] : j.at("alpha").items()) {
    const int col = std::stoi(key);
    if (col < 0 || col >= p) fail(Errc::model, "model: alpha column out of range");
    nd.alpha[col] = value.get<double>();
    nd.sampled_cols.push_back(col);
  }
  std::sort(nd.sampled_cols.begin(), nd.sampled_cols.end());
  nd.cutoff = j.at("cutoff").get<double>();
  nd.rule_id = j.at("rule").get<int>();
  const std::string sign = j.at("left_sign").get<std::string>();
  if (sign != "less" && sign != "greater_eq") fail(Errc::model, "model: bad left_sign");
  nd.left_sign = sign == "less" ? Side::less : Side::greater_eq;
  nd.projected_mean_g1 = j.at("m1").get<double>();
  nd.index_first_pass = j.at("index1").get<double>();
  nd.index_second_pass = j.at("index2").get<double>();
  nd.classes_in_node = j.at("classes").get<std::vector<int>>();
  nd.child_less = j.at("less").get<int>();
  nd.child_greater_eq = j.at("greater_eq").get<int>();
  return nd;
}

json config_to_json(const ForestConfig& cfg) {
  json j;
  j["num_trees"] = cfg.num_trees;
  if (cfg.var_fraction)
    j["var_fraction"] = *cfg.var_fraction;
  else
    j["var_fraction"] = "rf-default";
  j["index"] = cfg.index.kind == IndexKind::lda ? "lda" : "pda";
  j["lambda"] = cfg.index.lambda;
  j["rule"] = cfg.rule_id;
  j["seed"] = cfg.seed;
  return j;
}

ForestConfig config_from_json(const json& j) {
  ForestConfig cfg;
  cfg.num_trees = j.at("num_trees").get<int>();
  const auto& vf = j.at("var_fraction");
  if (vf.is_string()) {
    if (vf.get<std::string>() != "rf-default") fail(Errc::model, "model: bad var_fraction");
    cfg.var_fraction.reset();
  } else {
    cfg.var_fraction = vf.get<double>();
  }
  const std::string index = j.at("index").get<std::string>();
  if (index != "lda" && index != "pda") fail(Errc::model, "model: bad index kind");
  cfg.index.kind = index == "lda" ? IndexKind::lda : IndexKind::pda;
  cfg.index.lambda = j.at("lambda").get<double>();
  cfg.rule_id = j.at("rule").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace

std::string model_to_json(const PPforestModel& model) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "ppforest";
  j["config"] = config_to_json(model.config);
  j["n_train"] = model.n_train;
  j["p"] = model.p;
  j["class_names"] = model.class_names;
  j["var_names"] = model.var_names;
  j["standardization"] = {{"mean", vector_to_json(model.training_standardization.mean)},
                          {"sd", vector_to_json(model.training_standardization.sd)}};
  j["data_hash"] = model.data_hash;
  j["per_tree_oob_accuracy"] = model.per_tree_oob_accuracy;
  json trees = json::array();
  for (std::size_t k = 0; k < model.trees.size(); ++k) {
    json tj;
    tj["tree_seed"] = model.randomness[k].tree_seed;
    json nodes = json::array();
    for (const auto& nd : model.trees[k].nodes) nodes.push_back(node_to_json(nd));
    tj["nodes"] = std::move(nodes);
    trees.push_back(std::move(tj));
  }
  j["trees"] = std::move(trees);
  return j.dump(1, '\t') + "\n";
}

PPforestModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::model, std::string("model: invalid JSON: ") + e.what());
  }
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      fail(Errc::model, "model: unsupported schema version");
    if (j.at("kind").get<std::string>() != "ppforest") fail(Errc::model, "model: not a forest");

    PPforestModel model;
    model.config = config_from_json(j.at("config"));
    model.n_train = j.at("n_train").get<int>();
    model.p = j.at("p").get<int>();
    model.class_names = j.at("class_names").get<std::vector<std::string>>();
    model.var_names = j.at("var_names").get<std::vector<std::string>>();
    model.training_standardization.mean = vector_from_json(j.at("standardization").at("mean"));
    model.training_standardization.sd = vector_from_json(j.at("standardization").at("sd"));
    model.data_hash = j.at("data_hash").get<std::string>();
    model.per_tree_oob_accuracy = j.at("per_tree_oob_accuracy").get<std::vector<double>>();
    if (model.training_standardization.mean.size() != model.p ||
        model.training_standardization.sd.size() != model.p)
      fail(Errc::model, "model: standardization length mismatch");

    for (const auto& tj : j.at("trees")) {
      PPtreeModel tree;
      tree.num_vars = model.p;
      TreeRandomness rnd;
      rnd.tree_seed = tj.at("tree_seed").get<std::uint64_t>();
      for (const auto& nj : tj.at("nodes")) tree.nodes.push_back(node_from_json(nj, model.p));
      if (tree.nodes.empty()) fail(Errc::model, "model: empty tree");
      for (const auto& nd : tree.nodes) {
        if (!nd.is_leaf()) {
          ++tree.num_internal;
          const int lo = 0;
          const int hi = static_cast<int>(tree.nodes.size()) - 1;
          if (nd.child_less < lo || nd.child_less > hi || nd.child_greater_eq < lo ||
              nd.child_greater_eq > hi)
            fail(Errc::model, "model: child index out of range");
        }
        tree.any_forced_leaf = tree.any_forced_leaf || nd.forced_leaf;
        rnd.node_column_draws.push_back(nd.sampled_cols);
      }
      model.trees.push_back(std::move(tree));
      model.randomness.push_back(std::move(rnd));
    }
    if (model.trees.size() != model.per_tree_oob_accuracy.size())
      fail(Errc::model, "model: per-tree accuracy length mismatch");
    if (static_cast<int>(model.trees.size()) != model.config.num_trees)
      fail(Errc::model, "model: tree count does not match config");
    return model;
  } catch (const json::exception& e) {
    fail(Errc::model, std::string("model: missing or mistyped field: ") + e.what());
  }
}

void save_model(const PPforestModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, path + ": cannot write");
  out << model_to_json(model);
  if (!out) fail(Errc::io, path + ": write failed");
}

PPforestModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, path + ": cannot open");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return model_from_json(text);
}

void regenerate_bootstraps(PPforestModel& model, const Dataset& d) {
  if (d.n() != model.n_train || dataset_hash(d) != model.data_hash)
    fail(Errc::mismatch, "regenerate_bootstraps: dataset does not match the model");
  for (auto& rnd : model.randomness) {
    Rng rng(rnd.tree_seed);
    rnd.bootstrap = stratified_bootstrap(d, rng);
  }
}

}  // namespace ppf
