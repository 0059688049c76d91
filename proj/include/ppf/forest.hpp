#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppf/dataset.hpp"
#include "ppf/separation_index.hpp"
#include "ppf/tree.hpp"
#include "ppf/types.hpp"

namespace ppf {

struct ForestConfig {
  int num_trees = 500;
  // Fraction of variables drawn at every node; empty means the classic
  // forest default m = round(sqrt(p)).
  std::optional<double> var_fraction;
  IndexConfig index;
  int rule_id = 1;
  std::uint64_t seed = 0;
  int num_threads = 1;  // never affects results, only wall time
};

void validate(const ForestConfig& cfg, int p);
// m = max(1, round(var_fraction * p)), or round(sqrt(p)) by default.
int vars_per_node(const ForestConfig& cfg, int p);

// Everything random a single tree consumed, replayable from tree_seed.
struct TreeRandomness {
  BootstrapSample bootstrap;
  std::vector<std::vector<int>> node_column_draws;  // aligned with tree nodes
  std::uint64_t tree_seed = 0;
};

struct PPforestModel {
  std::vector<PPtreeModel> trees;
  std::vector<TreeRandomness> randomness;        // same length as trees
  std::vector<double> per_tree_oob_accuracy;     // 1 - per-tree OOB error
  Standardization training_standardization;
  std::vector<std::string> class_names;
  std::vector<std::string> var_names;
  ForestConfig config;
  int n_train = 0;
  int p = 0;
  std::string data_hash;  // of the standardized training dataset

  int num_classes() const { return static_cast<int>(class_names.size()); }
  const std::vector<bool>& oob_mask(int tree) const { return randomness[tree].bootstrap.oob_mask; }
};

// Hex digest of a dataset's shape, labels, names and predictor bits;
// stored in the model so diagnostics can refuse mismatched data.
std::string dataset_hash(const Dataset& d);

// Trains cfg.num_trees trees, each on its own stratified bootstrap with
// per-node column draws, on an already-standardized dataset. Tree k's
// randomness comes from mix_seed(cfg.seed, k) alone, so the model is
// identical for every thread count and tree prefixes are stable when
// num_trees grows.
PPforestModel fit_forest(const Dataset& d, const ForestConfig& cfg);

// Majority vote over trees for one raw (unstandardized) observation.
// Returns the winning class id (ties: lowest id) and the vote shares.
std::pair<int, Vector> predict_forest(const PPforestModel& model, const Eigen::Ref<const Vector>& x);

// Row-parallel batch form; rows of x are raw observations.
std::pair<IntVector, Matrix> predict_forest_batch(const PPforestModel& model, const Matrix& x,
                                                  int num_threads = 1);

struct OobPrediction {
  IntVector predicted;        // length n; -1 for rows no tree left out
  Matrix votes;               // n x G, rows sum to 1 (0 for never-OOB rows)
  std::vector<int> never_oob; // rows with no OOB tree
};

// Out-of-bag vote aggregation over the model's own training dataset:
// row i only collects votes from trees whose bootstrap missed it.
OobPrediction oob_predict(const PPforestModel& model, const Dataset& d);

}  // namespace ppf
