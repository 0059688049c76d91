#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ppf/dataset.hpp"
#include "ppf/rng.hpp"
#include "ppf/types.hpp"

namespace ppf {

// Minimal axis-aligned CART forest used as the comparison baseline:
// Gini-impurity splits, unstratified bootstrap, per-node column draws,
// no pruning.

struct AxisNode {
  int leaf_class = -1;             // >= 0 marks a leaf
  std::vector<int> class_counts;   // rows per class reaching the node
  int split_col = -1;
  double threshold = 0.0;          // midpoint of consecutive distinct values
  int child_less = -1;             // x[col] <  threshold
  int child_greater_eq = -1;       // x[col] >= threshold

  bool is_leaf() const { return leaf_class >= 0; }
};

struct AxisTree {
  std::vector<AxisNode> nodes;  // nodes[0] is the root
};

struct AxisForest {
  std::vector<AxisTree> trees;
  std::vector<BootstrapSample> bootstraps;  // plain (unstratified) bootstraps
  int num_classes = 0;
  int num_vars = 0;
  std::uint64_t seed = 0;
};

// Grows one tree on the given row multiset, drawing m_vars columns per
// node; splits maximizing Gini decrease (ties: lowest column, then lowest
// threshold), stopping at pure nodes, nodes smaller than 2*min_leaf, or
// nodes with no usable split. Zero-decrease splits are still taken when
// positive-decrease ones don't exist but the node is impure and
// splittable, so patterns like XOR resolve at depth 2.
AxisTree fit_axis_tree(const Dataset& d, const std::vector<int>& rows, int m_vars, int min_leaf,
                       Rng& rng);

AxisForest fit_axis_forest(const Dataset& d, int num_trees, int m_vars, int min_leaf,
                           std::uint64_t seed, int num_threads = 1);

int predict_axis_tree(const AxisTree& t, const Eigen::Ref<const Vector>& x);
int axis_tree_leaf_index(const AxisTree& t, const Eigen::Ref<const Vector>& x);

// Majority vote, lowest class id on ties.
int predict_axis_forest(const AxisForest& f, const Eigen::Ref<const Vector>& x);

// OOB majority-vote error over the training dataset (tree-count sweeps).
// first_trees limits the vote to trees [0, first_trees); <= 0 means all.
double axis_forest_oob_error(const AxisForest& f, const Dataset& d, int first_trees = 0);

}  // namespace ppf
