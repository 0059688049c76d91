#pragma once

#include <cstdint>
#include <vector>

#include "ppf/dataset.hpp"
#include "ppf/projection.hpp"
#include "ppf/rng.hpp"
#include "ppf/separation_index.hpp"
#include "ppf/types.hpp"

namespace ppf {

// Which side of the cutoff the lower-projected-mean super-group (g1)
// occupies. Prediction always sends alpha'x < c to child_less and ties
// (alpha'x == c) to child_greater_eq.
enum class Side { less, greater_eq };

struct TreeNode {
  // Leaf fields; leaf_class >= 0 marks a leaf.
  int leaf_class = -1;
  bool forced_leaf = false;  // degenerate node closed out with the majority class

  // Split fields (internal nodes).
  Vector alpha;              // dense length-p projection, zero off the sampled cols
  double cutoff = 0.0;
  int rule_id = 0;
  Side left_sign = Side::less;     // side g1 occupies
  double projected_mean_g1 = 0.0;  // mean of alpha'x over g1 training rows
  double index_first_pass = 0.0;   // all-classes pass index value
  double index_second_pass = 0.0;  // two-super-group pass index value
  std::vector<int> classes_in_node;  // sorted original class ids reaching the node
  std::vector<int> sampled_cols;     // the node's variable draw
  int child_less = -1;        // taken when alpha'x < cutoff
  int child_greater_eq = -1;  // taken when alpha'x >= cutoff

  bool is_leaf() const { return leaf_class >= 0; }
};

struct PPtreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root; children appear after parents
  int num_vars = 0;             // p
  int depth = 0;
  int num_internal = 0;
  bool any_forced_leaf = false;
};

// Splits group positions {0..q-1}, ordered by their projected means, at
// the largest adjacent gap of the sorted means (ties: earliest gap). g1
// is the lower-mean side; both sides are nonempty.
struct SuperGroups {
  std::vector<int> g1;
  std::vector<int> g2;
};
SuperGroups assign_super_groups(const std::vector<double>& projected_means);

// The eight cutoff placements between projected groups z1 (g1) and z2:
//   1 (m1+m2)/2                 5 medians instead of means
//   2 (m1 s2 + m2 s1)/(s1+s2)   6 medians/IQRs
//   3 rule 2 with s/sqrt(n)     7 medians/IQRs with Q/sqrt(n)
//   4 (m1 n2 + m2 n1)/(n1+n2)   8 medians with counts
// Zero spread weights fall back to the plain midpoint (rule 1 or 5).
double compute_cutoff(const std::vector<double>& z1, const std::vector<double>& z2, int rule_id);

// Grows the projection pursuit tree on the given row multiset: per node,
// draw m_vars columns, find the all-classes projection, merge classes
// into two super-groups by projected mean, refit the projection for the
// two-group problem, place the cutoff, and recurse per super-group until
// single-class leaves. rng is consumed in a fixed documented order
// (columns, pass-1 seed, pass-2 seed; children g1-first), so a tree is
// replayable from its seed. column_draws, when given, records each
// node's draw (empty entry for leaves).
PPtreeModel fit_pptree(const Dataset& d, const std::vector<int>& rows, const IndexConfig& cfg,
                       int m_vars, int rule_id, Rng& rng,
                       std::vector<std::vector<int>>* column_draws = nullptr);
PPtreeModel fit_pptree(const Dataset& d, const std::vector<int>& rows, const IndexConfig& cfg,
                       int m_vars, int rule_id, std::uint64_t seed);

int predict_tree(const PPtreeModel& t, const Eigen::Ref<const Vector>& x);
// Index of the terminal node x lands in (proximity bookkeeping).
int tree_leaf_index(const PPtreeModel& t, const Eigen::Ref<const Vector>& x);

}  // namespace ppf
