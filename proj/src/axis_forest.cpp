#include "ppf/axis_forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ppf/errors.hpp"
#include "ppf/parallel.hpp"

namespace ppf {

namespace {

int majority(const std::vector<int>& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// Weighted Gini impurity of a count vector: n * (1 - sum (n_g/n)^2).
// Working with the weighted form lets the split search compare
// left+right sums directly.
double weighted_gini(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (const int c : counts) sum_sq += static_cast<double>(c) * c;
  return static_cast<double>(total) - sum_sq / total;
}

struct BestSplit {
  bool found = false;
  int col = -1;
  double threshold = 0.0;
  double child_impurity = std::numeric_limits<double>::infinity();
};

class AxisBuilder {
 public:
  AxisBuilder(const Dataset& d, int m_vars, int min_leaf, Rng& rng)
      : d_(d), m_vars_(m_vars), min_leaf_(min_leaf), rng_(rng) {}

  AxisTree build(const std::vector<int>& rows) {
    AxisTree t;
    grow(rows, t);
    return t;
  }

 private:
  int make_leaf(AxisTree& t, std::vector<int> counts) {
    AxisNode leaf;
    leaf.leaf_class = majority(counts);
    leaf.class_counts = std::move(counts);
    t.nodes.push_back(std::move(leaf));
    return static_cast<int>(t.nodes.size()) - 1;
  }

  void grow(const std::vector<int>& rows, AxisTree& t) {
    std::vector<int> counts(d_.num_classes(), 0);
    for (const int r : rows) counts[d_.labels[r]] += 1;
    const int total = static_cast<int>(rows.size());
    const bool pure = *std::max_element(counts.begin(), counts.end()) == total;

    if (pure || total < 2 * min_leaf_) {
      make_leaf(t, std::move(counts));
      return;
    }
    const std::vector<int> cols = rng_.sample_without_replacement(d_.p(), m_vars_);
    const BestSplit best = find_best_split(rows, cols);
    if (!best.found) {
      make_leaf(t, std::move(counts));
      return;
    }

    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    t.nodes[id].class_counts = counts;
    t.nodes[id].split_col = best.col;
    t.nodes[id].threshold = best.threshold;

    std::vector<int> left_rows, right_rows;
    for (const int r : rows)
      (d_.predictors(r, best.col) < best.threshold ? left_rows : right_rows).push_back(r);

    t.nodes[id].child_less = static_cast<int>(t.nodes.size());
    grow(left_rows, t);
    t.nodes[id].child_greater_eq = static_cast<int>(t.nodes.size());
    grow(right_rows, t);
  }

  // Midpoint thresholds between consecutive distinct values; the best
  // split minimizes summed child impurity (ties: lowest column, then
  // lowest threshold). Gini decrease is never negative, so an impure
  // splittable node is always split (zero-decrease splits included:
  // XOR-style patterns need them to resolve a level deeper).
  BestSplit find_best_split(const std::vector<int>& rows, const std::vector<int>& cols) {
    BestSplit best;
    const int total = static_cast<int>(rows.size());
    std::vector<std::pair<double, int>> values(rows.size());
    std::vector<int> left_counts(d_.num_classes());
    std::vector<int> right_counts(d_.num_classes());
    for (const int col : cols) {
      for (std::size_t i = 0; i < rows.size(); ++i)
        values[i] = {d_.predictors(rows[i], col), d_.labels[rows[i]]};
      std::sort(values.begin(), values.end());
      if (values.front().first == values.back().first) continue;  // constant column

      std::fill(left_counts.begin(), left_counts.end(), 0);
      std::fill(right_counts.begin(), right_counts.end(), 0);
      for (const auto& [v, y] : values) right_counts[y] += 1;
      for (int i = 0; i + 1 < total; ++i) {
        left_counts[values[i].second] += 1;
        right_counts[values[i].second] -= 1;
        if (values[i + 1].first <= values[i].first) continue;  // not a boundary
        const int n_left = i + 1;
        const int n_right = total - n_left;
        if (n_left < min_leaf_ || n_right < min_leaf_) continue;
        const double impurity =
            weighted_gini(left_counts, n_left) + weighted_gini(right_counts, n_right);
        if (impurity < best.child_impurity) {
          best.found = true;
          best.col = col;
          best.threshold = (values[i].first + values[i + 1].first) / 2.0;
          best.child_impurity = impurity;
        }
      }
    }
    return best;
  }

  const Dataset& d_;
  int m_vars_;
  int min_leaf_;
  Rng& rng_;
};

}  // namespace

AxisTree fit_axis_tree(const Dataset& d, const std::vector<int>& rows, int m_vars, int min_leaf,
                       Rng& rng) {
  if (rows.empty()) fail(Errc::degenerate, "fit_axis_tree: no rows");
  if (m_vars < 1 || m_vars > d.p()) fail(Errc::config, "fit_axis_tree: m_vars out of [1,p]");
  if (min_leaf < 1) fail(Errc::config, "fit_axis_tree: min_leaf must be >= 1");
  AxisBuilder builder(d, m_vars, min_leaf, rng);
  return builder.build(rows);
}

AxisForest fit_axis_forest(const Dataset& d, int num_trees, int m_vars, int min_leaf,
                           std::uint64_t seed, int num_threads) {
  if (num_trees < 1) fail(Errc::config, "fit_axis_forest: num_trees must be >= 1");
  if (d.num_classes() < 2) fail(Errc::degenerate, "fit_axis_forest: need at least 2 classes");
  AxisForest f;
  f.trees.resize(num_trees);
  f.bootstraps.resize(num_trees);
  f.num_classes = d.num_classes();
  f.num_vars = d.p();
  f.seed = seed;
  parallel_for(num_trees, num_threads, [&](int k) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
    // Plain (unstratified) bootstrap, as in the classic forest.
    BootstrapSample b;
    b.indices.resize(d.n());
    b.oob_mask.assign(d.n(), true);
    for (int i = 0; i < d.n(); ++i) {
      const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(d.n())));
      b.indices[i] = r;
      b.oob_mask[r] = false;
    }
    f.trees[k] = fit_axis_tree(d, b.indices, m_vars, min_leaf, rng);
    f.bootstraps[k] = std::move(b);
  });
  return f;
}

namespace {
int descend(const AxisTree& t, const Eigen::Ref<const Vector>& x) {
  int id = 0;
  while (!t.nodes[id].is_leaf()) {
    const AxisNode& nd = t.nodes[id];
    id = x[nd.split_col] < nd.threshold ? nd.child_less : nd.child_greater_eq;
  }
  return id;
}
}  // namespace

int predict_axis_tree(const AxisTree& t, const Eigen::Ref<const Vector>& x) {
  return t.nodes[descend(t, x)].leaf_class;
}

int axis_tree_leaf_index(const AxisTree& t, const Eigen::Ref<const Vector>& x) {
  return descend(t, x);
}

int predict_axis_forest(const AxisForest& f, const Eigen::Ref<const Vector>& x) {
  if (x.size() != f.num_vars) fail(Errc::mismatch, "predict_axis_forest: dimension mismatch");
  std::vector<int> votes(f.num_classes, 0);
  for (const auto& t : f.trees) votes[predict_axis_tree(t, x)] += 1;
  return majority(votes);
}

double axis_forest_oob_error(const AxisForest& f, const Dataset& d, int first_trees) {
  const auto limit = first_trees > 0
                         ? std::min<std::size_t>(f.trees.size(), first_trees)
                         : f.trees.size();
  Eigen::MatrixXi votes = Eigen::MatrixXi::Zero(d.n(), f.num_classes);
  for (std::size_t k = 0; k < limit; ++k) {
    const auto& mask = f.bootstraps[k].oob_mask;
    for (int i = 0; i < d.n(); ++i)
      if (mask[i]) votes(i, predict_axis_tree(f.trees[k], d.predictors.row(i))) += 1;
  }
  int counted = 0, wrong = 0;
  for (int i = 0; i < d.n(); ++i) {
    if (votes.row(i).sum() == 0) continue;
    ++counted;
    int best = 0;
    for (int g = 1; g < f.num_classes; ++g)
      if (votes(i, g) > votes(i, best)) best = g;
    if (best != d.labels[i]) ++wrong;
  }
  if (counted == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(wrong) / counted;
}

}  // namespace ppf
