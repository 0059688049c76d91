#include "ppf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ppf/errors.hpp"

namespace ppf {

namespace {

double mean_of(const std::vector<double>& z) {
  return std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
}

// Sample standard deviation (n-1 denominator); 0 for singletons.
double sd_of(const std::vector<double>& z) {
  const auto n = z.size();
  if (n < 2) return 0.0;
  const double m = mean_of(z);
  double ss = 0.0;
  for (const double v : z) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

// Linear-interpolation quantile on a sorted copy (the common "type 7").
double quantile_of(std::vector<double> z, double q) {
  std::sort(z.begin(), z.end());
  const double h = (static_cast<double>(z.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= z.size()) return z.back();
  return z[lo] + (h - static_cast<double>(lo)) * (z[lo + 1] - z[lo]);
}

double median_of(const std::vector<double>& z) { return quantile_of(z, 0.5); }
double iqr_of(const std::vector<double>& z) {
  return quantile_of(z, 0.75) - quantile_of(z, 0.25);
}

// (c1*w2 + c2*w1) / (w1 + w2): the boundary sits closer to the center
// with the smaller weight.
double weighted_between(double c1, double c2, double w1, double w2) {
  return (c1 * w2 + c2 * w1) / (w1 + w2);
}

}  // namespace

SuperGroups assign_super_groups(const std::vector<double>& projected_means) {
  const int q = static_cast<int>(projected_means.size());
  if (q < 2) fail(Errc::internal, "assign_super_groups: need at least two groups");
  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return projected_means[a] < projected_means[b];
  });
  // Split at the largest adjacent gap; ties keep the earliest boundary.
  int boundary = 0;
  double best_gap = -1.0;
  for (int i = 0; i + 1 < q; ++i) {
    const double gap = projected_means[order[i + 1]] - projected_means[order[i]];
    if (gap > best_gap) {
      best_gap = gap;
      boundary = i;
    }
  }
  SuperGroups sg;
  sg.g1.assign(order.begin(), order.begin() + boundary + 1);
  sg.g2.assign(order.begin() + boundary + 1, order.end());
  std::sort(sg.g1.begin(), sg.g1.end());
  std::sort(sg.g2.begin(), sg.g2.end());
  return sg;
}

double compute_cutoff(const std::vector<double>& z1, const std::vector<double>& z2, int rule_id) {
  if (z1.empty() || z2.empty()) fail(Errc::degenerate, "compute_cutoff: empty projected group");
  if (rule_id < 1 || rule_id > 8) fail(Errc::config, "compute_cutoff: rule must be 1..8");
  const double n1 = static_cast<double>(z1.size());
  const double n2 = static_cast<double>(z2.size());
  const double m1 = mean_of(z1), m2 = mean_of(z2);
  switch (rule_id) {
    case 1:
      return (m1 + m2) / 2.0;
    case 2: {
      const double s1 = sd_of(z1), s2 = sd_of(z2);
      if (s1 + s2 <= 0.0) return (m1 + m2) / 2.0;
      return weighted_between(m1, m2, s1, s2);
    }
    case 3: {
      const double w1 = sd_of(z1) / std::sqrt(n1), w2 = sd_of(z2) / std::sqrt(n2);
      if (w1 + w2 <= 0.0) return (m1 + m2) / 2.0;
      return weighted_between(m1, m2, w1, w2);
    }
    case 4:
      return weighted_between(m1, m2, n1, n2);
    default:
      break;
  }
  const double md1 = median_of(z1), md2 = median_of(z2);
  switch (rule_id) {
    case 5:
      return (md1 + md2) / 2.0;
    case 6: {
      const double q1 = iqr_of(z1), q2 = iqr_of(z2);
      if (q1 + q2 <= 0.0) return (md1 + md2) / 2.0;
      return weighted_between(md1, md2, q1, q2);
    }
    case 7: {
      const double w1 = iqr_of(z1) / std::sqrt(n1), w2 = iqr_of(z2) / std::sqrt(n2);
      if (w1 + w2 <= 0.0) return (md1 + md2) / 2.0;
      return weighted_between(md1, md2, w1, w2);
    }
    case 8:
      return weighted_between(md1, md2, n1, n2);
    default:
      fail(Errc::internal, "compute_cutoff: unreachable");
  }
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& d, const IndexConfig& cfg, int m_vars, int rule_id, Rng& rng)
      : d_(d), cfg_(cfg), m_vars_(m_vars), rule_id_(rule_id), rng_(rng) {}

  PPtreeModel build(const std::vector<int>& rows) {
    PPtreeModel t;
    t.num_vars = d_.p();
    t.depth = grow(rows, /*out*/ t);
    t.num_internal = 0;
    for (const auto& nd : t.nodes)
      if (!nd.is_leaf()) ++t.num_internal;
    t.any_forced_leaf = any_forced_;
    return t;
  }

  std::vector<std::vector<int>> take_draws() { return std::move(draws_); }

 private:
  int make_leaf(PPtreeModel& t, int cls, bool forced) {
    TreeNode leaf;
    leaf.leaf_class = cls;
    leaf.forced_leaf = forced;
    any_forced_ = any_forced_ || forced;
    t.nodes.push_back(std::move(leaf));
    draws_.emplace_back();
    return static_cast<int>(t.nodes.size()) - 1;
  }

  int majority_class(const std::vector<int>& rows) const {
    std::vector<int> counts(d_.num_classes(), 0);
    for (const int r : rows) counts[d_.labels[r]] += 1;
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  }

  bool rows_coincide(const std::vector<int>& rows) const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (d_.predictors.row(rows[i]) != d_.predictors.row(rows[0])) return false;
    }
    return true;
  }

  // Returns the depth (internal nodes on the deepest path) of the
  // subtree grown for rows; appends its nodes to t.
  int grow(const std::vector<int>& rows, PPtreeModel& t) {
    if (rows.empty()) fail(Errc::internal, "fit_pptree: empty node");
    std::vector<int> present;
    {
      std::vector<char> seen(d_.num_classes(), 0);
      for (const int r : rows) seen[d_.labels[r]] = 1;
      for (int g = 0; g < d_.num_classes(); ++g)
        if (seen[g]) present.push_back(g);
    }
    if (present.size() == 1) {
      make_leaf(t, present[0], false);
      return 0;
    }
    if (rows_coincide(rows)) {
      make_leaf(t, majority_class(rows), true);
      return 0;
    }

    // Fixed consumption order, so the tree replays from its seed:
    // column draw, then one optimizer seed per pass.
    const std::vector<int> cols = rng_.sample_without_replacement(d_.p(), m_vars_);
    const std::uint64_t seed_pass1 = rng_.next_u64();
    const std::uint64_t seed_pass2 = rng_.next_u64();

    const int id = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    draws_.push_back(cols);

    std::vector<int> rows_g1, rows_g2;
    try {
      // Gather the node's submatrix once; both passes share it.
      const int nr = static_cast<int>(rows.size());
      const int m = static_cast<int>(cols.size());
      Matrix x(nr, m);
      for (int i = 0; i < nr; ++i)
        for (int j = 0; j < m; ++j) x(i, j) = d_.predictors(rows[i], cols[j]);

      std::vector<int> group_of(d_.num_classes(), -1);
      for (std::size_t g = 0; g < present.size(); ++g) group_of[present[g]] = static_cast<int>(g);
      std::vector<int> labels(nr);
      for (int i = 0; i < nr; ++i) labels[i] = group_of[d_.labels[rows[i]]];

      // Pass 1: best projection for all classes at the node.
      ScatterMatrices s1 = compute_scatter(x, labels, static_cast<int>(present.size()));
      const ProjectionResult pr1 = optimize_projection_scatter(s1, cfg_, seed_pass1, cols);

      // Merge classes into two super-groups by projected class mean.
      const Vector proj_means = s1.class_means * pr1.alpha;
      const SuperGroups sg = assign_super_groups(
          std::vector<double>(proj_means.data(), proj_means.data() + proj_means.size()));
      std::vector<char> in_g1(present.size(), 0);
      for (const int g : sg.g1) in_g1[g] = 1;

      // Pass 2: refit the projection for the two-group problem.
      std::vector<int> super_labels(nr);
      for (int i = 0; i < nr; ++i) super_labels[i] = in_g1[labels[i]] ? 0 : 1;
      ScatterMatrices s2 = compute_scatter(x, super_labels, 2);
      const ProjectionResult pr2 = optimize_projection_scatter(s2, cfg_, seed_pass2, cols);

      const Vector z = x * pr2.alpha;
      std::vector<double> z1, z2;
      for (int i = 0; i < nr; ++i) (super_labels[i] == 0 ? z1 : z2).push_back(z[i]);
      const double cutoff = compute_cutoff(z1, z2, rule_id_);
      const double m1 = mean_of(z1);

      TreeNode& node = t.nodes[id];
      node.alpha = Vector::Zero(d_.p());
      for (int j = 0; j < m; ++j) node.alpha[cols[j]] = pr2.alpha[j];
      node.cutoff = cutoff;
      node.rule_id = rule_id_;
      node.left_sign = m1 < cutoff ? Side::less : Side::greater_eq;
      node.projected_mean_g1 = m1;
      node.index_first_pass = pr1.index_value;
      node.index_second_pass = pr2.index_value;
      node.classes_in_node = present;
      node.sampled_cols = cols;

      // Children keep every row of their super-group's classes.
      std::vector<char> class_in_g1(d_.num_classes(), 0);
      for (const int g : sg.g1) class_in_g1[present[g]] = 1;
      for (const int r : rows) (class_in_g1[d_.labels[r]] ? rows_g1 : rows_g2).push_back(r);
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate) throw;
      // Close out the node: the projection machinery cannot split it.
      t.nodes[id] = TreeNode{};
      t.nodes[id].leaf_class = majority_class(rows);
      t.nodes[id].forced_leaf = true;
      any_forced_ = true;
      draws_[id].clear();
      return 0;
    }

    // Each grow() call appends its subtree root first, so the child ids
    // are the node counts just before the recursive calls.
    const int child_g1 = static_cast<int>(t.nodes.size());
    const int depth_g1 = grow(rows_g1, t);
    const int child_g2 = static_cast<int>(t.nodes.size());
    const int depth_g2 = grow(rows_g2, t);

    TreeNode& node = t.nodes[id];
    if (node.left_sign == Side::less) {
      node.child_less = child_g1;
      node.child_greater_eq = child_g2;
    } else {
      node.child_less = child_g2;
      node.child_greater_eq = child_g1;
    }
    return 1 + std::max(depth_g1, depth_g2);
  }

  const Dataset& d_;
  const IndexConfig& cfg_;
  int m_vars_;
  int rule_id_;
  Rng& rng_;
  std::vector<std::vector<int>> draws_;
  bool any_forced_ = false;
};

}  // namespace

PPtreeModel fit_pptree(const Dataset& d, const std::vector<int>& rows, const IndexConfig& cfg,
                       int m_vars, int rule_id, Rng& rng,
                       std::vector<std::vector<int>>* column_draws) {
  validate(cfg);
  if (rows.empty()) fail(Errc::degenerate, "fit_pptree: no rows");
  if (m_vars < 1 || m_vars > d.p()) fail(Errc::config, "fit_pptree: m_vars out of [1,p]");
  if (rule_id < 1 || rule_id > 8) fail(Errc::config, "fit_pptree: rule must be 1..8");
  TreeBuilder builder(d, cfg, m_vars, rule_id, rng);
  PPtreeModel t = builder.build(rows);
  if (column_draws) *column_draws = builder.take_draws();
  return t;
}

PPtreeModel fit_pptree(const Dataset& d, const std::vector<int>& rows, const IndexConfig& cfg,
                       int m_vars, int rule_id, std::uint64_t seed) {
  Rng rng(seed);
  return fit_pptree(d, rows, cfg, m_vars, rule_id, rng);
}

namespace {
int descend(const PPtreeModel& t, const Eigen::Ref<const Vector>& x) {
  if (x.size() != t.num_vars) fail(Errc::mismatch, "predict_tree: dimension mismatch");
  int id = 0;
  while (!t.nodes[id].is_leaf()) {
    const TreeNode& nd = t.nodes[id];
    const double z = nd.alpha.dot(x);
    id = z < nd.cutoff ? nd.child_less : nd.child_greater_eq;
  }
  return id;
}
}  // namespace

int predict_tree(const PPtreeModel& t, const Eigen::Ref<const Vector>& x) {
  return t.nodes[descend(t, x)].leaf_class;
}

int tree_leaf_index(const PPtreeModel& t, const Eigen::Ref<const Vector>& x) {
  return descend(t, x);
}

}  // namespace ppf
