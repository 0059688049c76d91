#include "ppf/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "ppf/errors.hpp"
#include "ppf/parallel.hpp"
#include "ppf/rng.hpp"

namespace ppf {

namespace {

double oob_error_from(const OobPrediction& oob, const Dataset& d) {
  int counted = 0;
  int wrong = 0;
  for (int i = 0; i < d.n(); ++i) {
    if (oob.predicted[i] < 0) continue;
    ++counted;
    if (oob.predicted[i] != d.labels[i]) ++wrong;
  }
  if (counted == 0)
    fail(Errc::degenerate, "oob_error: no row was ever out-of-bag (too few trees)");
  return static_cast<double>(wrong) / counted;
}

}  // namespace

double oob_error(const PPforestModel& model, const Dataset& d) {
  return oob_error_from(oob_predict(model, d), d);
}

Vector permuted_importance(const PPforestModel& model, const Dataset& d, std::uint64_t seed,
                           int num_threads) {
  const int n = d.n();
  const int p = d.p();
  const auto num_trees = static_cast<int>(model.trees.size());
  Matrix per_tree = Matrix::Zero(num_trees, p);

  parallel_for(num_trees, num_threads, [&](int k) {
    const auto& tree = model.trees[k];
    const auto& mask = model.oob_mask(k);
    std::vector<int> oob_rows;
    for (int i = 0; i < n; ++i)
      if (mask[i]) oob_rows.push_back(i);
    if (oob_rows.empty()) return;  // contributes a zero row
    const auto n_oob = static_cast<int>(oob_rows.size());

    int correct = 0;
    for (const int i : oob_rows)
      if (predict_tree(tree, d.predictors.row(i)) == d.labels[i]) ++correct;

    // One stream per tree: permutations for j = 0..p-1 in order.
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
    Vector x(p);
    for (int j = 0; j < p; ++j) {
      const std::vector<int> perm = rng.permutation(n_oob);
      int correct_perm = 0;
      for (int i = 0; i < n_oob; ++i) {
        x = d.predictors.row(oob_rows[i]).transpose();
        x[j] = d.predictors(oob_rows[perm[i]], j);
        if (predict_tree(tree, x) == d.labels[oob_rows[i]]) ++correct_perm;
      }
      per_tree(k, j) = static_cast<double>(correct - correct_perm) / n_oob;
    }
  });

  return per_tree.colwise().mean().transpose();
}

Vector coefficient_importance_tree(const PPtreeModel& t) {
  Vector imp = Vector::Zero(t.num_vars);
  for (const auto& nd : t.nodes) {
    if (nd.is_leaf()) continue;
    imp += nd.alpha.cwiseAbs() / static_cast<double>(nd.classes_in_node.size());
  }
  return imp;
}

std::pair<Vector, Vector> forest_importance(const PPforestModel& model) {
  const auto num_trees = static_cast<int>(model.trees.size());
  const int p = model.p;
  Vector avg = Vector::Zero(p);
  Vector weighted = Vector::Zero(p);
  for (int k = 0; k < num_trees; ++k) {
    const auto& tree = model.trees[k];
    avg += coefficient_importance_tree(tree);
    if (tree.num_internal == 0) continue;
    Vector node_sum = Vector::Zero(p);
    for (const auto& nd : tree.nodes) {
      if (nd.is_leaf()) continue;
      node_sum += nd.index_second_pass * nd.alpha.cwiseAbs();
    }
    weighted += model.per_tree_oob_accuracy[k] * node_sum / tree.num_internal;
  }
  avg /= num_trees;
  weighted /= num_trees;
  return {std::move(avg), std::move(weighted)};
}

Matrix vote_matrix(const PPforestModel& model, const Dataset& d) {
  return oob_predict(model, d).votes;
}

Matrix ternary_coords(const Matrix& votes) {
  const auto num_classes = static_cast<int>(votes.cols());
  if (num_classes < 3) fail(Errc::config, "ternary_coords: needs at least 3 classes");
  Matrix helmert = Matrix::Zero(num_classes, num_classes - 1);
  for (int c = 0; c < num_classes - 1; ++c) {
    const double k = c + 1.0;
    const double scale = 1.0 / std::sqrt(k * (k + 1.0));
    for (int r = 0; r <= c; ++r) helmert(r, c) = scale;
    helmert(c + 1, c) = -k * scale;
  }
  return votes * helmert;
}

Matrix proximity(const PPforestModel& model, const Dataset& d, bool oob_pairs_only) {
  if (d.n() != model.n_train || dataset_hash(d) != model.data_hash)
    fail(Errc::mismatch, "proximity: dataset does not match the model's training data");
  const int n = d.n();
  const auto num_trees = static_cast<int>(model.trees.size());

  // Leaf assignments per tree, filled in parallel by tree; the pair
  // counting below is integer arithmetic in a fixed order.
  std::vector<std::vector<int>> leaf(num_trees, std::vector<int>(n));
  parallel_for(num_trees, model.config.num_threads, [&](int k) {
    for (int i = 0; i < n; ++i)
      leaf[k][i] = tree_leaf_index(model.trees[k], d.predictors.row(i));
  });

  Eigen::MatrixXi shared = Eigen::MatrixXi::Zero(n, n);
  Eigen::MatrixXi pairs = Eigen::MatrixXi::Zero(n, n);
  for (int k = 0; k < num_trees; ++k) {
    const auto& mask = model.oob_mask(k);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (oob_pairs_only && !(mask[i] && mask[j])) continue;
        pairs(i, j) += 1;
        if (leaf[k][i] == leaf[k][j]) shared(i, j) += 1;
      }
    }
  }

  Matrix prox = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int denom = oob_pairs_only ? pairs(i, j) : num_trees;
      const double v = denom > 0 ? static_cast<double>(shared(i, j)) / denom : 0.0;
      prox(i, j) = v;
      prox(j, i) = v;
    }
  }
  return prox;
}

Matrix classical_mds(const Matrix& prox, int dims, std::vector<std::string>* warnings) {
  const auto n = static_cast<int>(prox.rows());
  if (prox.cols() != n) fail(Errc::config, "classical_mds: proximity must be square");
  if (dims < 1) fail(Errc::config, "classical_mds: dims must be >= 1");
  if (dims > n - 1) fail(Errc::config, "classical_mds: dims must be <= n-1");

  // Double-center the squared dissimilarities d = 1 - proximity.
  Matrix d2 = (1.0 - prox.array()).square().matrix();
  const Vector row_mean = d2.rowwise().mean();
  const double grand = row_mean.mean();
  Matrix b = -0.5 * (d2 - row_mean.replicate(1, n) - row_mean.transpose().replicate(n, 1));
  b.array() -= 0.5 * grand;
  b = 0.5 * (b + b.transpose()).eval();  // keep it exactly symmetric

  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  if (es.info() != Eigen::Success) fail(Errc::internal, "classical_mds: eigensolver failed");

  Matrix coords = Matrix::Zero(n, dims);
  for (int t = 0; t < dims; ++t) {
    const int idx = n - 1 - t;  // eigenvalues come back ascending
    const double ev = es.eigenvalues()[idx];
    if (ev <= 0.0) {
      if (warnings)
        warnings->push_back("mds: dimension " + std::to_string(t + 1) +
                            " exceeds the positive spectrum; column left at zero");
      continue;
    }
    Vector col = es.eigenvectors().col(idx) * std::sqrt(ev);
    // Deterministic orientation: largest-magnitude coordinate positive.
    int arg = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(col[i]) > std::abs(col[arg])) arg = i;
    if (col[arg] < 0.0) col = -col;
    coords.col(t) = col;
  }
  return coords;
}

DiagnosticsReport run_diagnostics(const PPforestModel& model, const Dataset& d,
                                  std::uint64_t permute_seed, int num_threads,
                                  bool oob_pairs_proximity) {
  DiagnosticsReport rep;
  const OobPrediction oob = oob_predict(model, d);
  rep.oob_error = oob_error_from(oob, d);
  rep.vote_matrix = oob.votes;
  rep.never_oob = oob.never_oob;
  rep.imp_permuted = permuted_importance(model, d, permute_seed, num_threads);
  const auto num_trees = static_cast<int>(model.trees.size());
  rep.imp_pptree_per_tree.resize(num_trees, model.p);
  for (int k = 0; k < num_trees; ++k)
    rep.imp_pptree_per_tree.row(k) = coefficient_importance_tree(model.trees[k]).transpose();
  std::tie(rep.imp_forest_avg, rep.imp_forest_weighted) = forest_importance(model);
  rep.proximity = proximity(model, d, oob_pairs_proximity);
  return rep;
}

}  // namespace ppf
