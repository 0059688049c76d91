#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ppf/dataset.hpp"
#include "ppf/forest.hpp"
#include "ppf/types.hpp"

namespace ppf {

struct DiagnosticsReport {
  double oob_error = 0.0;
  Vector imp_permuted;         // length p
  Matrix imp_pptree_per_tree;  // num_trees x p, per-tree coefficient importance
  Vector imp_forest_avg;       // mean of the per-tree rows
  Vector imp_forest_weighted;  // accuracy- and index-weighted variant
  Matrix vote_matrix;          // n x G (OOB votes)
  Matrix proximity;            // n x n
  std::vector<int> never_oob;
};

// Fraction of OOB-covered rows whose OOB majority vote misses the label.
double oob_error(const PPforestModel& model, const Dataset& d);

// Mean over trees of (OOB correct - OOB correct after permuting column j
// within the tree's OOB rows) / |OOB|. Trees with no OOB rows contribute
// zero. Deterministic per (seed, tree), independent of thread count.
Vector permuted_importance(const PPforestModel& model, const Dataset& d, std::uint64_t seed,
                           int num_threads = 1);

// Per-variable sum over internal nodes of |alpha_j| / (#classes at node).
Vector coefficient_importance_tree(const PPtreeModel& t);

// (average over trees, weighted variant): the weighted form scales each
// node by its two-group index value, normalizes by the tree's internal
// node count, and weights trees by OOB accuracy.
std::pair<Vector, Vector> forest_importance(const PPforestModel& model);

// OOB vote shares per row (delegates to oob_predict).
Matrix vote_matrix(const PPforestModel& model, const Dataset& d);

// Maps vote rows through the orthonormal Helmert contrast basis (G x
// (G-1), columns orthogonal to the ones vector): the probability simplex
// lands in G-1 coordinates for ternary-style plots. Requires G >= 3.
Matrix ternary_coords(const Matrix& votes);

// Fraction of trees in which rows i and j share a terminal node
// (diagonal 1). With oob_pairs_only, only trees where both rows are OOB
// count, divided by the number of such trees (0 when there are none).
Matrix proximity(const PPforestModel& model, const Dataset& d, bool oob_pairs_only = false);

// Classical (Torgerson) scaling of the dissimilarity 1 - proximity:
// double-center -D.^2/2 and keep the top eigenpairs. Columns are ordered
// by descending eigenvalue; dims beyond the positive spectrum come back
// as zeros with a warning pushed to *warnings.
Matrix classical_mds(const Matrix& proximity, int dims,
                     std::vector<std::string>* warnings = nullptr);

// One-stop assembly of the full report.
DiagnosticsReport run_diagnostics(const PPforestModel& model, const Dataset& d,
                                  std::uint64_t permute_seed, int num_threads = 1,
                                  bool oob_pairs_proximity = false);

}  // namespace ppf
