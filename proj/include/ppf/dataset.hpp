#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ppf/types.hpp"

namespace ppf {

// Per-column statistics recorded when a dataset is standardized, so the
// same affine map can be replayed on test data and inverted exactly.
struct Standardization {
  Vector mean;  // length p
  Vector sd;    // length p; constant columns store 1 so they map to zeros

  Matrix apply(const Matrix& x) const;
  Matrix invert(const Matrix& z) const;
};

// A classification training/test table: rows of standardizable real
// predictors plus integer class ids assigned by lexicographic order of
// the original label strings.
struct Dataset {
  Matrix predictors;                     // n x p
  IntVector labels;                      // length n, values in {0..G-1}
  std::vector<std::string> class_names;  // length G
  std::vector<std::string> var_names;    // length p
  std::vector<int> class_counts;        // length G, n_g
  std::optional<Standardization> standardization;

  int n() const { return static_cast<int>(predictors.rows()); }
  int p() const { return static_cast<int>(predictors.cols()); }
  int num_classes() const { return static_cast<int>(class_names.size()); }

  // Rebuilds class_counts from labels (used after construction edits).
  void recount_classes();
  // Throws Errc::degenerate / Errc::internal if the invariants fail.
  void check_invariants() const;
};

// Rows drawn with replacement, stratified so each class keeps its exact
// count; oob_mask marks rows that never appear among the draws.
struct BootstrapSample {
  std::vector<int> indices;   // length n, row ids with repetition
  std::vector<bool> oob_mask; // length n
};

// z-scores every column with the dataset's own statistics and records
// them; constant columns become all zeros.
Dataset standardize(const Dataset& d);

// Applies previously recorded statistics (e.g. to test data).
Dataset standardize_with(const Dataset& d, const Standardization& s);

// Per class, round-half-up(train_fraction * n_g) rows go to train,
// clamped to [1, n_g-1] so both halves keep every class.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed);

// Independent uniform resampling within each class (exact per-class counts).
BootstrapSample stratified_bootstrap(const Dataset& d, std::uint64_t seed);
// In-place generator form, for callers interleaving other draws on the
// same stream (the forest consumes bootstrap then per-node columns).
class Rng;
BootstrapSample stratified_bootstrap(const Dataset& d, Rng& rng);

// Copies the selected rows (multiset semantics: duplicates repeat).
Dataset subset_rows(const Dataset& d, const std::vector<int>& rows);

}  // namespace ppf
