#pragma once

#include <cstdint>
#include <vector>

#include "ppf/dataset.hpp"
#include "ppf/separation_index.hpp"
#include "ppf/types.hpp"

namespace ppf {

// The best 1D projection found for one node pass, expressed in the
// sampled-variable subspace.
struct ProjectionResult {
  Vector alpha;           // length cols.size(), unit norm, first nonzero > 0
  double index_value;     // configured index evaluated at alpha, in [0,1]
  std::vector<int> cols;  // the variable indices alpha applies to
};

// Maximizes the configured separation index over unit vectors. The
// maximizer is the leading eigenvector of the pencil (B, W_eff + B); a
// seeded coordinate-perturbation hill climb refines the answer only when
// the pencil is too ill-conditioned for the eigensolver to be trusted
// (falling back LDA -> PDA(cfg.lambda) -> ridge on W along the way).
ProjectionResult optimize_projection(const Dataset& d, const std::vector<int>& rows,
                                     const std::vector<int>& cols, const IndexConfig& cfg,
                                     std::uint64_t seed);

// Same search on precomputed scatter matrices (data_cols x data_cols);
// used internally per tree node and by the optimizer tests.
ProjectionResult optimize_projection_scatter(const ScatterMatrices& s, const IndexConfig& cfg,
                                             std::uint64_t seed, const std::vector<int>& cols);

// Flips alpha so its first coefficient with |a_i| > 1e-12 * max|a| is
// positive; identity for the zero vector.
void canonicalize_sign(Vector& alpha);

}  // namespace ppf
