#pragma once

#include <cmath>
#include <vector>

#include "ppf/dataset.hpp"
#include "ppf/errors.hpp"
#include "ppf/types.hpp"

namespace ppf {

// Between-class (B) and within-class (W) sums-of-squares matrices for a
// group-labeled sample, restricted to whatever columns the caller selected.
template <class Scalar>
struct ScatterMatricesT {
  MatrixX<Scalar> between;      // k x k
  MatrixX<Scalar> within;       // k x k
  MatrixX<Scalar> class_means;  // q x k, rows for groups 0..q-1
  VectorX<Scalar> grand_mean;   // length k
  std::vector<int> counts;      // per-group sample counts (with multiplicity)
  std::vector<int> class_ids;   // original class id per group (wrapper fills it)
};

using ScatterMatrices = ScatterMatricesT<double>;

enum class IndexKind { lda, pda };

// Which class-separation index drives projection search. lambda is the
// PDA shrinkage; for an lda run it is kept as the fallback shrinkage used
// when ill-conditioning forces the PDA regularization path.
struct IndexConfig {
  IndexKind kind = IndexKind::lda;
  double lambda = 0.1;  // in [0,1)
};

void validate(const IndexConfig& cfg);

// W with its off-diagonal shrunk by (1 - lambda); diagonal untouched.
template <class Derived>
MatrixX<typename Derived::Scalar> pda_within(const Eigen::MatrixBase<Derived>& w,
                                             typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> out = (Scalar{1} - lambda) * w;
  out.diagonal() = w.diagonal();
  return out;
}

// Scatter over an already-selected sample: x is rows x k, labels[i] in
// {0..num_groups-1}. Groups absent from labels get zero count and a zero
// mean row. Requires at least two non-empty groups.
template <class Derived>
ScatterMatricesT<typename Derived::Scalar> compute_scatter(const Eigen::MatrixBase<Derived>& x,
                                                           const std::vector<int>& labels,
                                                           int num_groups) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<int>(x.rows());
  const auto k = static_cast<int>(x.cols());
  if (n == 0) fail(Errc::degenerate, "scatter: no rows selected");
  if (static_cast<int>(labels.size()) != n) fail(Errc::internal, "scatter: label/row mismatch");

  ScatterMatricesT<Scalar> s;
  s.counts.assign(num_groups, 0);
  s.class_means = MatrixX<Scalar>::Zero(num_groups, k);
  for (int i = 0; i < n; ++i) {
    const int g = labels[i];
    if (g < 0 || g >= num_groups) fail(Errc::internal, "scatter: label out of range");
    s.counts[g] += 1;
    s.class_means.row(g) += x.row(i);
  }
  int present = 0;
  for (int g = 0; g < num_groups; ++g) {
    if (s.counts[g] > 0) {
      s.class_means.row(g) /= Scalar(s.counts[g]);
      ++present;
    }
  }
  if (present < 2) fail(Errc::degenerate, "scatter: fewer than two classes among rows");

  s.grand_mean = VectorX<Scalar>::Zero(k);
  for (int i = 0; i < n; ++i) s.grand_mean += x.row(i).transpose();
  s.grand_mean /= Scalar(n);

  s.between = MatrixX<Scalar>::Zero(k, k);
  for (int g = 0; g < num_groups; ++g) {
    if (s.counts[g] == 0) continue;
    const VectorX<Scalar> dm = s.class_means.row(g).transpose() - s.grand_mean;
    s.between.noalias() += Scalar(s.counts[g]) * dm * dm.transpose();
  }
  s.within = MatrixX<Scalar>::Zero(k, k);
  for (int i = 0; i < n; ++i) {
    const VectorX<Scalar> d = x.row(i).transpose() - s.class_means.row(labels[i]).transpose();
    s.within.noalias() += d * d.transpose();
  }
  return s;
}

namespace detail {
// Scale-aware zero test for the degenerate-denominator branch of the
// index definitions.
template <class Scalar>
Scalar denominator_epsilon(const MatrixX<Scalar>& total, int k) {
  return Scalar(1e-12) * total.trace() / Scalar(k > 0 ? k : 1);
}

template <class Scalar, class Derived>
Scalar index_from_within(const MatrixX<Scalar>& w_eff, const MatrixX<Scalar>& between,
                         const Eigen::MatrixBase<Derived>& a_raw) {
  const Scalar norm = a_raw.norm();
  if (!(norm > Scalar{0})) fail(Errc::degenerate, "separation index: zero projection vector");
  const VectorX<Scalar> a = a_raw / norm;
  const MatrixX<Scalar> total = w_eff + between;
  const Scalar den = a.dot(total * a);
  if (den <= denominator_epsilon(total, static_cast<int>(a.size()))) return Scalar{0};
  const Scalar value = Scalar{1} - a.dot(w_eff * a) / den;
  return std::min(Scalar{1}, std::max(Scalar{0}, value));
}
}  // namespace detail

// 1 - (a'Wa)/(a'(W+B)a); 0 when the denominator vanishes. a is
// normalized internally, so the value is scale-invariant.
template <class Scalar, class Derived>
Scalar lda_index(const ScatterMatricesT<Scalar>& s, const Eigen::MatrixBase<Derived>& a) {
  return detail::index_from_within(s.within, s.between, a);
}

// Same with W replaced by diag(W) + (1-lambda) offdiag(W).
template <class Scalar, class Derived>
Scalar pda_index(const ScatterMatricesT<Scalar>& s, const Eigen::MatrixBase<Derived>& a,
                 Scalar lambda) {
  if (!(lambda >= Scalar{0} && lambda < Scalar{1}))
    fail(Errc::config, "pda_index: lambda must be in [0,1)");
  return detail::index_from_within(MatrixX<Scalar>(pda_within(s.within, lambda)), s.between, a);
}

// Evaluates whichever index cfg selects.
template <class Scalar, class Derived>
Scalar separation_index(const ScatterMatricesT<Scalar>& s, const Eigen::MatrixBase<Derived>& a,
                        const IndexConfig& cfg) {
  return cfg.kind == IndexKind::lda ? lda_index(s, a) : pda_index(s, a, Scalar(cfg.lambda));
}

// Dataset wrapper: rows may repeat (bootstrap multiset), cols selects the
// predictor subset. Groups are the distinct original classes among rows,
// in ascending class-id order; class_ids maps group -> original id.
ScatterMatrices scatter(const Dataset& d, const std::vector<int>& rows,
                        const std::vector<int>& cols);

}  // namespace ppf
