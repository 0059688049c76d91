#include "ppf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ppf/errors.hpp"
#include "ppf/rng.hpp"

namespace ppf {

Matrix Standardization::apply(const Matrix& x) const {
  if (x.cols() != mean.size()) fail(Errc::mismatch, "standardization: column count mismatch");
  Matrix z = x;
  z.rowwise() -= mean.transpose();
  z.array().rowwise() /= sd.transpose().array();
  return z;
}

Matrix Standardization::invert(const Matrix& z) const {
  if (z.cols() != mean.size()) fail(Errc::mismatch, "standardization: column count mismatch");
  Matrix x = z;
  x.array().rowwise() *= sd.transpose().array();
  x.rowwise() += mean.transpose();
  return x;
}

void Dataset::recount_classes() {
  class_counts.assign(class_names.size(), 0);
  for (int i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= num_classes()) fail(Errc::internal, "dataset: label out of range");
    class_counts[y] += 1;
  }
}

void Dataset::check_invariants() const {
  if (labels.size() != predictors.rows()) fail(Errc::internal, "dataset: label/row mismatch");
  if (static_cast<int>(var_names.size()) != p()) fail(Errc::internal, "dataset: var name count");
  const int total = std::accumulate(class_counts.begin(), class_counts.end(), 0);
  if (total != n()) fail(Errc::internal, "dataset: class counts do not sum to n");
  if (!predictors.allFinite()) fail(Errc::degenerate, "dataset: non-finite predictor");
}

Dataset standardize(const Dataset& d) {
  const int n = d.n();
  if (n == 0) fail(Errc::degenerate, "standardize: empty dataset");
  Standardization s;
  s.mean = d.predictors.colwise().mean();
  s.sd.resize(d.p());
  for (int j = 0; j < d.p(); ++j) {
    const double var =
        (d.predictors.col(j).array() - s.mean[j]).square().sum() / std::max(1, n - 1);
    const double sd = std::sqrt(var);
    s.sd[j] = sd > 0.0 ? sd : 1.0;  // constant column -> zeros, not NaN
  }
  Dataset out = standardize_with(d, s);
  return out;
}

Dataset standardize_with(const Dataset& d, const Standardization& s) {
  Dataset out = d;
  out.predictors = s.apply(d.predictors);
  out.standardization = s;
  return out;
}

namespace {
std::vector<std::vector<int>> rows_by_class(const Dataset& d) {
  std::vector<std::vector<int>> by_class(d.num_classes());
  for (int g = 0; g < d.num_classes(); ++g) by_class[g].reserve(d.class_counts[g]);
  for (int i = 0; i < d.n(); ++i) by_class[d.labels[i]].push_back(i);
  return by_class;
}
}  // namespace

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    fail(Errc::config, "stratified_split: train_fraction must be in (0,1)");
  for (int g = 0; g < d.num_classes(); ++g) {
    if (d.class_counts[g] < 2)
      fail(Errc::degenerate, "stratified_split: class '" + d.class_names[g] +
                                 "' has fewer than 2 rows");
  }
  Rng rng(seed);
  auto by_class = rows_by_class(d);
  std::vector<int> train_rows, test_rows;
  for (int g = 0; g < d.num_classes(); ++g) {
    auto& pool = by_class[g];
    rng.shuffle(pool);
    const int ng = static_cast<int>(pool.size());
    // Round half up, then clamp so both sides keep at least one row.
    int take = static_cast<int>(std::floor(train_fraction * ng + 0.5));
    take = std::clamp(take, 1, ng - 1);
    train_rows.insert(train_rows.end(), pool.begin(), pool.begin() + take);
    test_rows.insert(test_rows.end(), pool.begin() + take, pool.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {subset_rows(d, train_rows), subset_rows(d, test_rows)};
}

BootstrapSample stratified_bootstrap(const Dataset& d, std::uint64_t seed) {
  Rng rng(seed);
  return stratified_bootstrap(d, rng);
}

BootstrapSample stratified_bootstrap(const Dataset& d, Rng& rng) {
  auto by_class = rows_by_class(d);
  BootstrapSample b;
  b.indices.reserve(d.n());
  b.oob_mask.assign(d.n(), true);
  for (int g = 0; g < d.num_classes(); ++g) {
    const auto& pool = by_class[g];
    const auto ng = static_cast<std::uint64_t>(pool.size());
    for (std::uint64_t i = 0; i < ng; ++i) {
      const int row = pool[static_cast<int>(rng.below(ng))];
      b.indices.push_back(row);
      b.oob_mask[row] = false;
    }
  }
  return b;
}

Dataset subset_rows(const Dataset& d, const std::vector<int>& rows) {
  Dataset out;
  out.predictors.resize(static_cast<int>(rows.size()), d.p());
  out.labels.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || r >= d.n()) fail(Errc::internal, "subset_rows: row index out of range");
    out.predictors.row(static_cast<int>(i)) = d.predictors.row(r);
    out.labels[static_cast<int>(i)] = d.labels[r];
  }
  out.class_names = d.class_names;
  out.var_names = d.var_names;
  out.standardization = d.standardization;
  out.recount_classes();
  return out;
}

}  // namespace ppf
