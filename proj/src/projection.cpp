#include "ppf/projection.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ppf/errors.hpp"
#include "ppf/rng.hpp"

namespace ppf {

ScatterMatrices scatter(const Dataset& d, const std::vector<int>& rows,
                        const std::vector<int>& cols) {
  if (rows.empty()) fail(Errc::degenerate, "scatter: no rows selected");
  if (cols.empty()) fail(Errc::degenerate, "scatter: no columns selected");
  // Compact the original class ids present among rows to group labels.
  std::set<int> present;
  for (const int r : rows) present.insert(d.labels[r]);
  std::vector<int> class_ids(present.begin(), present.end());
  std::vector<int> group_of(d.num_classes(), -1);
  for (std::size_t g = 0; g < class_ids.size(); ++g) group_of[class_ids[g]] = static_cast<int>(g);

  Matrix x(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) x(static_cast<int>(i), static_cast<int>(j)) = d.predictors(rows[i], cols[j]);
    labels[i] = group_of[d.labels[rows[i]]];
  }
  ScatterMatrices s = compute_scatter(x, labels, static_cast<int>(class_ids.size()));
  s.class_ids = std::move(class_ids);
  return s;
}

void canonicalize_sign(Vector& alpha) {
  const double scale = alpha.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) return;
  for (int j = 0; j < alpha.size(); ++j) {
    if (std::abs(alpha[j]) > 1e-12 * scale) {
      if (alpha[j] < 0.0) alpha = -alpha;
      return;
    }
  }
}

namespace {

// lambda_max / lambda_min of a symmetric PSD matrix; +inf when the
// smallest eigenvalue is not safely positive.
double condition_estimate(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0)) return std::numeric_limits<double>::infinity();
  if (!(lo > hi * 1e-300)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// Top generalized eigenvector of (B, denom); requires denom positive
// definite (caller has checked conditioning).
Vector top_pencil_eigenvector(const Matrix& between, const Matrix& denom) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(between, denom);
  if (es.info() != Eigen::Success)
    fail(Errc::degenerate, "projection: generalized eigensolver failed");
  Vector alpha = es.eigenvectors().col(es.eigenvectors().cols() - 1);
  const double norm = alpha.norm();
  if (!(norm > 0.0)) fail(Errc::degenerate, "projection: zero eigenvector");
  return alpha / norm;
}

// Coordinate-perturbation hill climb on the configured index; only used
// on the ill-conditioned path, where the eigensolution is not reliable.
Vector hill_climb(const ScatterMatrices& s, const IndexConfig& cfg, const Vector& start,
                  Rng& rng) {
  const int m = static_cast<int>(start.size());
  const auto value = [&](const Vector& a) { return separation_index(s, a, cfg); };
  Vector best = start;
  double best_value = value(best);
  constexpr int kRestarts = 50;
  for (int r = 0; r < kRestarts; ++r) {
    Vector a(m);
    if (r == 0) {
      a = start;
    } else {
      for (int j = 0; j < m; ++j) a[j] = rng.normal();
      const double norm = a.norm();
      if (!(norm > 0.0)) continue;
      a /= norm;
    }
    double current = value(a);
    double step = 0.5;
    int evals = 0;
    while (step > 1e-7 && evals < 400) {
      bool improved = false;
      for (int j = 0; j < m; ++j) {
        for (const double sign : {1.0, -1.0}) {
          Vector cand = a;
          cand[j] += sign * step;
          const double norm = cand.norm();
          if (!(norm > 0.0)) continue;
          cand /= norm;
          const double cv = value(cand);
          ++evals;
          if (cv > current + 1e-15) {
            a = cand;
            current = cv;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (current > best_value) {
      best_value = current;
      best = a;
    }
  }
  return best;
}

}  // namespace

ProjectionResult optimize_projection_scatter(const ScatterMatrices& s, const IndexConfig& cfg,
                                             std::uint64_t seed, const std::vector<int>& cols) {
  validate(cfg);
  const int m = static_cast<int>(s.between.rows());
  ProjectionResult out;
  out.cols = cols;

  if (m == 1) {
    out.alpha = Vector::Ones(1);
    out.index_value = separation_index(s, out.alpha, cfg);
    return out;
  }

  constexpr double kCondLimit = 1e10;
  Matrix w_eff =
      cfg.kind == IndexKind::lda ? s.within : Matrix(pda_within(s.within, cfg.lambda));
  Matrix denom = w_eff + s.between;
  bool ill = condition_estimate(denom) > kCondLimit;
  if (ill && cfg.kind == IndexKind::lda) {
    // Regularize the within matrix the way the PDA index does.
    w_eff = pda_within(s.within, cfg.lambda);
    denom = w_eff + s.between;
    ill = condition_estimate(denom) > kCondLimit;
  }
  if (ill) {
    // Last resort: ridge on W keeps the pencil solvable.
    const double trace = denom.trace();
    const double eps = 1e-8 * (trace > 0.0 ? trace / m : 1.0);
    w_eff.diagonal().array() += eps;
    denom = w_eff + s.between;
    if (condition_estimate(denom) > 1e14)
      denom.diagonal().array() += eps;  // W+B still numerically singular
  }

  Vector alpha = top_pencil_eigenvector(s.between, denom);
  if (ill) {
    Rng rng(seed);
    alpha = hill_climb(s, cfg, alpha, rng);
  }
  canonicalize_sign(alpha);
  out.alpha = alpha;
  out.index_value = separation_index(s, alpha, cfg);
  return out;
}

ProjectionResult optimize_projection(const Dataset& d, const std::vector<int>& rows,
                                     const std::vector<int>& cols, const IndexConfig& cfg,
                                     std::uint64_t seed) {
  return optimize_projection_scatter(scatter(d, rows, cols), cfg, seed, cols);
}

void validate(const IndexConfig& cfg) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda < 1.0))
    fail(Errc::config, "index config: lambda must be in [0,1)");
}

}  // namespace ppf
