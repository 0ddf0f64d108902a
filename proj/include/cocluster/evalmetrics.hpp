#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "cocluster/clusterers.hpp"
#include "cocluster/error.hpp"
#include "cocluster/matrix.hpp"
#include "cocluster/membership.hpp"

namespace cocluster {

using CountMatrix = std::vector<std::vector<std::size_t>>;

/// Cell (a, b) counts objects in cluster a of p1 and cluster b of p2.
inline CountMatrix contingency(const Membership& p1, const Membership& p2) {
  if (p1.n_objects() != p2.n_objects()) {
    throw ConfigError("partitions cover " + std::to_string(p1.n_objects()) + " and " +
                      std::to_string(p2.n_objects()) + " objects");
  }
  CountMatrix t(p1.n_clusters(), std::vector<std::size_t>(p2.n_clusters(), 0));
  for (std::size_t i = 0; i < p1.n_objects(); ++i) ++t[p1[i]][p2[i]];
  return t;
}

/// Hubert-Arabie adjusted Rand index. When the expected and maximum index
/// coincide (both partitions trivial in the same way) the result is 1 for
/// identical partitions and 0 otherwise.
inline double ari(const Membership& p1, const Membership& p2) {
  // Pair counts are integers; the index is formed as one ratio of exact
  // integers so simple cases like -1/2 come out exactly.
  using wide = __int128;
  const CountMatrix t = contingency(p1, p2);
  auto choose2 = [](std::size_t v) { return static_cast<wide>(v) * (static_cast<wide>(v) - 1) / 2; };
  wide sum_cells = 0;
  std::vector<std::size_t> rows(p1.n_clusters(), 0), cols(p2.n_clusters(), 0);
  for (std::size_t a = 0; a < t.size(); ++a) {
    for (std::size_t b = 0; b < t[a].size(); ++b) {
      sum_cells += choose2(t[a][b]);
      rows[a] += t[a][b];
      cols[b] += t[a][b];
    }
  }
  wide sum_rows = 0, sum_cols = 0;
  for (auto r : rows) sum_rows += choose2(r);
  for (auto c : cols) sum_cols += choose2(c);
  const wide pairs = choose2(p1.n_objects());
  if (pairs == 0) return 1.0;
  // ARI = (pairs*S - R*C) / (pairs*(R+C)/2 - R*C), both sides doubled.
  const wide num = 2 * (pairs * sum_cells - sum_rows * sum_cols);
  const wide denom = pairs * (sum_rows + sum_cols) - 2 * sum_rows * sum_cols;
  if (denom == 0) return sum_cells == sum_rows && sum_cells == sum_cols ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(denom);
}

/// perm[b] = true cluster matched to estimated cluster b, chosen to maximize
/// the contingency trace. Exhaustive for K <= 8, greedy above.
inline std::vector<std::size_t> align_clusters(const Membership& true_p, const Membership& est_p) {
  if (true_p.n_clusters() != est_p.n_clusters()) {
    throw ConfigError("cannot align " + std::to_string(est_p.n_clusters()) + " estimated clusters to " +
                      std::to_string(true_p.n_clusters()) + " true clusters");
  }
  const CountMatrix t = contingency(true_p, est_p);
  const std::size_t k = true_p.n_clusters();
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  if (k <= 8) {
    std::vector<std::size_t> best = perm;
    std::size_t best_score = 0;
    bool first = true;
    do {
      std::size_t score = 0;
      for (std::size_t b = 0; b < k; ++b) score += t[perm[b]][b];
      if (first || score > best_score) {
        best = perm;
        best_score = score;
        first = false;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  // Greedy: repeatedly take the largest remaining cell.
  std::vector<bool> used_true(k, false), used_est(k, false);
  for (std::size_t step = 0; step < k; ++step) {
    std::size_t ba = 0, bb = 0;
    bool found = false;
    for (std::size_t a = 0; a < k; ++a) {
      if (used_true[a]) continue;
      for (std::size_t b = 0; b < k; ++b) {
        if (used_est[b]) continue;
        if (!found || t[a][b] > t[ba][bb]) {
          ba = a;
          bb = b;
          found = true;
        }
      }
    }
    used_true[ba] = used_est[bb] = true;
    perm[bb] = ba;
  }
  return perm;
}

struct RmseResult {
  double rmse = 0.0;
  std::optional<double> nrmse1;  // empty when true_y is constant
  std::optional<double> nrmse2;  // empty when true_y has zero centered norm
};

/// Compares est_y to true_y after mapping estimated row cluster b to true
/// row cluster align_u[b] and likewise for columns.
inline RmseResult centroid_rmse(const DenseMatrix& true_y, const DenseMatrix& est_y,
                                const std::vector<std::size_t>& align_u,
                                const std::vector<std::size_t>& align_v) {
  if (true_y.rows() != est_y.rows() || true_y.cols() != est_y.cols()) {
    throw ConfigError("centroid matrices have different shapes");
  }
  if (align_u.size() != est_y.rows() || align_v.size() != est_y.cols()) {
    throw ConfigError("alignment permutations do not match the centroid shape");
  }
  const std::size_t k = true_y.rows();
  const std::size_t q = true_y.cols();
  double ss = 0.0;
  for (std::size_t b = 0; b < k; ++b)
    for (std::size_t c = 0; c < q; ++c) {
      const double e = est_y(b, c) - true_y(align_u[b], align_v[c]);
      ss += e * e;
    }
  RmseResult out;
  const double cells = static_cast<double>(k * q);
  out.rmse = std::sqrt(ss / cells);
  const auto [lo, hi] = std::minmax_element(true_y.values().begin(), true_y.values().end());
  if (*hi > *lo) out.nrmse1 = out.rmse / (*hi - *lo);
  const double mean = std::accumulate(true_y.values().begin(), true_y.values().end(), 0.0) / cells;
  double centered = 0.0;
  for (double v : true_y.values()) centered += (v - mean) * (v - mean);
  if (centered > 0.0) out.nrmse2 = out.rmse / std::sqrt(centered);
  return out;
}

/// True iff the fit stopped strictly below the planted solution.
inline bool detect_local_maximum(double fit_objective, double true_objective, double tol = 1e-9) {
  return fit_objective < true_objective - tol;
}

/// Normalized SDKM objective of the planted partitions after one centroid
/// update on the row-normalized data.
inline double true_objective(const DenseMatrix& x, const Membership& true_u, const Membership& true_v) {
  const DenseMatrix xn = row_normalize(x).matrix;
  const DenseMatrix y = update_centroids_sdkm(xn, true_u, true_v).matrix;
  return sdkm_objective(xn, true_u, true_v, y).normalized;
}

struct RecoveryReport {
  double ari_u = 0.0;
  double ari_v = 0.0;
  double rmse = 0.0;
  std::optional<double> nrmse1;
  std::optional<double> nrmse2;
  std::vector<std::size_t> alignment_u;
  std::vector<std::size_t> alignment_v;
};

inline RecoveryReport recovery_report(const Membership& true_u, const Membership& true_v,
                                      const DenseMatrix& true_y, const Membership& est_u,
                                      const Membership& est_v, const DenseMatrix& est_y) {
  RecoveryReport r;
  r.ari_u = ari(true_u, est_u);
  r.ari_v = ari(true_v, est_v);
  r.alignment_u = align_clusters(true_u, est_u);
  r.alignment_v = align_clusters(true_v, est_v);
  const RmseResult e = centroid_rmse(true_y, est_y, r.alignment_u, r.alignment_v);
  r.rmse = e.rmse;
  r.nrmse1 = e.nrmse1;
  r.nrmse2 = e.nrmse2;
  return r;
}

}  // namespace cocluster
