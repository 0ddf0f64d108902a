#pragma once

// Co-clustering fitters: spherical double k-means (SDKM), spherical k-means
// (SKM) and double k-means (DKM).
//
// SDKM works on the row-normalized data matrix Xn. For a row partition U and
// a column partition V its objective is the cosine between Xn and the
// reconstruction C U Y V', where Y holds block means and the diagonal C
// rescales every reconstructed row to the norm of the data row it models.
// Because rows of Xn have unit norm this equals
//
//     sum_k sqrt( sum_q T_kq^2 / m_q ) / sqrt( tr(Xn'Xn) * N_t )
//
// with T = U'Xn V the block sums, m_q the column cluster sizes and N_t the
// number of nonzero rows whose prototype row (Y V')_k is nonzero. The block
// mean update followed by row normalization maximizes this for fixed (U, V),
// and the cosine row rule maximizes it for fixed (Y, V), so the alternating
// scheme never decreases it. The batch column rule (argmax of x^j' (U Y)_q) is
// only a first-order step for this objective; when it would lower the value
// the columns are instead moved one at a time by exact gain, which keeps the
// trace monotone.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "cocluster/error.hpp"
#include "cocluster/matrix.hpp"
#include "cocluster/membership.hpp"
#include "cocluster/parallel.hpp"
#include "cocluster/random.hpp"

namespace cocluster {

enum class Algorithm { skm, dkm, sdkm };

inline std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::skm: return "skm";
    case Algorithm::dkm: return "dkm";
    case Algorithm::sdkm: return "sdkm";
  }
  return "sdkm";
}

inline Algorithm parse_algorithm(std::string_view s) {
  std::string lower(s);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "skm") return Algorithm::skm;
  if (lower == "dkm") return Algorithm::dkm;
  if (lower == "sdkm") return Algorithm::sdkm;
  throw ConfigError("unknown algorithm '" + std::string(s) + "' (expected skm, dkm or sdkm)");
}

struct FitConfig {
  std::size_t n_row_clusters = 2;  // K
  std::size_t n_col_clusters = 2;  // Q
  std::size_t n_starts = 20;
  std::size_t max_iter = 100;
  double tol = 1e-9;  // relative objective change
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::sdkm;
  // Hold U (resp. V) at the identity; requires K == N (resp. Q == J).
  bool freeze_rows = false;
  bool freeze_cols = false;

  void validate(std::size_t n_rows, std::size_t n_cols) const {
    if (n_row_clusters < 1) throw ConfigError("K must be >= 1");
    if (n_col_clusters < 1) throw ConfigError("Q must be >= 1");
    if (n_row_clusters > n_rows) {
      throw ConfigError("K = " + std::to_string(n_row_clusters) + " exceeds the number of rows N = " +
                        std::to_string(n_rows));
    }
    if (n_col_clusters > n_cols) {
      throw ConfigError("Q = " + std::to_string(n_col_clusters) +
                        " exceeds the number of columns J = " + std::to_string(n_cols));
    }
    if (n_starts < 1) throw ConfigError("n_starts must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
    if (freeze_rows && n_row_clusters != n_rows) throw ConfigError("freeze_rows requires K == N");
    if (freeze_cols && n_col_clusters != n_cols) throw ConfigError("freeze_cols requires Q == J");
  }
};

struct CoClusterModel {
  Membership u;
  Membership v;
  /// SDKM: row-normalized block means of Xn (K x Q). SKM: unit centroids
  /// (K x J). DKM: raw block means.
  DenseMatrix centroids;
  /// SDKM/SKM: normalized cosine objective (non-decreasing).
  /// DKM: squared residual ||X - U Y V'||^2 (non-increasing).
  /// Entry 0 is the value at the initial partitions.
  std::vector<double> objective_trace;
  bool converged = false;
  std::size_t n_iterations = 0;
  std::size_t best_start_index = 0;
  FitConfig config;
  double objective_raw = 0.0;         // tr(X'U Y V') on the fitted representation
  double objective_normalized = 0.0;  // cosine between X and the reconstruction
  std::vector<double> column_norms_of_centroids;
  std::vector<std::size_t> flagged_zero_rows;  // zero rows of the centroid matrix
  std::vector<std::size_t> zero_data_rows;     // all-zero rows of the input

  /// Final value of the optimized criterion.
  double objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

/// First k objects go to distinct clusters, the rest uniformly at random,
/// then the object order is shuffled. Every cluster is non-empty.
inline Membership random_membership(std::size_t n, std::size_t k, Rng& rng) {
  if (k == 0) throw ConfigError("cannot draw a membership with zero clusters");
  if (k > n) {
    throw ConfigError("cannot place " + std::to_string(n) + " objects into " + std::to_string(k) +
                      " non-empty clusters");
  }
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < k; ++i) labels[i] = i;
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  for (std::size_t i = k; i < n; ++i) labels[i] = pick(rng);
  std::shuffle(labels.begin(), labels.end(), rng);
  return Membership(std::move(labels), k);
}

namespace detail {

inline void check_shapes(const DenseMatrix& x, const Membership& u, const Membership& v) {
  if (u.n_objects() != x.rows()) {
    throw ConfigError("row membership covers " + std::to_string(u.n_objects()) +
                      " objects but the matrix has " + std::to_string(x.rows()) + " rows");
  }
  if (v.n_objects() != x.cols()) {
    throw ConfigError("column membership covers " + std::to_string(v.n_objects()) +
                      " objects but the matrix has " + std::to_string(x.cols()) + " columns");
  }
}

/// T = U'XV.
inline DenseMatrix block_sums(const DenseMatrix& x, const Membership& u, const Membership& v) {
  DenseMatrix t(u.n_clusters(), v.n_clusters());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    const std::size_t k = u[i];
    for (std::size_t j = 0; j < x.cols(); ++j) t(k, v[j]) += r[j];
  }
  return t;
}

/// (U'U)^{-1} U'XV (V'V)^{-1}.
inline DenseMatrix block_means(const DenseMatrix& x, const Membership& u, const Membership& v) {
  u.require_nonempty("U'U");
  v.require_nonempty("V'V");
  DenseMatrix y = block_sums(x, u, v);
  const auto n = u.sizes();
  const auto m = v.sizes();
  for (std::size_t k = 0; k < y.rows(); ++k)
    for (std::size_t q = 0; q < y.cols(); ++q)
      y(k, q) /= static_cast<double>(n[k]) * static_cast<double>(m[q]);
  return y;
}

/// XV: per-row sums over each column cluster (N x Q).
inline DenseMatrix row_block_sums(const DenseMatrix& x, const Membership& v) {
  DenseMatrix b(x.rows(), v.n_clusters());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    for (std::size_t j = 0; j < x.cols(); ++j) b(i, v[j]) += r[j];
  }
  return b;
}

/// U'X: per-column sums over each row cluster (K x J).
inline DenseMatrix col_block_sums(const DenseMatrix& x, const Membership& u) {
  DenseMatrix a(u.n_clusters(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    auto dst = a.row(u[i]);
    for (std::size_t j = 0; j < x.cols(); ++j) dst[j] += r[j];
  }
  return a;
}

/// Norm of each expanded prototype row (Y V')_k.
inline std::vector<double> prototype_norms(const DenseMatrix& y, const Membership& v) {
  const auto m = v.sizes();
  std::vector<double> out(y.rows(), 0.0);
  for (std::size_t k = 0; k < y.rows(); ++k) {
    double s = 0.0;
    for (std::size_t q = 0; q < y.cols(); ++q) s += static_cast<double>(m[q]) * y(k, q) * y(k, q);
    out[k] = std::sqrt(s);
  }
  return out;
}

/// Index of the best score; ties go to the lowest index.
template <class Better>
std::size_t arg_best(const std::vector<double>& scores, Better better) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c)
    if (better(scores[c], scores[best])) best = c;
  return best;
}

/// Fills empty clusters: for each empty cluster (lowest index first) the
/// object with the worst `fit` to its own cluster, taken from a cluster with
/// more than one member, is moved there. `higher_is_better` says whether a
/// larger fit value is a better fit.
inline void repair_empty_clusters(std::vector<std::size_t>& labels, std::size_t n_clusters,
                                  const std::vector<double>& fit, bool higher_is_better) {
  std::vector<std::size_t> sizes(n_clusters, 0);
  for (std::size_t l : labels) ++sizes[l];
  for (std::size_t e = 0; e < n_clusters; ++e) {
    if (sizes[e] != 0) continue;
    std::size_t worst = labels.size();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (sizes[labels[i]] < 2) continue;
      if (worst == labels.size()) {
        worst = i;
        continue;
      }
      const bool is_worse = higher_is_better ? fit[i] < fit[worst] : fit[i] > fit[worst];
      if (is_worse) worst = i;
    }
    if (worst == labels.size()) throw SingularError("cannot repair empty cluster: too few objects");
    --sizes[labels[worst]];
    labels[worst] = e;
    ++sizes[e];
  }
}

inline std::vector<double> column_norms(const DenseMatrix& y) {
  std::vector<double> out(y.cols(), 0.0);
  for (std::size_t k = 0; k < y.rows(); ++k)
    for (std::size_t q = 0; q < y.cols(); ++q) out[q] += y(k, q) * y(k, q);
  for (double& v : out) v = std::sqrt(v);
  return out;
}

inline std::vector<std::size_t> zero_row_indices(const DenseMatrix& y) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < y.rows(); ++k)
    if (norm(y.row(k)) == 0.0) out.push_back(k);
  return out;
}

}  // namespace detail

/// Block means (U'U)^{-1} U'XV (V'V)^{-1}, each row scaled to unit norm.
/// All-zero rows are left at zero and listed in `zero_rows`.
inline RowNormalized update_centroids_sdkm(const DenseMatrix& x, const Membership& u,
                                           const Membership& v) {
  detail::check_shapes(x, u, v);
  return row_normalize(detail::block_means(x, u, v));
}

/// Block means (U'U)^{-1} U'XV (V'V)^{-1}.
inline DenseMatrix update_centroids_dkm(const DenseMatrix& x, const Membership& u,
                                        const Membership& v) {
  detail::check_shapes(x, u, v);
  return detail::block_means(x, u, v);
}

struct ObjectiveValue {
  double raw = 0.0;         // tr(X'U Y V')
  double normalized = 0.0;  // cosine between X and C U Y V'
};

/// Raw trace tr(X'UYV') and its normalized form. The normalized value is
/// the cosine between X and the reconstruction C U Y V' in which C rescales
/// each reconstructed row to the norm of its data row; it is scale-free in
/// the rows of Y, lies in [-1, 1] and equals 1 when X = U Y V'. For
/// row-normalized X and centroids whose prototype rows have unit norm it
/// reduces to tr(X'X_t)/sqrt(tr(X'X) tr(X_t'X_t)).
inline ObjectiveValue sdkm_objective(const DenseMatrix& x, const Membership& u,
                                     const Membership& v, const DenseMatrix& centroids) {
  detail::check_shapes(x, u, v);
  if (centroids.rows() != u.n_clusters() || centroids.cols() != v.n_clusters()) {
    throw ConfigError("centroid matrix shape does not match the memberships");
  }
  const DenseMatrix b = detail::row_block_sums(x, v);
  const auto pnorm = detail::prototype_norms(centroids, v);
  ObjectiveValue out;
  double num = 0.0;
  double xx = 0.0;
  double tt = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t k = u[i];
    const double inner = dot(b.row(i), centroids.row(k));
    out.raw += inner;
    const double xnorm_sq = dot(x.row(i), x.row(i));
    xx += xnorm_sq;
    if (pnorm[k] > 0.0) {
      num += std::sqrt(xnorm_sq) * inner / pnorm[k];
      tt += xnorm_sq;
    }
  }
  if (xx == 0.0 || tt == 0.0) throw DomainError("normalized objective undefined: zero denominator");
  out.normalized = num / std::sqrt(xx * tt);
  return out;
}

/// Assigns each row to the prototype row of Y V' with the largest cosine
/// similarity (lowest index on ties). Scaling rows of `centroids` does not
/// change the result. Empty clusters are refilled with the rows that fit
/// their own prototype worst.
inline Membership update_row_memberships(const DenseMatrix& x, const DenseMatrix& centroids,
                                         const Membership& v) {
  if (v.n_objects() != x.cols()) throw ConfigError("column membership does not match the matrix");
  if (centroids.cols() != v.n_clusters()) throw ConfigError("centroids have the wrong width");
  const std::size_t n_clusters = centroids.rows();
  const DenseMatrix b = detail::row_block_sums(x, v);
  const auto pnorm = detail::prototype_norms(centroids, v);
  std::vector<std::size_t> labels(x.rows());
  std::vector<double> own(x.rows());
  std::vector<double> sim(n_clusters);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < n_clusters; ++k) {
      sim[k] = pnorm[k] > 0.0 ? dot(b.row(i), centroids.row(k)) / pnorm[k] : 0.0;
    }
    labels[i] = detail::arg_best(sim, [](double a, double c) { return a > c; });
    own[i] = sim[labels[i]];
  }
  detail::repair_empty_clusters(labels, n_clusters, own, true);
  return Membership(std::move(labels), n_clusters);
}

/// Assigns each column x^j to the cluster q maximizing x^j'(U Y)_q (lowest
/// index on ties), then refills empty clusters with the worst-fitting columns.
inline Membership update_col_memberships(const DenseMatrix& x, const Membership& u,
                                         const DenseMatrix& centroids) {
  if (u.n_objects() != x.rows()) throw ConfigError("row membership does not match the matrix");
  if (centroids.rows() != u.n_clusters()) throw ConfigError("centroids have the wrong height");
  const std::size_t n_clusters = centroids.cols();
  const DenseMatrix a = detail::col_block_sums(x, u);
  std::vector<std::size_t> labels(x.cols());
  std::vector<double> own(x.cols());
  std::vector<double> score(n_clusters);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    std::fill(score.begin(), score.end(), 0.0);
    for (std::size_t k = 0; k < centroids.rows(); ++k) {
      const double akj = a(k, j);
      if (akj == 0.0) continue;
      for (std::size_t q = 0; q < n_clusters; ++q) score[q] += akj * centroids(k, q);
    }
    labels[j] = detail::arg_best(score, [](double s, double c) { return s > c; });
    own[j] = score[labels[j]];
  }
  detail::repair_empty_clusters(labels, n_clusters, own, true);
  return Membership(std::move(labels), n_clusters);
}

namespace detail {

/// Block statistics of a (U, V) pair on row-normalized data, with the exact
/// single-object moves used by the SDKM fitter.
class SphericalBlocks {
 public:
  SphericalBlocks(const DenseMatrix& xn, Membership u, Membership v)
      : x_(xn), u_(std::move(u)), v_(std::move(v)) {
    row_nonzero_.resize(x_.rows());
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      const double s = dot(x_.row(i), x_.row(i));
      row_nonzero_[i] = s > 0.0;
      trace_xx_ += s;
    }
    rebuild();
  }

  const Membership& u() const noexcept { return u_; }
  const Membership& v() const noexcept { return v_; }

  void set_u(Membership u) {
    u_ = std::move(u);
    rebuild();
  }
  void set_v(Membership v) {
    v_ = std::move(v);
    rebuild();
  }

  double objective() const { return objective_of(total_f(), total_nt()); }

  /// Row-normalized block means.
  DenseMatrix centroids() const { return row_normalize(means()).matrix; }

  /// Block means scaled so every prototype row (Y V')_k has unit norm.
  DenseMatrix prototype_scaled_centroids() const {
    DenseMatrix y = means();
    const auto pn = prototype_norms(y, v_);
    for (std::size_t k = 0; k < y.rows(); ++k) {
      if (pn[k] == 0.0) continue;
      for (double& e : y.row(k)) e /= pn[k];
    }
    return y;
  }

  /// One pass of exact single-row moves. Returns true if any row moved.
  bool sweep_rows() {
    const std::size_t kc = u_.n_clusters();
    if (kc < 2) return false;
    const DenseMatrix b = row_block_sums(x_, v_);
    std::vector<std::size_t> labels = u_.labels();
    bool moved_any = false;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      const std::size_t k = labels[i];
      if (n_[k] < 2) continue;
      const auto bi = b.row(i);
      const double cur = objective();
      const double f = total_f();
      const std::size_t nt = total_nt();
      const std::size_t dz = row_nonzero_[i] ? 1 : 0;
      const double sk_new = shifted_row_s(k, bi, -1.0);
      double best = cur;
      std::size_t best_l = k;
      for (std::size_t l = 0; l < kc; ++l) {
        if (l == k) continue;
        const double sl_new = shifted_row_s(l, bi, +1.0);
        const double f_new = f - std::sqrt(s_[k]) - std::sqrt(s_[l]) + std::sqrt(sk_new) + std::sqrt(sl_new);
        const std::size_t nt_new = nt - active(k) - active(l) + (sk_new > 0.0 ? nz_[k] - dz : 0) +
                                   (sl_new > 0.0 ? nz_[l] + dz : 0);
        const double cand = objective_of(f_new, nt_new);
        if (cand > best + kMoveEps) {
          best = cand;
          best_l = l;
        }
      }
      if (best_l == k) continue;
      for (std::size_t q = 0; q < t_.cols(); ++q) {
        t_(k, q) -= bi[q];
        t_(best_l, q) += bi[q];
      }
      --n_[k];
      ++n_[best_l];
      nz_[k] -= dz;
      nz_[best_l] += dz;
      labels[i] = best_l;
      refresh_s(k);
      refresh_s(best_l);
      moved_any = true;
    }
    if (moved_any) set_u(Membership(std::move(labels), kc));
    return moved_any;
  }

  /// One pass of exact single-column moves. Returns true if any column moved.
  bool sweep_cols() {
    const std::size_t qc = v_.n_clusters();
    if (qc < 2) return false;
    const DenseMatrix a = col_block_sums(x_, u_);
    const std::size_t kc = u_.n_clusters();
    std::vector<std::size_t> labels = v_.labels();
    std::vector<double> s_new(kc);
    bool moved_any = false;
    for (std::size_t j = 0; j < x_.cols(); ++j) {
      const std::size_t p = labels[j];
      if (m_[p] < 2) continue;
      const double cur = objective();
      double best = cur;
      std::size_t best_q = p;
      const double mp = static_cast<double>(m_[p]);
      for (std::size_t q = 0; q < qc; ++q) {
        if (q == p) continue;
        const double mq = static_cast<double>(m_[q]);
        double f_new = 0.0;
        std::size_t nt_new = 0;
        for (std::size_t k = 0; k < kc; ++k) {
          const double akj = a(k, j);
          const double tp = t_(k, p);
          const double tq = t_(k, q);
          double s = s_[k] - tp * tp / mp - tq * tq / mq + (tp - akj) * (tp - akj) / (mp - 1.0) +
                     (tq + akj) * (tq + akj) / (mq + 1.0);
          s = std::max(s, 0.0);
          f_new += std::sqrt(s);
          if (s > 0.0) nt_new += nz_[k];
        }
        const double cand = objective_of(f_new, nt_new);
        if (cand > best + kMoveEps) {
          best = cand;
          best_q = q;
        }
      }
      if (best_q == p) continue;
      for (std::size_t k = 0; k < kc; ++k) {
        t_(k, p) -= a(k, j);
        t_(k, best_q) += a(k, j);
      }
      --m_[p];
      ++m_[best_q];
      labels[j] = best_q;
      for (std::size_t k = 0; k < kc; ++k) refresh_s(k);
      moved_any = true;
    }
    if (moved_any) set_v(Membership(std::move(labels), qc));
    return moved_any;
  }

 private:
  // Minimum gain for an exact move, well above the rounding error of the
  // incremental objective.
  static constexpr double kMoveEps = 1e-13;

  void rebuild() {
    t_ = block_sums(x_, u_, v_);
    n_ = u_.sizes();
    m_ = v_.sizes();
    nz_.assign(u_.n_clusters(), 0);
    for (std::size_t i = 0; i < x_.rows(); ++i)
      if (row_nonzero_[i]) ++nz_[u_[i]];
    s_.assign(u_.n_clusters(), 0.0);
    for (std::size_t k = 0; k < s_.size(); ++k) refresh_s(k);
  }

  void refresh_s(std::size_t k) {
    double s = 0.0;
    for (std::size_t q = 0; q < t_.cols(); ++q)
      if (m_[q] > 0) s += t_(k, q) * t_(k, q) / static_cast<double>(m_[q]);
    s_[k] = s;
  }

  double shifted_row_s(std::size_t k, std::span<const double> bi, double sign) const {
    double s = 0.0;
    for (std::size_t q = 0; q < t_.cols(); ++q) {
      if (m_[q] == 0) continue;
      const double t = t_(k, q) + sign * bi[q];
      s += t * t / static_cast<double>(m_[q]);
    }
    return s;
  }

  std::size_t active(std::size_t k) const { return s_[k] > 0.0 ? nz_[k] : 0; }

  double total_f() const {
    double f = 0.0;
    for (double s : s_) f += std::sqrt(s);
    return f;
  }

  std::size_t total_nt() const {
    std::size_t nt = 0;
    for (std::size_t k = 0; k < s_.size(); ++k) nt += active(k);
    return nt;
  }

  double objective_of(double f, std::size_t nt) const {
    if (nt == 0 || trace_xx_ == 0.0) return 0.0;
    return f / std::sqrt(trace_xx_ * static_cast<double>(nt));
  }

  DenseMatrix means() const {
    DenseMatrix y = t_;
    for (std::size_t k = 0; k < y.rows(); ++k)
      for (std::size_t q = 0; q < y.cols(); ++q)
        if (n_[k] > 0 && m_[q] > 0) y(k, q) /= static_cast<double>(n_[k]) * static_cast<double>(m_[q]);
    return y;
  }

  const DenseMatrix& x_;
  Membership u_;
  Membership v_;
  std::vector<bool> row_nonzero_;
  double trace_xx_ = 0.0;
  DenseMatrix t_;
  std::vector<std::size_t> n_, m_, nz_;
  std::vector<double> s_;
};

inline bool small_increase(double prev, double cur, double tol) {
  return (cur - prev) / std::max(std::abs(prev), 1e-300) < tol;
}

inline void finish_spherical(CoClusterModel& model, const DenseMatrix& xn) {
  model.objective_raw = sdkm_objective(xn, model.u, model.v, model.centroids).raw;
  model.objective_normalized = model.objective();
  model.column_norms_of_centroids = column_norms(model.centroids);
  model.flagged_zero_rows = zero_row_indices(model.centroids);
}

inline CoClusterModel sdkm_single(const DenseMatrix& xn, const FitConfig& cfg, Membership u0,
                                  Membership v0) {
  SphericalBlocks st(xn, std::move(u0), std::move(v0));
  CoClusterModel model;
  model.config = cfg;
  model.objective_trace.push_back(st.objective());
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    model.n_iterations = it + 1;
    if (!cfg.freeze_rows) st.set_u(update_row_memberships(xn, st.centroids(), st.v()));
    if (!cfg.freeze_cols) {
      const double before = st.objective();
      Membership previous = st.v();
      st.set_v(update_col_memberships(xn, st.u(), st.prototype_scaled_centroids()));
      if (st.objective() < before) {
        st.set_v(std::move(previous));
        st.sweep_cols();
      }
    }
    double f = st.objective();
    if (small_increase(model.objective_trace.back(), f, cfg.tol)) {
      bool moved = false;
      if (!cfg.freeze_rows) moved = st.sweep_rows() || moved;
      if (!cfg.freeze_cols) moved = st.sweep_cols() || moved;
      f = st.objective();
      if (!moved) {
        model.objective_trace.push_back(f);
        model.converged = true;
        break;
      }
    }
    model.objective_trace.push_back(f);
  }
  model.u = st.u();
  model.v = st.v();
  model.centroids = st.centroids();
  finish_spherical(model, xn);
  return model;
}

/// Spherical k-means on the rows of row-normalized data, written directly
/// in terms of unit centroid vectors.
inline CoClusterModel skm_single(const DenseMatrix& xn, const FitConfig& cfg, Membership u0) {
  const std::size_t n = xn.rows();
  const std::size_t d = xn.cols();
  const std::size_t kc = u0.n_clusters();
  std::vector<std::size_t> labels = u0.labels();
  std::vector<bool> nonzero(n);
  double trace_xx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = dot(xn.row(i), xn.row(i));
    nonzero[i] = s > 0.0;
    trace_xx += s;
  }

  DenseMatrix sums(kc, d);
  std::vector<std::size_t> sizes(kc), nz(kc);
  auto rebuild = [&] {
    sums = DenseMatrix(kc, d);
    std::fill(sizes.begin(), sizes.end(), 0);
    std::fill(nz.begin(), nz.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sums.row(labels[i]);
      const auto src = xn.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      ++sizes[labels[i]];
      if (nonzero[i]) ++nz[labels[i]];
    }
  };
  auto objective = [&](const DenseMatrix& s, const std::vector<std::size_t>& counts) {
    double f = 0.0;
    std::size_t nt = 0;
    for (std::size_t k = 0; k < kc; ++k) {
      const double len = norm(s.row(k));
      f += len;
      if (len > 0.0) nt += counts[k];
    }
    return nt == 0 ? 0.0 : f / std::sqrt(trace_xx * static_cast<double>(nt));
  };
  auto centroids = [&] {
    DenseMatrix c = sums;
    for (std::size_t k = 0; k < kc; ++k)
      for (double& e : c.row(k)) e /= static_cast<double>(std::max<std::size_t>(sizes[k], 1));
    return row_normalize(c).matrix;
  };

  rebuild();
  CoClusterModel model;
  model.config = cfg;
  model.objective_trace.push_back(objective(sums, nz));
  std::vector<double> sim(kc);
  std::vector<double> own(n);
  constexpr double kMoveEps = 1e-13;

  // First-variation pass: move single rows when that raises the objective.
  auto refine = [&] {
    if (kc < 2) return false;
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = labels[i];
      if (sizes[k] < 2) continue;
      const auto xi = xn.row(i);
      const double cur = objective(sums, nz);
      double best = cur;
      std::size_t best_l = k;
      for (std::size_t l = 0; l < kc; ++l) {
        if (l == k) continue;
        DenseMatrix trial = sums;
        std::vector<std::size_t> trial_nz = nz;
        for (std::size_t j = 0; j < d; ++j) {
          trial(k, j) -= xi[j];
          trial(l, j) += xi[j];
        }
        if (nonzero[i]) {
          --trial_nz[k];
          ++trial_nz[l];
        }
        const double cand = objective(trial, trial_nz);
        if (cand > best + kMoveEps) {
          best = cand;
          best_l = l;
        }
      }
      if (best_l == k) continue;
      labels[i] = best_l;
      rebuild();
      moved = true;
    }
    return moved;
  };

  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    model.n_iterations = it + 1;
    const DenseMatrix c = centroids();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < kc; ++k) sim[k] = dot(xn.row(i), c.row(k));
      labels[i] = detail::arg_best(sim, [](double a, double b) { return a > b; });
      own[i] = sim[labels[i]];
    }
    repair_empty_clusters(labels, kc, own, true);
    rebuild();
    double f = objective(sums, nz);
    if (small_increase(model.objective_trace.back(), f, cfg.tol)) {
      const bool moved = refine();
      f = objective(sums, nz);
      if (!moved) {
        model.objective_trace.push_back(f);
        model.converged = true;
        break;
      }
    }
    model.objective_trace.push_back(f);
  }
  model.u = Membership(labels, kc);
  model.v = Membership::identity(d);
  model.centroids = centroids();
  finish_spherical(model, xn);
  return model;
}

inline double residual_ss(const DenseMatrix& x, const Membership& u, const Membership& v,
                          const DenseMatrix& y) {
  double ss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto r = x.row(i);
    const auto yr = y.row(u[i]);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double e = r[j] - yr[v[j]];
      ss += e * e;
    }
  }
  return ss;
}

inline Membership dkm_row_step(const DenseMatrix& x, const DenseMatrix& y, const Membership& v) {
  const std::size_t kc = y.rows();
  const DenseMatrix b = row_block_sums(x, v);
  const auto m = v.sizes();
  std::vector<double> len_sq(kc, 0.0);
  for (std::size_t k = 0; k < kc; ++k)
    for (std::size_t q = 0; q < y.cols(); ++q) len_sq[k] += static_cast<double>(m[q]) * y(k, q) * y(k, q);
  std::vector<std::size_t> labels(x.rows());
  std::vector<double> own(x.rows());
  std::vector<double> dist(kc);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double xx = dot(x.row(i), x.row(i));
    for (std::size_t k = 0; k < kc; ++k) dist[k] = xx - 2.0 * dot(b.row(i), y.row(k)) + len_sq[k];
    labels[i] = arg_best(dist, [](double a, double c) { return a < c; });
    own[i] = dist[labels[i]];
  }
  repair_empty_clusters(labels, kc, own, false);
  return Membership(std::move(labels), kc);
}

inline Membership dkm_col_step(const DenseMatrix& x, const Membership& u, const DenseMatrix& y) {
  const std::size_t qc = y.cols();
  const DenseMatrix a = col_block_sums(x, u);
  const auto n = u.sizes();
  std::vector<double> len_sq(qc, 0.0);
  for (std::size_t k = 0; k < y.rows(); ++k)
    for (std::size_t q = 0; q < qc; ++q) len_sq[q] += static_cast<double>(n[k]) * y(k, q) * y(k, q);
  std::vector<double> col_sq(x.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) col_sq[j] += x(i, j) * x(i, j);
  std::vector<std::size_t> labels(x.cols());
  std::vector<double> own(x.cols());
  std::vector<double> dist(qc);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    for (std::size_t q = 0; q < qc; ++q) {
      double cross = 0.0;
      for (std::size_t k = 0; k < y.rows(); ++k) cross += a(k, j) * y(k, q);
      dist[q] = col_sq[j] - 2.0 * cross + len_sq[q];
    }
    labels[j] = arg_best(dist, [](double s, double c) { return s < c; });
    own[j] = dist[labels[j]];
  }
  repair_empty_clusters(labels, qc, own, false);
  return Membership(std::move(labels), qc);
}

inline CoClusterModel dkm_single(const DenseMatrix& x, const FitConfig& cfg, Membership u,
                                 Membership v) {
  CoClusterModel model;
  model.config = cfg;
  DenseMatrix y = block_means(x, u, v);
  model.objective_trace.push_back(residual_ss(x, u, v, y));
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    model.n_iterations = it + 1;
    if (!cfg.freeze_rows) {
      u = dkm_row_step(x, y, v);
      y = block_means(x, u, v);
    }
    if (!cfg.freeze_cols) {
      v = dkm_col_step(x, u, y);
      y = block_means(x, u, v);
    }
    const double prev = model.objective_trace.back();
    const double ss = residual_ss(x, u, v, y);
    model.objective_trace.push_back(ss);
    if ((prev - ss) / std::max(std::abs(prev), 1e-300) < cfg.tol) {
      model.converged = true;
      break;
    }
  }
  model.u = std::move(u);
  model.v = std::move(v);
  model.centroids = std::move(y);
  model.objective_raw = trace_product(x, multiply(multiply(to_matrix(model.u), model.centroids),
                                                  to_matrix(model.v).transpose()));
  const DenseMatrix xt =
      multiply(multiply(to_matrix(model.u), model.centroids), to_matrix(model.v).transpose());
  model.objective_normalized =
      frobenius_sq(xt) > 0.0 && frobenius_sq(x) > 0.0 ? normalized_cosine_objective(x, xt) : 0.0;
  model.column_norms_of_centroids = column_norms(model.centroids);
  model.flagged_zero_rows = zero_row_indices(model.centroids);
  return model;
}

inline bool better_model(const CoClusterModel& a, const CoClusterModel& b, Algorithm alg) {
  return alg == Algorithm::dkm ? a.objective() < b.objective() : a.objective() > b.objective();
}

}  // namespace detail

/// Initial (U, V) of start `start_index`: U is drawn first, then V, from a
/// stream seeded by derive_seed(seed, start_index). Frozen sides are the
/// identity and consume no draws.
inline std::pair<Membership, Membership> initial_memberships(std::size_t n_rows, std::size_t n_cols,
                                                             const FitConfig& cfg,
                                                             std::size_t start_index) {
  Rng rng(derive_seed(cfg.seed, start_index));
  Membership u = cfg.freeze_rows ? Membership::identity(n_rows)
                                 : random_membership(n_rows, cfg.n_row_clusters, rng);
  Membership v;
  if (cfg.algorithm == Algorithm::skm || cfg.freeze_cols) {
    v = Membership::identity(n_cols);
  } else {
    v = random_membership(n_cols, cfg.n_col_clusters, rng);
  }
  return {std::move(u), std::move(v)};
}

/// Runs the configured algorithm once from the given initial partitions.
/// SDKM and SKM row-normalize `x` first; DKM uses it as is.
inline CoClusterModel fit_from(const DenseMatrix& x, const FitConfig& cfg, Membership u0,
                               Membership v0) {
  FitConfig c = cfg;
  if (c.algorithm == Algorithm::skm) {
    c.n_col_clusters = x.cols();
    c.freeze_cols = true;
  }
  c.validate(x.rows(), x.cols());
  detail::check_shapes(x, u0, v0);
  u0.require_nonempty("U'U");
  v0.require_nonempty("V'V");
  if (frobenius_sq(x) == 0.0) throw DomainError("cannot fit an all-zero matrix");
  CoClusterModel model;
  if (c.algorithm == Algorithm::dkm) {
    model = detail::dkm_single(x, c, std::move(u0), std::move(v0));
  } else {
    RowNormalized xn = row_normalize(x);
    model = c.algorithm == Algorithm::skm ? detail::skm_single(xn.matrix, c, std::move(u0))
                                          : detail::sdkm_single(xn.matrix, c, std::move(u0), std::move(v0));
    model.zero_data_rows = std::move(xn.zero_rows);
  }
  return model;
}

/// Best of `n_starts` seeded random initializations (highest objective for
/// SDKM/SKM, lowest residual for DKM; ties go to the lowest start index).
/// Starts run concurrently; the result depends only on (x, config).
inline CoClusterModel multi_start(const DenseMatrix& x, const FitConfig& cfg) {
  FitConfig c = cfg;
  if (c.algorithm == Algorithm::skm) {
    c.n_col_clusters = x.cols();
    c.freeze_cols = true;
  }
  c.validate(x.rows(), x.cols());
  std::vector<CoClusterModel> models(c.n_starts);
  parallel_for(c.n_starts, [&](std::size_t s) {
    auto [u0, v0] = initial_memberships(x.rows(), x.cols(), c, s);
    models[s] = fit_from(x, c, std::move(u0), std::move(v0));
    models[s].best_start_index = s;
  });
  std::size_t best = 0;
  for (std::size_t s = 1; s < models.size(); ++s)
    if (detail::better_model(models[s], models[best], c.algorithm)) best = s;
  CoClusterModel out = std::move(models[best]);
  out.config = c;
  return out;
}

inline CoClusterModel sdkm_fit(const DenseMatrix& x, FitConfig cfg) {
  cfg.algorithm = Algorithm::sdkm;
  return multi_start(x, cfg);
}

inline CoClusterModel skm_fit(const DenseMatrix& x, std::size_t k, FitConfig cfg) {
  cfg.algorithm = Algorithm::skm;
  cfg.n_row_clusters = k;
  return multi_start(x, cfg);
}

inline CoClusterModel dkm_fit(const DenseMatrix& x, FitConfig cfg) {
  cfg.algorithm = Algorithm::dkm;
  return multi_start(x, cfg);
}

}  // namespace cocluster
