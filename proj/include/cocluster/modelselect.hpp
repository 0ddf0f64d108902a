#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cocluster/clusterers.hpp"
#include "cocluster/error.hpp"
#include "cocluster/matrix.hpp"
#include "cocluster/membership.hpp"
#include "cocluster/parallel.hpp"

namespace cocluster {

enum class ScoreStatus { ok, undefined, infinite, failed };

struct PseudoF {
  double value = 0.0;  // meaningful for ok only
  ScoreStatus status = ScoreStatus::ok;
  std::string message;  // why a cell failed

  bool defined() const noexcept { return status == ScoreStatus::ok || status == ScoreStatus::infinite; }
};

/// Between/within block deviance ratio
///
///   pF = (||H_U X H_V - xbar||^2 / (KQ - 1)) / (||X - H_U X H_V||^2 / (NJ - KQ))
///
/// where H_U X H_V replaces every entry by its block mean and xbar is the
/// global mean. Undefined when KQ = 1 or KQ = NJ; infinite when the block
/// means reproduce X.
inline PseudoF pseudo_f(const DenseMatrix& x, const Membership& u, const Membership& v) {
  detail::check_shapes(x, u, v);
  const std::size_t kq = u.n_clusters() * v.n_clusters();
  const std::size_t nj = x.rows() * x.cols();
  if (kq <= 1 || kq >= nj) return {0.0, ScoreStatus::undefined, {}};
  const DenseMatrix y = detail::block_means(x, u, v);
  double mean = 0.0;
  for (double e : x.values()) mean += e;
  mean /= static_cast<double>(nj);
  const auto n = u.sizes();
  const auto m = v.sizes();
  double between = 0.0;
  for (std::size_t k = 0; k < y.rows(); ++k)
    for (std::size_t q = 0; q < y.cols(); ++q) {
      const double d = y(k, q) - mean;
      between += static_cast<double>(n[k]) * static_cast<double>(m[q]) * d * d;
    }
  const double within = detail::residual_ss(x, u, v, y);
  double total = 0.0;
  for (double e : x.values()) total += (e - mean) * (e - mean);
  if (total == 0.0) return {0.0, ScoreStatus::ok, {}};
  if (within <= 1e-20 * total) return {std::numeric_limits<double>::infinity(), ScoreStatus::infinite, {}};
  const double value = (between / static_cast<double>(kq - 1)) / (within / static_cast<double>(nj - kq));
  return {value, ScoreStatus::ok, {}};
}

struct PseudoFGrid {
  std::vector<std::size_t> k_values;
  std::vector<std::size_t> q_values;
  std::vector<std::vector<PseudoF>> scores;  // [k index][q index]
  std::size_t best_k = 0;
  std::size_t best_q = 0;
  bool best_defined = false;  // false when no cell has a defined score
  std::vector<std::vector<std::optional<CoClusterModel>>> models;  // filled when kept
};

namespace detail {

inline bool better_score(const PseudoF& a, const PseudoF& b) {
  if (!a.defined()) return false;
  if (!b.defined()) return true;
  if (a.status == ScoreStatus::infinite) return b.status != ScoreStatus::infinite;
  if (b.status == ScoreStatus::infinite) return false;
  return a.value > b.value;
}

}  // namespace detail

/// Fits SDKM for every (K, Q) cell with `config` (same seed in every cell)
/// and scores the fitted partitions with pseudo_f on the row-normalized
/// data. A failing cell is marked failed and the search continues.
inline PseudoFGrid grid_search(const DenseMatrix& x, std::vector<std::size_t> k_values,
                               std::vector<std::size_t> q_values, const FitConfig& config,
                               bool keep_models = false) {
  if (k_values.empty() || q_values.empty()) throw ConfigError("grid ranges must be non-empty");
  PseudoFGrid grid;
  grid.k_values = std::move(k_values);
  grid.q_values = std::move(q_values);
  const std::size_t nk = grid.k_values.size();
  const std::size_t nq = grid.q_values.size();
  grid.scores.assign(nk, std::vector<PseudoF>(nq));
  grid.models.assign(nk, std::vector<std::optional<CoClusterModel>>(nq));
  const DenseMatrix xn = row_normalize(x).matrix;

  parallel_for(nk * nq, [&](std::size_t cell) {
    const std::size_t a = cell / nq;
    const std::size_t b = cell % nq;
    FitConfig cfg = config;
    cfg.algorithm = Algorithm::sdkm;
    cfg.n_row_clusters = grid.k_values[a];
    cfg.n_col_clusters = grid.q_values[b];
    try {
      CoClusterModel model = sdkm_fit(x, cfg);
      grid.scores[a][b] = pseudo_f(xn, model.u, model.v);
      if (keep_models) grid.models[a][b] = std::move(model);
    } catch (const Error& e) {
      grid.scores[a][b] = {0.0, ScoreStatus::failed, e.what()};
    }
  });

  std::size_t ba = 0, bb = 0;
  for (std::size_t a = 0; a < nk; ++a)
    for (std::size_t b = 0; b < nq; ++b)
      if (detail::better_score(grid.scores[a][b], grid.scores[ba][bb])) {
        ba = a;
        bb = b;
      }
  grid.best_k = grid.k_values[ba];
  grid.best_q = grid.q_values[bb];
  grid.best_defined = grid.scores[ba][bb].defined();
  return grid;
}

}  // namespace cocluster
