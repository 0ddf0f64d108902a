#pragma once

// Monte-Carlo studies on planted data: (K, Q) selection by pseudo-F,
// partition/centroid recovery, and local-maximum rates by number of starts.
//
// Run g of a study (counted across noise levels) uses the sub-seed
// derive_seed(seed, g): the dataset is generated from it and the fit seed
// is mix64 of it, so any single run can be replayed on its own.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cocluster/clusterers.hpp"
#include "cocluster/evalmetrics.hpp"
#include "cocluster/io.hpp"
#include "cocluster/modelselect.hpp"
#include "cocluster/parallel.hpp"
#include "cocluster/random.hpp"
#include "cocluster/synthgen.hpp"

namespace cocluster {

struct NoiseLevel {
  double eps_centroid = 0.0;
  double eps_cluster = 0.0;
};

struct StudyDims {
  std::size_t n = 100;
  std::size_t j = 6;
  std::size_t k = 3;
  std::size_t q = 2;
};

// ---------------------------------------------------------------- select

struct SelectRun {
  std::size_t run_id = 0;  // 1-based, across levels
  NoiseLevel eps;
  std::uint64_t seed = 0;
  std::size_t best_k = 0;
  std::size_t best_q = 0;
  bool best_defined = false;
};

inline std::vector<SelectRun> run_select_study(const StudyDims& dims, const std::vector<NoiseLevel>& levels,
                                               std::size_t runs, const std::vector<std::size_t>& k_values,
                                               const std::vector<std::size_t>& q_values, const FitConfig& base,
                                               std::uint64_t seed) {
  std::vector<SelectRun> out(levels.size() * runs);
  parallel_for(out.size(), [&](std::size_t g) {
    const NoiseLevel& lv = levels[g / runs];
    const std::uint64_t s = derive_seed(seed, g);
    const auto ds = gen_dataset(dims.n, dims.j, dims.k, dims.q, lv.eps_centroid, lv.eps_cluster, s);
    FitConfig cfg = base;
    cfg.seed = mix64(s);
    const PseudoFGrid grid = grid_search(ds.x, k_values, q_values, cfg);
    out[g] = {g + 1, lv, s, grid.best_k, grid.best_q, grid.best_defined};
  });
  return out;
}

inline std::string select_runs_csv(const std::vector<SelectRun>& runs) {
  std::string out = "run_id,eps_centroid,eps_cluster,seed,best_k,best_q\n";
  for (const auto& r : runs) {
    out += std::to_string(r.run_id) + "," + format_param(r.eps.eps_centroid) + "," + format_param(r.eps.eps_cluster) +
           "," + std::to_string(r.seed) + "," + (r.best_defined ? std::to_string(r.best_k) : "NA") + "," +
           (r.best_defined ? std::to_string(r.best_q) : "NA") + "\n";
  }
  return out;
}

/// Selection counts per level and grid cell, in level then K then Q order.
inline std::string select_summary_csv(const std::vector<SelectRun>& runs, const std::vector<NoiseLevel>& levels,
                                      const std::vector<std::size_t>& k_values,
                                      const std::vector<std::size_t>& q_values) {
  std::string out = "eps_centroid,eps_cluster,K,Q,count\n";
  const std::size_t per_level = levels.empty() ? 0 : runs.size() / levels.size();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;
    for (std::size_t r = l * per_level; r < (l + 1) * per_level; ++r)
      if (runs[r].best_defined) ++counts[{runs[r].best_k, runs[r].best_q}];
    for (auto k : k_values)
      for (auto q : q_values)
        out += format_param(levels[l].eps_centroid) + "," + format_param(levels[l].eps_cluster) + "," +
               std::to_string(k) + "," + std::to_string(q) + "," + std::to_string(counts[{k, q}]) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- recover

struct RecoverRun {
  std::size_t run_id = 0;
  NoiseLevel eps;
  std::uint64_t seed = 0;
  RecoveryReport report;
  double objective = 0.0;
  bool converged = false;
  std::size_t n_iterations = 0;
};

inline RecoverRun recover_once(const StudyDims& dims, const NoiseLevel& lv, const FitConfig& base, std::uint64_t s) {
  const auto ds = gen_dataset(dims.n, dims.j, dims.k, dims.q, lv.eps_centroid, lv.eps_cluster, s);
  FitConfig cfg = base;
  cfg.algorithm = Algorithm::sdkm;
  cfg.n_row_clusters = dims.k;
  cfg.n_col_clusters = dims.q;
  cfg.seed = mix64(s);
  const CoClusterModel m = multi_start(ds.x, cfg);
  RecoverRun r;
  r.eps = lv;
  r.seed = s;
  r.report = recovery_report(ds.true_u, ds.true_v, ds.true_y, m.u, m.v, m.centroids);
  r.objective = m.objective();
  r.converged = m.converged;
  r.n_iterations = m.n_iterations;
  return r;
}

inline std::vector<RecoverRun> run_recover_study(const StudyDims& dims, const std::vector<NoiseLevel>& levels,
                                                 std::size_t runs, const FitConfig& base, std::uint64_t seed) {
  std::vector<RecoverRun> out(levels.size() * runs);
  parallel_for(out.size(), [&](std::size_t g) {
    out[g] = recover_once(dims, levels[g / runs], base, derive_seed(seed, g));
    out[g].run_id = g + 1;
  });
  return out;
}

inline std::string optional_full(const std::optional<double>& v) { return v ? format_full(*v) : "NA"; }

inline std::string recovery_csv_header() {
  return "run_id,eps,ari_u,ari_v,rmse,nrmse1,nrmse2,objective,converged,n_iterations,seed,eps_cluster\n";
}

inline std::string recovery_csv_row(const RecoverRun& r) {
  return std::to_string(r.run_id) + "," + format_param(r.eps.eps_centroid) + "," + format_full(r.report.ari_u) + "," +
         format_full(r.report.ari_v) + "," + format_full(r.report.rmse) + "," + optional_full(r.report.nrmse1) + "," +
         optional_full(r.report.nrmse2) + "," + format_full(r.objective) + "," + (r.converged ? "true" : "false") +
         "," + std::to_string(r.n_iterations) + "," + std::to_string(r.seed) + "," + format_param(r.eps.eps_cluster) +
         "\n";
}

inline std::string recover_runs_csv(const std::vector<RecoverRun>& runs) {
  std::string out = recovery_csv_header();
  for (const auto& r : runs) out += recovery_csv_row(r);
  return out;
}

struct Moments {
  double mean = 0.0;
  double median = 0.0;
  std::size_t n = 0;
};

/// Mean in input order and median of the sorted values.
inline Moments moments(std::vector<double> v) {
  Moments m;
  m.n = v.size();
  if (v.empty()) return m;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / static_cast<double>(v.size());
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  m.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  return m;
}

struct RecoverSummary {
  NoiseLevel eps;
  Moments ari_u, ari_v, rmse, nrmse1, nrmse2;
};

inline std::vector<RecoverSummary> summarize_recover(const std::vector<RecoverRun>& runs,
                                                     const std::vector<NoiseLevel>& levels) {
  std::vector<RecoverSummary> out;
  const std::size_t per_level = levels.empty() ? 0 : runs.size() / levels.size();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    std::vector<double> au, av, rm, n1, n2;
    for (std::size_t r = l * per_level; r < (l + 1) * per_level; ++r) {
      const auto& rep = runs[r].report;
      au.push_back(rep.ari_u);
      av.push_back(rep.ari_v);
      rm.push_back(rep.rmse);
      if (rep.nrmse1) n1.push_back(*rep.nrmse1);
      if (rep.nrmse2) n2.push_back(*rep.nrmse2);
    }
    out.push_back({levels[l], moments(au), moments(av), moments(rm), moments(n1), moments(n2)});
  }
  return out;
}

/// decimals < 0: full precision.
inline std::string recover_summary_csv(const std::vector<RecoverSummary>& rows, int decimals) {
  auto f = [&](double v) { return decimals < 0 ? format_full(v) : format_fixed(v, decimals); };
  auto mm = [&](const Moments& m) { return m.n == 0 ? std::string("NA,NA") : f(m.mean) + "," + f(m.median); };
  std::string out =
      "eps,eps_cluster,runs,ari_u_mean,ari_u_median,ari_v_mean,ari_v_median,rmse_mean,rmse_median,"
      "nrmse1_mean,nrmse1_median,nrmse2_mean,nrmse2_median\n";
  for (const auto& r : rows) {
    out += format_param(r.eps.eps_centroid) + "," + format_param(r.eps.eps_cluster) + "," + std::to_string(r.ari_u.n) +
           "," + mm(r.ari_u) + "," + mm(r.ari_v) + "," + mm(r.rmse) + "," + mm(r.nrmse1) + "," + mm(r.nrmse2) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------- starts

struct StartsRun {
  std::size_t run_id = 0;  // repetition, 1-based
  std::size_t n_starts = 0;
  NoiseLevel eps;
  std::uint64_t data_seed = 0;
  std::uint64_t fit_seed = 0;
  double objective = 0.0;
  double true_objective = 0.0;
  bool local_max = false;
};

/// For every repetition r and start count s, fits SDKM with s starts and
/// flags a local maximum when the fitted objective falls below the planted
/// partitions' objective. Fit seeds do not depend on s, so the s-start
/// search of a repetition contains every smaller search of it. With
/// `same_data` all repetitions share one dataset; otherwise each draws its
/// own.
inline std::vector<StartsRun> run_starts_study(const StudyDims& dims, const NoiseLevel& lv, std::size_t runs,
                                               const std::vector<std::size_t>& start_counts, const FitConfig& base,
                                               std::uint64_t seed, bool same_data, double tol = 1e-9) {
  std::vector<StartsRun> out(runs * start_counts.size());
  std::optional<SyntheticDataset> shared;
  double shared_true = 0.0;
  if (same_data) {
    shared = gen_dataset(dims.n, dims.j, dims.k, dims.q, lv.eps_centroid, lv.eps_cluster, mix64(seed));
    shared_true = true_objective(shared->x, shared->true_u, shared->true_v);
  }
  parallel_for(runs, [&](std::size_t r) {
    const std::uint64_t s = derive_seed(seed, r);
    const std::uint64_t data_seed = same_data ? mix64(seed) : s;
    const SyntheticDataset ds =
        same_data ? *shared : gen_dataset(dims.n, dims.j, dims.k, dims.q, lv.eps_centroid, lv.eps_cluster, s);
    const double t_obj = same_data ? shared_true : true_objective(ds.x, ds.true_u, ds.true_v);
    for (std::size_t c = 0; c < start_counts.size(); ++c) {
      FitConfig cfg = base;
      cfg.algorithm = Algorithm::sdkm;
      cfg.n_row_clusters = dims.k;
      cfg.n_col_clusters = dims.q;
      cfg.n_starts = start_counts[c];
      cfg.seed = mix64(s);
      const CoClusterModel m = multi_start(ds.x, cfg);
      StartsRun& row = out[c * runs + r];
      row = {r + 1, start_counts[c], lv, data_seed, cfg.seed, m.objective(), t_obj,
             detect_local_maximum(m.objective(), t_obj, tol)};
    }
  });
  return out;
}

inline std::string starts_runs_csv(const std::vector<StartsRun>& runs) {
  std::string out = "run_id,n_starts,eps_centroid,eps_cluster,data_seed,fit_seed,objective,true_objective,local_max\n";
  for (const auto& r : runs) {
    out += std::to_string(r.run_id) + "," + std::to_string(r.n_starts) + "," + format_param(r.eps.eps_centroid) + "," +
           format_param(r.eps.eps_cluster) + "," + std::to_string(r.data_seed) + "," + std::to_string(r.fit_seed) + "," +
           format_full(r.objective) + "," + format_full(r.true_objective) + "," + (r.local_max ? "1" : "0") + "\n";
  }
  return out;
}

struct StartsSummary {
  std::size_t n_starts = 0;
  std::size_t runs = 0;
  std::size_t local_maxima = 0;
  double percent() const { return runs == 0 ? 0.0 : 100.0 * static_cast<double>(local_maxima) / static_cast<double>(runs); }
};

inline std::vector<StartsSummary> summarize_starts(const std::vector<StartsRun>& runs,
                                                   const std::vector<std::size_t>& start_counts) {
  std::vector<StartsSummary> out;
  for (auto s : start_counts) {
    StartsSummary row{s, 0, 0};
    for (const auto& r : runs) {
      if (r.n_starts != s) continue;
      ++row.runs;
      row.local_maxima += r.local_max ? 1 : 0;
    }
    out.push_back(row);
  }
  return out;
}

inline std::string starts_summary_csv(const std::vector<StartsSummary>& rows) {
  std::string out = "n_starts,runs,local_maxima,local_maxima_pct\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n_starts) + "," + std::to_string(r.runs) + "," + std::to_string(r.local_maxima) + "," +
           format_full(r.percent()) + "\n";
  }
  return out;
}

}  // namespace cocluster
