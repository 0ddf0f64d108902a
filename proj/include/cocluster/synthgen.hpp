#pragma once

// Planted co-cluster generator.
//
//   Y_pert = Y + eps_cluster * W        (W: K x Q standard normal)
//   X      = U Y_pert V' + eps_centroid * Z   (Z: N x J standard normal)
//
// Y holds the vertices of a regular simplex embedded in Q dimensions.

#include <cmath>
#include <cstdint>

#include "cocluster/clusterers.hpp"
#include "cocluster/error.hpp"
#include "cocluster/matrix.hpp"
#include "cocluster/membership.hpp"
#include "cocluster/random.hpp"

namespace cocluster {

/// Random membership with every cluster non-empty (see random_membership).
inline Membership gen_membership(std::size_t n, std::size_t k, Rng& rng) {
  return random_membership(n, k, rng);
}

struct SimplexCentroids {
  DenseMatrix centroids;   // K x Q, unit rows
  bool truncated = false;  // Q < K - 1: rows are not exactly equidistant
};

/// Vertices of a regular (K-1)-simplex in Q dimensions, as unit rows.
///
/// The centered unit vectors e_1..e_K span a (K-1)-dimensional space with
/// the real Fourier basis cos(2 pi m r / K), sin(2 pi m r / K), m = 1, 2, ...
/// (plus the alternating vector when K is even). Coordinates in that basis,
/// lowest frequency first, give the regular simplex when Q >= K - 1 (extra
/// columns are zero) and a truncated embedding otherwise; Q = 2 yields the
/// regular K-gon. Every row is nonzero. K = 1 yields (1, ..., 1)/sqrt(Q).
inline SimplexCentroids gen_centroids(std::size_t k, std::size_t q) {
  if (k < 1 || q < 1) throw ConfigError("gen_centroids needs k >= 1 and q >= 1");
  SimplexCentroids out{DenseMatrix(k, q), q + 1 < k};
  if (k == 1) {
    for (std::size_t c = 0; c < q; ++c) out.centroids(0, c) = 1.0 / std::sqrt(static_cast<double>(q));
    return out;
  }
  const double pi = std::acos(-1.0);
  const std::size_t keep = std::min(k - 1, q);
  for (std::size_t c = 0; c < keep; ++c) {
    const std::size_t m = c / 2 + 1;
    const bool alternating = 2 * m == k;  // only a cosine at the Nyquist frequency
    for (std::size_t r = 0; r < k; ++r) {
      const double angle = 2.0 * pi * static_cast<double>(m * r) / static_cast<double>(k);
      double v = c % 2 == 0 ? std::cos(angle) : std::sin(angle);
      if (alternating) v = (r % 2 == 0 ? 1.0 : -1.0) / std::sqrt(2.0);  // norm K vs K/2
      out.centroids(r, c) = v;
    }
  }
  out.centroids = row_normalize(out.centroids).matrix;
  return out;
}

struct SyntheticDataset {
  DenseMatrix x;  // N x J
  Membership true_u;
  Membership true_v;
  /// Row-normalized Y_pert: the centroid matrix an exact fit on the
  /// noise-free part of x would return.
  DenseMatrix true_y;
  DenseMatrix base_y;  // unperturbed simplex centroids
  bool centroids_truncated = false;
  double eps_centroid = 0.0;
  double eps_cluster = 0.0;
  std::uint64_t seed = 0;
};

/// Draw order from a single stream seeded by `seed`: U, V, W, Z.
inline SyntheticDataset gen_dataset(std::size_t n, std::size_t j, std::size_t k, std::size_t q,
                                    double eps_centroid, double eps_cluster, std::uint64_t seed) {
  if (k < 1 || q < 1) throw ConfigError("K and Q must be >= 1");
  if (k > n) throw ConfigError("K = " + std::to_string(k) + " exceeds N = " + std::to_string(n));
  if (q > j) throw ConfigError("Q = " + std::to_string(q) + " exceeds J = " + std::to_string(j));
  if (!(eps_centroid >= 0.0) || !(eps_cluster >= 0.0)) throw ConfigError("noise levels must be >= 0");

  Rng rng(seed);
  SyntheticDataset ds;
  ds.eps_centroid = eps_centroid;
  ds.eps_cluster = eps_cluster;
  ds.seed = seed;
  ds.true_u = gen_membership(n, k, rng);
  ds.true_v = gen_membership(j, q, rng);
  auto simplex = gen_centroids(k, q);
  ds.base_y = simplex.centroids;
  ds.centroids_truncated = simplex.truncated;

  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix y = ds.base_y;
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < q; ++c) y(r, c) += eps_cluster * gauss(rng);

  ds.x = DenseMatrix(n, j);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < j; ++c) ds.x(i, c) = y(ds.true_u[i], ds.true_v[c]) + eps_centroid * gauss(rng);
  ds.true_y = row_normalize(y).matrix;
  return ds;
}

}  // namespace cocluster
