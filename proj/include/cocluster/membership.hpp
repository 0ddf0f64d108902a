#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "cocluster/error.hpp"

namespace cocluster {

/// Hard partition of `n_objects` objects into `n_clusters` clusters.
///
/// Stored as a label vector with 0-based cluster indices. The binary
/// row-stochastic matrix view U (u_ik = 1 iff label(i) == k) is available
/// through `to_matrix()` in matrix.hpp. External formats (JSON, CSV) use
/// 1-based labels.
class Membership {
 public:
  Membership() = default;

  Membership(std::vector<std::size_t> labels, std::size_t n_clusters)
      : labels_(std::move(labels)), n_clusters_(n_clusters) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] >= n_clusters_) {
        throw ConfigError("membership label " + std::to_string(labels_[i]) +
                          " of object " + std::to_string(i) + " is outside [0, " +
                          std::to_string(n_clusters_) + ")");
      }
    }
  }

  /// Every object in its own cluster (U = I).
  static Membership identity(std::size_t n) {
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i;
    return Membership(std::move(labels), n);
  }

  /// Builds from 1-based labels; the cluster count is the largest label
  /// unless given explicitly.
  static Membership from_one_based(const std::vector<long long>& labels,
                                   std::size_t n_clusters = 0) {
    std::vector<std::size_t> zero_based;
    zero_based.reserve(labels.size());
    std::size_t max_label = 0;
    for (long long l : labels) {
      if (l < 1) throw InputError("cluster labels must be >= 1, got " + std::to_string(l));
      zero_based.push_back(static_cast<std::size_t>(l - 1));
      max_label = std::max<std::size_t>(max_label, static_cast<std::size_t>(l));
    }
    return Membership(std::move(zero_based), n_clusters == 0 ? max_label : n_clusters);
  }

  std::size_t n_objects() const noexcept { return labels_.size(); }
  std::size_t n_clusters() const noexcept { return n_clusters_; }
  std::size_t operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }

  std::vector<long long> one_based() const {
    std::vector<long long> out(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) out[i] = static_cast<long long>(labels_[i]) + 1;
    return out;
  }

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(n_clusters_, 0);
    for (std::size_t l : labels_) ++s[l];
    return s;
  }

  bool has_empty_cluster() const {
    const auto s = sizes();
    return std::find(s.begin(), s.end(), std::size_t{0}) != s.end();
  }

  /// Throws SingularError naming `what` if any cluster is empty.
  void require_nonempty(const char* what = "U'U") const {
    const auto s = sizes();
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] == 0) {
        throw SingularError(std::string("singular ") + what + ": cluster " +
                            std::to_string(k + 1) + " is empty");
      }
    }
  }

  friend bool operator==(const Membership&, const Membership&) = default;

 private:
  std::vector<std::size_t> labels_;
  std::size_t n_clusters_ = 0;
};

}  // namespace cocluster
