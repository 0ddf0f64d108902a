#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cocluster/error.hpp"
#include "cocluster/membership.hpp"

namespace cocluster {

/// Real-valued dense matrix in row-major order.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {
    if (!std::isfinite(fill)) throw DomainError("matrix fill value is not finite");
  }

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
      throw ConfigError("matrix of shape " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                        " needs " + std::to_string(rows_ * cols_) + " values, got " +
                        std::to_string(values_.size()));
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!std::isfinite(values_[k])) {
        throw DomainError("matrix entry (" + std::to_string(k / cols_) + ", " +
                          std::to_string(k % cols_) + ") is not finite");
      }
    }
  }

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> v;
    v.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw ConfigError("ragged row in matrix literal");
      v.insert(v.end(), row.begin(), row.end());
    }
    return DenseMatrix(r, c, std::move(v));
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }

  const std::vector<double>& values() const noexcept { return values_; }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("dot product of vectors with different lengths");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ConfigError("cannot multiply " + std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " by " + std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
  }
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

/// tr(A'B), the Frobenius inner product.
inline double trace_product(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ConfigError("trace product of matrices with different shapes");
  }
  return std::inner_product(a.values().begin(), a.values().end(), b.values().begin(), 0.0);
}

inline double frobenius_sq(const DenseMatrix& a) { return trace_product(a, a); }

inline double trace(const DenseMatrix& a) {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

/// Result of row normalization: the scaled matrix plus the indices of rows
/// that were all zero and left untouched.
struct RowNormalized {
  DenseMatrix matrix;
  std::vector<std::size_t> zero_rows;
};

/// Scales every nonzero row to unit Euclidean norm. Zero rows pass through
/// unchanged and are reported in `zero_rows`.
inline RowNormalized row_normalize(const DenseMatrix& m) {
  RowNormalized out{m, {}};
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = out.matrix.row(i);
    const double n = norm(r);
    if (n == 0.0) {
      out.zero_rows.push_back(i);
      continue;
    }
    for (double& x : r) x /= n;
  }
  return out;
}

/// 1 - <a,b> / (|a| |b|).
inline double cosine_dissimilarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("cosine of vectors with different lengths");
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw DomainError("undefined angle: zero-length vector");
  return 1.0 - dot(a, b) / (na * nb);
}

/// Binary N x K indicator matrix of a membership.
inline DenseMatrix to_matrix(const Membership& u) {
  DenseMatrix m(u.n_objects(), u.n_clusters());
  for (std::size_t i = 0; i < u.n_objects(); ++i) m(i, u[i]) = 1.0;
  return m;
}

/// (U'U)^{-1} U'. U'U is diagonal with the cluster sizes, so row k of the
/// result is the indicator of cluster k divided by its size.
inline DenseMatrix membership_pinv(const Membership& u) {
  u.require_nonempty("U'U");
  const auto sizes = u.sizes();
  DenseMatrix p(u.n_clusters(), u.n_objects());
  for (std::size_t i = 0; i < u.n_objects(); ++i) {
    p(u[i], i) = 1.0 / static_cast<double>(sizes[u[i]]);
  }
  return p;
}

/// H = U (U'U)^{-1} U': orthogonal projection onto the cluster indicators.
inline DenseMatrix projection(const Membership& u) {
  u.require_nonempty("U'U");
  const auto sizes = u.sizes();
  const std::size_t n = u.n_objects();
  DenseMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (u[i] == u[j]) h(i, j) = 1.0 / static_cast<double>(sizes[u[i]]);
  return h;
}

/// tr(X'Xt) / sqrt(tr(X'X) tr(Xt'Xt)), the cosine between two matrices.
inline double normalized_cosine_objective(const DenseMatrix& x, const DenseMatrix& xt) {
  const double num = trace_product(x, xt);
  const double dx = frobenius_sq(x);
  const double dt = frobenius_sq(xt);
  if (dx == 0.0 || dt == 0.0) throw DomainError("cosine objective of an all-zero matrix");
  return num / std::sqrt(dx * dt);
}

}  // namespace cocluster
