#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cocluster/modelselect.hpp"
#include "cocluster/synthgen.hpp"
#include "oracles.hpp"

using namespace cocluster;

namespace {

// Between/within ratio from explicit projections H_U X H_V.
double pseudo_f_oracle(const DenseMatrix& x, const Membership& u, const Membership& v) {
  const auto xm = oracle::to_mat(x);
  const auto hu = oracle::mul(oracle::indicator(u), oracle::pinv(oracle::indicator(u)));
  const auto hv = oracle::mul(oracle::indicator(v), oracle::pinv(oracle::indicator(v)));
  const auto fitted = oracle::mul(oracle::mul(hu, xm), hv);
  double mean = 0.0;
  for (const auto& r : xm)
    for (double e : r) mean += e;
  const double nj = static_cast<double>(x.rows() * x.cols());
  mean /= nj;
  double between = 0.0, within = 0.0;
  for (std::size_t i = 0; i < xm.size(); ++i)
    for (std::size_t j = 0; j < xm[i].size(); ++j) {
      between += (fitted[i][j] - mean) * (fitted[i][j] - mean);
      within += (xm[i][j] - fitted[i][j]) * (xm[i][j] - fitted[i][j]);
    }
  const double kq = static_cast<double>(u.n_clusters() * v.n_clusters());
  return (between / (kq - 1)) / (within / (nj - kq));
}

FitConfig config(std::uint64_t seed, std::size_t starts = 10) {
  FitConfig c;
  c.seed = seed;
  c.n_starts = starts;
  return c;
}

}  // namespace

TEST(PseudoF, ConstantMatrixIsZero) {
  const auto s = pseudo_f(DenseMatrix(4, 3, 2.0), Membership({0, 0, 1, 1}, 2), Membership({0, 1, 1}, 2));
  EXPECT_EQ(s.status, ScoreStatus::ok);
  EXPECT_EQ(s.value, 0.0);
}

TEST(PseudoF, ExactBlocksAreInfinite) {
  const Membership u({0, 1, 0, 1, 2}, 3);
  const Membership v({1, 0, 0, 1}, 2);
  const auto y = DenseMatrix::from_rows({{1, 2}, {3, -1}, {0, 5}});
  const auto x = multiply(multiply(to_matrix(u), y), to_matrix(v).transpose());
  const auto s = pseudo_f(x, u, v);
  EXPECT_EQ(s.status, ScoreStatus::infinite);
  EXPECT_TRUE(std::isinf(s.value));
  EXPECT_TRUE(s.defined());
}

TEST(PseudoF, UndefinedWithoutDegreesOfFreedom) {
  std::mt19937_64 rng(1);
  const auto x = oracle::random_matrix(3, 2, rng);
  EXPECT_EQ(pseudo_f(x, Membership({0, 0, 0}, 1), Membership({0, 0}, 1)).status, ScoreStatus::undefined);
  EXPECT_EQ(pseudo_f(x, Membership::identity(3), Membership::identity(2)).status, ScoreStatus::undefined);
  EXPECT_FALSE(pseudo_f(x, Membership::identity(3), Membership::identity(2)).defined());
}

TEST(PseudoF, MatchesExplicitProjections) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 4 + t % 6, j = 3 + t % 4;
    const auto x = oracle::random_matrix(n, j, rng);
    const auto u = oracle::random_partition(n, 2 + t % 2, rng);
    const auto v = oracle::random_partition(j, 1 + t % 2, rng);
    const auto s = pseudo_f(x, u, v);
    ASSERT_EQ(s.status, ScoreStatus::ok);
    EXPECT_NEAR(s.value, pseudo_f_oracle(x, u, v), 1e-10 * std::max(1.0, s.value));
  }
}

TEST(PseudoF, TruePartitionBeatsMergedOne) {
  const Membership u({0, 0, 1, 1, 2, 2}, 3);
  const Membership v({0, 0, 1, 1}, 2);
  const auto y = DenseMatrix::from_rows({{4, -1}, {0, 3}, {-3, -2}});
  auto x = multiply(multiply(to_matrix(u), y), to_matrix(v).transpose());
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 0.3);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 4; ++j) x(i, j) += z(rng);
  const Membership merged({0, 0, 1, 1, 1, 1}, 2);
  const double truth = pseudo_f(x, u, v).value;
  const double worse = pseudo_f(x, merged, v).value;
  EXPECT_GT(truth, worse);
  EXPECT_NEAR(truth, pseudo_f_oracle(x, u, v), 1e-9 * truth);
  EXPECT_NEAR(worse, pseudo_f_oracle(x, merged, v), 1e-9 * worse);
}

TEST(GridSearch, LowNoiseSelectsPlantedCell) {
  const auto ds = gen_dataset(100, 6, 4, 3, 0.1, 0.1, 10);
  const auto g = grid_search(ds.x, {2, 3, 4, 5}, {2, 3, 4, 5}, config(4, 20));
  EXPECT_EQ(g.best_k, 4u);
  EXPECT_EQ(g.best_q, 3u);
  EXPECT_TRUE(g.best_defined);
  ASSERT_EQ(g.scores.size(), 4u);
  for (const auto& row : g.scores) {
    ASSERT_EQ(row.size(), 4u);
    for (const auto& s : row) EXPECT_TRUE(s.status == ScoreStatus::ok || s.status == ScoreStatus::infinite);
  }
}

TEST(GridSearch, CellsMatchDirectScoring) {
  std::mt19937_64 rng(4);
  const auto x = oracle::random_matrix(6, 4, rng);
  const auto g = grid_search(x, {2, 3}, {2, 3}, config(1), true);
  const auto xn = row_normalize(x).matrix;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b) {
      ASSERT_TRUE(g.models[a][b].has_value());
      const auto& m = *g.models[a][b];
      EXPECT_EQ(m.u.n_clusters(), g.k_values[a]);
      EXPECT_EQ(m.v.n_clusters(), g.q_values[b]);
      EXPECT_EQ(g.scores[a][b].value, pseudo_f(xn, m.u, m.v).value);
      EXPECT_NEAR(g.scores[a][b].value, pseudo_f_oracle(xn, m.u, m.v), 1e-9 * g.scores[a][b].value);
      FitConfig c = config(1);
      c.n_row_clusters = g.k_values[a];
      c.n_col_clusters = g.q_values[b];
      EXPECT_EQ(sdkm_fit(x, c).u, m.u);
    }
}

TEST(GridSearch, SingleCellIsBest) {
  std::mt19937_64 rng(5);
  const auto g = grid_search(oracle::random_matrix(8, 5, rng), {3}, {2}, config(1));
  EXPECT_EQ(g.best_k, 3u);
  EXPECT_EQ(g.best_q, 2u);
  EXPECT_TRUE(g.best_defined);
}

TEST(GridSearch, ExactDataFlagsInfiniteAndTiesGoToSmallestCell) {
  const auto ds = gen_dataset(30, 8, 3, 2, 0.0, 0.0, 6);
  const auto g = grid_search(ds.x, {2, 3, 4}, {2, 3}, config(2, 20));
  EXPECT_EQ(g.best_k, 3u);
  EXPECT_EQ(g.best_q, 2u);
  EXPECT_EQ(g.scores[1][0].status, ScoreStatus::infinite);
}

TEST(GridSearch, FailingCellIsFlaggedAndSearchContinues) {
  std::mt19937_64 rng(6);
  const auto g = grid_search(oracle::random_matrix(4, 3, rng), {2, 9}, {2}, config(1));
  EXPECT_EQ(g.scores[1][0].status, ScoreStatus::failed);
  EXPECT_FALSE(g.scores[1][0].message.empty());
  EXPECT_EQ(g.best_k, 2u);
}

TEST(GridSearch, NothingDefined) {
  std::mt19937_64 rng(7);
  const auto g = grid_search(oracle::random_matrix(3, 2, rng), {1}, {1}, config(1));
  EXPECT_FALSE(g.best_defined);
  EXPECT_EQ(g.best_k, 1u);
  EXPECT_THROW(grid_search(oracle::random_matrix(3, 2, rng), {}, {1}, config(1)), ConfigError);
}

TEST(GridSearch, DeterministicAcrossThreadCounts) {
  const auto ds = gen_dataset(40, 8, 3, 2, 0.7, 0.7, 8);
  setenv("COCLUSTER_THREADS", "1", 1);
  const auto a = grid_search(ds.x, {2, 3, 4}, {2, 3}, config(3));
  setenv("COCLUSTER_THREADS", "3", 1);
  const auto b = grid_search(ds.x, {2, 3, 4}, {2, 3}, config(3));
  unsetenv("COCLUSTER_THREADS");
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(a.scores[i][j].value, b.scores[i][j].value);
}
