#include <gtest/gtest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cocluster/io.hpp"
#include "oracles.hpp"

using namespace cocluster;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cocluster_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Format, FullPrecisionRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    const double v = d(rng);
    EXPECT_EQ(std::strtod(format_full(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(format_full(std::numeric_limits<double>::infinity()), "Inf");
  EXPECT_EQ(format_full(-std::numeric_limits<double>::infinity()), "-Inf");
  EXPECT_EQ(format_full(std::nan("")), "NA");
}

TEST(Format, ParamIsShortest) {
  EXPECT_EQ(format_param(0.1), "0.1");
  EXPECT_EQ(format_param(0.35), "0.35");
  EXPECT_EQ(format_param(2.0), "2");
  EXPECT_EQ(std::strtod(format_param(1.0 / 3.0).c_str(), nullptr), 1.0 / 3.0);
  EXPECT_EQ(format_param(1.0 / 3.0), "0.3333333333333333");
}

TEST(Format, FixedDropsNegativeZero) {
  EXPECT_EQ(format_fixed(-0.0001, 2), "0.00");
  EXPECT_EQ(format_fixed(-0.006, 2), "-0.01");
  EXPECT_EQ(format_fixed(12.345, 1), "12.3");
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a_hex("foobar"), "85944171f73967e8");
}

TEST(Csv, MatrixRoundTripIsExact) {
  std::mt19937_64 rng(3);
  auto m = with_default_ids(oracle::random_matrix(7, 4, rng));
  m.row_ids[2] = "has,comma";
  m.col_ids[1] = "quote\"d";
  const auto back = matrix_from_csv(matrix_to_csv(m));
  EXPECT_EQ(back.row_ids, m.row_ids);
  EXPECT_EQ(back.col_ids, m.col_ids);
  ASSERT_EQ(back.x.rows(), 7u);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(back.x(i, j), m.x(i, j));
}

TEST(Csv, ErrorsNameLineAndColumn) {
  EXPECT_NE(error_of([] { matrix_from_csv(",a,b\nr1,1,2\nr2,3,x\n", "m.csv"); }).find("m.csv:3:3"),
            std::string::npos);
  EXPECT_NE(error_of([] { matrix_from_csv(",a,b\nr1,1\n", "m.csv"); }).find("m.csv:2"), std::string::npos);
  EXPECT_NE(error_of([] { matrix_from_csv("", "m.csv"); }).find("empty"), std::string::npos);
  EXPECT_NE(error_of([] { matrix_from_csv(",a\n", "m.csv"); }).find("no data rows"), std::string::npos);
  EXPECT_THROW(matrix_from_csv(",a\nr1,1e999\n"), std::exception);
  EXPECT_THROW(read_matrix_csv("/nonexistent/file.csv"), InputError);
}

TEST(Csv, AcceptsCrlf) {
  const auto m = matrix_from_csv(",a,b\r\nr1,1,2\r\n");
  EXPECT_EQ(m.x(0, 1), 2.0);
}

TEST(Json, ModelRoundTrip) {
  std::mt19937_64 rng(5);
  const auto x = oracle::random_matrix(12, 6, rng);
  FitConfig cfg;
  cfg.n_row_clusters = 3;
  cfg.n_col_clusters = 2;
  cfg.n_starts = 3;
  cfg.seed = 11;
  const auto model = sdkm_fit(x, cfg);
  const std::string text = model_to_json(model);
  const auto back = model_from_json(text);
  EXPECT_EQ(back.u.labels(), model.u.labels());
  EXPECT_EQ(back.v.labels(), model.v.labels());
  EXPECT_EQ(back.objective_trace, model.objective_trace);
  EXPECT_EQ(back.objective_normalized, model.objective_normalized);
  EXPECT_EQ(back.config.seed, 11u);
  EXPECT_EQ(back.best_start_index, model.best_start_index);
  EXPECT_EQ(model_to_json(back), text);
  EXPECT_EQ(nlohmann::json::parse(text).at("row_labels")[0].get<int>(), static_cast<int>(model.u[0]) + 1);
}

TEST(Json, TruthRoundTrip) {
  const auto ds = gen_dataset(20, 6, 3, 2, 0.3, 0.1, 77);
  const auto t = truth_from_json(truth_to_json(ds));
  EXPECT_EQ(t.u.labels(), ds.true_u.labels());
  EXPECT_EQ(t.v.labels(), ds.true_v.labels());
  EXPECT_EQ(t.eps_centroid, 0.3);
  EXPECT_EQ(t.seed, 77u);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 2; ++b) EXPECT_EQ(t.y(a, b), ds.true_y(a, b));
}

TEST(Json, BadInputIsReported) {
  EXPECT_THROW(model_from_json("{", "m.json"), InputError);
  EXPECT_NE(error_of([] { truth_from_json("{}", "t.json"); }).find("t.json"), std::string::npos);
  EXPECT_THROW(truth_from_json(R"({"K":2,"Q":1,"row_labels":[1,3],"col_labels":[1],"centroids":[[1]],)"
                               R"("eps_centroid":0,"eps_cluster":0,"seed":1})"),
               InputError);
}

TEST(Grid, InfAndNaCells) {
  PseudoFGrid g;
  g.k_values = {2, 3};
  g.q_values = {2};
  g.scores = {{PseudoF{1.26, ScoreStatus::ok, ""}}, {PseudoF{0.0, ScoreStatus::infinite, ""}}};
  EXPECT_EQ(grid_to_csv(g, 1), ",2\n2,1.3\n3,Inf\n");
  g.scores[0][0].status = ScoreStatus::undefined;
  EXPECT_EQ(grid_to_csv(g, -1), ",2\n2,NA\n3,Inf\n");
}

TEST(AtomicWrite, ReplacesWithoutLeftovers) {
  const auto p = scratch("atomic.txt");
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  EXPECT_EQ(read_text_file(p), "second");
  auto tmp = p;
  tmp += ".tmp";
  EXPECT_FALSE(fs::exists(tmp));
  fs::remove_all(p.parent_path());
}
