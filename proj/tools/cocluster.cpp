// cocluster: command-line front end for the co-clustering library.
//
//   cocluster prep      corpus directory -> TF-IDF matrix CSV, vocabulary, stats
//   cocluster generate  planted synthetic matrix + truth JSON
//   cocluster fit       SDKM / DKM / SKM on a matrix CSV -> model JSON
//   cocluster select    pseudo-F grid over (K, Q)
//   cocluster simulate  {select|recover|starts} Monte-Carlo studies
//   cocluster eval      model vs truth recovery row
//   cocluster compare   contingency table + ARI between two models
//   cocluster report    top terms, cluster sizes, document coordinates
//
// Every command writes a PREFIX.manifest.json (or OUT.manifest.json) next to
// its outputs. Outputs are written atomically; on failure none are left.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cocluster/clusterers.hpp"
#include "cocluster/error.hpp"
#include "cocluster/evalmetrics.hpp"
#include "cocluster/io.hpp"
#include "cocluster/modelselect.hpp"
#include "cocluster/simulation.hpp"
#include "cocluster/synthgen.hpp"
#include "cocluster/textpipeline.hpp"

namespace fs = std::filesystem;
using namespace cocluster;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects outputs in memory and writes them together at the end.
class Outputs {
 public:
  void add(fs::path p, std::string content) { files_.emplace_back(std::move(p), std::move(content)); }

  void commit() {
    std::vector<fs::path> written;
    try {
      for (const auto& [p, content] : files_) {
        write_file_atomic(p, content);
        written.push_back(p);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)), started_(utc_now()) {}

  ojson config = ojson::object();
  std::uint64_t seed = 0;

  void digest(const fs::path& p, const std::string& content) { digests_[p.string()] = fnv1a_hex(content); }

  std::string str() const {
    ojson j;
    j["command"] = command_;
    j["config"] = config;
    j["seed"] = seed;
    j["tool_version"] = kToolVersion;
    j["input_digests"] = digests_;
    j["started"] = started_;
    j["finished"] = utc_now();
    return j.dump(2) + "\n";
  }

 private:
  std::string command_;
  std::string started_;
  ojson digests_ = ojson::object();
};

fs::path with_suffix(const std::string& prefix, const std::string& suffix) { return fs::path(prefix + suffix); }

std::vector<std::size_t> parse_range(const std::string& s, const char* flag) {
  const auto colon = s.find(':');
  try {
    std::size_t a = 0, b = 0;
    if (colon == std::string::npos) {
      a = b = std::stoul(s);
    } else {
      a = std::stoul(s.substr(0, colon));
      b = std::stoul(s.substr(colon + 1));
    }
    if (a < 1 || b < a) throw ConfigError("");
    std::vector<std::size_t> out(b - a + 1);
    std::iota(out.begin(), out.end(), a);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(std::string(flag) + " expects A:B with 1 <= A <= B, got '" + s + "'");
  }
}

std::string read_input(const fs::path& p, Manifest& manifest) {
  std::string text = read_text_file(p);
  manifest.digest(p, text);
  return text;
}

LabeledMatrix load_matrix(const fs::path& p, Manifest& manifest) {
  return matrix_from_csv(read_input(p, manifest), p.string());
}

CoClusterModel load_model(const fs::path& p, Manifest& manifest) {
  return model_from_json(read_input(p, manifest), p.string());
}

/// Noise levels from --eps (both sources equal) or --eps-centroid /
/// --eps-cluster lists; a single value broadcasts against a longer list.
std::vector<NoiseLevel> noise_levels(const std::vector<double>& eps, const std::vector<double>& eps_centroid,
                                     const std::vector<double>& eps_cluster) {
  std::vector<double> c = eps_centroid.empty() ? eps : eps_centroid;
  std::vector<double> z = eps_cluster.empty() ? eps : eps_cluster;
  if (c.empty() || z.empty()) throw ConfigError("no noise level given (use --eps or --eps-centroid/--eps-cluster)");
  if (c.size() == 1 && z.size() > 1) c.assign(z.size(), c[0]);
  if (z.size() == 1 && c.size() > 1) z.assign(c.size(), z[0]);
  if (c.size() != z.size()) throw ConfigError("--eps-centroid and --eps-cluster lists differ in length");
  std::vector<NoiseLevel> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] < 0.0 || z[i] < 0.0) throw ConfigError("noise levels must be >= 0");
    out.push_back({c[i], z[i]});
  }
  return out;
}

ojson levels_json(const std::vector<NoiseLevel>& levels) {
  ojson a = ojson::array();
  for (const auto& l : levels) a.push_back({{"eps_centroid", l.eps_centroid}, {"eps_cluster", l.eps_cluster}});
  return a;
}

ojson fit_config_json(const FitConfig& c) {
  return {{"algorithm", algorithm_name(c.algorithm)}, {"K", c.n_row_clusters}, {"Q", c.n_col_clusters},
          {"starts", c.n_starts}, {"tol", c.tol}, {"max_iter", c.max_iter}, {"seed", c.seed}};
}

// ---------------------------------------------------------------- commands

struct PrepArgs {
  std::string input, out, stopwords, lemma_map;
  std::size_t min_freq = 11;
  bool stem = false;
  bool keep_stopwords = false;
};

void cmd_prep(const PrepArgs& a) {
  Manifest manifest("prep");
  PrepConfig cfg;
  cfg.remove_stopwords = !a.keep_stopwords;
  cfg.stem = a.stem;
  if (!a.stopwords.empty()) {
    cfg.stopwords_file = a.stopwords;
    manifest.digest(a.stopwords, read_text_file(a.stopwords));
  }
  if (!a.lemma_map.empty()) {
    cfg.lemma_map_file = a.lemma_map;
    manifest.digest(a.lemma_map, read_text_file(a.lemma_map));
  }
  DocumentTermMatrix dtm = prune(build_dtm(a.input, cfg), a.min_freq);
  const DenseMatrix x = tfidf(dtm);
  dtm.stats.sparsity_after_weighting = sparsity(x);

  std::error_code ec;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.input, ec))
    if (e.path().extension() == ".txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      manifest.digest(f, read_text_file(f));
    } catch (const Error&) {
      // already listed as skipped
    }
  }

  const CorpusStats& s = dtm.stats;
  ojson stats = {{"M", s.n_documents},
                 {"n_terms", dtm.n_terms()},
                 {"n_tokens", s.n_tokens},
                 {"n_types", s.n_types},
                 {"n_hapaxes", s.n_hapaxes},
                 {"type_token_ratio", s.type_token_ratio},
                 {"hapax_share", s.hapax_share},
                 {"sparsity", s.sparsity_after_weighting},
                 {"min_freq", a.min_freq},
                 {"skipped_files", s.skipped_files},
                 {"empty_documents", s.empty_documents}};
  std::string vocab;
  for (const auto& t : dtm.vocabulary) vocab += t + "\n";

  manifest.config = {{"input", a.input},         {"min_freq", a.min_freq}, {"stopwords", a.stopwords},
                     {"lemma_map", a.lemma_map}, {"stem", a.stem},         {"remove_stopwords", !a.keep_stopwords}};
  Outputs out;
  out.add(with_suffix(a.out, ".matrix.csv"), matrix_to_csv({x, dtm.vocabulary, dtm.doc_ids}));
  out.add(with_suffix(a.out, ".vocab.txt"), vocab);
  out.add(with_suffix(a.out, ".stats.json"), stats.dump(2) + "\n");
  out.add(with_suffix(a.out, ".manifest.json"), manifest.str());
  out.commit();
  std::cout << "M=" << s.n_documents << " terms=" << dtm.n_terms() << " tokens=" << s.n_tokens
            << " sparsity=" << format_fixed(100.0 * s.sparsity_after_weighting, 2) << "%\n";
}

struct GenerateArgs {
  std::size_t n = 100, j = 6, k = 3, q = 2;
  double eps = 0.1;
  std::optional<double> eps_centroid, eps_cluster;
  std::uint64_t seed = 1;
  std::string out;
};

void cmd_generate(const GenerateArgs& a) {
  Manifest manifest("generate");
  manifest.seed = a.seed;
  const double ec = a.eps_centroid.value_or(a.eps);
  const double ez = a.eps_cluster.value_or(a.eps);
  const SyntheticDataset ds = gen_dataset(a.n, a.j, a.k, a.q, ec, ez, a.seed);
  manifest.config = {{"N", a.n}, {"J", a.j}, {"K", a.k}, {"Q", a.q}, {"eps_centroid", ec}, {"eps_cluster", ez}};
  Outputs out;
  out.add(with_suffix(a.out, ".matrix.csv"), matrix_to_csv(with_default_ids(ds.x)));
  out.add(with_suffix(a.out, ".truth.json"), truth_to_json(ds));
  out.add(with_suffix(a.out, ".manifest.json"), manifest.str());
  out.commit();
}

struct FitArgs {
  std::string input, out, algorithm = "sdkm";
  std::size_t k = 2, q = 2, starts = 20, max_iter = 100;
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

void cmd_fit(const FitArgs& a) {
  Manifest manifest("fit");
  const LabeledMatrix m = load_matrix(a.input, manifest);
  FitConfig cfg;
  cfg.algorithm = parse_algorithm(a.algorithm);
  cfg.n_row_clusters = a.k;
  cfg.n_col_clusters = a.q;
  cfg.n_starts = a.starts;
  cfg.max_iter = a.max_iter;
  cfg.tol = a.tol;
  cfg.seed = a.seed;
  CoClusterModel model;
  switch (cfg.algorithm) {
    case Algorithm::sdkm: model = sdkm_fit(m.x, cfg); break;
    case Algorithm::dkm: model = dkm_fit(m.x, cfg); break;
    case Algorithm::skm: model = skm_fit(m.x, a.k, cfg); break;
  }
  manifest.seed = a.seed;
  manifest.config = fit_config_json(model.config);
  manifest.config["input"] = a.input;
  Outputs out;
  out.add(a.out, model_to_json(model));
  out.add(a.out + ".manifest.json", manifest.str());
  out.commit();
  std::cout << "objective=" << format_full(model.objective()) << " converged=" << (model.converged ? "true" : "false")
            << " iterations=" << model.n_iterations << "\n";
}

struct SelectArgs {
  std::string input, out, k_range = "2:10", q_range = "2:10";
  std::size_t starts = 20, max_iter = 100;
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

void cmd_select(const SelectArgs& a) {
  Manifest manifest("select");
  const LabeledMatrix m = load_matrix(a.input, manifest);
  FitConfig cfg;
  cfg.n_starts = a.starts;
  cfg.max_iter = a.max_iter;
  cfg.tol = a.tol;
  cfg.seed = a.seed;
  const PseudoFGrid grid =
      grid_search(m.x, parse_range(a.k_range, "--k-range"), parse_range(a.q_range, "--q-range"), cfg);
  manifest.seed = a.seed;
  manifest.config = {{"input", a.input}, {"k_range", a.k_range}, {"q_range", a.q_range},
                     {"starts", a.starts}, {"tol", a.tol},       {"max_iter", a.max_iter}};
  const auto& best = grid.scores[std::find(grid.k_values.begin(), grid.k_values.end(), grid.best_k) -
                                 grid.k_values.begin()]
                                [std::find(grid.q_values.begin(), grid.q_values.end(), grid.best_q) -
                                 grid.q_values.begin()];
  ojson failed = ojson::array();
  for (std::size_t i = 0; i < grid.k_values.size(); ++i)
    for (std::size_t jq = 0; jq < grid.q_values.size(); ++jq)
      if (grid.scores[i][jq].status == ScoreStatus::failed)
        failed.push_back({{"K", grid.k_values[i]}, {"Q", grid.q_values[jq]}, {"error", grid.scores[i][jq].message}});
  ojson best_json = {{"best_k", grid.best_k},
                     {"best_q", grid.best_q},
                     {"defined", grid.best_defined},
                     {"infinite", best.status == ScoreStatus::infinite},
                     {"value", best.status == ScoreStatus::ok ? ojson(best.value) : ojson(nullptr)},
                     {"failed_cells", failed}};
  Outputs out;
  out.add(with_suffix(a.out, ".pseudo_f.csv"), grid_to_csv(grid, 1));
  out.add(with_suffix(a.out, ".pseudo_f_full.csv"), grid_to_csv(grid, -1));
  out.add(with_suffix(a.out, ".best.json"), best_json.dump(2) + "\n");
  out.add(with_suffix(a.out, ".manifest.json"), manifest.str());
  out.commit();
  std::cout << "best K=" << grid.best_k << " Q=" << grid.best_q
            << (best.status == ScoreStatus::infinite ? " (Inf)" : "") << "\n";
}

struct SimArgs {
  std::string out;
  std::size_t runs = 0, n = 0, j = 0, k = 0, q = 0, starts = 20, max_iter = 100;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  std::vector<double> eps, eps_centroid, eps_cluster;
  std::string k_range = "2:5", q_range = "2:5";
  std::vector<std::size_t> start_counts{1, 5, 10, 20, 30, 40, 50, 70, 100};
  bool fresh_data = false;
};

FitConfig sim_fit_config(const SimArgs& a) {
  FitConfig cfg;
  cfg.n_starts = a.starts;
  cfg.max_iter = a.max_iter;
  cfg.tol = a.tol;
  return cfg;
}

ojson sim_config_json(const SimArgs& a, const std::vector<NoiseLevel>& levels) {
  return {{"runs", a.runs}, {"N", a.n},       {"J", a.j},           {"K", a.k},
          {"Q", a.q},       {"starts", a.starts}, {"tol", a.tol}, {"max_iter", a.max_iter},
          {"levels", levels_json(levels)}};
}

void cmd_simulate_select(const SimArgs& a) {
  Manifest manifest("simulate select");
  manifest.seed = a.seed;
  const auto levels = noise_levels(a.eps, a.eps_centroid, a.eps_cluster);
  const auto kv = parse_range(a.k_range, "--k-range");
  const auto qv = parse_range(a.q_range, "--q-range");
  const StudyDims dims{a.n, a.j, a.k, a.q};
  const auto runs = run_select_study(dims, levels, a.runs, kv, qv, sim_fit_config(a), a.seed);

  // Wide display: one row per (level, K), one count column per Q.
  std::string display = "eps_centroid,eps_cluster,K";
  for (auto q : qv) display += ",Q" + std::to_string(q);
  display += "\n";
  const std::size_t per = a.runs;
  for (std::size_t l = 0; l < levels.size(); ++l)
    for (auto k : kv) {
      display += format_param(levels[l].eps_centroid) + "," + format_param(levels[l].eps_cluster) + "," +
                 std::to_string(k);
      for (auto q : qv) {
        std::size_t c = 0;
        for (std::size_t r = l * per; r < (l + 1) * per; ++r)
          c += runs[r].best_defined && runs[r].best_k == k && runs[r].best_q == q;
        display += "," + std::to_string(c);
      }
      display += "\n";
    }

  manifest.config = sim_config_json(a, levels);
  manifest.config["k_range"] = a.k_range;
  manifest.config["q_range"] = a.q_range;
  Outputs out;
  out.add(with_suffix(a.out, ".runs.csv"), select_runs_csv(runs));
  out.add(with_suffix(a.out, ".summary.csv"), select_summary_csv(runs, levels, kv, qv));
  out.add(with_suffix(a.out, ".summary_display.csv"), display);
  out.add(with_suffix(a.out, ".manifest.json"), manifest.str());
  out.commit();
}

void cmd_simulate_recover(const SimArgs& a) {
  Manifest manifest("simulate recover");
  manifest.seed = a.seed;
  const auto levels = noise_levels(a.eps, a.eps_centroid, a.eps_cluster);
  const StudyDims dims{a.n, a.j, a.k, a.q};
  const auto runs = run_recover_study(dims, levels, a.runs, sim_fit_config(a), a.seed);
  const auto summary = summarize_recover(runs, levels);
  manifest.config = sim_config_json(a, levels);
  Outputs out;
  out.add(with_suffix(a.out, ".runs.csv"), recover_runs_csv(runs));
  out.add(with_suffix(a.out, ".summary.csv"), recover_summary_csv(summary, -1));
  out.add(with_suffix(a.out, ".summary_display.csv"), recover_summary_csv(summary, 3));
  out.add(with_suffix(a.out, ".manifest.json"), manifest.str());
  out.commit();
}

void cmd_simulate_starts(const SimArgs& a) {
  Manifest manifest("simulate starts");
  manifest.seed = a.seed;
  const auto levels = noise_levels(a.eps, a.eps_centroid, a.eps_cluster);
  if (levels.size() != 1) throw ConfigError("simulate starts takes a single noise level");
  if (a.start_counts.empty()) throw ConfigError("--start-counts must not be empty");
  const StudyDims dims{a.n, a.j, a.k, a.q};
  const auto runs =
      run_starts_study(dims, levels[0], a.runs, a.start_counts, sim_fit_config(a), a.seed, !a.fresh_data);
  const auto summary = summarize_starts(runs, a.start_counts);
  std::string display = "n_starts,local_maxima_pct\n";
  for (const auto& s : summary) display += std::to_string(s.n_starts) + "," + format_fixed(s.percent(), 1) + "\n";
  manifest.config = sim_config_json(a, levels);
  manifest.config["start_counts"] = a.start_counts;
  manifest.config["same_data"] = !a.fresh_data;
  Outputs out;
  out.add(with_suffix(a.out, ".runs.csv"), starts_runs_csv(runs));
  out.add(with_suffix(a.out, ".summary.csv"), starts_summary_csv(summary));
  out.add(with_suffix(a.out, ".summary_display.csv"), display);
  out.add(with_suffix(a.out, ".manifest.json"), manifest.str());
  out.commit();
}

struct EvalArgs {
  std::string model, truth, out;
};

void cmd_eval(const EvalArgs& a) {
  Manifest manifest("eval");
  const CoClusterModel m = load_model(a.model, manifest);
  const Truth t = truth_from_json(read_input(a.truth, manifest), a.truth);
  if (m.u.n_objects() != t.u.n_objects() || m.v.n_objects() != t.v.n_objects()) {
    throw InputError("dimension mismatch: model is " + std::to_string(m.u.n_objects()) + "x" +
                     std::to_string(m.v.n_objects()) + ", truth is " + std::to_string(t.u.n_objects()) + "x" +
                     std::to_string(t.v.n_objects()));
  }
  RecoverRun row;
  row.run_id = 1;
  row.eps = {t.eps_centroid, t.eps_cluster};
  row.seed = t.seed;
  row.report = recovery_report(t.u, t.v, t.y, m.u, m.v, m.centroids);
  row.objective = m.objective();
  row.converged = m.converged;
  row.n_iterations = m.n_iterations;
  auto join = [](const std::vector<std::size_t>& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + std::to_string(p[i] + 1);
    return s;
  };
  std::string align = "axis,estimated_cluster,true_cluster\n";
  for (std::size_t b = 0; b < row.report.alignment_u.size(); ++b)
    align += "rows," + std::to_string(b + 1) + "," + std::to_string(row.report.alignment_u[b] + 1) + "\n";
  for (std::size_t b = 0; b < row.report.alignment_v.size(); ++b)
    align += "cols," + std::to_string(b + 1) + "," + std::to_string(row.report.alignment_v[b] + 1) + "\n";
  manifest.config = {{"model", a.model}, {"truth", a.truth}};
  Outputs out;
  out.add(a.out, recovery_csv_header() + recovery_csv_row(row));
  out.add(a.out + ".alignment.csv", align);
  out.add(a.out + ".manifest.json", manifest.str());
  out.commit();
  std::cout << "ari_u=" << format_fixed(row.report.ari_u, 3) << " ari_v=" << format_fixed(row.report.ari_v, 3)
            << " rmse=" << format_fixed(row.report.rmse, 3) << " alignment_u=[" << join(row.report.alignment_u)
            << "]\n";
}

struct CompareArgs {
  std::string model_a, model_b, axis = "rows", out;
};

void cmd_compare(const CompareArgs& a) {
  Manifest manifest("compare");
  const CoClusterModel ma = load_model(a.model_a, manifest);
  const CoClusterModel mb = load_model(a.model_b, manifest);
  if (a.axis != "rows" && a.axis != "cols") throw ConfigError("--axis must be rows or cols");
  const Membership& pa = a.axis == "rows" ? ma.u : ma.v;
  const Membership& pb = a.axis == "rows" ? mb.u : mb.v;
  if (pa.n_objects() != pb.n_objects()) {
    throw InputError("object count mismatch on " + a.axis + ": " + std::to_string(pa.n_objects()) + " vs " +
                     std::to_string(pb.n_objects()));
  }
  const CountMatrix table = contingency(pa, pb);
  const double index = ari(pa, pb);
  std::string csv;
  for (std::size_t b = 0; b < pb.n_clusters(); ++b) csv += ",b" + std::to_string(b + 1);
  csv += "\n";
  for (std::size_t r = 0; r < pa.n_clusters(); ++r) {
    csv += "a" + std::to_string(r + 1);
    for (std::size_t b = 0; b < pb.n_clusters(); ++b) csv += "," + std::to_string(table[r][b]);
    csv += "\n";
  }
  ojson summary = {{"axis", a.axis}, {"n_objects", pa.n_objects()}, {"ari", index}};
  manifest.config = {{"model_a", a.model_a}, {"model_b", a.model_b}, {"axis", a.axis}};
  Outputs out;
  out.add(with_suffix(a.out, ".contingency.csv"), csv);
  out.add(with_suffix(a.out, ".ari.json"), summary.dump(2) + "\n");
  out.add(with_suffix(a.out, ".manifest.json"), manifest.str());
  out.commit();
  std::cout << "ARI=" << format_full(index) << "\n";
}

struct ReportArgs {
  std::string model, input, vocab, out;
  std::size_t top = 30;
};

void cmd_report(const ReportArgs& a) {
  Manifest manifest("report");
  const CoClusterModel m = load_model(a.model, manifest);
  const LabeledMatrix lm = load_matrix(a.input, manifest);
  std::vector<std::string> vocab = lm.row_ids;
  if (!a.vocab.empty()) {
    vocab.clear();
    std::istringstream in(read_input(a.vocab, manifest));
    for (std::string line; std::getline(in, line);)
      if (!line.empty()) vocab.push_back(line);
  }
  if (vocab.size() != lm.x.rows()) {
    throw InputError("vocabulary has " + std::to_string(vocab.size()) + " terms but the matrix has " +
                     std::to_string(lm.x.rows()) + " rows");
  }
  if (m.u.n_objects() != lm.x.rows() || m.v.n_objects() != lm.x.cols()) {
    throw InputError("model partitions do not match the matrix shape");
  }
  const std::size_t k_clusters = m.u.n_clusters();
  std::vector<double> weight(lm.x.rows(), 0.0);
  for (std::size_t i = 0; i < lm.x.rows(); ++i)
    for (double v : lm.x.row(i)) weight[i] += v;

  std::string top = "cluster,rank,term,weight\n";
  for (std::size_t k = 0; k < k_clusters; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < lm.x.rows(); ++i)
      if (m.u[i] == k) members.push_back(i);
    std::stable_sort(members.begin(), members.end(),
                     [&](std::size_t x, std::size_t y) { return weight[x] > weight[y]; });
    for (std::size_t r = 0; r < std::min(a.top, members.size()); ++r)
      top += std::to_string(k + 1) + "," + std::to_string(r + 1) + "," + detail::csv_field(vocab[members[r]]) + "," +
             format_full(weight[members[r]]) + "\n";
  }

  std::string sizes = "axis,cluster,size,share\n";
  auto add_sizes = [&](const char* axis, const Membership& p) {
    const auto s = p.sizes();
    for (std::size_t c = 0; c < s.size(); ++c)
      sizes += std::string(axis) + "," + std::to_string(c + 1) + "," + std::to_string(s[c]) + "," +
               format_fixed(static_cast<double>(s[c]) / static_cast<double>(p.n_objects()), 3) + "\n";
  };
  add_sizes("rows", m.u);
  add_sizes("cols", m.v);

  // Mean weight of each row cluster in every column (document coordinates).
  const auto row_sizes = m.u.sizes();
  std::string coords = "column,col_cluster";
  for (std::size_t k = 0; k < k_clusters; ++k) coords += ",mean_w" + std::to_string(k + 1);
  coords += "\n";
  for (std::size_t jc = 0; jc < lm.x.cols(); ++jc) {
    std::vector<double> mean(k_clusters, 0.0);
    for (std::size_t i = 0; i < lm.x.rows(); ++i) mean[m.u[i]] += lm.x(i, jc);
    coords += detail::csv_field(lm.col_ids[jc]) + "," + std::to_string(m.v[jc] + 1);
    for (std::size_t k = 0; k < k_clusters; ++k)
      coords += "," + format_full(row_sizes[k] ? mean[k] / static_cast<double>(row_sizes[k]) : 0.0);
    coords += "\n";
  }

  manifest.config = {{"model", a.model}, {"input", a.input}, {"vocab", a.vocab}, {"top", a.top}};
  Outputs out;
  out.add(with_suffix(a.out, ".top_terms.csv"), top);
  out.add(with_suffix(a.out, ".sizes.csv"), sizes);
  out.add(with_suffix(a.out, ".coords.csv"), coords);
  out.add(with_suffix(a.out, ".manifest.json"), manifest.str());
  out.commit();
}

void add_fit_options(CLI::App* c, std::size_t& starts, double& tol, std::size_t& max_iter, std::uint64_t& seed) {
  c->add_option("--starts", starts, "Random starts")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--tol", tol, "Relative objective change for convergence")->capture_default_str();
  c->add_option("--max-iter", max_iter, "Iteration cap per start")->capture_default_str();
  c->add_option("--seed", seed, "Random seed")->capture_default_str();
}

CLI::App* add_simulate(CLI::App* sim, const std::string& name, const std::string& help, SimArgs& a) {
  CLI::App* c = sim->add_subcommand(name, help);
  c->add_option("--out", a.out, "Output prefix")->required();
  c->add_option("--runs", a.runs, "Runs per noise level")->capture_default_str();
  c->add_option("--n", a.n, "Rows of each synthetic matrix")->capture_default_str();
  c->add_option("--j", a.j, "Columns of each synthetic matrix")->capture_default_str();
  c->add_option("--k", a.k, "Planted row clusters")->capture_default_str();
  c->add_option("--q", a.q, "Planted column clusters")->capture_default_str();
  c->add_option("--eps", a.eps, "Noise levels (both sources)")->delimiter(',')->capture_default_str();
  c->add_option("--eps-centroid", a.eps_centroid, "Centroid noise levels")->delimiter(',');
  c->add_option("--eps-cluster", a.eps_cluster, "Within-cluster noise levels")->delimiter(',');
  add_fit_options(c, a.starts, a.tol, a.max_iter, a.seed);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-clustering of row-normalized data: fitting, model selection, simulation and text reports"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  PrepArgs prep;
  auto* c_prep = app.add_subcommand("prep", "Build a TF-IDF term x document matrix from a directory of .txt files");
  c_prep->add_option("--input", prep.input, "Corpus directory")->required();
  c_prep->add_option("--out", prep.out, "Output prefix")->required();
  c_prep->add_option("--min-freq", prep.min_freq, "Drop terms with total count <= this")->capture_default_str();
  c_prep->add_option("--stopwords", prep.stopwords, "Stopword file, one word per line");
  c_prep->add_option("--lemma-map", prep.lemma_map, "Tab-separated term/lemma file");
  c_prep->add_flag("--stem", prep.stem, "Apply the Porter stemmer to unmapped terms");
  c_prep->add_flag("--keep-stopwords", prep.keep_stopwords, "Do not remove stopwords");

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Generate a planted co-cluster matrix");
  c_gen->add_option("--n", gen.n, "Rows")->capture_default_str();
  c_gen->add_option("--j", gen.j, "Columns")->capture_default_str();
  c_gen->add_option("--k", gen.k, "Row clusters")->capture_default_str();
  c_gen->add_option("--q", gen.q, "Column clusters")->capture_default_str();
  c_gen->add_option("--eps", gen.eps, "Noise level for both sources")->capture_default_str();
  c_gen->add_option("--eps-centroid", gen.eps_centroid, "Centroid noise (overrides --eps)");
  c_gen->add_option("--eps-cluster", gen.eps_cluster, "Within-cluster noise (overrides --eps)");
  c_gen->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  c_gen->add_option("--out", gen.out, "Output prefix")->required();

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Fit a co-clustering model");
  c_fit->add_option("--input", fit.input, "Matrix CSV")->required();
  c_fit->add_option("--out", fit.out, "Model JSON path")->required();
  c_fit->add_option("--algorithm", fit.algorithm, "skm, dkm or sdkm")
      ->check(CLI::IsMember({"skm", "dkm", "sdkm"}))
      ->capture_default_str();
  c_fit->add_option("--k", fit.k, "Row clusters")->required();
  c_fit->add_option("--q", fit.q, "Column clusters (ignored by skm)")->capture_default_str();
  add_fit_options(c_fit, fit.starts, fit.tol, fit.max_iter, fit.seed);

  SelectArgs sel;
  auto* c_sel = app.add_subcommand("select", "Pseudo-F grid over (K, Q)");
  c_sel->add_option("--input", sel.input, "Matrix CSV")->required();
  c_sel->add_option("--out", sel.out, "Output prefix")->required();
  c_sel->add_option("--k-range", sel.k_range, "K range A:B")->capture_default_str();
  c_sel->add_option("--q-range", sel.q_range, "Q range A:B")->capture_default_str();
  add_fit_options(c_sel, sel.starts, sel.tol, sel.max_iter, sel.seed);

  auto* c_sim = app.add_subcommand("simulate", "Monte-Carlo studies on planted data");
  c_sim->require_subcommand(1);
  SimArgs sim_sel;
  sim_sel.runs = 100;
  sim_sel.n = 100;
  sim_sel.j = 6;
  sim_sel.k = 4;
  sim_sel.q = 3;
  sim_sel.eps = {0.1, 0.35, 0.5, 0.75, 0.9};
  auto* c_sim_sel = add_simulate(c_sim, "select", "Frequency of the (K, Q) chosen by pseudo-F", sim_sel);
  c_sim_sel->add_option("--k-range", sim_sel.k_range, "K range A:B")->capture_default_str();
  c_sim_sel->add_option("--q-range", sim_sel.q_range, "Q range A:B")->capture_default_str();

  SimArgs sim_rec;
  sim_rec.runs = 500;
  sim_rec.n = 100;
  sim_rec.j = 6;
  sim_rec.k = 3;
  sim_rec.q = 2;
  sim_rec.eps = {0.1, 0.35, 0.5, 0.75, 0.9, 1.1, 1.35, 1.5, 1.75, 2.0};
  auto* c_sim_rec = add_simulate(c_sim, "recover", "ARI and centroid RMSE against the planted truth", sim_rec);

  SimArgs sim_st;
  sim_st.runs = 100;
  sim_st.n = 200;
  sim_st.j = 80;
  sim_st.k = 6;
  sim_st.q = 4;
  sim_st.eps = {1.5};
  auto* c_sim_st = add_simulate(c_sim, "starts", "Local-maximum rate by number of random starts", sim_st);
  c_sim_st->add_option("--start-counts", sim_st.start_counts, "Numbers of starts to compare")
      ->delimiter(',')
      ->capture_default_str();
  c_sim_st->add_flag("--fresh-data", sim_st.fresh_data, "Draw a new dataset for every repetition");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Recovery metrics of a model against a truth JSON");
  c_eval->add_option("--model", ev.model, "Model JSON")->required();
  c_eval->add_option("--truth", ev.truth, "Truth JSON")->required();
  c_eval->add_option("--out", ev.out, "Recovery CSV path")->required();

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare", "Contingency table and ARI between two models");
  c_cmp->add_option("--model-a", cmp.model_a, "First model JSON (table rows)")->required();
  c_cmp->add_option("--model-b", cmp.model_b, "Second model JSON (table columns)")->required();
  c_cmp->add_option("--axis", cmp.axis, "rows or cols")->check(CLI::IsMember({"rows", "cols"}))->capture_default_str();
  c_cmp->add_option("--out", cmp.out, "Output prefix")->required();

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "Top terms per row cluster, cluster sizes and column coordinates");
  c_rep->add_option("--model", rep.model, "Model JSON")->required();
  c_rep->add_option("--input", rep.input, "Matrix CSV the model was fitted on")->required();
  c_rep->add_option("--vocab", rep.vocab, "Vocabulary file (defaults to the matrix row ids)");
  c_rep->add_option("--top", rep.top, "Terms per cluster")->capture_default_str();
  c_rep->add_option("--out", rep.out, "Output prefix")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_prep) cmd_prep(prep);
    if (*c_gen) cmd_generate(gen);
    if (*c_fit) cmd_fit(fit);
    if (*c_sel) cmd_select(sel);
    if (*c_sim_sel) cmd_simulate_select(sim_sel);
    if (*c_sim_rec) cmd_simulate_recover(sim_rec);
    if (*c_sim_st) cmd_simulate_starts(sim_st);
    if (*c_eval) cmd_eval(ev);
    if (*c_cmp) cmd_compare(cmp);
    if (*c_rep) cmd_report(rep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
