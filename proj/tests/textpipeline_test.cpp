#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include <unistd.h>

#include "cocluster/porter.hpp"
#include "cocluster/textpipeline.hpp"

using namespace cocluster;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("cocluster_text_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name, std::ios::binary) << content;
    return path_ / name;
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::size_t count_of(const DocumentTermMatrix& dtm, const std::string& term, std::size_t doc) {
  for (std::size_t t = 0; t < dtm.n_terms(); ++t) {
    if (dtm.vocabulary[t] != term) continue;
    for (const auto& tc : dtm.counts[t])
      if (tc.doc == doc) return tc.count;
  }
  return 0;
}

PrepConfig no_stopwords() {
  PrepConfig c;
  c.remove_stopwords = false;
  return c;
}

// Writes a corpus where every term's per-document counts are given.
std::vector<NamedText> corpus(const std::vector<std::map<std::string, int>>& docs) {
  std::vector<NamedText> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    std::string text;
    for (const auto& [term, n] : docs[d])
      for (int k = 0; k < n; ++k) text += term + " ";
    out.push_back({"d" + std::to_string(d + 1), text});
  }
  return out;
}

}  // namespace

TEST(Tokenize, LettersOnlyLowercased) {
  EXPECT_EQ(tokenize("The cat, the CAT!"), (std::vector<std::string>{"the", "cat", "the", "cat"}));
  EXPECT_EQ(tokenize("In 1789, we-the people's"), (std::vector<std::string>{"in", "we", "the", "people", "s"}));
  EXPECT_EQ(tokenize("  \n\t"), std::vector<std::string>{});
  EXPECT_EQ(tokenize("Élan CAFÉ naïve"), (std::vector<std::string>{"élan", "café", "naïve"}));
  EXPECT_EQ(tokenize("a\xff" "b"), (std::vector<std::string>{"a", "b"}));  // malformed byte splits
}

TEST(BuildDtm, StopwordsAndCaseFolding) {
  TempDir dir;
  const auto stop = dir.write("stop.list", "the\n# comment\n\n");
  PrepConfig cfg;
  cfg.stopwords_file = stop;
  const auto dtm = build_dtm_from_texts({{"doc", "The cat, the CAT!"}}, cfg);
  ASSERT_EQ(dtm.vocabulary, std::vector<std::string>{"cat"});
  EXPECT_EQ(count_of(dtm, "cat", 0), 2u);
  EXPECT_EQ(dtm.stats.n_tokens, 4u);
}

TEST(BuildDtm, DefaultStopwordList) {
  const auto dtm = build_dtm_from_texts({{"d", "We the people of the United States"}});
  EXPECT_EQ(dtm.vocabulary, (std::vector<std::string>{"people", "states", "united"}));
}

TEST(BuildDtm, EmptyDocumentIsAZeroColumnAndFlagged) {
  const auto dtm = build_dtm_from_texts({{"a", "cat dog"}, {"b", "... 42"}}, no_stopwords());
  EXPECT_EQ(dtm.stats.empty_documents, std::vector<std::string>{"b"});
  EXPECT_EQ(dtm.doc_lengths()[1], 0u);
  try {
    tfidf(dtm);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos);
  }
}

TEST(BuildDtm, StatsRecomputeFromTokenStream) {
  std::mt19937_64 rng(4);
  const std::vector<std::string> words{"alpha", "beta", "gamma", "delta", "the", "of", "zeta", "eta"};
  std::vector<NamedText> docs;
  for (int d = 0; d < 6; ++d) {
    std::string text;
    const int len = 5 + d * 3;
    for (int t = 0; t < len; ++t) text += words[rng() % words.size()] + (t % 4 ? " " : ", ");
    docs.push_back({"doc" + std::to_string(d), text});
  }
  docs.push_back({"rare", "omega"});
  const auto dtm = build_dtm_from_texts(docs);
  std::map<std::string, std::size_t> freq;
  std::size_t tokens = 0;
  for (const auto& d : docs)
    for (const auto& t : tokenize(d.text)) {
      ++freq[t];
      ++tokens;
    }
  std::size_t hapax = 0;
  for (const auto& [t, f] : freq) hapax += f == 1;
  EXPECT_EQ(dtm.stats.n_tokens, tokens);
  EXPECT_EQ(dtm.stats.n_types, freq.size());
  EXPECT_EQ(dtm.stats.n_hapaxes, hapax);
  EXPECT_EQ(dtm.stats.type_token_ratio, static_cast<double>(freq.size()) / static_cast<double>(tokens));
  EXPECT_EQ(dtm.stats.hapax_share, static_cast<double>(hapax) / static_cast<double>(freq.size()));
  EXPECT_EQ(dtm.stats.n_documents, 7u);
  for (std::size_t t = 1; t < dtm.n_terms(); ++t) EXPECT_LT(dtm.vocabulary[t - 1], dtm.vocabulary[t]);
}

TEST(BuildDtm, LemmaMapAndStemming) {
  TempDir dir;
  const auto map = dir.write("lemmas.tsv", "ran\trun\nrunning\trun\n");
  PrepConfig cfg = no_stopwords();
  cfg.lemma_map_file = map;
  auto dtm = build_dtm_from_texts({{"d", "ran running runs"}}, cfg);
  EXPECT_EQ(count_of(dtm, "run", 0), 2u);
  EXPECT_EQ(count_of(dtm, "runs", 0), 1u);
  cfg.stem = true;
  dtm = build_dtm_from_texts({{"d", "ran running runs"}}, cfg);
  EXPECT_EQ(dtm.vocabulary, std::vector<std::string>{"run"});
  EXPECT_EQ(count_of(dtm, "run", 0), 3u);
}

TEST(BuildDtm, LemmaMapErrorsCarryLocation) {
  TempDir dir;
  const auto bad = dir.write("bad.tsv", "ok\tfine\nbroken line\n");
  PrepConfig cfg;
  cfg.lemma_map_file = bad;
  try {
    build_dtm_from_texts({{"d", "x"}}, cfg);
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.tsv:2"), std::string::npos) << e.what();
  }
}

TEST(BuildDtm, ReadsSortedTxtFilesAndSkipsUnreadable) {
  TempDir dir;
  dir.write("b.txt", "zebra zebra");
  dir.write("a.txt", "apple zebra");
  dir.write("notes.md", "ignored words");
  fs::create_symlink(dir.path() / "missing-target", dir.path() / "c.txt");
  const auto dtm = build_dtm(dir.path(), no_stopwords());
  EXPECT_EQ(dtm.doc_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(dtm.vocabulary, (std::vector<std::string>{"apple", "zebra"}));
  EXPECT_EQ(count_of(dtm, "zebra", 1), 2u);
  EXPECT_EQ(dtm.stats.skipped_files, std::vector<std::string>{"c.txt"});
}

TEST(BuildDtm, EmptyCorpusIsAnError) {
  TempDir dir;
  try {
    build_dtm(dir.path());
    FAIL() << "expected an error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("empty corpus"), std::string::npos);
  }
  EXPECT_THROW(build_dtm(dir.path() / "nope"), InputError);
}

TEST(Prune, ThresholdIsInclusive) {
  const auto dtm = build_dtm_from_texts(corpus({{{"a", 7}, {"b", 11}, {"c", 5}}, {{"a", 5}}}), no_stopwords());
  EXPECT_EQ(prune(dtm, 0).vocabulary, dtm.vocabulary);
  EXPECT_EQ(prune(dtm, 0).counts.size(), dtm.counts.size());
  EXPECT_EQ(prune(dtm, 11).vocabulary, std::vector<std::string>{"a"});
  EXPECT_EQ(prune(dtm, 10).vocabulary, (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(prune(dtm, 12), InputError);
}

TEST(Prune, RecomputesEmptyDocuments) {
  const auto dtm = build_dtm_from_texts(corpus({{{"a", 3}}, {{"b", 1}}}), no_stopwords());
  EXPECT_TRUE(dtm.stats.empty_documents.empty());
  EXPECT_EQ(prune(dtm, 1).stats.empty_documents, std::vector<std::string>{"d2"});
}

TEST(Tfidf, HandComputedCell) {
  // Term t: 2 of the 10 tokens of d1, present in 2 of 4 documents.
  const auto dtm = build_dtm_from_texts(
      corpus({{{"t", 2}, {"f", 8}}, {{"t", 1}, {"f", 1}}, {{"f", 3}}, {{"f", 1}, {"g", 1}}}), no_stopwords());
  const auto x = tfidf(dtm);
  const auto row = static_cast<std::size_t>(
      std::find(dtm.vocabulary.begin(), dtm.vocabulary.end(), "t") - dtm.vocabulary.begin());
  EXPECT_NEAR(x(row, 0), 0.2 * std::log10(2.0), 1e-15);
  EXPECT_NEAR(x(row, 0), 0.0602060, 1e-7);
  // f is in every document
  for (std::size_t d = 0; d < 4; ++d) EXPECT_EQ(x(0, d), 0.0);
}

TEST(Tfidf, ZeroPatternAndNonNegativity) {
  std::mt19937_64 rng(9);
  std::vector<std::map<std::string, int>> docs(8);
  const std::vector<std::string> words{"aa", "bb", "cc", "dd", "ee", "ff"};
  for (auto& d : docs) {
    d["aa"] = 1 + static_cast<int>(rng() % 3);  // in every document
    for (std::size_t w = 1; w < words.size(); ++w)
      if (rng() % 2) d[words[w]] = 1 + static_cast<int>(rng() % 4);
  }
  const auto dtm = build_dtm_from_texts(corpus(docs), no_stopwords());
  const auto x = tfidf(dtm);
  for (std::size_t t = 0; t < dtm.n_terms(); ++t) {
    const bool everywhere = dtm.counts[t].size() == dtm.n_docs();
    for (std::size_t d = 0; d < dtm.n_docs(); ++d) {
      EXPECT_GE(x(t, d), 0.0);
      const bool zero_expected = count_of(dtm, dtm.vocabulary[t], d) == 0 || everywhere;
      EXPECT_EQ(x(t, d) == 0.0, zero_expected);
    }
  }
  EXPECT_GT(sparsity(x), 0.0);
}

TEST(Tfidf, DocumentOrderOnlyPermutesColumns) {
  const auto a = corpus({{{"x", 2}, {"y", 1}}, {{"y", 3}, {"z", 1}}, {{"x", 1}, {"z", 2}}});
  auto b = a;
  std::swap(b[0], b[2]);
  const auto da = build_dtm_from_texts(a, no_stopwords());
  const auto db = build_dtm_from_texts(b, no_stopwords());
  const auto xa = tfidf(da);
  const auto xb = tfidf(db);
  ASSERT_EQ(da.vocabulary, db.vocabulary);
  const std::vector<std::size_t> map{2, 1, 0};
  for (std::size_t t = 0; t < da.n_terms(); ++t)
    for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(xa(t, d), xb(t, map[d]));
}

TEST(Tfidf, DocumentLengthIsCountedAfterPruning) {
  const auto dtm = build_dtm_from_texts(corpus({{{"k", 12}, {"r", 1}}, {{"k", 1}}, {{"m", 12}}}), no_stopwords());
  const auto pruned = prune(dtm, 11);
  const auto x = tfidf(pruned);
  // k keeps 12 of the 12 retained tokens of d1 after r is dropped.
  EXPECT_NEAR(x(0, 0), 1.0 * std::log10(3.0 / 2.0), 1e-15);
  // Taking rows of the unpruned matrix would use length 13 instead.
  const auto full = tfidf(dtm);
  EXPECT_NEAR(full(0, 0), 12.0 / 13.0 * std::log10(3.0 / 2.0), 1e-15);
  EXPECT_NE(full(0, 0), x(0, 0));
}

TEST(Sparsity, ShareOfZeroCells) {
  EXPECT_EQ(sparsity(DenseMatrix::from_rows({{0, 1}, {0, 0}})), 0.75);
  EXPECT_EQ(sparsity(DenseMatrix()), 0.0);
}

TEST(PorterStem, KnownPairs) {
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"caresses", "caress"}, {"ponies", "poni"},     {"ties", "ti"},         {"cats", "cat"},
      {"feed", "feed"},       {"agreed", "agre"},     {"plastered", "plaster"}, {"motoring", "motor"},
      {"sing", "sing"},       {"hopping", "hop"},     {"falling", "fall"},    {"filing", "file"},
      {"happy", "happi"},     {"relational", "relat"}, {"conditional", "condit"}, {"generalization", "gener"},
      {"hopeful", "hope"},    {"goodness", "good"},   {"adjustable", "adjust"}, {"controll", "control"},
      {"roll", "roll"},       {"is", "is"}};
  for (const auto& [w, s] : pairs) EXPECT_EQ(porter_stem(w), s) << w;
  EXPECT_EQ(porter_stem("café"), "café");
}
