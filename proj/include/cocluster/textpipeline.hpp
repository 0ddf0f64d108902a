#pragma once

// Plain-text corpus to weighted term-document matrix.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cocluster/error.hpp"
#include "cocluster/matrix.hpp"
#include "cocluster/porter.hpp"

namespace cocluster {

struct CorpusStats {
  std::size_t n_documents = 0;  // M
  std::size_t n_tokens = 0;
  std::size_t n_types = 0;
  std::size_t n_hapaxes = 0;
  double type_token_ratio = 0.0;
  double hapax_share = 0.0;
  double sparsity_after_weighting = 0.0;  // set once the weighted matrix exists
  std::vector<std::string> skipped_files;
  std::vector<std::string> empty_documents;  // no retained terms
};

struct PrepConfig {
  /// One term per line. When unset the built-in English list is used.
  std::optional<std::filesystem::path> stopwords_file;
  bool remove_stopwords = true;
  /// Lines "term<TAB>lemma". Mapped tokens are not stemmed.
  std::optional<std::filesystem::path> lemma_map_file;
  bool stem = false;
};

struct TermCount {
  std::size_t doc = 0;
  std::size_t count = 0;
};

struct DocumentTermMatrix {
  std::vector<std::string> vocabulary;         // lexicographic
  std::vector<std::string> doc_ids;
  std::vector<std::vector<TermCount>> counts;  // per term, sorted by doc
  CorpusStats stats;

  std::size_t n_terms() const noexcept { return vocabulary.size(); }
  std::size_t n_docs() const noexcept { return doc_ids.size(); }

  std::size_t term_total(std::size_t term) const {
    std::size_t s = 0;
    for (const auto& tc : counts[term]) s += tc.count;
    return s;
  }

  std::vector<std::size_t> doc_lengths() const {
    std::vector<std::size_t> len(n_docs(), 0);
    for (const auto& row : counts)
      for (const auto& tc : row) len[tc.doc] += tc.count;
    return len;
  }
};

/// English function words. Contraction fragments ("don", "t", "ll") are
/// included because tokens split at apostrophes.
inline const std::vector<std::string>& default_stopwords() {
  static const std::vector<std::string> words = {
      "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any",
      "are", "aren", "as", "at", "be", "because", "been", "before", "being", "below", "between",
      "both", "but", "by", "can", "couldn", "d", "did", "didn", "do", "does", "doesn", "doing", "don",
      "down", "during", "each", "few", "for", "from", "further", "had", "hadn", "has", "hasn", "have",
      "haven", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i",
      "if", "in", "into", "is", "isn", "it", "its", "itself", "just", "ll", "m", "ma", "me", "mightn",
      "more", "most", "mustn", "my", "myself", "needn", "no", "nor", "not", "now", "o", "of", "off",
      "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "re",
      "s", "same", "shan", "she", "should", "shouldn", "so", "some", "such", "t", "than", "that",
      "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
      "those", "through", "to", "too", "under", "until", "up", "upon", "ve", "very", "was", "wasn",
      "we", "were", "weren", "what", "when", "where", "which", "while", "who", "whom", "why", "will",
      "with", "won", "would", "wouldn", "y", "you", "your", "yours", "yourself", "yourselves"};
  return words;
}

namespace detail {

// Decodes one UTF-8 code point starting at s[i]; advances i. Malformed bytes
// decode as U+FFFD.
inline char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + static_cast<std::size_t>(extra) >= s.size()) {
    i = s.size();
    return 0xFFFD;
  }
  for (int e = 1; e <= extra; ++e) {
    const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(e)]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<std::size_t>(extra) + 1;
  return cp;
}

// ASCII letters and the Latin-1 / Latin Extended-A/B letter blocks. Only
// ASCII and Latin-1 capitals are folded to lowercase.
inline bool is_letter(char32_t c) {
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return true;
  if (c >= 0xC0 && c <= 0x24F) return c != 0xD7 && c != 0xF7;
  return false;
}

inline char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

inline void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

inline std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputError("cannot read " + p.string());
  return ss.str();
}

}  // namespace detail

/// Maximal runs of letters, lowercased. Digits, punctuation and whitespace
/// separate tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t c = detail::next_code_point(text, i);
    if (detail::is_letter(c)) {
      detail::append_utf8(cur, detail::to_lower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

inline std::unordered_set<std::string> load_stopwords(const std::filesystem::path& p) {
  std::istringstream in(detail::read_file(p));
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    for (auto& t : tokenize(line)) out.insert(std::move(t));
  }
  return out;
}

inline std::unordered_map<std::string, std::string> load_lemma_map(const std::filesystem::path& p) {
  std::istringstream in(detail::read_file(p));
  std::unordered_map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw InputError(p.string() + ":" + std::to_string(lineno) + ": expected term<TAB>lemma");
    }
    const auto term = tokenize(line.substr(0, tab));
    const auto lemma = tokenize(line.substr(tab + 1));
    if (term.size() != 1 || lemma.size() != 1) {
      throw InputError(p.string() + ":" + std::to_string(lineno) + ": term and lemma must be single words");
    }
    out[term[0]] = lemma[0];
  }
  return out;
}

struct NamedText {
  std::string id;
  std::string text;
};

/// Builds counts from in-memory documents. Corpus statistics describe the
/// raw token stream before stopword removal, lemmatization and stemming.
inline DocumentTermMatrix build_dtm_from_texts(const std::vector<NamedText>& docs, const PrepConfig& config = {}) {
  if (docs.empty()) throw InputError("empty corpus");
  std::unordered_set<std::string> stop;
  if (config.remove_stopwords) {
    if (config.stopwords_file) {
      stop = load_stopwords(*config.stopwords_file);
    } else {
      stop.insert(default_stopwords().begin(), default_stopwords().end());
    }
  }
  std::unordered_map<std::string, std::string> lemmas;
  if (config.lemma_map_file) lemmas = load_lemma_map(*config.lemma_map_file);

  DocumentTermMatrix dtm;
  std::unordered_map<std::string, std::size_t> raw_freq;
  std::map<std::string, std::map<std::size_t, std::size_t>> term_docs;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    dtm.doc_ids.push_back(docs[d].id);
    for (auto& tok : tokenize(docs[d].text)) {
      ++dtm.stats.n_tokens;
      ++raw_freq[tok];
      if (stop.count(tok)) continue;
      std::string term;
      if (auto it = lemmas.find(tok); it != lemmas.end()) {
        term = it->second;
      } else {
        term = config.stem ? porter_stem(tok) : tok;
      }
      ++term_docs[term][d];
    }
  }
  for (const auto& [term, per_doc] : term_docs) {
    dtm.vocabulary.push_back(term);
    std::vector<TermCount> row;
    for (const auto& [d, c] : per_doc) row.push_back({d, c});
    dtm.counts.push_back(std::move(row));
  }

  auto& st = dtm.stats;
  st.n_documents = docs.size();
  st.n_types = raw_freq.size();
  for (const auto& [t, f] : raw_freq)
    if (f == 1) ++st.n_hapaxes;
  st.type_token_ratio = st.n_tokens == 0 ? 0.0 : static_cast<double>(st.n_types) / static_cast<double>(st.n_tokens);
  st.hapax_share = st.n_types == 0 ? 0.0 : static_cast<double>(st.n_hapaxes) / static_cast<double>(st.n_types);
  const auto len = dtm.doc_lengths();
  for (std::size_t d = 0; d < len.size(); ++d)
    if (len[d] == 0) st.empty_documents.push_back(dtm.doc_ids[d]);
  return dtm;
}

/// Reads every *.txt file in `corpus_dir` (sorted by name; the stem is the
/// document id). Unreadable files are skipped and listed in the stats.
inline DocumentTermMatrix build_dtm(const std::filesystem::path& corpus_dir, const PrepConfig& config = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec)) throw InputError("not a directory: " + corpus_dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<NamedText> docs;
  std::vector<std::string> skipped;
  for (const auto& f : files) {
    try {
      docs.push_back({f.stem().string(), detail::read_file(f)});
    } catch (const InputError&) {
      skipped.push_back(f.filename().string());
    }
  }
  if (docs.empty()) throw InputError("empty corpus: no readable .txt files in " + corpus_dir.string());
  DocumentTermMatrix dtm = build_dtm_from_texts(docs, config);
  dtm.stats.skipped_files = std::move(skipped);
  return dtm;
}

/// Drops terms whose corpus-wide count is <= min_total_frequency.
inline DocumentTermMatrix prune(const DocumentTermMatrix& dtm, std::size_t min_total_frequency) {
  DocumentTermMatrix out;
  out.doc_ids = dtm.doc_ids;
  out.stats = dtm.stats;
  for (std::size_t t = 0; t < dtm.n_terms(); ++t) {
    if (dtm.term_total(t) <= min_total_frequency) continue;
    out.vocabulary.push_back(dtm.vocabulary[t]);
    out.counts.push_back(dtm.counts[t]);
  }
  if (out.vocabulary.empty()) {
    throw InputError("pruning with minimum frequency " + std::to_string(min_total_frequency) +
                     " removed every term");
  }
  out.stats.empty_documents.clear();
  const auto len = out.doc_lengths();
  for (std::size_t d = 0; d < len.size(); ++d)
    if (len[d] == 0) out.stats.empty_documents.push_back(out.doc_ids[d]);
  return out;
}

/// x_ij = (n_ij / n_.j) * log10(M / m_i), terms as rows. n_.j counts the
/// retained terms of document j.
inline DenseMatrix tfidf(const DocumentTermMatrix& dtm) {
  const std::size_t m_docs = dtm.n_docs();
  const auto len = dtm.doc_lengths();
  for (std::size_t d = 0; d < m_docs; ++d) {
    if (len[d] == 0) throw InputError("document '" + dtm.doc_ids[d] + "' has no retained terms");
  }
  DenseMatrix x(dtm.n_terms(), m_docs);
  for (std::size_t t = 0; t < dtm.n_terms(); ++t) {
    const double idf = std::log10(static_cast<double>(m_docs) / static_cast<double>(dtm.counts[t].size()));
    for (const auto& tc : dtm.counts[t]) {
      x(t, tc.doc) = static_cast<double>(tc.count) / static_cast<double>(len[tc.doc]) * idf;
    }
  }
  return x;
}

/// Share of cells that are exactly zero.
inline double sparsity(const DenseMatrix& x) {
  if (x.empty()) return 0.0;
  const auto zeros = std::count(x.values().begin(), x.values().end(), 0.0);
  return static_cast<double>(zeros) / static_cast<double>(x.values().size());
}

}  // namespace cocluster
