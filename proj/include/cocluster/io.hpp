#pragma once

// File formats shared by the command-line tool.
//
// Matrix CSV: first row holds column ids, first column row ids, the corner
// cell is blank. JSON documents are written by hand so field order and the
// 17-significant-digit number format stay fixed; they are read back with
// nlohmann::json.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cocluster/clusterers.hpp"
#include "cocluster/error.hpp"
#include "cocluster/matrix.hpp"
#include "cocluster/membership.hpp"
#include "cocluster/modelselect.hpp"
#include "cocluster/synthgen.hpp"

namespace cocluster {

/// 17 significant digits; non-finite values become "NA" / "Inf" / "-Inf".
inline std::string format_full(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest decimal that reads back to the same double; for parameters
/// such as noise levels, where 0.1 should print as 0.1.
inline std::string format_param(double v) {
  if (!std::isfinite(v)) return format_full(v);
  char buf[40];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string format_fixed(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // "-0.000" reads as a sign error in tables
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

/// 64-bit FNV-1a digest of a byte string, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary file and renames it over `p`.
inline void write_file_atomic(const std::filesystem::path& p, std::string_view content) {
  namespace fs = std::filesystem;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw InputError("write failed for " + p.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("cannot move " + tmp.string() + " to " + p.string() + ": " + ec.message());
  }
}

// ---------------------------------------------------------------- CSV

struct LabeledMatrix {
  DenseMatrix x;
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline double parse_number(const std::string& cell, const std::string& where) {
  if (cell.empty()) throw InputError(where + ": empty cell");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw InputError(where + ": '" + cell + "' is not a number");
  }
  if (used != cell.size()) throw InputError(where + ": '" + cell + "' is not a number");
  if (!std::isfinite(v)) throw DomainError(where + ": value is not finite");
  return v;
}

}  // namespace detail

inline std::string matrix_to_csv(const LabeledMatrix& m) {
  std::string out;
  for (const auto& c : m.col_ids) {
    out += ',';
    out += detail::csv_field(c);
  }
  out += '\n';
  for (std::size_t i = 0; i < m.x.rows(); ++i) {
    out += detail::csv_field(m.row_ids[i]);
    for (std::size_t j = 0; j < m.x.cols(); ++j) {
      out += ',';
      out += format_full(m.x(i, j));
    }
    out += '\n';
  }
  return out;
}

/// Default ids r1..rN and c1..cJ.
inline LabeledMatrix with_default_ids(DenseMatrix x) {
  LabeledMatrix m{std::move(x), {}, {}};
  for (std::size_t i = 0; i < m.x.rows(); ++i) m.row_ids.push_back("r" + std::to_string(i + 1));
  for (std::size_t j = 0; j < m.x.cols(); ++j) m.col_ids.push_back("c" + std::to_string(j + 1));
  return m;
}

inline LabeledMatrix matrix_from_csv(const std::string& text, const std::string& source = "matrix") {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  LabeledMatrix m;
  std::vector<double> values;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (header) {
      m.col_ids.assign(cells.begin() + 1, cells.end());
      if (m.col_ids.empty()) throw InputError(source + ": header has no column ids");
      header = false;
      continue;
    }
    if (cells.size() != m.col_ids.size() + 1) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(m.col_ids.size() + 1) + " fields, found " + std::to_string(cells.size()));
    }
    m.row_ids.push_back(cells[0]);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      values.push_back(detail::parse_number(cells[j], source + ":" + std::to_string(lineno) + ":" + std::to_string(j + 1)));
    }
  }
  if (header) throw InputError(source + ": empty file");
  if (m.row_ids.empty()) throw InputError(source + ": no data rows");
  m.x = DenseMatrix(m.row_ids.size(), m.col_ids.size(), std::move(values));
  return m;
}

inline LabeledMatrix read_matrix_csv(const std::filesystem::path& p) {
  return matrix_from_csv(read_text_file(p), p.string());
}

// ---------------------------------------------------------------- JSON

namespace detail {

/// Minimal pretty JSON emitter with fixed field order.
class JsonWriter {
 public:
  JsonWriter& begin() {
    out_ = "{\n";
    first_ = true;
    return *this;
  }
  std::string end() {
    out_ += "\n}\n";
    return out_;
  }

  JsonWriter& field(std::string_view name, std::string_view raw_value) {
    if (!first_) out_ += ",\n";
    first_ = false;
    out_ += "  ";
    out_ += quote(name);
    out_ += ": ";
    out_ += raw_value;
    return *this;
  }

  static std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        case '\r': out += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
            out += buf;
          } else {
            out.push_back(c);
          }
      }
    }
    out += '"';
    return out;
  }

  static std::string number(double v) { return std::isfinite(v) ? format_full(v) : "null"; }

  template <class T>
  static std::string integer(T v) {
    return std::to_string(v);
  }

  static std::string boolean(bool v) { return v ? "true" : "false"; }

  template <class T, class F>
  static std::string array(const std::vector<T>& xs, F fmt) {
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) out += ", ";
      out += fmt(xs[i]);
    }
    out += "]";
    return out;
  }

  static std::string numbers(const std::vector<double>& xs) { return array(xs, [](double v) { return number(v); }); }

  static std::string labels(const Membership& m) {
    return array(m.one_based(), [](long long v) { return std::to_string(v); });
  }

  static std::string matrix(const DenseMatrix& y) {
    std::string out = "[";
    for (std::size_t k = 0; k < y.rows(); ++k) {
      if (k) out += ", ";
      const auto r = y.row(k);
      out += numbers(std::vector<double>(r.begin(), r.end()));
    }
    out += "]";
    return out;
  }

  static std::string strings(const std::vector<std::string>& xs) {
    return array(xs, [](const std::string& s) { return quote(s); });
  }

 private:
  std::string out_;
  bool first_ = true;
};

inline nlohmann::json parse_json(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(source + ": invalid JSON: " + e.what());
  }
}

template <class T>
T get_field(const nlohmann::json& j, const char* name, const std::string& source) {
  if (!j.contains(name)) throw InputError(source + ": missing field '" + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(source + ": field '" + name + "' has the wrong type");
  }
}

inline DenseMatrix matrix_field(const nlohmann::json& j, const char* name, const std::string& source) {
  const auto rows = get_field<std::vector<std::vector<double>>>(j, name, source);
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows[0].size();
  std::vector<double> v;
  for (const auto& row : rows) {
    if (row.size() != c) throw InputError(source + ": field '" + name + "' is ragged");
    v.insert(v.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(v));
}

inline std::vector<std::size_t> one_based_indices(const std::vector<std::size_t>& xs) {
  std::vector<std::size_t> out(xs);
  for (auto& x : out) ++x;
  return out;
}

}  // namespace detail

inline std::string model_to_json(const CoClusterModel& m) {
  using W = detail::JsonWriter;
  W w;
  w.begin()
      .field("algorithm", W::quote(algorithm_name(m.config.algorithm)))
      .field("K", W::integer(m.u.n_clusters()))
      .field("Q", W::integer(m.v.n_clusters()))
      .field("seed", W::integer(m.config.seed))
      .field("n_starts", W::integer(m.config.n_starts))
      .field("tol", W::number(m.config.tol))
      .field("max_iter", W::integer(m.config.max_iter))
      .field("row_labels", W::labels(m.u))
      .field("col_labels", W::labels(m.v))
      .field("centroids", W::matrix(m.centroids))
      .field("objective_raw", W::number(m.objective_raw))
      .field("objective_normalized", W::number(m.objective_normalized))
      .field("objective_trace", W::numbers(m.objective_trace))
      .field("converged", W::boolean(m.converged))
      .field("n_iterations", W::integer(m.n_iterations))
      .field("column_norms_of_centroids", W::numbers(m.column_norms_of_centroids))
      .field("flagged_zero_rows",
             W::array(detail::one_based_indices(m.flagged_zero_rows), [](std::size_t v) { return std::to_string(v); }))
      .field("best_start_index", W::integer(m.best_start_index))
      .field("zero_data_rows",
             W::array(detail::one_based_indices(m.zero_data_rows), [](std::size_t v) { return std::to_string(v); }));
  return w.end();
}

inline CoClusterModel model_from_json(const std::string& text, const std::string& source = "model") {
  const auto j = detail::parse_json(text, source);
  CoClusterModel m;
  m.config.algorithm = parse_algorithm(detail::get_field<std::string>(j, "algorithm", source));
  const auto k = detail::get_field<std::size_t>(j, "K", source);
  const auto q = detail::get_field<std::size_t>(j, "Q", source);
  m.config.n_row_clusters = k;
  m.config.n_col_clusters = q;
  m.config.seed = detail::get_field<std::uint64_t>(j, "seed", source);
  m.config.n_starts = detail::get_field<std::size_t>(j, "n_starts", source);
  m.config.tol = detail::get_field<double>(j, "tol", source);
  m.config.max_iter = detail::get_field<std::size_t>(j, "max_iter", source);
  try {
    m.u = Membership::from_one_based(detail::get_field<std::vector<long long>>(j, "row_labels", source), k);
    m.v = Membership::from_one_based(detail::get_field<std::vector<long long>>(j, "col_labels", source), q);
  } catch (const ConfigError& e) {
    throw InputError(source + ": " + e.what());
  }
  m.centroids = detail::matrix_field(j, "centroids", source);
  m.objective_raw = detail::get_field<double>(j, "objective_raw", source);
  m.objective_normalized = detail::get_field<double>(j, "objective_normalized", source);
  m.objective_trace = detail::get_field<std::vector<double>>(j, "objective_trace", source);
  m.converged = detail::get_field<bool>(j, "converged", source);
  m.n_iterations = detail::get_field<std::size_t>(j, "n_iterations", source);
  m.column_norms_of_centroids = detail::get_field<std::vector<double>>(j, "column_norms_of_centroids", source);
  for (auto r : detail::get_field<std::vector<std::size_t>>(j, "flagged_zero_rows", source)) {
    m.flagged_zero_rows.push_back(r - 1);
  }
  if (j.contains("best_start_index")) m.best_start_index = j.at("best_start_index").get<std::size_t>();
  if (j.contains("zero_data_rows")) {
    for (auto r : j.at("zero_data_rows").get<std::vector<std::size_t>>()) m.zero_data_rows.push_back(r - 1);
  }
  return m;
}

struct Truth {
  Membership u;
  Membership v;
  DenseMatrix y;
  double eps_centroid = 0.0;
  double eps_cluster = 0.0;
  std::uint64_t seed = 0;
};

inline std::string truth_to_json(const SyntheticDataset& ds) {
  using W = detail::JsonWriter;
  W w;
  w.begin()
      .field("N", W::integer(ds.x.rows()))
      .field("J", W::integer(ds.x.cols()))
      .field("K", W::integer(ds.true_u.n_clusters()))
      .field("Q", W::integer(ds.true_v.n_clusters()))
      .field("eps_centroid", W::number(ds.eps_centroid))
      .field("eps_cluster", W::number(ds.eps_cluster))
      .field("seed", W::integer(ds.seed))
      .field("row_labels", W::labels(ds.true_u))
      .field("col_labels", W::labels(ds.true_v))
      .field("centroids", W::matrix(ds.true_y))
      .field("base_centroids", W::matrix(ds.base_y))
      .field("centroids_truncated", W::boolean(ds.centroids_truncated));
  return w.end();
}

inline Truth truth_from_json(const std::string& text, const std::string& source = "truth") {
  const auto j = detail::parse_json(text, source);
  Truth t;
  const auto k = detail::get_field<std::size_t>(j, "K", source);
  const auto q = detail::get_field<std::size_t>(j, "Q", source);
  try {
    t.u = Membership::from_one_based(detail::get_field<std::vector<long long>>(j, "row_labels", source), k);
    t.v = Membership::from_one_based(detail::get_field<std::vector<long long>>(j, "col_labels", source), q);
  } catch (const ConfigError& e) {
    throw InputError(source + ": " + e.what());
  }
  t.y = detail::matrix_field(j, "centroids", source);
  t.eps_centroid = detail::get_field<double>(j, "eps_centroid", source);
  t.eps_cluster = detail::get_field<double>(j, "eps_cluster", source);
  t.seed = detail::get_field<std::uint64_t>(j, "seed", source);
  return t;
}

// ---------------------------------------------------------------- grids

/// Header row = Q values, first column = K values. `decimals` < 0 selects
/// the full-precision format.
inline std::string grid_to_csv(const PseudoFGrid& g, int decimals) {
  std::string out;
  for (auto q : g.q_values) out += "," + std::to_string(q);
  out += '\n';
  for (std::size_t a = 0; a < g.k_values.size(); ++a) {
    out += std::to_string(g.k_values[a]);
    for (std::size_t b = 0; b < g.q_values.size(); ++b) {
      const PseudoF& s = g.scores[a][b];
      out += ',';
      if (s.status == ScoreStatus::infinite) {
        out += "Inf";
      } else if (s.status != ScoreStatus::ok) {
        out += "NA";
      } else {
        out += decimals < 0 ? format_full(s.value) : format_fixed(s.value, decimals);
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace cocluster
