#pragma once

// CSV ingestion and emission. CSV is the only interchange format.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <type_traits>
#include <variant>
#include <vector>

#include "infotree/dataset.hpp"
#include "infotree/graphical.hpp"
#include "infotree/histogram.hpp"

namespace infotree {

inline constexpr const char* kVersion = "0.1.0";

/// Seed from INFOTREE_SEED, else `fallback`.
inline std::uint64_t default_seed(std::uint64_t fallback = 1) {
  if (const char* env = std::getenv("INFOTREE_SEED"); env && *env) {
    std::uint64_t v = 0;
    const std::string s(env);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw std::invalid_argument("INFOTREE_SEED is not an unsigned integer: '" + s + "'");
    }
    return v;
  }
  return fallback;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for diagnostics.
  std::vector<std::size_t> lines;

  std::optional<std::size_t> column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (quoted) throw std::runtime_error("line " + std::to_string(lineno) + ": unterminated quoted field");
  out.push_back(std::move(cur));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_unsigned(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads a CSV stream. Blank lines and lines starting with '#' are skipped.
/// With `has_header` the first remaining line names the columns; every row
/// must have the same number of fields.
inline CsvTable read_csv(std::istream& in, bool has_header = true) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto fields = detail::split_csv_line(line, lineno);
    if (first) {
      width = fields.size();
      first = false;
      if (has_header) {
        t.header = std::move(fields);
        continue;
      }
    }
    if (fields.size() != width) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected " + std::to_string(width) +
                               " fields, found " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(lineno);
  }
  return t;
}

inline CsvTable read_csv_file(const std::string& path, bool has_header = true) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  try {
    return read_csv(in, has_header);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

struct LoadOptions {
  /// Class column name; empty selects the last column.
  std::string label_col;
  std::size_t quantize_bins = 10;
  /// Treat columns of non-negative integers as symbols directly (alphabet =
  /// max + 1) instead of quantizing them.
  bool integer_symbols = false;
};

namespace detail {

struct TypedColumn {
  std::vector<Symbol> symbols;
  std::size_t alphabet = 0;
};

inline TypedColumn categorical_column(const CsvTable& t, std::size_t c) {
  TypedColumn out;
  std::unordered_map<std::string, Symbol> code;
  out.symbols.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    auto [it, inserted] = code.emplace(row[c], static_cast<Symbol>(code.size()));
    out.symbols.push_back(it->second);
  }
  out.alphabet = std::max<std::size_t>(code.size(), 1);
  return out;
}

inline TypedColumn typed_column(const CsvTable& t, std::size_t c, const LoadOptions& opts,
                                const std::string& path) {
  std::vector<double> values;
  values.reserve(t.rows.size());
  bool numeric = true, all_int = true;
  for (const auto& row : t.rows) {
    const auto v = parse_number(row[c]);
    if (!v) {
      numeric = false;
      break;
    }
    values.push_back(*v);
    if (!parse_unsigned(row[c])) all_int = false;
  }
  if (!numeric) return categorical_column(t, c);
  for (std::size_t r = 0; r < values.size(); ++r) {
    if (!std::isfinite(values[r])) {
      throw std::runtime_error(path + ": line " + std::to_string(t.lines[r]) + ", column '" + t.header[c] +
                               "': non-finite value '" + t.rows[r][c] + "' in numeric column");
    }
  }
  TypedColumn out;
  if (opts.integer_symbols && all_int) {
    std::size_t mx = 0;
    for (double v : values) mx = std::max(mx, static_cast<std::size_t>(v));
    out.alphabet = mx + 1;
    out.symbols.reserve(values.size());
    for (double v : values) out.symbols.push_back(static_cast<Symbol>(v));
    return out;
  }
  auto q = quantize_uniform(values, opts.quantize_bins);
  out.symbols = std::move(q.symbols);
  out.alphabet = opts.quantize_bins;
  return out;
}

}  // namespace detail

/// Loads a labeled dataset from a CSV file with a header row. Numeric columns
/// are quantized with quantize_uniform; other columns (and the label) are
/// categorical, with symbols numbered by first appearance.
inline LabeledDataset load_dataset(const std::string& path, const LoadOptions& opts = {}) {
  const auto t = read_csv_file(path);
  if (t.header.size() < 2) throw std::runtime_error(path + ": need at least one attribute and a label column");
  if (t.rows.empty()) throw std::runtime_error(path + ": no data rows");
  std::size_t label = t.header.size() - 1;
  if (!opts.label_col.empty()) {
    const auto c = t.column(opts.label_col);
    if (!c) throw std::runtime_error(path + ": label column '" + opts.label_col + "' not found");
    label = *c;
  }
  LabeledDataset d;
  d.rows = t.rows.size();
  d.label_name = t.header[label];
  const auto lab = detail::categorical_column(t, label);
  d.labels = lab.symbols;
  d.classes = lab.alphabet;
  std::vector<detail::TypedColumn> cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == label) continue;
    cols.push_back(detail::typed_column(t, c, opts, path));
    d.names.push_back(t.header[c]);
    d.alphabet.push_back(cols.back().alphabet);
  }
  d.dims = cols.size();
  d.attributes.resize(d.rows * d.dims);
  for (std::size_t r = 0; r < d.rows; ++r)
    for (std::size_t a = 0; a < d.dims; ++a) d.attributes[r * d.dims + a] = cols[a].symbols[r];
  d.validate();
  return d;
}

/// Loads an unlabeled symbol matrix (one column per variable) from a CSV file
/// with a header row. Columns are typed as in load_dataset.
inline SymbolMatrix load_symbol_matrix(const std::string& path, const LoadOptions& opts = {}) {
  const auto t = read_csv_file(path);
  if (t.rows.empty()) throw std::runtime_error(path + ": no data rows");
  SymbolMatrix m;
  m.rows = t.rows.size();
  m.cols = t.header.size();
  m.data.resize(m.rows * m.cols);
  for (std::size_t c = 0; c < m.cols; ++c) {
    const auto col = detail::typed_column(t, c, opts, path);
    m.alphabet.push_back(col.alphabet);
    for (std::size_t r = 0; r < m.rows; ++r) m(r, c) = col.symbols[r];
  }
  return m;
}

namespace detail {

/// Rows of unsigned integers, skipping a non-numeric header line if present.
inline std::vector<std::vector<std::uint64_t>> read_count_rows(const std::string& path, std::size_t width) {
  auto t = read_csv_file(path, false);
  std::vector<std::vector<std::uint64_t>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != width) {
      throw std::runtime_error(path + ": line " + std::to_string(t.lines[r]) + ": expected " +
                               std::to_string(width) + " fields");
    }
    std::vector<std::uint64_t> v;
    bool ok = true;
    for (const auto& f : row) {
      auto u = parse_unsigned(f);
      if (!u) {
        ok = false;
        break;
      }
      v.push_back(*u);
    }
    if (!ok) {
      if (r == 0) continue;  // header
      throw std::runtime_error(path + ": line " + std::to_string(t.lines[r]) + ": expected non-negative integers");
    }
    out.push_back(std::move(v));
  }
  return out;
}

inline std::size_t resolve_alphabet(std::size_t max_plus_one, std::optional<std::size_t> declared,
                                    const std::string& what) {
  if (!declared) return std::max<std::size_t>(max_plus_one, 1);
  if (*declared < max_plus_one) {
    throw std::invalid_argument(what + " alphabet " + std::to_string(*declared) + " is smaller than largest index + 1 (" +
                                std::to_string(max_plus_one) + ")");
  }
  if (*declared == 0) throw std::invalid_argument(what + " alphabet must be positive");
  return *declared;
}

}  // namespace detail

/// `symbol,count` rows. The alphabet is max index + 1 unless declared.
inline Histogram read_counts(const std::string& path, std::optional<std::size_t> alphabet = std::nullopt) {
  const auto rows = detail::read_count_rows(path, 2);
  std::size_t mx = 0;
  for (const auto& r : rows) mx = std::max<std::size_t>(mx, r[0] + 1);
  const auto s = detail::resolve_alphabet(mx, alphabet, "declared");
  std::vector<Count> c(s, 0);
  for (const auto& r : rows) c[r[0]] += r[1];
  return Histogram(std::move(c));
}

/// `row,col,count` rows.
inline JointHistogram read_joint_counts(const std::string& path, std::optional<std::size_t> rows_alphabet = std::nullopt,
                                        std::optional<std::size_t> cols_alphabet = std::nullopt) {
  const auto rows = detail::read_count_rows(path, 3);
  std::size_t mr = 0, mc = 0;
  for (const auto& r : rows) {
    mr = std::max<std::size_t>(mr, r[0] + 1);
    mc = std::max<std::size_t>(mc, r[1] + 1);
  }
  JointHistogram j(detail::resolve_alphabet(mr, rows_alphabet, "row"),
                   detail::resolve_alphabet(mc, cols_alphabet, "column"));
  for (const auto& r : rows) j.add(r[0], r[1], r[2]);
  return j;
}

using CsvCell = std::variant<std::int64_t, std::uint64_t, double, std::string>;
using CsvRow = std::vector<CsvCell>;

/// Formats a real with 12 significant digits.
inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string format_cell(const CsvCell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_real(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string q = "\"";
          for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          return q + "\"";
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

/// Writes optional '# ' comment lines, the header, then the rows. Every row
/// must match the schema's width.
inline void write_csv(std::ostream& out, const std::vector<std::string>& schema, const std::vector<CsvRow>& rows,
                      const std::vector<std::string>& comments = {}) {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.size()) {
      throw std::invalid_argument("emit_csv: row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                                  " fields, schema has " + std::to_string(schema.size()));
    }
  }
  for (const auto& c : comments) out << "# " << c << '\n';
  for (std::size_t i = 0; i < schema.size(); ++i) out << (i ? "," : "") << schema[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
}

/// Writes to `path`, or to standard output when `path` is "-".
inline void emit_csv(const std::vector<CsvRow>& rows, const std::vector<std::string>& schema, const std::string& path,
                     const std::vector<std::string>& comments = {}) {
  std::ostringstream buf;
  write_csv(buf, schema, rows, comments);
  if (path == "-") {
    std::cout << buf.str() << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << buf.str();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// Writes a labeled dataset as CSV: attributes as integer symbols, then the
/// class column.
inline void write_dataset_csv(const LabeledDataset& d, const std::string& path,
                              const std::vector<std::string>& comments = {}) {
  std::vector<std::string> schema;
  for (std::size_t a = 0; a < d.dims; ++a) schema.push_back(a < d.names.size() ? d.names[a] : "x" + std::to_string(a));
  schema.push_back(d.label_name);
  std::vector<CsvRow> rows(d.rows);
  for (std::size_t r = 0; r < d.rows; ++r) {
    for (std::size_t a = 0; a < d.dims; ++a) rows[r].emplace_back(std::uint64_t{d.at(r, a)});
    rows[r].emplace_back("c" + std::to_string(d.labels[r]));
  }
  emit_csv(rows, schema, path, comments);
}

inline void write_symbol_matrix_csv(const SymbolMatrix& m, const std::string& path,
                                    const std::vector<std::string>& comments = {}) {
  std::vector<std::string> schema;
  for (std::size_t c = 0; c < m.cols; ++c) schema.push_back("x" + std::to_string(c));
  std::vector<CsvRow> rows(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) rows[r].emplace_back(std::uint64_t{m(r, c)});
  emit_csv(rows, schema, path, comments);
}

}  // namespace infotree
