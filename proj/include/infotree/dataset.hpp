#pragma once

// Labeled categorical datasets plus the two preprocessing steps used before
// TAN fitting: uniform quantization and attribute clustering.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "infotree/histogram.hpp"

namespace infotree {

/// n records of d attribute symbols plus a class symbol. Attributes are stored
/// row-major.
struct LabeledDataset {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::vector<Symbol> attributes;
  std::vector<Symbol> labels;
  std::vector<std::size_t> alphabet;
  std::size_t classes = 0;
  std::vector<std::string> names;
  std::string label_name = "class";

  Symbol at(std::size_t r, std::size_t a) const { return attributes[r * dims + a]; }
  std::span<const Symbol> row(std::size_t r) const { return {attributes.data() + r * dims, dims}; }

  void validate() const {
    if (rows < 1) throw std::invalid_argument("LabeledDataset: needs at least one record");
    if (dims < 1) throw std::invalid_argument("LabeledDataset: needs at least one attribute");
    if (attributes.size() != rows * dims || labels.size() != rows || alphabet.size() != dims) {
      throw std::invalid_argument("LabeledDataset: inconsistent shapes");
    }
    if (classes < 1) throw std::invalid_argument("LabeledDataset: class alphabet is empty");
    for (std::size_t r = 0; r < rows; ++r) {
      if (labels[r] >= classes) {
        throw std::invalid_argument("LabeledDataset: row " + std::to_string(r) + " has out-of-range class");
      }
      for (std::size_t a = 0; a < dims; ++a) {
        if (at(r, a) >= alphabet[a]) {
          throw std::invalid_argument("LabeledDataset: row " + std::to_string(r) + ", attribute " +
                                      std::to_string(a) + " is outside its alphabet");
        }
      }
    }
  }

  /// Rows selected by index, in the given order.
  LabeledDataset subset(std::span<const std::size_t> idx) const {
    LabeledDataset out;
    out.rows = idx.size();
    out.dims = dims;
    out.alphabet = alphabet;
    out.classes = classes;
    out.names = names;
    out.label_name = label_name;
    out.attributes.reserve(idx.size() * dims);
    out.labels.reserve(idx.size());
    for (auto r : idx) {
      const auto src = row(r);
      out.attributes.insert(out.attributes.end(), src.begin(), src.end());
      out.labels.push_back(labels[r]);
    }
    return out;
  }
};

struct Quantized {
  std::vector<Symbol> symbols;
  std::vector<double> edges;  // bins + 1 boundaries, min .. max
};

/// Equal-width binning over the column's range. A value maps to
/// min(floor((v - min) / width), bins - 1); a constant column maps to 0.
inline Quantized quantize_uniform(std::span<const double> column, std::size_t bins = 10) {
  if (column.empty()) throw std::invalid_argument("quantize_uniform: empty column");
  if (bins == 0) throw std::invalid_argument("quantize_uniform: bins must be positive");
  for (double v : column) {
    if (!std::isfinite(v)) throw std::invalid_argument("quantize_uniform: non-finite value");
  }
  const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
  const double lo = *lo_it, hi = *hi_it;
  Quantized q;
  q.symbols.assign(column.size(), 0);
  q.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) q.edges[b] = lo + width * static_cast<double>(b);
  q.edges.back() = hi;
  if (!(width > 0.0)) return q;
  for (std::size_t i = 0; i < column.size(); ++i) {
    const double k = std::floor((column[i] - lo) / width);
    q.symbols[i] = static_cast<Symbol>(std::min<double>(k, static_cast<double>(bins - 1)));
  }
  return q;
}

/// Merges each group of attributes into one attribute whose symbol is the
/// mixed-radix code of its members (first listed member most significant).
inline LabeledDataset cluster_attributes(const LabeledDataset& data,
                                         const std::vector<std::vector<std::size_t>>& groups) {
  std::vector<int> seen(data.dims, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("cluster_attributes: empty group");
    for (auto a : g) {
      if (a >= data.dims) throw std::invalid_argument("cluster_attributes: attribute index out of range");
      if (seen[a]++) throw std::invalid_argument("cluster_attributes: attribute " + std::to_string(a) +
                                                 " appears in more than one group");
    }
  }
  for (std::size_t a = 0; a < data.dims; ++a) {
    if (!seen[a]) throw std::invalid_argument("cluster_attributes: attribute " + std::to_string(a) + " not covered");
  }
  LabeledDataset out;
  out.rows = data.rows;
  out.dims = groups.size();
  out.classes = data.classes;
  out.labels = data.labels;
  out.label_name = data.label_name;
  for (const auto& g : groups) {
    std::size_t size = 1;
    std::string name;
    for (auto a : g) {
      if (size > std::numeric_limits<Symbol>::max() / data.alphabet[a]) {
        throw std::invalid_argument("cluster_attributes: merged alphabet too large");
      }
      size *= data.alphabet[a];
      const auto member = a < data.names.size() ? data.names[a] : "x" + std::to_string(a);
      name += name.empty() ? member : "+" + member;
    }
    out.alphabet.push_back(size);
    out.names.push_back(name);
  }
  out.attributes.resize(out.rows * out.dims);
  for (std::size_t r = 0; r < data.rows; ++r) {
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      std::size_t code = 0;
      for (auto a : groups[gi]) code = code * data.alphabet[a] + data.at(r, a);
      out.attributes[r * out.dims + gi] = static_cast<Symbol>(code);
    }
  }
  return out;
}

/// Parses "0,1|2,3,4" into attribute groups.
inline std::vector<std::vector<std::size_t>> parse_cluster_spec(const std::string& spec) {
  std::vector<std::vector<std::size_t>> groups(1);
  std::string num;
  auto flush = [&] {
    if (num.empty()) throw std::invalid_argument("cluster spec: empty attribute index in '" + spec + "'");
    groups.back().push_back(static_cast<std::size_t>(std::stoul(num)));
    num.clear();
  };
  for (char ch : spec) {
    if (ch == ' ') continue;
    if (ch == ',') {
      flush();
    } else if (ch == '|') {
      flush();
      groups.emplace_back();
    } else if (ch >= '0' && ch <= '9') {
      num += ch;
    } else {
      throw std::invalid_argument("cluster spec: unexpected character in '" + spec + "'");
    }
  }
  flush();
  return groups;
}

}  // namespace infotree
