#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace infotree {

using Count = std::uint64_t;
using Symbol = std::uint32_t;

/// Fingerprint of a histogram: how many symbols carry each positive count, plus
/// the number of declared symbols never observed. Every estimator in this
/// library is a symmetric functional, so this is all it needs.
struct CountProfile {
  std::map<Count, Count> multiplicity;
  Count zeros = 0;
  Count n = 0;

  Count alphabet_size() const noexcept {
    Count s = zeros;
    for (const auto& [c, m] : multiplicity) s += m;
    return s;
  }
  Count observed() const noexcept { return alphabet_size() - zeros; }
};

/// 1-D symbol counts over a declared alphabet {0, ..., S-1}.
class Histogram {
 public:
  Histogram() = default;
  explicit Histogram(std::vector<Count> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw std::invalid_argument("Histogram: alphabet size must be at least 1");
    n_ = std::accumulate(counts_.begin(), counts_.end(), Count{0});
  }

  /// Tallies a column of symbols against an alphabet of `alphabet_size`.
  static Histogram from_symbols(std::span<const Symbol> symbols, std::size_t alphabet_size) {
    std::vector<Count> c(alphabet_size, 0);
    for (auto s : symbols) {
      if (s >= alphabet_size) throw std::invalid_argument("Histogram: symbol outside declared alphabet");
      ++c[s];
    }
    return Histogram(std::move(c));
  }

  std::span<const Count> counts() const noexcept { return counts_; }
  Count n() const noexcept { return n_; }
  std::size_t alphabet_size() const noexcept { return counts_.size(); }

  CountProfile profile() const {
    CountProfile p;
    p.n = n_;
    for (auto c : counts_) {
      if (c == 0) {
        ++p.zeros;
      } else {
        ++p.multiplicity[c];
      }
    }
    return p;
  }

 private:
  std::vector<Count> counts_;
  Count n_ = 0;
};

/// Dense S1 x S2 joint counts, row-major.
class JointHistogram {
 public:
  JointHistogram() = default;
  JointHistogram(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), counts_(rows * cols, 0) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("JointHistogram: both alphabets must be non-empty");
  }
  JointHistogram(std::size_t rows, std::size_t cols, std::vector<Count> counts)
      : rows_(rows), cols_(cols), counts_(std::move(counts)) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("JointHistogram: both alphabets must be non-empty");
    if (counts_.size() != rows * cols) throw std::invalid_argument("JointHistogram: counts size mismatch");
    n_ = std::accumulate(counts_.begin(), counts_.end(), Count{0});
  }

  static JointHistogram from_columns(std::span<const Symbol> a, std::size_t sa, std::span<const Symbol> b,
                                     std::size_t sb) {
    if (a.size() != b.size()) throw std::invalid_argument("JointHistogram: column lengths differ");
    JointHistogram j(sa, sb);
    for (std::size_t i = 0; i < a.size(); ++i) j.add(a[i], b[i]);
    return j;
  }

  void add(std::size_t r, std::size_t c, Count k = 1) {
    if (r >= rows_ || c >= cols_) throw std::invalid_argument("JointHistogram: symbol outside declared alphabet");
    counts_[r * cols_ + c] += k;
    n_ += k;
  }

  Count at(std::size_t r, std::size_t c) const { return counts_.at(r * cols_ + c); }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Count n() const noexcept { return n_; }
  std::span<const Count> counts() const noexcept { return counts_; }

  Histogram row_marginal() const {
    std::vector<Count> m(rows_, 0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) m[r] += counts_[r * cols_ + c];
    return Histogram(std::move(m));
  }
  Histogram col_marginal() const {
    std::vector<Count> m(cols_, 0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) m[c] += counts_[r * cols_ + c];
    return Histogram(std::move(m));
  }
  Histogram flattened() const { return Histogram(counts_); }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Count> counts_;
  Count n_ = 0;
};

/// Sparse N-D counts. Tuples are stored under their mixed-radix code (first
/// axis most significant), so the product of axis sizes must fit in 64 bits.
class SparseJointHistogram {
 public:
  SparseJointHistogram() = default;
  explicit SparseJointHistogram(std::vector<std::size_t> axis_sizes) : axes_(std::move(axis_sizes)) {
    if (axes_.empty()) throw std::invalid_argument("SparseJointHistogram: arity must be at least 1");
    Count prod = 1;
    for (auto s : axes_) {
      if (s == 0) throw std::invalid_argument("SparseJointHistogram: axis alphabets must be non-empty");
      if (prod > std::numeric_limits<Count>::max() / s) {
        throw std::invalid_argument("SparseJointHistogram: joint alphabet exceeds 2^64");
      }
      prod *= s;
    }
    alphabet_ = prod;
  }

  void add(std::span<const Symbol> tuple, Count k = 1) {
    if (tuple.size() != axes_.size()) throw std::invalid_argument("SparseJointHistogram: tuple arity mismatch");
    if (k == 0) return;
    counts_[encode(tuple)] += k;
    n_ += k;
  }

  Count at(std::span<const Symbol> tuple) const {
    auto it = counts_.find(encode(tuple));
    return it == counts_.end() ? 0 : it->second;
  }

  std::size_t arity() const noexcept { return axes_.size(); }
  std::span<const std::size_t> axis_sizes() const noexcept { return axes_; }
  Count alphabet_size() const noexcept { return alphabet_; }
  Count n() const noexcept { return n_; }
  std::size_t distinct() const noexcept { return counts_.size(); }

  /// Marginal over the listed axes, in the listed order.
  SparseJointHistogram marginalize(std::span<const std::size_t> keep) const {
    std::vector<std::size_t> sizes;
    for (auto a : keep) {
      if (a >= axes_.size()) throw std::invalid_argument("SparseJointHistogram: axis out of range");
      sizes.push_back(axes_[a]);
    }
    SparseJointHistogram out(std::move(sizes));
    std::vector<Symbol> full(axes_.size()), part(keep.size());
    for (const auto& [code, c] : counts_) {
      decode(code, full);
      for (std::size_t i = 0; i < keep.size(); ++i) part[i] = full[keep[i]];
      out.add(part, c);
    }
    return out;
  }

  CountProfile profile() const {
    CountProfile p;
    p.n = n_;
    for (const auto& [code, c] : counts_) ++p.multiplicity[c];
    p.zeros = alphabet_ - counts_.size();
    return p;
  }

  template <typename F>
  void for_each(F&& f) const {
    std::vector<Symbol> t(axes_.size());
    for (const auto& [code, c] : counts_) {
      decode(code, t);
      f(std::span<const Symbol>(t), c);
    }
  }

 private:
  Count encode(std::span<const Symbol> tuple) const {
    Count code = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
      if (tuple[i] >= axes_[i]) throw std::invalid_argument("SparseJointHistogram: symbol outside declared alphabet");
      code = code * axes_[i] + tuple[i];
    }
    return code;
  }
  void decode(Count code, std::span<Symbol> out) const {
    for (std::size_t i = axes_.size(); i-- > 0;) {
      out[i] = static_cast<Symbol>(code % axes_[i]);
      code /= axes_[i];
    }
  }

  std::vector<std::size_t> axes_;
  std::unordered_map<Count, Count> counts_;
  Count alphabet_ = 1;
  Count n_ = 0;
};

}  // namespace infotree
