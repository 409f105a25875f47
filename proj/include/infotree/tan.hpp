#pragma once

// Tree-augmented naive Bayes with pluggable conditional-MI estimators.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "infotree/dataset.hpp"
#include "infotree/estimators.hpp"
#include "infotree/graphical.hpp"
#include "infotree/parallel.hpp"
#include "infotree/rng.hpp"

namespace infotree {

/// P(C) prod_i P(X_i | X_parent(i), C), attribute tree rooted at attribute 0.
///
/// cpt[i] is indexed ((c * S_parent + x_parent) * S_i + x_i); the root uses
/// S_parent = 1.
struct TanModel {
  std::vector<double> prior;
  TreeStructure tree;
  std::size_t root = 0;
  std::vector<std::size_t> parent;
  std::vector<std::size_t> alphabet;
  std::vector<std::vector<double>> cpt;
  /// Single attribute: the model is naive Bayes over that attribute.
  bool degenerate = false;

  std::size_t classes() const noexcept { return prior.size(); }
  std::size_t dims() const noexcept { return alphabet.size(); }
  std::size_t parent_size(std::size_t i) const { return i == root ? 1 : alphabet[parent[i]]; }

  double prob(std::size_t i, std::size_t c, std::size_t x_parent, std::size_t x) const {
    return cpt[i][(c * parent_size(i) + x_parent) * alphabet[i] + x];
  }
};

/// Conditional mutual information I(X_i; X_j | C) for every attribute pair.
inline EdgeWeights conditional_mi_weights(const LabeledDataset& data, EstimatorKind kind,
                                          const EstimatorConfig& cfg = {}) {
  const auto d = data.dims;
  EdgeWeights w(d, kind == EstimatorKind::poly ? WeightProvenance::poly_mi : WeightProvenance::empirical_mi);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      SparseJointHistogram t({data.alphabet[i], data.alphabet[j], data.classes});
      std::array<Symbol, 3> tuple{};
      for (std::size_t r = 0; r < data.rows; ++r) {
        tuple = {data.at(r, i), data.at(r, j), data.labels[r]};
        t.add(tuple);
      }
      w.set(i, j, conditional_mutual_information(t, kind, cfg));
    }
  }
  return w;
}

/// Prior and CPTs for a given attribute tree, by unsmoothed empirical
/// frequencies; unseen (parent value, class) contexts get a uniform column.
inline TanModel fit_tan_parameters(const LabeledDataset& data, const TreeStructure& tree) {
  TanModel m;
  m.tree = tree;
  m.root = 0;
  m.alphabet = data.alphabet;
  m.parent = tree.orient(0).first;
  m.degenerate = data.dims == 1;
  const auto nc = data.classes;
  std::vector<double> class_count(nc, 0.0);
  for (auto c : data.labels) class_count[c] += 1.0;
  m.prior.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) m.prior[c] = class_count[c] / static_cast<double>(data.rows);
  m.cpt.resize(data.dims);
  for (std::size_t i = 0; i < data.dims; ++i) {
    const auto si = m.alphabet[i];
    const auto sp = m.parent_size(i);
    std::vector<double> counts(nc * sp * si, 0.0), context(nc * sp, 0.0);
    for (std::size_t r = 0; r < data.rows; ++r) {
      const std::size_t xp = i == m.root ? 0 : data.at(r, m.parent[i]);
      const std::size_t ctx = data.labels[r] * sp + xp;
      counts[ctx * si + data.at(r, i)] += 1.0;
      context[ctx] += 1.0;
    }
    for (std::size_t ctx = 0; ctx < nc * sp; ++ctx) {
      for (std::size_t x = 0; x < si; ++x) {
        auto& v = counts[ctx * si + x];
        v = context[ctx] > 0.0 ? v / context[ctx] : 1.0 / static_cast<double>(si);
      }
    }
    m.cpt[i] = std::move(counts);
  }
  return m;
}

/// TAN whose attribute tree is the maximum-weight spanning tree of `weights`.
inline TanModel fit_tan_from_weights(const LabeledDataset& data, const EdgeWeights& weights) {
  data.validate();
  if (data.dims == 1) return fit_tan_parameters(data, TreeStructure(1, {}));
  return fit_tan_parameters(data, mwst(weights));
}

inline TanModel fit_tan(const LabeledDataset& data, EstimatorKind kind, const EstimatorConfig& cfg = {}) {
  data.validate();
  if (data.rows < 2) throw std::invalid_argument("fit_tan: needs at least 2 records");
  if (data.dims == 1) return fit_tan_parameters(data, TreeStructure(1, {}));
  return fit_tan_from_weights(data, conditional_mi_weights(data, kind, cfg));
}

/// Per-class log posterior (up to a constant): ln P(c) + sum_i ln P(x_i | x_parent, c).
inline std::vector<double> class_log_scores(const TanModel& m, std::span<const Symbol> x) {
  if (x.size() != m.dims()) throw std::invalid_argument("predict: attribute vector has wrong length");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= m.alphabet[i]) {
      throw std::invalid_argument("predict: attribute " + std::to_string(i) + " symbol outside its alphabet");
    }
  }
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> score(m.classes());
  for (std::size_t c = 0; c < m.classes(); ++c) {
    double s = m.prior[c] > 0.0 ? std::log(m.prior[c]) : neg_inf;
    for (std::size_t i = 0; i < x.size() && s != neg_inf; ++i) {
      const std::size_t xp = i == m.root ? 0 : x[m.parent[i]];
      const double p = m.prob(i, c, xp, x[i]);
      s = p > 0.0 ? s + std::log(p) : neg_inf;
    }
    score[c] = s;
  }
  return score;
}

/// MAP class; ties (including every class at -inf) go to the lowest index.
inline Symbol predict(const TanModel& m, std::span<const Symbol> x) {
  const auto score = class_log_scores(m, x);
  std::size_t best = 0;
  for (std::size_t c = 1; c < score.size(); ++c)
    if (score[c] > score[best]) best = c;
  return static_cast<Symbol>(best);
}

inline double error_rate(const TanModel& m, const LabeledDataset& test) {
  if (test.rows == 0) return 0.0;
  std::size_t wrong = 0;
  for (std::size_t r = 0; r < test.rows; ++r)
    if (predict(m, test.row(r)) != test.labels[r]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(test.rows);
}

struct FoldResult {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::size_t test_size = 0;
  double error = 0.0;
  /// FNV-1a hash of the fold's test-row indices, for auditing that two runs
  /// used identical partitions.
  std::uint64_t partition_hash = 0;
};

struct EvalReport {
  EstimatorKind kind = EstimatorKind::mle;
  std::vector<FoldResult> folds;
  std::vector<std::uint64_t> repeat_seeds;
  double aggregate = 0.0;
  double wall_seconds = 0.0;

  /// Mean fold error within one repeat.
  double repeat_mean(std::size_t repeat) const {
    double s = 0.0;
    std::size_t k = 0;
    for (const auto& f : folds)
      if (f.repeat == repeat) {
        s += f.error;
        ++k;
      }
    return k ? s / static_cast<double>(k) : 0.0;
  }
};

namespace detail {

inline std::uint64_t fnv1a(std::span<const std::size_t> idx) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto v : idx) {
    for (int b = 0; b < 8; ++b) {
      h ^= (static_cast<std::uint64_t>(v) >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

/// Fold boundaries: the first (n mod folds) folds get one extra row.
inline std::vector<std::size_t> fold_offsets(std::size_t n, std::size_t folds) {
  std::vector<std::size_t> off(folds + 1, 0);
  for (std::size_t f = 0; f < folds; ++f) off[f + 1] = off[f] + n / folds + (f < n % folds ? 1 : 0);
  return off;
}

}  // namespace detail

/// Repeated k-fold cross-validation. Each repeat shuffles the rows with a
/// stream derived from (seed, repeat), so runs with the same seed use identical
/// partitions whatever the estimator.
inline EvalReport cross_validate(const LabeledDataset& data, EstimatorKind kind, const EstimatorConfig& cfg,
                                 std::size_t folds, std::size_t repeats, std::uint64_t seed) {
  data.validate();
  if (folds < 2) throw std::invalid_argument("cross_validate: need at least 2 folds");
  if (data.rows < folds) throw std::invalid_argument("cross_validate: fewer rows than folds");
  if (repeats < 1) throw std::invalid_argument("cross_validate: need at least 1 repeat");
  const auto t0 = std::chrono::steady_clock::now();
  EvalReport rep;
  rep.kind = kind;
  rep.folds.resize(folds * repeats);
  rep.repeat_seeds.resize(repeats);
  const SeededGenerator master(seed);
  const auto off = detail::fold_offsets(data.rows, folds);
  parallel_for(repeats * folds, [&](std::size_t cell) {
    const auto r = cell / folds, f = cell % folds;
    auto gen = derive_stream(master, r, StreamTag::cross_validation);
    std::vector<std::size_t> perm(data.rows);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    gen.shuffle(perm);
    std::vector<std::size_t> train, test(perm.begin() + static_cast<std::ptrdiff_t>(off[f]),
                                         perm.begin() + static_cast<std::ptrdiff_t>(off[f + 1]));
    train.reserve(data.rows - test.size());
    train.insert(train.end(), perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(off[f]));
    train.insert(train.end(), perm.begin() + static_cast<std::ptrdiff_t>(off[f + 1]), perm.end());
    const auto model = fit_tan(data.subset(train), kind, cfg);
    FoldResult& out = rep.folds[cell];
    out.repeat = r;
    out.fold = f;
    out.test_size = test.size();
    out.error = error_rate(model, data.subset(test));
    out.partition_hash = detail::fnv1a(test);
    if (f == 0) rep.repeat_seeds[r] = gen.key() ^ gen.stream();
  });
  double s = 0.0;
  for (const auto& f : rep.folds) s += f.error;
  rep.aggregate = s / static_cast<double>(rep.folds.size());
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

struct CurvePoint {
  std::size_t size = 0;
  EstimatorKind kind = EstimatorKind::mle;
  double mean_error = 0.0;
};

/// For each subset size n': `mc` random subsets of n' rows, trained on the
/// first floor(4n'/5) and tested on the remaining rows. Every kind sees the
/// same subsets and splits.
inline std::vector<CurvePoint> learning_curve(const LabeledDataset& data, std::span<const EstimatorKind> kinds,
                                              const EstimatorConfig& cfg, std::span<const std::size_t> sizes,
                                              std::size_t mc, std::uint64_t seed) {
  data.validate();
  if (mc < 1) throw std::invalid_argument("learning_curve: mc must be at least 1");
  for (auto s : sizes) {
    if (s > data.rows) throw std::invalid_argument("learning_curve: size " + std::to_string(s) + " exceeds data");
    if (s < 5) throw std::invalid_argument("learning_curve: size must be at least 5");
  }
  const SeededGenerator master(seed);
  const auto nk = kinds.size();
  std::vector<double> errors(sizes.size() * mc * nk, 0.0);
  parallel_for(sizes.size() * mc, [&](std::size_t cell) {
    const auto si = cell / mc, trial = cell % mc;
    auto gen = derive_stream(derive_stream(master, si, StreamTag::learning_curve), trial, StreamTag::subset);
    std::vector<std::size_t> perm(data.rows);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    gen.shuffle(perm);
    const auto n = sizes[si];
    const auto n_train = 4 * n / 5;
    std::span<const std::size_t> all(perm.data(), n);
    const auto train = data.subset(all.first(n_train));
    const auto test = data.subset(all.subspan(n_train));
    for (std::size_t k = 0; k < nk; ++k) {
      errors[cell * nk + k] = error_rate(fit_tan(train, kinds[k], cfg), test);
    }
  });
  std::vector<CurvePoint> out;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    for (std::size_t k = 0; k < nk; ++k) {
      double s = 0.0;
      for (std::size_t t = 0; t < mc; ++t) s += errors[(si * mc + t) * nk + k];
      out.push_back({sizes[si], kinds[k], s / static_cast<double>(mc)});
    }
  }
  return out;
}

/// Random TAN model for synthetic studies: uniform random attribute tree
/// (Pruefer sequence), arcsine-law class prior and CPT columns.
inline TanModel random_tan_model(std::size_t d, std::size_t s, std::size_t classes, SeededGenerator& gen) {
  if (d < 1 || s < 1 || classes < 1) throw std::invalid_argument("random_tan_model: sizes must be positive");
  std::vector<Edge> edges;
  if (d == 2) {
    edges.emplace_back(0, 1);
  } else if (d > 2) {
    std::vector<std::size_t> pruefer(d - 2), degree(d, 1);
    for (auto& v : pruefer) {
      v = static_cast<std::size_t>(gen.uniform_below(d));
      ++degree[v];
    }
    for (auto v : pruefer) {
      std::size_t leaf = 0;
      while (degree[leaf] != 1) ++leaf;
      edges.emplace_back(leaf, v);
      --degree[leaf];
      --degree[v];
    }
    std::vector<std::size_t> last;
    for (std::size_t v = 0; v < d; ++v)
      if (degree[v] == 1) last.push_back(v);
    edges.emplace_back(last[0], last[1]);
  }
  TanModel m;
  m.tree = TreeStructure(d, std::move(edges));
  m.root = 0;
  m.parent = m.tree.orient(0).first;
  m.alphabet.assign(d, s);
  m.degenerate = d == 1;
  m.prior = detail::arcsine_simplex(classes, gen);
  m.cpt.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto contexts = classes * m.parent_size(i);
    m.cpt[i].resize(contexts * s);
    for (std::size_t ctx = 0; ctx < contexts; ++ctx) {
      const auto col = detail::arcsine_simplex(s, gen);
      std::copy(col.begin(), col.end(), m.cpt[i].begin() + static_cast<std::ptrdiff_t>(ctx * s));
    }
  }
  return m;
}

/// Draws n labeled records from a TAN model (class first, then attributes in
/// breadth-first order from the root).
inline LabeledDataset sample_tan(const TanModel& m, std::size_t n, SeededGenerator& gen) {
  LabeledDataset out;
  out.rows = n;
  out.dims = m.dims();
  out.alphabet = m.alphabet;
  out.classes = m.classes();
  for (std::size_t i = 0; i < out.dims; ++i) out.names.push_back("x" + std::to_string(i));
  out.attributes.resize(n * out.dims);
  out.labels.resize(n);
  const auto order = m.tree.orient(m.root).second;
  const CategoricalSampler class_sampler(m.prior);
  std::vector<std::vector<CategoricalSampler>> samplers(out.dims);
  for (std::size_t i = 0; i < out.dims; ++i) {
    const auto si = m.alphabet[i];
    const auto contexts = m.classes() * m.parent_size(i);
    for (std::size_t ctx = 0; ctx < contexts; ++ctx) {
      samplers[i].emplace_back(std::span<const double>(m.cpt[i].data() + ctx * si, si));
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = class_sampler(gen);
    out.labels[r] = static_cast<Symbol>(c);
    Symbol* row = out.attributes.data() + r * out.dims;
    for (auto i : order) {
      const std::size_t xp = i == m.root ? 0 : row[m.parent[i]];
      row[i] = static_cast<Symbol>(samplers[i][c * m.parent_size(i) + xp](gen));
    }
  }
  return out;
}

}  // namespace infotree
