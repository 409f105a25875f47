#pragma once

// Chow-Liu tree learning, tree models, and the wrong-edges-ratio metric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "infotree/estimators.hpp"
#include "infotree/histogram.hpp"
#include "infotree/rng.hpp"

namespace infotree {

using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected spanning tree on d nodes. Edges are stored as (min, max) pairs
/// in lexicographic order.
class TreeStructure {
 public:
  TreeStructure() = default;
  TreeStructure(std::size_t d, std::vector<Edge> edges) : d_(d), edges_(std::move(edges)) {
    for (auto& [u, v] : edges_) {
      if (u > v) std::swap(u, v);
    }
    std::sort(edges_.begin(), edges_.end());
    if (!is_spanning_tree()) throw std::invalid_argument("TreeStructure: edges do not form a spanning tree");
  }

  /// Star centred on `hub`.
  static TreeStructure star(std::size_t d, std::size_t hub = 0) {
    std::vector<Edge> e;
    for (std::size_t v = 0; v < d; ++v)
      if (v != hub) e.emplace_back(hub, v);
    return TreeStructure(d, std::move(e));
  }

  /// Path 0 - 1 - ... - (d-1).
  static TreeStructure path(std::size_t d) {
    std::vector<Edge> e;
    for (std::size_t v = 1; v < d; ++v) e.emplace_back(v - 1, v);
    return TreeStructure(d, std::move(e));
  }

  std::size_t size() const noexcept { return d_; }
  std::span<const Edge> edges() const noexcept { return edges_; }

  bool contains(std::size_t u, std::size_t v) const {
    if (u > v) std::swap(u, v);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
  }

  /// Parent of every node when the tree is rooted at `root` (root's parent is
  /// itself), plus a breadth-first order starting at the root.
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> orient(std::size_t root) const {
    if (root >= d_) throw std::invalid_argument("TreeStructure: root out of range");
    std::vector<std::vector<std::size_t>> adj(d_);
    for (auto [u, v] : edges_) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
    std::vector<std::size_t> parent(d_, d_), order;
    order.reserve(d_);
    parent[root] = root;
    std::queue<std::size_t> q;
    q.push(root);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      order.push_back(u);
      for (auto v : adj[u]) {
        if (parent[v] == d_) {
          parent[v] = u;
          q.push(v);
        }
      }
    }
    return {parent, order};
  }

  bool is_star() const {
    if (d_ <= 2) return true;
    std::vector<std::size_t> degree(d_, 0);
    for (auto [u, v] : edges_) {
      ++degree[u];
      ++degree[v];
    }
    return std::any_of(degree.begin(), degree.end(), [&](std::size_t k) { return k == d_ - 1; });
  }

  friend bool operator==(const TreeStructure&, const TreeStructure&) = default;

 private:
  bool is_spanning_tree() const {
    if (d_ == 0 || edges_.size() + 1 != d_) return false;
    std::vector<std::size_t> root(d_);
    std::iota(root.begin(), root.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (root[x] != x) x = root[x] = root[root[x]];
      return x;
    };
    for (auto [u, v] : edges_) {
      if (u >= d_ || v >= d_ || u == v) return false;
      const auto a = find(u), b = find(v);
      if (a == b) return false;
      root[a] = b;
    }
    return true;
  }

  std::size_t d_ = 0;
  std::vector<Edge> edges_;
};

enum class WeightProvenance { empirical_mi, poly_mi, exact_mi, external };

/// Symmetric d x d edge-weight matrix (diagonal unused).
class EdgeWeights {
 public:
  EdgeWeights() = default;
  explicit EdgeWeights(std::size_t d, WeightProvenance prov = WeightProvenance::external)
      : d_(d), w_(d * d, 0.0), provenance_(prov) {}

  void set(std::size_t i, std::size_t j, double w) {
    if (i >= d_ || j >= d_) throw std::invalid_argument("EdgeWeights: index out of range");
    w_[i * d_ + j] = w;
    w_[j * d_ + i] = w;
  }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * d_ + j]; }
  std::size_t size() const noexcept { return d_; }
  WeightProvenance provenance() const noexcept { return provenance_; }

  double total(const TreeStructure& t) const {
    double s = 0.0;
    for (auto [u, v] : t.edges()) s += (*this)(u, v);
    return s;
  }

 private:
  std::size_t d_ = 0;
  std::vector<double> w_;
  WeightProvenance provenance_ = WeightProvenance::external;
};

/// Maximum-weight spanning tree by Kruskal. Candidate edges are ordered by
/// descending weight, then ascending (i, j); the tie-break is fixed.
inline TreeStructure mwst(const EdgeWeights& w) {
  const auto d = w.size();
  if (d < 2) throw std::invalid_argument("mwst: need at least 2 nodes");
  struct Cand {
    double w;
    std::size_t i, j;
  };
  std::vector<Cand> cands;
  cands.reserve(d * (d - 1) / 2);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (!std::isfinite(w(i, j))) throw std::invalid_argument("mwst: non-finite edge weight");
      cands.push_back({w(i, j), i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.w != b.w) return a.w > b.w;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<std::size_t> root(d), rank(d, 0);
  std::iota(root.begin(), root.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  std::vector<Edge> edges;
  for (const auto& c : cands) {
    auto a = find(c.i), b = find(c.j);
    if (a == b) continue;
    if (rank[a] < rank[b]) std::swap(a, b);
    root[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
    edges.emplace_back(c.i, c.j);
    if (edges.size() + 1 == d) break;
  }
  return TreeStructure(d, std::move(edges));
}

/// Row-major n x d matrix of symbols with per-column alphabet sizes.
struct SymbolMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Symbol> data;
  std::vector<std::size_t> alphabet;

  Symbol operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  Symbol& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }

  std::vector<Symbol> column(std::size_t c) const {
    std::vector<Symbol> out(rows);
    for (std::size_t r = 0; r < rows; ++r) out[r] = data[r * cols + c];
    return out;
  }
};

/// Tree-factored distribution P(X) = P(X_root) prod_i P(X_i | X_parent(i)).
/// conditionals[i] is column-stochastic: entry [x_i * S_parent + x_parent].
struct TreeModel {
  TreeStructure structure;
  std::size_t root = 0;
  std::vector<std::size_t> parent;
  std::vector<std::size_t> alphabet;
  std::vector<double> root_marginal;
  std::vector<std::vector<double>> conditionals;

  std::size_t size() const noexcept { return alphabet.size(); }

  double conditional(std::size_t node, std::size_t child_value, std::size_t parent_value) const {
    return conditionals[node][child_value * alphabet[parent[node]] + parent_value];
  }
};

/// Node marginals of a tree model by propagation from the root.
inline std::vector<std::vector<double>> node_marginals(const TreeModel& m) {
  const auto d = m.size();
  std::vector<std::vector<double>> marg(d);
  const auto order = m.structure.orient(m.root).second;
  marg[m.root] = m.root_marginal;
  for (auto v : order) {
    if (v == m.root) continue;
    const auto p = m.parent[v];
    marg[v].assign(m.alphabet[v], 0.0);
    for (std::size_t xv = 0; xv < m.alphabet[v]; ++xv)
      for (std::size_t xp = 0; xp < m.alphabet[p]; ++xp) marg[v][xv] += m.conditional(v, xv, xp) * marg[p][xp];
  }
  return marg;
}

/// Exact pairwise joint P(X_i = a, X_j = b) of a tree model, row-major S_i x S_j.
inline std::vector<double> exact_pair_joint(const TreeModel& m, std::size_t i, std::size_t j,
                                            const std::vector<std::vector<double>>& marg) {
  // Walk the tree path i -> j, carrying J(a, x) = P(X_i = a, X_cur = x).
  const auto [par, order] = m.structure.orient(i);
  std::vector<std::size_t> path{j};
  while (path.back() != i) path.push_back(par[path.back()]);
  std::reverse(path.begin(), path.end());
  const auto si = m.alphabet[i];
  std::vector<double> joint(si * si, 0.0);
  for (std::size_t a = 0; a < si; ++a) joint[a * si + a] = marg[i][a];
  std::size_t cur_size = si;
  for (std::size_t step = 1; step < path.size(); ++step) {
    const auto from = path[step - 1], to = path[step];
    const auto st = m.alphabet[to];
    std::vector<double> next(si * st, 0.0);
    const bool down = m.parent[to] == from && to != m.root;
    for (std::size_t x = 0; x < cur_size; ++x) {
      for (std::size_t y = 0; y < st; ++y) {
        double t;
        if (down) {
          t = m.conditional(to, y, x);
        } else {
          // P(parent = y | child = x) by Bayes.
          t = marg[from][x] > 0.0 ? m.conditional(from, x, y) * marg[to][y] / marg[from][x] : 0.0;
        }
        if (t == 0.0) continue;
        for (std::size_t a = 0; a < si; ++a) next[a * st + y] += joint[a * cur_size + x] * t;
      }
    }
    joint = std::move(next);
    cur_size = st;
  }
  return joint;
}

/// Mutual information of a dense joint probability table, in nats.
inline double mutual_information_of(std::span<const double> joint, std::size_t rows, std::size_t cols) {
  std::vector<double> pr(rows, 0.0), pc(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      pr[r] += joint[r * cols + c];
      pc[c] += joint[r * cols + c];
    }
  double mi = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double p = joint[r * cols + c];
      if (p > 0.0) mi += p * std::log(p / (pr[r] * pc[c]));
    }
  return mi;
}

/// True pairwise mutual informations of a tree model.
inline EdgeWeights exact_mi_weights(const TreeModel& m) {
  const auto d = m.size();
  EdgeWeights w(d, WeightProvenance::exact_mi);
  const auto marg = node_marginals(m);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      w.set(i, j, mutual_information_of(exact_pair_joint(m, i, j, marg), m.alphabet[i], m.alphabet[j]));
  return w;
}

/// Estimated mutual information for every column pair.
inline EdgeWeights pairwise_mi_weights(const SymbolMatrix& samples, EstimatorKind kind,
                                       const EstimatorConfig& cfg = {}) {
  if (samples.rows < 2) throw std::invalid_argument("pairwise_mi_weights: need at least 2 samples");
  if (samples.cols < 2) throw std::invalid_argument("pairwise_mi_weights: need at least 2 columns");
  const auto d = samples.cols;
  EdgeWeights w(d, kind == EstimatorKind::poly ? WeightProvenance::poly_mi : WeightProvenance::empirical_mi);
  std::vector<std::vector<Symbol>> cols(d);
  for (std::size_t c = 0; c < d; ++c) cols[c] = samples.column(c);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const auto joint = JointHistogram::from_columns(cols[i], samples.alphabet[i], cols[j], samples.alphabet[j]);
      w.set(i, j, mutual_information(joint, kind, cfg));
    }
  }
  return w;
}

/// Fits root marginal and edge conditionals of `structure` (rooted at node 0)
/// by unsmoothed empirical frequencies. A parent value never observed gets a
/// uniform conditional column.
inline TreeModel fit_tree_parameters(const SymbolMatrix& samples, const TreeStructure& structure) {
  TreeModel m;
  m.structure = structure;
  m.root = 0;
  m.alphabet = samples.alphabet;
  m.parent = structure.orient(0).first;
  const double n = static_cast<double>(samples.rows);
  m.root_marginal.assign(m.alphabet[0], 0.0);
  for (std::size_t r = 0; r < samples.rows; ++r) m.root_marginal[samples(r, 0)] += 1.0;
  for (auto& v : m.root_marginal) v /= n;
  m.conditionals.resize(samples.cols);
  for (std::size_t v = 0; v < samples.cols; ++v) {
    if (v == m.root) continue;
    const auto p = m.parent[v];
    const auto sv = m.alphabet[v], sp = m.alphabet[p];
    std::vector<double> counts(sv * sp, 0.0), col_total(sp, 0.0);
    for (std::size_t r = 0; r < samples.rows; ++r) {
      counts[samples(r, v) * sp + samples(r, p)] += 1.0;
      col_total[samples(r, p)] += 1.0;
    }
    for (std::size_t xp = 0; xp < sp; ++xp) {
      for (std::size_t xv = 0; xv < sv; ++xv) {
        counts[xv * sp + xp] =
            col_total[xp] > 0.0 ? counts[xv * sp + xp] / col_total[xp] : 1.0 / static_cast<double>(sv);
      }
    }
    m.conditionals[v] = std::move(counts);
  }
  return m;
}

/// Chow-Liu: maximum-weight spanning tree over estimated pairwise mutual
/// information, with empirical edge distributions.
inline TreeModel chow_liu(const SymbolMatrix& samples, EstimatorKind kind, const EstimatorConfig& cfg = {}) {
  return fit_tree_parameters(samples, mwst(pairwise_mi_weights(samples, kind, cfg)));
}

/// Edges of `estimated` absent from `truth`, divided by d - 2.
inline double wrong_edges_ratio(const TreeStructure& estimated, const TreeStructure& truth) {
  if (estimated.size() != truth.size()) throw std::invalid_argument("wrong_edges_ratio: node counts differ");
  if (truth.size() < 3) throw std::invalid_argument("wrong_edges_ratio: need d >= 3");
  std::size_t wrong = 0;
  for (auto [u, v] : estimated.edges())
    if (!truth.contains(u, v)) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(truth.size() - 2);
}

namespace detail {

inline std::vector<double> arcsine_simplex(std::size_t s, SeededGenerator& gen) {
  std::vector<double> v(s);
  double total = 0.0;
  do {
    total = 0.0;
    for (auto& x : v) total += (x = gen.arcsine());
  } while (!(total > 0.0));
  for (auto& x : v) x /= total;
  return v;
}

}  // namespace detail

/// Star on d nodes rooted at node 0. The root marginal and each column of each
/// P(X_k | X_0) are i.i.d. Beta(1/2, 1/2) entries normalized to sum 1.
inline TreeModel random_star_model(std::size_t d, std::size_t s, SeededGenerator& gen) {
  if (d < 2) throw std::invalid_argument("random_star_model: need d >= 2");
  if (s < 2) throw std::invalid_argument("random_star_model: need alphabet size >= 2");
  TreeModel m;
  m.structure = TreeStructure::star(d, 0);
  m.root = 0;
  m.alphabet.assign(d, s);
  m.parent = m.structure.orient(0).first;
  m.root_marginal = detail::arcsine_simplex(s, gen);
  m.conditionals.resize(d);
  for (std::size_t v = 1; v < d; ++v) {
    auto& cond = m.conditionals[v];
    cond.assign(s * s, 0.0);
    for (std::size_t xp = 0; xp < s; ++xp) {
      const auto col = detail::arcsine_simplex(s, gen);
      for (std::size_t xv = 0; xv < s; ++xv) cond[xv * s + xp] = col[xv];
    }
  }
  return m;
}

/// Ancestral sampling: n i.i.d. rows, column j holding node j.
inline SymbolMatrix sample_from_tree(const TreeModel& m, std::size_t n, SeededGenerator& gen) {
  const auto d = m.size();
  SymbolMatrix out{n, d, std::vector<Symbol>(n * d), m.alphabet};
  const auto order = m.structure.orient(m.root).second;
  const CategoricalSampler root_sampler(m.root_marginal);
  std::vector<std::vector<CategoricalSampler>> samplers(d);
  for (std::size_t v = 0; v < d; ++v) {
    if (v == m.root) continue;
    const auto sp = m.alphabet[m.parent[v]], sv = m.alphabet[v];
    std::vector<double> col(sv);
    samplers[v].reserve(sp);
    for (std::size_t xp = 0; xp < sp; ++xp) {
      for (std::size_t xv = 0; xv < sv; ++xv) col[xv] = m.conditional(v, xv, xp);
      samplers[v].emplace_back(col);
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (auto v : order) {
      if (v == m.root) {
        out(r, v) = static_cast<Symbol>(root_sampler(gen));
      } else {
        out(r, v) = static_cast<Symbol>(samplers[v][out(r, m.parent[v])](gen));
      }
    }
  }
  return out;
}

}  // namespace infotree
