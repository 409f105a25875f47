#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "infotree/graphical.hpp"
#include "infotree/rng.hpp"

using namespace infotree;

namespace {

// Decodes a Pruefer sequence into the edge list of a labeled tree.
std::vector<Edge> pruefer_tree(const std::vector<std::size_t>& seq, std::size_t d) {
  std::vector<std::size_t> degree(d, 1);
  for (auto v : seq) ++degree[v];
  std::vector<Edge> edges;
  for (auto v : seq) {
    for (std::size_t leaf = 0; leaf < d; ++leaf) {
      if (degree[leaf] == 1) {
        edges.emplace_back(leaf, v);
        --degree[leaf];
        --degree[v];
        break;
      }
    }
  }
  std::vector<std::size_t> last;
  for (std::size_t u = 0; u < d; ++u)
    if (degree[u] == 1) last.push_back(u);
  edges.emplace_back(last[0], last[1]);
  return edges;
}

// Every labeled spanning tree on d nodes (d^(d-2) of them).
std::vector<TreeStructure> all_trees(std::size_t d) {
  std::vector<TreeStructure> out;
  std::vector<std::size_t> seq(d - 2, 0);
  while (true) {
    out.emplace_back(d, pruefer_tree(seq, d));
    std::size_t i = 0;
    while (i < seq.size() && ++seq[i] == d) seq[i++] = 0;
    if (i == seq.size()) break;
  }
  return out;
}

TreeModel random_model(const TreeStructure& t, std::size_t s, SeededGenerator& g) {
  TreeModel m;
  m.structure = t;
  m.root = 0;
  m.alphabet.assign(t.size(), s);
  m.parent = t.orient(0).first;
  m.root_marginal = detail::arcsine_simplex(s, g);
  m.conditionals.resize(t.size());
  for (std::size_t v = 1; v < t.size(); ++v) {
    m.conditionals[v].assign(s * s, 0.0);
    for (std::size_t xp = 0; xp < s; ++xp) {
      const auto col = detail::arcsine_simplex(s, g);
      for (std::size_t xv = 0; xv < s; ++xv) m.conditionals[v][xv * s + xp] = col[xv];
    }
  }
  return m;
}

// Joint of every configuration by enumeration of the factorization.
std::vector<double> full_joint(const TreeModel& m) {
  const auto d = m.size();
  const auto s = m.alphabet[0];
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= s;
  std::vector<double> p(total);
  std::vector<std::size_t> x(d);
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = d; i-- > 0;) {
      x[i] = c % s;
      c /= s;
    }
    double v = m.root_marginal[x[0]];
    for (std::size_t i = 1; i < d; ++i) v *= m.conditional(i, x[i], x[m.parent[i]]);
    p[code] = v;
  }
  return p;
}

double enumerated_mi(const TreeModel& m, std::size_t a, std::size_t b) {
  const auto d = m.size();
  const auto s = m.alphabet[0];
  const auto p = full_joint(m);
  std::vector<double> pair(s * s, 0.0);
  for (std::size_t code = 0; code < p.size(); ++code) {
    std::size_t c = code, xa = 0, xb = 0;
    for (std::size_t i = d; i-- > 0;) {
      if (i == a) xa = c % s;
      if (i == b) xb = c % s;
      c /= s;
    }
    pair[xa * s + xb] += p[code];
  }
  return mutual_information_of(pair, s, s);
}

std::vector<Edge> edge_list(const TreeStructure& t) { return {t.edges().begin(), t.edges().end()}; }

EdgeWeights random_weights(std::size_t d, SeededGenerator& g) {
  EdgeWeights w(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) w.set(i, j, g.uniform());
  return w;
}

// Upper 0.1% point of chi-square with 15 degrees of freedom.
constexpr double kChi2_15_001 = 37.697;

}  // namespace

TEST(TreeStructure, ValidatesSpanningTree) {
  EXPECT_NO_THROW(TreeStructure(3, {{1, 0}, {2, 1}}));
  EXPECT_THROW(TreeStructure(3, {{0, 1}}), std::invalid_argument);
  EXPECT_THROW(TreeStructure(4, {{0, 1}, {1, 0}, {2, 3}}), std::invalid_argument);
  EXPECT_THROW(TreeStructure(3, {{0, 1}, {0, 3}}), std::invalid_argument);
  EXPECT_THROW(TreeStructure(3, {{0, 0}, {1, 2}}), std::invalid_argument);
  const TreeStructure t(3, {{2, 1}, {1, 0}});
  EXPECT_EQ(edge_list(t), (std::vector<Edge>{{0, 1}, {1, 2}}));
  EXPECT_TRUE(t.contains(2, 1));
  EXPECT_FALSE(t.contains(0, 2));
  EXPECT_TRUE(TreeStructure::star(5).is_star());
  EXPECT_FALSE(TreeStructure::path(5).is_star());
}

TEST(TreeStructure, OrientFromRoot) {
  const auto t = TreeStructure::path(4);
  const auto [parent, order] = t.orient(2);
  EXPECT_EQ(parent[2], 2u);
  EXPECT_EQ(parent[1], 2u);
  EXPECT_EQ(parent[3], 2u);
  EXPECT_EQ(parent[0], 1u);
  EXPECT_EQ(order.front(), 2u);
  EXPECT_EQ(order.size(), 4u);
}

TEST(Mwst, UniqueMaximum) {
  EdgeWeights w(3);
  w.set(0, 1, 1.0);
  w.set(0, 2, 0.5);
  w.set(1, 2, 0.2);
  EXPECT_EQ(edge_list(mwst(w)), (std::vector<Edge>{{0, 1}, {0, 2}}));
}

TEST(Mwst, EqualWeightsGiveTieBreakStar) {
  for (std::size_t d : {2, 3, 6, 9}) {
    EdgeWeights w(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) w.set(i, j, 0.7);
    EXPECT_EQ(mwst(w), TreeStructure::star(d, 0)) << d;
  }
}

TEST(Mwst, RejectsDegenerateInput) {
  EXPECT_THROW(mwst(EdgeWeights(1)), std::invalid_argument);
  EdgeWeights w(3);
  w.set(0, 1, NAN);
  EXPECT_THROW(mwst(w), std::invalid_argument);
  w.set(0, 1, INFINITY);
  EXPECT_THROW(mwst(w), std::invalid_argument);
}

TEST(Mwst, PrueferEnumerationCoversCayleyCount) {
  const auto trees = all_trees(6);
  EXPECT_EQ(trees.size(), 1296u);
  std::set<std::vector<Edge>> distinct;
  for (const auto& t : trees) distinct.insert(edge_list(t));
  EXPECT_EQ(distinct.size(), 1296u);
}

TEST(Mwst, MatchesExhaustiveEnumeration) {
  const auto trees = all_trees(6);
  SeededGenerator g(99);
  for (int t = 0; t < 100; ++t) {
    const auto w = random_weights(6, g);
    double best = -INFINITY;
    for (const auto& tree : trees) best = std::max(best, w.total(tree));
    EXPECT_NEAR(w.total(mwst(w)), best, 1e-12) << "matrix " << t;
  }
}

TEST(Mwst, InvariantUnderIncreasingTransform) {
  SeededGenerator g(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t d = 3 + g.uniform_below(8);
    const auto w = random_weights(d, g);
    EdgeWeights v(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) v.set(i, j, std::exp(3.0 * w(i, j)) - 7.0);
    EXPECT_EQ(mwst(w), mwst(v));
  }
}

TEST(WrongEdgesRatio, Examples) {
  const auto star = TreeStructure::star(7);
  EXPECT_EQ(wrong_edges_ratio(star, star), 0.0);
  EXPECT_DOUBLE_EQ(wrong_edges_ratio(TreeStructure::path(7), star), 1.0);
  const TreeStructure moved(7, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {5, 6}});
  EXPECT_DOUBLE_EQ(wrong_edges_ratio(moved, star), 0.2);
  EXPECT_THROW(wrong_edges_ratio(TreeStructure::path(2), TreeStructure::path(2)), std::invalid_argument);
  EXPECT_THROW(wrong_edges_ratio(TreeStructure::path(4), TreeStructure::path(5)), std::invalid_argument);
}

TEST(WrongEdgesRatio, CanExceedOneForGeneralTruth) {
  const auto path = TreeStructure::path(5);
  const TreeStructure other(5, {{0, 2}, {0, 3}, {1, 3}, {1, 4}});
  EXPECT_GT(wrong_edges_ratio(other, path), 1.0);
}

TEST(PairwiseMiWeights, IdenticalColumnsGiveEntropy) {
  SeededGenerator g(3);
  SymbolMatrix x{200, 2, std::vector<Symbol>(400), {5, 5}};
  std::vector<Symbol> col(200);
  for (std::size_t r = 0; r < 200; ++r) x(r, 0) = x(r, 1) = col[r] = static_cast<Symbol>(g.uniform_below(5));
  const auto w = pairwise_mi_weights(x, EstimatorKind::mle);
  EXPECT_NEAR(w(0, 1), entropy_mle(Histogram::from_symbols(col, 5)), 1e-12);
  EXPECT_EQ(w.provenance(), WeightProvenance::empirical_mi);
  EXPECT_EQ(pairwise_mi_weights(x, EstimatorKind::poly).provenance(), WeightProvenance::poly_mi);
}

TEST(PairwiseMiWeights, ProductGridGivesZero) {
  SymbolMatrix x{12, 2, std::vector<Symbol>(24), {3, 4}};
  for (std::size_t r = 0; r < 12; ++r) {
    x(r, 0) = static_cast<Symbol>(r / 4);
    x(r, 1) = static_cast<Symbol>(r % 4);
  }
  EXPECT_NEAR(pairwise_mi_weights(x, EstimatorKind::mle)(0, 1), 0.0, 1e-15);
  SymbolMatrix one{1, 2, {0, 0}, {2, 2}};
  EXPECT_THROW(pairwise_mi_weights(one, EstimatorKind::mle), std::invalid_argument);
}

TEST(ExactMiWeights, MatchEnumerationOnChain) {
  SeededGenerator g(8);
  for (int t = 0; t < 5; ++t) {
    const auto m = random_model(TreeStructure::path(3), 4, g);
    const auto w = exact_mi_weights(m);
    EXPECT_EQ(w.provenance(), WeightProvenance::exact_mi);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j) EXPECT_NEAR(w(i, j), enumerated_mi(m, i, j), 1e-12);
  }
}

TEST(ExactMiWeights, MatchEnumerationOnRandomTrees) {
  SeededGenerator g(9);
  const auto trees = all_trees(5);
  for (int t = 0; t < 10; ++t) {
    const auto& tree = trees[g.uniform_below(trees.size())];
    const auto m = random_model(tree, 3, g);
    const auto w = exact_mi_weights(m);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i + 1; j < 5; ++j) EXPECT_NEAR(w(i, j), enumerated_mi(m, i, j), 1e-12);
  }
}

TEST(ChowLiu, ExactWeightsRecoverSeparatedTrees) {
  SeededGenerator g(10);
  const auto trees = all_trees(5);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const auto& tree = trees[g.uniform_below(trees.size())];
    const auto m = random_model(tree, 3, g);
    const auto w = exact_mi_weights(m);
    double min_edge = INFINITY, max_other = -INFINITY;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = i + 1; j < 5; ++j) {
        if (tree.contains(i, j)) {
          min_edge = std::min(min_edge, w(i, j));
        } else {
          max_other = std::max(max_other, w(i, j));
        }
      }
    if (!(min_edge > max_other + 1e-9)) continue;
    ++checked;
    EXPECT_EQ(mwst(w), tree);
  }
  EXPECT_GT(checked, 5);
}

TEST(ChowLiu, StarModelExactWeightsRecoverStar) {
  SeededGenerator g(11);
  for (int t = 0; t < 10; ++t) {
    const auto m = random_star_model(5, 3, g);
    EXPECT_EQ(mwst(exact_mi_weights(m)), TreeStructure::star(5));
  }
}

TEST(ChowLiu, DeterministicChainTieBreak) {
  SymbolMatrix x{30, 3, std::vector<Symbol>(90), {3, 3, 3}};
  for (std::size_t r = 0; r < 30; ++r) x(r, 0) = x(r, 1) = x(r, 2) = static_cast<Symbol>(r % 3);
  const auto w = pairwise_mi_weights(x, EstimatorKind::mle);
  for (auto [i, j] : std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}}) EXPECT_NEAR(w(i, j), std::log(3.0), 1e-12);
  const auto m = chow_liu(x, EstimatorKind::mle);
  EXPECT_EQ(edge_list(m.structure), (std::vector<Edge>{{0, 1}, {0, 2}}));
  EXPECT_EQ(m.root, 0u);
}

TEST(ChowLiu, EmpiricalParametersWithUniformFallback) {
  // Column 1 copies column 0, but value 2 of column 0 never occurs.
  SymbolMatrix x{4, 2, {0, 0, 1, 1, 1, 1, 0, 0}, {3, 3}};
  const auto m = chow_liu(x, EstimatorKind::mle);
  EXPECT_EQ(m.root_marginal, (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_EQ(m.conditional(1, 0, 0), 1.0);
  EXPECT_EQ(m.conditional(1, 1, 1), 1.0);
  for (std::size_t xv = 0; xv < 3; ++xv) EXPECT_DOUBLE_EQ(m.conditional(1, xv, 2), 1.0 / 3.0);
}

TEST(ChowLiu, ConditionalsAreColumnStochastic) {
  SeededGenerator g(12);
  const auto model = random_star_model(5, 6, g);
  const auto x = sample_from_tree(model, 300, g);
  const auto m = chow_liu(x, EstimatorKind::poly);
  double root = 0.0;
  for (double v : m.root_marginal) root += v;
  EXPECT_NEAR(root, 1.0, 1e-12);
  for (std::size_t v = 1; v < 5; ++v) {
    const auto sp = m.alphabet[m.parent[v]];
    for (std::size_t xp = 0; xp < sp; ++xp) {
      double s = 0.0;
      for (std::size_t xv = 0; xv < m.alphabet[v]; ++xv) s += m.conditional(v, xv, xp);
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(ChowLiu, PolyRecoversStarAtSmallerSampleThanMle) {
  const SeededGenerator master(2025);
  int poly_ok = 0, mle_ok = 0;
  for (int t = 0; t < 20; ++t) {
    auto gm = derive_stream(master, t, StreamTag::model);
    auto gs = derive_stream(master, t, StreamTag::sample);
    const auto model = random_star_model(7, 50, gm);
    const auto x = sample_from_tree(model, 1100, gs);
    poly_ok += wrong_edges_ratio(chow_liu(x, EstimatorKind::poly).structure, model.structure) == 0.0;
    mle_ok += wrong_edges_ratio(chow_liu(x, EstimatorKind::mle).structure, model.structure) == 0.0;
  }
  EXPECT_GE(poly_ok, 18);
  EXPECT_LT(mle_ok, 18);
}

TEST(RandomStarModel, ShapeAndStochasticity) {
  SeededGenerator g(13);
  const auto m = random_star_model(2, 2, g);
  EXPECT_EQ(edge_list(m.structure), (std::vector<Edge>{{0, 1}}));
  ASSERT_EQ(m.root_marginal.size(), 2u);
  EXPECT_NEAR(m.root_marginal[0] + m.root_marginal[1], 1.0, 1e-12);
  ASSERT_EQ(m.conditionals[1].size(), 4u);
  for (std::size_t xp = 0; xp < 2; ++xp) EXPECT_NEAR(m.conditional(1, 0, xp) + m.conditional(1, 1, xp), 1.0, 1e-12);
  EXPECT_THROW(random_star_model(1, 3, g), std::invalid_argument);
  EXPECT_THROW(random_star_model(3, 1, g), std::invalid_argument);
}

TEST(RandomStarModel, SeedReproducesModel) {
  SeededGenerator a(14), b(14);
  const auto m1 = random_star_model(7, 20, a);
  const auto m2 = random_star_model(7, 20, b);
  EXPECT_EQ(m1.root_marginal, m2.root_marginal);
  EXPECT_EQ(m1.conditionals, m2.conditionals);
}

TEST(SampleFromTree, DeterministicModelRepeatsOneRow) {
  TreeModel m;
  m.structure = TreeStructure::path(3);
  m.parent = m.structure.orient(0).first;
  m.alphabet = {2, 3, 2};
  m.root_marginal = {0.0, 1.0};
  m.conditionals = {{}, {0, 0, 0, 0, 1, 1}, {1, 1, 1, 0, 0, 0}};
  SeededGenerator g(15);
  const auto x = sample_from_tree(m, 100, g);
  for (std::size_t r = 0; r < 100; ++r) {
    EXPECT_EQ(x(r, 0), 1u);
    EXPECT_EQ(x(r, 1), 2u);
    EXPECT_EQ(x(r, 2), 0u);
  }
  EXPECT_EQ(x.cols, 3u);
  EXPECT_EQ(x.alphabet, m.alphabet);
}

TEST(SampleFromTree, EmpiricalJointMatchesModel) {
  SeededGenerator g(16);
  const auto m = random_star_model(2, 2, g);
  const auto x = sample_from_tree(m, 1'000'000, g);
  std::array<double, 4> c{};
  for (std::size_t r = 0; r < x.rows; ++r) c[x(r, 0) * 2 + x(r, 1)] += 1.0;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t b = 0; b < 2; ++b)
      EXPECT_NEAR(c[a * 2 + b] / 1e6, m.root_marginal[a] * m.conditional(1, b, a), 0.005);
}

TEST(SampleFromTree, PairwiseJointsPassChiSquare) {
  SeededGenerator g(17);
  const auto m = random_model(TreeStructure::path(3), 4, g);
  constexpr std::size_t n = 100000;
  const auto x = sample_from_tree(m, n, g);
  const auto marg = node_marginals(m);
  for (auto [i, j] : std::vector<Edge>{{0, 1}, {0, 2}, {1, 2}}) {
    const auto p = exact_pair_joint(m, i, j, marg);
    std::vector<double> c(16, 0.0);
    for (std::size_t r = 0; r < n; ++r) c[x(r, i) * 4 + x(r, j)] += 1.0;
    double chi2 = 0.0;
    for (std::size_t k = 0; k < 16; ++k) {
      const double e = p[k] * n;
      chi2 += (c[k] - e) * (c[k] - e) / e;
    }
    EXPECT_LT(chi2, kChi2_15_001) << i << "," << j;
  }
}
