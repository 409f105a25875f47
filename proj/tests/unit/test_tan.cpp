#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "infotree/tan.hpp"

using namespace infotree;

namespace {

std::vector<Edge> edge_list(const TreeStructure& t) { return {t.edges().begin(), t.edges().end()}; }

// Attributes uniform over {0..s-1}; the class is an independent coin.
LabeledDataset noise_dataset(std::size_t n, std::size_t d, std::size_t s, SeededGenerator& g) {
  LabeledDataset data;
  data.rows = n;
  data.dims = d;
  data.alphabet.assign(d, s);
  data.classes = 2;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t a = 0; a < d; ++a) data.attributes.push_back(static_cast<Symbol>(g.uniform_below(s)));
    data.labels.push_back(static_cast<Symbol>(g.uniform_below(2)));
  }
  return data;
}

// Class equals attribute 0.
LabeledDataset separable_dataset(std::size_t n, SeededGenerator& g) {
  auto data = noise_dataset(n, 3, 2, g);
  for (std::size_t r = 0; r < n; ++r) data.labels[r] = data.at(r, 0);
  return data;
}

// Posterior in linear space, straight from the factorization.
std::vector<double> linear_posterior(const TanModel& m, std::span<const Symbol> x) {
  std::vector<double> p(m.classes());
  double z = 0.0;
  for (std::size_t c = 0; c < m.classes(); ++c) {
    double v = m.prior[c];
    for (std::size_t i = 0; i < m.dims(); ++i) v *= m.prob(i, c, i == m.root ? 0 : x[m.parent[i]], x[i]);
    p[c] = v;
    z += v;
  }
  for (auto& v : p) v /= z;
  return p;
}

}  // namespace

TEST(FitTan, CopiedAttributeForcesEdgeAndIdentityCpt) {
  SeededGenerator g(1);
  auto data = noise_dataset(3000, 4, 3, g);
  for (std::size_t r = 0; r < data.rows; ++r) data.attributes[r * 4 + 2] = data.at(r, 1);
  for (auto kind : {EstimatorKind::mle, EstimatorKind::poly}) {
    const auto m = fit_tan(data, kind);
    ASSERT_TRUE(m.tree.contains(1, 2)) << to_string(kind);
    const std::size_t child = m.parent[2] == 1 ? 2 : 1, par = child == 2 ? 1 : 2;
    ASSERT_EQ(m.parent[child], par);
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t xp = 0; xp < 3; ++xp)
        for (std::size_t x = 0; x < 3; ++x) EXPECT_DOUBLE_EQ(m.prob(child, c, xp, x), x == xp ? 1.0 : 0.0);
  }
}

TEST(FitTan, RecoversKnownModel) {
  SeededGenerator g(2);
  const auto truth = random_tan_model(4, 3, 2, g);
  auto gs = derive_stream(g, 0, StreamTag::sample);
  const auto data = sample_tan(truth, 100000, gs);
  const auto m = fit_tan(data, EstimatorKind::mle);
  EXPECT_EQ(edge_list(m.tree), edge_list(truth.tree));
  for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(m.prior[c], truth.prior[c], 0.01);
  // Compare CPTs in the true tree's orientation.
  const auto refit = fit_tan_parameters(data, truth.tree);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < truth.cpt[i].size(); ++k) EXPECT_NEAR(refit.cpt[i][k], truth.cpt[i][k], 0.05);
}

TEST(FitTan, SingleClassReducesToChowLiu) {
  SeededGenerator g(3);
  const auto tree_model = random_star_model(5, 4, g);
  auto gs = derive_stream(g, 0, StreamTag::sample);
  const auto samples = sample_from_tree(tree_model, 2000, gs);
  LabeledDataset data;
  data.rows = samples.rows;
  data.dims = samples.cols;
  data.alphabet = samples.alphabet;
  data.attributes = samples.data;
  data.labels.assign(samples.rows, 0);
  data.classes = 1;
  for (auto kind : {EstimatorKind::mle, EstimatorKind::poly}) {
    EXPECT_EQ(edge_list(fit_tan(data, kind).tree), edge_list(chow_liu(samples, kind).structure)) << to_string(kind);
  }
}

TEST(FitTan, SingleAttributeIsNaiveBayes) {
  SeededGenerator g(4);
  auto data = noise_dataset(100, 1, 3, g);
  const auto m = fit_tan(data, EstimatorKind::poly);
  EXPECT_TRUE(m.degenerate);
  EXPECT_TRUE(m.tree.edges().empty());
  EXPECT_EQ(m.cpt[0].size(), 6u);
}

TEST(FitTan, RejectsTooFewRecords) {
  SeededGenerator g(5);
  auto data = noise_dataset(1, 2, 2, g);
  EXPECT_THROW(fit_tan(data, EstimatorKind::mle), std::invalid_argument);
}

TEST(FitTan, WeightsDetermineTreeOnly) {
  SeededGenerator g(6);
  const auto data = noise_dataset(500, 4, 3, g);
  const auto mle = conditional_mi_weights(data, EstimatorKind::mle);
  const auto poly = conditional_mi_weights(data, EstimatorKind::poly);
  const auto a = fit_tan_from_weights(data, mle);
  const auto b = fit_tan_from_weights(data, poly);
  EXPECT_EQ(edge_list(a.tree), edge_list(mwst(mle)));
  EXPECT_EQ(edge_list(b.tree), edge_list(mwst(poly)));
  // Same tree, same parameters, regardless of which weights chose it.
  const auto c = fit_tan_parameters(data, b.tree);
  EXPECT_EQ(c.cpt, b.cpt);
  EXPECT_EQ(c.prior, b.prior);
}

TEST(Predict, SingleClassAlwaysZero) {
  SeededGenerator g(7);
  auto data = noise_dataset(50, 2, 2, g);
  data.labels.assign(50, 0);
  data.classes = 1;
  const auto m = fit_tan(data, EstimatorKind::mle);
  for (std::size_t r = 0; r < data.rows; ++r) EXPECT_EQ(predict(m, data.row(r)), 0u);
}

TEST(Predict, PriorDecidesWhenAttributesAreUninformative) {
  SeededGenerator g(8);
  auto m = random_tan_model(3, 2, 2, g);
  m.prior = {0.9, 0.1};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto si = m.alphabet[i], sp = m.parent_size(i);
    for (std::size_t ctx = 0; ctx < sp; ++ctx)
      for (std::size_t x = 0; x < si; ++x) m.cpt[i][(sp + ctx) * si + x] = m.cpt[i][ctx * si + x];
  }
  for (Symbol a = 0; a < 2; ++a)
    for (Symbol b = 0; b < 2; ++b)
      for (Symbol c = 0; c < 2; ++c) {
        const std::array<Symbol, 3> x{a, b, c};
        EXPECT_EQ(predict(m, x), 0u);
      }
}

TEST(Predict, MatchesLinearSpaceOracle) {
  SeededGenerator g(9);
  const auto m = random_tan_model(5, 4, 3, g);
  auto gs = derive_stream(g, 0, StreamTag::sample);
  const auto data = sample_tan(m, 200, gs);
  for (std::size_t r = 0; r < data.rows; ++r) {
    const auto p = linear_posterior(m, data.row(r));
    const auto s = class_log_scores(m, data.row(r));
    std::size_t best = 0;
    for (std::size_t c = 1; c < p.size(); ++c)
      if (p[c] > p[best]) best = c;
    EXPECT_EQ(predict(m, data.row(r)), best);
    for (std::size_t c = 0; c < p.size(); ++c)
      for (std::size_t k = 0; k < p.size(); ++k)
        EXPECT_NEAR(s[c] - s[k], std::log(p[c] / p[k]), 1e-9);
  }
}

TEST(Predict, InvariantToScalingThePrior) {
  SeededGenerator g(10);
  auto m = random_tan_model(4, 3, 3, g);
  auto scaled = m;
  for (auto& p : scaled.prior) p *= 7.5;
  auto gs = derive_stream(g, 0, StreamTag::sample);
  const auto data = sample_tan(m, 100, gs);
  for (std::size_t r = 0; r < data.rows; ++r) EXPECT_EQ(predict(m, data.row(r)), predict(scaled, data.row(r)));
}

TEST(Predict, RejectsBadInput) {
  SeededGenerator g(11);
  const auto m = random_tan_model(3, 2, 2, g);
  const std::array<Symbol, 3> out{0, 2, 0};
  const std::array<Symbol, 2> short_row{0, 0};
  EXPECT_THROW(predict(m, out), std::invalid_argument);
  EXPECT_THROW(predict(m, short_row), std::invalid_argument);
}

TEST(CrossValidate, SeparableDataHasZeroError) {
  SeededGenerator g(12);
  const auto data = separable_dataset(500, g);
  for (auto kind : {EstimatorKind::mle, EstimatorKind::poly}) {
    const auto rep = cross_validate(data, kind, {}, 5, 3, 1);
    EXPECT_EQ(rep.aggregate, 0.0) << to_string(kind);
  }
}

TEST(CrossValidate, IndependentLabelsGiveCoinFlip) {
  SeededGenerator g(13);
  const auto data = noise_dataset(10000, 3, 2, g);
  const auto rep = cross_validate(data, EstimatorKind::mle, {}, 5, 1, 2);
  EXPECT_NEAR(rep.aggregate, 0.5, 0.02);
}

TEST(CrossValidate, FoldsPartitionRowsAndAreDeterministic) {
  SeededGenerator g(14);
  const auto data = noise_dataset(103, 3, 3, g);
  const auto a = cross_validate(data, EstimatorKind::mle, {}, 5, 2, 99);
  const auto b = cross_validate(data, EstimatorKind::poly, {}, 5, 2, 99);
  const auto c = cross_validate(data, EstimatorKind::mle, {}, 5, 2, 99);
  ASSERT_EQ(a.folds.size(), 10u);
  for (std::size_t k = 0; k < a.folds.size(); ++k) {
    EXPECT_EQ(a.folds[k].partition_hash, b.folds[k].partition_hash);
    EXPECT_EQ(a.folds[k].error, c.folds[k].error);
  }
  std::size_t total = 0;
  std::vector<std::size_t> sizes;
  for (const auto& f : a.folds)
    if (f.repeat == 0) {
      total += f.test_size;
      sizes.push_back(f.test_size);
    }
  EXPECT_EQ(total, 103u);
  EXPECT_EQ(sizes, (std::vector<std::size_t>{21, 21, 21, 20, 20}));
  EXPECT_NE(a.folds[0].partition_hash, a.folds[5].partition_hash);
  double m0 = 0.0;
  for (std::size_t f = 0; f < 5; ++f) m0 += a.folds[f].error / 5.0;
  EXPECT_NEAR(a.repeat_mean(0), m0, 1e-15);
}

TEST(CrossValidate, FoldOffsetsAreDisjointAndCovering) {
  const auto off = detail::fold_offsets(17, 5);
  EXPECT_EQ(off, (std::vector<std::size_t>{0, 4, 8, 11, 14, 17}));
}

TEST(CrossValidate, RejectsBadArguments) {
  SeededGenerator g(15);
  const auto data = noise_dataset(4, 2, 2, g);
  EXPECT_THROW(cross_validate(data, EstimatorKind::mle, {}, 1, 1, 0), std::invalid_argument);
  EXPECT_THROW(cross_validate(data, EstimatorKind::mle, {}, 5, 1, 0), std::invalid_argument);
  EXPECT_THROW(cross_validate(data, EstimatorKind::mle, {}, 2, 0, 0), std::invalid_argument);
}

TEST(LearningCurve, ShapeAndPolyNoWorseOnLargeAlphabet) {
  SeededGenerator g(16);
  const auto truth = random_tan_model(6, 40, 4, g);
  auto gs = derive_stream(g, 0, StreamTag::sample);
  const auto data = sample_tan(truth, 3000, gs);
  const std::array<EstimatorKind, 2> kinds{EstimatorKind::mle, EstimatorKind::poly};
  const std::array<std::size_t, 3> sizes{1000, 2000, 3000};
  const auto curve = learning_curve(data, kinds, {}, sizes, 4, 5);
  ASSERT_EQ(curve.size(), 6u);
  for (std::size_t si = 0; si < 3; ++si) {
    EXPECT_EQ(curve[2 * si].size, sizes[si]);
    EXPECT_EQ(curve[2 * si].kind, EstimatorKind::mle);
    EXPECT_EQ(curve[2 * si + 1].kind, EstimatorKind::poly);
    EXPECT_LE(curve[2 * si + 1].mean_error, curve[2 * si].mean_error + 1e-12) << sizes[si];
  }
  const std::array<std::size_t, 1> too_big{3001};
  EXPECT_THROW(learning_curve(data, kinds, {}, too_big, 1, 0), std::invalid_argument);
}

TEST(RandomTanModel, ValidDistributions) {
  SeededGenerator g(17);
  const auto m = random_tan_model(6, 5, 3, g);
  EXPECT_EQ(m.tree.edges().size(), 5u);
  double s = 0.0;
  for (double p : m.prior) s += p;
  EXPECT_NEAR(s, 1.0, 1e-12);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t ctx = 0; ctx < 3 * m.parent_size(i); ++ctx) {
      double t = 0.0;
      for (std::size_t x = 0; x < 5; ++x) t += m.cpt[i][ctx * 5 + x];
      EXPECT_NEAR(t, 1.0, 1e-12);
    }
  }
}
