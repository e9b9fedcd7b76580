#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "rcx/baselines.hpp"
#include "rcx/error.hpp"
#include "rcx/metrics.hpp"
#include "rcx/screening.hpp"
#include "test_support.hpp"

namespace rcx {
namespace {

using testing::random_graph;
using testing::random_params;
using testing::small_spec;
using testing::TempDir;

TEST(Spearman, Examples) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_EQ(spearman(x, x), 1.0);
  const std::vector<double> rev{5, 4, 3, 2, 1};
  EXPECT_EQ(spearman(x, rev), -1.0);
  // sum d^2 = 4: 1 - 6 * 4 / (5 * 24)
  const std::vector<double> y{2, 1, 4, 3, 5};
  EXPECT_DOUBLE_EQ(spearman(x, y), 0.8);
}

TEST(Spearman, TiesUseFractionalRanks) {
  EXPECT_EQ(fractional_ranks(std::vector<double>{3.0, 1.0, 3.0, 2.0}),
            (std::vector<double>{3.5, 1.0, 3.5, 2.0}));
  // Ranks (1, 2.5, 2.5, 4) against (1, 2, 3, 4): Pearson by hand.
  // dx = (-1.5, 0, 0, 1.5), dy = (-1.5, -0.5, 0.5, 1.5); sxy = 4.5, sxx = 4.5, syy = 5.
  const double expected = 4.5 / std::sqrt(4.5 * 5.0);
  EXPECT_DOUBLE_EQ(spearman(std::vector<double>{1, 2, 2, 3}, std::vector<double>{1, 2, 3, 4}),
                   expected);
}

TEST(Spearman, ClosedFormOnPermutationsIsExact) {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 1.0);
    std::iota(y.begin(), y.end(), 1.0);
    rng.shuffle(x);
    rng.shuffle(y);
    long long d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto d = static_cast<long long>(x[i] - y[i]);
      d2 += d * d;
    }
    const long long nn = static_cast<long long>(n);
    const long long den = nn * (nn * nn - 1);
    const double expected = static_cast<double>(den - 6 * d2) / static_cast<double>(den);
    EXPECT_EQ(spearman(x, y), expected) << "n=" << n;
  }
}

TEST(Spearman, SymmetricBoundedAndMonotoneInvariant) {
  Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 3 + rng.below(10);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = std::floor(rng.uniform(0.0, 5.0));
      y[i] = rng.uniform(-1.0, 1.0);
    }
    x[0] = 0.0;
    x[1] = 6.0;  // never constant
    const double r = spearman(x, y);
    EXPECT_EQ(r, spearman(y, x));
    EXPECT_LE(std::abs(r), 1.0);
    std::vector<double> tx(n);
    for (std::size_t i = 0; i < n; ++i) tx[i] = std::exp(x[i]) * 3.0 + 1.0;
    EXPECT_NEAR(spearman(tx, y), r, 1e-15);
  }
}

TEST(Spearman, Errors) {
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), ValidationError);
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), ValidationError);
  EXPECT_THROW(spearman(std::vector<double>{1, NAN}, std::vector<double>{1, 2}), ValidationError);
  EXPECT_THROW(spearman(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}),
               UndefinedMetricError);
}

// Zero weights: uniform probabilities, so every subgraph predicts class 0.
ModelParams constant_model(int d0) {
  const ModelSpec spec = small_spec(d0, {3}, 2, Readout::kSum);
  return ModelParams(spec, GnnWeights::zeros(spec));
}

TEST(Acc, FullRatioAndConstantModelAlwaysRecover) {
  Rng rng(43);
  const ModelParams model = random_params(small_spec(2, {4}, 2, Readout::kSum), rng);
  const ModelParams flat = constant_model(2);
  std::vector<Graph> graphs;
  for (int i = 0; i < 20; ++i) graphs.push_back(random_graph(rng, 6, 1 + rng.below(10), 2));
  std::vector<const Graph*> ptrs;
  for (const Graph& g : graphs) ptrs.push_back(&g);
  for (const Graph& g : graphs) {
    const RankedEdges r = random_ranking(g, 1);
    EXPECT_TRUE(acc_at_ratio(model, g, r, 1.0));
    EXPECT_TRUE(acc_at_ratio(flat, g, r, 0.1));
  }
  const AccCurve c = acc_curve(flat, ptrs, make_random_explainer(3));
  EXPECT_EQ(c.auc, 1.0);
}

TEST(Acc, HandCheckedAtOneFifth) {
  // Readout counts edges through node degrees: class 1 wins once any edge exists.
  const ModelSpec spec = small_spec(1, {1}, 2, Readout::kSum, 1);
  GnnWeights w = GnnWeights::zeros(spec);
  w.layers[0].w1(0, 0) = 1.0;
  w.layers[0].b1(0) = -1.0;  // relu(z + sum - 1): 0 for isolated nodes with x = 1
  w.layers[0].w2(0, 0) = 1.0;
  w.predictor.w1(0, 0) = 1.0;
  w.predictor.w2(1, 0) = 1.0;
  const ModelParams model(spec, w);
  const Graph g("five", Eigen::MatrixXd::Ones(6, 1), {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}, 1);
  ASSERT_EQ(argmax(forward(model, g).probs), 1);
  EXPECT_TRUE(acc_at_ratio(model, g, RankedEdges{{3, 0, 1, 2, 4}, {5, 4, 3, 2, 1}}, 0.2));
  // No edge at all: predicts class 0.
  ASSERT_EQ(argmax(forward(model, induce_subgraph(g, EdgeSet{})).probs), 0);
  EXPECT_THROW(acc_at_ratio(model, g, RankedEdges{}, 0.2), ValidationError);
}

TEST(Acc, AucIsTheMeanOfTheEmittedCurve) {
  Rng rng(44);
  const ModelParams model = random_params(small_spec(2, {4}, 3, Readout::kSum), rng, 1.5);
  std::vector<Graph> graphs;
  for (int i = 0; i < 15; ++i) graphs.push_back(random_graph(rng, 7, 2 + rng.below(12), 2));
  std::vector<const Graph*> ptrs;
  for (const Graph& g : graphs) ptrs.push_back(&g);
  const AccCurve c = acc_curve(model, ptrs, make_greedy_explainer());
  ASSERT_EQ(c.ratios.size(), 10u);
  double sum = 0.0;
  for (double a : c.accuracy) sum += a;
  EXPECT_EQ(c.auc, sum / 10.0);
  EXPECT_EQ(c.ratios[2], 0.3);
  EXPECT_EQ(c.accuracy.back(), 1.0);
  TempDir dir("curve");
  write_acc_curve(c, dir / "c.csv");
  std::ifstream in(dir / "c.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "ratio,accuracy");
  EXPECT_THROW(acc_curve(model, {}, make_greedy_explainer()), UndefinedMetricError);
}

TEST(Contrastivity, ClassBlindExplainerScoresOne) {
  Rng rng(45);
  const ModelParams model = random_params(small_spec(2, {4}, 3, Readout::kSum), rng);
  std::vector<Graph> graphs;
  for (int i = 0; i < 10; ++i) {
    graphs.push_back(random_graph(rng, 6, 3 + rng.below(8), 2, "g" + std::to_string(i)));
  }
  std::vector<const Graph*> ptrs;
  for (const Graph& g : graphs) ptrs.push_back(&g);
  EXPECT_EQ(contrastivity(make_random_explainer(7), model, ptrs), 1.0);
}

TEST(Contrastivity, HandComposedOnOneGraph) {
  Rng rng(46);
  const ModelParams model = random_params(small_spec(2, {4}, 2, Readout::kSum), rng, 1.5);
  const Graph g = random_graph(rng, 5, 4, 2);
  ASSERT_EQ(g.num_edges(), 4u);
  const Explainer occ = make_occlusion_explainer();
  const int pred = argmax(forward(model, g).probs);
  const auto a = occ(model, g, pred).scores_by_edge(4);
  const auto b = occ(model, g, 1 - pred).scores_by_edge(4);
  EXPECT_EQ(contrastivity(occ, model, {&g}), std::abs(spearman(a, b)));
}

TEST(SanityCheck, ModelBlindExplainerScoresOneAndValuesStayInRange) {
  Rng rng(47);
  const ModelSpec spec = small_spec(2, {4}, 2, Readout::kSum);
  const ModelParams model = random_params(spec, rng);
  const ModelParams other = random_params(spec, rng);
  std::vector<Graph> graphs;
  for (int i = 0; i < 10; ++i) {
    graphs.push_back(random_graph(rng, 6, 3 + rng.below(8), 2, "g" + std::to_string(i)));
  }
  std::vector<const Graph*> ptrs;
  for (const Graph& g : graphs) ptrs.push_back(&g);
  EXPECT_EQ(sanity_check(make_random_explainer(1), model, other, ptrs), 1.0);
  const double sc = sanity_check(make_greedy_explainer(), model, other, ptrs);
  EXPECT_GE(sc, 0.0);
  EXPECT_LE(sc, 1.0);
  // Hand composition on the first graph.
  const Explainer greedy = make_greedy_explainer();
  const Graph& g = graphs[0];
  const auto s1 = greedy(model, g, argmax(forward(model, g).probs)).scores_by_edge(g.num_edges());
  const auto s2 = greedy(other, g, argmax(forward(other, g).probs)).scores_by_edge(g.num_edges());
  EXPECT_EQ(sanity_check(greedy, model, other, {&g}), std::abs(spearman(s1, s2)));
  EXPECT_THROW(sanity_check(greedy, model, random_params(small_spec(2, {5}, 2, Readout::kSum), rng),
                            ptrs),
               ValidationError);
}

TEST(SanityCheck, ConstantAttributionsAreLeftOut) {
  Rng rng(48);
  const ModelSpec spec = small_spec(2, {4}, 2, Readout::kSum);
  const ModelParams model = random_params(spec, rng);
  const ModelParams other = random_params(spec, rng);
  std::vector<Graph> graphs;
  for (int i = 0; i < 6; ++i) {
    graphs.push_back(random_graph(rng, 6, 4 + rng.below(6), 2, "g" + std::to_string(i)));
  }
  std::vector<const Graph*> ptrs;
  for (const Graph& g : graphs) ptrs.push_back(&g);
  const Explainer greedy = make_greedy_explainer();
  // Flat scores for the trained model on g0 and g3 only.
  const Explainer partly_flat = [&](const ModelParams& m, const Graph& g, int c) {
    if (&m == &model && (g.id() == "g0" || g.id() == "g3")) {
      return RankedEdges{all_edges(g).indices(), std::vector<double>(g.num_edges(), 0.5)};
    }
    return greedy(m, g, c);
  };
  std::size_t undefined = 0;
  const double sc = sanity_check(partly_flat, model, other, ptrs, 1, &undefined);
  EXPECT_EQ(undefined, 2u);
  const std::vector<const Graph*> rest{ptrs[1], ptrs[2], ptrs[4], ptrs[5]};
  EXPECT_EQ(sc, sanity_check(greedy, model, other, rest));
  const Explainer flat = [](const ModelParams&, const Graph& g, int) {
    return RankedEdges{all_edges(g).indices(), std::vector<double>(g.num_edges(), 0.5)};
  };
  EXPECT_THROW(sanity_check(flat, model, other, ptrs), UndefinedMetricError);
  EXPECT_THROW(contrastivity(flat, model, ptrs, 1, &undefined), UndefinedMetricError);
  EXPECT_EQ(contrastivity(partly_flat, model, ptrs, 1, &undefined),
            contrastivity(greedy, model, rest));
  EXPECT_EQ(undefined, 2u);
}

TEST(GroundTruth, PrecisionRecallExamples) {
  const RankedEdges r{{0, 1, 2, 3, 4}, {5, 4, 3, 2, 1}};
  const auto exact = gt_precision_recall(r, EdgeSet({1, 0}), 2);
  EXPECT_EQ(exact.precision, 1.0);
  EXPECT_EQ(exact.recall, 1.0);
  const auto none = gt_precision_recall(r, EdgeSet({4}), 1);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  const auto partial = gt_precision_recall(r, EdgeSet({2, 4}), 4);
  EXPECT_EQ(partial.precision, 0.25);
  EXPECT_EQ(partial.recall, 0.5);
  EXPECT_THROW(gt_precision_recall(r, EdgeSet{}, 2), UndefinedMetricError);
  EXPECT_THROW(gt_precision_recall(r, EdgeSet({1}), 0), ValidationError);
}

TEST(RandomBaseline, UniformFirstPickChiSquare) {
  Rng rng(48);
  const Graph g = random_graph(rng, 5, 5, 2);
  ASSERT_EQ(g.num_edges(), 5u);
  std::vector<double> counts(5, 0.0);
  constexpr int kDraws = 10000;
  for (int s = 0; s < kDraws; ++s) {
    const RankedEdges r = random_ranking(g, static_cast<std::uint64_t>(s));
    ASSERT_TRUE(r.is_full(5));
    ++counts[r.order[0]];
  }
  double chi2 = 0.0;
  const double expected = kDraws / 5.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 4 degrees of freedom, p = 0.01
  EXPECT_LT(chi2, 13.2767);
  EXPECT_EQ(random_ranking(g, 12), random_ranking(g, 12));
}

TEST(RandomBaseline, ExplainerIgnoresModelAndClass) {
  Rng rng(49);
  const Graph g = random_graph(rng, 6, 8, 2, "x");
  const ModelParams a = random_params(small_spec(2, {3}, 2, Readout::kSum), rng);
  const ModelParams b = random_params(small_spec(2, {3}, 2, Readout::kSum), rng);
  const Explainer e = make_random_explainer(5);
  EXPECT_EQ(e(a, g, 0), e(b, g, 1));
}

TEST(Occlusion, MatchesManualForwardPasses) {
  Rng rng(50);
  const ModelParams model = random_params(small_spec(2, {4, 4}, 2, Readout::kSum), rng, 1.2);
  const Graph g = random_graph(rng, 5, 4, 2);
  ASSERT_EQ(g.num_edges(), 4u);
  const AttributionContext ctx(model, g, 1);
  std::vector<double> expected;
  for (std::size_t e = 0; e < 4; ++e) {
    std::vector<Edge> kept;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i != e) kept.push_back(g.edge(i));
    }
    const Graph without(g.id(), g.node_features(), kept, g.label());
    expected.push_back(ctx.full_prob() - std::max(forward(model, without).probs(1), 1e-12));
  }
  const RankedEdges r = occlusion_ranking(ctx);
  const auto by_edge = r.scores_by_edge(4);
  for (std::size_t e = 0; e < 4; ++e) EXPECT_EQ(by_edge[e], expected[e]);
  for (std::size_t i = 1; i < 4; ++i) EXPECT_GE(r.scores[i - 1], r.scores[i]);
}

TEST(Occlusion, DecisiveEdgeRankedFirstAndNeutralEdgeScoresZero) {
  // Feature 1 marks the two endpoints of the decisive edge; the model fires
  // only when they are adjacent.
  const ModelSpec spec = small_spec(2, {1}, 2, Readout::kSum, 1);
  GnnWeights w = GnnWeights::zeros(spec);
  w.layers[0].w1(0, 1) = 1.0;
  w.layers[0].b1(0) = -1.5;
  w.layers[0].w2(0, 0) = 1.0;
  w.predictor.w1(0, 0) = 10.0;
  w.predictor.w2(1, 0) = 1.0;
  const ModelParams model(spec, w);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, 2);
  x.col(0).setOnes();
  x(3, 1) = 1.0;
  x(4, 1) = 1.0;
  const Graph g("toy", x, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, 1);
  const AttributionContext ctx(model, g, 1);
  const RankedEdges r = occlusion_ranking(ctx);
  EXPECT_EQ(r.order[0], 3u);
  EXPECT_EQ(r.scores_by_edge(4)[0], 0.0);
}

}  // namespace
}  // namespace rcx
