#include <gtest/gtest.h>

#include <cmath>

#include "dfbench/errors.hpp"
#include "dfbench/fusion.hpp"
#include "dfbench/metrics.hpp"
#include "dfbench/rng.hpp"
#include "support.hpp"

using namespace dfbench;
using namespace dfbench::fusion;

namespace {

constexpr double kTol = 1e-12;

std::vector<double> v(std::initializer_list<double> xs) { return xs; }

ScoreVector sv(std::vector<double> s) { return ScoreVector{std::move(s), ScoreSpace::probability}; }

}  // namespace

TEST(Weights, NormalizeAndReject) {
  const FusionWeights w({1, 2, 2});
  EXPECT_NEAR(w.normalized()[0], 0.2, kTol);
  EXPECT_NEAR(w.normalized()[1] + w.normalized()[2], 0.8, kTol);
  EXPECT_THROW(FusionWeights({0, 0}), InvalidParameter);
  EXPECT_THROW(FusionWeights({1, -1, 2}), InvalidParameter);
  EXPECT_THROW(FusionWeights({1, NAN}), InvalidParameter);
  EXPECT_THROW(FusionWeights(std::vector<double>{}), InvalidParameter);
}

TEST(LogitEvidence, Examples) {
  EXPECT_EQ(logit_evidence({0, 0}), 0.0);
  EXPECT_EQ(logit_evidence({1.5, 1.5}), 0.0);
  EXPECT_NEAR(logit_evidence({-0.5, 2.0}), 2.5, kTol);
}

TEST(MeanLogit, Examples) {
  EXPECT_NEAR(mean_logit_fuse(v({0.0}), FusionWeights::uniform(1)), 0.5, kTol);
  EXPECT_NEAR(mean_logit_fuse(v({2.0, 0.0}), FusionWeights::uniform(2)), 1.0 / (1.0 + std::exp(-1.0)), kTol);
  EXPECT_NEAR(mean_logit_fuse(v({0.7, 0.7, 0.7}), FusionWeights::uniform(3)),
              mean_logit_fuse(v({0.7}), FusionWeights::uniform(1)), kTol);
  EXPECT_THROW(mean_logit_fuse(v({1, 2}), FusionWeights::uniform(3)), InvalidParameter);
}

TEST(MeanLogit, StrictlyMonotoneInEachInput) {
  const FusionWeights w({0.2, 0.5, 0.3});
  std::vector<double> e{0.3, -1.2, 2.0};
  for (std::size_t i = 0; i < e.size(); ++i) {
    auto up = e;
    up[i] += 0.01;
    EXPECT_GT(mean_logit_fuse(up, w), mean_logit_fuse(e, w));
  }
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_NEAR(sigmoid(-3.0) + sigmoid(3.0), 1.0, kTol);
}

TEST(WeightedProb, Examples) {
  const FusionWeights ab({0.35, 0.65});
  EXPECT_NEAR(weighted_prob_fuse(v({0.5, 0.5}), ab), 0.5, kTol);
  EXPECT_NEAR(weighted_prob_fuse(v({0.2, 0.8}), ab), 0.59, kTol);
  EXPECT_THROW(weighted_prob_fuse(v({0.2, 1.2}), ab), InvalidParameter);
  EXPECT_THROW(weighted_prob_fuse(v({0.2}), ab), InvalidParameter);
}

TEST(WeightedProb, HeadWeightsInEvidenceSpace) {
  // 0.70 * fuse + 0.15 * global + 0.15 * local on logits, then sigmoid.
  const FusionWeights heads({0.70, 0.15, 0.15});
  const auto e = v({1.2, -0.4, 2.0});
  EXPECT_NEAR(mean_logit_fuse(e, heads), sigmoid(0.70 * 1.2 + 0.15 * -0.4 + 0.15 * 2.0), kTol);
}

TEST(WeightedProb, BoundedByInputs) {
  RngStream rng(1, "bounds");
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(4), w(4);
    for (auto& x : p) x = rng.uniform();
    for (auto& x : w) x = rng.uniform(0.01, 1.0);
    const double out = weighted_prob_fuse(p, FusionWeights(w));
    EXPECT_GE(out, *std::min_element(p.begin(), p.end()) - kTol);
    EXPECT_LE(out, *std::max_element(p.begin(), p.end()) + kTol);
  }
}

TEST(Quantize, Examples) {
  EXPECT_EQ(quantize_prob(0.5), 0.5);
  EXPECT_NEAR(quantize_prob(0.87), 0.9, kTol);
  EXPECT_EQ(quantize_prob(0.04), 0.0);
  EXPECT_NEAR(quantize_prob(0.85), 0.9, kTol);
  EXPECT_EQ(quantize_prob(1.0), 1.0);
  EXPECT_THROW(quantize_prob(-0.01), InvalidParameter);
  EXPECT_THROW(quantize_prob(1.01), InvalidParameter);
}

TEST(Quantize, IdempotentAndClose) {
  for (int i = 0; i <= 1000; ++i) {
    const double p = i / 1000.0;
    const double q = quantize_prob(p);
    EXPECT_EQ(quantize_prob(q), q);
    EXPECT_LE(std::fabs(q - p), 0.05 + kTol);
    EXPECT_NEAR(q * 10.0, std::round(q * 10.0), 1e-9);
  }
}

TEST(DiscretizedVote, Examples) {
  EXPECT_NEAR(discretized_vote(v({0.9, 0.8, 0.7}), FusionWeights({1, 2, 2})), 0.78, kTol);
  EXPECT_NEAR(discretized_vote(v({0.3, 0.3, 0.3}), FusionWeights({1, 2, 2})), 0.3, kTol);
  EXPECT_NEAR(discretized_vote(v({0.6, 0.1, 0.0}), FusionWeights({1, 0, 0})), 0.6, kTol);
  EXPECT_THROW(discretized_vote(v({0.87, 0.8, 0.7}), FusionWeights({1, 2, 2})), InvalidParameter);
}

TEST(RankNormalize, Examples) {
  const auto r = rank_normalize(v({0.1, 0.9, 0.4}));
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], 0.0, kTol);
  EXPECT_NEAR(r[1], 1.0, kTol);
  EXPECT_NEAR(r[2], 0.5, kTol);
  for (double x : rank_normalize(v({0.3, 0.3, 0.3, 0.3}))) EXPECT_NEAR(x, 0.5, kTol);
  const auto inc = rank_normalize(v({1, 2, 3, 4, 5}));
  for (std::size_t i = 0; i < inc.size(); ++i) EXPECT_NEAR(inc[i], i / 4.0, kTol);
  EXPECT_THROW(rank_normalize(v({0.5})), InvalidParameter);
}

TEST(RankFuse, HandComputedThreeModels) {
  const std::vector<ScoreVector> models{sv({0.1, 0.4, 0.3, 0.9}), sv({5, 1, 3, 3}), sv({0.2, 0.1, 0.7, 0.6})};
  // Normalized ranks: m1 (0, 2/3, 1/3, 1); m2 (1, 0, 1/2, 1/2); m3 (1/3, 0, 1, 2/3).
  const auto fused = rank_fuse(models, FusionWeights({0.55, 0.30, 0.15}));
  ASSERT_EQ(fused.size(), 4u);
  EXPECT_NEAR(fused[0], 0.30 + 0.15 / 3.0, kTol);
  EXPECT_NEAR(fused[1], 0.55 * 2.0 / 3.0, kTol);
  EXPECT_NEAR(fused[2], 0.55 / 3.0 + 0.15 + 0.15, kTol);
  EXPECT_NEAR(fused[3], 0.55 + 0.15 + 0.10, kTol);
}

TEST(RankFuse, SingleModelIsItsRankVector) {
  const std::vector<ScoreVector> one{sv({0.7, 0.2, 0.9})};
  EXPECT_EQ(rank_fuse(one, FusionWeights::uniform(1)), rank_normalize(one[0].scores));
  const std::vector<ScoreVector> bad{sv({0.7, 0.2, 0.9}), sv({0.1, 0.2})};
  EXPECT_THROW(rank_fuse(bad, FusionWeights::uniform(2)), InvalidParameter);
}

TEST(RankFuse, InvariantUnderPerModelMonotoneTransforms) {
  RngStream rng(2, "rankinv");
  for (int t = 0; t < 30; ++t) {
    std::vector<ScoreVector> models(3);
    for (auto& m : models)
      for (int i = 0; i < 25; ++i) m.scores.push_back(rng.uniform());
    const FusionWeights w({0.55, 0.30, 0.15});
    const auto base = rank_fuse(models, w);
    auto moved = models;
    for (auto& x : moved[t % 3].scores) x = std::log(x + 1e-3) * 4.0 + 11.0;
    moved[t % 3].space = ScoreSpace::evidence;
    const auto after = rank_fuse(moved, w);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(after[i], base[i], kTol);
  }
}

TEST(RankNormalize, PreservesAucWithoutTies) {
  RngStream rng(3, "rankauc");
  std::vector<double> s;
  LabeledScores a, b;
  for (int i = 0; i < 60; ++i) s.push_back(rng.normal(i % 2 ? 0.5 : 0.0, 1.0));
  const auto r = rank_normalize(s);
  for (int i = 0; i < 60; ++i) {
    a.push_back({std::to_string(i), s[i], i % 2, {}});
    b.push_back({std::to_string(i), r[i], i % 2, {}});
  }
  EXPECT_NEAR(auc(a), auc(b), kTol);
}

TEST(RobustWeights, Examples) {
  const auto rw = robust_weights(v({0.8, 0.2}));
  EXPECT_NEAR(rw.weights[0], 0.8, kTol);
  EXPECT_NEAR(rw.weights[1], 0.2, kTol);
  const auto eq = robust_weights(v({0.7, 0.7, 0.7}));
  for (double w : eq.weights) EXPECT_NEAR(w, 1.0 / 3.0, kTol);
  const auto odd = robust_weights(v({0.91, 0.64, 0.77, 0.58}));
  double sum = 0;
  for (double w : odd.weights) sum += w;
  EXPECT_NEAR(sum, 1.0, kTol);
  EXPECT_THROW(robust_weights(v({0.8, 0.0})), InvalidParameter);
}

TEST(Tta, Examples) {
  const std::vector<std::vector<double>> one_model{{0.6}, {0.8}};
  EXPECT_NEAR(tta_fuse(one_model, FusionWeights::uniform(1)), 0.7, kTol);
  const std::vector<std::vector<double>> flip{{0.2, 0.4}, {0.6, 0.8}};
  EXPECT_NEAR(tta_fuse(flip, FusionWeights({0.5, 0.5})), 0.5, kTol);
  const std::vector<std::vector<double>> same{{0.3, 0.9}, {0.3, 0.9}, {0.3, 0.9}};
  const std::vector<std::vector<double>> single{{0.3, 0.9}};
  const FusionWeights w({0.8, 0.2});
  EXPECT_NEAR(tta_fuse(same, w), tta_fuse(single, w), kTol);
  const std::vector<std::vector<double>> missing{{0.3, 0.9}, {0.3}};
  EXPECT_THROW(tta_fuse(missing, w), InvalidParameter);
}

TEST(TopK, CountRule) {
  EXPECT_EQ(topk_count(196, 0.10), 20u);
  EXPECT_EQ(topk_count(4, 0.5), 2u);
  EXPECT_EQ(topk_count(5, 0.01), 1u);
  EXPECT_EQ(topk_count(7, 1.0), 7u);
  EXPECT_THROW(topk_count(7, 0.0), InvalidParameter);
  EXPECT_THROW(topk_count(7, 1.5), InvalidParameter);
}

TEST(TopK, PoolExamples) {
  EXPECT_NEAR(topk_pool(v({1, 2, 3, 4}), 0.5, PoolMode::mean), 3.5, kTol);
  EXPECT_NEAR(topk_pool(v({1, 2, 3, 4}), 1.0, PoolMode::mean), 2.5, kTol);
  const double e3 = std::exp(3.0), e4 = std::exp(4.0);
  EXPECT_NEAR(topk_pool(v({1, 2, 3, 4}), 0.5, PoolMode::softmax), (3 * e3 + 4 * e4) / (e3 + e4), kTol);
  EXPECT_NEAR(topk_pool_count(v({1, 2, 3, 4}), 10, PoolMode::mean), 2.5, kTol);
  EXPECT_NEAR(topk_pool(v({900, 1000}), 1.0, PoolMode::softmax), (900 * std::exp(-100.0) + 1000) / (1 + std::exp(-100.0)),
              1e-9);
  EXPECT_THROW(topk_pool(std::vector<double>{}, 0.5, PoolMode::mean), InvalidParameter);
}

TEST(TopK, MeanIsMonotone) {
  RngStream rng(4, "topk");
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(30);
    for (auto& x : s) x = rng.uniform();
    const double base = topk_pool(s, 0.2, PoolMode::mean);
    auto up = s;
    up[static_cast<std::size_t>(rng.uniform_int(0, 29))] += 0.3;
    EXPECT_GE(topk_pool(up, 0.2, PoolMode::mean), base);
  }
}

TEST(Views, ValidateRequiresOriginal) {
  EXPECT_NO_THROW(validate_views(std::vector<TtaView>{TtaView::original, TtaView::hflip}));
  EXPECT_THROW(validate_views(std::vector<TtaView>{TtaView::hflip}), InvalidParameter);
  EXPECT_THROW(validate_views(std::vector<TtaView>{}), InvalidParameter);
}

TEST(Views, RenderGeometry) {
  const auto img = dfbench::testing::random_image(21, 17, 3, 9);
  EXPECT_EQ(render_view(img, TtaView::original), img);

  const auto flipped = render_view(img, TtaView::hflip);
  EXPECT_EQ(flipped.at(0, 1, 2), img.at(20, 1, 2));
  EXPECT_EQ(render_view(flipped, TtaView::hflip), img);

  const auto rot = render_view(img, TtaView::rot90);
  ASSERT_EQ(rot.width(), 17);
  ASSERT_EQ(rot.height(), 21);
  // Counter-clockwise: the top-right corner moves to the top-left.
  EXPECT_EQ(rot.at(0, 0, 0), img.at(20, 0, 0));
  EXPECT_EQ(rot.at(16, 20, 1), img.at(0, 16, 1));
  auto full = rot;
  for (int i = 0; i < 3; ++i) full = render_view(full, TtaView::rot90);
  EXPECT_EQ(full, img);

  const auto big = dfbench::testing::natural_image(64, 48, 2);
  const auto crop = render_view(big, TtaView::center_crop, 0.5);
  EXPECT_EQ(crop.width(), 32);
  EXPECT_EQ(crop.height(), 24);
  EXPECT_EQ(crop.at(0, 0, 0), big.at(16, 12, 0));
  const auto sq = render_view(big, TtaView::direct_resize, 0.875, 40);
  EXPECT_EQ(sq.width(), 40);
  EXPECT_EQ(sq.height(), 40);
}
