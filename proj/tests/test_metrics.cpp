#include <gtest/gtest.h>

#include <cmath>

#include "dfbench/errors.hpp"
#include "dfbench/metrics.hpp"
#include "dfbench/rng.hpp"

using namespace dfbench;

namespace {

LabeledScores make(std::vector<double> fakes, std::vector<double> reals) {
  LabeledScores out;
  for (std::size_t i = 0; i < fakes.size(); ++i) out.push_back({"f" + std::to_string(i), fakes[i], 1, {}});
  for (std::size_t i = 0; i < reals.size(); ++i) out.push_back({"r" + std::to_string(i), reals[i], 0, {}});
  return out;
}

// Counts half-wins in integers.
double brute_auc(const LabeledScores& items) {
  long long half_wins = 0, pairs = 0;
  for (const auto& f : items) {
    if (f.label != 1) continue;
    for (const auto& r : items) {
      if (r.label != 0) continue;
      ++pairs;
      half_wins += f.score > r.score ? 2 : f.score == r.score ? 1 : 0;
    }
  }
  return static_cast<double>(half_wins) / (2.0 * static_cast<double>(pairs));
}

LabeledScores random_instance(RngStream& rng, int max_items, bool allow_ties) {
  LabeledScores out;
  const auto n = rng.uniform_int(2, max_items);
  for (std::int64_t i = 0; i < n; ++i) {
    const double s = allow_ties ? static_cast<double>(rng.uniform_int(0, 9)) / 10.0 : rng.uniform();
    out.push_back({"x" + std::to_string(i), s, static_cast<int>(rng.uniform_int(0, 1)), {}});
  }
  out[0].label = 0;
  out[1].label = 1;
  return out;
}

}  // namespace

TEST(Auc, KnownExamples) {
  EXPECT_EQ(auc(make({0.9, 0.8}, {0.3, 0.1})), 1.0);
  EXPECT_EQ(auc(make({0.5, 0.5, 0.5}, {0.5, 0.5})), 0.5);
  EXPECT_EQ(auc(make({0.9, 0.4}, {0.6, 0.1})), 0.75);
}

TEST(Auc, SingleClassIsUndefined) {
  EXPECT_THROW(auc(make({0.9, 0.4}, {})), UndefinedMetric);
  EXPECT_THROW(auc(make({}, {0.2})), UndefinedMetric);
  EXPECT_THROW(auc(LabeledScores{}), UndefinedMetric);
  EXPECT_THROW(auc(make({NAN}, {0.2})), UndefinedMetric);
}

TEST(Auc, MatchesBruteForceOracle) {
  RngStream rng(12, "oracle");
  for (int t = 0; t < 500; ++t) {
    const auto items = random_instance(rng, 200, t % 2 == 0);
    const double want = brute_auc(items);
    EXPECT_NEAR(auc(items), want, 1e-12);
    EXPECT_NEAR(auc_pairwise(items), want, 1e-12);
  }
}

TEST(Auc, InvariantUnderStrictlyIncreasingMaps) {
  RngStream rng(13, "monotone");
  for (int t = 0; t < 50; ++t) {
    auto items = random_instance(rng, 150, true);
    const double base = auc(items);
    for (auto& it : items) it.score = std::exp(3.0 * it.score) - 7.0;
    EXPECT_NEAR(auc(items), base, 1e-12);
  }
}

TEST(Auc, LabelFlipComplementsWithoutTies) {
  RngStream rng(14, "complement");
  for (int t = 0; t < 50; ++t) {
    auto items = random_instance(rng, 120, false);
    const double base = auc(items);
    for (auto& it : items) it.label = 1 - it.label;
    EXPECT_NEAR(auc(items), 1.0 - base, 1e-12);
  }
}

TEST(PerGroup, SingleGroupEqualsOverall) {
  auto items = make({0.9, 0.4, 0.7}, {0.6, 0.1});
  for (auto& it : items) it.groups = {"all"};
  const auto g = per_group_auc(items);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g.at("all"), auc(items));
}

TEST(PerGroup, GroupWithoutFakesOmitted) {
  auto items = make({0.9}, {0.6, 0.1});
  items[0].groups = {"a"};
  items[1].groups = {"only_reals"};
  const auto g = per_group_auc(items);
  EXPECT_EQ(g.count("only_reals"), 0u);
  EXPECT_EQ(g.at("a"), 1.0);
}

TEST(PerGroup, DisjointGroupsMatchOracle) {
  // Fakes: a -> 0.9, 0.2; b -> 0.5. Reals: 0.6, 0.3.
  auto items = make({0.9, 0.2, 0.5}, {0.6, 0.3});
  items[0].groups = items[1].groups = {"a"};
  items[2].groups = {"b"};
  const auto g = per_group_auc(items);
  EXPECT_EQ(g.at("a"), 0.5);
  EXPECT_EQ(g.at("b"), 0.5);
  items[2].score = 0.6;
  EXPECT_EQ(per_group_auc(items).at("b"), 0.75);
}

TEST(Bootstrap, PerfectSeparationIsDegenerateInterval) {
  const auto ci = bootstrap_ci(make({0.9, 0.8, 0.7}, {0.3, 0.2, 0.1}), 200, 0.95, 1);
  EXPECT_EQ(ci.low, 1.0);
  EXPECT_EQ(ci.high, 1.0);
}

TEST(Bootstrap, DeterministicUnderSeed) {
  RngStream rng(15, "boot");
  const auto items = random_instance(rng, 200, false);
  const auto a = bootstrap_ci(items, 300, 0.95, 77);
  const auto b = bootstrap_ci(items, 300, 0.95, 77);
  EXPECT_EQ(a.low, b.low);
  EXPECT_EQ(a.high, b.high);
  EXPECT_LE(a.low, auc(items));
  EXPECT_GE(a.high, auc(items));
}

TEST(Bootstrap, WidthShrinksWithMoreItems) {
  auto synth = [](int n, std::uint64_t seed) {
    RngStream rng(seed, "shrink");
    LabeledScores out;
    for (int i = 0; i < n; ++i) {
      out.push_back({"f" + std::to_string(i), rng.normal(1.0, 1.0), 1, {}});
      out.push_back({"r" + std::to_string(i), rng.normal(0.0, 1.0), 0, {}});
    }
    return out;
  };
  const auto small = bootstrap_ci(synth(50, 1), 400, 0.95, 3);
  const auto large = bootstrap_ci(synth(500, 1), 400, 0.95, 3);
  EXPECT_LT(large.high - large.low, small.high - small.low);
}

TEST(Bootstrap, RejectsBadArguments) {
  const auto items = make({0.9}, {0.1});
  EXPECT_THROW(bootstrap_ci(items, 99, 0.95, 1), InvalidParameter);
  EXPECT_THROW(bootstrap_ci(items, 100, 1.0, 1), InvalidParameter);
}
