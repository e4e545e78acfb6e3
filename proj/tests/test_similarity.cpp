#include <random>

#include <gtest/gtest.h>

#include "coordnet/similarity.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace coordnet;

namespace {

FeatureBag bag(std::string id, std::map<std::string, std::uint32_t> counts) {
  return FeatureBag{std::move(id), TraceKind::CoHashtag, std::move(counts)};
}

std::vector<FeatureBag> random_bags(std::mt19937_64& rng, std::size_t n, std::size_t vocab, std::size_t max_feats) {
  std::vector<FeatureBag> bags;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureBag b{"a" + std::to_string(rng() % 100000) + "_" + std::to_string(i), TraceKind::CoUrl, {}};
    const auto k = 1 + rng() % max_feats;
    for (std::size_t j = 0; j < k; ++j) b.counts["f" + std::to_string(rng() % vocab)] += 1 + rng() % 4;
    bags.push_back(std::move(b));
  }
  return bags;
}

double norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& [_, w] : v.weights) s += w * w;
  return std::sqrt(s);
}

}  // namespace

TEST(Tfidf, WorkedExample) {
  // idf(a) = ln(3/3) + 1 = 1, idf(b) = ln(3/2) + 1.
  auto v = tfidf_vectorize({bag("u1", {{"a", 2}, {"b", 1}}), bag("u2", {{"a", 1}})});
  EXPECT_NEAR(smoothed_idf(2, 1), 1.4054651081081644, 1e-12);
  EXPECT_NEAR(v[0].weight("a"), 0.8182, 5e-5);
  EXPECT_NEAR(v[0].weight("b"), 0.5750, 5e-5);
  EXPECT_NEAR(v[0].weight("a"), 2.0 / std::hypot(2.0, smoothed_idf(2, 1)), 1e-12);
  EXPECT_DOUBLE_EQ(v[1].weight("a"), 1.0);
}

TEST(Tfidf, SingleBag) {
  auto v = tfidf_vectorize({bag("u", {{"x", 5}})});
  EXPECT_DOUBLE_EQ(v[0].weight("x"), 1.0);
}

TEST(Tfidf, IdenticalBagsIdenticalVectors) {
  auto v = tfidf_vectorize({bag("u", {{"x", 2}, {"y", 3}}), bag("w", {{"x", 2}, {"y", 3}}), bag("z", {{"y", 1}})});
  EXPECT_EQ(v[0].weights, v[1].weights);
}

TEST(Tfidf, MatchesOracleAndUnitNorm) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto bags = random_bags(rng, 1 + rng() % 60, 30, 8);
    auto vectors = tfidf_vectorize(bags);
    auto expect = oracle::tfidf(bags);
    for (const auto& v : vectors) {
      EXPECT_NEAR(norm(v), 1.0, 1e-9);
      ASSERT_EQ(v.weights.size(), expect.at(v.actor_id).size());
      for (const auto& [f, w] : v.weights) {
        EXPECT_GT(w, 0.0);
        EXPECT_NEAR(w, expect.at(v.actor_id).at(f), 1e-12);
      }
    }
  }
}

TEST(Cosine, SmallCases) {
  auto mk = [](std::string id, std::vector<std::pair<std::string, double>> w) {
    return SparseVector{std::move(id), TraceKind::Text, std::move(w)};
  };
  auto e = cosine_network({mk("u2", {{"x", 0.6}, {"y", 0.8}}), mk("u1", {{"x", 0.8}, {"y", 0.6}})});
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0].actor_a, "u1");
  EXPECT_EQ(e[0].actor_b, "u2");
  EXPECT_NEAR(e[0].weight, 0.96, 1e-12);

  EXPECT_TRUE(cosine_network({mk("a", {{"x", 1.0}}), mk("b", {{"y", 1.0}})}).empty());
  auto same = cosine_network({mk("a", {{"x", 0.6}, {"y", 0.8}}), mk("b", {{"x", 0.6}, {"y", 0.8}})});
  ASSERT_EQ(same.size(), 1u);
  EXPECT_NEAR(same[0].weight, 1.0, 1e-12);
  EXPECT_LE(same[0].weight, 1.0);
}

TEST(Cosine, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto bags = random_bags(rng, 2 + rng() % 199, 10 + rng() % 200, 12);
    auto edges = cosine_network(tfidf_vectorize(bags));
    auto expect = oracle::cosine_all_pairs(oracle::tfidf(bags));
    ASSERT_EQ(edges.size(), expect.size());
    for (const auto& e : edges) {
      auto it = expect.find({e.actor_a, e.actor_b});
      ASSERT_NE(it, expect.end());
      EXPECT_NEAR(e.weight, it->second, 1e-9);
      EXPECT_GT(e.weight, 0.0);
      EXPECT_LE(e.weight, 1.0 + 1e-9);
    }
  }
}

TEST(Cosine, OrderAndThreadIndependent) {
  std::mt19937_64 rng(3);
  auto bags = random_bags(rng, 300, 40, 6);
  JoinOptions one, many;
  many.threads = 4;
  auto base = cosine_network(tfidf_vectorize(bags), one);
  std::shuffle(bags.begin(), bags.end(), rng);
  auto shuffled = cosine_network(tfidf_vectorize(bags), many);
  ASSERT_EQ(base.size(), shuffled.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    EXPECT_EQ(base[i].actor_a, shuffled[i].actor_a);
    EXPECT_EQ(base[i].actor_b, shuffled[i].actor_b);
    EXPECT_EQ(base[i].weight, shuffled[i].weight);
  }
}

TEST(Cosine, ScalingCountsLeavesWeights) {
  std::mt19937_64 rng(5);
  auto bags = random_bags(rng, 80, 25, 5);
  auto scaled = bags;
  for (auto& b : scaled)
    for (auto& [_, c] : b.counts) c *= 7;
  auto x = cosine_network(tfidf_vectorize(bags));
  auto y = cosine_network(tfidf_vectorize(scaled));
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i].weight, y[i].weight, 1e-9);
}

TEST(Cosine, ReportsHeavyFeatures) {
  std::vector<FeatureBag> bags;
  for (int i = 0; i < 5; ++i) bags.push_back(bag("u" + std::to_string(i), {{"hot", 1}, {"f" + std::to_string(i), 1}}));
  JoinOptions opts;
  opts.posting_list_cap = 4;
  JoinReport rep;
  auto edges = cosine_network(tfidf_vectorize(bags), opts, &rep);
  EXPECT_EQ(edges.size(), 10u);
  ASSERT_EQ(rep.heavy_features.size(), 1u);
  EXPECT_EQ(rep.heavy_features[0].first, "hot");
  EXPECT_EQ(rep.heavy_features[0].second, 5u);
}

TEST(Interstate, FiltersStatesAndCohorts) {
  using namespace fx;
  auto ds = validate_dataset({io("i1", "iran"), io("i2", "iran"), io("r1", "russia"), ctl("r2", "russia")}, {});
  std::vector<SimilarityEdge> edges{{"i1", "r1", TraceKind::CoRetweet, 0.5},
                                    {"i1", "i2", TraceKind::CoRetweet, 0.7},
                                    {"i2", "r2", TraceKind::CoRetweet, 0.9}};
  EXPECT_EQ(interstate_edges(edges, ds, Cohort::IO, "iran", "russia"), std::vector<double>{0.5});
  EXPECT_EQ(interstate_edges(edges, ds, Cohort::IO, "russia", "iran"), std::vector<double>{0.5});
  EXPECT_TRUE(interstate_edges(edges, ds, Cohort::Control, "iran", "russia").empty());
  auto buckets = interstate_samples(edges, ds);
  ASSERT_EQ(buckets.size(), 1u);
  EXPECT_EQ((buckets.at(StatePairKey{Cohort::IO, "iran", "russia"})), std::vector<double>{0.5});
}

TEST(EdgeList, Format) {
  std::ostringstream out;
  write_edge_list(out, {{"a", "b", TraceKind::FastRetweet, 0.123456789123}});
  EXPECT_EQ(out.str(), "actor_a,actor_b,trace,weight\na,b,fast_retweet,0.123456789\n");
}
