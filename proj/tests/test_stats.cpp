#include <random>

#include <gtest/gtest.h>

#include "coordnet/experiments.hpp"
#include "coordnet/stats.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace coordnet;
using V = std::vector<double>;

namespace {

UTestResult exact(const V& a, const V& b) {
  UTestOptions o;
  o.force = UTestOptions::Force::Exact;
  return mann_whitney_greater(a, b, o);
}

UTestResult normal(const V& a, const V& b) {
  UTestOptions o;
  o.force = UTestOptions::Force::Normal;
  return mann_whitney_greater(a, b, o);
}

V draw(std::mt19937_64& rng, std::size_t n, int levels) {
  V v(n);
  for (auto& x : v) x = static_cast<double>(rng() % static_cast<std::uint64_t>(levels));
  return v;
}

V distinct(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  V v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Ranks, Midranks) {
  EXPECT_EQ(rank_with_ties(V{10, 20, 20, 30}), (V{1, 2.5, 2.5, 4}));
  EXPECT_EQ(rank_with_ties(V{5, 5, 5}), (V{2, 2, 2}));
  EXPECT_EQ(rank_with_ties(V{1, 2, 3, 4}), (V{1, 2, 3, 4}));
  EXPECT_EQ(rank_with_ties(V{3, 1, 2}), (V{3, 1, 2}));
}

TEST(Ranks, SumIsTriangular) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    auto v = draw(rng, 1 + rng() % 40, 5);
    auto r = rank_with_ties(v);
    const double n = static_cast<double>(v.size());
    EXPECT_EQ(std::accumulate(r.begin(), r.end(), 0.0), n * (n + 1) / 2);
  }
}

TEST(MannWhitney, Examples) {
  auto r = mann_whitney_greater(V{5, 6, 7}, V{1, 2, 3});
  EXPECT_EQ(r.u_io, 9.0);
  EXPECT_EQ(r.method, TestMethod::Exact);
  EXPECT_NEAR(r.p_one_sided, 0.05, 1e-15);

  r = mann_whitney_greater(V{1, 2, 3}, V{5, 6, 7});
  EXPECT_EQ(r.u_io, 0.0);
  EXPECT_NEAR(r.p_one_sided, 1.0, 1e-15);

  // Fully tied pair: P(U >= 4.5) over the 20 assignments is 14/20.
  r = mann_whitney_greater(V{1, 2, 3}, V{1, 2, 3});
  EXPECT_EQ(r.u_io, 4.5);
  EXPECT_EQ(r.effect, 0.5);
  EXPECT_NEAR(r.p_one_sided, 0.7, 1e-15);
}

TEST(MannWhitney, FrozenOracleValues) {
  // Values from exhaustive enumeration of group assignments.
  struct Case {
    V io, ctl;
    double u, p;
  } cases[] = {
      {{0.1, 0.9, 0.9, 0.4}, {0.1, 0.2, 0.9}, 7.5, 13.0 / 35.0},
      {{2, 2, 3, 5, 8}, {1, 2, 2, 3}, 15.5, 17.0 / 126.0},
      {{1}, {0, 0, 0, 0, 0, 0, 0, 0}, 8.0, 1.0 / 9.0},
  };
  for (const auto& c : cases) {
    auto r = exact(c.io, c.ctl);
    EXPECT_EQ(r.u_io, c.u);
    EXPECT_NEAR(r.p_one_sided, c.p, 1e-12);
  }
}

TEST(MannWhitney, NormalPathReference) {
  // Tie-corrected normal approximation with continuity correction.
  EXPECT_NEAR(normal(V{0.3, 1.2, 2.5, 3.1, 4.4}, V{0.2, 0.5, 0.7, 1.0, 1.1, 1.9}).p_one_sided, 0.06034540026372278,
              1e-12);
  EXPECT_NEAR(normal(V{2, 2, 3, 5, 8}, V{1, 2, 2, 3}).p_one_sided, 0.09938586680841965, 1e-12);
  EXPECT_EQ(normal(V{4, 4}, V{4, 4, 4}).p_one_sided, 1.0);
}

TEST(MannWhitney, EmptySample) {
  EXPECT_THROW(mann_whitney_greater(V{}, V{1}), Error);
  try {
    mann_whitney_greater(V{1}, V{});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySample);
  }
}

TEST(MannWhitney, MethodSelection) {
  // C(22, 11) = 705432 <= 2e6; C(24, 12) = 2704156 > 2e6.
  std::mt19937_64 rng(2);
  EXPECT_EQ(mann_whitney_greater(distinct(rng, 11), distinct(rng, 11)).method, TestMethod::Exact);
  EXPECT_EQ(mann_whitney_greater(distinct(rng, 12), distinct(rng, 12)).method, TestMethod::NormalApprox);
  EXPECT_EQ(mann_whitney_greater(distinct(rng, 1), distinct(rng, 1000)).method, TestMethod::Exact);
  EXPECT_EQ(mann_whitney_greater(distinct(rng, 3), distinct(rng, 300)).method, TestMethod::NormalApprox);
}

TEST(MannWhitney, ExactMatchesOracleWithTies) {
  std::mt19937_64 rng(20);
  for (int t = 0; t < 300; ++t) {
    auto io = draw(rng, 1 + rng() % 8, 1 + static_cast<int>(rng() % 6));
    auto ctl = draw(rng, 1 + rng() % 8, 1 + static_cast<int>(rng() % 6));
    auto got = exact(io, ctl);
    auto want = oracle::mann_whitney_greater(io, ctl);
    EXPECT_EQ(got.u_io, want.u_io);
    EXPECT_NEAR(got.p_one_sided, want.p, 1e-12);
  }
}

TEST(MannWhitney, ExactAgreesWithNormalAwayFromTinyGroups) {
  // Holds for tie-free samples once both groups have at least 3 values.
  std::mt19937_64 rng(21);
  int checked = 0;
  while (checked < 300) {
    const std::size_t n1 = 3 + rng() % 60, n2 = 3 + rng() % 60;
    if (n1 * n2 < 8 || n1 * n2 > 400) continue;
    auto io = distinct(rng, n1), ctl = distinct(rng, n2);
    EXPECT_LE(std::abs(exact(io, ctl).p_one_sided - normal(io, ctl).p_one_sided), 0.02) << n1 << "x" << n2;
    ++checked;
  }
}

TEST(MannWhitney, SumOfUs) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 100; ++t) {
    auto a = draw(rng, 1 + rng() % 30, 4), b = draw(rng, 1 + rng() % 30, 4);
    const double n = static_cast<double>(a.size() * b.size());
    auto ab = mann_whitney_greater(a, b), ba = mann_whitney_greater(b, a);
    EXPECT_EQ(ab.u_io + ba.u_io, n);
    EXPECT_GE(ab.effect, 0.0);
    EXPECT_LE(ab.effect, 1.0);
  }
}

TEST(MannWhitney, RaisingIoValueNeverRaisesP) {
  // Tie-free samples; with ties the conditional null distribution moves too.
  std::mt19937_64 rng(23);
  for (int t = 0; t < 300; ++t) {
    auto io = distinct(rng, 1 + rng() % 12), ctl = distinct(rng, 1 + rng() % 12);
    for (auto force : {UTestOptions::Force::Exact, UTestOptions::Force::Normal}) {
      UTestOptions o;
      o.force = force;
      const double before = mann_whitney_greater(io, ctl, o).p_one_sided;
      auto up = io;
      up[rng() % up.size()] += 0.5 + static_cast<double>(rng() % 3);
      EXPECT_LE(mann_whitney_greater(up, ctl, o).p_one_sided, before + 1e-12);
    }
  }
}

TEST(MannWhitney, RaisingIoValueNeverLowersU) {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 300; ++t) {
    auto io = draw(rng, 1 + rng() % 12, 6), ctl = draw(rng, 1 + rng() % 12, 6);
    const double before = mann_whitney_greater(io, ctl).u_io;
    io[rng() % io.size()] += 1.0;
    EXPECT_GE(mann_whitney_greater(io, ctl).u_io, before);
  }
}

TEST(MannWhitney, BreakingTiesCanRaiseP) {
  // Enumerated: 2/7 before, 11/35 after moving one IO value out of a tie.
  const V ctl{1, 2, 0, 0};
  EXPECT_NEAR(exact(V{1, 1, 1}, ctl).p_one_sided, 2.0 / 7.0, 1e-12);
  EXPECT_NEAR(exact(V{1, 2, 1}, ctl).p_one_sided, 11.0 / 35.0, 1e-12);
}

TEST(Candidates, StrictThreshold) {
  std::vector<PairTestResult> r(3);
  r[0].test.effect = 0.61;
  r[1].test.effect = 0.5;
  r[2].test.effect = 0.39;
  select_candidates(r);
  EXPECT_TRUE(r[0].candidate);
  EXPECT_FALSE(r[1].candidate);
  EXPECT_FALSE(r[2].candidate);
}

TEST(Bonferroni, Threshold) {
  std::vector<PairTestResult> r(197);
  r[0].candidate = true;
  r[0].test.p_one_sided = 0.49;
  r[1].candidate = true;
  r[1].test.p_one_sided = 1e-4;
  r[2].test.p_one_sided = 1e-9;  // not a candidate
  bonferroni(r, 0.05);
  EXPECT_NEAR(r[0].threshold, 0.05 / 197, 1e-12);
  EXPECT_NEAR(r[0].threshold, 2.5381e-4, 5e-9);
  EXPECT_EQ(r[0].m, 197u);
  EXPECT_FALSE(r[0].significant);
  EXPECT_TRUE(r[1].significant);
  EXPECT_FALSE(r[2].significant);
}

TEST(Bonferroni, SingleExperiment) {
  std::vector<PairTestResult> r(1);
  r[0].candidate = true;
  r[0].test.p_one_sided = 0.01;
  bonferroni(r, 0.05);
  EXPECT_TRUE(r[0].significant);
}

namespace {

// Two states; IO pairs share a hashtag among themselves, control users share
// one with low weight, so IO inter-state edges beat control ones.
Dataset separated_fixture() {
  using namespace fx;
  std::vector<Actor> actors;
  std::vector<Post> posts;
  int k = 0;
  for (int i = 0; i < 8; ++i) {
    for (const char* s : {"a", "b"}) {
      const std::string io_id = fmt::format("{}_io{}", s, i), ctl_id = fmt::format("{}_ctl{}", s, i);
      actors.push_back(io(io_id, s));
      actors.push_back(ctl(ctl_id, s));
      posts.push_back(original(fmt::format("p{}", k++), io_id, 1, "", {}, {fmt::format("io{}", i)}));
      auto p = original(fmt::format("p{}", k++), ctl_id, 1, "", {}, {fmt::format("ctl{}", i)});
      p.hashtags.push_back(fmt::format("{}_own{}", s, i));
      posts.push_back(p);
    }
  }
  return validate_dataset(actors, posts);
}

}  // namespace

TEST(RunAll, SeparatedSamplesAreSignificant) {
  auto ds = separated_fixture();
  AnalysisOptions opts;
  opts.layers = {Layer::of(TraceKind::CoHashtag), Layer::of(TraceKind::CoRetweet)};
  auto net = build_networks(ds, opts);
  auto run = run_all(ds, net, opts);
  ASSERT_EQ(run.results.size(), 1u);
  const auto& r = run.results[0];
  EXPECT_EQ(r.layer, "co_hashtag");
  EXPECT_EQ(r.sample_type, SampleType::EdgeWeights);
  EXPECT_EQ(r.test.effect, 1.0);
  EXPECT_TRUE(r.candidate);
  EXPECT_LT(r.test.p_one_sided, 0.001);
  EXPECT_TRUE(r.significant);
  ASSERT_EQ(run.skipped.size(), 1u);
  EXPECT_EQ(run.skipped[0].layer, "co_retweet");
  EXPECT_EQ(run.skipped[0].reason, "NO_IO_DATA");
}

TEST(RunAll, SortedAndCountsExperiments) {
  using namespace fx;
  std::vector<Actor> actors;
  std::vector<Post> posts;
  int k = 0;
  for (const char* s : {"c", "a", "b"}) {
    for (int i = 0; i < 3; ++i) {
      for (auto cohort : kCohorts) {
        const auto id = fmt::format("{}_{}_{}", s, to_string(cohort), i);
        actors.push_back({id, s, cohort});
        posts.push_back(original(fmt::format("p{}", k++), id, 1, "", {}, {fmt::format("t{}", i % 2)}));
        posts.push_back(reply(fmt::format("p{}", k++), id, 2, fmt::format("b_{}_0", to_string(cohort))));
      }
    }
  }
  auto ds = validate_dataset(actors, posts);
  AnalysisOptions opts;
  opts.layers = {Layer::of(InteractionKind::Reply), Layer::of(TraceKind::CoHashtag)};
  auto run = run_all(ds, build_networks(ds, opts), opts);
  for (std::size_t i = 1; i < run.results.size(); ++i) {
    const auto& x = run.results[i - 1];
    const auto& y = run.results[i];
    EXPECT_LE(std::tie(x.layer, x.state_a, x.state_b), std::tie(y.layer, y.state_a, y.state_b));
  }
  for (const auto& r : run.results) {
    EXPECT_EQ(r.m, run.results.size());
    EXPECT_EQ(r.sample_type, r.layer == "reply" ? SampleType::NodeScores : SampleType::EdgeWeights);
    EXPECT_LT(r.state_a, r.state_b);
  }
  EXPECT_EQ(run.results.size() + run.skipped.size(), 6u);

  opts.interaction_mode = InteractionMode::Directional;
  auto directional = run_all(ds, build_networks(ds, opts), opts);
  std::size_t reply_rows = 0;
  for (const auto& r : directional.results) reply_rows += r.layer == "reply";
  for (const auto& s : directional.skipped) reply_rows += s.layer == "reply";
  EXPECT_EQ(reply_rows, 6u);
}
