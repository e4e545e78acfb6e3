#include <gtest/gtest.h>

#include "coordnet/interactions.hpp"
#include "coordnet/synth.hpp"
#include "fixtures.hpp"

using namespace coordnet;

namespace {

Dataset interaction_fixture() {
  using namespace fx;
  std::vector<Actor> actors{io("u1", "iran"), io("u2", "russia"), io("u3", "russia"), ctl("c1", "qatar"),
                            io("q1", "qatar")};
  std::vector<Post> posts{
      original("o1", "u2", 1),      original("o2", "u2", 2),      original("o3", "u3", 3),
      original("o4", "q1", 4),      original("o5", "q1", 5),      retweet("q1r", "q1", 6, "o6", "c1"),
      retweet("r1", "u1", 10, "o1", "u2"), retweet("r2", "u1", 11, "o2", "u2"), retweet("r3", "u1", 12, "o1", "u2"),
      retweet("r4", "u1", 13, "o3", "u3"), retweet("r5", "u1", 14, "x", "outsider"),
      retweet("r6", "u1", 15, "o4", "q1"), reply("p1", "u1", 16, "u1"),     reply("p2", "u2", 17, "u1"),
  };
  return validate_dataset(actors, posts);
}

}  // namespace

TEST(CountInteractions, RetweetsAndReplies) {
  auto ds = interaction_fixture();
  auto rt = count_interactions(ds, InteractionKind::Retweet);
  const auto u1 = *ds.find("u1"), u2 = *ds.find("u2"), u3 = *ds.find("u3"), q1 = *ds.find("q1");
  EXPECT_EQ(rt.count(u1, u2), 3u);
  EXPECT_EQ(rt.count(u1, u3), 1u);
  EXPECT_EQ(rt.count(u1, q1), 1u);
  // Unresolvable target ignored.
  EXPECT_EQ(rt.out_strength(u1), 5u);

  auto rp = count_interactions(ds, InteractionKind::Reply);
  EXPECT_EQ(rp.count(u1, u1), 0u);  // self-reply
  EXPECT_EQ(rp.count(u2, u1), 1u);
  EXPECT_EQ(rp.out_strength(u1), 0u);
}

TEST(OriginalPosts, PerStateAndCohort) {
  auto ds = interaction_fixture();
  auto io = original_post_counts(ds, Cohort::IO);
  EXPECT_EQ(io.at("russia"), 3u);
  EXPECT_EQ(io.at("qatar"), 2u);  // the retweet does not count
  EXPECT_EQ(io.at("iran"), 0u);
  EXPECT_EQ(original_post_counts(ds, Cohort::Control).at("qatar"), 0u);
}

TEST(Score, Formula) {
  EXPECT_DOUBLE_EQ(suspiciousness_score(5, 10, 100), 0.025);
  EXPECT_EQ(suspiciousness_score(0, 10, 100), 0.0);
  EXPECT_DOUBLE_EQ(suspiciousness_score(7, 7, 7), 1.0);
}

TEST(Score, StrictlyIncreasingInSic) {
  for (std::uint64_t s = 0; s < 50; ++s) EXPECT_LT(suspiciousness_score(s, 50, 80), suspiciousness_score(s + 1, 50, 80));
}

TEST(Suspiciousness, PooledScoresBothSides) {
  auto ds = interaction_fixture();
  const auto counts = count_interactions(ds, InteractionKind::Retweet);
  const InteractionProfile prof(ds, counts);
  // russia users never retweet, so iran -> russia alone is scoreable.
  auto dir = suspiciousness(prof, Cohort::IO, "iran", "russia", InteractionMode::Directional);
  ASSERT_FALSE(dir.skipped);
  ASSERT_EQ(dir.scores.size(), 1u);
  const auto& s = dir.scores[0];
  EXPECT_EQ(s.actor_id, "u1");
  EXPECT_EQ(s.s_ic, 4u);
  EXPECT_EQ(s.s_i, 5u);
  EXPECT_EQ(s.p_c, 3u);
  EXPECT_DOUBLE_EQ(s.score, (4.0 / 5.0) * (4.0 / 3.0));

  auto pooled = suspiciousness(prof, Cohort::IO, "iran", "russia");
  ASSERT_TRUE(pooled.skipped);
  EXPECT_EQ(*pooled.skipped, "PAIR_SKIPPED:P_C_ZERO:iran");
  EXPECT_TRUE(pooled.scores.empty());
}

TEST(Suspiciousness, SkipsWithoutScoreableUsers) {
  auto ds = interaction_fixture();
  auto s = suspiciousness(ds, InteractionKind::Reply, Cohort::IO, "qatar", "russia", InteractionMode::Directional);
  ASSERT_TRUE(s.skipped);
  EXPECT_EQ(*s.skipped, "PAIR_SKIPPED:NO_SCOREABLE_USERS:qatar");
}

TEST(Suspiciousness, PooledSizeIsSumOfDirections) {
  synth::ScenarioConfig cfg;
  cfg.states = {{"a", 25, 25}, {"b", 25, 25}, {"c", 10, 10}};
  cfg.in_scope_rate = 0.6;
  cfg.cross_state_rate = 0.5;
  auto c = synth::generate_corpus(cfg);
  auto ds = validate_dataset(c.actors, c.posts);
  for (auto kind : kInteractionKinds) {
    const auto counts = count_interactions(ds, kind);
    const InteractionProfile prof(ds, counts);
    for (auto cohort : kCohorts) {
      auto ab = suspiciousness(prof, cohort, "a", "b", InteractionMode::Directional);
      auto ba = suspiciousness(prof, cohort, "b", "a", InteractionMode::Directional);
      auto pooled = suspiciousness(prof, cohort, "a", "b");
      ASSERT_FALSE(pooled.skipped);
      EXPECT_EQ(pooled.scores.size(), ab.scores.size() + ba.scores.size());
      for (const auto& s : pooled.scores) {
        EXPECT_GE(s.score, 0.0);
        EXPECT_TRUE(std::isfinite(s.score));
        EXPECT_LE(s.s_ic, s.s_i);
        EXPECT_NEAR(s.score, (double(s.s_ic) / double(s.s_i)) * (double(s.s_ic) / double(s.p_c)), 1e-12);
      }
    }
  }
}

TEST(Suspiciousness, ThirdStateTrafficOnlyMovesSi) {
  using namespace fx;
  std::vector<Actor> actors{io("a1", "a"), io("b1", "b"), io("c1", "c")};
  std::vector<Post> posts{original("ob", "b1", 1), original("oc", "c1", 2), retweet("r1", "a1", 3, "ob", "b1")};
  auto base = validate_dataset(actors, posts);
  posts.push_back(retweet("r2", "c1", 4, "ob", "b1"));  // c -> b: unrelated to a's score
  auto more = validate_dataset(actors, posts);
  auto x = suspiciousness(base, InteractionKind::Retweet, Cohort::IO, "a", "b", InteractionMode::Directional);
  auto y = suspiciousness(more, InteractionKind::Retweet, Cohort::IO, "a", "b", InteractionMode::Directional);
  ASSERT_EQ(x.scores.size(), 1u);
  EXPECT_EQ(x.scores[0].score, y.scores[0].score);
}

TEST(Scores, DumpFormat) {
  auto ds = interaction_fixture();
  const auto counts = count_interactions(ds, InteractionKind::Retweet);
  const InteractionProfile prof(ds, counts);
  std::ostringstream out;
  write_scores(out, all_scores(prof));
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "actor_id,kind,counterpart_state,s_ic,s_i,p_c,score");
  EXPECT_NE(text.find("u1,retweet,russia,4,5,3,1.06666666667\n"), std::string::npos);
  EXPECT_NE(text.find("u1,retweet,qatar,1,5,2,0.1\n"), std::string::npos);
}
