#include <gtest/gtest.h>

#include "coordnet/synth.hpp"
#include "coordnet/traces.hpp"
#include "fixtures.hpp"

using namespace coordnet;
using Counts = std::map<std::string, std::uint32_t>;

namespace {

const FeatureBag* bag_of(const std::vector<FeatureBag>& bags, const std::string& id) {
  for (const auto& b : bags)
    if (b.actor_id == id) return &b;
  return nullptr;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string s;
  for (const auto& t : tokens) s += (s.empty() ? "" : " ") + t;
  return s;
}

}  // namespace

TEST(Preprocess, PipelineExample) {
  auto t = preprocess_text("Hello, WORLD!! visit https://a.b #tag @you \xF0\x9F\x98\x80 good day", {});
  EXPECT_EQ(t, (std::vector<std::string>{"hello", "world", "visit", "good", "day"}));
}

TEST(Preprocess, Stopwords) {
  EXPECT_EQ(preprocess_text("the cat sat", {"the"}), (std::vector<std::string>{"cat", "sat"}));
}

TEST(Preprocess, OnlyEmoji) {
  EXPECT_TRUE(preprocess_text("\xF0\x9F\x94\xA5\xF0\x9F\x94\xA5\xF0\x9F\x94\xA5", {}).empty());
}

TEST(Preprocess, NonLatinScripts) {
  EXPECT_EQ(preprocess_text("ПРИВЕТ мир, Γειά!", {}), (std::vector<std::string>{"привет", "мир", "γειά"}));
  EXPECT_EQ(preprocess_text("سلام دنیا", {}), (std::vector<std::string>{"سلام", "دنیا"}));
}

TEST(Preprocess, MentionsAndHashtagsBeforePunctuation) {
  EXPECT_EQ(preprocess_text("@someone: #Breaking_News! more-text", {}), (std::vector<std::string>{"more", "text"}));
  EXPECT_EQ(preprocess_text("a # b @ c", {}), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Preprocess, InvalidUtf8DoesNotThrow) {
  EXPECT_NO_THROW(preprocess_text("abc \xFF\xFE def", {}));
}

TEST(Preprocess, IdempotentOnOutput) {
  synth::ScenarioConfig cfg;
  const char* samples[] = {"Hello, WORLD!! visit https://a.b #tag @you good day",
                           "RT @x: «Quoted» text – with dashes… and ¿questions?",
                           "emoji \xE2\x9C\x88\xEF\xB8\x8F plane 100% $5 & more",
                           "Straße ΣΊΣΥΦΟΣ İstanbul"};
  const auto stop = default_stopwords();
  for (const char* s : samples) {
    const auto once = preprocess_text(s, stop);
    EXPECT_EQ(preprocess_text(join(once), stop), once) << s;
  }
}

TEST(UrlDomain, Normalization) {
  EXPECT_EQ(url_domain("https://WWW.Example.com/a"), "example.com");
  EXPECT_EQ(url_domain("http://example.com/b"), "example.com");
  EXPECT_EQ(url_domain("https://user:pw@News.RU:8080/x?y#z"), "news.ru");
  EXPECT_EQ(url_domain("https://www.www.example.com"), "www.example.com");
  EXPECT_EQ(url_domain("not a url"), std::nullopt);
  EXPECT_EQ(url_domain("https:///path"), std::nullopt);
  EXPECT_EQ(url_domain("://example.com"), std::nullopt);
}

namespace {

Dataset trace_fixture() {
  using namespace fx;
  std::vector<Actor> actors{io("u1", "iran"), io("u2", "russia"), ctl("u3", "iran")};
  std::vector<Post> posts{
      original("o1", "u1", 100, "one two three", {"https://WWW.Example.com/a"}, {"news"}),
      original("o2", "u1", 200, "alpha beta gamma delta", {"http://example.com/b", "not a url"}, {"news"}),
      retweet("r1", "u1", 305, "p1", "ext", 300),
      retweet("r2", "u1", 320, "p1", "ext", 310),
      retweet("r3", "u1", 400, "p2", "ext", 390),
      retweet("r4", "u2", 311, "p1", "ext", 300),
      retweet("r5", "u2", 500, "p3", "ext"),
      original("o3", "u3", 50, "only originals here today"),
  };
  posts[2].hashtags = {"news", "world"};
  posts[5].urls = {"https://news.ru/x"};
  return validate_dataset(actors, posts);
}

}  // namespace

TEST(CoRetweet, CountsPerSource) {
  auto ds = trace_fixture();
  auto bags = extract_co_retweet(ds);
  ASSERT_EQ(bags.size(), 2u);
  EXPECT_EQ(bag_of(bags, "u1")->counts, (Counts{{"p1", 2}, {"p2", 1}}));
  EXPECT_EQ(bag_of(bags, "u2")->counts, (Counts{{"p1", 1}, {"p3", 1}}));
  EXPECT_EQ(bag_of(bags, "u3"), nullptr);
}

TEST(FastRetweet, WindowBoundaries) {
  auto ds = trace_fixture();
  ExtractionReport rep;
  auto bags = extract_fast_retweet(ds, {}, &rep);
  // r1 latency 5 and r2 latency 10 are in, r3 latency 10 is in, r4 latency 11 is out.
  EXPECT_EQ(bag_of(bags, "u1")->counts, (Counts{{"p1", 2}, {"p2", 1}}));
  EXPECT_EQ(bag_of(bags, "u2"), nullptr);
  EXPECT_EQ(rep.retweets_missing_source_time, 1u);
}

TEST(FastRetweet, AccountDimension) {
  auto ds = trace_fixture();
  TraceOptions opts;
  opts.fast_retweet_dimension = FastRetweetDimension::AccountId;
  auto bags = extract_fast_retweet(ds, opts);
  EXPECT_EQ(bag_of(bags, "u1")->counts, (Counts{{"ext", 3}}));
}

TEST(FastRetweet, PointwiseBelowCoRetweet) {
  synth::ScenarioConfig cfg;
  cfg.states = {{"a", 30, 30}, {"b", 30, 30}};
  cfg.tweet_pool = 50;
  cfg.latency_median_seconds = 15;
  auto c = synth::generate_corpus(cfg);
  auto ds = validate_dataset(c.actors, c.posts);
  auto fast = extract_fast_retweet(ds);
  auto co = extract_co_retweet(ds);
  ASSERT_FALSE(fast.empty());
  for (const auto& f : fast) {
    const auto* full = bag_of(co, f.actor_id);
    ASSERT_NE(full, nullptr);
    for (const auto& [k, n] : f.counts) EXPECT_LE(n, full->counts.at(k));
  }
}

TEST(CoUrl, DomainsAndReport) {
  auto ds = trace_fixture();
  ExtractionReport rep;
  auto bags = extract_co_url(ds, {}, &rep);
  EXPECT_EQ(bag_of(bags, "u1")->counts, (Counts{{"example.com", 2}}));
  EXPECT_EQ(bag_of(bags, "u2")->counts, (Counts{{"news.ru", 1}}));
  EXPECT_EQ(rep.unparseable_urls, 1u);
}

TEST(CoUrl, Expansion) {
  auto ds = validate_dataset({fx::io("u", "s")}, {fx::original("p", "u", 1, "", {"https://t.co/xyz"})});
  TraceOptions opts;
  opts.url_expansions = {{"https://t.co/xyz", "https://www.bbc.co.uk/news"}};
  auto bags = extract_co_url(ds, opts);
  EXPECT_EQ(bags[0].counts, (Counts{{"bbc.co.uk", 1}}));
}

TEST(CoHashtag, AllKindsCounted) {
  auto ds = trace_fixture();
  auto bags = extract_co_hashtag(ds);
  EXPECT_EQ(bag_of(bags, "u1")->counts, (Counts{{"news", 3}, {"world", 1}}));
  EXPECT_EQ(bag_of(bags, "u3"), nullptr);
}

TEST(CoHashtag, TotalsMatchOccurrences) {
  synth::ScenarioConfig cfg;
  cfg.states = {{"a", 20, 20}, {"b", 20, 20}};
  cfg.hashtags_per_post = 3;
  cfg.hashtag_pool = 40;
  auto c = synth::generate_corpus(cfg);
  auto ds = validate_dataset(c.actors, c.posts);
  std::size_t in_bags = 0, in_posts = 0;
  for (const auto& b : extract_co_hashtag(ds))
    for (const auto& [_, n] : b.counts) in_bags += n;
  for (const auto& p : ds.posts()) in_posts += p.hashtags.size();
  EXPECT_EQ(in_bags, in_posts);
}

TEST(Text, MinimumTokensAndOriginalsOnly) {
  using namespace fx;
  auto three = original("a", "u", 1, "one two three");
  auto four = original("b", "u", 2, "one two three four");
  auto rt = retweet("c", "u", 3, "x", "y");
  rt.text = "long retweet text that should be ignored entirely";
  auto ds = validate_dataset({io("u", "s")}, {three, four, rt});
  ExtractionReport rep;
  auto bags = extract_text(ds, {}, &rep);
  ASSERT_EQ(bags.size(), 1u);
  EXPECT_EQ(bags[0].counts, (Counts{{"four", 1}, {"one", 1}, {"three", 1}, {"two", 1}}));
  EXPECT_EQ(rep.short_text_posts, 1u);
  EXPECT_EQ(rep.text_posts_used, 1u);
}

TEST(Text, StopwordsCountAgainstMinimum) {
  auto ds = validate_dataset({fx::io("u", "s")}, {fx::original("a", "u", 1, "the cat and the dog")});
  TraceOptions opts;
  opts.stopwords = default_stopwords();
  EXPECT_TRUE(extract_text(ds, opts).empty());
}

TEST(Traces, SortedAndDeterministic) {
  synth::ScenarioConfig cfg;
  cfg.states = {{"b", 10, 10}, {"a", 10, 10}};
  auto c = synth::generate_corpus(cfg);
  auto ds = validate_dataset(c.actors, c.posts);
  for (auto t : kTraceKinds) {
    auto first = extract_trace(ds, t);
    EXPECT_TRUE(std::is_sorted(first.begin(), first.end(),
                               [](const auto& x, const auto& y) { return x.actor_id < y.actor_id; }));
    for (const auto& b : first)
      for (const auto& [_, n] : b.counts) EXPECT_GE(n, 1u);
    EXPECT_EQ(first, extract_trace(ds, t));
  }
}
