#pragma once

// Seeded synthetic corpora with organic behavior and optional planted
// inter-state coordination between two states' IO accounts.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the C++ standard. All mappings from raw 64-bit draws to integers, reals
// and normals are implemented here rather than with <random> distributions,
// which are implementation-defined; a given seed therefore yields identical
// files with any conforming standard library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "coordnet/error.hpp"
#include "coordnet/ingest.hpp"
#include "coordnet/text.hpp"

namespace coordnet::synth {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n), rejection sampled.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = next();
    while (x >= limit);
    return x % n;
  }

  /// Uniform real in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

struct StateSpec {
  std::string name;
  std::size_t io_users = 0;
  std::size_t control_users = 0;
};

struct ActivitySpec {
  enum class Kind { Uniform, Zipf } kind = Kind::Uniform;
  std::size_t min = 10;
  std::size_t max = 30;
  double exponent = 2.0;  // Zipf only: P(k) ~ k^-exponent on [min, max]

  /// Probability mass over [min, max].
  std::vector<double> pmf() const {
    std::vector<double> p(max - min + 1);
    double total = 0.0;
    for (std::size_t k = min; k <= max; ++k) {
      const double w = kind == Kind::Uniform ? 1.0 : std::pow(static_cast<double>(k), -exponent);
      p[k - min] = w;
      total += w;
    }
    for (auto& x : p) x /= total;
    return p;
  }
};

struct Planting {
  std::string state_a;
  std::string state_b;
  std::size_t n_colluders_per_state = 0;
  std::size_t co_retweet_pool_size = 3;
  double co_retweet_rate = 0.0;        // share of non-engagement colluder retweets drawn from the dedicated pool
  double fast_retweet_fraction = 0.0;  // share of dedicated-pool retweets made within 10 s
  double engagement_rate = 0.0;        // share of colluder retweets/replies aimed at partner colluders
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::int64_t start_epoch = 1'577'836'800;  // 2020-01-01T00:00:00Z
  std::int64_t window_seconds = 30 * 86'400;
  std::vector<StateSpec> states;
  ActivitySpec activity;
  double original_share = 0.5;
  double retweet_share = 0.35;  // replies take the remainder
  std::size_t tweet_pool = 5'000;
  std::size_t url_pool = 20'000;
  std::size_t hashtag_pool = 20'000;
  std::size_t vocabulary = 200'000;
  std::size_t external_accounts = 997;
  std::size_t hashtags_per_post = 1;
  std::size_t urls_per_post = 1;
  std::size_t tokens_min = 6;
  std::size_t tokens_max = 6;
  double in_scope_rate = 0.1;     // organic retweets/replies aimed at dataset accounts
  double cross_state_rate = 0.1;  // of those, share aimed at another state
  double latency_median_seconds = 600.0;
  double latency_log_sigma = 2.5;
  std::optional<Planting> planting;
};

// ---------------------------------------------------------------------------
// Config I/O

namespace detail {

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& out, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidConfig, path + key + ": wrong type");
  }
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known,
                           const std::string& path) {
  for (const auto& [k, _] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* s) { return k == s; }))
      throw Error(ErrorCode::InvalidConfig, path + k + ": unknown key");
  }
}

}  // namespace detail

inline void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& field, const std::string& why) { throw Error(ErrorCode::InvalidConfig, field + ": " + why); };
  auto rate = [&](double v, const std::string& field) {
    if (!(v >= 0.0 && v <= 1.0)) fail(field, "must be in [0, 1]");
  };
  if (c.states.empty()) fail("states", "at least one state is required");
  for (std::size_t i = 0; i < c.states.size(); ++i) {
    if (c.states[i].name.empty()) fail(fmt::format("states[{}].name", i), "must be non-empty");
    for (std::size_t j = 0; j < i; ++j)
      if (text::fold_case(c.states[j].name) == text::fold_case(c.states[i].name))
        fail(fmt::format("states[{}].name", i), "duplicate state");
  }
  if (c.window_seconds <= 0) fail("window_seconds", "must be positive");
  if (c.activity.min > c.activity.max) fail("activity.min", "must not exceed activity.max");
  if (c.activity.kind == ActivitySpec::Kind::Zipf && c.activity.min == 0) fail("activity.min", "zipf needs min >= 1");
  if (c.activity.exponent < 0.0) fail("activity.exponent", "must be >= 0");
  rate(c.original_share, "kind_mix.original");
  rate(c.retweet_share, "kind_mix.retweet");
  if (c.original_share + c.retweet_share > 1.0 + 1e-12) fail("kind_mix", "original + retweet must be <= 1");
  if (c.tweet_pool == 0) fail("pools.tweets", "must be positive");
  if (c.url_pool == 0) fail("pools.urls", "must be positive");
  if (c.hashtag_pool == 0) fail("pools.hashtags", "must be positive");
  if (c.vocabulary == 0) fail("pools.vocabulary", "must be positive");
  if (c.external_accounts == 0) fail("pools.external_accounts", "must be positive");
  if (c.tokens_min > c.tokens_max) fail("tokens_per_post.min", "must not exceed tokens_per_post.max");
  rate(c.in_scope_rate, "in_scope_rate");
  rate(c.cross_state_rate, "cross_state_rate");
  if (!(c.latency_median_seconds > 0.0)) fail("organic_latency.median_seconds", "must be positive");
  if (!(c.latency_log_sigma >= 0.0)) fail("organic_latency.log_sigma", "must be >= 0");
  if (const auto& p = c.planting) {
    auto known = [&](const std::string& s) {
      return std::any_of(c.states.begin(), c.states.end(),
                         [&](const StateSpec& st) { return text::fold_case(st.name) == text::fold_case(s); });
    };
    if (!known(p->state_a)) fail("planting.state_pair[0]", "unknown state '" + p->state_a + "'");
    if (!known(p->state_b)) fail("planting.state_pair[1]", "unknown state '" + p->state_b + "'");
    if (text::fold_case(p->state_a) == text::fold_case(p->state_b)) fail("planting.state_pair", "states must differ");
    for (const auto& s : {p->state_a, p->state_b}) {
      for (const auto& st : c.states)
        if (text::fold_case(st.name) == text::fold_case(s) && st.io_users < p->n_colluders_per_state)
          fail("planting.n_colluders_per_state", "exceeds io_users of '" + s + "'");
    }
    if (p->co_retweet_pool_size == 0) fail("planting.co_retweet_pool_size", "must be positive");
    rate(p->co_retweet_rate, "planting.co_retweet_rate");
    rate(p->fast_retweet_fraction, "planting.fast_retweet_fraction");
    rate(p->engagement_rate, "planting.engagement_rate");
  }
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "scenario must be an object");
  detail::reject_unknown(j,
                         {"seed", "start_epoch", "window_seconds", "states", "activity", "kind_mix", "pools",
                          "hashtags_per_post", "urls_per_post", "tokens_per_post", "in_scope_rate",
                          "cross_state_rate", "organic_latency", "planting"},
                         "");
  ScenarioConfig c;
  detail::read_field(j, "seed", c.seed, "");
  detail::read_field(j, "start_epoch", c.start_epoch, "");
  detail::read_field(j, "window_seconds", c.window_seconds, "");
  if (auto it = j.find("states"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::InvalidConfig, "states: must be a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& s = (*it)[i];
      const auto path = fmt::format("states[{}].", i);
      if (!s.is_object()) throw Error(ErrorCode::InvalidConfig, path + ": must be an object");
      detail::reject_unknown(s, {"name", "io_users", "control_users"}, path);
      StateSpec spec;
      detail::read_field(s, "name", spec.name, path);
      detail::read_field(s, "io_users", spec.io_users, path);
      detail::read_field(s, "control_users", spec.control_users, path);
      c.states.push_back(std::move(spec));
    }
  }
  if (auto it = j.find("activity"); it != j.end()) {
    detail::reject_unknown(*it, {"distribution", "min", "max", "exponent"}, "activity.");
    std::string dist = "uniform";
    detail::read_field(*it, "distribution", dist, "activity.");
    if (dist == "uniform") c.activity.kind = ActivitySpec::Kind::Uniform;
    else if (dist == "zipf") c.activity.kind = ActivitySpec::Kind::Zipf;
    else throw Error(ErrorCode::InvalidConfig, "activity.distribution: expected uniform or zipf");
    detail::read_field(*it, "min", c.activity.min, "activity.");
    detail::read_field(*it, "max", c.activity.max, "activity.");
    detail::read_field(*it, "exponent", c.activity.exponent, "activity.");
  }
  if (auto it = j.find("kind_mix"); it != j.end()) {
    detail::reject_unknown(*it, {"original", "retweet"}, "kind_mix.");
    detail::read_field(*it, "original", c.original_share, "kind_mix.");
    detail::read_field(*it, "retweet", c.retweet_share, "kind_mix.");
  }
  if (auto it = j.find("pools"); it != j.end()) {
    detail::reject_unknown(*it, {"tweets", "urls", "hashtags", "vocabulary", "external_accounts"}, "pools.");
    detail::read_field(*it, "tweets", c.tweet_pool, "pools.");
    detail::read_field(*it, "urls", c.url_pool, "pools.");
    detail::read_field(*it, "hashtags", c.hashtag_pool, "pools.");
    detail::read_field(*it, "vocabulary", c.vocabulary, "pools.");
    detail::read_field(*it, "external_accounts", c.external_accounts, "pools.");
  }
  detail::read_field(j, "hashtags_per_post", c.hashtags_per_post, "");
  detail::read_field(j, "urls_per_post", c.urls_per_post, "");
  if (auto it = j.find("tokens_per_post"); it != j.end()) {
    detail::reject_unknown(*it, {"min", "max"}, "tokens_per_post.");
    detail::read_field(*it, "min", c.tokens_min, "tokens_per_post.");
    detail::read_field(*it, "max", c.tokens_max, "tokens_per_post.");
  }
  detail::read_field(j, "in_scope_rate", c.in_scope_rate, "");
  detail::read_field(j, "cross_state_rate", c.cross_state_rate, "");
  if (auto it = j.find("organic_latency"); it != j.end()) {
    detail::reject_unknown(*it, {"median_seconds", "log_sigma"}, "organic_latency.");
    detail::read_field(*it, "median_seconds", c.latency_median_seconds, "organic_latency.");
    detail::read_field(*it, "log_sigma", c.latency_log_sigma, "organic_latency.");
  }
  if (auto it = j.find("planting"); it != j.end() && !it->is_null()) {
    detail::reject_unknown(*it,
                           {"state_pair", "n_colluders_per_state", "co_retweet_pool_size", "co_retweet_rate",
                            "fast_retweet_fraction", "engagement_rate"},
                           "planting.");
    Planting p;
    std::vector<std::string> pair;
    detail::read_field(*it, "state_pair", pair, "planting.");
    if (pair.size() != 2) throw Error(ErrorCode::InvalidConfig, "planting.state_pair: expected two states");
    p.state_a = pair[0];
    p.state_b = pair[1];
    detail::read_field(*it, "n_colluders_per_state", p.n_colluders_per_state, "planting.");
    detail::read_field(*it, "co_retweet_pool_size", p.co_retweet_pool_size, "planting.");
    detail::read_field(*it, "co_retweet_rate", p.co_retweet_rate, "planting.");
    detail::read_field(*it, "fast_retweet_fraction", p.fast_retweet_fraction, "planting.");
    detail::read_field(*it, "engagement_rate", p.engagement_rate, "planting.");
    c.planting = std::move(p);
  }
  validate(c);
  return c;
}

inline nlohmann::ordered_json to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["start_epoch"] = c.start_epoch;
  j["window_seconds"] = c.window_seconds;
  j["states"] = nlohmann::ordered_json::array();
  for (const auto& s : c.states)
    j["states"].push_back({{"name", s.name}, {"io_users", s.io_users}, {"control_users", s.control_users}});
  j["activity"] = {{"distribution", c.activity.kind == ActivitySpec::Kind::Uniform ? "uniform" : "zipf"},
                   {"min", c.activity.min},
                   {"max", c.activity.max},
                   {"exponent", c.activity.exponent}};
  j["kind_mix"] = {{"original", c.original_share}, {"retweet", c.retweet_share}};
  j["pools"] = {{"tweets", c.tweet_pool},
                {"urls", c.url_pool},
                {"hashtags", c.hashtag_pool},
                {"vocabulary", c.vocabulary},
                {"external_accounts", c.external_accounts}};
  j["hashtags_per_post"] = c.hashtags_per_post;
  j["urls_per_post"] = c.urls_per_post;
  j["tokens_per_post"] = {{"min", c.tokens_min}, {"max", c.tokens_max}};
  j["in_scope_rate"] = c.in_scope_rate;
  j["cross_state_rate"] = c.cross_state_rate;
  j["organic_latency"] = {{"median_seconds", c.latency_median_seconds}, {"log_sigma", c.latency_log_sigma}};
  if (c.planting) {
    const auto& p = *c.planting;
    j["planting"] = {{"state_pair", {p.state_a, p.state_b}},
                     {"n_colluders_per_state", p.n_colluders_per_state},
                     {"co_retweet_pool_size", p.co_retweet_pool_size},
                     {"co_retweet_rate", p.co_retweet_rate},
                     {"fast_retweet_fraction", p.fast_retweet_fraction},
                     {"engagement_rate", p.engagement_rate}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Generation

/// Per-user split of `n` posts into originals / retweets / replies.
struct KindSplit {
  std::size_t originals;
  std::size_t retweets;
  std::size_t replies;
};

inline KindSplit split_posts(std::size_t n, double original_share, double retweet_share) {
  const auto o = std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n) * original_share + 0.5)));
  const auto r = std::min(n - o, static_cast<std::size_t>(std::floor(static_cast<double>(n) * retweet_share + 0.5)));
  return {o, r, n - o - r};
}

inline std::string actor_id(const std::string& state, Cohort cohort, std::size_t k) {
  return fmt::format("{}_{}_{:05d}", state, cohort == Cohort::IO ? "io" : "ctl", k);
}

struct Corpus {
  std::vector<Actor> actors;
  std::vector<Post> posts;
};

/// Deterministic function of the config (seed included).
///
/// Every user draws a post count from the activity distribution and splits
/// it by the kind mix. Originals carry fresh vocabulary tokens; all posts
/// carry hashtags and URLs drawn from the global pools. Organic retweets and
/// replies go to the global tweet pool / external accounts, except an
/// `in_scope_rate` share aimed at originals of the same cohort (another
/// state with probability `cross_state_rate`). Organic retweet latency is
/// log-normal. Planted colluders (the first IO users of each planted state)
/// send an `engagement_rate` share of their retweets and replies to partner
/// colluders' originals; of their remaining retweets a `co_retweet_rate`
/// share comes from a small dedicated pool, `fast_retweet_fraction` of
/// which land within [0, 10] s.
inline Corpus generate_corpus(const ScenarioConfig& config) {
  validate(config);
  Rng rng(config.seed);
  Corpus corpus;

  const std::size_t n_states = config.states.size();
  std::vector<std::string> names;
  for (const auto& s : config.states) names.push_back(text::fold_case(s.name));

  struct User {
    std::size_t actor;
    std::size_t state;
    Cohort cohort;
    int planted_side = -1;  // 0 or 1 for colluders
    KindSplit split{};
  };
  std::vector<User> users;
  const auto& planting = config.planting;
  const bool planted = planting && planting->n_colluders_per_state > 0;
  std::array<std::size_t, 2> planted_state{n_states, n_states};
  if (planted) {
    for (std::size_t s = 0; s < n_states; ++s) {
      if (names[s] == text::fold_case(planting->state_a)) planted_state[0] = s;
      if (names[s] == text::fold_case(planting->state_b)) planted_state[1] = s;
    }
  }
  for (std::size_t s = 0; s < n_states; ++s) {
    for (auto cohort : kCohorts) {
      const auto count = cohort == Cohort::IO ? config.states[s].io_users : config.states[s].control_users;
      for (std::size_t k = 0; k < count; ++k) {
        User u{corpus.actors.size(), s, cohort};
        if (planted && cohort == Cohort::IO && k < planting->n_colluders_per_state) {
          if (s == planted_state[0]) u.planted_side = 0;
          if (s == planted_state[1]) u.planted_side = 1;
        }
        corpus.actors.push_back(Actor{actor_id(names[s], cohort, k), names[s], cohort});
        users.push_back(u);
      }
    }
  }

  // Activity.
  const auto pmf = config.activity.pmf();
  std::vector<double> cdf(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), cdf.begin());
  auto draw_count = [&] {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    return config.activity.min + idx;
  };
  for (auto& u : users) u.split = split_posts(draw_count(), config.original_share, config.retweet_share);

  const auto window = static_cast<std::uint64_t>(config.window_seconds);
  auto draw_time = [&] { return config.start_epoch + static_cast<std::int64_t>(rng.below(window)); };
  std::vector<std::int64_t> pool_times(config.tweet_pool);
  for (auto& t : pool_times) t = draw_time();
  std::vector<std::int64_t> planted_times;
  if (planted) {
    planted_times.resize(planting->co_retweet_pool_size);
    for (auto& t : planted_times) t = draw_time();
  }

  std::size_t post_counter = 0;
  auto new_post = [&](const User& u, std::int64_t at) {
    Post p;
    p.post_id = fmt::format("p{:09d}", post_counter++);
    p.author_id = corpus.actors[u.actor].actor_id;
    p.created_at = at;
    for (std::size_t h = 0; h < config.hashtags_per_post; ++h)
      p.hashtags.push_back(fmt::format("h{}", rng.below(config.hashtag_pool)));
    for (std::size_t k = 0; k < config.urls_per_post; ++k)
      p.urls.push_back(fmt::format("https://d{}.example.net/{}", rng.below(config.url_pool), post_counter));
    return p;
  };
  auto draw_text = [&] {
    const auto n = config.tokens_min + rng.below(config.tokens_max - config.tokens_min + 1);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) out.push_back(' ');
      out += fmt::format("w{}", rng.below(config.vocabulary));
    }
    return out;
  };
  auto organic_latency = [&] {
    const double secs = config.latency_median_seconds * std::exp(config.latency_log_sigma * rng.normal());
    return static_cast<std::int64_t>(std::floor(std::min(secs, 1e9)));
  };

  // Originals, indexed by (state, cohort) and by planted side.
  std::vector<std::array<std::vector<std::size_t>, 2>> originals(n_states);
  std::array<std::vector<std::size_t>, 2> colluder_originals;
  for (const auto& u : users) {
    for (std::size_t k = 0; k < u.split.originals; ++k) {
      Post p = new_post(u, draw_time());
      p.text = draw_text();
      originals[u.state][static_cast<std::size_t>(u.cohort)].push_back(corpus.posts.size());
      if (u.planted_side >= 0) colluder_originals[u.planted_side].push_back(corpus.posts.size());
      corpus.posts.push_back(std::move(p));
    }
  }
  const std::size_t n_originals = corpus.posts.size();

  // Picks an in-scope original for an organic interaction, if any exists.
  auto pick_in_scope = [&](const User& u) -> std::optional<std::size_t> {
    std::size_t state = u.state;
    if (n_states > 1 && rng.chance(config.cross_state_rate)) {
      state = rng.below(n_states - 1);
      if (state >= u.state) ++state;
    }
    const auto& pool = originals[state][static_cast<std::size_t>(u.cohort)];
    if (pool.empty()) return std::nullopt;
    return pool[rng.below(pool.size())];
  };
  auto retweet_of_original = [&](const User& u, std::size_t src, std::int64_t latency) {
    const Post& s = corpus.posts[src];
    Post p = new_post(u, s.created_at + latency);
    p.kind = PostKind::Retweet;
    p.retweet_of = RetweetSource{s.post_id, s.author_id, s.created_at};
    p.text = s.text;
    return p;
  };
  auto retweet_of_pool = [&](const User& u, std::string id, std::string author, std::int64_t src_time,
                             std::int64_t latency) {
    Post p = new_post(u, src_time + latency);
    p.kind = PostKind::Retweet;
    p.retweet_of = RetweetSource{std::move(id), std::move(author), src_time};
    return p;
  };
  auto organic_retweet = [&](const User& u) {
    if (rng.chance(config.in_scope_rate)) {
      if (auto src = pick_in_scope(u)) return retweet_of_original(u, *src, organic_latency());
    }
    const auto g = rng.below(config.tweet_pool);
    return retweet_of_pool(u, fmt::format("g{}", g), fmt::format("ext{}", g % config.external_accounts),
                           pool_times[g], organic_latency());
  };
  auto reply_to = [&](const User& u, std::string target) {
    Post p = new_post(u, draw_time());
    p.kind = PostKind::Reply;
    p.reply_to_author = std::move(target);
    p.text = draw_text();
    return p;
  };
  auto organic_reply = [&](const User& u) {
    if (rng.chance(config.in_scope_rate)) {
      if (auto src = pick_in_scope(u)) return reply_to(u, corpus.posts[*src].author_id);
    }
    return reply_to(u, fmt::format("ext{}", rng.below(config.external_accounts)));
  };

  for (const auto& u : users) {
    const std::vector<std::size_t>* partner =
        u.planted_side >= 0 ? &colluder_originals[1 - u.planted_side] : nullptr;
    for (std::size_t k = 0; k < u.split.retweets; ++k) {
      if (!partner) {
        corpus.posts.push_back(organic_retweet(u));
        continue;
      }
      if (!partner->empty() && rng.chance(planting->engagement_rate)) {
        corpus.posts.push_back(retweet_of_original(u, (*partner)[rng.below(partner->size())], organic_latency()));
      } else if (rng.chance(planting->co_retweet_rate)) {
        const auto d = rng.below(planting->co_retweet_pool_size);
        const auto latency = rng.chance(planting->fast_retweet_fraction)
                                 ? static_cast<std::int64_t>(rng.below(11))
                                 : organic_latency();
        corpus.posts.push_back(retweet_of_pool(u, fmt::format("planted{}", d), "ext_planted", planted_times[d], latency));
      } else {
        corpus.posts.push_back(organic_retweet(u));
      }
    }
    for (std::size_t k = 0; k < u.split.replies; ++k) {
      if (partner && !partner->empty() && rng.chance(planting->engagement_rate)) {
        corpus.posts.push_back(reply_to(u, corpus.posts[(*partner)[rng.below(partner->size())]].author_id));
      } else {
        corpus.posts.push_back(organic_reply(u));
      }
    }
  }
  (void)n_originals;
  return corpus;
}

/// Writes `actors.csv` and `posts.jsonl` into `dir`.
inline void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream actors(dir / "actors.csv", std::ios::binary);
  std::ofstream posts(dir / "posts.jsonl", std::ios::binary);
  if (!actors || !posts) throw Error(ErrorCode::IoError, "cannot write into " + dir.string());
  write_actors(actors, corpus.actors);
  write_posts(posts, corpus.posts);
}

inline void generate(const ScenarioConfig& config, const std::filesystem::path& dir) {
  write_corpus(generate_corpus(config), dir);
}

// ---------------------------------------------------------------------------
// Analytic expectations

struct Expectation {
  double mean = 0.0;
  double stddev = 0.0;
};

struct ExpectedSummary {
  std::size_t actors = 0;
  Expectation posts, originals, retweets, replies;
  Expectation planted_co_retweets, planted_fast_retweets, planted_engagements;
};

/// Expected totals with standard deviations, computed from the config
/// alone. Colluder expectations assume the partner side has originals.
inline ExpectedSummary describe(const ScenarioConfig& config) {
  validate(config);
  const auto pmf = config.activity.pmf();
  auto moments = [&](auto f) {
    double m = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
      const double v = f(config.activity.min + i);
      m += pmf[i] * v;
      m2 += pmf[i] * v * v;
    }
    return std::pair{m, std::max(0.0, m2 - m * m)};
  };
  const auto split = [&](std::size_t n) { return split_posts(n, config.original_share, config.retweet_share); };
  const auto [posts_m, posts_v] = moments([](std::size_t n) { return static_cast<double>(n); });
  const auto [orig_m, orig_v] = moments([&](std::size_t n) { return static_cast<double>(split(n).originals); });
  const auto [rt_m, rt_v] = moments([&](std::size_t n) { return static_cast<double>(split(n).retweets); });
  const auto [rp_m, rp_v] = moments([&](std::size_t n) { return static_cast<double>(split(n).replies); });

  ExpectedSummary out;
  for (const auto& s : config.states) out.actors += s.io_users + s.control_users;
  const auto users = static_cast<double>(out.actors);
  out.posts = {users * posts_m, std::sqrt(users * posts_v)};
  out.originals = {users * orig_m, std::sqrt(users * orig_v)};
  out.retweets = {users * rt_m, std::sqrt(users * rt_v)};
  out.replies = {users * rp_m, std::sqrt(users * rp_v)};

  if (config.planting && config.planting->n_colluders_per_state > 0) {
    const auto& p = *config.planting;
    const double colluders = 2.0 * static_cast<double>(p.n_colluders_per_state);
    // Compound binomial: per-colluder count ~ Binomial(N, q) with N random.
    auto compound = [&](double mean_n, double var_n, double q) {
      return Expectation{colluders * mean_n * q, std::sqrt(colluders * (mean_n * q * (1.0 - q) + q * q * var_n))};
    };
    const double q_planted = (1.0 - p.engagement_rate) * p.co_retweet_rate;
    out.planted_co_retweets = compound(rt_m, rt_v, q_planted);
    out.planted_fast_retweets = compound(rt_m, rt_v, q_planted * p.fast_retweet_fraction);
    const auto [ia_m, ia_v] = moments([&](std::size_t n) {
      const auto s = split(n);
      return static_cast<double>(s.retweets + s.replies);
    });
    out.planted_engagements = compound(ia_m, ia_v, p.engagement_rate);
  }
  return out;
}

inline nlohmann::ordered_json to_json(const ExpectedSummary& s) {
  auto e = [](const Expectation& x) { return nlohmann::ordered_json{{"mean", x.mean}, {"stddev", x.stddev}}; };
  return {{"actors", s.actors},
          {"posts", e(s.posts)},
          {"originals", e(s.originals)},
          {"retweets", e(s.retweets)},
          {"replies", e(s.replies)},
          {"planted_co_retweets", e(s.planted_co_retweets)},
          {"planted_fast_retweets", e(s.planted_fast_retweets)},
          {"planted_engagements", e(s.planted_engagements)}};
}

}  // namespace coordnet::synth
