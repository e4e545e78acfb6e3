#pragma once

// Directed retweet/reply counts and per-user suspiciousness toward a
// counterpart state.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "coordnet/ingest.hpp"

namespace coordnet {

enum class InteractionKind : std::uint8_t { Retweet, Reply };

inline constexpr std::array<InteractionKind, 2> kInteractionKinds{InteractionKind::Retweet,
                                                                  InteractionKind::Reply};

inline std::string_view to_string(InteractionKind k) { return k == InteractionKind::Retweet ? "retweet" : "reply"; }

inline std::optional<InteractionKind> parse_interaction_kind(std::string_view s) {
  if (s == "retweet") return InteractionKind::Retweet;
  if (s == "reply") return InteractionKind::Reply;
  return std::nullopt;
}

/// Directed actor -> actor counts for one interaction kind. Only targets that
/// resolve to a known actor are counted; self-interactions are dropped.
struct InteractionCounts {
  InteractionKind kind = InteractionKind::Retweet;
  std::vector<std::map<ActorIndex, std::uint32_t>> out;  // indexed by source actor

  std::uint32_t count(ActorIndex src, ActorIndex dst) const {
    auto it = out[src].find(dst);
    return it == out[src].end() ? 0 : it->second;
  }
  std::uint64_t out_strength(ActorIndex src) const {
    std::uint64_t s = 0;
    for (const auto& [_, c] : out[src]) s += c;
    return s;
  }
};

inline InteractionCounts count_interactions(const Dataset& ds, InteractionKind kind) {
  InteractionCounts counts{kind, std::vector<std::map<ActorIndex, std::uint32_t>>(ds.actors().size())};
  for (ActorIndex src = 0; src < ds.actors().size(); ++src) {
    for (auto pi : ds.posts_of(src)) {
      const Post& p = ds.posts()[pi];
      const std::string* target = nullptr;
      if (kind == InteractionKind::Retweet && p.retweet_of) target = &p.retweet_of->author_id;
      if (kind == InteractionKind::Reply && p.reply_to_author) target = &*p.reply_to_author;
      if (!target) continue;
      auto dst = ds.find(*target);
      if (!dst || *dst == src) continue;
      ++counts.out[src][*dst];
    }
  }
  return counts;
}

inline void write_interaction_edges(std::ostream& out, const Dataset& ds, const InteractionCounts& counts) {
  out << "source,target,kind,count\n";
  for (ActorIndex src = 0; src < counts.out.size(); ++src) {
    for (const auto& [dst, c] : counts.out[src]) {
      out << detail::csv_field(ds.actors()[src].actor_id) << ',' << detail::csv_field(ds.actors()[dst].actor_id)
          << ',' << to_string(counts.kind) << ',' << c << '\n';
    }
  }
}

/// Number of ORIGINAL posts per state among actors of one cohort. Every
/// state in the dataset appears, possibly with 0.
inline std::map<std::string, std::uint64_t> original_post_counts(const Dataset& ds, Cohort cohort) {
  std::map<std::string, std::uint64_t> p;
  for (const auto& s : ds.states()) {
    std::uint64_t n = 0;
    for (auto a : ds.members(s, cohort))
      for (auto pi : ds.posts_of(a)) n += ds.posts()[pi].kind == PostKind::Original;
    p[s] = n;
  }
  return p;
}

struct SuspiciousnessScore {
  std::string actor_id;
  InteractionKind kind = InteractionKind::Retweet;
  std::string counterpart_state;
  std::uint64_t s_ic = 0;
  std::uint64_t s_i = 0;
  std::uint64_t p_c = 0;
  double score = 0.0;
};

/// (S_ic / S_i) * (S_ic / P_c).
inline double suspiciousness_score(std::uint64_t s_ic, std::uint64_t s_i, std::uint64_t p_c) {
  return (static_cast<double>(s_ic) / static_cast<double>(s_i)) *
         (static_cast<double>(s_ic) / static_cast<double>(p_c));
}

enum class InteractionMode : std::uint8_t { Pooled, Directional };

inline std::string_view to_string(InteractionMode m) { return m == InteractionMode::Pooled ? "pooled" : "directional"; }

/// Per-actor out-strength and out-counts per target state (same cohort only).
/// Built once per interaction kind and reused across state pairs.
class InteractionProfile {
 public:
  InteractionProfile(const Dataset& ds, const InteractionCounts& counts) : ds_(&ds), kind_(counts.kind) {
    const auto n = ds.actors().size();
    s_i_.resize(n);
    to_state_.resize(n);
    for (ActorIndex src = 0; src < n; ++src) {
      const auto& me = ds.actors()[src];
      for (const auto& [dst, c] : counts.out[src]) {
        s_i_[src] += c;
        const auto& them = ds.actors()[dst];
        if (them.cohort == me.cohort) to_state_[src][them.state] += c;
      }
    }
    for (auto cohort : kCohorts) p_[static_cast<std::size_t>(cohort)] = original_post_counts(ds, cohort);
  }

  InteractionKind kind() const { return kind_; }
  const Dataset& dataset() const { return *ds_; }
  std::uint64_t s_i(ActorIndex a) const { return s_i_[a]; }
  std::uint64_t s_ic(ActorIndex a, const std::string& state) const {
    auto it = to_state_[a].find(state);
    return it == to_state_[a].end() ? 0 : it->second;
  }
  std::uint64_t p_c(Cohort cohort, const std::string& state) const {
    const auto& m = p_[static_cast<std::size_t>(cohort)];
    auto it = m.find(state);
    return it == m.end() ? 0 : it->second;
  }

 private:
  const Dataset* ds_;
  InteractionKind kind_;
  std::vector<std::uint64_t> s_i_;
  std::vector<std::map<std::string, std::uint64_t>> to_state_;
  std::array<std::map<std::string, std::uint64_t>, 2> p_;
};

struct ScoreSample {
  std::vector<SuspiciousnessScore> scores;
  std::optional<std::string> skipped;  // reason when the pair cannot be scored

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(scores.size());
    for (const auto& s : scores) v.push_back(s.score);
    return v;
  }
};

namespace detail {

// Scores `source` users of `cohort` against `counterpart`. Users with S_i = 0
// have no defined score and are left out.
inline std::optional<std::string> score_direction(const InteractionProfile& prof, Cohort cohort,
                                                  const std::string& source, const std::string& counterpart,
                                                  std::vector<SuspiciousnessScore>& out) {
  const auto& ds = prof.dataset();
  const auto p_c = prof.p_c(cohort, counterpart);
  if (p_c == 0) return "P_C_ZERO:" + counterpart;
  std::size_t scored = 0;
  for (auto a : ds.members(source, cohort)) {
    const auto s_i = prof.s_i(a);
    if (s_i == 0) continue;
    const auto s_ic = prof.s_ic(a, counterpart);
    out.push_back(SuspiciousnessScore{ds.actors()[a].actor_id, prof.kind(), counterpart, s_ic, s_i, p_c,
                                      suspiciousness_score(s_ic, s_i, p_c)});
    ++scored;
  }
  if (scored == 0) return "NO_SCOREABLE_USERS:" + source;
  return std::nullopt;
}

}  // namespace detail

/// Suspiciousness sample for one state pair and cohort. Pooled mode scores
/// state_a users against state_b and state_b users against state_a;
/// directional mode scores state_a users only. On a skip, `skipped` carries
/// the reason and `scores` is empty.
inline ScoreSample suspiciousness(const InteractionProfile& prof, Cohort cohort, const std::string& state_a,
                                  const std::string& state_b, InteractionMode mode = InteractionMode::Pooled) {
  ScoreSample sample;
  if (auto why = detail::score_direction(prof, cohort, state_a, state_b, sample.scores)) {
    sample.scores.clear();
    sample.skipped = "PAIR_SKIPPED:" + *why;
    return sample;
  }
  if (mode == InteractionMode::Pooled) {
    if (auto why = detail::score_direction(prof, cohort, state_b, state_a, sample.scores)) {
      sample.scores.clear();
      sample.skipped = "PAIR_SKIPPED:" + *why;
    }
  }
  return sample;
}

inline ScoreSample suspiciousness(const Dataset& ds, InteractionKind kind, Cohort cohort, const std::string& state_a,
                                  const std::string& state_b, InteractionMode mode = InteractionMode::Pooled) {
  const auto counts = count_interactions(ds, kind);
  const InteractionProfile prof(ds, counts);
  return suspiciousness(prof, cohort, state_a, state_b, mode);
}

/// Every defined score: each actor with S_i > 0 against every other state of
/// its cohort with P_c > 0, ordered by (actor_id, counterpart_state).
inline std::vector<SuspiciousnessScore> all_scores(const InteractionProfile& prof) {
  std::vector<SuspiciousnessScore> out;
  const auto& ds = prof.dataset();
  for (ActorIndex a = 0; a < ds.actors().size(); ++a) {
    const auto& me = ds.actors()[a];
    const auto s_i = prof.s_i(a);
    if (s_i == 0) continue;
    for (const auto& c : ds.states()) {
      if (c == me.state) continue;
      const auto p_c = prof.p_c(me.cohort, c);
      if (p_c == 0) continue;
      const auto s_ic = prof.s_ic(a, c);
      out.push_back(SuspiciousnessScore{me.actor_id, prof.kind(), c, s_ic, s_i, p_c,
                                        suspiciousness_score(s_ic, s_i, p_c)});
    }
  }
  return out;
}

inline void write_scores(std::ostream& out, const std::vector<SuspiciousnessScore>& scores) {
  out << "actor_id,kind,counterpart_state,s_ic,s_i,p_c,score\n";
  for (const auto& s : scores) {
    out << detail::csv_field(s.actor_id) << ',' << to_string(s.kind) << ',' << detail::csv_field(s.counterpart_state)
        << ',' << s.s_ic << ',' << s.s_i << ',' << s.p_c << ',' << fmt::format("{:.12g}", s.score) << '\n';
  }
}

}  // namespace coordnet
