#pragma once

// Actor and post records, their file formats, and the validated in-memory
// dataset every other stage reads from.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "coordnet/error.hpp"
#include "coordnet/text.hpp"

namespace coordnet {

enum class Cohort : std::uint8_t { IO = 0, Control = 1 };

inline constexpr std::array<Cohort, 2> kCohorts{Cohort::IO, Cohort::Control};

inline std::string_view to_string(Cohort c) { return c == Cohort::IO ? "io" : "control"; }

inline std::optional<Cohort> parse_cohort(std::string_view s) {
  const auto folded = text::fold_case(s);
  if (folded == "io") return Cohort::IO;
  if (folded == "control") return Cohort::Control;
  return std::nullopt;
}

struct Actor {
  std::string actor_id;
  std::string state;
  Cohort cohort = Cohort::IO;

  friend bool operator==(const Actor&, const Actor&) = default;
};

enum class PostKind : std::uint8_t { Original, Retweet, Reply };

inline std::string_view to_string(PostKind k) {
  switch (k) {
    case PostKind::Original: return "original";
    case PostKind::Retweet: return "retweet";
    case PostKind::Reply: return "reply";
  }
  return "?";
}

struct RetweetSource {
  std::string post_id;
  std::string author_id;
  std::optional<std::int64_t> created_at;

  friend bool operator==(const RetweetSource&, const RetweetSource&) = default;
};

struct Post {
  std::string post_id;
  std::string author_id;
  std::int64_t created_at = 0;
  PostKind kind = PostKind::Original;
  std::string text;
  std::optional<RetweetSource> retweet_of;
  std::optional<std::string> reply_to_author;
  std::vector<std::string> urls;
  std::vector<std::string> hashtags;

  friend bool operator==(const Post&, const Post&) = default;
};

// ---------------------------------------------------------------------------
// Actors file

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one CSV line. Fields may be double-quoted with "" as an escaped quote.
inline std::optional<std::vector<std::string>> split_csv(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && trim(cur).empty()) {
      quoted = was_quoted = true;
      cur.clear();
    } else if (c == ',') {
      fields.emplace_back(was_quoted ? cur : std::string(trim(cur)));
      cur.clear();
      was_quoted = false;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.emplace_back(was_quoted ? cur : std::string(trim(cur)));
  return fields;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos && trim(s) == s) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return in;
}

}  // namespace detail

inline std::vector<Actor> parse_actors(std::istream& in) {
  std::vector<Actor> actors;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (detail::trim(view).empty()) continue;
    auto fields = detail::split_csv(view);
    if (!fields || fields->size() != 3) throw Error(ErrorCode::MalformedLine, line, line_no);
    if (!header_seen) {
      header_seen = true;
      if ((*fields)[0] == "actor_id" && (*fields)[1] == "state" && (*fields)[2] == "cohort") continue;
      throw Error(ErrorCode::MalformedLine, "expected header actor_id,state,cohort", line_no);
    }
    auto& f = *fields;
    if (f[0].empty() || f[1].empty()) throw Error(ErrorCode::MalformedLine, line, line_no);
    auto cohort = parse_cohort(f[2]);
    if (!cohort) throw Error(ErrorCode::UnknownCohort, f[2], line_no);
    if (!seen.emplace(f[0], actors.size()).second) throw Error(ErrorCode::DuplicateActor, f[0], line_no);
    actors.push_back(Actor{f[0], text::fold_case(f[1]), *cohort});
  }
  if (!header_seen) throw Error(ErrorCode::MalformedLine, "missing header", line_no + 1);
  return actors;
}

inline std::vector<Actor> parse_actors(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_actors(in);
}

inline void write_actors(std::ostream& out, const std::vector<Actor>& actors) {
  out << "actor_id,state,cohort\n";
  for (const auto& a : actors) {
    out << detail::csv_field(a.actor_id) << ',' << detail::csv_field(a.state) << ','
        << to_string(a.cohort) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Posts file: JSON Lines, one object per post.

inline std::string normalize_hashtag(std::string_view tag) {
  while (!tag.empty() && tag.front() == '#') tag.remove_prefix(1);
  return text::fold_case(detail::trim(tag));
}

namespace detail {

inline std::int64_t epoch_seconds(const nlohmann::json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) return static_cast<std::int64_t>(std::floor(v.get<double>()));
  throw std::invalid_argument("timestamp must be numeric");
}

inline std::vector<std::string> string_list(const nlohmann::json& v) {
  if (v.is_null()) return {};
  if (!v.is_array()) throw std::invalid_argument("expected a list");
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& item : v) out.push_back(item.get<std::string>());
  return out;
}

inline std::optional<std::string> optional_string(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace detail

/// Parses one posts-file record. `line_no` is used for diagnostics only.
inline Post parse_post_record(std::string_view line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::MalformedRecord, "invalid JSON", line_no);
  }
  if (!obj.is_object()) throw Error(ErrorCode::MalformedRecord, "record is not an object", line_no);

  Post p;
  try {
    for (const char* key : {"post_id", "author_id", "created_at", "text"}) {
      if (!obj.contains(key) || obj[key].is_null())
        throw Error(ErrorCode::MalformedRecord, std::string("missing ") + key, line_no);
    }
    p.post_id = obj["post_id"].get<std::string>();
    p.author_id = obj["author_id"].get<std::string>();
    p.created_at = detail::epoch_seconds(obj["created_at"]);
    p.text = obj["text"].get<std::string>();
    if (p.post_id.empty() || p.author_id.empty())
      throw Error(ErrorCode::MalformedRecord, "empty identifier", line_no);

    auto rt_post = detail::optional_string(obj, "retweet_of_post_id");
    auto rt_author = detail::optional_string(obj, "retweet_of_author_id");
    std::optional<std::int64_t> rt_created;
    if (auto it = obj.find("retweet_of_created_at"); it != obj.end() && !it->is_null())
      rt_created = detail::epoch_seconds(*it);
    if (rt_post.has_value() != rt_author.has_value())
      throw Error(ErrorCode::MalformedRecord,
                  "retweet_of_post_id and retweet_of_author_id must appear together", line_no);
    if (rt_created && !rt_post)
      throw Error(ErrorCode::MalformedRecord, "retweet_of_created_at without retweet_of_post_id", line_no);
    p.reply_to_author = detail::optional_string(obj, "reply_to_author");

    if (rt_post && p.reply_to_author) throw Error(ErrorCode::KindConflict, p.post_id, line_no);
    if (rt_post) {
      p.kind = PostKind::Retweet;
      p.retweet_of = RetweetSource{*rt_post, *rt_author, rt_created};
      if (rt_created && *rt_created > p.created_at) throw Error(ErrorCode::NegativeLatency, p.post_id, line_no);
    } else if (p.reply_to_author) {
      p.kind = PostKind::Reply;
    }

    if (auto it = obj.find("urls"); it != obj.end()) p.urls = detail::string_list(*it);
    if (auto it = obj.find("hashtags"); it != obj.end()) {
      for (const auto& tag : detail::string_list(*it)) {
        auto norm = normalize_hashtag(tag);
        if (!norm.empty()) p.hashtags.push_back(std::move(norm));
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what(), line_no);
  }
  return p;
}

inline std::vector<Post> parse_posts(std::istream& in) {
  std::vector<Post> posts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    posts.push_back(parse_post_record(line, line_no));
  }
  return posts;
}

inline std::vector<Post> parse_posts(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_posts(in);
}

inline nlohmann::ordered_json to_json(const Post& p) {
  nlohmann::ordered_json j;
  j["post_id"] = p.post_id;
  j["author_id"] = p.author_id;
  j["created_at"] = p.created_at;
  j["text"] = p.text;
  if (p.retweet_of) {
    j["retweet_of_post_id"] = p.retweet_of->post_id;
    j["retweet_of_author_id"] = p.retweet_of->author_id;
    if (p.retweet_of->created_at) j["retweet_of_created_at"] = *p.retweet_of->created_at;
  }
  if (p.reply_to_author) j["reply_to_author"] = *p.reply_to_author;
  if (!p.urls.empty()) j["urls"] = p.urls;
  if (!p.hashtags.empty()) j["hashtags"] = p.hashtags;
  return j;
}

inline void write_posts(std::ostream& out, const std::vector<Post>& posts) {
  for (const auto& p : posts) {
    out << to_json(p).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Dataset

struct ValidationReport {
  // state -> {io count, control count}
  std::map<std::string, std::array<std::size_t, 2>> counts;
  std::size_t total_actors = 0;
  std::size_t total_posts = 0;
  std::size_t dropped_posts = 0;           // author not in the actors file (lenient mode)
  std::size_t dangling_retweet_authors = 0;  // retweets whose source author is unknown
  std::size_t dangling_reply_authors = 0;    // replies to an unknown account
  std::set<std::string> unknown_authors;
  std::set<std::string> dangling_ids;

  std::size_t dangling_count() const { return dangling_retweet_authors + dangling_reply_authors; }
};

inline nlohmann::ordered_json to_json(const ValidationReport& r) {
  nlohmann::ordered_json j;
  j["total_actors"] = r.total_actors;
  j["total_posts"] = r.total_posts;
  auto& counts = j["counts"] = nlohmann::ordered_json::object();
  for (const auto& [state, c] : r.counts) counts[state] = {{"io", c[0]}, {"control", c[1]}};
  j["dropped_posts"] = r.dropped_posts;
  j["unknown_authors"] = r.unknown_authors;
  j["dangling_references"] = {
      {"retweet_authors", r.dangling_retweet_authors},
      {"reply_authors", r.dangling_reply_authors},
      {"ids", r.dangling_ids},
  };
  return j;
}

using ActorIndex = std::uint32_t;

/// Validated, indexed and immutable view over actors and posts.
class Dataset {
 public:
  Dataset() = default;

  const std::vector<Actor>& actors() const { return actors_; }
  const std::vector<Post>& posts() const { return posts_; }

  std::optional<ActorIndex> find(std::string_view actor_id) const {
    auto it = index_.find(std::string(actor_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const Actor* actor(std::string_view actor_id) const {
    auto idx = find(actor_id);
    return idx ? &actors_[*idx] : nullptr;
  }

  /// Sorted list of distinct state labels.
  const std::vector<std::string>& states() const { return states_; }

  /// Actor indices (ascending, hence sorted by actor_id) for one state and cohort.
  const std::vector<ActorIndex>& members(std::string_view state, Cohort cohort) const {
    static const std::vector<ActorIndex> empty;
    auto it = members_.find(std::string(state));
    if (it == members_.end()) return empty;
    return it->second[static_cast<std::size_t>(cohort)];
  }

  /// Post indices per author, in input order.
  const std::vector<std::uint32_t>& posts_of(ActorIndex actor) const { return posts_by_author_[actor]; }

  friend Dataset validate_dataset(std::vector<Actor> actors, std::vector<Post> posts, bool strict,
                                  ValidationReport* report);

 private:
  std::vector<Actor> actors_;
  std::vector<Post> posts_;
  std::unordered_map<std::string, ActorIndex> index_;
  std::vector<std::string> states_;
  std::map<std::string, std::array<std::vector<ActorIndex>, 2>, std::less<>> members_;
  std::vector<std::vector<std::uint32_t>> posts_by_author_;
};

/// Resolves references and builds indexes.
///
/// In strict mode a post whose author is not in the actor list raises
/// UNKNOWN_AUTHOR. In lenient mode such posts are dropped and reported.
/// Retweet sources and reply targets outside the actor list are always kept
/// and counted as dangling references.
inline Dataset validate_dataset(std::vector<Actor> actors, std::vector<Post> posts, bool strict = false,
                                ValidationReport* report = nullptr) {
  ValidationReport local;
  ValidationReport& rep = report ? *report : local;
  rep = ValidationReport{};

  Dataset ds;
  std::sort(actors.begin(), actors.end(),
            [](const Actor& a, const Actor& b) { return a.actor_id < b.actor_id; });
  for (std::size_t i = 0; i < actors.size(); ++i) {
    if (i > 0 && actors[i].actor_id == actors[i - 1].actor_id)
      throw Error(ErrorCode::DuplicateActor, actors[i].actor_id);
    if (actors[i].actor_id.empty() || actors[i].state.empty())
      throw Error(ErrorCode::MalformedLine, "actor with empty id or state");
  }
  ds.actors_ = std::move(actors);
  ds.index_.reserve(ds.actors_.size());
  for (std::size_t i = 0; i < ds.actors_.size(); ++i) {
    const auto& a = ds.actors_[i];
    ds.index_.emplace(a.actor_id, static_cast<ActorIndex>(i));
    ds.members_[a.state][static_cast<std::size_t>(a.cohort)].push_back(static_cast<ActorIndex>(i));
    ++rep.counts[a.state][static_cast<std::size_t>(a.cohort)];
  }
  for (const auto& [state, _] : ds.members_) ds.states_.push_back(state);
  rep.total_actors = ds.actors_.size();

  std::unordered_map<std::string_view, std::size_t> post_ids;
  post_ids.reserve(posts.size());
  ds.posts_.reserve(posts.size());
  ds.posts_by_author_.resize(ds.actors_.size());
  for (auto& p : posts) {
    auto author = ds.index_.find(p.author_id);
    if (author == ds.index_.end()) {
      if (strict) throw Error(ErrorCode::UnknownAuthor, p.author_id);
      ++rep.dropped_posts;
      rep.unknown_authors.insert(p.author_id);
      continue;
    }
    if ((p.kind == PostKind::Retweet) != p.retweet_of.has_value() ||
        (p.kind == PostKind::Reply) != p.reply_to_author.has_value())
      throw Error(ErrorCode::KindConflict, p.post_id);
    if (p.retweet_of && p.retweet_of->created_at && *p.retweet_of->created_at > p.created_at)
      throw Error(ErrorCode::NegativeLatency, p.post_id);
    if (p.retweet_of && !ds.index_.contains(p.retweet_of->author_id)) {
      ++rep.dangling_retweet_authors;
      rep.dangling_ids.insert(p.retweet_of->author_id);
    }
    if (p.reply_to_author && !ds.index_.contains(*p.reply_to_author)) {
      ++rep.dangling_reply_authors;
      rep.dangling_ids.insert(*p.reply_to_author);
    }
    ds.posts_by_author_[author->second].push_back(static_cast<std::uint32_t>(ds.posts_.size()));
    ds.posts_.push_back(std::move(p));
  }
  for (const auto& p : ds.posts_) {
    if (!post_ids.emplace(p.post_id, 0).second) throw Error(ErrorCode::DuplicatePost, p.post_id);
  }
  rep.total_posts = ds.posts_.size();
  return ds;
}

}  // namespace coordnet
