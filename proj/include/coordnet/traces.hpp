#pragma once

// Per-actor feature multisets for the five behavioral traces.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "coordnet/error.hpp"
#include "coordnet/ingest.hpp"
#include "coordnet/text.hpp"

namespace coordnet {

enum class TraceKind : std::uint8_t { CoRetweet, CoUrl, CoHashtag, FastRetweet, Text };

inline constexpr std::array<TraceKind, 5> kTraceKinds{TraceKind::CoRetweet, TraceKind::CoUrl,
                                                      TraceKind::CoHashtag, TraceKind::FastRetweet,
                                                      TraceKind::Text};

inline std::string_view to_string(TraceKind t) {
  switch (t) {
    case TraceKind::CoRetweet: return "co_retweet";
    case TraceKind::CoUrl: return "co_url";
    case TraceKind::CoHashtag: return "co_hashtag";
    case TraceKind::FastRetweet: return "fast_retweet";
    case TraceKind::Text: return "text";
  }
  return "?";
}

inline std::optional<TraceKind> parse_trace_kind(std::string_view s) {
  for (auto t : kTraceKinds)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

struct FeatureBag {
  std::string actor_id;
  TraceKind trace = TraceKind::CoRetweet;
  std::map<std::string, std::uint32_t> counts;

  friend bool operator==(const FeatureBag&, const FeatureBag&) = default;
};

/// Fast-retweet feature namespace. Tweet ids mirror co-retweet; account ids
/// key on the source author instead.
enum class FastRetweetDimension : std::uint8_t { TweetId, AccountId };

struct TraceOptions {
  std::int64_t fast_retweet_window_seconds = 10;
  std::size_t min_text_tokens = 4;
  FastRetweetDimension fast_retweet_dimension = FastRetweetDimension::TweetId;
  StopwordSet stopwords;
  // Exact-match URL rewrites applied before domain extraction (e.g. shorteners).
  std::unordered_map<std::string, std::string> url_expansions;
};

struct ExtractionReport {
  std::size_t retweets_missing_source_time = 0;
  std::size_t unparseable_urls = 0;
  std::size_t expanded_urls = 0;
  std::size_t short_text_posts = 0;  // originals below min_text_tokens
  std::size_t text_posts_used = 0;
};

inline nlohmann::ordered_json to_json(const ExtractionReport& r) {
  return {
      {"fast_retweet", {{"skipped_missing_source_time", r.retweets_missing_source_time}}},
      {"co_url", {{"unparseable", r.unparseable_urls}, {"expanded", r.expanded_urls}}},
      {"text", {{"excluded_short", r.short_text_posts}, {"used", r.text_posts_used}}},
  };
}

// Built-in English stopword list. Replaced wholesale by a user stopword file.
inline StopwordSet default_stopwords() {
  static const char* const words[] = {
      "a", "about", "after", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be",
      "because", "been", "before", "being", "but", "by", "can", "could", "did", "do", "does",
      "for", "from", "had", "has", "have", "he", "her", "him", "his", "how", "i", "if", "in",
      "into", "is", "it", "its", "just", "me", "more", "my", "no", "not", "of", "on", "or",
      "our", "out", "over", "rt", "she", "so", "some", "than", "that", "the", "their", "them",
      "then", "there", "these", "they", "this", "to", "up", "us", "was", "we", "were", "what",
      "when", "which", "who", "will", "with", "would", "you", "your"};
  StopwordSet s;
  for (const char* w : words) s.emplace(w);
  return s;
}

inline StopwordSet load_stopwords(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  StopwordSet s;
  std::string line;
  while (std::getline(in, line)) {
    auto w = detail::trim(line);
    if (!w.empty()) s.insert(text::fold_case(w));
  }
  return s;
}

/// Reads `short_url,expanded_url` lines; a header row is optional.
inline std::unordered_map<std::string, std::string> load_url_expansions(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::unordered_map<std::string, std::string> map;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv(line);
    if (!fields || fields->size() != 2) throw Error(ErrorCode::MalformedLine, line, line_no);
    if (line_no == 1 && (*fields)[0] == "short_url") continue;
    map[(*fields)[0]] = (*fields)[1];
  }
  return map;
}

/// Host of a scheme-prefixed URL, lowercased, with one leading "www." removed.
inline std::optional<std::string> url_domain(std::string_view url) {
  url = detail::trim(url);
  const auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return std::nullopt;
  for (std::size_t i = 0; i < sep; ++i) {
    const char c = url[i];
    const bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    const bool ok = alpha || (i > 0 && ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.'));
    if (!ok) return std::nullopt;
  }
  auto authority = url.substr(sep + 3);
  authority = authority.substr(0, authority.find_first_of("/?#"));
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  if (!authority.empty() && authority.front() != '[') {
    if (auto colon = authority.rfind(':'); colon != std::string_view::npos) authority = authority.substr(0, colon);
  }
  if (authority.empty()) return std::nullopt;
  std::string host;
  host.reserve(authority.size());
  for (char c : authority) {
    const auto u = static_cast<unsigned char>(c);
    if (u <= 0x20 || c == '\\' || c == '"' || c == '<' || c == '>') return std::nullopt;
    host.push_back(static_cast<char>((c >= 'A' && c <= 'Z') ? c + 32 : c));
  }
  if (host.starts_with("www.")) host.erase(0, 4);
  if (host.empty() || host.front() == '.') return std::nullopt;
  return host;
}

namespace detail {

template <typename PerPost>
std::vector<FeatureBag> collect_bags(const Dataset& ds, TraceKind trace, PerPost&& per_post) {
  std::vector<FeatureBag> bags;
  const auto& actors = ds.actors();
  for (ActorIndex a = 0; a < actors.size(); ++a) {
    FeatureBag bag{actors[a].actor_id, trace, {}};
    for (auto pi : ds.posts_of(a)) per_post(ds.posts()[pi], bag.counts);
    if (!bag.counts.empty()) bags.push_back(std::move(bag));
  }
  return bags;
}

}  // namespace detail

inline std::vector<FeatureBag> extract_co_retweet(const Dataset& ds) {
  return detail::collect_bags(ds, TraceKind::CoRetweet, [](const Post& p, auto& counts) {
    if (p.retweet_of) ++counts[p.retweet_of->post_id];
  });
}

inline std::vector<FeatureBag> extract_fast_retweet(const Dataset& ds, const TraceOptions& opts = {},
                                                    ExtractionReport* report = nullptr) {
  return detail::collect_bags(ds, TraceKind::FastRetweet, [&](const Post& p, auto& counts) {
    if (!p.retweet_of) return;
    if (!p.retweet_of->created_at) {
      if (report) ++report->retweets_missing_source_time;
      return;
    }
    const auto latency = p.created_at - *p.retweet_of->created_at;
    if (latency < 0 || latency > opts.fast_retweet_window_seconds) return;
    const auto& key = opts.fast_retweet_dimension == FastRetweetDimension::TweetId
                          ? p.retweet_of->post_id
                          : p.retweet_of->author_id;
    ++counts[key];
  });
}

inline std::vector<FeatureBag> extract_co_url(const Dataset& ds, const TraceOptions& opts = {},
                                              ExtractionReport* report = nullptr) {
  return detail::collect_bags(ds, TraceKind::CoUrl, [&](const Post& p, auto& counts) {
    for (const auto& raw : p.urls) {
      const std::string* url = &raw;
      if (auto it = opts.url_expansions.find(raw); it != opts.url_expansions.end()) {
        url = &it->second;
        if (report) ++report->expanded_urls;
      }
      if (auto domain = url_domain(*url)) {
        ++counts[*domain];
      } else if (report) {
        ++report->unparseable_urls;
      }
    }
  });
}

inline std::vector<FeatureBag> extract_co_hashtag(const Dataset& ds) {
  return detail::collect_bags(ds, TraceKind::CoHashtag, [](const Post& p, auto& counts) {
    for (const auto& h : p.hashtags) ++counts[h];
  });
}

/// Unigram counts over original posts that keep at least `min_text_tokens`
/// tokens after preprocessing.
inline std::vector<FeatureBag> extract_text(const Dataset& ds, const TraceOptions& opts = {},
                                            ExtractionReport* report = nullptr) {
  return detail::collect_bags(ds, TraceKind::Text, [&](const Post& p, auto& counts) {
    if (p.kind != PostKind::Original) return;
    auto tokens = preprocess_text(p.text, opts.stopwords);
    if (tokens.size() < opts.min_text_tokens) {
      if (report) ++report->short_text_posts;
      return;
    }
    if (report) ++report->text_posts_used;
    for (auto& t : tokens) ++counts[std::move(t)];
  });
}

inline std::vector<FeatureBag> extract_trace(const Dataset& ds, TraceKind trace, const TraceOptions& opts = {},
                                             ExtractionReport* report = nullptr) {
  switch (trace) {
    case TraceKind::CoRetweet: return extract_co_retweet(ds);
    case TraceKind::CoUrl: return extract_co_url(ds, opts, report);
    case TraceKind::CoHashtag: return extract_co_hashtag(ds);
    case TraceKind::FastRetweet: return extract_fast_retweet(ds, opts, report);
    case TraceKind::Text: return extract_text(ds, opts, report);
  }
  return {};
}

}  // namespace coordnet
