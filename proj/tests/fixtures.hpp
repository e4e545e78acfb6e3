#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coordnet/ingest.hpp"

namespace fx {

using namespace coordnet;

inline Post original(std::string id, std::string author, std::int64_t t, std::string text = "",
                     std::vector<std::string> urls = {}, std::vector<std::string> tags = {}) {
  Post p;
  p.post_id = std::move(id);
  p.author_id = std::move(author);
  p.created_at = t;
  p.text = std::move(text);
  p.urls = std::move(urls);
  p.hashtags = std::move(tags);
  return p;
}

inline Post retweet(std::string id, std::string author, std::int64_t t, std::string src, std::string src_author,
                    std::optional<std::int64_t> src_t = std::nullopt) {
  Post p = original(std::move(id), std::move(author), t);
  p.kind = PostKind::Retweet;
  p.retweet_of = RetweetSource{std::move(src), std::move(src_author), src_t};
  return p;
}

inline Post reply(std::string id, std::string author, std::int64_t t, std::string target) {
  Post p = original(std::move(id), std::move(author), t);
  p.kind = PostKind::Reply;
  p.reply_to_author = std::move(target);
  return p;
}

inline Actor io(std::string id, std::string state) { return {std::move(id), std::move(state), Cohort::IO}; }
inline Actor ctl(std::string id, std::string state) { return {std::move(id), std::move(state), Cohort::Control}; }

}  // namespace fx
