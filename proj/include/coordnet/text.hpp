#pragma once

// UTF-8 handling, case folding and the text normalization pipeline used by
// the text-similarity trace.

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace coordnet {

using StopwordSet = std::unordered_set<std::string>;

namespace text {

inline constexpr char32_t kReplacement = 0xFFFD;

inline std::u32string decode_utf8(std::string_view in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  const auto n = in.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(in[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + len > n) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(in[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

// Simple one-to-one lowercase mapping for the bicameral scripts that show up
// in the target corpora: Latin (Basic, Latin-1, Extended-A), Greek, Cyrillic,
// Armenian and fullwidth Latin. Every output is a fixed point.
inline char32_t fold_case(char32_t c) {
  if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 32 : c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if (c >= 0x100 && c <= 0x17F) {
    if (c == 0x130) return U'i';
    if (c == 0x131 || c == 0x138 || c == 0x149 || c == 0x17F) return c;
    if (c == 0x178) return 0xFF;
    if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c & 1) ? c + 1 : c;
    return (c & 1) ? c : c + 1;
  }
  if (c >= 0x370 && c <= 0x3FF) {
    if (c >= 0x391 && c <= 0x3AB && c != 0x3A2) return c + 32;
    if (c == 0x386) return 0x3AC;
    if (c >= 0x388 && c <= 0x38A) return c + 37;
    if (c == 0x38C) return 0x3CC;
    if (c == 0x38E || c == 0x38F) return c + 63;
    if (c == 0x3C2) return 0x3C3;
    return c;
  }
  if (c >= 0x400 && c <= 0x52F) {
    if (c <= 0x40F) return c + 80;
    if (c <= 0x42F) return c + 32;
    if (c <= 0x45F) return c;
    if (c == 0x4C0) return 0x4CF;
    if (c >= 0x4C1 && c <= 0x4CE) return (c & 1) ? c + 1 : c;
    if ((c >= 0x460 && c <= 0x481) || (c >= 0x48A && c <= 0x4BF) || (c >= 0x4D0 && c <= 0x52F))
      return (c & 1) ? c : c + 1;
    return c;
  }
  if (c >= 0x531 && c <= 0x556) return c + 48;
  if (c >= 0xFF21 && c <= 0xFF3A) return c + 32;
  return c;
}

inline std::string fold_case(std::string_view s) {
  auto cps = decode_utf8(s);
  for (auto& c : cps) c = fold_case(c);
  return encode_utf8(cps);
}

// Emoji, pictographs and other-symbol code points. These are deleted outright.
// Frozen list; see docs/text_normalization.md.
inline bool is_emoji_or_symbol(char32_t c) {
  if (c < 0xA9) return false;
  switch (c) {
    case 0x00A9: case 0x00AE: case 0x203C: case 0x2049: case 0x200D: case 0x20E3:
    case 0x3030: case 0x303D: case 0x3297: case 0x3299: case kReplacement:
      return true;
    default:
      break;
  }
  return (c >= 0x20A0 && c <= 0x20CF)      // currency symbols
         || (c >= 0x2100 && c <= 0x214F)   // letterlike symbols
         || (c >= 0x2190 && c <= 0x21FF)   // arrows
         || (c >= 0x2300 && c <= 0x23FF)   // miscellaneous technical
         || (c >= 0x2460 && c <= 0x24FF)   // enclosed alphanumerics
         || (c >= 0x2500 && c <= 0x27BF)   // box drawing .. dingbats
         || (c >= 0x2900 && c <= 0x297F)   // supplemental arrows-B
         || (c >= 0x2B00 && c <= 0x2BFF)   // miscellaneous symbols and arrows
         || (c >= 0xFE00 && c <= 0xFE0F)   // variation selectors
         || (c >= 0x1F000 && c <= 0x1FBFF) // mahjong .. legacy computing
         || (c >= 0xE0000 && c <= 0xE007F);  // tags
}

inline bool is_space(char32_t c) {
  return c == ' ' || (c >= 0x09 && c <= 0x0D) || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

// Punctuation and separators that are replaced by a space.
inline bool is_punctuation(char32_t c) {
  if (c < 0x80) {
    if (c < 0x20 || c == 0x7F) return true;
    return !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'));
  }
  if (c <= 0xBF) return true;
  if (c == 0xD7 || c == 0xF7) return true;
  switch (c) {
    case 0x037E: case 0x0387: case 0x0589: case 0x058A: case 0x05BE: case 0x05C0:
    case 0x05C3: case 0x05C6: case 0x05F3: case 0x05F4: case 0x061B: case 0x061E:
    case 0x061F: case 0x06D4: case 0x0964: case 0x0965: case 0x0E4F: case 0x0E5A:
    case 0x0E5B:
      return true;
    default:
      break;
  }
  return (c >= 0x055A && c <= 0x055F) || (c >= 0x0609 && c <= 0x060D) ||
         (c >= 0x066A && c <= 0x066D) || (c >= 0x2000 && c <= 0x206F) ||
         (c >= 0x2200 && c <= 0x22FF) || (c >= 0x3000 && c <= 0x303F && (c < 0x3005 || c > 0x3007)) ||
         (c >= 0xFE10 && c <= 0xFE1F) || (c >= 0xFE30 && c <= 0xFE6F) ||
         (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
         (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

// Characters that continue a @mention or #hashtag; handles and tags may contain '_'.
inline bool is_word_char(char32_t c) {
  return c == '_' || (!is_space(c) && !is_punctuation(c) && !is_emoji_or_symbol(c));
}

namespace detail {

inline bool is_scheme_char(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
}

// Removes every `scheme://...` run up to the next whitespace. Input is case-folded.
inline std::u32string strip_urls(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    if (i + 2 < in.size() && in[i] == ':' && in[i + 1] == '/' && in[i + 2] == '/') {
      // Walk back over the scheme already copied to `out`.
      std::size_t start = out.size();
      while (start > 0 && is_scheme_char(out[start - 1])) --start;
      while (start < out.size() && !(out[start] >= 'a' && out[start] <= 'z')) ++start;
      if (start < out.size()) {
        out.resize(start);
        while (i < in.size() && !is_space(in[i])) ++i;
        continue;
      }
    }
    out.push_back(in[i++]);
  }
  return out;
}

inline std::u32string strip_tagged_tokens(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const char32_t c = in[i];
    if ((c == '@' || c == '#') && i + 1 < in.size() && is_word_char(in[i + 1])) {
      ++i;
      while (i < in.size() && is_word_char(in[i])) ++i;
      continue;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

}  // namespace detail

/// Normalizes a post body into unigram tokens.
///
/// Steps, in order: case-fold, delete scheme-prefixed URLs, delete @mentions
/// and #hashtags, delete emoji/symbol code points, turn remaining punctuation
/// into spaces, split on whitespace and drop stopwords. Stopwords are expected
/// to be case-folded already.
inline std::vector<std::string> preprocess_text(std::string_view body, const StopwordSet& stopwords) {
  auto cps = decode_utf8(body);
  for (auto& c : cps) c = fold_case(c);
  cps = detail::strip_urls(cps);
  cps = detail::strip_tagged_tokens(cps);

  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      if (!stopwords.contains(current)) tokens.push_back(current);
      current.clear();
    }
  };
  for (char32_t c : cps) {
    if (is_emoji_or_symbol(c)) continue;
    if (is_space(c) || is_punctuation(c)) {
      flush();
    } else {
      append_utf8(current, c);
    }
  }
  flush();
  return tokens;
}

}  // namespace text

using text::preprocess_text;

}  // namespace coordnet
