#pragma once

// Run configuration, config digest and the on-disk layout shared by the
// `build`, `test` and `report` commands.

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "coordnet/aggregate.hpp"
#include "coordnet/error.hpp"
#include "coordnet/experiments.hpp"
#include "coordnet/ingest.hpp"
#include "coordnet/interactions.hpp"
#include "coordnet/parallel.hpp"
#include "coordnet/similarity.hpp"
#include "coordnet/stats.hpp"
#include "coordnet/traces.hpp"

namespace coordnet {

namespace fs = std::filesystem;

struct RunConfig {
  fs::path actors;
  fs::path posts;
  std::optional<fs::path> stopwords;  // built-in English list when absent
  std::optional<fs::path> url_map;
  AnalysisOptions analysis;
  fs::path out = "coordnet_out";
  unsigned threads = default_threads();
  bool strict = false;
};

// ---------------------------------------------------------------------------
// Config file

namespace detail {

inline fs::path resolve_path(const std::string& p, const fs::path& base) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
T config_value(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string(key) + ": wrong type");
  }
}

}  // namespace detail

/// Applies the keys of a JSON run config on top of `cfg`. Relative paths are
/// taken relative to `base` (the config file's directory).
inline void apply_config(RunConfig& cfg, const nlohmann::json& j, const fs::path& base = {}) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be an object");
  static const std::array<const char*, 15> known{
      "actors",          "posts",           "stopwords",        "url_map",          "layers",
      "fast_retweet_window_seconds",       "min_text_tokens",  "fast_retweet_dimension", "alpha",
      "interaction_mode", "exact_test_cap", "posting_list_cap", "out",              "threads",
      "strict"};
  for (const auto& [k, _] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* s) { return k == s; }) == known.end())
      throw Error(ErrorCode::InvalidConfig, k + ": unknown key");
  }
  auto& a = cfg.analysis;
  using detail::config_value;
  if (j.contains("actors")) cfg.actors = detail::resolve_path(config_value<std::string>(j, "actors"), base);
  if (j.contains("posts")) cfg.posts = detail::resolve_path(config_value<std::string>(j, "posts"), base);
  if (j.contains("stopwords")) cfg.stopwords = detail::resolve_path(config_value<std::string>(j, "stopwords"), base);
  if (j.contains("url_map")) cfg.url_map = detail::resolve_path(config_value<std::string>(j, "url_map"), base);
  if (j.contains("out")) cfg.out = detail::resolve_path(config_value<std::string>(j, "out"), base);
  if (j.contains("layers")) {
    a.layers.clear();
    for (const auto& name : config_value<std::vector<std::string>>(j, "layers")) {
      auto layer = parse_layer(name);
      if (!layer) throw Error(ErrorCode::InvalidConfig, "layers: unknown layer '" + name + "'");
      if (!a.enabled(*layer)) a.layers.push_back(*layer);
    }
    if (a.layers.empty()) throw Error(ErrorCode::InvalidConfig, "layers: at least one layer is required");
  }
  if (j.contains("fast_retweet_window_seconds")) {
    a.trace.fast_retweet_window_seconds = config_value<std::int64_t>(j, "fast_retweet_window_seconds");
    if (a.trace.fast_retweet_window_seconds < 0)
      throw Error(ErrorCode::InvalidConfig, "fast_retweet_window_seconds: must be >= 0");
  }
  if (j.contains("min_text_tokens")) a.trace.min_text_tokens = config_value<std::size_t>(j, "min_text_tokens");
  if (j.contains("fast_retweet_dimension")) {
    const auto d = config_value<std::string>(j, "fast_retweet_dimension");
    if (d == "tweet_id") a.trace.fast_retweet_dimension = FastRetweetDimension::TweetId;
    else if (d == "account_id") a.trace.fast_retweet_dimension = FastRetweetDimension::AccountId;
    else throw Error(ErrorCode::InvalidConfig, "fast_retweet_dimension: expected tweet_id or account_id");
  }
  if (j.contains("alpha")) {
    a.alpha = config_value<double>(j, "alpha");
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha: must be in (0, 1)");
  }
  if (j.contains("interaction_mode")) {
    const auto m = config_value<std::string>(j, "interaction_mode");
    if (m == "pooled") a.interaction_mode = InteractionMode::Pooled;
    else if (m == "directional") a.interaction_mode = InteractionMode::Directional;
    else throw Error(ErrorCode::InvalidConfig, "interaction_mode: expected pooled or directional");
  }
  if (j.contains("exact_test_cap")) {
    a.test.exact_cap = config_value<double>(j, "exact_test_cap");
    if (!(a.test.exact_cap >= 0.0)) throw Error(ErrorCode::InvalidConfig, "exact_test_cap: must be >= 0");
  }
  if (j.contains("posting_list_cap")) a.join.posting_list_cap = config_value<std::size_t>(j, "posting_list_cap");
  if (j.contains("threads")) {
    cfg.threads = config_value<unsigned>(j, "threads");
    if (cfg.threads == 0) throw Error(ErrorCode::InvalidConfig, "threads: must be >= 1");
  }
  if (j.contains("strict")) cfg.strict = config_value<bool>(j, "strict");
}

inline void load_config_file(RunConfig& cfg, const fs::path& path) {
  auto in = detail::open_input(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  apply_config(cfg, j, path.parent_path());
}

/// Resolved analysis parameters. Paths, output directory and thread count
/// are left out; inputs enter the digest through their content hashes.
inline nlohmann::ordered_json parameters_json(const RunConfig& cfg) {
  const auto& a = cfg.analysis;
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  for (const auto& l : a.layers) layers.push_back(std::string(l.name()));
  return {
      {"layers", layers},
      {"fast_retweet_window_seconds", a.trace.fast_retweet_window_seconds},
      {"fast_retweet_dimension",
       a.trace.fast_retweet_dimension == FastRetweetDimension::TweetId ? "tweet_id" : "account_id"},
      {"min_text_tokens", a.trace.min_text_tokens},
      {"alpha", a.alpha},
      {"alternative", "greater"},
      {"candidate_rule", "effect > 0.5"},
      {"correction", "bonferroni"},
      {"interaction_mode", to_string(a.interaction_mode)},
      {"exact_test_cap", a.test.exact_cap},
      {"posting_list_cap", a.join.posting_list_cap},
      {"strict", cfg.strict},
  };
}

// ---------------------------------------------------------------------------
// Digest

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw Error(ErrorCode::IoError, "sha256 init");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data) { EVP_DigestUpdate(ctx_, data.data(), data.size()); }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

inline std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

inline std::string file_sha256(const fs::path& path) {
  auto in = detail::open_input(path);
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
  }
  return h.hex();
}

/// Parameters plus input content hashes; the digest of its compact dump
/// identifies a run.
inline nlohmann::ordered_json resolved_config(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["parameters"] = parameters_json(cfg);
  auto& inputs = j["inputs"];
  inputs["actors_sha256"] = file_sha256(cfg.actors);
  inputs["posts_sha256"] = file_sha256(cfg.posts);
  inputs["stopwords_sha256"] = cfg.stopwords ? file_sha256(*cfg.stopwords) : "builtin";
  inputs["url_map_sha256"] = cfg.url_map ? file_sha256(*cfg.url_map) : "none";
  return j;
}

inline std::string config_digest(const nlohmann::ordered_json& resolved) { return sha256_hex(resolved.dump()); }

// ---------------------------------------------------------------------------
// Stages

struct Inputs {
  Dataset dataset;
  ValidationReport validation;
};

inline Inputs load_inputs(RunConfig& cfg) {
  Inputs in;
  in.dataset = validate_dataset(parse_actors(cfg.actors), parse_posts(cfg.posts), cfg.strict, &in.validation);
  cfg.analysis.trace.stopwords = cfg.stopwords ? load_stopwords(*cfg.stopwords) : default_stopwords();
  if (cfg.url_map) cfg.analysis.trace.url_expansions = load_url_expansions(*cfg.url_map);
  cfg.analysis.join.threads = cfg.threads;
  return in;
}

/// build_networks with the failing layer named in the error.
inline Networks build_layers(const Dataset& ds, const AnalysisOptions& opts) {
  Networks net;
  for (const auto& layer : opts.layers) {
    AnalysisOptions one = opts;
    one.layers = {layer};
    try {
      auto part = build_networks(ds, one);
      for (auto& [k, v] : part.bags) net.bags[k] = std::move(v);
      for (auto& [k, v] : part.edges) net.edges[k] = std::move(v);
      for (auto& [k, v] : part.joins) net.joins[k] = std::move(v);
      for (auto& [k, v] : part.interactions) net.interactions[k] = std::move(v);
      auto& x = net.extraction;
      const auto& y = part.extraction;
      x.retweets_missing_source_time += y.retweets_missing_source_time;
      x.unparseable_urls += y.unparseable_urls;
      x.expanded_urls += y.expanded_urls;
      x.short_text_posts += y.short_text_posts;
      x.text_posts_used += y.text_posts_used;
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("layer {}: {}", layer.name(), e.subject()), e.line());
    }
  }
  return net;
}

// ---------------------------------------------------------------------------
// Output tree

namespace detail {

inline std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

inline void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

inline std::string digest_line(const std::string& digest) { return "# config_digest=" + digest + "\n"; }

}  // namespace detail

/// Writes every build artifact for the enabled layers into `cfg.out`.
inline void write_build(const RunConfig& cfg, const Inputs& in, const Networks& net,
                        const nlohmann::ordered_json& resolved, const std::string& digest) {
  const auto& ds = in.dataset;
  const auto& dir = cfg.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string());

  {
    auto j = resolved;
    j["config_digest"] = digest;
    detail::write_json(dir / "config.json", j);
  }
  {
    nlohmann::ordered_json j = to_json(in.validation);
    j["config_digest"] = digest;
    detail::write_json(dir / "validation.json", j);
  }
  {
    nlohmann::ordered_json j = to_json(net.extraction);
    auto& joins = j["joins"] = nlohmann::ordered_json::object();
    for (const auto& [t, r] : net.joins) joins[std::string(to_string(t))] = to_json(r);
    j["config_digest"] = digest;
    detail::write_json(dir / "extraction.json", j);
  }

  for (const auto& [t, edges] : net.edges) {
    auto out = detail::open_output(dir / fmt::format("edges_{}.csv", to_string(t)));
    out << detail::digest_line(digest);
    write_edge_list(out, edges);
  }
  for (const auto& [k, counts] : net.interactions) {
    {
      auto out = detail::open_output(dir / fmt::format("interactions_{}.csv", to_string(k)));
      out << detail::digest_line(digest);
      write_interaction_edges(out, ds, counts);
    }
    const InteractionProfile prof(ds, counts);
    auto out = detail::open_output(dir / fmt::format("scores_{}.csv", to_string(k)));
    out << detail::digest_line(digest);
    write_scores(out, all_scores(prof));
  }

  for (auto cohort : kCohorts) {
    std::vector<std::pair<std::string, std::vector<AggregateEdge>>> layers;
    for (const auto& layer : cfg.analysis.layers) {
      if (layer.is_trace) {
        auto it = net.bags.find(layer.trace);
        if (it != net.bags.end())
          layers.emplace_back(std::string(layer.name()), aggregate_similarity(it->second, ds, cohort, layer.trace));
      } else {
        auto it = net.interactions.find(layer.interaction);
        if (it != net.interactions.end())
          layers.emplace_back(std::string(layer.name()), aggregate_interactions(it->second, ds, cohort));
      }
    }
    std::sort(layers.begin(), layers.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<AggregateEdge> all;
    for (const auto& [_, edges] : layers) all.insert(all.end(), edges.begin(), edges.end());
    {
      auto out = detail::open_output(dir / fmt::format("aggregate_{}.csv", to_string(cohort)));
      out << detail::digest_line(digest);
      write_aggregate_csv(out, all);
    }
    for (const auto& [name, edges] : layers) {
      const bool directed = !parse_layer(name)->is_trace;
      auto out = detail::open_output(dir / fmt::format("aggregate_{}_{}.dot", to_string(cohort), name));
      out << "// config_digest=" << digest << '\n';
      write_dot(out, edges, name, directed, ds.states());
    }
  }
}

// ---------------------------------------------------------------------------
// Test results and summary

/// One row of results.csv, enough to print the summary.
struct ResultRow {
  std::string layer;
  std::string state_a;
  std::string state_b;
  std::size_t n_io = 0;
  std::size_t n_control = 0;
  double effect = 0.0;
  double p = 1.0;
  std::string method;
  bool candidate = false;
  bool significant = false;
};

inline ResultRow to_row(const PairTestResult& r) {
  return {r.layer,     r.state_a,   r.state_b,     r.test.n_io,
          r.test.n_control, r.test.effect, r.test.p_one_sided, std::string(to_string(r.test.method)),
          r.candidate, r.significant};
}

inline nlohmann::ordered_json summary_json(const ExperimentRun& run, const RunConfig& cfg, const std::string& digest) {
  nlohmann::ordered_json j;
  j["config_digest"] = digest;
  j["config"] = parameters_json(cfg);
  const std::size_t m = run.results.size();
  j["totals"] = {{"experiments", m},
                 {"candidates", run.candidates()},
                 {"significant", run.significant()},
                 {"skipped", run.skipped.size()},
                 {"bonferroni_m", m},
                 {"bonferroni_threshold", m == 0 ? cfg.analysis.alpha : cfg.analysis.alpha / static_cast<double>(m)}};
  auto& skipped = j["skipped"] = nlohmann::ordered_json::array();
  for (const auto& s : run.skipped)
    skipped.push_back({{"layer", s.layer}, {"state_a", s.state_a}, {"state_b", s.state_b}, {"reason", s.reason}});
  return j;
}

inline void write_test(const RunConfig& cfg, const ExperimentRun& run, const std::string& digest) {
  {
    auto out = detail::open_output(cfg.out / "results.csv");
    out << detail::digest_line(digest);
    write_results_csv(out, run.results);
  }
  detail::write_json(cfg.out / "summary.json", summary_json(run, cfg, digest));
}

/// Candidates per layer with p-values, then skips and the significance verdict.
inline void print_summary(std::ostream& out, const std::vector<ResultRow>& rows, const nlohmann::json& summary) {
  const auto& totals = summary.at("totals");
  const auto& config = summary.at("config");
  out << "config_digest " << summary.at("config_digest").get<std::string>() << '\n';
  out << fmt::format("alpha {}  window {} s  min tokens {}  mode {}\n", config.at("alpha").get<double>(),
                     config.at("fast_retweet_window_seconds").get<long long>(),
                     config.at("min_text_tokens").get<std::size_t>(), config.at("interaction_mode").get<std::string>());
  out << fmt::format("experiments {}  candidates {}  significant {}  skipped {}  threshold {:.4e}\n",
                     totals.at("experiments").get<std::size_t>(), totals.at("candidates").get<std::size_t>(),
                     totals.at("significant").get<std::size_t>(), totals.at("skipped").get<std::size_t>(),
                     totals.at("bonferroni_threshold").get<double>());

  std::map<std::string, std::vector<const ResultRow*>> by_layer;
  for (const auto& r : rows)
    if (r.candidate) by_layer[r.layer].push_back(&r);
  for (const auto& [layer, list] : by_layer) {
    out << '\n' << layer << '\n';
    for (const auto* r : list) {
      out << fmt::format("  {:<28} n={}/{}  effect={:.3f}  p={:.3g}{}\n", r->state_a + " - " + r->state_b, r->n_io,
                         r->n_control, r->effect, r->p, r->significant ? "  *" : "");
    }
  }
  const auto& skipped = summary.at("skipped");
  if (!skipped.empty()) {
    out << "\nskipped\n";
    for (const auto& s : skipped) {
      out << fmt::format("  {:<14} {} - {}  {}\n", s.at("layer").get<std::string>(),
                         s.at("state_a").get<std::string>(), s.at("state_b").get<std::string>(),
                         s.at("reason").get<std::string>());
    }
  }
  out << '\n';
  std::size_t n_sig = 0;
  for (const auto& r : rows) n_sig += r.significant;
  if (n_sig == 0) {
    out << "no significant pairs\n";
    return;
  }
  out << "significant pairs\n";
  for (const auto& r : rows)
    if (r.significant) out << fmt::format("  {} {} - {}  p={:.3g}\n", r.layer, r.state_a, r.state_b, r.p);
}

/// Reads results.csv back (skipping the digest comment).
inline std::vector<ResultRow> read_results_csv(const fs::path& path) {
  auto in = detail::open_input(path);
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    auto f = detail::split_csv(line);
    if (!f || f->size() != 14) throw Error(ErrorCode::MalformedLine, path.string(), line_no);
    try {
      ResultRow r;
      r.layer = (*f)[0];
      r.state_a = (*f)[1];
      r.state_b = (*f)[2];
      r.n_io = std::stoull((*f)[4]);
      r.n_control = std::stoull((*f)[5]);
      r.effect = std::stod((*f)[7]);
      r.p = std::stod((*f)[8]);
      r.method = (*f)[9];
      r.candidate = (*f)[10] == "true";
      r.significant = (*f)[11] == "true";
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::MalformedLine, path.string(), line_no);
    }
  }
  return rows;
}

inline nlohmann::json read_json(const fs::path& path) {
  auto in = detail::open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what());
  }
}

}  // namespace coordnet
