// coordnet: validate, build, test, report, synth.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "coordnet/error.hpp"
#include "coordnet/experiments.hpp"
#include "coordnet/pipeline.hpp"
#include "coordnet/synth.hpp"

using namespace coordnet;

namespace {

struct Flags {
  std::string config;
  std::string out;
  unsigned threads = 0;
  bool strict = false;
  std::string actors, posts, stopwords, url_map;
  std::vector<std::string> layers;
  std::string mode;
};

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) load_config_file(cfg, f.config);
  if (!f.actors.empty()) cfg.actors = f.actors;
  if (!f.posts.empty()) cfg.posts = f.posts;
  if (!f.stopwords.empty()) cfg.stopwords = fs::path(f.stopwords);
  if (!f.url_map.empty()) cfg.url_map = fs::path(f.url_map);
  if (!f.out.empty()) cfg.out = f.out;
  if (f.threads) cfg.threads = f.threads;
  if (f.strict) cfg.strict = true;
  nlohmann::json overrides = nlohmann::json::object();
  if (!f.layers.empty()) overrides["layers"] = f.layers;
  if (!f.mode.empty()) overrides["interaction_mode"] = f.mode;
  apply_config(cfg, overrides);
  if (cfg.actors.empty()) throw Error(ErrorCode::InvalidConfig, "actors: no actors file given");
  if (cfg.posts.empty()) throw Error(ErrorCode::InvalidConfig, "posts: no posts file given");
  return cfg;
}

void print_counts(std::ostream& out, const ValidationReport& r) {
  out << fmt::format("{:<20} {:>10} {:>10}\n", "state", "io", "control");
  std::size_t io = 0, ctl = 0;
  for (const auto& [state, c] : r.counts) {
    out << fmt::format("{:<20} {:>10} {:>10}\n", state, c[0], c[1]);
    io += c[0];
    ctl += c[1];
  }
  out << fmt::format("{:<20} {:>10} {:>10}\n", "total", io, ctl);
  out << fmt::format("posts {}  dropped {}  dangling retweet authors {}  dangling reply authors {}\n", r.total_posts,
                     r.dropped_posts, r.dangling_retweet_authors, r.dangling_reply_authors);
}

int cmd_validate(const Flags& f) {
  auto cfg = resolve(f);
  auto in = load_inputs(cfg);
  print_counts(std::cout, in.validation);
  return 0;
}

struct Built {
  RunConfig cfg;
  Inputs in;
  Networks net;
  std::string digest;
};

Built build(const Flags& f) {
  Built b{resolve(f), {}, {}, {}};
  const auto resolved = resolved_config(b.cfg);
  b.digest = config_digest(resolved);
  b.in = load_inputs(b.cfg);
  b.net = build_layers(b.in.dataset, b.cfg.analysis);
  write_build(b.cfg, b.in, b.net, resolved, b.digest);
  return b;
}

int cmd_build(const Flags& f) {
  auto b = build(f);
  std::cout << "wrote " << b.cfg.out.string() << " (config_digest " << b.digest << ")\n";
  return 0;
}

int cmd_test(const Flags& f) {
  auto b = build(f);
  const auto run = run_all(b.in.dataset, b.net, b.cfg.analysis);
  write_test(b.cfg, run, b.digest);
  std::vector<ResultRow> rows;
  for (const auto& r : run.results) rows.push_back(to_row(r));
  print_summary(std::cout, rows, nlohmann::json::parse(summary_json(run, b.cfg, b.digest).dump()));
  return 0;
}

int cmd_report(const Flags& f) {
  fs::path dir = f.out;
  if (dir.empty() && !f.config.empty()) {
    RunConfig cfg;
    load_config_file(cfg, f.config);
    dir = cfg.out;
  }
  if (dir.empty()) dir = RunConfig{}.out;
  print_summary(std::cout, read_results_csv(dir / "results.csv"), read_json(dir / "summary.json"));
  return 0;
}

int cmd_synth(const Flags& f, const std::string& scenario, std::optional<std::uint64_t> seed, bool describe_only) {
  auto j = read_json(scenario);
  if (seed) j["seed"] = *seed;
  const auto config = synth::scenario_from_json(j);
  if (!describe_only) {
    const fs::path dir = f.out.empty() ? fs::path("synth_out") : fs::path(f.out);
    synth::generate(config, dir);
    std::cerr << "wrote " << (dir / "actors.csv").string() << " and " << (dir / "posts.jsonl").string() << '\n';
  }
  std::cout << synth::to_json(synth::describe(config)).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated behavior detection between state-labelled account groups"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON run config");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--threads", f.threads, "Worker threads (default: hardware concurrency)")->check(CLI::PositiveNumber);
  app.add_flag("--strict", f.strict, "Unknown post authors are errors");
  app.add_option("--actors", f.actors, "Actors CSV");
  app.add_option("--posts", f.posts, "Posts JSON Lines");
  app.add_option("--stopwords", f.stopwords, "Stopword file, one token per line");
  app.add_option("--url-map", f.url_map, "short_url,expanded_url CSV");
  app.add_option("--layers", f.layers, "Enabled layers")->delimiter(',');
  app.add_option("--interaction-mode", f.mode, "pooled or directional");

  auto* validate = app.add_subcommand("validate", "Parse and validate inputs, print state x cohort counts");
  auto* build_cmd = app.add_subcommand("build", "Write edge lists, score dumps and aggregate networks");
  auto* test = app.add_subcommand("test", "Build, run all IO-vs-control tests, print the summary");
  auto* report = app.add_subcommand("report", "Print the summary of a finished test run");
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus from a scenario");
  std::string scenario;
  std::optional<std::uint64_t> seed;
  bool describe_only = false;
  synth_cmd->add_option("--scenario", scenario, "Scenario JSON")->required();
  synth_cmd->add_option("--seed", seed, "Override the scenario seed");
  synth_cmd->add_flag("--describe", describe_only, "Only print expected totals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*validate) return cmd_validate(f);
    if (*build_cmd) return cmd_build(f);
    if (*test) return cmd_test(f);
    if (*report) return cmd_report(f);
    if (*synth_cmd) return cmd_synth(f, scenario, seed, describe_only);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_data_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: IO_ERROR: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
