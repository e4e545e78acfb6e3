#pragma once

// Network construction for every enabled layer and the full battery of
// IO-vs-control tests over state pairs.

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "coordnet/aggregate.hpp"
#include "coordnet/ingest.hpp"
#include "coordnet/interactions.hpp"
#include "coordnet/similarity.hpp"
#include "coordnet/stats.hpp"
#include "coordnet/traces.hpp"

namespace coordnet {

/// A network layer: one similarity trace or one interaction kind.
struct Layer {
  bool is_trace = true;
  TraceKind trace = TraceKind::CoRetweet;
  InteractionKind interaction = InteractionKind::Retweet;

  std::string_view name() const { return is_trace ? to_string(trace) : to_string(interaction); }
  SampleType sample_type() const { return is_trace ? SampleType::EdgeWeights : SampleType::NodeScores; }

  static Layer of(TraceKind t) { return Layer{true, t, InteractionKind::Retweet}; }
  static Layer of(InteractionKind k) { return Layer{false, TraceKind::CoRetweet, k}; }

  friend bool operator==(const Layer& a, const Layer& b) { return a.name() == b.name(); }
};

inline std::vector<Layer> all_layers() {
  std::vector<Layer> layers;
  for (auto t : kTraceKinds) layers.push_back(Layer::of(t));
  for (auto k : kInteractionKinds) layers.push_back(Layer::of(k));
  return layers;
}

inline std::optional<Layer> parse_layer(std::string_view name) {
  if (auto t = parse_trace_kind(name)) return Layer::of(*t);
  if (auto k = parse_interaction_kind(name)) return Layer::of(*k);
  return std::nullopt;
}

struct AnalysisOptions {
  std::vector<Layer> layers = all_layers();
  TraceOptions trace;
  double alpha = 0.05;
  InteractionMode interaction_mode = InteractionMode::Pooled;
  UTestOptions test;
  JoinOptions join;

  bool enabled(const Layer& l) const { return std::find(layers.begin(), layers.end(), l) != layers.end(); }
};

/// Everything `build` produces, kept in memory.
struct Networks {
  std::map<TraceKind, std::vector<FeatureBag>> bags;
  std::map<TraceKind, std::vector<SimilarityEdge>> edges;
  std::map<TraceKind, JoinReport> joins;
  std::map<InteractionKind, InteractionCounts> interactions;
  ExtractionReport extraction;
};

inline Networks build_networks(const Dataset& ds, const AnalysisOptions& opts) {
  Networks net;
  for (const auto& layer : opts.layers) {
    if (layer.is_trace) {
      auto bags = extract_trace(ds, layer.trace, opts.trace, &net.extraction);
      auto vectors = tfidf_vectorize(bags);
      net.edges[layer.trace] = cosine_network(vectors, opts.join, &net.joins[layer.trace]);
      net.bags[layer.trace] = std::move(bags);
    } else {
      net.interactions[layer.interaction] = count_interactions(ds, layer.interaction);
    }
  }
  return net;
}

struct SkippedExperiment {
  std::string layer;
  std::string state_a;
  std::string state_b;
  std::string reason;
};

struct ExperimentRun {
  std::vector<PairTestResult> results;  // sorted by (layer, state_a, state_b)
  std::vector<SkippedExperiment> skipped;

  std::size_t candidates() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](auto& r) { return r.candidate; }));
  }
  std::size_t significant() const {
    return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](auto& r) { return r.significant; }));
  }
};

/// Tests every state pair on every enabled layer with non-empty IO and
/// control samples, flags candidates and applies Bonferroni over the number
/// of evaluated experiments. In directional mode interaction layers are
/// tested per ordered pair (source state first).
inline ExperimentRun run_all(const Dataset& ds, const Networks& net, const AnalysisOptions& opts) {
  ExperimentRun run;
  const auto& states = ds.states();

  auto record = [&](const Layer& layer, const std::string& a, const std::string& b, const std::vector<double>& io,
                    const std::vector<double>& ctl, std::optional<std::string> io_skip,
                    std::optional<std::string> ctl_skip) {
    const std::string name(layer.name());
    if (io_skip || io.empty()) {
      run.skipped.push_back({name, a, b, io_skip ? "NO_IO_DATA:" + *io_skip : "NO_IO_DATA"});
      return;
    }
    if (ctl_skip || ctl.empty()) {
      run.skipped.push_back({name, a, b, ctl_skip ? "NO_CONTROL_DATA:" + *ctl_skip : "NO_CONTROL_DATA"});
      return;
    }
    PairTestResult r;
    r.state_a = a;
    r.state_b = b;
    r.layer = name;
    r.sample_type = layer.sample_type();
    r.test = mann_whitney_greater(io, ctl, opts.test);
    run.results.push_back(std::move(r));
  };

  for (const auto& layer : opts.layers) {
    if (layer.is_trace) {
      auto it = net.edges.find(layer.trace);
      if (it == net.edges.end()) continue;
      const auto buckets = interstate_samples(it->second, ds);
      static const std::vector<double> none;
      auto sample = [&](Cohort c, const std::string& a, const std::string& b) -> const std::vector<double>& {
        auto f = buckets.find(StatePairKey{c, a, b});
        return f == buckets.end() ? none : f->second;
      };
      for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j)
          record(layer, states[i], states[j], sample(Cohort::IO, states[i], states[j]),
                 sample(Cohort::Control, states[i], states[j]), std::nullopt, std::nullopt);
    } else {
      auto it = net.interactions.find(layer.interaction);
      if (it == net.interactions.end()) continue;
      const InteractionProfile prof(ds, it->second);
      auto test_pair = [&](const std::string& a, const std::string& b) {
        const auto io = suspiciousness(prof, Cohort::IO, a, b, opts.interaction_mode);
        const auto ctl = suspiciousness(prof, Cohort::Control, a, b, opts.interaction_mode);
        record(layer, a, b, io.values(), ctl.values(), io.skipped, ctl.skipped);
      };
      for (std::size_t i = 0; i < states.size(); ++i) {
        for (std::size_t j = i + 1; j < states.size(); ++j) {
          test_pair(states[i], states[j]);
          if (opts.interaction_mode == InteractionMode::Directional) test_pair(states[j], states[i]);
        }
      }
    }
  }

  auto key = [](const auto& r) { return std::tie(r.layer, r.state_a, r.state_b); };
  std::sort(run.results.begin(), run.results.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
  std::sort(run.skipped.begin(), run.skipped.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
  select_candidates(run.results);
  bonferroni(run.results, opts.alpha);
  return run;
}

inline void write_results_csv(std::ostream& out, const std::vector<PairTestResult>& results) {
  out << "layer,state_a,state_b,sample_type,n_io,n_control,u_io,effect,p,method,candidate,significant,m,threshold\n";
  for (const auto& r : results) {
    out << r.layer << ',' << detail::csv_field(r.state_a) << ',' << detail::csv_field(r.state_b) << ','
        << to_string(r.sample_type) << ',' << r.test.n_io << ',' << r.test.n_control << ','
        << fmt::format("{:.1f},{:.9f},{:.6e}", r.test.u_io, r.test.effect, r.test.p_one_sided) << ','
        << to_string(r.test.method) << ',' << (r.candidate ? "true" : "false") << ','
        << (r.significant ? "true" : "false") << ',' << r.m << ',' << fmt::format("{:.6e}", r.threshold) << '\n';
  }
}

}  // namespace coordnet
