#pragma once

// State-level aggregate networks: out-strength normalized interaction
// layers and Jaccard-weighted similarity layers.

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "coordnet/ingest.hpp"
#include "coordnet/interactions.hpp"
#include "coordnet/traces.hpp"

namespace coordnet {

struct AggregateEdge {
  std::string source;
  std::string target;
  std::string layer;
  double weight = 0.0;
  bool directed = false;
  bool intra = false;  // source == target; kept for inspection only
};

/// weight(A -> B) = interactions from cohort users of A to cohort users of B,
/// divided by all out-interactions of cohort users of A. States with zero
/// out-strength emit nothing.
inline std::vector<AggregateEdge> aggregate_interactions(const InteractionCounts& counts, const Dataset& ds,
                                                         Cohort cohort) {
  std::map<std::string, std::map<std::string, std::uint64_t>> flows;
  std::map<std::string, std::uint64_t> strength;
  for (ActorIndex src = 0; src < counts.out.size(); ++src) {
    const auto& me = ds.actors()[src];
    if (me.cohort != cohort) continue;
    for (const auto& [dst, c] : counts.out[src]) {
      strength[me.state] += c;
      const auto& them = ds.actors()[dst];
      if (them.cohort == cohort) flows[me.state][them.state] += c;
    }
  }
  std::vector<AggregateEdge> edges;
  for (const auto& [a, targets] : flows) {
    const double total = static_cast<double>(strength[a]);
    for (const auto& [b, c] : targets) {
      edges.push_back(AggregateEdge{a, b, std::string(to_string(counts.kind)), static_cast<double>(c) / total, true,
                                    a == b});
    }
  }
  return edges;
}

template <typename Set>
double jaccard(const Set& a, const Set& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t shared = 0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const auto& x : small) shared += large.count(x);
  return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

/// Per-state union of the feature supports of that state's cohort users.
inline std::map<std::string, std::set<std::string>> state_feature_sets(const std::vector<FeatureBag>& bags,
                                                                      const Dataset& ds, Cohort cohort) {
  std::map<std::string, std::set<std::string>> sets;
  for (const auto& bag : bags) {
    const Actor* a = ds.actor(bag.actor_id);
    if (!a || a->cohort != cohort) continue;
    auto& s = sets[a->state];
    for (const auto& [f, _] : bag.counts) s.insert(f);
  }
  return sets;
}

/// Jaccard coefficient on state feature sets for every pair of states;
/// pairs with no shared feature are omitted.
inline std::vector<AggregateEdge> aggregate_similarity(const std::map<std::string, std::set<std::string>>& sets,
                                                       TraceKind trace) {
  std::vector<AggregateEdge> edges;
  for (auto a = sets.begin(); a != sets.end(); ++a) {
    for (auto b = std::next(a); b != sets.end(); ++b) {
      const double w = jaccard(a->second, b->second);
      if (w > 0.0) edges.push_back(AggregateEdge{a->first, b->first, std::string(to_string(trace)), w, false, false});
    }
  }
  return edges;
}

inline std::vector<AggregateEdge> aggregate_similarity(const std::vector<FeatureBag>& bags, const Dataset& ds,
                                                       Cohort cohort, TraceKind trace) {
  return aggregate_similarity(state_feature_sets(bags, ds, cohort), trace);
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateEdge>& edges) {
  out << "source,target,layer,weight\n";
  for (const auto& e : edges) {
    out << detail::csv_field(e.source) << ',' << detail::csv_field(e.target) << ',' << e.layer << ','
        << fmt::format("{:.9f}", e.weight) << '\n';
  }
}

namespace detail {

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

/// One DOT graph for a single layer. Pen width runs from 1 to 9 with weight.
inline void write_dot(std::ostream& out, const std::vector<AggregateEdge>& edges, std::string_view layer,
                      bool directed, const std::vector<std::string>& states) {
  const char* arrow = directed ? " -> " : " -- ";
  out << (directed ? "digraph " : "graph ") << detail::dot_quote(layer) << " {\n";
  out << "  node [shape=ellipse];\n";
  for (const auto& s : states) out << "  " << detail::dot_quote(s) << " [label=" << detail::dot_quote(s) << "];\n";
  for (const auto& e : edges) {
    if (e.layer != layer) continue;
    out << "  " << detail::dot_quote(e.source) << arrow << detail::dot_quote(e.target)
        << fmt::format(" [label=\"{:.4f}\", penwidth={:.3f}", e.weight, 1.0 + 8.0 * e.weight);
    if (e.intra) out << ", style=dashed";
    out << "];\n";
  }
  out << "}\n";
}

}  // namespace coordnet
