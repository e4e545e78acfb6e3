#pragma once

// TF-IDF vectors and the sparse all-pairs cosine join.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "coordnet/ingest.hpp"
#include "coordnet/parallel.hpp"
#include "coordnet/traces.hpp"

namespace coordnet {

struct SparseVector {
  std::string actor_id;
  TraceKind trace = TraceKind::CoRetweet;
  // Sorted by feature, all weights > 0, unit Euclidean norm.
  std::vector<std::pair<std::string, double>> weights;

  double weight(std::string_view feature) const {
    auto it = std::lower_bound(weights.begin(), weights.end(), feature,
                               [](const auto& fw, std::string_view f) { return fw.first < f; });
    return (it != weights.end() && it->first == feature) ? it->second : 0.0;
  }
};

struct SimilarityEdge {
  std::string actor_a;  // actor_a < actor_b
  std::string actor_b;
  TraceKind trace = TraceKind::CoRetweet;
  double weight = 0.0;
};

/// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
inline double smoothed_idf(std::size_t n_docs, std::size_t df) {
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df))) + 1.0;
}

/// Raw-count TF times smoothed IDF, then L2 normalization. Output order
/// follows input order.
inline std::vector<SparseVector> tfidf_vectorize(const std::vector<FeatureBag>& bags) {
  std::unordered_map<std::string_view, std::size_t> df;
  for (const auto& bag : bags)
    for (const auto& [feature, _] : bag.counts) ++df[feature];

  const std::size_t n = bags.size();
  std::vector<SparseVector> out;
  out.reserve(n);
  for (const auto& bag : bags) {
    SparseVector v{bag.actor_id, bag.trace, {}};
    v.weights.reserve(bag.counts.size());
    double norm2 = 0.0;
    for (const auto& [feature, count] : bag.counts) {
      const double w = static_cast<double>(count) * smoothed_idf(n, df[feature]);
      v.weights.emplace_back(feature, w);
      norm2 += w * w;
    }
    const double norm = std::sqrt(norm2);
    for (auto& fw : v.weights) fw.second /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

struct JoinOptions {
  unsigned threads = 1;
  // Features whose posting list exceeds this many vectors are reported.
  std::size_t posting_list_cap = 10'000;
};

struct JoinReport {
  std::size_t vectors = 0;
  std::size_t features = 0;
  std::size_t edges = 0;
  std::vector<std::pair<std::string, std::size_t>> heavy_features;
};

inline nlohmann::ordered_json to_json(const JoinReport& r) {
  nlohmann::ordered_json heavy = nlohmann::ordered_json::array();
  for (const auto& [f, n] : r.heavy_features) heavy.push_back({{"feature", f}, {"postings", n}});
  return {{"vectors", r.vectors}, {"features", r.features}, {"edges", r.edges}, {"heavy_features", heavy}};
}

/// Index-based edge produced by the join; rows refer to the join's sorted order.
struct RowEdge {
  std::uint32_t a;
  std::uint32_t b;
  double weight;
};

/// Cosine similarity over every pair of vectors sharing at least one feature.
///
/// Vectors are ordered by actor_id, features are interned in lexicographic
/// order and each row accumulates dot products against later rows through
/// the feature posting lists, so cost follows shared-feature co-occurrences.
/// Each row is summed in a fixed feature order; the result does not depend on
/// the thread count.
inline std::vector<SimilarityEdge> cosine_network(const std::vector<SparseVector>& vectors,
                                                  const JoinOptions& opts = {}, JoinReport* report = nullptr) {
  const std::size_t n = vectors.size();
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(),
            [&](auto x, auto y) { return vectors[x].actor_id < vectors[y].actor_id; });

  std::unordered_map<std::string_view, std::uint32_t> feature_ids;
  for (const auto& v : vectors)
    for (const auto& fw : v.weights) feature_ids.emplace(fw.first, 0);
  std::vector<std::string_view> features;
  features.reserve(feature_ids.size());
  for (const auto& [f, _] : feature_ids) features.push_back(f);
  std::sort(features.begin(), features.end());
  for (std::uint32_t i = 0; i < features.size(); ++i) feature_ids[features[i]] = i;

  struct Entry {
    std::uint32_t row;
    double weight;
  };
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
  std::vector<std::vector<Entry>> postings(features.size());
  for (std::uint32_t r = 0; r < n; ++r) {
    const auto& v = vectors[order[r]];
    auto& row = rows[r];
    row.reserve(v.weights.size());
    for (const auto& [f, w] : v.weights) {
      const auto fid = feature_ids[f];
      row.emplace_back(fid, w);
      postings[fid].push_back(Entry{r, w});
    }
    std::sort(row.begin(), row.end());
  }

  if (report) {
    report->vectors = n;
    report->features = features.size();
    report->heavy_features.clear();
    for (std::size_t f = 0; f < features.size(); ++f)
      if (postings[f].size() > opts.posting_list_cap)
        report->heavy_features.emplace_back(std::string(features[f]), postings[f].size());
  }

  // Rows are handed out in blocks from a shared counter; results land in
  // per-row slots so the merge order is fixed.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> row_edges(n);
  constexpr std::size_t kBlock = 64;
  std::atomic<std::size_t> next{0};
  const unsigned workers = std::max(1u, opts.threads);
  parallel_for(workers, workers, [&](std::size_t, std::size_t, unsigned) {
    std::vector<double> acc(n, 0.0);
    std::vector<std::uint32_t> touched;
    for (;;) {
      const std::size_t begin = next.fetch_add(kBlock);
      if (begin >= n) break;
      const std::size_t end = std::min(n, begin + kBlock);
      for (std::size_t r = begin; r < end; ++r) {
        touched.clear();
        for (const auto& [fid, w] : rows[r]) {
          const auto& plist = postings[fid];
          auto it = std::upper_bound(plist.begin(), plist.end(), r,
                                     [](std::size_t row, const Entry& e) { return row < e.row; });
          for (; it != plist.end(); ++it) {
            if (acc[it->row] == 0.0) touched.push_back(it->row);
            acc[it->row] += w * it->weight;
          }
        }
        std::sort(touched.begin(), touched.end());
        auto& out = row_edges[r];
        out.reserve(touched.size());
        for (auto j : touched) {
          out.emplace_back(j, std::min(acc[j], 1.0));
          acc[j] = 0.0;
        }
      }
    }
  });

  std::size_t total = 0;
  for (const auto& re : row_edges) total += re.size();
  std::vector<SimilarityEdge> edges;
  edges.reserve(total);
  for (std::uint32_t r = 0; r < n; ++r) {
    const auto& va = vectors[order[r]];
    for (const auto& [j, w] : row_edges[r]) {
      edges.push_back(SimilarityEdge{va.actor_id, vectors[order[j]].actor_id, va.trace, w});
    }
    row_edges[r].clear();
    row_edges[r].shrink_to_fit();
  }
  if (report) report->edges = edges.size();
  return edges;
}

/// Edge weights joining (state_a, cohort) to (state_b, cohort) actors, in
/// edge order. Intra-state and cross-cohort edges are excluded.
inline std::vector<double> interstate_edges(const std::vector<SimilarityEdge>& edges, const Dataset& ds,
                                            Cohort cohort, std::string_view state_a, std::string_view state_b) {
  std::vector<double> sample;
  if (state_a == state_b) return sample;
  for (const auto& e : edges) {
    const Actor* a = ds.actor(e.actor_a);
    const Actor* b = ds.actor(e.actor_b);
    if (!a || !b || a->cohort != cohort || b->cohort != cohort) continue;
    if ((a->state == state_a && b->state == state_b) || (a->state == state_b && b->state == state_a))
      sample.push_back(e.weight);
  }
  return sample;
}

/// Key for a canonically ordered state pair within one cohort.
struct StatePairKey {
  Cohort cohort;
  std::string state_a;  // state_a < state_b
  std::string state_b;

  friend auto operator<=>(const StatePairKey&, const StatePairKey&) = default;
};

/// Buckets every inter-state, same-cohort edge weight by state pair in one
/// pass. Each bucket equals interstate_edges() for that pair.
inline std::map<StatePairKey, std::vector<double>> interstate_samples(const std::vector<SimilarityEdge>& edges,
                                                                      const Dataset& ds) {
  std::map<StatePairKey, std::vector<double>> buckets;
  for (const auto& e : edges) {
    const Actor* a = ds.actor(e.actor_a);
    const Actor* b = ds.actor(e.actor_b);
    if (!a || !b || a->cohort != b->cohort || a->state == b->state) continue;
    auto key = a->state < b->state ? StatePairKey{a->cohort, a->state, b->state}
                                   : StatePairKey{a->cohort, b->state, a->state};
    buckets[std::move(key)].push_back(e.weight);
  }
  return buckets;
}

inline void write_edge_list(std::ostream& out, const std::vector<SimilarityEdge>& edges) {
  out << "actor_a,actor_b,trace,weight\n";
  for (const auto& e : edges) {
    out << detail::csv_field(e.actor_a) << ',' << detail::csv_field(e.actor_b) << ',' << to_string(e.trace)
        << ',' << fmt::format("{:.9f}", e.weight) << '\n';
  }
}

}  // namespace coordnet
