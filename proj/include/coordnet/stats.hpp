#pragma once

// One-sided Mann-Whitney U test (IO stochastically greater than control),
// candidate selection and Bonferroni correction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coordnet/error.hpp"

namespace coordnet {

/// Midranks (1-based); tied values share the average of their positions.
inline std::vector<double> rank_with_ties(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);  // average of i+1 .. j
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

enum class TestMethod : std::uint8_t { Exact, NormalApprox };

inline std::string_view to_string(TestMethod m) { return m == TestMethod::Exact ? "exact" : "normal"; }

struct UTestOptions {
  enum class Force : std::uint8_t { Auto, Exact, Normal };
  // Exact path runs iff C(n_io + n_control, n_io) <= exact_cap.
  double exact_cap = 2.0e6;
  Force force = Force::Auto;
};

struct UTestResult {
  std::size_t n_io = 0;
  std::size_t n_control = 0;
  double u_io = 0.0;
  double effect = 0.0;  // u_io / (n_io * n_control)
  double p_one_sided = 1.0;
  TestMethod method = TestMethod::Exact;
};

inline double binomial_coefficient(std::size_t n, std::size_t k) {
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

namespace detail {

// Tail probability of R, the doubled rank sum of a uniformly random size-k
// subset of `doubled_ranks`: P(R >= bound) when `upper`, else P(R <= bound).
// Counts subsets by rank sum, so ties are handled exactly.
inline double exact_tail(const std::vector<std::int64_t>& doubled_ranks, std::size_t k, std::int64_t bound,
                         bool upper) {
  std::vector<std::int64_t> desc(doubled_ranks);
  std::sort(desc.begin(), desc.end(), std::greater<>());
  const std::int64_t max_sum = std::accumulate(desc.begin(), desc.begin() + static_cast<std::ptrdiff_t>(k),
                                               std::int64_t{0});
  const auto width = static_cast<std::size_t>(max_sum + 1);
  // ways[j][s]: number of j-subsets of the items seen so far with sum s.
  std::vector<std::vector<long double>> ways(k + 1, std::vector<long double>(width, 0.0L));
  std::vector<std::int64_t> reach(k + 1, -1);
  ways[0][0] = 1.0L;
  reach[0] = 0;
  std::size_t seen = 0;
  for (const auto r : doubled_ranks) {
    ++seen;
    for (std::size_t j = std::min(k, seen); j >= 1; --j) {
      if (reach[j - 1] < 0) continue;
      const auto& src = ways[j - 1];
      auto& dst = ways[j];
      for (std::int64_t s = reach[j - 1]; s >= 0; --s) {
        if (src[s] != 0.0L) dst[s + r] += src[s];
      }
      reach[j] = std::min(max_sum, std::max(reach[j], reach[j - 1] + r));
    }
  }
  long double total = 0.0L, tail = 0.0L;
  for (std::int64_t s = 0; s <= reach[k]; ++s) {
    total += ways[k][s];
    if (upper ? s >= bound : s <= bound) tail += ways[k][s];
  }
  return static_cast<double>(tail / total);
}

}  // namespace detail

/// One-sided test of H1: IO values tend to be larger than control values.
///
/// U_io = R_io - n_io(n_io + 1)/2 with midranks over the pooled sample. The
/// exact path gives P(U >= U_io) over all equally likely group assignments
/// of the pooled values. The normal path uses the tie-corrected variance
/// and a 0.5 continuity correction.
inline UTestResult mann_whitney_greater(std::span<const double> io, std::span<const double> control,
                                        const UTestOptions& opts = {}) {
  if (io.empty() || control.empty())
    throw Error(ErrorCode::EmptySample, io.empty() ? "io sample is empty" : "control sample is empty");

  const std::size_t n1 = io.size(), n2 = control.size(), n = n1 + n2;
  std::vector<double> pooled;
  pooled.reserve(n);
  pooled.insert(pooled.end(), io.begin(), io.end());
  pooled.insert(pooled.end(), control.begin(), control.end());
  const auto ranks = rank_with_ties(pooled);

  // Doubled midranks are integers, which keeps the exact path free of rounding.
  std::vector<std::int64_t> doubled(n);
  for (std::size_t i = 0; i < n; ++i) doubled[i] = std::llround(2.0 * ranks[i]);
  const std::int64_t observed = std::accumulate(doubled.begin(), doubled.begin() + n1, std::int64_t{0});

  UTestResult res;
  res.n_io = n1;
  res.n_control = n2;
  res.u_io = 0.5 * static_cast<double>(observed) - 0.5 * static_cast<double>(n1 * (n1 + 1));
  const double nn = static_cast<double>(n1) * static_cast<double>(n2);
  res.effect = res.u_io / nn;

  bool exact = false;
  switch (opts.force) {
    case UTestOptions::Force::Exact: exact = true; break;
    case UTestOptions::Force::Normal: exact = false; break;
    case UTestOptions::Force::Auto: exact = binomial_coefficient(n, n1) <= opts.exact_cap; break;
  }

  if (exact) {
    res.method = TestMethod::Exact;
    // Enumerate over the smaller group: P(R_io >= r) = P(R_control <= total - r).
    const std::int64_t total = static_cast<std::int64_t>(n * (n + 1));
    const double p = n1 <= n2 ? detail::exact_tail(doubled, n1, observed, true)
                              : detail::exact_tail(doubled, n2, total - observed, false);
    res.p_one_sided = std::clamp(p, 0.0, 1.0);
    return res;
  }

  res.method = TestMethod::NormalApprox;
  double tie_term = 0.0;
  {
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i + 1;
      while (j < n && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
  }
  const double N = static_cast<double>(n);
  const double mean = 0.5 * nn;
  const double var = nn / 12.0 * ((N + 1.0) - tie_term / (N * (N - 1.0)));
  if (var <= 0.0) {
    // Every value tied: U equals its mean under every assignment.
    res.p_one_sided = 1.0;
    return res;
  }
  const double z = (res.u_io - mean - 0.5) / std::sqrt(var);
  res.p_one_sided = std::clamp(0.5 * std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  return res;
}

enum class SampleType : std::uint8_t { EdgeWeights, NodeScores };

inline std::string_view to_string(SampleType t) { return t == SampleType::EdgeWeights ? "edge_weights" : "node_scores"; }

struct PairTestResult {
  std::string state_a;
  std::string state_b;
  std::string layer;
  SampleType sample_type = SampleType::EdgeWeights;
  UTestResult test;
  bool candidate = false;
  bool significant = false;
  std::size_t m = 0;
  double threshold = 0.0;
};

/// candidate <=> effect > 0.5, i.e. U_io > U_control.
inline void select_candidates(std::vector<PairTestResult>& results) {
  for (auto& r : results) r.candidate = r.test.effect > 0.5;
}

/// m = number of evaluated experiments (all of `results`, not only the
/// candidates); significant <=> candidate and p < alpha / m.
inline void bonferroni(std::vector<PairTestResult>& results, double alpha) {
  const std::size_t m = results.size();
  const double threshold = m == 0 ? alpha : alpha / static_cast<double>(m);
  for (auto& r : results) {
    r.m = m;
    r.threshold = threshold;
    r.significant = r.candidate && r.test.p_one_sided < threshold;
  }
}

}  // namespace coordnet
