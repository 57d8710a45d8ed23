// Copyright 2026 The Pecograph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "peco/clustering.hpp"
#include "peco/graph.hpp"
#include "peco/sampler.hpp"
#include "peco/similarity.hpp"

namespace peco {

/// Spearman rank correlation with average ranks for ties. Undefined (nullopt)
/// when either input is constant or shorter than 2.
inline std::optional<double> spearman(std::span<const double> x,
                                      std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) return std::nullopt;

  const auto ranks = [n](std::span<const double> v) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };

  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double mean = (static_cast<double>(n) + 1.0) / 2.0;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = rx[i] - mean, dy = ry[i] - mean;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

/// Per-item degree preservation across an ensemble, sorted by original
/// degree (descending, ties by item index).
struct DegreeReport {
  struct Row {
    NodeId item;
    std::uint32_t original_degree;
    double mean_degree;
    double std_degree;
  };
  std::vector<Row> rows;
  std::optional<double> rank_correlation;  // original vs ensemble-mean degree
  std::size_t samples = 0;
};

inline DegreeReport degree_report(const InteractionGraph& g,
                                  std::span<const InteractionGraph* const> ensemble) {
  if (ensemble.empty()) throw std::invalid_argument("degree_report: empty ensemble");
  for (const auto* s : ensemble)
    if (s->num_users() != g.num_users() || s->num_items() != g.num_items())
      throw DataError("degree_report: node sets do not match the source graph");

  const auto original = degrees(g, Side::Items);
  const std::size_t n = original.size();
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  for (const auto* s : ensemble) {
    const auto d = degrees(*s, Side::Items);
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += d[i];
      sum_sq[i] += static_cast<double>(d[i]) * d[i];
    }
  }

  DegreeReport report;
  report.samples = ensemble.size();
  report.rows.resize(n);
  const double k = static_cast<double>(ensemble.size());
  std::vector<double> orig_d(n), mean_d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / k;
    const double var = std::max(0.0, sum_sq[i] / k - mean * mean);
    report.rows[i] = {static_cast<NodeId>(i), original[i], mean, std::sqrt(var)};
    orig_d[i] = original[i];
    mean_d[i] = mean;
  }
  report.rank_correlation = spearman(orig_d, mean_d);
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    if (a.original_degree != b.original_degree)
      return a.original_degree > b.original_degree;
    return a.item < b.item;
  });
  return report;
}

inline std::string degree_report_to_csv(const DegreeReport& r) {
  std::string out = "item,original_degree,ensemble_mean_degree,ensemble_std_degree\n";
  char buf[128];
  for (const auto& row : r.rows) {
    const int len = std::snprintf(buf, sizeof(buf), "%u,%u,%.9g,%.9g", row.item,
                                  row.original_degree, row.mean_degree, row.std_degree);
    out.append(buf, static_cast<std::size_t>(len));
    out.push_back('\n');
  }
  return out;
}

/// How closely sampled graphs reproduce the item concurrence matrix:
/// mean absolute deviation over the union of supports and Spearman
/// correlation over entries present in both matrices. The correlation is
/// absent when no sample has an overlapping support.
struct ConcurrenceReport {
  std::size_t samples = 0;
  double mean_abs_deviation = 0.0;
  std::optional<double> rank_correlation;
  std::size_t correlated_samples = 0;
};

inline ConcurrenceReport concurrence_report(
    const SparseSimilarity& original, std::span<const InteractionGraph* const> ensemble,
    const SimilarityOptions& opts = {}) {
  if (ensemble.empty()) throw std::invalid_argument("concurrence_report: empty ensemble");
  ConcurrenceReport report;
  report.samples = ensemble.size();
  double dev_total = 0.0, corr_total = 0.0;
  for (const auto* sample : ensemble) {
    const SparseSimilarity sampled = concurrence_matrix(*sample, opts);
    double abs_dev = 0.0;
    std::size_t union_count = 0;
    std::vector<double> both_orig, both_sampled;
    const std::size_t n = std::max(original.num_nodes(), sampled.num_nodes());
    for (NodeId a = 0; a < n; ++a) {
      const auto ra = a < original.num_nodes() ? original.row(a) : SparseSimilarity::Row{};
      const auto rb = a < sampled.num_nodes() ? sampled.row(a) : SparseSimilarity::Row{};
      std::size_t i = 0, j = 0;
      while (i < ra.neighbors.size() || j < rb.neighbors.size()) {
        NodeId na = i < ra.neighbors.size() ? ra.neighbors[i]
                                            : std::numeric_limits<NodeId>::max();
        NodeId nb = j < rb.neighbors.size() ? rb.neighbors[j]
                                            : std::numeric_limits<NodeId>::max();
        NodeId b = std::min(na, nb);
        double va = 0.0, vb = 0.0;
        if (na == b) va = ra.scores[i++];
        if (nb == b) vb = rb.scores[j++];
        if (b <= a) continue;  // count each unordered pair once
        ++union_count;
        abs_dev += std::abs(va - vb);
        if (va > 0.0 && vb > 0.0) {
          both_orig.push_back(va);
          both_sampled.push_back(vb);
        }
      }
    }
    dev_total += union_count > 0 ? abs_dev / static_cast<double>(union_count) : 0.0;
    if (const auto corr = spearman(both_orig, both_sampled)) {
      corr_total += *corr;
      ++report.correlated_samples;
    }
  }
  report.mean_abs_deviation = dev_total / static_cast<double>(report.samples);
  if (report.correlated_samples > 0)
    report.rank_correlation = corr_total / static_cast<double>(report.correlated_samples);
  return report;
}

/// Preservation of the cluster-pair edge-count structure: the cluster score
/// matrix is recomputed on each sample with the original assignments and
/// compared by normalized total-variation distance.
struct PreferenceReport {
  std::size_t samples = 0;
  double mean_tv_distance = 0.0;
};

inline PreferenceReport preference_report(const ClusterScoreMatrix& original,
                                          std::span<const InteractionGraph* const> ensemble,
                                          const ClusterAssignment& users,
                                          const ClusterAssignment& items) {
  if (ensemble.empty()) throw std::invalid_argument("preference_report: empty ensemble");
  const double orig_total = static_cast<double>(original.total());
  PreferenceReport report;
  report.samples = ensemble.size();
  double tv_total = 0.0;
  for (const auto* sample : ensemble) {
    const ClusterScoreMatrix sampled = cluster_scores(*sample, users, items);
    if (sampled.rows() != original.rows() || sampled.cols() != original.cols())
      throw DataError("preference_report: cluster score shapes do not match");
    const double sampled_total = static_cast<double>(sampled.total());
    if (orig_total == 0.0 || sampled_total == 0.0) {
      tv_total += (orig_total == sampled_total) ? 0.0 : 1.0;
      continue;
    }
    double tv = 0.0;
    for (std::uint32_t a = 0; a < original.rows(); ++a)
      for (std::uint32_t b = 0; b < original.cols(); ++b)
        tv += std::abs(static_cast<double>(sampled.at(a, b)) / sampled_total -
                       static_cast<double>(original.at(a, b)) / orig_total);
    tv_total += 0.5 * tv;
  }
  report.mean_tv_distance = tv_total / static_cast<double>(report.samples);
  return report;
}

/// One user's ranked recommendation list and held-out relevant set.
struct RankingJudgment {
  std::vector<NodeId> ranked;    // no duplicates, best first
  std::vector<NodeId> relevant;  // treated as a set
};

namespace detail {

inline void check_ranked(const RankingJudgment& j) {
  std::vector<NodeId> sorted(j.ranked);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("ranked list contains duplicates");
}

inline bool is_relevant(const RankingJudgment& j, NodeId item) {
  return std::find(j.relevant.begin(), j.relevant.end(), item) != j.relevant.end();
}

}  // namespace detail

/// |top-K intersect relevant| / |relevant|.
inline double recall_at_k(const RankingJudgment& j, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (j.relevant.empty()) throw std::invalid_argument("recall undefined for empty relevant set");
  detail::check_ranked(j);
  std::size_t hits = 0;
  const std::size_t depth = std::min(k, j.ranked.size());
  for (std::size_t r = 0; r < depth; ++r)
    if (detail::is_relevant(j, j.ranked[r])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(j.relevant.size());
}

/// Binary-gain NDCG with log2(rank + 1) discount; the ideal DCG places one
/// relevant item per rank over min(K, |relevant|) positions.
inline double ndcg_at_k(const RankingJudgment& j, std::size_t k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (j.relevant.empty()) throw std::invalid_argument("ndcg undefined for empty relevant set");
  detail::check_ranked(j);
  double dcg = 0.0;
  const std::size_t depth = std::min(k, j.ranked.size());
  for (std::size_t r = 0; r < depth; ++r)
    if (detail::is_relevant(j, j.ranked[r]))
      dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, j.relevant.size());
  for (std::size_t r = 0; r < ideal; ++r)
    idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

/// Averages over users; users with empty relevant sets are excluded and
/// counted separately.
struct RankingSummary {
  double mean_recall = 0.0;
  double mean_ndcg = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped_empty_relevant = 0;
};

inline RankingSummary evaluate_rankings(std::span<const RankingJudgment> judgments,
                                        std::size_t k) {
  RankingSummary s;
  double recall_sum = 0.0, ndcg_sum = 0.0;
  for (const auto& j : judgments) {
    if (j.relevant.empty()) {
      ++s.skipped_empty_relevant;
      continue;
    }
    recall_sum += recall_at_k(j, k);
    ndcg_sum += ndcg_at_k(j, k);
    ++s.evaluated;
  }
  if (s.evaluated > 0) {
    s.mean_recall = recall_sum / static_cast<double>(s.evaluated);
    s.mean_ndcg = ndcg_sum / static_cast<double>(s.evaluated);
  }
  return s;
}

}  // namespace peco
