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
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "peco/graph.hpp"
#include "peco/parallel.hpp"
#include "peco/text.hpp"

namespace peco {

/// Sparse symmetric similarity over one side of a bipartite graph. Zero
/// entries and self-pairs are never stored; every stored score is in (0, 1].
class SparseSimilarity {
 public:
  struct Row {
    std::span<const NodeId> neighbors;
    std::span<const double> scores;
  };

  SparseSimilarity() = default;

  // Rows must be sorted by neighbor index and mutually symmetric.
  SparseSimilarity(Side side, std::vector<std::vector<std::pair<NodeId, double>>> rows)
      : side_(side) {
    offsets_.assign(rows.size() + 1, 0);
    std::size_t total = 0;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      total += rows[a].size();
      offsets_[a + 1] = total;
    }
    neighbors_.reserve(total);
    scores_.reserve(total);
    for (const auto& row : rows) {
      for (const auto& [b, s] : row) {
        neighbors_.push_back(b);
        scores_.push_back(s);
      }
    }
  }

  Side side() const { return side_; }
  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_entries() const { return neighbors_.size(); }

  Row row(NodeId a) const {
    return {{neighbors_.data() + offsets_[a], neighbors_.data() + offsets_[a + 1]},
            {scores_.data() + offsets_[a], scores_.data() + offsets_[a + 1]}};
  }

  /// Stored score, or 0 when the pair is absent (including a == b).
  double lookup(NodeId a, NodeId b) const {
    const auto r = row(a);
    const auto it = std::lower_bound(r.neighbors.begin(), r.neighbors.end(), b);
    if (it == r.neighbors.end() || *it != b) return 0.0;
    return r.scores[static_cast<std::size_t>(it - r.neighbors.begin())];
  }

 private:
  Side side_ = Side::Users;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<double> scores_;
};

struct SimilarityOptions {
  // Keep at most this many highest-scoring entries per row (0 = keep all).
  // Rows are re-symmetrized afterwards: a pair survives if either endpoint
  // retains it, so lookup(a,b) == lookup(b,a) still holds.
  std::uint32_t top_k = 0;
  // Drop scores below this threshold (0 = keep every positive score).
  double min_score = 0.0;
  unsigned threads = 1;
};

namespace detail {

inline void select_top_k(std::vector<std::pair<NodeId, double>>& row, std::uint32_t k) {
  if (k == 0 || row.size() <= k) return;
  std::nth_element(row.begin(), row.begin() + k, row.end(),
                   [](const auto& x, const auto& y) {
                     if (x.second != y.second) return x.second > y.second;
                     return x.first < y.first;
                   });
  row.resize(k);
  std::sort(row.begin(), row.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
}

}  // namespace detail

/// Jaccard similarity |N(a) and N(b)| / |N(a) or N(b)| for every pair of
/// same-side nodes sharing at least one neighbor. Pairs sharing nothing are
/// absent. Co-neighbor counts are gathered through the opposite side
/// (inverted index), so cost is sum over pivot nodes of degree^2 rather than
/// quadratic in the side size.
inline SparseSimilarity pairwise_similarity(const InteractionGraph& g, Side side,
                                            const SimilarityOptions& opts = {}) {
  const NodeId n = g.num_nodes(side);
  const Side pivot = side == Side::Users ? Side::Items : Side::Users;
  std::vector<std::vector<std::pair<NodeId, double>>> rows(n);

  parallel_for(n, opts.threads, [&](unsigned, std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> counts(n, 0);
    std::vector<NodeId> touched;
    for (std::size_t a = begin; a < end; ++a) {
      const NodeId node = static_cast<NodeId>(a);
      const auto nbrs = g.neighbors(side, node);
      for (NodeId w : nbrs) {
        for (NodeId b : g.neighbors(pivot, w)) {
          if (b == node) continue;
          if (counts[b]++ == 0) touched.push_back(b);
        }
      }
      auto& row = rows[a];
      row.reserve(touched.size());
      for (NodeId b : touched) {
        const std::uint32_t inter = counts[b];
        counts[b] = 0;
        const std::size_t uni =
            nbrs.size() + g.neighbors(side, b).size() - inter;
        const double score = static_cast<double>(inter) / static_cast<double>(uni);
        if (opts.min_score > 0.0 && score < opts.min_score) continue;
        row.emplace_back(b, score);
      }
      touched.clear();
      std::sort(row.begin(), row.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      detail::select_top_k(row, opts.top_k);
    }
  });

  if (opts.top_k > 0) {
    // Re-symmetrize: keep (a,b) when either row retained it.
    std::vector<std::vector<std::pair<NodeId, double>>> additions(n);
    for (NodeId a = 0; a < n; ++a) {
      for (const auto& [b, s] : rows[a]) {
        const auto& other = rows[b];
        const auto it = std::lower_bound(
            other.begin(), other.end(), a,
            [](const auto& entry, NodeId key) { return entry.first < key; });
        if (it == other.end() || it->first != a) additions[b].emplace_back(a, s);
      }
    }
    for (NodeId a = 0; a < n; ++a) {
      if (additions[a].empty()) continue;
      auto& row = rows[a];
      row.insert(row.end(), additions[a].begin(), additions[a].end());
      std::sort(row.begin(), row.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
    }
  }
  return SparseSimilarity(side, std::move(rows));
}

/// Item-item concurrence matrix S: Jaccard over the item columns with an
/// identically zero diagonal (lookup(i, i) == 0 by construction).
inline SparseSimilarity concurrence_matrix(const InteractionGraph& g,
                                           const SimilarityOptions& opts = {}) {
  return pairwise_similarity(g, Side::Items, opts);
}

/// Mean concurrence of `item` against a sampled set: (1/|set|) * sum of
/// S(item, j). Empty sets score 0, which makes the first draw of an
/// r=0 sampling run depend on preference alone.
inline double set_score(const SparseSimilarity& s, NodeId item,
                        std::span<const NodeId> sampled) {
  if (sampled.empty()) return 0.0;
  double sum = 0.0;
  for (NodeId j : sampled) sum += s.lookup(item, j);
  return sum / static_cast<double>(sampled.size());
}

/// TSV dump `a<TAB>b<TAB>score` with a < b only, 9 significant digits.
inline std::string similarity_to_tsv(const SparseSimilarity& s) {
  std::string out;
  char buf[64];
  for (NodeId a = 0; a < s.num_nodes(); ++a) {
    const auto r = s.row(a);
    for (std::size_t k = 0; k < r.neighbors.size(); ++k) {
      const NodeId b = r.neighbors[k];
      if (b <= a) continue;
      const int len = std::snprintf(buf, sizeof(buf), "%u\t%u\t%.9g", a, b, r.scores[k]);
      out.append(buf, static_cast<std::size_t>(len));
      out.push_back('\n');
    }
  }
  return out;
}

/// Rebuilds a SparseSimilarity from its TSV dump (both directions restored).
inline SparseSimilarity similarity_from_tsv(const std::string& text, Side side,
                                            std::size_t num_nodes) {
  std::vector<std::vector<std::pair<NodeId, double>>> rows(num_nodes);
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string_view::npos ? std::string_view::npos
                                                        : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos)
      throw DataError("similarity dump line " + std::to_string(line_no) + " malformed");
    const std::string ctx = "similarity dump line " + std::to_string(line_no);
    const NodeId a = detail::parse_u32(line.substr(0, t1), ctx);
    const NodeId b = detail::parse_u32(line.substr(t1 + 1, t2 - t1 - 1), ctx);
    const double score = detail::parse_double(line.substr(t2 + 1), ctx);
    if (a >= num_nodes || b >= num_nodes) throw DataError(ctx + ": index out of range");
    rows[a].emplace_back(b, score);
    rows[b].emplace_back(a, score);
  }
  for (auto& row : rows)
    std::sort(row.begin(), row.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
  return SparseSimilarity(side, std::move(rows));
}

}  // namespace peco
