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
#include <deque>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "peco/graph.hpp"
#include "peco/similarity.hpp"
#include "peco/text.hpp"

namespace peco {

/// One cluster index per node of a side. Every node belongs to exactly one
/// cluster and no cluster is empty.
struct ClusterAssignment {
  Side side = Side::Users;
  std::vector<std::uint32_t> cluster_of;
  std::vector<std::uint32_t> cluster_sizes;

  std::uint32_t num_clusters() const {
    return static_cast<std::uint32_t>(cluster_sizes.size());
  }
  std::size_t num_nodes() const { return cluster_of.size(); }
};

/// DBSCAN over distance(a, b) = 1 - similarity(a, b). Pairs that share no
/// neighbor have distance 1 and are never within reach, so eps = 1 clusters
/// exactly the connected components of the similarity graph. Neighborhood
/// counts include the point itself (min_pts = 1 makes every node a core
/// point). Noise points become singleton clusters so downstream preference
/// scores are defined for every node.
///
/// Runs in three order-independent phases: core detection, connected
/// components over core points, then border attachment to the cluster of the
/// most similar core neighbor (ties to the smallest core index). Cluster ids
/// follow ascending node order of first membership.
inline ClusterAssignment dbscan(const SparseSimilarity& sim, double eps,
                                std::uint32_t min_pts) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("dbscan eps must be in (0, 1]");
  if (min_pts < 1) throw std::invalid_argument("dbscan min_pts must be >= 1");

  const std::size_t n = sim.num_nodes();
  const double min_sim = 1.0 - eps;  // reachable iff stored and score >= min_sim
  const auto reachable = [&](double score) { return score >= min_sim; };

  std::vector<char> core(n, 0);
  for (std::size_t a = 0; a < n; ++a) {
    const auto r = sim.row(static_cast<NodeId>(a));
    std::uint32_t count = 1;  // the point itself
    for (double s : r.scores)
      if (reachable(s)) ++count;
    core[a] = count >= min_pts;
  }

  constexpr std::uint32_t kUnassigned = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> cluster_of(n, kUnassigned);
  std::uint32_t next_cluster = 0;

  // Connected components of core points under eps-reachability.
  std::deque<NodeId> queue;
  for (std::size_t a = 0; a < n; ++a) {
    if (!core[a] || cluster_of[a] != kUnassigned) continue;
    const std::uint32_t c = next_cluster++;
    cluster_of[a] = c;
    queue.push_back(static_cast<NodeId>(a));
    while (!queue.empty()) {
      const NodeId p = queue.front();
      queue.pop_front();
      const auto r = sim.row(p);
      for (std::size_t k = 0; k < r.neighbors.size(); ++k) {
        const NodeId q = r.neighbors[k];
        if (!reachable(r.scores[k]) || !core[q] || cluster_of[q] != kUnassigned) continue;
        cluster_of[q] = c;
        queue.push_back(q);
      }
    }
  }

  // Border points join the cluster of their most similar core neighbor.
  for (std::size_t a = 0; a < n; ++a) {
    if (core[a]) continue;
    const auto r = sim.row(static_cast<NodeId>(a));
    double best = 0.0;
    NodeId best_core = 0;
    bool found = false;
    for (std::size_t k = 0; k < r.neighbors.size(); ++k) {
      const NodeId q = r.neighbors[k];
      if (!reachable(r.scores[k]) || !core[q]) continue;
      if (!found || r.scores[k] > best || (r.scores[k] == best && q < best_core)) {
        best = r.scores[k];
        best_core = q;
        found = true;
      }
    }
    if (found) cluster_of[a] = cluster_of[best_core];
  }

  // Remaining noise points become singleton clusters.
  for (std::size_t a = 0; a < n; ++a)
    if (cluster_of[a] == kUnassigned) cluster_of[a] = next_cluster++;

  ClusterAssignment out;
  out.side = sim.side();
  out.cluster_of = std::move(cluster_of);
  out.cluster_sizes.assign(next_cluster, 0);
  for (std::uint32_t c : out.cluster_of) ++out.cluster_sizes[c];
  return out;
}

/// Dense matrix of edge counts between every (user cluster, item cluster)
/// pair. Entries sum to the edge count of the source graph.
class ClusterScoreMatrix {
 public:
  ClusterScoreMatrix() = default;
  ClusterScoreMatrix(std::uint32_t rows, std::uint32_t cols)
      : rows_(rows), cols_(cols), counts_(static_cast<std::size_t>(rows) * cols, 0) {}

  std::uint32_t rows() const { return rows_; }
  std::uint32_t cols() const { return cols_; }

  std::uint64_t at(std::uint32_t user_cluster, std::uint32_t item_cluster) const {
    return counts_[static_cast<std::size_t>(user_cluster) * cols_ + item_cluster];
  }
  std::uint64_t& at(std::uint32_t user_cluster, std::uint32_t item_cluster) {
    return counts_[static_cast<std::size_t>(user_cluster) * cols_ + item_cluster];
  }

  std::span<const std::uint64_t> row(std::uint32_t user_cluster) const {
    return {counts_.data() + static_cast<std::size_t>(user_cluster) * cols_, cols_};
  }

  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (std::uint64_t v : counts_) sum += v;
    return sum;
  }

 private:
  std::uint32_t rows_ = 0;
  std::uint32_t cols_ = 0;
  std::vector<std::uint64_t> counts_;
};

/// Counts edges between every user-cluster / item-cluster pair.
inline ClusterScoreMatrix cluster_scores(const InteractionGraph& g,
                                         const ClusterAssignment& users,
                                         const ClusterAssignment& items) {
  if (users.side != Side::Users || items.side != Side::Items)
    throw std::invalid_argument("cluster_scores: assignments have wrong sides");
  if (users.num_nodes() != g.num_users() || items.num_nodes() != g.num_items())
    throw DataError("cluster_scores: assignment sizes do not match the graph");
  constexpr std::size_t kMaxCells = std::size_t{1} << 27;  // 128M * 8B = 1 GiB
  const std::size_t cells =
      static_cast<std::size_t>(users.num_clusters()) * items.num_clusters();
  if (cells > kMaxCells)
    throw DataError("cluster score matrix would need " + std::to_string(cells) +
                    " cells; coarsen the clustering (larger eps / smaller min_pts)");
  ClusterScoreMatrix e(users.num_clusters(), items.num_clusters());
  for (NodeId u = 0; u < g.num_users(); ++u) {
    const std::uint32_t a = users.cluster_of[u];
    for (NodeId i : g.items_of(u)) ++e.at(a, items.cluster_of[i]);
  }
  return e;
}

/// Per user cluster, a probability over all items: the weight of item i is
/// e(c_u, c_i) / |c_i| * d_i, normalized to sum 1. Clusters whose weights all
/// vanish fall back to the uniform distribution. Rows are stored in factored
/// form (per-item-cluster coefficient times item degree), so a row never
/// materializes unless asked for.
class PreferenceDistribution {
 public:
  PreferenceDistribution() = default;

  PreferenceDistribution(std::uint32_t num_user_clusters, std::uint32_t num_items,
                         std::vector<double> kappa, std::vector<std::uint32_t> item_cluster,
                         std::vector<double> item_degree, std::uint32_t num_item_clusters)
      : num_user_clusters_(num_user_clusters),
        num_items_(num_items),
        num_item_clusters_(num_item_clusters),
        kappa_(std::move(kappa)),
        item_cluster_(std::move(item_cluster)),
        item_degree_(std::move(item_degree)) {
    inv_norm_.assign(num_user_clusters_, 0.0);
    uniform_.assign(num_user_clusters_, 0);
    for (std::uint32_t a = 0; a < num_user_clusters_; ++a) {
      const double* row = kappa_.data() + static_cast<std::size_t>(a) * num_item_clusters_;
      double z = 0.0;
      for (std::uint32_t i = 0; i < num_items_; ++i)
        z += row[item_cluster_[i]] * item_degree_[i];
      if (z > 0.0) {
        inv_norm_[a] = 1.0 / z;
      } else {
        uniform_[a] = 1;
        inv_norm_[a] = num_items_ > 0 ? 1.0 / static_cast<double>(num_items_) : 0.0;
      }
    }
  }

  std::uint32_t num_user_clusters() const { return num_user_clusters_; }
  std::uint32_t num_items() const { return num_items_; }
  bool is_uniform(std::uint32_t user_cluster) const { return uniform_[user_cluster] != 0; }

  double prob(std::uint32_t user_cluster, NodeId item) const {
    return row_view(user_cluster).prob(item);
  }

  // Zero-overhead accessor for hot loops: all indirection resolved once.
  struct RowView {
    const double* kappa;
    const std::uint32_t* item_cluster;
    const double* item_degree;
    double inv_norm;
    bool uniform;

    double prob(NodeId item) const {
      if (uniform) return inv_norm;
      return kappa[item_cluster[item]] * item_degree[item] * inv_norm;
    }
  };

  RowView row_view(std::uint32_t user_cluster) const {
    return
        {kappa_.data() + static_cast<std::size_t>(user_cluster) * num_item_clusters_,
         item_cluster_.data(), item_degree_.data(), inv_norm_[user_cluster],
         uniform_[user_cluster] != 0};
  }

  void materialize(std::uint32_t user_cluster, std::span<double> out) const {
    const auto view = row_view(user_cluster);
    for (NodeId i = 0; i < num_items_; ++i) out[i] = view.prob(i);
  }

  /// Items with nonzero probability, ascending item index.
  std::vector<std::pair<NodeId, double>> sparse_row(std::uint32_t user_cluster) const {
    const auto view = row_view(user_cluster);
    std::vector<std::pair<NodeId, double>> out;
    for (NodeId i = 0; i < num_items_; ++i) {
      const double p = view.prob(i);
      if (p > 0.0) out.emplace_back(i, p);
    }
    return out;
  }

 private:
  std::uint32_t num_user_clusters_ = 0;
  std::uint32_t num_items_ = 0;
  std::uint32_t num_item_clusters_ = 0;
  std::vector<double> kappa_;         // num_user_clusters x num_item_clusters
  std::vector<std::uint32_t> item_cluster_;
  std::vector<double> item_degree_;
  std::vector<double> inv_norm_;
  std::vector<char> uniform_;
};

/// Builds the per-user-cluster item distribution from the cluster score
/// matrix, the item clustering, and the item degrees of the source graph.
inline PreferenceDistribution preference(const ClusterScoreMatrix& e,
                                         const ClusterAssignment& items,
                                         std::span<const std::uint32_t> item_degrees) {
  if (items.side != Side::Items)
    throw std::invalid_argument("preference: item assignment required");
  if (item_degrees.size() != items.num_nodes())
    throw DataError("preference: item degree vector does not match assignment");
  if (e.cols() != items.num_clusters())
    throw DataError("preference: cluster score matrix does not match item clustering");

  const std::uint32_t num_item_clusters = items.num_clusters();
  std::vector<double> kappa(static_cast<std::size_t>(e.rows()) * num_item_clusters);
  for (std::uint32_t a = 0; a < e.rows(); ++a)
    for (std::uint32_t b = 0; b < num_item_clusters; ++b)
      kappa[static_cast<std::size_t>(a) * num_item_clusters + b] =
          static_cast<double>(e.at(a, b)) / static_cast<double>(items.cluster_sizes[b]);

  std::vector<double> degree(item_degrees.size());
  for (std::size_t i = 0; i < item_degrees.size(); ++i)
    degree[i] = static_cast<double>(item_degrees[i]);

  return PreferenceDistribution(e.rows(), static_cast<std::uint32_t>(items.num_nodes()),
                                std::move(kappa), items.cluster_of, std::move(degree),
                                num_item_clusters);
}

/// TSV dump `node_idx<TAB>cluster_idx`.
inline std::string assignment_to_tsv(const ClusterAssignment& a) {
  std::string out;
  for (std::size_t v = 0; v < a.cluster_of.size(); ++v)
    out += std::to_string(v) + "\t" + std::to_string(a.cluster_of[v]) + "\n";
  return out;
}

inline ClusterAssignment assignment_from_tsv(const std::string& text, Side side) {
  ClusterAssignment out;
  out.side = side;
  std::size_t pos = 0, line_no = 0;
  std::uint32_t max_cluster = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    const std::string ctx = "cluster assignment line " + std::to_string(line_no);
    std::string_view node_tok, cluster_tok;
    if (!detail::split_two(line, "\t", node_tok, cluster_tok))
      throw DataError(ctx + ": malformed line");
    const std::uint32_t node = detail::parse_u32(node_tok, ctx);
    const std::uint32_t cluster = detail::parse_u32(cluster_tok, ctx);
    if (node != out.cluster_of.size()) throw DataError(ctx + ": nodes out of order");
    out.cluster_of.push_back(cluster);
    max_cluster = std::max(max_cluster, cluster);
  }
  if (!out.cluster_of.empty()) {
    out.cluster_sizes.assign(max_cluster + 1, 0);
    for (std::uint32_t c : out.cluster_of) ++out.cluster_sizes[c];
    for (std::uint32_t s : out.cluster_sizes)
      if (s == 0) throw DataError("cluster assignment has an empty cluster id");
  }
  return out;
}

/// CSV dump of the cluster score matrix, one row of counts per user cluster.
inline std::string cluster_scores_to_csv(const ClusterScoreMatrix& e) {
  std::string out;
  for (std::uint32_t a = 0; a < e.rows(); ++a) {
    for (std::uint32_t b = 0; b < e.cols(); ++b) {
      if (b > 0) out.push_back(',');
      out += std::to_string(e.at(a, b));
    }
    out.push_back('\n');
  }
  return out;
}

inline ClusterScoreMatrix cluster_scores_from_csv(const std::string& text) {
  std::vector<std::vector<std::uint64_t>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    std::vector<std::uint64_t> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string_view::npos) comma = line.size();
      std::uint64_t v = 0;
      const auto* first = line.data() + start;
      const auto* last = line.data() + comma;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || ptr != last)
        throw DataError("cluster score csv: bad count '" +
                        std::string(line.substr(start, comma - start)) + "'");
      row.push_back(v);
      start = comma + 1;
      if (comma == line.size()) break;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("cluster score csv is empty");
  ClusterScoreMatrix e(static_cast<std::uint32_t>(rows.size()),
                       static_cast<std::uint32_t>(rows[0].size()));
  for (std::uint32_t a = 0; a < e.rows(); ++a) {
    if (rows[a].size() != e.cols()) throw DataError("cluster score csv is ragged");
    for (std::uint32_t b = 0; b < e.cols(); ++b) e.at(a, b) = rows[a][b];
  }
  return e;
}

}  // namespace peco
