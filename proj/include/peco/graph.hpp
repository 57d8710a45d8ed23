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
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "peco/rng.hpp"

namespace peco {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;  // (user, item), dense indices

enum class Side { Users, Items };

// Raised for malformed or inconsistent input data (files, artifacts,
// mismatched dimensions between pipeline stages).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable bipartite interaction graph in compressed sparse row form,
/// stored in both orientations: user -> sorted distinct items and
/// item -> sorted distinct users. Safe to share across concurrent readers.
class InteractionGraph {
 public:
  InteractionGraph() = default;

  // `edges` may contain duplicates; they collapse to a single edge. Node
  // counts are fixed up front so isolated nodes survive (samplers copy the
  // node set verbatim).
  InteractionGraph(NodeId num_users, NodeId num_items, std::vector<Edge> edges,
                   std::vector<std::string> user_labels = {},
                   std::vector<std::string> item_labels = {})
      : num_users_(num_users),
        num_items_(num_items),
        user_labels_(std::move(user_labels)),
        item_labels_(std::move(item_labels)) {
    if (!user_labels_.empty() && user_labels_.size() != num_users_)
      throw std::invalid_argument("user label count does not match num_users");
    if (!item_labels_.empty() && item_labels_.size() != num_items_)
      throw std::invalid_argument("item label count does not match num_items");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (const auto& [u, i] : edges) {
      if (u >= num_users_) throw std::invalid_argument("user index out of bounds");
      if (i >= num_items_) throw std::invalid_argument("item index out of bounds");
    }
    build_csr(edges);
  }

  NodeId num_users() const { return num_users_; }
  NodeId num_items() const { return num_items_; }
  std::size_t num_edges() const { return user_targets_.size(); }

  NodeId num_nodes(Side side) const {
    return side == Side::Users ? num_users_ : num_items_;
  }

  std::span<const NodeId> items_of(NodeId user) const {
    return {user_targets_.data() + user_offsets_[user],
            user_targets_.data() + user_offsets_[user + 1]};
  }

  std::span<const NodeId> users_of(NodeId item) const {
    return {item_targets_.data() + item_offsets_[item],
            item_targets_.data() + item_offsets_[item + 1]};
  }

  std::span<const NodeId> neighbors(Side side, NodeId node) const {
    return side == Side::Users ? items_of(node) : users_of(node);
  }

  bool has_edge(NodeId user, NodeId item) const {
    const auto row = items_of(user);
    return std::binary_search(row.begin(), row.end(), item);
  }

  // Edges in canonical (user, item) order.
  std::vector<Edge> edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (NodeId u = 0; u < num_users_; ++u)
      for (NodeId i : items_of(u)) out.emplace_back(u, i);
    return out;
  }

  const std::vector<std::string>& user_labels() const { return user_labels_; }
  const std::vector<std::string>& item_labels() const { return item_labels_; }

  std::string user_label(NodeId u) const {
    return user_labels_.empty() ? std::to_string(u) : user_labels_[u];
  }
  std::string item_label(NodeId i) const {
    return item_labels_.empty() ? std::to_string(i) : item_labels_[i];
  }

  bool operator==(const InteractionGraph& other) const {
    return num_users_ == other.num_users_ && num_items_ == other.num_items_ &&
           user_offsets_ == other.user_offsets_ &&
           user_targets_ == other.user_targets_;
  }

 private:
  void build_csr(const std::vector<Edge>& edges) {
    user_offsets_.assign(num_users_ + 1, 0);
    item_offsets_.assign(num_items_ + 1, 0);
    for (const auto& [u, i] : edges) {
      ++user_offsets_[u + 1];
      ++item_offsets_[i + 1];
    }
    for (NodeId u = 0; u < num_users_; ++u) user_offsets_[u + 1] += user_offsets_[u];
    for (NodeId i = 0; i < num_items_; ++i) item_offsets_[i + 1] += item_offsets_[i];
    user_targets_.resize(edges.size());
    item_targets_.resize(edges.size());
    std::vector<std::size_t> item_fill(item_offsets_.begin(), item_offsets_.end() - 1);
    std::size_t pos = 0;
    for (const auto& [u, i] : edges) {
      user_targets_[pos++] = i;  // edges arrive sorted by (user, item)
      item_targets_[item_fill[i]++] = u;
    }
  }

  NodeId num_users_ = 0;
  NodeId num_items_ = 0;
  std::vector<std::size_t> user_offsets_;
  std::vector<NodeId> user_targets_;
  std::vector<std::size_t> item_offsets_;
  std::vector<NodeId> item_targets_;
  std::vector<std::string> user_labels_;
  std::vector<std::string> item_labels_;
};

/// Degree of every node on one side. Sum over either side equals |E|.
inline std::vector<std::uint32_t> degrees(const InteractionGraph& g, Side side) {
  const NodeId n = g.num_nodes(side);
  std::vector<std::uint32_t> out(n);
  for (NodeId v = 0; v < n; ++v)
    out[v] = static_cast<std::uint32_t>(g.neighbors(side, v).size());
  return out;
}

/// Train/validation/test graphs over the same node sets. The three edge sets
/// are pairwise disjoint and their union is the source edge set.
struct DatasetSplit {
  InteractionGraph train;
  InteractionGraph validation;
  InteractionGraph test;
};

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

/// Per-user random partition of N(u): floor(validation fraction * |N(u)|)
/// edges go to validation, the same rule for test, the remainder to train.
/// Users with fewer than 3 interactions keep everything in train and are
/// reported through `warn` as one aggregate message.
inline DatasetSplit split(const InteractionGraph& g, SplitFractions fractions,
                          std::uint64_t seed,
                          const std::function<void(const std::string&)>& warn = {}) {
  const double sum = fractions.train + fractions.validation + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
  if (fractions.train < 0 || fractions.validation < 0 || fractions.test < 0)
    throw std::invalid_argument("split fractions must be non-negative");

  std::vector<Edge> train_edges, val_edges, test_edges;
  train_edges.reserve(g.num_edges());
  std::vector<std::uint32_t> shuffled;
  std::size_t small_users = 0;
  for (NodeId u = 0; u < g.num_users(); ++u) {
    const auto row = g.items_of(u);
    const std::size_t d = row.size();
    if (d < 3) {
      if (d > 0) ++small_users;
      for (NodeId i : row) train_edges.emplace_back(u, i);
      continue;
    }
    const auto n_val = static_cast<std::size_t>(fractions.validation * static_cast<double>(d));
    const auto n_test = static_cast<std::size_t>(fractions.test * static_cast<double>(d));
    Rng rng(stream_seed(seed, u));
    rng.sample_without_replacement(row, d, shuffled);
    std::size_t k = 0;
    for (; k < n_val; ++k) val_edges.emplace_back(u, shuffled[k]);
    for (; k < n_val + n_test; ++k) test_edges.emplace_back(u, shuffled[k]);
    for (; k < d; ++k) train_edges.emplace_back(u, shuffled[k]);
  }
  if (small_users > 0 && warn)
    warn(std::to_string(small_users) +
         " user(s) with fewer than 3 interactions: all their edges kept in train");

  const NodeId nu = g.num_users(), ni = g.num_items();
  return DatasetSplit{
      InteractionGraph(nu, ni, std::move(train_edges), g.user_labels(), g.item_labels()),
      InteractionGraph(nu, ni, std::move(val_edges), g.user_labels(), g.item_labels()),
      InteractionGraph(nu, ni, std::move(test_edges), g.user_labels(), g.item_labels())};
}

}  // namespace peco
