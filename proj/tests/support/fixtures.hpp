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

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "peco/clustering.hpp"
#include "peco/graph.hpp"

namespace peco::testing {

// The four-item toy graph used throughout the tests:
//   user 0: {0, 1}, user 1: {1, 2}, user 2: {2, 3}
// Degrees: items [1, 2, 2, 1]. Jaccard: d(u0,u1) = d(u1,u2) = 1/3,
// S(0,1) = S(2,3) = 1/2, S(1,2) = 1/3.
inline InteractionGraph t1() {
  return InteractionGraph(3, 4, {{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 2}, {2, 3}});
}

// The clustering the toy examples assume: users {0,1} | {2},
// items {0,1} | {2,3}. Cluster scores come out as [[3,1],[0,2]].
inline ClusterAssignment t1_user_clusters() {
  return ClusterAssignment{Side::Users, {0, 0, 1}, {2, 1}};
}

inline ClusterAssignment t1_item_clusters() {
  return ClusterAssignment{Side::Items, {0, 0, 1, 1}, {2, 2}};
}

// Random bipartite graph: every user gets a degree in [min_degree,
// max_degree] and that many distinct uniform items. Degenerate inputs for
// property tests; not meant to look like real data.
inline InteractionGraph random_graph(NodeId num_users, NodeId num_items,
                                     std::uint32_t min_degree, std::uint32_t max_degree,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> degree_dist(min_degree, max_degree);
  std::uniform_int_distribution<NodeId> item_dist(0, num_items - 1);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < num_users; ++u) {
    const std::uint32_t d = std::min<std::uint32_t>(degree_dist(rng), num_items);
    std::set<NodeId> items;
    while (items.size() < d) items.insert(item_dist(rng));
    for (NodeId i : items) edges.emplace_back(u, i);
  }
  if (edges.empty()) edges.emplace_back(0, 0);
  return InteractionGraph(num_users, num_items, std::move(edges));
}

// Small deterministic stand-ins for the four public datasets, with the same
// density ordering (movielens densest, yelp sparsest).
inline std::vector<InteractionGraph> dataset_toy_standins() {
  return {
      random_graph(24, 16, 2, 4, 101),   // amazon-beauty stand-in
      random_graph(20, 12, 4, 9, 202),   // movielens-1m stand-in
      random_graph(40, 40, 1, 3, 303),   // yelp2018 stand-in
      random_graph(36, 30, 1, 3, 404),   // amazon-cds stand-in
  };
}

// Unique scratch directory, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("peco_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace peco::testing
