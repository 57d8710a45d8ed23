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

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <numeric>
#include <random>
#include <set>

#include "peco/clustering.hpp"
#include "support/fixtures.hpp"

using namespace peco;
using peco::testing::random_graph;
using peco::testing::t1;
using peco::testing::t1_item_clusters;
using peco::testing::t1_user_clusters;

namespace {

// Partition as a set of node sets, for order-insensitive comparison.
std::set<std::set<NodeId>> partition_of(const ClusterAssignment& a) {
  std::map<std::uint32_t, std::set<NodeId>> by_cluster;
  for (NodeId v = 0; v < a.num_nodes(); ++v)
    by_cluster[a.cluster_of[v]].insert(v);
  std::set<std::set<NodeId>> out;
  for (auto& [c, members] : by_cluster) out.insert(std::move(members));
  return out;
}

void check_invariants(const ClusterAssignment& a) {
  const auto total = std::accumulate(a.cluster_sizes.begin(), a.cluster_sizes.end(),
                                     std::size_t{0});
  REQUIRE(total == a.num_nodes());
  for (const auto size : a.cluster_sizes) REQUIRE(size > 0);
  for (const auto c : a.cluster_of) REQUIRE(c < a.num_clusters());
}

}  // namespace

TEST_CASE("chain-linked toy users form one cluster") {
  const auto sim = pairwise_similarity(t1(), Side::Users);
  const auto a = dbscan(sim, 0.7, 1);
  REQUIRE(a.num_clusters() == 1);
  REQUIRE(a.cluster_of == std::vector<std::uint32_t>{0, 0, 0});
  check_invariants(a);
}

TEST_CASE("two cliques of identical users give two clusters") {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < 4; ++u) edges.insert(edges.end(), {{u, 0}, {u, 1}});
  for (NodeId u = 4; u < 8; ++u) edges.insert(edges.end(), {{u, 2}, {u, 3}});
  const InteractionGraph g(8, 4, std::move(edges));
  const auto sim = pairwise_similarity(g, Side::Users);
  const auto a = dbscan(sim, 0.5, 4);
  REQUIRE(a.num_clusters() == 2);
  REQUIRE(a.cluster_of == std::vector<std::uint32_t>{0, 0, 0, 0, 1, 1, 1, 1});
}

TEST_CASE("eps below all distances with min_pts 2 gives singletons") {
  const auto sim = pairwise_similarity(t1(), Side::Users);
  // all positive-similarity pairs sit at distance 2/3 > 0.5
  const auto a = dbscan(sim, 0.5, 2);
  REQUIRE(a.num_clusters() == 3);
  for (const auto size : a.cluster_sizes) REQUIRE(size == 1);
}

TEST_CASE("reach is inclusive at the eps boundary") {
  // similarity exactly 0.5, so the pair sits at distance exactly 0.5
  const InteractionGraph h(2, 4, {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {1, 3}});
  const auto sim_h = pairwise_similarity(h, Side::Users);
  REQUIRE(sim_h.lookup(0, 1) == 0.5);
  const auto joined = dbscan(sim_h, 0.5, 1);
  REQUIRE(joined.num_clusters() == 1);
  const auto apart = dbscan(sim_h, 0.25, 1);  // distance 0.5 > 0.25
  REQUIRE(apart.num_clusters() == 2);
}

TEST_CASE("noise points become singleton clusters") {
  // users 0..2 form a dense group, user 3 shares nothing
  const InteractionGraph g(4, 5,
                           {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 0}, {2, 1}, {3, 4}});
  const auto sim = pairwise_similarity(g, Side::Users);
  const auto a = dbscan(sim, 0.5, 3);
  check_invariants(a);
  REQUIRE(a.num_clusters() == 2);
  REQUIRE(a.cluster_sizes[a.cluster_of[3]] == 1);
}

TEST_CASE("eps 1 clusters the connected components of the similarity graph") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_graph(16, 12, 0, 4, seed + 50);
    const auto sim = pairwise_similarity(g, Side::Users);
    const auto a = dbscan(sim, 1.0, 1);
    check_invariants(a);
    // brute-force components over positive-similarity edges
    std::vector<NodeId> comp(g.num_users(), 0);
    std::iota(comp.begin(), comp.end(), 0);
    bool changed = true;
    while (changed) {
      changed = false;
      for (NodeId u = 0; u < g.num_users(); ++u) {
        const auto row = sim.row(u);
        for (NodeId v : row.neighbors) {
          const NodeId lo = std::min(comp[u], comp[v]);
          if (comp[u] != lo || comp[v] != lo) {
            comp[u] = comp[v] = lo;
            changed = true;
          }
        }
      }
    }
    std::map<NodeId, std::set<NodeId>> expected;
    for (NodeId u = 0; u < g.num_users(); ++u) expected[comp[u]].insert(u);
    std::set<std::set<NodeId>> expected_partition;
    for (auto& [root, members] : expected) expected_partition.insert(std::move(members));
    REQUIRE(partition_of(a) == expected_partition);
  }
}

TEST_CASE("partition is stable under node relabeling") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto g = random_graph(14, 10, 1, 5, seed + 7);
    const std::uint32_t min_pts = 1 + seed % 2;
    const auto base = dbscan(pairwise_similarity(g, Side::Users), 0.8, min_pts);

    // permute user ids and rebuild
    std::vector<NodeId> perm(g.num_users());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < g.num_users(); ++u)
      for (NodeId i : g.items_of(u)) edges.push_back({perm[u], i});
    const InteractionGraph h(g.num_users(), g.num_items(), std::move(edges));
    const auto permuted = dbscan(pairwise_similarity(h, Side::Users), 0.8, min_pts);

    // map the permuted partition back and compare contents
    std::map<std::uint32_t, std::set<NodeId>> by_cluster;
    for (NodeId v = 0; v < permuted.num_nodes(); ++v)
      by_cluster[permuted.cluster_of[perm[v]]].insert(v);
    std::set<std::set<NodeId>> mapped;
    for (auto& [c, members] : by_cluster) mapped.insert(std::move(members));
    REQUIRE(mapped == partition_of(base));
  }
}

TEST_CASE("dbscan precondition errors") {
  const auto sim = pairwise_similarity(t1(), Side::Users);
  REQUIRE_THROWS_AS(dbscan(sim, 0.0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(dbscan(sim, 1.2, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(dbscan(sim, 0.5, 0), std::invalid_argument);
}

TEST_CASE("cluster scores on the toy clustering") {
  const auto g = t1();
  const auto e = cluster_scores(g, t1_user_clusters(), t1_item_clusters());
  REQUIRE(e.rows() == 2);
  REQUIRE(e.cols() == 2);
  REQUIRE(e.at(0, 0) == 3);
  REQUIRE(e.at(0, 1) == 1);
  REQUIRE(e.at(1, 0) == 0);
  REQUIRE(e.at(1, 1) == 2);
  REQUIRE(e.total() == g.num_edges());
}

TEST_CASE("single cluster on each side counts every edge") {
  const auto g = t1();
  const ClusterAssignment cu{Side::Users, {0, 0, 0}, {3}};
  const ClusterAssignment ci{Side::Items, {0, 0, 0, 0}, {4}};
  const auto e = cluster_scores(g, cu, ci);
  REQUIRE(e.rows() == 1);
  REQUIRE(e.at(0, 0) == g.num_edges());
}

TEST_CASE("cluster score totals equal the edge count for random clusterings") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_graph(12, 14, 0, 7, trial + 600);
    const std::uint32_t nu = 1 + rng() % 5, ni = 1 + rng() % 5;
    ClusterAssignment cu{Side::Users, {}, {}};
    ClusterAssignment ci{Side::Items, {}, {}};
    cu.cluster_sizes.assign(nu, 0);
    ci.cluster_sizes.assign(ni, 0);
    for (NodeId u = 0; u < g.num_users(); ++u) {
      cu.cluster_of.push_back(u % nu);
      ++cu.cluster_sizes[u % nu];
    }
    for (NodeId i = 0; i < g.num_items(); ++i) {
      ci.cluster_of.push_back(i % ni);
      ++ci.cluster_sizes[i % ni];
    }
    if (std::find(cu.cluster_sizes.begin(), cu.cluster_sizes.end(), 0u) !=
            cu.cluster_sizes.end() ||
        std::find(ci.cluster_sizes.begin(), ci.cluster_sizes.end(), 0u) !=
            ci.cluster_sizes.end())
      continue;  // modulo assignment left a cluster empty
    const auto e = cluster_scores(g, cu, ci);
    REQUIRE(e.total() == g.num_edges());
  }
}

TEST_CASE("cluster scores reject mismatched assignments") {
  const auto g = t1();
  ClusterAssignment wrong_size{Side::Users, {0, 0}, {2}};
  REQUIRE_THROWS_AS(cluster_scores(g, wrong_size, t1_item_clusters()), DataError);
  REQUIRE_THROWS_AS(cluster_scores(g, t1_item_clusters(), t1_user_clusters()),
                    std::invalid_argument);
}

TEST_CASE("preference distribution on the toy clustering") {
  const auto g = t1();
  const auto e = cluster_scores(g, t1_user_clusters(), t1_item_clusters());
  const auto q = preference(e, t1_item_clusters(), degrees(g, Side::Items));
  REQUIRE(q.num_user_clusters() == 2);
  // cluster A = {u0, u1}: weights (1.5, 3, 1, 0.5) -> (0.25, 0.5, 1/6, 1/12)
  REQUIRE(q.prob(0, 0) == Catch::Approx(0.25).epsilon(1e-12));
  REQUIRE(q.prob(0, 1) == Catch::Approx(0.5).epsilon(1e-12));
  REQUIRE(q.prob(0, 2) == Catch::Approx(1.0 / 6.0).epsilon(1e-12));
  REQUIRE(q.prob(0, 3) == Catch::Approx(1.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("preference rows sum to one") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = random_graph(15, 12, 1, 6, seed + 40);
    const auto sim_u = pairwise_similarity(g, Side::Users);
    const auto sim_i = pairwise_similarity(g, Side::Items);
    const auto cu = dbscan(sim_u, 0.8, 2);
    const auto ci = dbscan(sim_i, 0.8, 2);
    const auto e = cluster_scores(g, cu, ci);
    const auto q = preference(e, ci, degrees(g, Side::Items));
    for (std::uint32_t a = 0; a < q.num_user_clusters(); ++a) {
      double sum = 0.0;
      for (NodeId i = 0; i < q.num_items(); ++i) {
        const double p = q.prob(a, i);
        REQUIRE(p >= 0.0);
        sum += p;
      }
      REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("all-singleton clusters reduce to own items weighted by degree") {
  const auto g = t1();
  ClusterAssignment cu{Side::Users, {0, 1, 2}, {1, 1, 1}};
  ClusterAssignment ci{Side::Items, {0, 1, 2, 3}, {1, 1, 1, 1}};
  const auto e = cluster_scores(g, cu, ci);
  const auto q = preference(e, ci, degrees(g, Side::Items));
  // user 0 interacts with items {0, 1} of degrees (1, 2): q = (1/3, 2/3, 0, 0)
  REQUIRE(q.prob(0, 0) == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
  REQUIRE(q.prob(0, 1) == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  REQUIRE(q.prob(0, 2) == 0.0);
  REQUIRE(q.prob(0, 3) == 0.0);
}

TEST_CASE("preference is proportional to degree within an item cluster") {
  const auto g = t1();
  const auto e = cluster_scores(g, t1_user_clusters(), t1_item_clusters());
  const auto q = preference(e, t1_item_clusters(), degrees(g, Side::Items));
  // items 0 and 1 share a cluster with degrees 1 and 2
  REQUIRE(q.prob(0, 1) / q.prob(0, 0) == Catch::Approx(2.0).epsilon(1e-12));
  REQUIRE(q.prob(1, 3) / q.prob(1, 2) == Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero-edge user cluster falls back to uniform") {
  // user 2 is isolated and alone in its cluster
  const InteractionGraph g(3, 2, {{0, 0}, {0, 1}, {1, 0}});
  ClusterAssignment cu{Side::Users, {0, 0, 1}, {2, 1}};
  ClusterAssignment ci{Side::Items, {0, 0}, {2}};
  const auto e = cluster_scores(g, cu, ci);
  REQUIRE(e.at(1, 0) == 0);
  const auto q = preference(e, ci, degrees(g, Side::Items));
  REQUIRE(q.is_uniform(1));
  REQUIRE(q.prob(1, 0) == 0.5);
  REQUIRE(q.prob(1, 1) == 0.5);
}

TEST_CASE("assignment and score matrix dumps round trip") {
  const auto a = t1_user_clusters();
  const auto text = assignment_to_tsv(a);
  REQUIRE(text == "0\t0\n1\t0\n2\t1\n");
  const auto back = assignment_from_tsv(text, Side::Users);
  REQUIRE(back.cluster_of == a.cluster_of);
  REQUIRE(back.cluster_sizes == a.cluster_sizes);

  const auto e = cluster_scores(t1(), a, t1_item_clusters());
  const auto csv = cluster_scores_to_csv(e);
  REQUIRE(csv == "3,1\n0,2\n");
  const auto e2 = cluster_scores_from_csv(csv);
  REQUIRE(e2.at(0, 0) == 3);
  REQUIRE(e2.total() == 6);
}
