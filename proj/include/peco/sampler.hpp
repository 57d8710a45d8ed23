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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "peco/clustering.hpp"
#include "peco/edge_list_io.hpp"
#include "peco/graph.hpp"
#include "peco/parallel.hpp"
#include "peco/rng.hpp"
#include "peco/similarity.hpp"

namespace peco {

struct SamplerConfig {
  double alpha = 0.0;      // concurrence trade-off weight, >= 0
  double retain = 0.0;     // fraction of the original item set kept verbatim, in [0, 1]
  std::uint32_t ensemble_size = 1;
  std::uint64_t seed = 0;
  // When the combined candidate mass vanishes, draw uniformly instead of
  // failing. Off only for debugging; the pipeline never produces zero mass.
  bool uniform_fallback = true;

  void validate() const {
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (retain < 0.0 || retain > 1.0) throw std::invalid_argument("retain must be in [0, 1]");
    if (ensemble_size < 1) throw std::invalid_argument("ensemble_size must be >= 1");
  }
};

struct Provenance {
  std::string model;  // "peco" or "node-copy"
  double alpha = 0.0;
  double retain = 0.0;
  double copy_prob = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t sample_index = 0;
  std::string source_hash;

  bool operator==(const Provenance&) const = default;
};

/// A sampled graph over the source graph's node sets, with the configuration
/// that produced it.
struct SampledGraph {
  InteractionGraph graph;
  Provenance provenance;
};

// Reusable per-worker buffers for sampling; sized to the item catalog once
// and selectively un-dirtied after each user, so per-user cost stays
// proportional to work done. The dense preference row is keyed by user
// cluster and survives across users of the same cluster; the draw loops mask
// excluded items through `drawn` instead of mutating the row.
struct SamplerScratch {
  std::vector<double> concurrence_sum;  // running sum of S(i, j) over j in the set
  std::vector<char> drawn;
  std::vector<double> preference_row;
  std::uint32_t cached_cluster = kNoCluster;
  std::vector<NodeId> init_items;

  static constexpr std::uint32_t kNoCluster = 0xffffffffu;

  void resize(std::size_t num_items) {
    concurrence_sum.assign(num_items, 0.0);
    drawn.assign(num_items, 0);
    preference_row.assign(num_items, 0.0);
    cached_cluster = kNoCluster;
  }
};

namespace detail {

inline void add_to_sample(NodeId item, const SparseSimilarity& concurrence,
                          SamplerScratch& scratch, std::vector<NodeId>& sample) {
  scratch.drawn[item] = 1;
  sample.push_back(item);
  const auto row = concurrence.row(item);
  for (std::size_t k = 0; k < row.neighbors.size(); ++k) {
    const NodeId other = row.neighbors[k];
    if (!scratch.drawn[other]) scratch.concurrence_sum[other] += row.scores[k];
  }
}

inline void reset_scratch(const SparseSimilarity& concurrence, SamplerScratch& scratch,
                          const std::vector<NodeId>& sample) {
  for (NodeId j : sample) {
    scratch.drawn[j] = 0;
    const auto row = concurrence.row(j);
    for (NodeId other : row.neighbors) scratch.concurrence_sum[other] = 0.0;
  }
}

}  // namespace detail

/// Samples one user's item set. The result has exactly |N(u)| distinct
/// items: floor(retain * |N(u)|) uniformly chosen originals first, then one
/// item per iteration drawn from the remaining catalog with probability
/// proportional to q_u(i) + alpha * s(i), where s(i) is the mean concurrence
/// of i against the items drawn so far (0 while the set is empty). Items are
/// returned in draw order.
///
/// `scratch` must be resized to the item catalog and is left clean on return.
inline std::vector<NodeId> peco_sample_user(NodeId user, const InteractionGraph& g,
                                            const PreferenceDistribution& q,
                                            const SparseSimilarity& concurrence,
                                            const SamplerConfig& cfg,
                                            std::uint32_t user_cluster, Rng& rng,
                                            SamplerScratch& scratch) {
  const auto own = g.items_of(user);
  const std::size_t target = own.size();
  const std::size_t num_items = g.num_items();
  std::vector<NodeId> sample;
  sample.reserve(target);
  if (target == 0) return sample;

  const auto keep = static_cast<std::size_t>(cfg.retain * static_cast<double>(target));
  rng.sample_without_replacement(own, keep, scratch.init_items);
  for (NodeId j : scratch.init_items)
    detail::add_to_sample(j, concurrence, scratch, sample);

  if (scratch.cached_cluster != user_cluster) {
    q.materialize(user_cluster, scratch.preference_row);
    scratch.cached_cluster = user_cluster;
  }
  const double* q_row = scratch.preference_row.data();
  const double* conc = scratch.concurrence_sum.data();
  const char* drawn = scratch.drawn.data();

  while (sample.size() < target) {
    const double conc_weight =
        (cfg.alpha > 0.0 && !sample.empty())
            ? cfg.alpha / static_cast<double>(sample.size())
            : 0.0;

    double total = 0.0;
    for (std::size_t i = 0; i < num_items; ++i) {
      if (drawn[i]) continue;
      total += q_row[i] + conc_weight * conc[i];
    }

    NodeId pick = 0;
    if (total > 0.0) {
      const double threshold = rng.next_double() * total;
      double acc = 0.0;
      NodeId last_weighted = 0;
      bool found = false;
      for (std::size_t i = 0; i < num_items; ++i) {
        if (drawn[i]) continue;
        const double w = q_row[i] + conc_weight * conc[i];
        if (w > 0.0) last_weighted = static_cast<NodeId>(i);
        acc += w;
        if (threshold < acc) {
          pick = static_cast<NodeId>(i);
          found = true;
          break;
        }
      }
      // Rounding can leave the threshold at the accumulated total; fall back
      // to the last positively weighted candidate.
      if (!found) pick = last_weighted;
    } else {
      if (!cfg.uniform_fallback)
        throw std::runtime_error("zero sampling mass for user " + std::to_string(user) +
                                 " and uniform fallback is disabled");
      const std::uint64_t skip = rng.next_index(num_items - sample.size());
      std::uint64_t seen = 0;
      for (std::size_t i = 0; i < num_items; ++i) {
        if (drawn[i]) continue;
        if (seen++ == skip) {
          pick = static_cast<NodeId>(i);
          break;
        }
      }
    }
    detail::add_to_sample(pick, concurrence, scratch, sample);
  }

  detail::reset_scratch(concurrence, scratch, sample);
  return sample;
}

/// Samples a whole graph: the node sets are copied from the source and each
/// user's item set is drawn independently from an RNG stream derived from
/// (seed, user), so results do not depend on execution order or thread
/// count.
inline SampledGraph peco_sample_graph(const InteractionGraph& g,
                                      const PreferenceDistribution& q,
                                      const SparseSimilarity& concurrence,
                                      const ClusterAssignment& users,
                                      const SamplerConfig& cfg, std::uint64_t seed,
                                      unsigned threads = 1) {
  cfg.validate();
  if (users.num_nodes() != g.num_users())
    throw DataError("peco_sample_graph: user clustering does not match the graph");
  if (q.num_items() != g.num_items())
    throw DataError("peco_sample_graph: preference distribution does not match the graph");

  std::vector<std::vector<NodeId>> per_user(g.num_users());
  parallel_for(g.num_users(), threads, [&](unsigned, std::size_t begin, std::size_t end) {
    // Users of one cluster share a dense preference row; visiting them
    // grouped together keeps the cached row hot. Order does not affect the
    // output because every user draws from its own RNG stream.
    std::vector<NodeId> order(end - begin);
    std::iota(order.begin(), order.end(), static_cast<NodeId>(begin));
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      if (users.cluster_of[a] != users.cluster_of[b])
        return users.cluster_of[a] < users.cluster_of[b];
      return a < b;
    });
    SamplerScratch scratch;
    scratch.resize(g.num_items());
    for (NodeId u : order) {
      Rng rng(stream_seed(seed, u));
      per_user[u] = peco_sample_user(u, g, q, concurrence, cfg, users.cluster_of[u],
                                     rng, scratch);
      if (per_user[u].size() != g.items_of(u).size())
        throw std::logic_error("sampled set size must equal the original degree");
    }
  });

  std::vector<Edge> edges;
  edges.reserve(g.num_edges());
  for (NodeId u = 0; u < g.num_users(); ++u)
    for (NodeId i : per_user[u]) edges.emplace_back(u, i);

  SampledGraph out;
  out.graph = InteractionGraph(g.num_users(), g.num_items(), std::move(edges),
                               g.user_labels(), g.item_labels());
  out.provenance = Provenance{"peco", cfg.alpha, cfg.retain, 0.0,
                              seed,   0,         graph_hash(g)};
  return out;
}

/// Node-copy baseline: with probability copy_prob a user's item set is
/// replaced wholesale by the item set of a donor drawn proportionally to
/// user-user similarity; users without any similar user keep their own set.
/// Copied users generally change degree, unlike the iterative sampler.
inline SampledGraph node_copy_sample(const InteractionGraph& g,
                                     const SparseSimilarity& user_similarity,
                                     double copy_prob, std::uint64_t seed,
                                     unsigned threads = 1) {
  if (copy_prob < 0.0 || copy_prob > 1.0)
    throw std::invalid_argument("copy probability must be in [0, 1]");
  if (user_similarity.side() != Side::Users ||
      user_similarity.num_nodes() != g.num_users())
    throw DataError("node_copy_sample: user similarity does not match the graph");

  std::vector<NodeId> donor_of(g.num_users());
  parallel_for(g.num_users(), threads, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t u = begin; u < end; ++u) {
      const NodeId self = static_cast<NodeId>(u);
      donor_of[u] = self;
      Rng rng(stream_seed(seed, u));
      if (rng.next_double() >= copy_prob) continue;
      const auto row = user_similarity.row(self);
      if (row.neighbors.empty()) continue;
      double total = 0.0;
      for (double s : row.scores) total += s;
      const double threshold = rng.next_double() * total;
      double acc = 0.0;
      NodeId donor = row.neighbors.back();
      for (std::size_t k = 0; k < row.neighbors.size(); ++k) {
        acc += row.scores[k];
        if (threshold < acc) {
          donor = row.neighbors[k];
          break;
        }
      }
      donor_of[u] = donor;
    }
  });

  std::vector<Edge> edges;
  edges.reserve(g.num_edges());
  for (NodeId u = 0; u < g.num_users(); ++u)
    for (NodeId i : g.items_of(donor_of[u])) edges.emplace_back(u, i);

  SampledGraph out;
  out.graph = InteractionGraph(g.num_users(), g.num_items(), std::move(edges),
                               g.user_labels(), g.item_labels());
  out.provenance = Provenance{"node-copy", 0.0, 0.0, copy_prob,
                              seed,        0,   graph_hash(g)};
  return out;
}

/// Generates cfg.ensemble_size graphs with seeds cfg.seed, cfg.seed + 1, ...
/// Optionally reports each finished graph through `emit` (e.g. to stream it
/// to disk) before the next one is drawn.
inline std::vector<SampledGraph> generate_ensemble(
    const InteractionGraph& g, const PreferenceDistribution& q,
    const SparseSimilarity& concurrence, const ClusterAssignment& users,
    const SamplerConfig& cfg, unsigned threads = 1,
    const std::function<void(const SampledGraph&)>& emit = {}) {
  cfg.validate();
  std::vector<SampledGraph> out;
  out.reserve(cfg.ensemble_size);
  for (std::uint32_t k = 0; k < cfg.ensemble_size; ++k) {
    SampledGraph sample =
        peco_sample_graph(g, q, concurrence, users, cfg, cfg.seed + k, threads);
    sample.provenance.sample_index = k;
    if (emit) emit(sample);
    out.push_back(std::move(sample));
  }
  return out;
}

/// Hyper-parameter presets tuned per public dataset.
struct DatasetPreset {
  std::string name;
  double alpha;
  double retain;
};

inline const std::vector<DatasetPreset>& dataset_presets() {
  static const std::vector<DatasetPreset> presets = {
      {"amazon-beauty", 1000.0, 0.0},
      {"movielens-1m", 0.0, 0.0},
      {"yelp2018", 100.0, 0.5},
      {"amazon-cds", 10.0, 0.0},
  };
  return presets;
}

inline std::optional<DatasetPreset> find_preset(std::string_view name) {
  for (const auto& p : dataset_presets())
    if (p.name == name) return p;
  return std::nullopt;
}

}  // namespace peco
