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

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "peco/clustering.hpp"
#include "peco/edge_list_io.hpp"
#include "peco/graph.hpp"
#include "peco/hash.hpp"
#include "peco/sampler.hpp"
#include "peco/similarity.hpp"
#include "peco/stats.hpp"

namespace peco {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Artifact file names shared by the pipeline stages.
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kGraphFile = "graph.tsv";
inline constexpr const char* kLabelsFile = "labels.tsv";
inline constexpr const char* kTrainFile = "train.tsv";
inline constexpr const char* kValidationFile = "validation.tsv";
inline constexpr const char* kTestFile = "test.tsv";
inline constexpr const char* kUserClustersFile = "user_clusters.tsv";
inline constexpr const char* kItemClustersFile = "item_clusters.tsv";
inline constexpr const char* kClusterScoresFile = "cluster_scores.csv";
inline constexpr const char* kConcurrenceFile = "concurrence.tsv";
inline constexpr const char* kProvenanceFile = "provenance.json";
inline constexpr const char* kDegreeReportFile = "degree_report.csv";
inline constexpr const char* kSummaryFile = "summary.txt";

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Every stage writes a manifest recording its configuration, the hash of
/// each input it consumed and the hash of each file it produced. Downstream
/// stages re-hash what they read against the upstream manifest, so edited or
/// corrupted artifacts fail loudly.
struct Manifest {
  std::string stage;
  json config;
  std::map<std::string, std::string> inputs;   // path (as given) -> hash
  std::map<std::string, std::string> outputs;  // file name in dir -> hash
};

inline void write_manifest(const fs::path& dir, const Manifest& m) {
  json doc;
  doc["stage"] = m.stage;
  doc["config"] = m.config;
  doc["inputs"] = m.inputs;
  json outs = json::object();
  for (const auto& [name, hash] : m.outputs) outs[name] = hash;
  doc["outputs"] = outs;
  write_file((dir / kManifestFile).string(), doc.dump(2) + "\n");
}

inline Manifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestFile;
  if (!fs::exists(path)) throw DataError("missing manifest: " + path.string());
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError("corrupt manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.stage = doc.at("stage").get<std::string>();
    m.config = doc.value("config", json::object());
    m.inputs = doc.value("inputs", std::map<std::string, std::string>{});
    m.outputs = doc.value("outputs", std::map<std::string, std::string>{});
  } catch (const json::exception& e) {
    throw DataError("corrupt manifest " + path.string() + ": " + e.what());
  }
  return m;
}

/// Checks `files` (all manifest outputs when empty) against their recorded
/// hashes. Throws DataError on a missing entry, missing file, or mismatch.
inline Manifest verify_artifacts(const fs::path& dir,
                                 const std::vector<std::string>& files = {}) {
  const Manifest m = read_manifest(dir);
  std::vector<std::string> to_check = files;
  if (to_check.empty())
    for (const auto& [name, hash] : m.outputs) to_check.push_back(name);
  for (const auto& name : to_check) {
    const auto it = m.outputs.find(name);
    if (it == m.outputs.end())
      throw DataError("artifact " + name + " is not recorded in " +
                      (dir / kManifestFile).string());
    const fs::path file = dir / name;
    if (!fs::exists(file)) throw DataError("missing artifact: " + file.string());
    const std::string actual = hash_file(file.string());
    if (actual != it->second)
      throw DataError("artifact hash mismatch for " + file.string() +
                      " (expected " + it->second + ", got " + actual +
                      "); upstream output was modified");
  }
  return m;
}

namespace detail {

inline std::string write_artifact(const fs::path& dir, const std::string& name,
                                  std::string_view bytes, Manifest& manifest) {
  const fs::path path = dir / name;
  write_file(path.string(), bytes);
  const std::string digest = hash_bytes(bytes);
  manifest.outputs[name] = digest;
  return digest;
}

inline void record_input(const fs::path& dir, const std::string& name, Manifest& m) {
  m.inputs[(dir / name).string()] = hash_file((dir / name).string());
}

}  // namespace detail

/// Loads `edge_file` (+ label sidecar) from an artifact directory, verifying
/// both against the directory's manifest first.
inline InteractionGraph load_artifact_graph(const fs::path& dir,
                                            const std::string& edge_file = kGraphFile) {
  verify_artifacts(dir, {edge_file, kLabelsFile});
  return load_canonical((dir / edge_file).string(), (dir / kLabelsFile).string());
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

struct IngestOptions {
  std::string input;
  EdgeListFormat format = EdgeListFormat::Tsv;
  std::string out_dir;
};

inline InteractionGraph run_ingest(const IngestOptions& opts) {
  const InteractionGraph g = load_edge_list(opts.input, opts.format);
  fs::create_directories(opts.out_dir);
  Manifest m;
  m.stage = "ingest";
  m.config = {{"input", opts.input},
              {"format", opts.format == EdgeListFormat::Movielens ? "movielens"
                         : opts.format == EdgeListFormat::Csv     ? "csv"
                                                                  : "tsv"},
              {"num_users", g.num_users()},
              {"num_items", g.num_items()},
              {"num_edges", g.num_edges()}};
  m.inputs[opts.input] = hash_file(opts.input);
  detail::write_artifact(opts.out_dir, kGraphFile, canonical_edge_bytes(g), m);
  detail::write_artifact(opts.out_dir, kLabelsFile, label_map_bytes(g), m);
  write_manifest(opts.out_dir, m);
  return g;
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

struct SplitOptions {
  std::string graph_dir;
  std::string edge_file = kGraphFile;
  SplitFractions fractions;
  std::uint64_t seed = 0;
  std::string out_dir;
};

inline DatasetSplit run_split(const SplitOptions& opts,
                              const std::function<void(const std::string&)>& warn = {}) {
  const InteractionGraph g = load_artifact_graph(opts.graph_dir, opts.edge_file);
  const DatasetSplit result = split(g, opts.fractions, opts.seed, warn);
  fs::create_directories(opts.out_dir);
  Manifest m;
  m.stage = "split";
  m.config = {{"graph_dir", opts.graph_dir},
              {"edge_file", opts.edge_file},
              {"seed", opts.seed},
              {"train_fraction", opts.fractions.train},
              {"validation_fraction", opts.fractions.validation},
              {"test_fraction", opts.fractions.test}};
  detail::record_input(opts.graph_dir, opts.edge_file, m);
  detail::record_input(opts.graph_dir, kLabelsFile, m);
  detail::write_artifact(opts.out_dir, kTrainFile, canonical_edge_bytes(result.train), m);
  detail::write_artifact(opts.out_dir, kValidationFile,
                         canonical_edge_bytes(result.validation), m);
  detail::write_artifact(opts.out_dir, kTestFile, canonical_edge_bytes(result.test), m);
  detail::write_artifact(opts.out_dir, kLabelsFile,
                         read_file(fs::path(opts.graph_dir) / kLabelsFile), m);
  write_manifest(opts.out_dir, m);
  return result;
}

// ---------------------------------------------------------------------------
// cluster
// ---------------------------------------------------------------------------

struct ClusterOptions {
  std::string graph_dir;
  std::string edge_file = kGraphFile;
  double eps_users = 0.7;
  std::uint32_t min_pts_users = 4;
  double eps_items = 0.7;
  std::uint32_t min_pts_items = 4;
  std::uint32_t top_k = 0;  // concurrence row truncation; 0 keeps everything
  unsigned threads = 1;
  std::string out_dir;
};

struct ClusterArtifacts {
  ClusterAssignment users;
  ClusterAssignment items;
  ClusterScoreMatrix scores;
  SparseSimilarity concurrence;
};

inline ClusterArtifacts run_cluster(const ClusterOptions& opts) {
  const InteractionGraph g = load_artifact_graph(opts.graph_dir, opts.edge_file);

  // Clustering only consults pairs with similarity >= 1 - eps, so the
  // similarity passes can drop everything below that threshold up front
  // without changing the result.
  SimilarityOptions user_opts{0, 1.0 - opts.eps_users, opts.threads};
  const SparseSimilarity user_sim = pairwise_similarity(g, Side::Users, user_opts);
  const ClusterAssignment cu = dbscan(user_sim, opts.eps_users, opts.min_pts_users);

  SimilarityOptions item_opts{0, 1.0 - opts.eps_items, opts.threads};
  const SparseSimilarity item_sim = pairwise_similarity(g, Side::Items, item_opts);
  const ClusterAssignment ci = dbscan(item_sim, opts.eps_items, opts.min_pts_items);

  const ClusterScoreMatrix e = cluster_scores(g, cu, ci);
  const SparseSimilarity s = concurrence_matrix(g, {opts.top_k, 0.0, opts.threads});

  fs::create_directories(opts.out_dir);
  Manifest m;
  m.stage = "cluster";
  m.config = {{"graph_dir", opts.graph_dir}, {"edge_file", opts.edge_file},
              {"eps_users", opts.eps_users}, {"min_pts_users", opts.min_pts_users},
              {"eps_items", opts.eps_items}, {"min_pts_items", opts.min_pts_items},
              {"top_k", opts.top_k},         {"num_user_clusters", cu.num_clusters()},
              {"num_item_clusters", ci.num_clusters()}};
  detail::record_input(opts.graph_dir, opts.edge_file, m);
  detail::record_input(opts.graph_dir, kLabelsFile, m);
  detail::write_artifact(opts.out_dir, kUserClustersFile, assignment_to_tsv(cu), m);
  detail::write_artifact(opts.out_dir, kItemClustersFile, assignment_to_tsv(ci), m);
  detail::write_artifact(opts.out_dir, kClusterScoresFile, cluster_scores_to_csv(e), m);
  detail::write_artifact(opts.out_dir, kConcurrenceFile, similarity_to_tsv(s), m);
  write_manifest(opts.out_dir, m);
  return ClusterArtifacts{cu, ci, e, s};
}

inline ClusterArtifacts load_cluster_artifacts(const fs::path& dir, NodeId num_items) {
  verify_artifacts(dir, {kUserClustersFile, kItemClustersFile, kClusterScoresFile,
                         kConcurrenceFile});
  ClusterArtifacts a;
  a.users = assignment_from_tsv(read_file(dir / kUserClustersFile), Side::Users);
  a.items = assignment_from_tsv(read_file(dir / kItemClustersFile), Side::Items);
  a.scores = cluster_scores_from_csv(read_file(dir / kClusterScoresFile));
  a.concurrence =
      similarity_from_tsv(read_file(dir / kConcurrenceFile), Side::Items, num_items);
  return a;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

struct SampleOptions {
  std::string graph_dir;
  std::string edge_file = kGraphFile;
  std::string clusters_dir;
  std::string model = "peco";  // or "node-copy"
  SamplerConfig sampler;
  double copy_prob = 0.5;  // node-copy only
  unsigned threads = 1;
  std::string out_dir;
};

inline std::string sample_file_name(std::uint32_t index) {
  return "sample_" + std::to_string(index) + ".tsv";
}

inline json provenance_to_json(const Provenance& p) {
  return {{"model", p.model},
          {"alpha", p.alpha},
          {"retain", p.retain},
          {"copy_prob", p.copy_prob},
          {"seed", p.seed},
          {"sample_index", p.sample_index},
          {"source_hash", p.source_hash}};
}

inline Provenance provenance_from_json(const json& j) {
  Provenance p;
  try {
    p.model = j.at("model").get<std::string>();
    p.alpha = j.at("alpha").get<double>();
    p.retain = j.at("retain").get<double>();
    p.copy_prob = j.at("copy_prob").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.sample_index = j.at("sample_index").get<std::uint32_t>();
    p.source_hash = j.at("source_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw DataError(std::string("corrupt provenance: ") + e.what());
  }
  return p;
}

inline void run_sample(const SampleOptions& opts) {
  opts.sampler.validate();
  if (opts.model != "peco" && opts.model != "node-copy")
    throw std::invalid_argument("unknown sampler model: " + opts.model);

  const InteractionGraph g = load_artifact_graph(opts.graph_dir, opts.edge_file);
  fs::create_directories(opts.out_dir);

  Manifest m;
  m.stage = "sample";
  m.config = {{"graph_dir", opts.graph_dir},
              {"edge_file", opts.edge_file},
              {"clusters_dir", opts.clusters_dir},
              {"model", opts.model},
              {"alpha", opts.sampler.alpha},
              {"retain", opts.sampler.retain},
              {"ensemble_size", opts.sampler.ensemble_size},
              {"seed", opts.sampler.seed},
              {"copy_prob", opts.copy_prob}};
  detail::record_input(opts.graph_dir, opts.edge_file, m);
  detail::record_input(opts.graph_dir, kLabelsFile, m);

  json sample_entries = json::array();
  const auto write_sample = [&](const SampledGraph& s) {
    const std::string name = sample_file_name(s.provenance.sample_index);
    detail::write_artifact(opts.out_dir, name, canonical_edge_bytes(s.graph), m);
    json entry = provenance_to_json(s.provenance);
    entry["file"] = name;
    sample_entries.push_back(entry);
  };

  if (opts.model == "peco") {
    if (opts.clusters_dir.empty())
      throw DataError("peco sampling requires --clusters artifacts");
    const ClusterArtifacts clusters =
        load_cluster_artifacts(opts.clusters_dir, g.num_items());
    for (const auto& name :
         {kUserClustersFile, kItemClustersFile, kClusterScoresFile, kConcurrenceFile})
      detail::record_input(opts.clusters_dir, name, m);
    if (clusters.users.num_nodes() != g.num_users() ||
        clusters.items.num_nodes() != g.num_items())
      throw DataError("cluster artifacts do not match the graph dimensions");
    const PreferenceDistribution q =
        preference(clusters.scores, clusters.items, degrees(g, Side::Items));
    generate_ensemble(g, q, clusters.concurrence, clusters.users, opts.sampler,
                      opts.threads, write_sample);
  } else {
    const SparseSimilarity user_sim =
        pairwise_similarity(g, Side::Users, {0, 0.0, opts.threads});
    for (std::uint32_t k = 0; k < opts.sampler.ensemble_size; ++k) {
      SampledGraph s =
          node_copy_sample(g, user_sim, opts.copy_prob, opts.sampler.seed + k,
                           opts.threads);
      s.provenance.sample_index = k;
      write_sample(s);
    }
  }

  json prov;
  prov["model"] = opts.model;
  prov["samples"] = sample_entries;
  detail::write_artifact(opts.out_dir, kProvenanceFile, prov.dump(2) + "\n", m);
  write_manifest(opts.out_dir, m);
}

/// Loads every sampled graph listed in a sample artifact directory, restoring
/// the source node sets from the graph artifact's label map.
inline std::vector<SampledGraph> load_samples(const fs::path& samples_dir,
                                              const fs::path& graph_dir) {
  verify_artifacts(samples_dir, {kProvenanceFile});
  json prov;
  try {
    prov = json::parse(read_file(samples_dir / kProvenanceFile));
  } catch (const json::exception& e) {
    throw DataError(std::string("corrupt provenance.json: ") + e.what());
  }
  std::vector<SampledGraph> out;
  for (const auto& entry : prov.at("samples")) {
    const std::string name = entry.at("file").get<std::string>();
    verify_artifacts(samples_dir, {name});
    SampledGraph s;
    s.graph = load_canonical((samples_dir / name).string(),
                             (fs::path(graph_dir) / kLabelsFile).string());
    s.provenance = provenance_from_json(entry);
    out.push_back(std::move(s));
  }
  if (out.empty()) throw DataError("sample artifact directory lists no samples");
  return out;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsOptions {
  std::string graph_dir;
  std::string edge_file = kGraphFile;
  std::string clusters_dir;
  std::string samples_dir;
  unsigned threads = 1;
  std::string out_dir;
};

struct StatsSummary {
  std::size_t samples = 0;
  std::optional<double> degree_rank_correlation;
  double concurrence_mad = 0.0;
  std::optional<double> concurrence_rank_correlation;
  double preference_tv_distance = 0.0;
  bool user_degrees_exact = false;

  std::string to_key_values() const {
    std::string out;
    char buf[64];
    const auto fmt = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      return std::string(buf);
    };
    out += "samples=" + std::to_string(samples) + "\n";
    out += "degree_rank_correlation=" +
           (degree_rank_correlation ? fmt(*degree_rank_correlation)
                                    : std::string("undefined")) + "\n";
    out += "concurrence_mad=" + fmt(concurrence_mad) + "\n";
    out += "concurrence_rank_correlation=" +
           (concurrence_rank_correlation ? fmt(*concurrence_rank_correlation)
                                         : std::string("undefined")) + "\n";
    out += "preference_tv_distance=" + fmt(preference_tv_distance) + "\n";
    out += std::string("user_degrees_exact=") + (user_degrees_exact ? "1" : "0") + "\n";
    return out;
  }
};

inline StatsSummary run_stats(const StatsOptions& opts) {
  const InteractionGraph g = load_artifact_graph(opts.graph_dir, opts.edge_file);
  const Manifest cluster_manifest = read_manifest(opts.clusters_dir);
  const ClusterArtifacts clusters =
      load_cluster_artifacts(opts.clusters_dir, g.num_items());
  const std::vector<SampledGraph> samples = load_samples(opts.samples_dir, opts.graph_dir);

  std::vector<const InteractionGraph*> ensemble;
  ensemble.reserve(samples.size());
  for (const auto& s : samples) ensemble.push_back(&s.graph);

  const DegreeReport dr = degree_report(g, ensemble);

  // Recompute sampled concurrence with the truncation the original used, so
  // the comparison is like for like.
  SimilarityOptions conc_opts;
  conc_opts.top_k = cluster_manifest.config.value("top_k", 0u);
  conc_opts.threads = opts.threads;
  const ConcurrenceReport cr = concurrence_report(clusters.concurrence, ensemble, conc_opts);

  const PreferenceReport pr =
      preference_report(clusters.scores, ensemble, clusters.users, clusters.items);

  StatsSummary summary;
  summary.samples = samples.size();
  summary.degree_rank_correlation = dr.rank_correlation;
  summary.concurrence_mad = cr.mean_abs_deviation;
  summary.concurrence_rank_correlation = cr.rank_correlation;
  summary.preference_tv_distance = pr.mean_tv_distance;
  summary.user_degrees_exact = true;
  const auto source_user_degrees = degrees(g, Side::Users);
  for (const auto* s : ensemble)
    if (degrees(*s, Side::Users) != source_user_degrees) summary.user_degrees_exact = false;

  fs::create_directories(opts.out_dir);
  Manifest m;
  m.stage = "stats";
  m.config = {{"graph_dir", opts.graph_dir},
              {"edge_file", opts.edge_file},
              {"clusters_dir", opts.clusters_dir},
              {"samples_dir", opts.samples_dir}};
  detail::record_input(opts.graph_dir, opts.edge_file, m);
  detail::record_input(opts.clusters_dir, kClusterScoresFile, m);
  detail::record_input(opts.clusters_dir, kConcurrenceFile, m);
  detail::record_input(opts.samples_dir, kProvenanceFile, m);
  detail::write_artifact(opts.out_dir, kDegreeReportFile, degree_report_to_csv(dr), m);
  detail::write_artifact(opts.out_dir, kSummaryFile, summary.to_key_values(), m);
  write_manifest(opts.out_dir, m);
  return summary;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string rankings;  // user_idx<TAB>item,item,... one line per user
  std::string relevant;  // canonical edge list of held-out interactions
  std::size_t k = 20;
};

inline std::vector<RankingJudgment> load_rankings(const std::string& rankings_path,
                                                  const InteractionGraph& relevant) {
  std::ifstream in(rankings_path);
  if (!in) throw DataError("cannot open rankings: " + rankings_path);
  std::vector<RankingJudgment> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::chop_cr(line);
    if (line.empty()) continue;
    const std::string ctx = rankings_path + ":" + std::to_string(line_no);
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(ctx + ": malformed ranking line");
    const NodeId user = detail::parse_u32(std::string_view(line).substr(0, tab), ctx);
    RankingJudgment j;
    std::size_t start = tab + 1;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      if (comma > start)
        j.ranked.push_back(
            detail::parse_u32(std::string_view(line).substr(start, comma - start), ctx));
      if (comma == line.size()) break;
      start = comma + 1;
    }
    if (user < relevant.num_users()) {
      const auto rel = relevant.items_of(user);
      j.relevant.assign(rel.begin(), rel.end());
    }
    out.push_back(std::move(j));
  }
  if (out.empty()) throw DataError("rankings file is empty: " + rankings_path);
  return out;
}

inline RankingSummary run_eval(const EvalOptions& opts) {
  const InteractionGraph relevant = load_canonical(opts.relevant);
  const auto judgments = load_rankings(opts.rankings, relevant);
  return evaluate_rankings(judgments, opts.k);
}

}  // namespace peco
