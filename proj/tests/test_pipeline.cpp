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

#include <cstdio>
#include <fstream>
#include <sys/wait.h>

#include "peco/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace peco;
using peco::testing::t1;
using peco::testing::TempDir;

namespace {

struct CommandResult {
  int exit_code;
  std::string output;  // stdout only
};

CommandResult run_cli(const std::string& args) {
  const std::string command = std::string(PECO_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

void write(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

const std::string kT1Text = "u1\ti1\nu1\ti2\nu2\ti2\nu2\ti3\nu3\ti3\nu3\ti4\n";

}  // namespace

TEST_CASE("ingest stage writes verifiable artifacts") {
  TempDir dir("ingest");
  write(dir.path() / "raw.tsv", kT1Text);
  const auto g = run_ingest({(dir.path() / "raw.tsv").string(), EdgeListFormat::Tsv,
                             (dir.path() / "graph").string()});
  REQUIRE(g.num_edges() == 6);
  REQUIRE(std::filesystem::exists(dir.path() / "graph" / kGraphFile));
  REQUIRE(std::filesystem::exists(dir.path() / "graph" / kLabelsFile));
  REQUIRE_NOTHROW(verify_artifacts(dir.path() / "graph"));
  const auto loaded = load_artifact_graph(dir.path() / "graph");
  REQUIRE(loaded == g);
  REQUIRE(loaded.user_labels() == std::vector<std::string>{"u1", "u2", "u3"});
}

TEST_CASE("tampered artifacts are detected") {
  TempDir dir("tamper");
  write(dir.path() / "raw.tsv", kT1Text);
  run_ingest({(dir.path() / "raw.tsv").string(), EdgeListFormat::Tsv,
              (dir.path() / "graph").string()});
  // flip one byte of the edge list
  auto bytes = read_file(dir.path() / "graph" / kGraphFile);
  bytes[0] = bytes[0] == '0' ? '1' : '0';
  write_file((dir.path() / "graph" / kGraphFile).string(), bytes);
  REQUIRE_THROWS_AS(load_artifact_graph(dir.path() / "graph"), DataError);
}

TEST_CASE("manifest is missing or corrupt") {
  TempDir dir("badmanifest");
  std::filesystem::create_directories(dir.path() / "graph");
  write(dir.path() / "graph" / kGraphFile, "0\t0\n");
  REQUIRE_THROWS_AS(load_artifact_graph(dir.path() / "graph"), DataError);
  write(dir.path() / "graph" / kManifestFile, "{not json");
  REQUIRE_THROWS_AS(load_artifact_graph(dir.path() / "graph"), DataError);
}

TEST_CASE("full pipeline on the toy graph") {
  TempDir dir("pipeline");
  write(dir.path() / "raw.tsv", kT1Text);
  run_ingest({(dir.path() / "raw.tsv").string(), EdgeListFormat::Tsv,
              (dir.path() / "graph").string()});

  SplitOptions split_opts;
  split_opts.graph_dir = (dir.path() / "graph").string();
  split_opts.seed = 3;
  split_opts.out_dir = (dir.path() / "split").string();
  const auto split_result = run_split(split_opts);
  REQUIRE(split_result.train.num_edges() == 6);  // all toy users have degree 2

  ClusterOptions cluster_opts;
  cluster_opts.graph_dir = (dir.path() / "graph").string();
  cluster_opts.eps_users = 0.7;
  cluster_opts.min_pts_users = 1;
  cluster_opts.eps_items = 0.7;
  cluster_opts.min_pts_items = 1;
  cluster_opts.out_dir = (dir.path() / "clusters").string();
  const auto clusters = run_cluster(cluster_opts);
  REQUIRE(clusters.users.num_clusters() >= 1);

  SampleOptions sample_opts;
  sample_opts.graph_dir = (dir.path() / "graph").string();
  sample_opts.clusters_dir = (dir.path() / "clusters").string();
  sample_opts.sampler.alpha = 10.0;
  sample_opts.sampler.ensemble_size = 3;
  sample_opts.sampler.seed = 5;
  sample_opts.out_dir = (dir.path() / "samples").string();
  run_sample(sample_opts);
  REQUIRE(std::filesystem::exists(dir.path() / "samples" / "sample_2.tsv"));

  const auto samples = load_samples(dir.path() / "samples", dir.path() / "graph");
  REQUIRE(samples.size() == 3);
  REQUIRE(samples[1].provenance.seed == 6);
  REQUIRE(samples[1].provenance.alpha == 10.0);
  REQUIRE(samples[0].graph.num_items() == 4);

  StatsOptions stats_opts;
  stats_opts.graph_dir = (dir.path() / "graph").string();
  stats_opts.clusters_dir = (dir.path() / "clusters").string();
  stats_opts.samples_dir = (dir.path() / "samples").string();
  stats_opts.out_dir = (dir.path() / "stats").string();
  const auto summary = run_stats(stats_opts);
  REQUIRE(summary.samples == 3);
  REQUIRE(summary.user_degrees_exact);
  REQUIRE(std::filesystem::exists(dir.path() / "stats" / kDegreeReportFile));
  REQUIRE(std::filesystem::exists(dir.path() / "stats" / kSummaryFile));

  // eval on hand-made rankings that put each user's items first
  write(dir.path() / "rankings.tsv", "0\t1,0,2,3\n1\t1,2,0,3\n2\t3,2,1,0\n");
  EvalOptions eval_opts;
  eval_opts.rankings = (dir.path() / "rankings.tsv").string();
  eval_opts.relevant = (dir.path() / "graph" / kGraphFile).string();
  eval_opts.k = 2;
  const auto metrics = run_eval(eval_opts);
  REQUIRE(metrics.evaluated == 3);
  REQUIRE(metrics.mean_recall == Catch::Approx(1.0));
}

TEST_CASE("stages rerun byte-identically") {
  TempDir dir("rerun");
  write(dir.path() / "raw.tsv", kT1Text);
  const IngestOptions a{(dir.path() / "raw.tsv").string(), EdgeListFormat::Tsv,
                        (dir.path() / "g1").string()};
  const IngestOptions b{(dir.path() / "raw.tsv").string(), EdgeListFormat::Tsv,
                        (dir.path() / "g2").string()};
  run_ingest(a);
  run_ingest(b);
  for (const char* name : {kGraphFile, kLabelsFile, kManifestFile})
    REQUIRE(read_file(dir.path() / "g1" / name) == read_file(dir.path() / "g2" / name));
}

TEST_CASE("sampling stage output does not depend on thread count") {
  TempDir dir("threads");
  write(dir.path() / "raw.tsv", kT1Text);
  run_ingest({(dir.path() / "raw.tsv").string(), EdgeListFormat::Tsv,
              (dir.path() / "graph").string()});
  ClusterOptions cluster_opts;
  cluster_opts.graph_dir = (dir.path() / "graph").string();
  cluster_opts.min_pts_users = 1;
  cluster_opts.min_pts_items = 1;
  cluster_opts.out_dir = (dir.path() / "clusters").string();
  run_cluster(cluster_opts);

  SampleOptions one;
  one.graph_dir = (dir.path() / "graph").string();
  one.clusters_dir = (dir.path() / "clusters").string();
  one.sampler.ensemble_size = 2;
  one.sampler.seed = 11;
  one.threads = 1;
  one.out_dir = (dir.path() / "s1").string();
  SampleOptions four = one;
  four.threads = 4;
  four.out_dir = (dir.path() / "s4").string();
  run_sample(one);
  run_sample(four);
  for (const char* name : {"sample_0.tsv", "sample_1.tsv"})
    REQUIRE(read_file(dir.path() / "s1" / name) == read_file(dir.path() / "s4" / name));
}

TEST_CASE("provenance json round trip") {
  const Provenance p{"peco", 12.5, 0.25, 0.0, 987654321, 3, "deadbeef00112233"};
  REQUIRE(provenance_from_json(provenance_to_json(p)) == p);
}

TEST_CASE("node-copy sampling through the pipeline") {
  TempDir dir("nodecopy");
  write(dir.path() / "raw.tsv", kT1Text);
  run_ingest({(dir.path() / "raw.tsv").string(), EdgeListFormat::Tsv,
              (dir.path() / "graph").string()});
  SampleOptions opts;
  opts.graph_dir = (dir.path() / "graph").string();
  opts.model = "node-copy";
  opts.copy_prob = 1.0;
  opts.sampler.ensemble_size = 2;
  opts.out_dir = (dir.path() / "samples").string();
  run_sample(opts);
  const auto samples = load_samples(dir.path() / "samples", dir.path() / "graph");
  REQUIRE(samples.size() == 2);
  REQUIRE(samples[0].provenance.model == "node-copy");
  REQUIRE(samples[0].provenance.copy_prob == 1.0);
}

TEST_CASE("cli: help and usage errors") {
  REQUIRE(run_cli("--help").exit_code == 0);
  REQUIRE(run_cli("frobnicate").exit_code == 1);
  REQUIRE(run_cli("ingest --format nonsense --input x --out y").exit_code == 1);
  REQUIRE(run_cli("sample --graph g --retain 2 --out o").exit_code == 1);  // bad range
}

TEST_CASE("cli: data errors exit with code 2") {
  TempDir dir("clidata");
  REQUIRE(run_cli("ingest --input " + (dir.path() / "missing.tsv").string() +
                  " --out " + (dir.path() / "g").string())
              .exit_code == 2);
}

TEST_CASE("cli: end-to-end toy run") {
  TempDir dir("cli");
  write(dir.path() / "raw.tsv", kT1Text);
  const std::string graph = (dir.path() / "graph").string();
  const std::string clusters = (dir.path() / "clusters").string();
  const std::string samples = (dir.path() / "samples").string();
  const std::string stats = (dir.path() / "stats").string();

  auto r = run_cli("ingest --input " + (dir.path() / "raw.tsv").string() + " --out " + graph);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("edges=6") != std::string::npos);

  r = run_cli("split --graph " + graph + " --seed 1 --out " + (dir.path() / "split").string());
  REQUIRE(r.exit_code == 0);

  r = run_cli("cluster --graph " + graph + " --min-pts-users 1 --min-pts-items 1 --out " +
              clusters);
  REQUIRE(r.exit_code == 0);

  r = run_cli("sample --graph " + graph + " --clusters " + clusters +
              " --alpha 2 --ensemble 2 --seed 3 --out " + samples);
  REQUIRE(r.exit_code == 0);

  r = run_cli("stats --graph " + graph + " --clusters " + clusters + " --samples " +
              samples + " --out " + stats);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("samples=2") != std::string::npos);
  REQUIRE(r.output.find("user_degrees_exact=1") != std::string::npos);

  write(dir.path() / "rankings.tsv", "0\t0,1\n");
  r = run_cli("eval --rankings " + (dir.path() / "rankings.tsv").string() + " --relevant " +
              graph + "/graph.tsv --k 2");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("recall@2=1\n") != std::string::npos);
}

TEST_CASE("cli: presets resolve to the published hyper-parameters") {
  const auto check = [](const std::string& name, const std::string& alpha,
                        const std::string& retain) {
    const auto r = run_cli("sample --graph unused --preset " + name + " --dry-run");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("alpha=" + alpha + "\n") != std::string::npos);
    REQUIRE(r.output.find("retain=" + retain + "\n") != std::string::npos);
  };
  check("amazon-beauty", "1000", "0");
  check("movielens-1m", "0", "0");
  check("yelp2018", "100", "0.5");
  check("amazon-cds", "10", "0");
}

TEST_CASE("cli: explicit flags override preset values") {
  const auto r = run_cli("sample --graph unused --preset yelp2018 --alpha 7 --dry-run");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("alpha=7\n") != std::string::npos);
  REQUIRE(r.output.find("retain=0.5\n") != std::string::npos);
}

TEST_CASE("cli: key=value config file with flag override") {
  TempDir dir("cfg");
  write(dir.path() / "sample.conf",
        "sample.alpha=42\nsample.retain=0.25\nsample.seed=17\nsample.graph=unused\n");
  auto r = run_cli("--config " + (dir.path() / "sample.conf").string() +
                   " sample --dry-run");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("alpha=42\n") != std::string::npos);
  REQUIRE(r.output.find("retain=0.25\n") != std::string::npos);
  REQUIRE(r.output.find("seed=17\n") != std::string::npos);
  r = run_cli("--config " + (dir.path() / "sample.conf").string() +
              " sample --alpha 1 --dry-run");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("alpha=1\n") != std::string::npos);
  REQUIRE(r.output.find("retain=0.25\n") != std::string::npos);
}

TEST_CASE("cli: sampling requires --out unless dry-running") {
  REQUIRE(run_cli("sample --graph unused").exit_code == 1);
}
