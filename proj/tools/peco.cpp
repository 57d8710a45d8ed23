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

// Command line front-end for the pecograph pipeline:
//   ingest -> split -> cluster -> sample -> stats, plus ranking eval.
// Every stage writes deterministic artifacts and a manifest with input and
// output hashes, so stages can be re-run and mixed across parameter sweeps.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "peco/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

struct SampleCli {
  peco::SampleOptions opts;
  std::string preset;
  bool dry_run = false;
};

void print_resolved_sample_config(const SampleCli& cli) {
  std::cout << "model=" << cli.opts.model << "\n"
            << "alpha=" << format_double(cli.opts.sampler.alpha) << "\n"
            << "retain=" << format_double(cli.opts.sampler.retain) << "\n"
            << "ensemble=" << cli.opts.sampler.ensemble_size << "\n"
            << "seed=" << cli.opts.sampler.seed << "\n"
            << "copy_prob=" << format_double(cli.opts.copy_prob) << "\n"
            << "threads=" << cli.opts.threads << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pecograph: preference- and concurrence-aware bipartite graph ensembles"};
  app.require_subcommand(1);
  // line-oriented key=value config, keys prefixed by the subcommand
  // (e.g. `sample.alpha=100`); explicit flags take precedence
  app.set_config("--config")->configurable(false);

  // ingest
  peco::IngestOptions ingest;
  std::string format = "tsv";
  auto* cmd_ingest = app.add_subcommand("ingest", "load a raw edge list into a graph artifact");
  cmd_ingest->add_option("--input", ingest.input, "edge list file")->required();
  cmd_ingest->add_option("--format", format, "input dialect")
      ->check(CLI::IsMember({"movielens", "tsv", "csv"}));
  cmd_ingest->add_option("--out", ingest.out_dir, "output artifact directory")->required();

  // split
  peco::SplitOptions split_opts;
  std::vector<double> fractions = {0.6, 0.2, 0.2};
  auto* cmd_split = app.add_subcommand("split", "per-user train/validation/test split");
  cmd_split->add_option("--graph", split_opts.graph_dir, "graph artifact directory")->required();
  cmd_split->add_option("--edges", split_opts.edge_file, "edge file within the graph artifact");
  cmd_split->add_option("--seed", split_opts.seed, "split seed");
  cmd_split->add_option("--fractions", fractions, "train validation test fractions")
      ->expected(3);
  cmd_split->add_option("--out", split_opts.out_dir, "output artifact directory")->required();

  // cluster
  peco::ClusterOptions cluster_opts;
  auto* cmd_cluster = app.add_subcommand("cluster", "cluster both sides and compute "
                                                    "cluster scores and concurrence");
  cmd_cluster->add_option("--graph", cluster_opts.graph_dir, "graph artifact directory")
      ->required();
  cmd_cluster->add_option("--edges", cluster_opts.edge_file, "edge file within the artifact");
  cmd_cluster->add_option("--eps-users", cluster_opts.eps_users, "DBSCAN eps, user side");
  cmd_cluster->add_option("--min-pts-users", cluster_opts.min_pts_users,
                          "DBSCAN min_pts, user side");
  cmd_cluster->add_option("--eps-items", cluster_opts.eps_items, "DBSCAN eps, item side");
  cmd_cluster->add_option("--min-pts-items", cluster_opts.min_pts_items,
                          "DBSCAN min_pts, item side");
  cmd_cluster->add_option("--topk", cluster_opts.top_k,
                          "keep only the K largest concurrence scores per item row");
  cmd_cluster->add_option("--threads", cluster_opts.threads, "worker thread cap");
  cmd_cluster->add_option("--out", cluster_opts.out_dir, "output artifact directory")
      ->required();

  // sample
  SampleCli sample_cli;
  auto* cmd_sample = app.add_subcommand("sample", "generate an ensemble of sampled graphs");
  cmd_sample->add_option("--graph", sample_cli.opts.graph_dir, "graph artifact directory")
      ->required();
  cmd_sample->add_option("--edges", sample_cli.opts.edge_file, "edge file within the artifact");
  cmd_sample->add_option("--clusters", sample_cli.opts.clusters_dir,
                         "cluster artifact directory (required for the peco model)");
  cmd_sample->add_option("--model", sample_cli.opts.model, "peco or node-copy")
      ->check(CLI::IsMember({"peco", "node-copy"}));
  auto* alpha_opt =
      cmd_sample->add_option("--alpha", sample_cli.opts.sampler.alpha,
                             "concurrence trade-off weight");
  auto* retain_opt =
      cmd_sample->add_option("--retain", sample_cli.opts.sampler.retain,
                             "fraction of original items kept verbatim");
  cmd_sample->add_option("--ensemble", sample_cli.opts.sampler.ensemble_size,
                         "number of graphs to sample");
  cmd_sample->add_option("--seed", sample_cli.opts.sampler.seed, "base seed");
  cmd_sample->add_option("--copy-prob", sample_cli.opts.copy_prob,
                         "node-copy replacement probability");
  cmd_sample->add_option("--preset", sample_cli.preset,
                         "per-dataset hyper-parameters; explicit flags still win")
      ->check(CLI::IsMember({"amazon-beauty", "movielens-1m", "yelp2018", "amazon-cds"}));
  cmd_sample->add_flag("!--no-fallback", sample_cli.opts.sampler.uniform_fallback,
                       "fail instead of drawing uniformly when all weights vanish");
  cmd_sample->add_option("--threads", sample_cli.opts.threads, "worker thread cap");
  cmd_sample->add_flag("--dry-run", sample_cli.dry_run,
                       "print the resolved configuration and exit");
  auto* sample_out =
      cmd_sample->add_option("--out", sample_cli.opts.out_dir, "output artifact directory");

  // stats
  peco::StatsOptions stats_opts;
  auto* cmd_stats = app.add_subcommand("stats", "measure how an ensemble preserves "
                                                "degrees, concurrence and preference");
  cmd_stats->add_option("--graph", stats_opts.graph_dir, "graph artifact directory")->required();
  cmd_stats->add_option("--edges", stats_opts.edge_file, "edge file within the artifact");
  cmd_stats->add_option("--clusters", stats_opts.clusters_dir, "cluster artifact directory")
      ->required();
  cmd_stats->add_option("--samples", stats_opts.samples_dir, "sample artifact directory")
      ->required();
  cmd_stats->add_option("--threads", stats_opts.threads, "worker thread cap");
  cmd_stats->add_option("--out", stats_opts.out_dir, "output artifact directory")->required();

  // eval
  peco::EvalOptions eval_opts;
  auto* cmd_eval = app.add_subcommand("eval", "recall@K and NDCG@K for ranked lists");
  cmd_eval->add_option("--rankings", eval_opts.rankings,
                       "TSV: user_idx<TAB>comma-separated ranked items")
      ->required();
  cmd_eval->add_option("--relevant", eval_opts.relevant,
                       "canonical edge list of held-out relevant interactions")
      ->required();
  cmd_eval->add_option("--k", eval_opts.k, "ranking cutoff");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_ingest->parsed()) {
      const peco::InteractionGraph g = peco::run_ingest(
          {ingest.input, peco::parse_format(format), ingest.out_dir});
      std::cout << "users=" << g.num_users() << "\nitems=" << g.num_items()
                << "\nedges=" << g.num_edges() << "\n";
    } else if (cmd_split->parsed()) {
      split_opts.fractions = {fractions[0], fractions[1], fractions[2]};
      const peco::DatasetSplit result = peco::run_split(
          split_opts, [](const std::string& w) { std::cerr << "warning: " << w << "\n"; });
      std::cout << "train_edges=" << result.train.num_edges()
                << "\nvalidation_edges=" << result.validation.num_edges()
                << "\ntest_edges=" << result.test.num_edges() << "\n";
    } else if (cmd_cluster->parsed()) {
      const peco::ClusterArtifacts a = peco::run_cluster(cluster_opts);
      std::cout << "user_clusters=" << a.users.num_clusters()
                << "\nitem_clusters=" << a.items.num_clusters()
                << "\nconcurrence_entries=" << a.concurrence.num_entries() << "\n";
    } else if (cmd_sample->parsed()) {
      if (!sample_cli.preset.empty()) {
        const auto preset = peco::find_preset(sample_cli.preset);
        if (!preset) throw peco::DataError("unknown preset: " + sample_cli.preset);
        if (alpha_opt->count() == 0) sample_cli.opts.sampler.alpha = preset->alpha;
        if (retain_opt->count() == 0) sample_cli.opts.sampler.retain = preset->retain;
      }
      if (sample_cli.dry_run) {
        print_resolved_sample_config(sample_cli);
        return kExitOk;
      }
      if (sample_out->count() == 0)
        throw CLI::RequiredError("--out");  // required unless --dry-run
      peco::run_sample(sample_cli.opts);
      std::cout << "samples=" << sample_cli.opts.sampler.ensemble_size << "\n";
    } else if (cmd_stats->parsed()) {
      const peco::StatsSummary summary = peco::run_stats(stats_opts);
      std::cout << summary.to_key_values();
    } else if (cmd_eval->parsed()) {
      const peco::RankingSummary s = peco::run_eval(eval_opts);
      std::cout << "recall@" << eval_opts.k << "=" << format_double(s.mean_recall) << "\n"
                << "ndcg@" << eval_opts.k << "=" << format_double(s.mean_ndcg) << "\n"
                << "users_evaluated=" << s.evaluated << "\n"
                << "users_skipped_empty_relevant=" << s.skipped_empty_relevant << "\n";
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
