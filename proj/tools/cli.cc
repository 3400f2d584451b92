/*
 * Copyright 2026 The cofollow Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "cofollow/corpus.h"
#include "cofollow/embedding_store.h"
#include "cofollow/error.h"
#include "cofollow/polarity.h"
#include "cofollow/synth.h"
#include "cofollow/trainer.h"
#include "cofollow/traits.h"
#include "manifest.h"
#include "version.h"

namespace cofollow::cli {

namespace {

// Writes to `path` when set, else to `fallback`.
class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback)
      : path_(path), stream_(&fallback) {
    if (!path_.empty()) {
      file_.open(path_, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot open for writing: " + path_);
      stream_ = &file_;
    }
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed: " + (path_.empty() ? "<stdout>" : path_));
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_;
};

std::string manifest_path_for(const std::string& output) {
  return output + ".manifest.json";
}

struct StatsArgs {
  std::string input;
  std::vector<std::uint64_t> edges = default_histogram_edges();
  std::string output;
};

struct BuildVocabArgs {
  std::string input;
  std::uint64_t min_followers = 350;
  std::uint64_t max_follows = 1000;
  std::string output;
};

struct TrainArgs {
  std::string corpus;
  std::string vocab;
  std::string variant = "skipgram";
  TrainConfig config;
  std::uint64_t max_follows = 1000;
  std::string output;
};

struct SimilarArgs {
  std::string embeddings;
  std::string entity;
  std::size_t top = 10;
  std::string output;
};

struct TraitsArgs {
  std::string embeddings;
  std::string follows;
  std::string labels;
  std::string attribute;
  double train_frac = 0.8;
  std::uint64_t seed = 1;
  LogRegOptions logreg;
  bool shuffle_labels = false;
  std::string output;
};

struct PmiArgs {
  std::string follows;
  std::string labels;
  std::string vocab;
  int class_value = 1;
  std::uint64_t min_count = 3;
  std::size_t top = 20;
  std::string output;
};

struct PolarityArgs {
  std::string embeddings;
  std::string anchors;
  std::string targets;
  std::string gold;
  std::string vocab;
  std::uint64_t min_followers = 0;
  std::string output;
};

struct SynthArgs {
  SynthConfig config;
  std::string outdir;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  const auto records = read_follow_records(a.input);
  const auto buckets = follower_histogram(records, a.edges);
  OutputSink sink(a.output, out);
  write_histogram(sink.stream(), buckets);
  sink.finish();
  if (!a.output.empty()) {
    RunManifest m;
    m.subcommand = "stats";
    m.set("edges", a.edges);
    m.inputs = {a.input};
    m.outputs = {a.output};
    m.write(manifest_path_for(a.output));
  }
  return kOk;
}

int cmd_build_vocab(const BuildVocabArgs& a, std::ostream& out) {
  const auto records = read_follow_records(a.input);
  const Vocabulary vocab =
      build_vocabulary(records, a.min_followers, a.max_follows);
  vocab.save(a.output);
  out << "vocabulary\t" << vocab.size() << " entities\n";
  RunManifest m;
  m.subcommand = "build-vocab";
  m.set("min_followers", a.min_followers);
  m.set("max_follows", a.max_follows);
  m.inputs = {a.input};
  m.outputs = {a.output};
  m.write(manifest_path_for(a.output));
  return kOk;
}

int cmd_train(TrainArgs a, std::ostream& out) {
  a.config.variant = parse_variant(a.variant);
  a.config.validate();
  const auto records = read_follow_records(a.corpus);
  const Vocabulary vocab = Vocabulary::load(a.vocab);
  const ContextCorpus corpus = encode_contexts(records, vocab, a.max_follows);

  const std::string stats_path = a.output + ".stats.tsv";
  OutputSink stats_sink(stats_path, out);
  auto on_epoch = [&](const TrainStats& s) {
    write_train_stats(stats_sink.stream(), s);
    write_train_stats(out, s);
  };
  const TrainResult result = train(corpus, vocab, a.config, on_epoch);
  stats_sink.finish();
  save_embeddings(EmbeddingStore::from_model(result.model, vocab), a.output);

  const TrainConfig& c = a.config;
  RunManifest m;
  m.subcommand = "train";
  m.seed = c.seed;
  m.set("variant", std::string(variant_name(c.variant)));
  m.set("dim", c.dim);
  m.set("negatives", c.negatives);
  m.set("window", c.window);
  m.set("subsample", c.subsample);
  m.set("lr", c.lr_initial);
  m.set("min_lr", c.lr_min);
  m.set("epochs", c.epochs);
  m.set("workers", c.workers);
  m.set("max_follows", a.max_follows);
  m.set("users_retained", corpus.user_sets.size());
  m.set("total_tokens", corpus.total_tokens);
  m.inputs = {a.corpus, a.vocab};
  m.outputs = {a.output, stats_path};
  m.write(manifest_path_for(a.output));
  return kOk;
}

int cmd_similar(const SimilarArgs& a, std::ostream& out) {
  const EmbeddingStore store = load_embeddings(a.embeddings);
  const auto neighbors = nearest_neighbors(store, a.entity, a.top);
  OutputSink sink(a.output, out);
  sink.stream() << "entity_id\tsimilarity\n";
  for (const Neighbor& n : neighbors)
    sink.stream() << n.entity_id << '\t' << format_value(n.similarity) << '\n';
  sink.finish();
  if (!a.output.empty()) {
    RunManifest m;
    m.subcommand = "similar";
    m.set("entity", a.entity);
    m.set("top", a.top);
    m.inputs = {a.embeddings};
    m.outputs = {a.output};
    m.write(manifest_path_for(a.output));
  }
  return kOk;
}

int cmd_traits(const TraitsArgs& a, std::ostream& out) {
  const EmbeddingStore store = load_embeddings(a.embeddings);
  const auto records = read_follow_records(a.follows);
  auto labels = read_labels(a.labels);
  if (a.shuffle_labels) {
    std::vector<int> values;
    for (const auto& l : labels) values.push_back(l.second);
    RandomEngine rng(derive_seed(a.seed, 0x5a1e));
    std::shuffle(values.begin(), values.end(), rng);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i].second = values[i];
  }
  const auto users = join_labels(records, labels);
  LogRegOptions options = a.logreg;
  options.seed = a.seed;
  const AttributeReport report =
      evaluate_attribute(users, store, a.seed, options, a.train_frac);
  const std::string attribute =
      a.attribute.empty() ? std::filesystem::path(a.labels).stem().string()
                          : a.attribute;
  OutputSink sink(a.output, out);
  write_attribute_report_header(sink.stream());
  write_attribute_report(sink.stream(), attribute, report);
  sink.finish();
  if (!a.output.empty()) {
    RunManifest m;
    m.subcommand = "traits";
    m.seed = a.seed;
    m.set("attribute", attribute);
    m.set("train_frac", a.train_frac);
    m.set("epochs", options.epochs);
    m.set("lr", options.lr);
    m.set("shuffle_labels", a.shuffle_labels);
    m.inputs = {a.embeddings, a.follows, a.labels};
    m.outputs = {a.output};
    m.write(manifest_path_for(a.output));
  }
  return kOk;
}

int cmd_pmi(const PmiArgs& a, std::ostream& out) {
  const auto records = read_follow_records(a.follows);
  const auto labels = read_labels(a.labels);
  const auto users = join_labels(records, labels);
  std::optional<Vocabulary> vocab;
  if (!a.vocab.empty()) vocab = Vocabulary::load(a.vocab);
  const auto top = pmi_top_accounts(users, vocab ? &*vocab : nullptr,
                                    a.class_value, a.min_count, a.top);
  OutputSink sink(a.output, out);
  sink.stream() << "entity_id\tpmi\tclass_followers\n";
  for (const PmiEntry& e : top)
    sink.stream() << e.entity_id << '\t' << format_value(e.pmi) << '\t'
                  << e.class_followers << '\n';
  sink.finish();
  if (!a.output.empty()) {
    RunManifest m;
    m.subcommand = "pmi";
    m.set("class", a.class_value);
    m.set("min_count", a.min_count);
    m.set("top", a.top);
    m.inputs = {a.follows, a.labels};
    if (!a.vocab.empty()) m.inputs.push_back(a.vocab);
    m.outputs = {a.output};
    m.write(manifest_path_for(a.output));
  }
  return kOk;
}

int cmd_polarity(const PolarityArgs& a, std::ostream& out, std::ostream& err) {
  if (a.min_followers > 0 && a.vocab.empty())
    throw CLI::ValidationError("--min-followers",
                               "needs --vocab to supply follower counts");
  const EmbeddingStore store = load_embeddings(a.embeddings);
  const Anchors anchors = read_anchors(a.anchors);
  const auto targets = read_targets(a.targets);
  FollowerCounts counts;
  if (!a.vocab.empty())
    for (const VocabEntry& e : Vocabulary::load(a.vocab).entries())
      counts[e.entity_id] = e.follower_count;

  const PolarityRanking ranking = rank_by_po(store, targets, anchors, counts);
  for (const std::string& id : ranking.missing)
    err << "warning: target '" << id << "' has no embedding\n";
  const auto results = reliability_filter(ranking.results, a.min_followers);
  if (results.empty())
    err << "warning: no target has at least " << a.min_followers
        << " followers\n";

  OutputSink sink(a.output, out);
  write_polarity_results(sink.stream(), results);
  sink.finish();

  if (!a.gold.empty() && !results.empty()) {
    const auto gold = read_gold(a.gold);
    const PolarityAccuracy acc = binary_polarity_accuracy(results, gold);
    if (results.size() >= 2) {
      std::vector<double> po, g;
      for (const PolarityResult& r : results) {
        po.push_back(r.po_score);
        g.push_back(gold.at(r.entity_id));
      }
      err << "spearman_rho\t" << format_value(spearman(po, g)) << '\n';
    }
    err << "binary_accuracy\t" << format_value(acc.accuracy) << '\n'
        << "correct\t" << acc.correct << "\ntotal\t" << acc.total
        << "\nunclassified\t" << acc.unclassified << '\n';
  }

  if (!a.output.empty()) {
    RunManifest m;
    m.subcommand = "polarity";
    m.set("anchor_R", anchors.republican);
    m.set("anchor_D", anchors.democratic);
    m.set("min_followers", a.min_followers);
    m.inputs = {a.embeddings, a.anchors, a.targets};
    if (!a.gold.empty()) m.inputs.push_back(a.gold);
    if (!a.vocab.empty()) m.inputs.push_back(a.vocab);
    m.outputs = {a.output};
    m.write(manifest_path_for(a.output));
  }
  return kOk;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const SyntheticWorld world = generate_world(a.config);
  const auto records = sample_corpus(world, a.config);
  std::error_code ec;
  std::filesystem::create_directories(a.outdir, ec);
  if (ec) throw IoError("cannot create directory " + a.outdir + ": " + ec.message());
  const SynthPaths paths = SynthPaths::in_directory(a.outdir);
  emit_corpus(world, records, paths);
  out << "synth\t" << world.entity_ids.size() << " entities\t"
      << records.size() << " users\n";

  const SynthConfig& c = a.config;
  RunManifest m;
  m.subcommand = "synth";
  m.seed = c.seed;
  m.set("n_entities", c.n_entities);
  m.set("n_users", c.n_users);
  m.set("communities", c.n_communities);
  m.set("follows_mean", c.follows_mean);
  m.set("mixing", c.mixing);
  m.set("zipf", c.zipf_exponent);
  m.set("attr_noise", c.attribute_noise);
  m.set("axis_r", c.republican_community);
  m.set("axis_d", c.democratic_community);
  m.outputs = {paths.follows, paths.labels, paths.gold, paths.anchors,
               paths.targets};
  m.write((std::filesystem::path(a.outdir) / "manifest.json").string());
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Social entity embeddings from co-follow sets", "cofollow"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand(
      "stats", "Histogram of accounts by follower count");
  stats_cmd->add_option("--input", stats.input, "Follow records file")
      ->required();
  stats_cmd->add_option("--edges", stats.edges,
                        "Bucket lower bounds, starting at 1")
      ->delimiter(',');
  stats_cmd->add_option("--output", stats.output,
                        "Write the TSV here (default: stdout)");

  BuildVocabArgs bv;
  auto* bv_cmd = app.add_subcommand(
      "build-vocab", "Popularity-thresholded entity vocabulary");
  bv_cmd->add_option("--input", bv.input, "Follow records file")->required();
  bv_cmd->add_option("--min-followers", bv.min_followers,
                     "Minimum follower count k")
      ->check(CLI::PositiveNumber);
  bv_cmd->add_option("--max-follows", bv.max_follows,
                     "Drop users following more accounts than this")
      ->check(CLI::PositiveNumber);
  bv_cmd->add_option("--output", bv.output, "Vocabulary TSV")->required();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "Train entity embeddings");
  tr_cmd->add_option("--corpus", tr.corpus, "Follow records file")->required();
  tr_cmd->add_option("--vocab", tr.vocab, "Vocabulary TSV")->required();
  tr_cmd->add_option("--variant", tr.variant, "skipgram or cbow")
      ->check(CLI::IsMember({"skipgram", "cbow"}));
  tr_cmd->add_option("--dim", tr.config.dim, "Embedding dimension");
  tr_cmd->add_option("--negatives", tr.config.negatives,
                     "Negative samples per update");
  tr_cmd->add_option("--window", tr.config.window,
                     "Context radius within a shuffled user set");
  tr_cmd->add_option("--subsample", tr.config.subsample,
                     "Subsampling threshold t ('inf' disables)");
  tr_cmd->add_option("--lr", tr.config.lr_initial, "Initial learning rate");
  tr_cmd->add_option("--min-lr", tr.config.lr_min, "Final learning rate");
  tr_cmd->add_option("--epochs", tr.config.epochs, "Passes over the corpus");
  tr_cmd->add_option("--workers", tr.config.workers,
                     "Threads (runs are reproducible only with 1)");
  tr_cmd->add_option("--seed", tr.config.seed, "Random seed");
  tr_cmd->add_option("--max-follows", tr.max_follows,
                     "Must match the value used for build-vocab");
  tr_cmd->add_option("--output", tr.output,
                     "Embeddings file; stats and manifest are written beside it")
      ->required();

  SimilarArgs sim;
  auto* sim_cmd = app.add_subcommand("similar", "Nearest neighbours by cosine");
  sim_cmd->add_option("--embeddings", sim.embeddings, "Embeddings file")
      ->required();
  sim_cmd->add_option("--entity", sim.entity, "Query entity id")->required();
  sim_cmd->add_option("--top", sim.top, "Number of neighbours")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--output", sim.output, "Write the TSV here");

  TraitsArgs tt;
  auto* tt_cmd = app.add_subcommand(
      "traits", "Predict a binary user attribute from mean embeddings");
  tt_cmd->add_option("--embeddings", tt.embeddings, "Embeddings file")
      ->required();
  tt_cmd->add_option("--follows", tt.follows, "Follow records file")
      ->required();
  tt_cmd->add_option("--labels", tt.labels, "Labels TSV user_id<TAB>0|1")
      ->required();
  tt_cmd->add_option("--attribute", tt.attribute,
                     "Report name (default: labels file stem)");
  tt_cmd->add_option("--train-frac", tt.train_frac, "Training fraction");
  tt_cmd->add_option("--seed", tt.seed, "Split and SGD seed");
  tt_cmd->add_option("--epochs", tt.logreg.epochs, "Logistic regression epochs");
  tt_cmd->add_option("--lr", tt.logreg.lr, "Logistic regression step size");
  tt_cmd->add_flag("--shuffle-labels", tt.shuffle_labels,
                   "Permute labels under the seed (null baseline)");
  tt_cmd->add_option("--output", tt.output, "Write the report here");

  PmiArgs pm;
  auto* pm_cmd = app.add_subcommand("pmi", "Class-distinctive accounts by PMI");
  pm_cmd->add_option("--follows", pm.follows, "Follow records file")
      ->required();
  pm_cmd->add_option("--labels", pm.labels, "Labels TSV")->required();
  pm_cmd->add_option("--class", pm.class_value, "Class value 0 or 1")
      ->required()
      ->default_str("")
      ->check(CLI::Range(0, 1));
  pm_cmd->add_option("--min-count", pm.min_count,
                     "Minimum in-class followers")
      ->check(CLI::PositiveNumber);
  pm_cmd->add_option("--top", pm.top, "Number of accounts");
  pm_cmd->add_option("--vocab", pm.vocab, "Restrict to this vocabulary");
  pm_cmd->add_option("--output", pm.output, "Write the TSV here");

  PolarityArgs po;
  auto* po_cmd = app.add_subcommand(
      "polarity", "Rank entities by anchored political orientation");
  po_cmd->add_option("--embeddings", po.embeddings, "Embeddings file")
      ->required();
  po_cmd->add_option("--anchors", po.anchors, "Anchors file (R/D lines)")
      ->required();
  po_cmd->add_option("--targets", po.targets, "One entity id per line")
      ->required();
  po_cmd->add_option("--gold", po.gold,
                     "Gold TSV entity_id<TAB>score; prints rho and accuracy");
  po_cmd->add_option("--min-followers", po.min_followers,
                     "Drop targets with fewer followers (needs --vocab)");
  po_cmd->add_option("--vocab", po.vocab, "Vocabulary TSV for follower counts");
  po_cmd->add_option("--output", po.output, "Write the ranking here");

  SynthArgs sy;
  auto* sy_cmd = app.add_subcommand("synth", "Generate a planted synthetic world");
  sy_cmd->add_option("--n-entities", sy.config.n_entities, "Entities");
  sy_cmd->add_option("--n-users", sy.config.n_users, "Users");
  sy_cmd->add_option("--communities", sy.config.n_communities, "Communities G");
  sy_cmd->add_option("--follows-mean", sy.config.follows_mean,
                     "Mean follows per user");
  sy_cmd->add_option("--mixing", sy.config.mixing,
                     "Probability a follow is foreign");
  sy_cmd->add_option("--zipf", sy.config.zipf_exponent,
                     "Within-community popularity exponent");
  sy_cmd->add_option("--attr-noise", sy.config.attribute_noise,
                     "Attribute flip probability");
  sy_cmd->add_option("--axis-r", sy.config.republican_community,
                     "Community of the R pole");
  sy_cmd->add_option("--axis-d", sy.config.democratic_community,
                     "Community of the D pole");
  sy_cmd->add_option("--seed", sy.config.seed, "Random seed");
  sy_cmd->add_option("--outdir", sy.outdir, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (stats_cmd->parsed()) return cmd_stats(stats, out);
    if (bv_cmd->parsed()) return cmd_build_vocab(bv, out);
    if (tr_cmd->parsed()) return cmd_train(tr, out);
    if (sim_cmd->parsed()) return cmd_similar(sim, out);
    if (tt_cmd->parsed()) return cmd_traits(tt, out);
    if (pm_cmd->parsed()) return cmd_pmi(pm, out);
    if (po_cmd->parsed()) return cmd_polarity(po, out, err);
    if (sy_cmd->parsed()) return cmd_synth(sy, out);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace cofollow::cli
