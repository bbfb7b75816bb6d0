// Copyright 2026 The kgalign Authors.
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

// kgalign: command-line driver for every pipeline stage.
//
//   kgalign synth --n 200 --out-dir d/
//   kgalign load --data d/ --out task.bin
//   kgalign features --task task.bin --out feats.bin
//   kgalign train --task task.bin --feats feats.bin --model man --ckpt-out m.bin
//   kgalign eval --ckpt m.bin --task task.bin --report report.json
//
// Every command that writes an artifact also writes <artifact>.manifest.json.
// Failures print one line "error: <message>" to stderr and exit non-zero.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgalign/kgalign.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace kgalign;

namespace {

using Clock = std::chrono::steady_clock;

// Records what a command read and how it was configured, then writes the
// manifest next to each output.
class Run {
 public:
  Run(std::string command, CLI::App* app) : command_(std::move(command)), app_(app), start_(Clock::now()) {}

  void input(const std::string& role, const fs::path& path) {
    inputs_[role] = {{"path", path.string()}, {"fnv1a64", hex64(fnv1a64(read_file(path)))}};
  }

  void seed(std::uint64_t s) { seed_ = s; }

  void finish(const std::vector<fs::path>& outputs, const fs::path& manifest_path) const {
    json m;
    m["command"] = command_;
    m["flags"] = flags(app_);
    if (seed_) m["seed"] = *seed_;
    m["inputs"] = inputs_;
    json outs = json::array();
    for (const auto& p : outputs) outs.push_back(p.string());
    m["outputs"] = outs;
    m["version"] = std::string(kVersion);
    m["wall_time_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    write_file_atomic(manifest_path, m.dump(2) + "\n");
  }

  void finish(const fs::path& output) const { finish({output}, output.string() + ".manifest.json"); }

  // Effective value of every flag, defaults included.
  static json flags(CLI::App* app) {
    json f = json::object();
    for (const CLI::Option* opt : app->get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help" || name == "dump-config") continue;
      if (opt->get_expected_max() == 0) {
        f[name] = opt->count() > 0;
      } else if (opt->count() > 0) {
        auto res = opt->results();
        f[name] = res.size() == 1 ? json(res[0]) : json(res);
      } else if (!opt->get_default_str().empty()) {
        f[name] = opt->get_default_str();
      } else {
        f[name] = nullptr;
      }
    }
    return f;
  }

 private:
  std::string command_;
  CLI::App* app_;
  Clock::time_point start_;
  json inputs_ = json::object();
  std::optional<std::uint64_t> seed_;
};

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  for (auto tok : split(text, ',')) {
    std::int64_t k;
    if (!parse_int(tok, k) || k < 1) fail("--ks: expected positive integers, got '", std::string(tok), "'");
    ks.push_back(static_cast<std::size_t>(k));
  }
  KGALIGN_CHECK(!ks.empty(), "--ks is empty");
  return ks;
}

json ranking_json(const RankingResult& r) {
  json hits = json::object();
  for (const auto& [k, v] : r.hits) hits[std::to_string(k)] = v;
  return {{"queries", r.per_query_rank.size()}, {"hits", hits}, {"mean_rank", r.mean_rank}, {"mrr", r.mrr}};
}

json evaluation_json(const EmbeddingMatrix& emb, const AlignmentTask& task, const std::vector<std::size_t>& ks,
                     Universe universe) {
  json dirs = json::object();
  for (Direction d : {Direction::kSourceToTarget, Direction::kTargetToSource})
    dirs[std::string(direction_name(d))] = ranking_json(rank_all(emb, task, d, ks, universe));
  return {{"universe", std::string(universe_name(universe))}, {"directions", dirs}};
}

void emit_report(const json& report, const std::string& path, Run& run) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  write_file_atomic(path, text);
  run.finish(fs::path(path));
}

void check_task_matches(const Checkpoint& ck, const AlignmentTask& task) {
  KGALIGN_CHECK(ck.source_entities == task.source.entity_count && ck.target_entities == task.target.entity_count,
                "checkpoint was trained on ", ck.source_entities, "+", ck.target_entities,
                " entities, task has ", task.source.entity_count, "+", task.target.entity_count);
}

EmbeddingMatrix read_embedding_matrix(const fs::path& path, const AlignmentTask& task) {
  std::size_t missing = 0;
  auto m = to_matrix(parse_embedding_tsv(read_file(path), path.string()), task.total(), &missing);
  KGALIGN_CHECK(missing == 0, path.string(), ": ", missing, " of ", task.total(), " entities have no embedding row");
  return m;
}

// Graph embedding from either a checkpoint or an embedding file.
EmbeddingMatrix graph_embedding(const std::string& ckpt, const std::string& emb, const AlignmentTask& task,
                                Run& run) {
  KGALIGN_CHECK(ckpt.empty() != emb.empty(), "give exactly one of --ckpt and --emb");
  if (!ckpt.empty()) {
    run.input("ckpt", ckpt);
    Checkpoint ck = load_checkpoint(ckpt);
    check_task_matches(ck, task);
    return ck.embeddings;
  }
  run.input("emb", emb);
  return read_embedding_matrix(emb, task);
}

std::string single_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kgalign: cross-lingual knowledge-graph entity alignment"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::function<void()> action;

  // Adds --dump-config, which prints the effective flags as JSON and exits.
  auto with_dump = [](CLI::App* sub, bool& dump) {
    sub->add_flag("--dump-config", dump, "Print the effective configuration as JSON and exit");
  };
  bool dump = false;

  // load
  std::string data_dir, out;
  double split_fraction = 0.3;
  std::uint64_t seed = 7;
  std::string id_map, train_ills_out;
  {
    auto* sub = app.add_subcommand("load", "Read a dataset directory and write a binary task");
    sub->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    sub->add_option("--split", split_fraction, "Fraction of ILLs used for training")->capture_default_str();
    sub->add_option("--seed", seed, "Seed of the train/test split")->capture_default_str();
    sub->add_option("--out", out, "Output task file")->required();
    sub->add_option("--id-map", id_map, "Also write combined id -> raw id TSV");
    sub->add_option("--train-ills-out", train_ills_out, "Also write the training ILLs as TSV (combined ids)");
    with_dump(sub, dump);
    sub->callback([&, sub] {
      action = [&, sub] {
        Run run("load", sub);
        run.seed(seed);
        for (const char* name : {"ent_ids_1", "ent_ids_2", "triples_1", "triples_2", "attrs_1", "attrs_2",
                                 "ill_ent_ids"})
          run.input(name, fs::path(data_dir) / name);
        AlignmentTask task = load_task(data_dir, split_fraction, seed);
        save_task(task, out);
        std::vector<fs::path> outputs{out};
        if (!id_map.empty()) {
          std::string text;
          for (EntityId e = 0; e < task.total(); ++e) {
            const bool src = task.is_source(e);
            const auto& g = src ? task.source : task.target;
            const std::size_t local = src ? e : e - task.offset();
            text += str_cat(e, '\t', g.raw_ids[local], '\t', src ? "src" : "tgt", '\t', g.uris[local], '\n');
          }
          write_file_atomic(id_map, text);
          outputs.emplace_back(id_map);
        }
        if (!train_ills_out.empty()) {
          write_file_atomic(train_ills_out, format_ills(task.train_ills));
          outputs.emplace_back(train_ills_out);
        }
        run.finish(outputs, out + ".manifest.json");
        std::cerr << "task: " << task.source.entity_count << "+" << task.target.entity_count << " entities, "
                  << task.train_ills.size() << " train / " << task.test_ills.size() << " test ILLs\n";
      };
    });
  }

  // features
  std::string task_path;
  std::size_t top_f = kDefaultTopF;
  {
    auto* sub = app.add_subcommand("features", "Build relation and attribute count features");
    sub->add_option("--task", task_path, "Task file")->required()->check(CLI::ExistingFile);
    sub->add_option("--top-f", top_f, "Vocabulary size per channel")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Output feature file")->required();
    with_dump(sub, dump);
    sub->callback([&, sub] {
      action = [&, sub] {
        Run run("features", sub);
        run.input("task", task_path);
        FeatureSet feats = build_features(load_task_cache(task_path), top_f);
        save_features(feats, out);
        run.finish(fs::path(out));
      };
    });
  }

  // synth
  SynthConfig synth;
  std::optional<double> noise, structural_noise, feature_noise;
  std::string out_dir;
  {
    auto* sub = app.add_subcommand("synth", "Generate a synthetic bilingual dataset directory");
    sub->add_option("--n", synth.n_entities, "Entities per graph")->capture_default_str();
    sub->add_option("--density", synth.edge_density, "Edge probability per entity pair")->capture_default_str();
    sub->add_option("--noise", noise, "Structural and feature noise");
    sub->add_option("--structural-noise", structural_noise, "Fraction of target edges rewired");
    sub->add_option("--feature-noise", feature_noise, "Fraction of target incidences dropped");
    sub->add_option("--relations", synth.n_relations, "Relation types")->capture_default_str();
    sub->add_option("--attributes", synth.n_attributes, "Attribute types")->capture_default_str();
    sub->add_option("--types", synth.n_types, "Entity classes; 0 = one per entity")->capture_default_str();
    sub->add_option("--attrs-per-entity", synth.attributes_per_entity, "Expected attributes per class")
        ->capture_default_str();
    sub->add_option("--ill-fraction", synth.ill_fraction, "Fraction of entities with a gold link")
        ->capture_default_str();
    sub->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
    sub->add_option("--out-dir", out_dir, "Output dataset directory")->required();
    with_dump(sub, dump);
    sub->callback([&, sub] {
      action = [&, sub] {
        Run run("synth", sub);
        run.seed(synth.seed);
        if (noise) synth.structural_noise = synth.feature_noise = *noise;
        if (structural_noise) synth.structural_noise = *structural_noise;
        if (feature_noise) synth.feature_noise = *feature_noise;
        write_raw_dataset(generate_raw(synth), out_dir);
        run.finish({out_dir}, fs::path(out_dir) / "manifest.json");
      };
    });
  }

  // train
  std::string feats_path, model_name = "hman", drop = "none", ckpt_out, loss_out, dims;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  double margin = 3.0;
  std::size_t neg_k = 5, resample = 10, layers = 2, log_every = 0;
  bool no_highway = false;
  {
    auto* sub = app.add_subcommand("train", "Train MAN or HMAN and write a checkpoint");
    sub->add_option("--task", task_path, "Task file")->required()->check(CLI::ExistingFile);
    sub->add_option("--feats", feats_path, "Feature file")->required()->check(CLI::ExistingFile);
    sub->add_option("--model", model_name, "man or hman")->capture_default_str();
    sub->add_option("--margin", margin, "Margin of the ranking loss")->capture_default_str();
    sub->add_option("--epochs", epochs, "Epochs (default: 2000 man, 50000 hman)");
    sub->add_option("--lr", lr, "Learning rate (default: 1.0 man, 0.01 hman)");
    sub->add_option("--neg-k", neg_k, "Negatives per positive and side")->capture_default_str();
    sub->add_option("--resample", resample, "Epochs between negative resampling")->capture_default_str();
    sub->add_option("--seed", seed, "Initialization and sampling seed")->capture_default_str();
    sub->add_option("--drop", drop, "Channels to remove: none or a list of te,re,ae")->capture_default_str();
    sub->add_option("--dims", dims, "Branch widths topo,rel,attr (default 200,100,100)");
    sub->add_option("--layers", layers, "GCN layers")->capture_default_str();
    sub->add_flag("--no-highway", no_highway, "HMAN feature branches without the highway gate");
    sub->add_option("--ckpt-out", ckpt_out, "Output checkpoint")->required();
    sub->add_option("--loss-out", loss_out, "Loss curve CSV (epoch,loss)");
    sub->add_option("--log-every", log_every, "Print the loss every N epochs (0 = never)")->capture_default_str();
    with_dump(sub, dump);
    sub->callback([&, sub] {
      action = [&, sub] {
        Run run("train", sub);
        run.seed(seed);
        run.input("task", task_path);
        run.input("feats", feats_path);
        TrainConfig cfg = TrainConfig::defaults(parse_variant(model_name));
        cfg.margin = margin;
        if (epochs) cfg.epochs = *epochs;
        if (lr) cfg.learning_rate = *lr;
        cfg.negatives = neg_k;
        cfg.resample_interval = resample;
        cfg.seed = seed;
        cfg.drop = ChannelSet::parse(drop);
        KGALIGN_CHECK(!ChannelSet::all().without(cfg.drop).empty(), "--drop ", drop, " removes every channel");
        cfg.model.layers = layers;
        cfg.model.highway = !no_highway;
        if (!dims.empty()) {
          auto parts = split(dims, ',');
          std::int64_t d[3];
          KGALIGN_CHECK(parts.size() == 3 && parse_int(parts[0], d[0]) && parse_int(parts[1], d[1]) &&
                            parse_int(parts[2], d[2]) && d[0] > 0 && d[1] > 0 && d[2] > 0,
                        "--dims: expected three positive integers topo,rel,attr");
          cfg.model.topo_dim = d[0];
          cfg.model.rel_dim = d[1];
          cfg.model.attr_dim = d[2];
        }
        AlignmentTask task = load_task_cache(task_path);
        FeatureSet feats = load_features(feats_path);
        EpochCallback log;
        if (log_every > 0)
          log = [&](std::size_t epoch, double loss) {
            if (epoch % log_every == 0) std::cerr << "epoch " << epoch << " loss " << format_double(loss) << "\n";
          };
        TrainResult res = train(task, feats, cfg, log);
        Checkpoint ck{res.params, feats.top_f, task.source.entity_count, task.target.entity_count,
                      std::move(res.embeddings)};
        save_checkpoint(ck, ckpt_out);
        std::vector<fs::path> outputs{ckpt_out};
        if (!loss_out.empty()) {
          std::string csv = "epoch,loss\n";
          for (std::size_t i = 0; i < res.loss_curve.size(); ++i)
            csv += str_cat(i + 1, ',', format_double(res.loss_curve[i]), '\n');
          write_file_atomic(loss_out, csv);
          outputs.emplace_back(loss_out);
        }
        run.finish(outputs, ckpt_out + ".manifest.json");
      };
    });
  }

  // eval
  std::string ckpt, emb, ks_text = "1,10,50", universe_name_ = "test", report;
  {
    auto* sub = app.add_subcommand("eval", "Rank held-out ILLs by l1 distance in both directions");
    sub->add_option("--ckpt", ckpt, "Checkpoint")->check(CLI::ExistingFile);
    sub->add_option("--emb", emb, "Embedding TSV instead of a checkpoint")->check(CLI::ExistingFile);
    sub->add_option("--task", task_path, "Task file")->required()->check(CLI::ExistingFile);
    sub->add_option("--ks", ks_text, "Cutoffs for Hits@k")->capture_default_str();
    sub->add_option("--universe", universe_name_, "Candidates: test or all")->capture_default_str();
    sub->add_option("--report", report, "Report JSON (default: stdout)");
    with_dump(sub, dump);
    sub->callback([&, sub] {
      action = [&, sub] {
        Run run("eval", sub);
        run.input("task", task_path);
        AlignmentTask task = load_task_cache(task_path);
        const Universe universe = parse_universe(universe_name_);
        EmbeddingMatrix m = graph_embedding(ckpt, emb, task, run);
        emit_report(evaluation_json(m, task, parse_ks(ks_text), universe), report, run);
      };
    });
  }

  // candidates
  std::size_t q = 200;
  {
    auto* sub = app.add_subcommand("candidates", "Write the top-q target candidates of each test source");
    sub->add_option("--ckpt", ckpt, "Checkpoint")->check(CLI::ExistingFile);
    sub->add_option("--emb", emb, "Embedding TSV instead of a checkpoint")->check(CLI::ExistingFile);
    sub->add_option("--task", task_path, "Task file")->required()->check(CLI::ExistingFile);
    sub->add_option("--q", q, "Pool size")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--universe", universe_name_, "Candidates: test or all")->capture_default_str();
    sub->add_option("--out", out, "Output pool TSV")->required();
    with_dump(sub, dump);
    sub->callback([&, sub] {
      action = [&, sub] {
        Run run("candidates", sub);
        run.input("task", task_path);
        AlignmentTask task = load_task_cache(task_path);
        EmbeddingMatrix m = graph_embedding(ckpt, emb, task, run);
        CandidatePool pool = top_q_candidates(m, task, q, parse_universe(universe_name_));
        write_file_atomic(out, format_pool(pool));
        run.finish(fs::path(out));
        std::cerr << "pool recall@" << q << ": " << format_double(pool_recall(pool, task)) << "\n";
      };
    });
  }

  // fuse
  std::string graph_emb, text_emb;
  double tau = 0.8;
  bool do_eval = false;
  {
    auto* sub = app.add_subcommand("fuse", "Weighted concatenation of graph and text embeddings");
    sub->add_option("--graph-emb", graph_emb, "Graph embedding TSV")->check(CLI::ExistingFile);
    sub->add_option("--ckpt", ckpt, "Checkpoint instead of --graph-emb")->check(CLI::ExistingFile);
    sub->add_option("--text-emb", text_emb, "Text embedding TSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--tau", tau, "Weight of the graph block")->capture_default_str();
    sub->add_option("--task", task_path, "Task file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Fused embedding TSV");
    sub->add_flag("--eval", do_eval, "Evaluate the fused embedding");
    sub->add_option("--ks", ks_text, "Cutoffs for Hits@k")->capture_default_str();
    sub->add_option("--universe", universe_name_, "Candidates: test or all")->capture_default_str();
    sub->add_option("--report", report, "Report JSON (default: stdout)");
    with_dump(sub, dump);
    sub->callback([&, sub] {
      action = [&, sub] {
        Run run("fuse", sub);
        run.input("task", task_path);
        run.input("text_emb", text_emb);
        AlignmentTask task = load_task_cache(task_path);
        EmbeddingMatrix g = graph_embedding(ckpt, graph_emb, task, run);
        FusedEmbedding fused = weighted_concat(g, parse_embedding_tsv(read_file(text_emb), text_emb), tau);
        if (fused.missing_text_rows > 0)
          std::cerr << "warning: " << fused.missing_text_rows << " entities have no text embedding (zero-filled)\n";
        KGALIGN_CHECK(do_eval || !out.empty(), "fuse needs --out, --eval or both");
        if (!out.empty()) {
          write_file_atomic(out, format_embedding_tsv(to_embedding_file(fused.matrix)));
          run.finish(fs::path(out));
        }
        if (do_eval) {
          json r = evaluation_json(fused.matrix, task, parse_ks(ks_text), parse_universe(universe_name_));
          r["tau"] = tau;
          r["missing_text_rows"] = fused.missing_text_rows;
          emit_report(r, report, run);
        }
      };
    });
  }

  // rerank
  std::string pool_path, scores_path;
  {
    auto* sub = app.add_subcommand("rerank", "Reorder candidate pools by external pair scores");
    sub->add_option("--pool", pool_path, "Pool TSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--scores", scores_path, "Score TSV")->required()->check(CLI::ExistingFile);
    sub->add_option("--task", task_path, "Task file")->required()->check(CLI::ExistingFile);
    sub->add_flag("--eval", do_eval, "Accepted for symmetry with fuse; rerank always evaluates");
    sub->add_option("--ks", ks_text, "Cutoffs for Hits@k")->capture_default_str();
    sub->add_option("--report", report, "Report JSON (default: stdout)");
    with_dump(sub, dump);
    sub->callback([&, sub] {
      action = [&, sub] {
        Run run("rerank", sub);
        run.input("task", task_path);
        run.input("pool", pool_path);
        run.input("scores", scores_path);
        AlignmentTask task = load_task_cache(task_path);
        CandidatePool pool = parse_pool(read_file(pool_path), pool_path);
        RankingResult r = rerank(pool, parse_scores(read_file(scores_path), scores_path), task, parse_ks(ks_text));
        json rep = {{"q", pool.q},
                    {"pool_recall", pool_recall(pool, task)},
                    {"directions", {{std::string(direction_name(r.direction)), ranking_json(r)}}}};
        emit_report(rep, report, run);
      };
    });
  }

  // export-emb
  {
    auto* sub = app.add_subcommand("export-emb", "Write the checkpoint's entity embeddings as TSV");
    sub->add_option("--ckpt", ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output embedding TSV")->required();
    with_dump(sub, dump);
    sub->callback([&, sub] {
      action = [&, sub] {
        Run run("export-emb", sub);
        run.input("ckpt", ckpt);
        write_file_atomic(out, format_embedding_tsv(to_embedding_file(load_checkpoint(ckpt).embeddings)));
        run.finish(fs::path(out));
      };
    });
  }

  // check-text
  std::size_t text_dim = kTextEmbeddingDim;
  {
    auto* sub = app.add_subcommand("check-text", "Validate files produced by the description encoder");
    sub->add_option("--task", task_path, "Task file")->required()->check(CLI::ExistingFile);
    sub->add_option("--text-emb", text_emb, "Text embedding TSV")->check(CLI::ExistingFile);
    sub->add_option("--scores", scores_path, "Score TSV")->check(CLI::ExistingFile);
    sub->add_option("--pool", pool_path, "Pool the scores must cover")->check(CLI::ExistingFile);
    sub->add_option("--dim", text_dim, "Expected embedding width")->capture_default_str();
    with_dump(sub, dump);
    sub->callback([&] {
      action = [&] {
        KGALIGN_CHECK(!text_emb.empty() || !scores_path.empty(), "nothing to check: give --text-emb and/or --scores");
        KGALIGN_CHECK(scores_path.empty() || !pool_path.empty(), "--scores needs --pool");
        AlignmentTask task = load_task_cache(task_path);
        std::vector<std::string> problems;
        if (!text_emb.empty()) {
          auto f = parse_embedding_tsv(read_file(text_emb), text_emb);
          problems = check_text_embeddings(f, task, text_dim);
          if (problems.empty()) {
            auto sep = gold_separation(f, task);
            std::cout << "text-emb ok: " << f.rows.size() << " rows, gold l1 " << format_double(sep.gold)
                      << ", random l1 " << format_double(sep.random) << "\n";
          }
        }
        if (!scores_path.empty()) {
          auto more = check_scores(parse_scores(read_file(scores_path), scores_path),
                                   parse_pool(read_file(pool_path), pool_path));
          if (more.empty()) std::cout << "scores ok\n";
          problems.insert(problems.end(), more.begin(), more.end());
        }
        if (!problems.empty())
          fail(problems.size(), " conformance problem(s); first: ", problems.front());
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << single_line(e.what()) << "\n";
    return 2;
  }

  if (dump) {
    for (CLI::App* sub : app.get_subcommands()) std::cout << Run::flags(sub).dump(2) << "\n";
    return 0;
  }
  try {
    action();
  } catch (const std::exception& e) {
    std::cerr << "error: " << single_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
