// Copyright 2026 The coderec Authors.
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

#include "coderec/cli.h"

#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "coderec/code_features.h"
#include "coderec/error.h"
#include "coderec/hash.h"
#include "coderec/miner.h"
#include "coderec/run_config.h"
#include "coderec/service.h"
#include "coderec/synthetic.h"
#include "coderec/trainer.h"
#include "json.hpp"

namespace coderec {
namespace {

namespace fs = std::filesystem;

struct Workspace {
  std::shared_ptr<Dataset> dataset;
  DatasetSplit split;
  std::shared_ptr<TrainingData> data;
};

Workspace open_workspace(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("no dataset given (data.dataset or --dataset)");
  Workspace w;
  w.dataset = std::make_shared<Dataset>(load_dataset(cfg.dataset));
  w.split = split_by_time(w.dataset->records, cfg.t1, cfg.t2);
  FeatureOptions fo;
  fo.force_tfidf = cfg.force_tfidf || cfg.flags.tfidf_features;
  if (!cfg.features.empty()) fo.features_file = cfg.features;
  w.data = std::make_shared<TrainingData>(prepare_training_data(*w.dataset, w.split, cfg.hyper, fo));
  return w;
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot read " + p.string());
  return sha256_hex(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FormatError("cannot write " + p.string());
  out << text;
}

// A run directory holds config.ini, model.ckpt and train_log.jsonl.
struct LoadedRun {
  RunConfig cfg;
  Workspace ws;
  TrainedModel model;
  std::string checkpoint_hash;
};

LoadedRun load_run(const fs::path& dir, const std::vector<std::string>& overrides) {
  LoadedRun r;
  r.cfg = RunConfig::load(dir / "config.ini");
  for (const auto& o : overrides) r.cfg.set_override(o);
  r.ws = open_workspace(r.cfg);
  r.model = TrainedModel::load(dir / "model.ckpt", r.ws.data->mapping_hash);
  r.checkpoint_hash = file_hash(dir / "model.ckpt");
  return r;
}

std::string summary_text(const DatasetSummary& s) {
  std::ostringstream out;
  out << "users           " << s.users << "\n"
      << "retained users  " << s.retained_users << "\n"
      << "files           " << s.files << "\n"
      << "repositories    " << s.repos << "\n"
      << "train commits   " << s.train_commits << "\n"
      << "val commits     " << s.val_commits << "\n"
      << "test commits    " << s.test_commits << "\n";
  for (const auto& [b, n] : s.project_records) {
    out << std::left << std::setw(16) << (std::string(to_string(b)) + " records") << n << "\n";
  }
  out << "nnz(Y)          " << s.y_nnz << "\n"
      << "density         " << std::setprecision(6) << s.density << "\n";
  return out.str();
}

// Collects "section.key=value" overrides for options that were given.
class Overrides {
 public:
  void bind(CLI::Option* opt, std::string key, std::string* value) { items_.push_back({opt, std::move(key), value}); }
  std::vector<std::string> collect() const {
    std::vector<std::string> out = extra;
    for (const auto& it : items_) {
      if (it.opt->count() > 0) out.push_back(it.key + "=" + *it.value);
    }
    for (const auto& f : flags) out.push_back("ablation." + f + "=true");
    return out;
  }
  std::vector<std::string> extra;  // --set
  std::vector<std::string> flags;  // --flag

 private:
  struct Item {
    CLI::Option* opt;
    std::string key;
    std::string* value;
  };
  std::vector<Item> items_;
};

RunConfig resolve(const std::string& config_path, const Overrides& ov) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
  for (const auto& o : ov.collect()) cfg.set_override(o);
  cfg.validate();
  return cfg;
}

std::atomic<RecommendationServer*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Code recommendation from developer behavior and code semantics", "coderec"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

  std::string config_path;
  Overrides ov;
  // Storage for options mapped onto config keys.
  std::map<std::string, std::string> v;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", ov.extra, "Override a config value, section.key=value");
  };
  auto mapped = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    ov.bind(sub->add_option(flag, v[key], help), key, &v[key]);
  };

  auto* synth = app.add_subcommand("synth", "Write a planted synthetic dataset");
  std::string synth_out;
  SyntheticConfig sc;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--users", sc.users);
  synth->add_option("--repos", sc.repos);
  synth->add_option("--groups", sc.groups);
  synth->add_option("--seed", sc.seed);
  synth->add_option("--cold-fraction", sc.cold_fraction);

  auto* ingest = app.add_subcommand("ingest", "Crawl repositories into a dataset directory");
  common(ingest);
  std::string topics_file, ingest_out;
  bool offline = false;
  ingest->add_option("--topics-file", topics_file, "One topic per line")->check(CLI::ExistingFile);
  ingest->add_option("--out", ingest_out, "Dataset output directory")->required();
  mapped(ingest, "--seed", "run.seed", "Sampling seed");
  mapped(ingest, "--max-repos", "miner.sample_size", "Repositories to sample");
  mapped(ingest, "--workers", "miner.workers", "Parallel fetches");
  mapped(ingest, "--cache", "miner.cache", "Response cache directory");
  mapped(ingest, "--base-url", "miner.base_url", "API base URL");
  ingest->add_flag("--offline", offline, "Replay from the cache only");

  auto* prepare = app.add_subcommand("prepare", "Split a dataset and print its summary");
  common(prepare);
  std::string prepare_out;
  mapped(prepare, "--dataset", "data.dataset", "Dataset directory");
  prepare->add_option("--out", prepare_out, "Write id_map.tsv and summary.txt here");

  auto* encode = app.add_subcommand("encode", "Write TF-IDF segment features or validate imported ones");
  common(encode);
  std::string encode_out, encode_check;
  mapped(encode, "--dataset", "data.dataset", "Dataset directory");
  mapped(encode, "--segments", "hyper.n_segments", "Segments per file");
  mapped(encode, "--terms", "hyper.tfidf_terms", "Vocabulary size");
  encode->add_option("--out", encode_out, "CFEA output file");
  encode->add_option("--validate", encode_check, "CFEA file to check against the dataset")->check(CLI::ExistingFile);

  auto* train = app.add_subcommand("train", "Train a model into a run directory");
  common(train);
  mapped(train, "--dataset", "data.dataset", "Dataset directory");
  mapped(train, "--features", "data.features", "CFEA feature file");
  mapped(train, "--out", "run.output", "Run directory");
  mapped(train, "--model", "run.model", "coder, mf or lightgcn");
  mapped(train, "--seed", "run.seed", "Random seed");
  mapped(train, "--protocol", "run.protocol", "Validation protocol");
  mapped(train, "--epochs", "hyper.max_epochs", "Maximum epochs");
  mapped(train, "--lr", "hyper.lr", "Learning rate");
  train->add_option("--flag", ov.flags, "Ablation flag, e.g. disable_structural");

  auto* evaluate = app.add_subcommand("evaluate", "Score a trained run on the test interactions");
  std::string run_dir;
  bool as_json = false;
  evaluate->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--set", ov.extra, "Override a config value, section.key=value");
  mapped(evaluate, "--protocol", "run.protocol", "intra, cross or cold");
  evaluate->add_flag("--json", as_json, "Print the report as JSON");

  auto* recommend = app.add_subcommand("recommend", "Top-k files for one user");
  std::string user;
  std::size_t k = 10;
  std::string scope = "intra";
  recommend->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  recommend->add_option("--user", user, "User id or login")->required();
  recommend->add_option("--k", k, "Number of files");
  recommend->add_option("--scope", scope, "intra or cross")->check(CLI::IsMember({"intra", "cross"}));
  recommend->add_flag("--json", as_json, "Print the service's JSON body");

  auto* serve = app.add_subcommand("serve", "HTTP recommendation endpoint");
  serve->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  mapped(serve, "--host", "serve.host", "Bind address");
  mapped(serve, "--port", "serve.port", "Port");

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const auto previous_level = spdlog::get_level();
  if (quiet) spdlog::set_level(spdlog::level::warn);
  struct Restore {
    spdlog::level::level_enum l;
    ~Restore() { spdlog::set_level(l); }
  } restore{previous_level};

  try {
    if (*synth) {
      save_dataset(make_synthetic_dataset(sc), synth_out);
      out << "wrote synthetic dataset to " << synth_out << "\n";
      return kExitOk;
    }

    if (*ingest) {
      auto cfg = resolve(config_path, ov);
      auto& m = cfg.miner;
      if (!topics_file.empty()) {
        std::ifstream in(topics_file);
        m.topics.clear();
        for (std::string line; std::getline(in, line);) {
          auto t = line.substr(0, line.find('#'));
          t.erase(0, t.find_first_not_of(" \t\r"));
          t.erase(t.find_last_not_of(" \t\r") + 1);
          if (!t.empty()) m.topics.push_back(t);
        }
      }
      miner::CrawlCache cache(m.cache);
      std::unique_ptr<miner::Transport> transport;
      if (!offline) transport = miner::make_http_transport(m.base_url);
      miner::TokenBucket bucket(m.burst, m.requests_per_second);
      miner::ClientOptions co;
      if (const char* tok = std::getenv(m.token_env.c_str())) co.token = tok;
      miner::ApiClient api(transport.get(), &cache, &bucket, co);
      miner::CrawlOptions opts;
      opts.filter = {m.min_stars, m.min_contributors, m.min_history_months, m.topics, m.sample_size};
      opts.seed = cfg.seed;
      opts.workers = m.workers;
      opts.harvest.fetch_code = m.fetch_code;
      auto rep = miner::run_crawl(api, opts, ingest_out);
      out << "repositories " << rep.repos << "\nusers " << rep.users << "\nrecords " << rep.records
          << "\nskipped files " << rep.skipped_files << "\nfiles changed " << rep.files_written
          << "\nnetwork calls " << api.network_calls() << "\n";
      return kExitOk;
    }

    if (*prepare) {
      auto cfg = resolve(config_path, ov);
      if (cfg.dataset.empty()) throw ConfigError("no dataset given (data.dataset or --dataset)");
      const auto ds = load_dataset(cfg.dataset);
      const auto split = split_by_time(ds.records, cfg.t1, cfg.t2);
      const auto m = build_interaction_matrices(split, ds.num_users(), ds.num_files(), ds.num_repos());
      const auto text = summary_text(summarize(ds, split, m));
      out << text;
      if (!prepare_out.empty()) {
        write_text(fs::path(prepare_out) / "summary.txt", text);
        ds.write_id_map(fs::path(prepare_out) / "id_map.tsv");
      }
      return kExitOk;
    }

    if (*encode) {
      auto cfg = resolve(config_path, ov);
      if (cfg.dataset.empty()) throw ConfigError("no dataset given (data.dataset or --dataset)");
      const auto ds = load_dataset(cfg.dataset);
      if (!encode_check.empty()) {
        const auto f = import_segment_features(encode_check, ds);
        const auto header = read_segment_features(encode_check);
        out << "valid feature file: " << f.size() << " files, " << header.n_segments << " segments, "
            << header.d_in << " dims\n";
        return kExitOk;
      }
      if (encode_out.empty()) throw ArgumentError("encode needs --out or --validate");
      const auto split = split_by_time(ds.records, cfg.t1, cfg.t2);
      std::set<std::uint32_t> committed;
      for (const auto& r : split.train) {
        if (r.behavior == Behavior::kCommit) committed.insert(r.target);
      }
      const std::vector<std::uint32_t> train_files(committed.begin(), committed.end());
      const auto feats = tfidf_segment_features(ds, train_files, cfg.hyper.n_segments, cfg.hyper.tfidf_terms);
      write_segment_features(encode_out, feats);
      out << "wrote " << feats.file_ids.size() << " files x " << feats.n_segments << " segments x " << feats.d_in
          << " terms to " << encode_out << "\n";
      return kExitOk;
    }

    if (*train) {
      auto cfg = resolve(config_path, ov);
      cfg.dataset = fs::absolute(cfg.dataset);
      if (!cfg.features.empty()) cfg.features = fs::absolute(cfg.features);
      const auto ws = open_workspace(cfg);
      const fs::path dir = cfg.output;
      fs::create_directories(dir);
      std::ofstream log(dir / "train_log.jsonl", std::ios::binary);
      TrainOptions to;
      to.seed = cfg.seed;
      to.early_stopping = cfg.early_stopping;
      to.validation_protocol = cfg.protocol == Protocol::kCross ? Protocol::kCross : Protocol::kIntra;
      to.on_epoch = [&](const EpochLog& e) {
        log << nlohmann::json{{"epoch", e.epoch}, {"loss", e.loss}, {"val_ndcg10", e.val_ndcg10},
                              {"batches", e.batches}}
                   .dump()
            << "\n";
        log.flush();
      };
      auto model = train_model(cfg.model, *ws.data, cfg.hyper, cfg.flags, to);
      model.save(dir / "model.ckpt");
      cfg.save(dir / "config.ini");
      out << "trained " << model.tag() << ": " << model.log.size() << " epochs, best " << model.best_epoch << ", "
          << model.parameter_count() << " parameters\n"
          << "checkpoint " << (dir / "model.ckpt").string() << "\n";
      return kExitOk;
    }

    if (*evaluate) {
      auto run = load_run(run_dir, ov.collect());
      const auto snap = run.model.embed(*run.ws.data);
      auto report = evaluate_protocol(snap, *run.ws.data, run.cfg.protocol, run.cfg.ks);
      report.model = run.model.tag();
      write_text(fs::path(run_dir) / ("report_" + std::string(to_string(run.cfg.protocol)) + ".json"),
                 report.to_json());
      out << (as_json ? report.to_json() + "\n" : report.to_text());
      return kExitOk;
    }

    if (*recommend || *serve) {
      auto run = load_run(run_dir, ov.collect());
      auto service = std::make_shared<const RecommendationService>(run.ws.dataset, run.ws.data,
                                                                   run.model.embed(*run.ws.data), run.checkpoint_hash);
      if (*recommend) {
        const auto items = service->recommend(user, k, parse_protocol(scope));
        if (as_json) {
          out << recommendations_json(user, items) << "\n";
        } else {
          for (std::size_t i = 0; i < items.size(); ++i) {
            out << i + 1 << "\t" << items[i].file << "\t" << items[i].repo << "\t" << std::fixed
                << std::setprecision(6) << items[i].score << "\n";
          }
        }
        return kExitOk;
      }
      RecommendationServer server(service);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.run(run.cfg.host, run.cfg.port);
      g_server = nullptr;
      return kExitOk;
    }
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const IntegrityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIntegrity;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NotFoundError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace coderec
