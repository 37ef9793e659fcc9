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

#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <set>
#include <sstream>

#include "coderec/error.h"
#include "coderec/hash.h"
#include "coderec/run_config.h"
#include "coderec/service.h"
#include "coderec/synthetic.h"
#include "coderec/trainer.h"
#include "json.hpp"
#include "testing/fake_github.h"
#include "testing/temp_dir.h"

namespace coderec {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;
using coderec::testing::TempDir;

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "coderec");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

const std::string kToy = std::string(CODEREC_FIXTURE_DIR) + "/toy";

TEST(ConfigText, SectionsCommentsAndDefaultSection) {
  auto s = parse_config_text("seed = 4\n# comment\n[hyper]\nlr = 0.5 ; trailing\n\n[data]\n dataset =  /x/y \n");
  EXPECT_EQ(s["run"]["seed"], "4");
  EXPECT_EQ(s["hyper"]["lr"], "0.5");
  EXPECT_EQ(s["data"]["dataset"], "/x/y");
}

TEST(ConfigText, MalformedLinesNameTheLine) {
  try {
    parse_config_text("[run]\nseed 4\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text("[run\n"), ConfigError);
}

TEST(RunConfig, UnknownKeysAndBadValuesAreRejected) {
  EXPECT_THROW(RunConfig::from_text("[hyper]\nwidth = 3\n"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("[nowhere]\nx = 1\n"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("[run]\nseed = minus one\n"), ConfigError);
  EXPECT_THROW(RunConfig::from_text("[ablation]\ndisable_everything = true\n"), ConfigError);
}

TEST(RunConfig, TextRoundTripIsExact) {
  RunConfig c;
  c.seed = 9;
  c.dataset = "/data/db";
  c.hyper.lr = 0.0123;
  c.hyper.behaviors = {Behavior::kStar, Behavior::kFork};
  c.flags.set("disable_structural");
  c.flags.set("C");
  c.ks = {1, 7};
  c.protocol = Protocol::kCross;
  c.miner.topics = {"database", "sql"};
  const auto text = c.to_text();
  const auto back = RunConfig::from_text(text);
  EXPECT_EQ(back.to_text(), text);
  EXPECT_EQ(back.flags, c.flags);
  EXPECT_EQ(back.hyper.lr, 0.0123);
  EXPECT_EQ(back.ks, (std::vector<std::size_t>{1, 7}));
}

TEST(RunConfig, OverridesWinOverFileValues) {
  auto c = RunConfig::from_text("[hyper]\nlr = 0.5\n[ablation]\ndisable_fusion = true\n");
  c.set_override("hyper.lr=0.25");
  c.set_override("seed=3");
  c.set_override("ablation.disable_fusion=false");
  EXPECT_EQ(c.hyper.lr, 0.25);
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(c.flags.tag(), "CD");
  EXPECT_THROW(c.set_override("no-equals"), ConfigError);
}

TEST(RunConfig, ValidationCatchesInconsistentRuns) {
  RunConfig c;
  c.t1 = c.t2;
  EXPECT_THROW(c.validate(), ConfigError);
  RunConfig d;
  d.ks = {0};
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"launch"}).code, kExitUsage);
  EXPECT_EQ(cli({"prepare", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"prepare"}).code, kExitUsage);  // no dataset
  EXPECT_EQ(cli({"prepare", "--dataset", kToy, "--set", "hyper.lr=fast"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST(Cli, BrokenDatasetExitsWithThree) {
  TempDir tmp;
  auto r = cli({"prepare", "--dataset", (tmp.path() / "missing").string()});
  EXPECT_EQ(r.code, kExitIntegrity);
  EXPECT_NE(r.err.find("not found"), std::string::npos) << r.err;
}

TEST(Cli, PrepareReportsDensity) {
  TempDir tmp;
  auto r = cli({"prepare", "--dataset", kToy, "--out", tmp.path().string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  // Train commits: alice-modeling_bert, bob-DataLoaders; 2 users x 3 files.
  EXPECT_NE(r.out.find("nnz(Y)          2\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("density         0.333333\n"), std::string::npos) << r.out;
  EXPECT_EQ(slurp(tmp.path() / "summary.txt"), r.out);
  EXPECT_TRUE(fs::exists(tmp.path() / "id_map.tsv"));
}

TEST(Cli, ConfigFileFeedsSubcommands) {
  TempDir tmp;
  const auto cfg = tmp.path() / "run.ini";
  std::ofstream(cfg) << "[data]\ndataset = " << kToy << "\n";
  auto r = cli({"prepare", "--config", cfg.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  auto bad = cli({"prepare", "--config", cfg.string(), "--dataset", (tmp.path() / "nope").string()});
  EXPECT_EQ(bad.code, kExitIntegrity);  // the flag wins
}

// One small trained run shared by the tests below.
class TrainedRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    tmp_ = new TempDir;
    SyntheticConfig sc;
    sc.users = 30;
    sc.seed = 2;
    save_dataset(make_synthetic_dataset(sc), dataset());
    auto r = cli(train_args(run_dir(), {"--flag", "disable_structural"}));
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  static void TearDownTestSuite() {
    delete tmp_;
    tmp_ = nullptr;
  }

  static std::vector<std::string> train_args(const fs::path& out, std::vector<std::string> extra) {
    std::vector<std::string> a{"-q",         "train",        "--dataset",         dataset().string(),
                               "--out",      out.string(),   "--epochs",          "15",
                               "--set",      "hyper.lr=0.01", "--set",            "hyper.dim=8",
                               "--set",      "hyper.attention_size=8", "--set", "hyper.n_segments=4",
                               "--set",      "hyper.tfidf_terms=32"};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }
  static fs::path dataset() { return tmp_->path() / "ds"; }
  static fs::path run_dir() { return tmp_->path() / "run"; }
  static std::string run() { return run_dir().string(); }

  static TempDir* tmp_;
};

TempDir* TrainedRun::tmp_ = nullptr;

TEST_F(TrainedRun, RunDirectoryIsComplete) {
  EXPECT_TRUE(fs::exists(run_dir() / "model.ckpt"));
  EXPECT_TRUE(fs::exists(run_dir() / "config.ini"));
  auto cfg = RunConfig::load(run_dir() / "config.ini");
  EXPECT_TRUE(cfg.flags.disable_structural);
  EXPECT_EQ(cfg.hyper.dim, 8u);
  std::ifstream log(run_dir() / "train_log.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(log, line); ++lines) EXPECT_TRUE(json::parse(line).contains("val_ndcg10"));
  EXPECT_GT(lines, 0u);
}

TEST_F(TrainedRun, EvaluateReportIsTaggedWithTheVariant) {
  auto r = cli({"-q", "evaluate", "--run", run(), "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["model"], "CD-S");
  EXPECT_EQ(j["protocol"], "intra");
  EXPECT_EQ(json::parse(slurp(run_dir() / "report_intra.json"))["model"], "CD-S");
  auto cross = cli({"-q", "evaluate", "--run", run(), "--protocol", "cross", "--json"});
  ASSERT_EQ(cross.code, kExitOk) << cross.err;
  EXPECT_EQ(json::parse(cross.out)["protocol"], "cross");
}

TEST_F(TrainedRun, ReportIsReproducibleFromTheArchivedConfig) {
  TempDir again;
  auto cfg = RunConfig::load(run_dir() / "config.ini");
  cfg.output = again.path() / "run";
  cfg.save(again.path() / "archived.ini");
  auto t = cli({"-q", "train", "--config", (again.path() / "archived.ini").string()});
  ASSERT_EQ(t.code, kExitOk) << t.err;
  auto a = cli({"-q", "evaluate", "--run", run(), "--json"});
  auto b = cli({"-q", "evaluate", "--run", (again.path() / "run").string(), "--json"});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  auto ja = json::parse(a.out), jb = json::parse(b.out);
  ja.erase("ms_per_example");
  jb.erase("ms_per_example");
  EXPECT_EQ(ja, jb);
}

TEST_F(TrainedRun, RecommendGivesDistinctFilesInDescendingScore) {
  auto r = cli({"-q", "recommend", "--run", run(), "--user", "dev0", "--k", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in(r.out);
  std::set<std::string> files;
  std::vector<double> scores;
  for (std::string line; std::getline(in, line);) {
    std::istringstream f(line);
    std::string rank, file, repo;
    double score;
    f >> rank >> file >> repo >> score;
    files.insert(file);
    scores.push_back(score);
  }
  EXPECT_EQ(files.size(), 3u);
  EXPECT_TRUE(std::is_sorted(scores.rbegin(), scores.rend()));
}

TEST_F(TrainedRun, RecommendAcceptsIdOrLogin) {
  auto by_login = cli({"-q", "recommend", "--run", run(), "--user", "dev0", "--k", "4", "--json"});
  auto by_id = cli({"-q", "recommend", "--run", run(), "--user", "1000", "--k", "4", "--json"});
  ASSERT_EQ(by_id.code, kExitOk);
  EXPECT_EQ(json::parse(by_login.out)["items"], json::parse(by_id.out)["items"]);
}

TEST_F(TrainedRun, UnknownUserIsNotFound) {
  auto r = cli({"-q", "recommend", "--run", run(), "--user", "nobody", "--k", "3"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("unknown user"), std::string::npos);
}

TEST_F(TrainedRun, CheckpointForAnotherDatasetIsRefused) {
  TempDir other;
  SyntheticConfig sc;
  sc.users = 12;
  sc.seed = 9;
  save_dataset(make_synthetic_dataset(sc), other.path());
  auto r = cli({"-q", "evaluate", "--run", run(), "--set", "data.dataset=" + other.path().string()});
  EXPECT_EQ(r.code, kExitIntegrity);
  EXPECT_NE(r.err.find("mapping hash"), std::string::npos) << r.err;
}

TEST_F(TrainedRun, EncodeWritesAndValidatesFeatures) {
  TempDir tmp;
  const auto f = tmp.path() / "tfidf.cfea";
  auto w = cli({"encode", "--dataset", dataset().string(), "--out", f.string(), "--segments", "4", "--terms", "16"});
  ASSERT_EQ(w.code, kExitOk) << w.err;
  auto v = cli({"encode", "--dataset", dataset().string(), "--validate", f.string()});
  ASSERT_EQ(v.code, kExitOk) << v.err;
  EXPECT_NE(v.out.find("4 segments"), std::string::npos);
  auto mismatch = cli({"encode", "--dataset", kToy, "--validate", f.string()});
  EXPECT_EQ(mismatch.code, kExitIntegrity);
  auto t = cli(train_args(tmp.path() / "run", {"--features", f.string(), "--set", "hyper.max_epochs=2"}));
  EXPECT_EQ(t.code, kExitOk) << t.err;
}

class ServeTest : public TrainedRun {
 protected:
  void SetUp() override {
    cfg_ = RunConfig::load(run_dir() / "config.ini");
    ds_ = std::make_shared<Dataset>(load_dataset(cfg_.dataset));
    auto split = split_by_time(ds_->records, cfg_.t1, cfg_.t2);
    data_ = std::make_shared<TrainingData>(prepare_training_data(*ds_, split, cfg_.hyper));
    auto model = TrainedModel::load(run_dir() / "model.ckpt", data_->mapping_hash);
    hash_ = sha256_hex(slurp(run_dir() / "model.ckpt"));
    service_ = std::make_shared<const RecommendationService>(ds_, data_, model.embed(*data_), hash_);
    server_ = std::make_unique<RecommendationServer>(service_);
    port_ = server_->start("127.0.0.1", 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override { server_->stop(); }

  RunConfig cfg_;
  std::shared_ptr<Dataset> ds_;
  std::shared_ptr<TrainingData> data_;
  std::string hash_;
  std::shared_ptr<const RecommendationService> service_;
  std::unique_ptr<RecommendationServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(ServeTest, HealthzReportsTheCheckpointHash) {
  auto res = client_->Get("/healthz");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  auto j = json::parse(res->body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["model_hash"], hash_);
}

TEST_F(ServeTest, MalformedQueriesAre400) {
  for (const auto* q : {"/recommend?user=dev0&k=0", "/recommend?k=3", "/recommend?user=dev0&k=three",
                        "/recommend?user=dev0&k=-1", "/recommend?user=dev0&scope=galaxy"}) {
    auto res = client_->Get(q);
    ASSERT_TRUE(res) << q;
    EXPECT_EQ(res->status, 400) << q;
  }
}

TEST_F(ServeTest, UnknownUserIs404) {
  auto res = client_->Get("/recommend?user=ghost&k=3");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ServeTest, ResponseMatchesTheRecommendCommand) {
  for (const auto* scope : {"intra", "cross"}) {
    auto res = client_->Get(std::string("/recommend?user=dev5&k=5&scope=") + scope);
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    auto r = cli({"-q", "recommend", "--run", run(), "--user", "dev5", "--k", "5", "--scope", scope, "--json"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(res->body + "\n", r.out) << scope;
    auto j = json::parse(res->body);
    EXPECT_EQ(j["user"], "dev5");
    ASSERT_EQ(j["items"].size(), 5u);
    EXPECT_TRUE(j["items"][0].contains("repo"));
  }
}

TEST_F(ServeTest, ConcurrentRequestsAgree) {
  const auto expected = client_->Get("/recommend?user=dev1&k=4")->body;
  std::vector<std::thread> ts;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&] {
      httplib::Client c("127.0.0.1", port_);
      for (int i = 0; i < 10; ++i) {
        auto res = c.Get("/recommend?user=dev1&k=4");
        if (!res || res->body != expected) ++mismatches;
      }
    });
  }
  for (auto& t : ts) t.join();
  EXPECT_EQ(mismatches.load(), 0);
}

TEST_F(ServeTest, SwapReplacesTheModel) {
  auto model = TrainedModel::load(run_dir() / "model.ckpt", data_->mapping_hash);
  server_->swap(std::make_shared<const RecommendationService>(ds_, data_, model.embed(*data_), "replacement"));
  auto res = client_->Get("/healthz");
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["model_hash"], "replacement");
}

TEST(Ingest, CrawlsALocalApiAndReplaysOffline) {
  coderec::testing::FakeGitHub gh;
  coderec::testing::FakeRepo repo;
  repo.full_name = "acme/widgets";
  repo.topics = {"database"};
  repo.contributors = {{"alice", 1}, {"bob", 2}, {"carol", 3}};
  repo.paths = {"a.py", "pkg/b.py"};
  repo.commits = {{"s1", {"alice", 1}, "2019-01-01T00:00:00Z", {{"a.py", "added"}, {"pkg/b.py", "added"}}},
                  {"s2", {"bob", 2}, "2019-09-01T00:00:00Z", {{"a.py", "modified"}}}};
  repo.stargazers = {{{"carol", 3}, "2019-02-01T00:00:00Z"}};
  gh.repos = {repo};

  httplib::Server server;
  server.Get(".*", [&](const httplib::Request& req, httplib::Response& res) {
    auto target = req.target.substr(std::string("/api").size());
    miner::Headers h;
    for (const auto& [k, v] : req.headers) h[k] = v;
    auto r = gh.get(target, h);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  TempDir tmp;
  std::ofstream(tmp.path() / "topics.txt") << "# one per line\ndatabase\n";
  const std::vector<std::string> base{"-q",      "ingest",
                                      "--topics-file", (tmp.path() / "topics.txt").string(),
                                      "--out",   (tmp.path() / "ds").string(),
                                      "--cache", (tmp.path() / "cache").string(),
                                      "--seed",  "1",
                                      "--max-repos", "300"};
  auto live = base;
  live.insert(live.end(), {"--base-url", "http://127.0.0.1:" + std::to_string(port) + "/api"});
  auto r = cli(live);
  server.stop();
  th.join();
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("repositories 1"), std::string::npos) << r.out;
  auto ds = load_dataset(tmp.path() / "ds");
  EXPECT_EQ(ds.files.size(), 2u);
  EXPECT_EQ(ds.records.size(), 4u);  // 3 commit records and 1 star

  auto offline = base;
  offline.push_back("--offline");
  auto again = cli(offline);
  ASSERT_EQ(again.code, kExitOk) << again.err;
  EXPECT_NE(again.out.find("files changed 0"), std::string::npos) << again.out;
  EXPECT_NE(again.out.find("network calls 0"), std::string::npos) << again.out;
}

}  // namespace
}  // namespace coderec
