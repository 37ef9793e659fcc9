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

#include "coderec/miner.h"

#include <gtest/gtest.h>
#include <httplib.h>

#include <fstream>
#include <random>
#include <thread>

#include "coderec/error.h"
#include "coderec/hash.h"
#include "testing/fake_github.h"
#include "testing/temp_dir.h"

namespace coderec::miner {
namespace {

using coderec::testing::FakeAccount;
using coderec::testing::FakeCommit;
using coderec::testing::FakeGitHub;
using coderec::testing::FakeRepo;
using coderec::testing::TempDir;

const FakeAccount kAlice{"alice", 1}, kBob{"bob", 2}, kCarol{"carol", 3}, kDave{"dave", 4}, kErin{"erin", 5};
const FakeAccount kDependabot{"dependabot[bot]", 99}, kRenovate{"renovate[bot]", 98};

FakeRepo widgets() {
  FakeRepo r;
  r.full_name = "acme/widgets";
  r.stars = 1200;
  r.topics = {"database", "sql"};
  r.languages = {{"Python", 9000}, {"C", 500}, {"Shell", 20}};
  r.contributors = {kAlice, kBob, kCarol, kDependabot};
  r.paths = {"README.md", "src/db.py", "src/util/io.py", "tests/test_db.py"};
  r.commits = {
      {"c1", kAlice, "2019-01-01T00:00:00Z", {{"src/db.py", "modified"}, {"src/util/io.py", "added"}}},
      {"c2", kBob, "2019-03-01T00:00:00Z", {{"tests/test_db.py", "added"}, {"old/gone.py", "removed"}}},
      {"c3", kDependabot, "2019-04-01T00:00:00Z", {{"README.md", "modified"}}},
      {"c4", {}, "2019-05-01T00:00:00Z", {{"README.md", "modified"}}},
      {"c5", kCarol, "2019-06-01T00:00:00Z", {{"README.md", "modified"}, {"docs/old.md", "modified"}}},
  };
  r.stargazers = {{kAlice, "2019-02-01T00:00:00Z"}, {kDave, "2019-02-02T00:00:00Z"}, {kRenovate, "2019-02-03T00:00:00Z"}};
  r.subscribers = {kAlice, kErin};
  r.forks = {{kBob, "2019-07-01T00:00:00Z"}};
  r.contents = {{"src/db.py", "import sqlite3\n\ndef connect():\n    return sqlite3.connect(':memory:')\n"},
                {"README.md", "# widgets\n"}};
  return r;
}

// Three human contributors and a commit history spanning `days`.
FakeRepo simple(const std::string& name, long stars, int days, const std::string& topic = "database") {
  FakeRepo r;
  r.full_name = name;
  r.stars = stars;
  r.topics = {topic};
  r.contributors = {kAlice, kBob, kCarol};
  r.paths = {"main.py", "lib/a.py"};
  const std::int64_t start = 1546300800;  // 2019-01-01
  auto iso = [](std::int64_t t) {
    char buf[32];
    std::time_t tt = t;
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return std::string(buf);
  };
  r.commits = {{"a1", kAlice, iso(start), {{"main.py", "added"}}},
               {"a2", kBob, iso(start + days * 86400LL), {{"lib/a.py", "added"}}}};
  r.stargazers = {{kCarol, iso(start + 100)}};
  return r;
}

ClientOptions fast() {
  ClientOptions o;
  o.per_page = 2;
  o.backoff.max_retries = 3;
  return o;
}

RepoFilter database_filter() {
  RepoFilter f;
  f.topics = {"database", "sql"};
  return f;
}

std::string hash_tree(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    all += std::filesystem::relative(f, dir).string() + "\n" +
           std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  return sha256_hex(all);
}

TEST(RequestKey, DigestIgnoresParamOrderButNotPage) {
  RequestKey a{"/repos/x/y/commits", {{"sha", "main"}, {"since", "1"}}, 1};
  RequestKey b{"/repos/x/y/commits", {{"since", "1"}, {"sha", "main"}}, 1};
  RequestKey c{"/repos/x/y/commits", {{"since", "1"}, {"sha", "main"}}, 2};
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_NE(a.digest(), c.digest());
  EXPECT_EQ(a.digest().size(), 64u);
}

TEST(CrawlCache, RoundTripAndOverwrite) {
  TempDir tmp;
  CrawlCache cache(tmp.path() / "cache");
  RequestKey k{"/a", {}, 0};
  EXPECT_FALSE(cache.get(k));
  cache.put(k, "one");
  cache.put(k, "two");
  EXPECT_EQ(cache.get(k).value(), "two");
  std::size_t entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(cache.dir())) {
    EXPECT_EQ(e.path().extension(), "");
    ++entries;
  }
  EXPECT_EQ(entries, 1u);
}

TEST(CrawlCache, ConcurrentWritersLeaveEveryEntryIntact) {
  TempDir tmp;
  CrawlCache cache(tmp.path());
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) {
    ts.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) cache.put({"/k" + std::to_string(i), {}, 0}, std::string(100, char('a' + t)));
    });
  }
  for (auto& t : ts) t.join();
  for (int i = 0; i < 50; ++i) {
    auto v = cache.get({"/k" + std::to_string(i), {}, 0}).value();
    ASSERT_EQ(v.size(), 100u);
    EXPECT_EQ(v.find_first_not_of(v[0]), std::string::npos);
  }
}

TEST(TokenBucket, WaitsOnlyWhenEmpty) {
  double now = 0.0;
  std::vector<double> sleeps;
  TokenBucket bucket(2.0, 0.5, [&] { return now; }, [&](double s) {
    sleeps.push_back(s);
    now += s;
  });
  bucket.acquire();
  bucket.acquire();
  EXPECT_TRUE(sleeps.empty());
  bucket.acquire();
  ASSERT_EQ(sleeps.size(), 1u);
  EXPECT_DOUBLE_EQ(sleeps[0], 2.0);
  now += 10.0;  // refills to capacity, not beyond
  bucket.acquire();
  bucket.acquire();
  EXPECT_EQ(sleeps.size(), 1u);
  bucket.acquire();
  EXPECT_EQ(sleeps.size(), 2u);
}

TEST(TokenBucket, RejectsNonPositiveRate) { EXPECT_THROW(TokenBucket(1.0, 0.0), ArgumentError); }

TEST(Backoff, DoublesUpToCap) {
  BackoffPolicy p;
  p.base_seconds = 1.0;
  p.max_seconds = 5.0;
  EXPECT_DOUBLE_EQ(p.delay(0), 1.0);
  EXPECT_DOUBLE_EQ(p.delay(1), 2.0);
  EXPECT_DOUBLE_EQ(p.delay(2), 4.0);
  EXPECT_DOUBLE_EQ(p.delay(3), 5.0);
}

TEST(ApiClient, RateLimitBacksOffThenResumes) {
  FakeGitHub gh;
  gh.repos = {widgets()};
  gh.inject = {{429, {}, ""}, {403, {{"x-ratelimit-remaining", "0"}}, ""}, {503, {}, ""}};
  std::vector<double> sleeps;
  ApiClient api(&gh, nullptr, nullptr, fast(), [&](double s) { sleeps.push_back(s); });
  auto body = api.get("/repos/acme/widgets/languages");
  ASSERT_TRUE(body);
  EXPECT_NE(body->find("Python"), std::string::npos);
  EXPECT_EQ(sleeps, (std::vector<double>{1.0, 2.0, 4.0}));
  EXPECT_EQ(api.network_calls(), 4u);
}

TEST(ApiClient, RetryAfterHeaderIsHonoured) {
  FakeGitHub gh;
  gh.repos = {widgets()};
  gh.inject = {{429, {{"retry-after", "7"}}, ""}};
  std::vector<double> sleeps;
  ApiClient api(&gh, nullptr, nullptr, fast(), [&](double s) { sleeps.push_back(s); });
  EXPECT_TRUE(api.get("/repos/acme/widgets/languages"));
  EXPECT_EQ(sleeps, std::vector<double>{7.0});
}

TEST(ApiClient, RetriesAreBounded) {
  FakeGitHub gh;
  for (int i = 0; i < 10; ++i) gh.inject.push_back({429, {}, ""});
  int sleeps = 0;
  ApiClient api(&gh, nullptr, nullptr, fast(), [&](double) { ++sleeps; });
  EXPECT_THROW(api.get("/repos/acme/widgets"), NetworkError);
  EXPECT_EQ(gh.calls(), 4u);
  EXPECT_EQ(sleeps, 3);
}

TEST(ApiClient, AuthFailureIsFatalConfiguration) {
  FakeGitHub gh;
  gh.inject = {{401, {}, R"({"message":"Bad credentials"})"}};
  int sleeps = 0;
  ApiClient api(&gh, nullptr, nullptr, fast(), [&](double) { ++sleeps; });
  EXPECT_THROW(api.get("/repos/acme/widgets"), ConfigError);
  EXPECT_EQ(sleeps, 0);
  EXPECT_EQ(gh.calls(), 1u);
}

TEST(ApiClient, SendsTokenAndAcceptHeaders) {
  FakeGitHub gh;
  gh.repos = {widgets()};
  auto opts = fast();
  opts.token = "s3cret";
  ApiClient api(&gh, nullptr, nullptr, opts);
  api.get("/repos/acme/widgets/languages");
  EXPECT_EQ(gh.request_headers.at(0).at("Authorization"), "Bearer s3cret");
  EXPECT_EQ(gh.request_headers.at(0).at("Accept"), "application/vnd.github+json");
}

TEST(ApiClient, NotFoundIsCachedAsAbsent) {
  TempDir tmp;
  CrawlCache cache(tmp.path());
  FakeGitHub gh;
  ApiClient api(&gh, &cache, nullptr, fast());
  EXPECT_FALSE(api.get("/repos/nobody/nothing"));
  EXPECT_FALSE(api.get("/repos/nobody/nothing"));
  EXPECT_EQ(gh.calls(), 1u);
  EXPECT_EQ(api.cache_hits(), 1u);
}

TEST(ApiClient, OfflineMissIsANetworkError) {
  TempDir tmp;
  CrawlCache cache(tmp.path());
  ApiClient api(nullptr, &cache);
  EXPECT_THROW(api.get("/repos/acme/widgets"), NetworkError);
}

TEST(ApiClient, PaginatesUntilExhaustion) {
  FakeGitHub gh;
  auto r = widgets();
  for (int i = 0; i < 5; ++i) r.stargazers.push_back({{"fan" + std::to_string(i), 200L + i}, "2020-01-01T00:00:00Z"});
  gh.repos = {r};
  ApiClient api(&gh, nullptr, nullptr, fast());
  auto pages = api.get_pages("/repos/acme/widgets/stargazers");
  EXPECT_EQ(pages.size(), 4u);  // 8 items, 2 per page, then an empty page
  EXPECT_EQ(gh.calls(), 5u);
  ASSERT_NE(gh.requests.back().find("page=5"), std::string::npos);
}

TEST(ApiClient, ShortPageEndsPaging) {
  FakeGitHub gh;
  gh.repos = {widgets()};
  ApiClient api(&gh, nullptr, nullptr, fast());
  EXPECT_EQ(api.get_pages("/repos/acme/widgets/stargazers").size(), 2u);  // 2 + 1
  EXPECT_EQ(gh.calls(), 2u);
}

TEST(MinerHelpers, BotsAreRecognisedBySuffix) {
  EXPECT_TRUE(is_bot("dependabot[bot]"));
  EXPECT_FALSE(is_bot("bot"));
  EXPECT_FALSE(is_bot("[bot]er"));
}

TEST(MinerHelpers, IsoTimestamps) {
  EXPECT_EQ(parse_iso_time("1970-01-02T00:00:00Z"), 86400);
  EXPECT_EQ(parse_iso_time("2019-01-01T00:00:00Z"), 1546300800);
  EXPECT_THROW(parse_iso_time("yesterday"), FormatError);
}

TEST(MinerHelpers, Base64MatchesIndependentEncoder) {
  std::mt19937 rng(5);
  for (std::size_t n = 0; n < 64; ++n) {
    std::string raw(n, '\0');
    for (auto& c : raw) c = static_cast<char>(rng() & 0xFF);
    auto enc = coderec::testing::base64_encode(raw);
    for (std::size_t i = 60; i < enc.size(); i += 61) enc.insert(i, "\n");
    EXPECT_EQ(decode_base64(enc), raw) << n;
  }
  EXPECT_THROW(decode_base64("abc"), FormatError);
}

TEST(StratifiedSample, AllocatesProportionally) {
  std::vector<std::size_t> strata;
  for (int i = 0; i < 60; ++i) strata.push_back(0);
  for (int i = 0; i < 30; ++i) strata.push_back(4);
  for (int i = 0; i < 10; ++i) strata.push_back(8);
  auto s = stratified_sample(strata, 10, 1);
  ASSERT_EQ(s.size(), 10u);
  std::map<std::size_t, int> count;
  for (auto i : s) ++count[strata[i]];
  EXPECT_EQ(count[0], 6);
  EXPECT_EQ(count[4], 3);
  EXPECT_EQ(count[8], 1);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(stratified_sample(strata, 10, 1), s);
  EXPECT_NE(stratified_sample(strata, 10, 2), s);
}

TEST(StratifiedSample, SmallPoolIsKeptWhole) {
  EXPECT_EQ(stratified_sample({0, 1, 1}, 300, 0), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(RepoFilter, DefaultsAndValidation) {
  RepoFilter f;
  EXPECT_EQ(f.min_stars, 250);
  EXPECT_EQ(f.min_contributors, 3);
  EXPECT_EQ(f.min_history_months, 3);
  EXPECT_EQ(f.sample_size, 300u);
  EXPECT_THROW(f.validate(), ArgumentError);
  f.topics = {"database"};
  f.validate();
  f.min_stars = -1;
  EXPECT_THROW(f.validate(), ArgumentError);
}

class DiscoverTest : public ::testing::Test {
 protected:
  void SetUp() override {
    gh.repos = {widgets(),
                simple("tiny/lowstars", 100, 400),
                simple("edge/ninety", 300, 90, "sql"),
                simple("edge/eightynine", 300, 89),
                simple("big/thing", 5000, 800, "graphql")};
    auto two = simple("two/people", 900, 400);
    two.contributors = {kAlice, kBob, kDependabot};
    gh.repos.push_back(two);
  }

  FakeGitHub gh;
};

TEST_F(DiscoverTest, AppliesEveryThreshold) {
  ApiClient api(&gh, nullptr, nullptr, fast());
  auto found = discover_repos(api, database_filter(), 0);
  std::vector<std::string> names;
  for (const auto& d : found) names.push_back(d.full_name);
  // 100 stars, two humans plus a bot, 89 days of history and an unlisted topic are all excluded.
  EXPECT_EQ(names, (std::vector<std::string>{"acme/widgets", "edge/ninety"}));
  const auto& w = found[0];
  EXPECT_EQ(w.stars, 1200);
  EXPECT_EQ(w.contributors, 3u);
  EXPECT_EQ(w.file_count, 4u);
  EXPECT_EQ(w.languages, (std::vector<std::string>{"Python", "C", "Shell"}));
  EXPECT_EQ(w.owner, "acme");
  EXPECT_EQ(w.created_at, parse_iso_time("2015-01-01T00:00:00Z"));
}

TEST_F(DiscoverTest, SampleSizeCapsTheResult) {
  ApiClient api(&gh, nullptr, nullptr, fast());
  auto f = database_filter();
  f.topics.push_back("graphql");
  f.sample_size = 2;
  auto a = discover_repos(api, f, 11);
  EXPECT_EQ(a.size(), 2u);
  EXPECT_EQ(discover_repos(api, f, 11).size(), 2u);
}

TEST_F(DiscoverTest, WarmCacheReplaysWithoutNetwork) {
  TempDir tmp;
  CrawlCache cache(tmp.path());
  ApiClient live(&gh, &cache, nullptr, fast());
  auto first = discover_repos(live, database_filter(), 3);
  EXPECT_GT(live.network_calls(), 0u);

  FakeGitHub silent;
  ApiClient replay(&silent, &cache, nullptr, fast());
  auto second = discover_repos(replay, database_filter(), 3);
  EXPECT_EQ(replay.network_calls(), 0u);
  EXPECT_EQ(silent.calls(), 0u);
  ASSERT_EQ(first.size(), second.size());
  for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first[i].full_name, second[i].full_name);
}

TEST_F(DiscoverTest, ParallelMatchesSequential) {
  ApiClient api(&gh, nullptr, nullptr, fast());
  auto a = discover_repos(api, database_filter(), 0, 1);
  auto b = discover_repos(api, database_filter(), 0, 4);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].full_name, b[i].full_name);
}

TEST_F(DiscoverTest, AuthFailureAborts) {
  gh.inject = {{401, {}, ""}};
  ApiClient api(&gh, nullptr, nullptr, fast());
  EXPECT_THROW(discover_repos(api, database_filter(), 0), ConfigError);
}

RepoDescriptor descriptor(const std::string& name) {
  RepoDescriptor d;
  d.full_name = name;
  d.owner = name.substr(0, name.find('/'));
  d.created_at = 1420070400;
  return d;
}

std::size_t count(const HarvestedRepo& h, Behavior b) {
  return static_cast<std::size_t>(
      std::count_if(h.events.begin(), h.events.end(), [&](const auto& e) { return e.behavior == b; }));
}

TEST(Harvest, OneCommitTouchingTwoFilesGivesTwoRecordsWithEqualTimestamps) {
  FakeGitHub gh;
  gh.repos = {widgets()};
  ApiClient api(&gh, nullptr, nullptr, fast());
  auto h = harvest_repo(api, descriptor("acme/widgets"));
  std::vector<HarvestEvent> alice;
  for (const auto& e : h.events) {
    if (e.login == "alice" && e.behavior == Behavior::kCommit) alice.push_back(e);
  }
  ASSERT_EQ(alice.size(), 2u);
  EXPECT_EQ(alice[0].timestamp, alice[1].timestamp);
  EXPECT_EQ(alice[0].timestamp, parse_iso_time("2019-01-01T00:00:00Z"));
  std::set<std::string> paths{alice[0].path, alice[1].path};
  EXPECT_EQ(paths, (std::set<std::string>{"src/db.py", "src/util/io.py"}));
}

TEST(Harvest, BotsUnlinkedAuthorsAndMissingFilesAreDropped) {
  FakeGitHub gh;
  gh.repos = {widgets()};
  ApiClient api(&gh, nullptr, nullptr, fast());
  auto h = harvest_repo(api, descriptor("acme/widgets"));
  for (const auto& e : h.events) EXPECT_FALSE(is_bot(e.login)) << e.login;
  // alice x2, bob x1, carol x1; c3 is a bot, c4 has no linked account.
  EXPECT_EQ(count(h, Behavior::kCommit), 4u);
  ASSERT_EQ(h.skipped.size(), 2u);
  EXPECT_NE(h.skipped[0].find("old/gone.py"), std::string::npos);
  EXPECT_NE(h.skipped[0].find("deleted"), std::string::npos);
  EXPECT_NE(h.skipped[1].find("docs/old.md"), std::string::npos);
}

TEST(Harvest, KStargazersGiveKStarRecords) {
  FakeGitHub gh;
  auto r = widgets();
  r.stargazers.clear();
  const std::size_t k = 7;
  for (std::size_t i = 0; i < k; ++i) r.stargazers.push_back({{"fan" + std::to_string(i), 300L + long(i)}, "2020-01-01T00:00:00Z"});
  gh.repos = {r};
  ApiClient api(&gh, nullptr, nullptr, fast());
  auto h = harvest_repo(api, descriptor("acme/widgets"));
  EXPECT_EQ(count(h, Behavior::kStar), k);
  for (const auto& e : h.events) {
    if (e.behavior == Behavior::kStar) EXPECT_TRUE(e.path.empty());
  }
}

TEST(Harvest, ProjectEventsCarryTimestamps) {
  FakeGitHub gh;
  gh.repos = {widgets()};
  ApiClient api(&gh, nullptr, nullptr, fast());
  const auto d = descriptor("acme/widgets");
  auto h = harvest_repo(api, d);
  EXPECT_EQ(count(h, Behavior::kStar), 2u);  // renovate[bot] dropped
  EXPECT_EQ(count(h, Behavior::kFork), 1u);
  EXPECT_EQ(count(h, Behavior::kWatch), 2u);
  for (const auto& e : h.events) {
    if (e.behavior == Behavior::kWatch && e.login == "alice") {
      EXPECT_EQ(e.timestamp, parse_iso_time("2019-01-01T00:00:00Z"));  // first commit
    }
    if (e.behavior == Behavior::kWatch && e.login == "erin") EXPECT_EQ(e.timestamp, d.created_at);
    if (e.behavior == Behavior::kFork) EXPECT_EQ(e.timestamp, parse_iso_time("2019-07-01T00:00:00Z"));
  }
}

TEST(Harvest, CodeIsDecoded) {
  FakeGitHub gh;
  gh.repos = {widgets()};
  ApiClient api(&gh, nullptr, nullptr, fast());
  auto h = harvest_repo(api, descriptor("acme/widgets"));
  EXPECT_EQ(h.code.at("src/db.py"), widgets().contents.at("src/db.py"));
  EXPECT_EQ(h.code.count("tests/test_db.py"), 0u);
  HarvestOptions no_code;
  no_code.fetch_code = false;
  EXPECT_TRUE(harvest_repo(api, descriptor("acme/widgets"), no_code).code.empty());
}

TEST(Harvest, TruncatedTreeIsWalkedToCompletion) {
  FakeGitHub gh;
  auto r = widgets();
  r.truncated_tree = true;
  gh.repos = {r};
  ApiClient api(&gh, nullptr, nullptr, fast());
  auto h = harvest_repo(api, descriptor("acme/widgets"));
  EXPECT_EQ(h.paths, widgets().paths);
}

TEST(Assemble, TreeAndRecordsAreConsistent) {
  FakeGitHub gh;
  gh.repos = {widgets(), simple("edge/ninety", 300, 90)};
  ApiClient api(&gh, nullptr, nullptr, fast());
  std::vector<HarvestedRepo> hs{harvest_repo(api, descriptor("acme/widgets")),
                                harvest_repo(api, descriptor("edge/ninety"))};
  auto ds = assemble_dataset(hs);
  ASSERT_EQ(ds.repos.size(), 2u);
  EXPECT_EQ(ds.files.size(), 6u);
  // src, src/util, tests, lib
  EXPECT_EQ(ds.directories.size(), 4u);
  const auto& t = ds.trees[0];
  EXPECT_EQ(t.nodes[0].kind, NodeKind::kRoot);
  for (const auto& n : t.nodes) {
    if (n.id == "acme/widgets/src/util/io.py") {
      EXPECT_EQ(t.nodes[static_cast<std::size_t>(n.parent)].id, "acme/widgets/src/util");
    }
  }
  for (const auto& rec : ds.records) {
    if (rec.behavior == Behavior::kCommit) {
      ASSERT_LT(rec.target, ds.files.size());
    } else {
      ASSERT_LT(rec.target, ds.repos.size());
    }
    ASSERT_LT(rec.user, ds.users.size());
  }
  EXPECT_TRUE(std::is_sorted(ds.records.begin(), ds.records.end(),
                             [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; }));
}

class CrawlTest : public ::testing::Test {
 protected:
  void SetUp() override {
    gh.repos = {widgets(), simple("edge/ninety", 300, 90, "sql"), simple("tiny/lowstars", 100, 400),
                simple("more/stuff", 700, 365)};
    opts.filter = database_filter();
    opts.seed = 4;
    opts.workers = 3;
  }

  FakeGitHub gh;
  CrawlOptions opts;
  TempDir tmp;
};

TEST_F(CrawlTest, OutputLoadsAndEveryTargetExists) {
  CrawlCache cache(tmp.path() / "cache");
  ApiClient api(&gh, &cache, nullptr, fast());
  auto report = run_crawl(api, opts, tmp.path() / "out");
  EXPECT_EQ(report.repos, 3u);
  EXPECT_EQ(report.skipped_files, 2u);
  auto ds = load_dataset(tmp.path() / "out");  // integrity-checked
  EXPECT_EQ(ds.repos.size(), 3u);
  EXPECT_EQ(ds.records.size(), report.records);
  EXPECT_FALSE(ds.code.empty());
  for (const auto& u : ds.users) EXPECT_FALSE(is_bot(u.login));
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "out" / "skipped.log"));
}

TEST_F(CrawlTest, ReplayFromCacheIsByteIdenticalAndOffline) {
  CrawlCache cache(tmp.path() / "cache");
  ApiClient live(&gh, &cache, nullptr, fast());
  auto first = run_crawl(live, opts, tmp.path() / "out");
  EXPECT_GT(first.files_written, 0u);
  const auto oracle = hash_tree(tmp.path() / "out");
  const auto mtime = std::filesystem::last_write_time(tmp.path() / "out" / "interactions.jsonl");

  ApiClient offline(nullptr, &cache, nullptr, fast());
  auto again = run_crawl(offline, opts, tmp.path() / "out");
  EXPECT_EQ(again.files_written, 0u);
  EXPECT_EQ(hash_tree(tmp.path() / "out"), oracle);
  EXPECT_EQ(std::filesystem::last_write_time(tmp.path() / "out" / "interactions.jsonl"), mtime);

  ApiClient fresh_dir(nullptr, &cache, nullptr, fast());
  run_crawl(fresh_dir, opts, tmp.path() / "out2");
  EXPECT_EQ(hash_tree(tmp.path() / "out2"), oracle);
}

TEST_F(CrawlTest, WorkerCountDoesNotChangeOutput) {
  ApiClient api(&gh, nullptr, nullptr, fast());
  opts.workers = 1;
  run_crawl(api, opts, tmp.path() / "one");
  opts.workers = 4;
  run_crawl(api, opts, tmp.path() / "four");
  EXPECT_EQ(hash_tree(tmp.path() / "one"), hash_tree(tmp.path() / "four"));
}

TEST_F(CrawlTest, SharedTokenBucketGatesEveryRequest) {
  double now = 0.0;
  int waits = 0;
  TokenBucket bucket(5.0, 1.0, [&] { return now; }, [&](double s) {
    ++waits;
    now += s;
  });
  ApiClient api(&gh, nullptr, &bucket, fast());
  opts.workers = 1;
  run_crawl(api, opts, tmp.path() / "out");
  EXPECT_EQ(static_cast<std::size_t>(waits), api.network_calls() - 5);
}

TEST(HttpTransport, TalksToALocalServer) {
  httplib::Server server;
  std::string seen_auth;
  server.Get("/api/v3/repos/acme/widgets/languages", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_header("X-RateLimit-Remaining", "41");
    res.set_content(R"({"Python": 10})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto transport = make_http_transport("http://127.0.0.1:" + std::to_string(port) + "/api/v3/");
  auto opts = fast();
  opts.token = "tok";
  ApiClient api(transport.get(), nullptr, nullptr, opts);
  auto body = api.get("/repos/acme/widgets/languages");
  EXPECT_EQ(body.value(), R"({"Python": 10})");
  EXPECT_EQ(seen_auth, "Bearer tok");
  EXPECT_FALSE(api.get("/repos/acme/missing"));
  auto raw = transport->get("/repos/acme/widgets/languages", {});
  EXPECT_EQ(raw.headers.at("x-ratelimit-remaining"), "41");
  server.stop();
  th.join();
}

TEST(HttpTransport, UnreachableHostIsRetriedThenFails) {
  auto transport = make_http_transport("http://127.0.0.1:1", std::chrono::seconds(1));
  int sleeps = 0;
  auto opts = fast();
  opts.backoff.max_retries = 1;
  ApiClient api(transport.get(), nullptr, nullptr, opts, [&](double) { ++sleeps; });
  EXPECT_THROW(api.get("/repos/x/y"), NetworkError);
  EXPECT_EQ(sleeps, 1);
}

TEST(HttpTransport, BaseUrlNeedsAScheme) { EXPECT_THROW(make_http_transport("api.example.com"), ConfigError); }

}  // namespace
}  // namespace coderec::miner
