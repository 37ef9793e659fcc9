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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coderec/dataset.h"

namespace coderec::miner {

using Headers = std::map<std::string, std::string>;
using Params = std::vector<std::pair<std::string, std::string>>;
// Seconds to wait; injectable so tests never sleep.
using Sleeper = std::function<void(double)>;
using Clock = std::function<double()>;

struct HttpResponse {
  int status = 0;
  Headers headers;  // lower-case names
  std::string body;
};

class Transport {
 public:
  virtual ~Transport() = default;
  // `target` is path plus query string.
  virtual HttpResponse get(const std::string& target, const Headers& headers) = 0;
};

// cpp-httplib client for an http:// or https:// base URL.
std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               std::chrono::seconds timeout = std::chrono::seconds(30));

struct RequestKey {
  std::string endpoint;
  Params params;
  int page = 0;  // 0 when the endpoint is not paged

  std::string canonical() const;  // params sorted by name
  std::string digest() const;     // SHA-256 of canonical()
};

// One file per request under `dir`, named by digest. Writes are serialized
// and land through a rename so a crashed crawl never leaves partial entries.
class CrawlCache {
 public:
  explicit CrawlCache(std::filesystem::path dir);

  std::optional<std::string> get(const RequestKey& key) const;
  void put(const RequestKey& key, const std::string& body);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

// Global request budget shared by all workers.
class TokenBucket {
 public:
  TokenBucket(double capacity, double refill_per_second, Clock clock = {}, Sleeper sleep = {});
  void acquire();

 private:
  double capacity_;
  double rate_;
  double tokens_;
  double last_;
  Clock clock_;
  Sleeper sleep_;
  std::mutex mu_;
};

struct BackoffPolicy {
  int max_retries = 6;
  double base_seconds = 1.0;
  double max_seconds = 64.0;

  double delay(int attempt) const;  // base * 2^attempt, capped
};

struct ClientOptions {
  std::string token;  // empty: anonymous
  int per_page = 100;
  BackoffPolicy backoff;
};

// Cache-first API access. A null transport gives an offline client that only
// replays the cache.
class ApiClient {
 public:
  ApiClient(Transport* transport, CrawlCache* cache, TokenBucket* bucket = nullptr, ClientOptions opts = {},
            Sleeper sleep = {});

  // Body of one response; nullopt on 404. Throws ConfigError on 401,
  // NetworkError once retries are exhausted or when offline and uncached.
  std::optional<std::string> get(const std::string& endpoint, const Params& params = {}, int page = 0,
                                 const std::string& accept = {});

  // Array pages concatenated until a short or empty page.
  std::vector<std::string> get_pages(const std::string& endpoint, const Params& params = {},
                                     const std::string& accept = {});

  std::size_t network_calls() const { return network_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }
  int per_page() const { return opts_.per_page; }

 private:
  HttpResponse fetch(const std::string& target, const std::string& accept);

  Transport* transport_;
  CrawlCache* cache_;
  TokenBucket* bucket_;
  ClientOptions opts_;
  Sleeper sleep_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

struct RepoFilter {
  int min_stars = 250;
  int min_contributors = 3;
  int min_history_months = 3;
  std::vector<std::string> topics;
  std::size_t sample_size = 300;

  void validate() const;
};

struct RepoDescriptor {
  std::string full_name;  // owner/name
  std::string owner;
  std::string default_branch = "main";
  std::int64_t stars = 0;
  std::int64_t created_at = 0;
  std::vector<std::string> topics;
  std::vector<std::string> languages;  // top five by bytes
  std::size_t contributors = 0;
  std::size_t file_count = 0;
  std::int64_t first_commit = 0;
  std::int64_t last_commit = 0;
};

bool is_bot(const std::string& login);

// ISO-8601 UTC ("2020-01-02T03:04:05Z") to Unix seconds.
std::int64_t parse_iso_time(const std::string& s);

std::string decode_base64(const std::string& text);

// Repositories passing every threshold, then a seeded sample stratified by
// file-count and star tertiles. Sorted by full name.
std::vector<RepoDescriptor> discover_repos(ApiClient& api, const RepoFilter& filter, std::uint64_t seed,
                                           std::size_t workers = 1);

// Indices of a proportional largest-remainder sample of size `n`, sorted.
std::vector<std::size_t> stratified_sample(const std::vector<std::size_t>& stratum_of, std::size_t n,
                                           std::uint64_t seed);

struct HarvestOptions {
  bool fetch_code = true;
  std::size_t max_code_bytes = 1 << 20;
};

struct HarvestEvent {
  std::string user_id;
  std::string login;
  Behavior behavior = Behavior::kCommit;
  std::string path;  // file path for commits, empty for project events
  std::int64_t timestamp = 0;
};

struct HarvestedRepo {
  RepoDescriptor repo;
  std::vector<std::string> paths;  // blob paths, sorted
  std::map<std::string, std::string> code;
  std::vector<HarvestEvent> events;
  std::vector<std::string> skipped;  // warnings for deleted or renamed files
};

HarvestedRepo harvest_repo(ApiClient& api, const RepoDescriptor& repo, const HarvestOptions& opts = {});

// Dense dataset from harvested repositories, in the order given.
Dataset assemble_dataset(const std::vector<HarvestedRepo>& repos);

struct CrawlOptions {
  RepoFilter filter;
  std::uint64_t seed = 0;
  std::size_t workers = 4;
  HarvestOptions harvest;
};

struct CrawlReport {
  std::size_t repos = 0;
  std::size_t users = 0;
  std::size_t records = 0;
  std::size_t skipped_files = 0;
  std::size_t files_written = 0;  // output files whose bytes changed
};

// Discover, harvest in parallel, and write the dataset layout to `out`.
// Files whose content is unchanged are left untouched.
CrawlReport run_crawl(ApiClient& api, const CrawlOptions& opts, const std::filesystem::path& out);

}  // namespace coderec::miner
