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

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <exception>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "coderec/error.h"
#include "coderec/hash.h"
#include "json.hpp"

namespace coderec::miner {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kJsonAccept = "application/vnd.github+json";
constexpr const char* kStarAccept = "application/vnd.github.star+json";

std::string url_encode(const std::string& s) {
  std::ostringstream out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out << c;
    } else {
      out << '%' << std::uppercase << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c)
          << std::nouppercase << std::dec;
    }
  }
  return out.str();
}

// Paths keep their slashes.
std::string encode_path(const std::string& s) {
  std::string out;
  std::size_t start = 0;
  while (true) {
    auto slash = s.find('/', start);
    out += url_encode(s.substr(start, slash - start));
    if (slash == std::string::npos) break;
    out += '/';
    start = slash + 1;
  }
  return out;
}

std::string header(const HttpResponse& r, const std::string& name) {
  auto it = r.headers.find(name);
  return it == r.headers.end() ? std::string() : it->second;
}

json parse_body(const std::string& body, const std::string& what) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw FormatError(what + ": malformed response: " + e.what());
  }
}

std::string str(const json& o, const char* key) {
  if (!o.is_object() || !o.contains(key) || !o[key].is_string()) return {};
  return o[key].get<std::string>();
}

std::string id_of(const json& o) {
  if (!o.is_object() || !o.contains("id")) return {};
  const auto& v = o["id"];
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_string()) return v.get<std::string>();
  return {};
}

// Array items of each page; search pages wrap them in "items".
std::vector<json> items_of(const std::vector<std::string>& pages, const std::string& what) {
  std::vector<json> out;
  for (const auto& p : pages) {
    auto j = parse_body(p, what);
    const json& arr = j.is_object() && j.contains("items") ? j["items"] : j;
    if (!arr.is_array()) throw FormatError(what + ": expected an array");
    for (const auto& it : arr) out.push_back(it);
  }
  return out;
}

std::size_t page_size(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    return 0;
  }
  if (j.is_array()) return j.size();
  if (j.is_object() && j.contains("items") && j["items"].is_array()) return j["items"].size();
  return 0;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string repo_path(const RepoDescriptor& r) { return "/repos/" + r.full_name; }

// Blob paths of the default branch; a truncated recursive listing falls back
// to walking subtrees one request at a time.
std::vector<std::string> list_tree(ApiClient& api, const RepoDescriptor& r) {
  std::vector<std::string> paths;
  auto body = api.get(repo_path(r) + "/git/trees/" + r.default_branch, {{"recursive", "1"}});
  if (!body) return paths;
  auto j = parse_body(*body, r.full_name + " tree");
  if (!j.value("truncated", false)) {
    for (const auto& e : j.value("tree", json::array())) {
      if (str(e, "type") == "blob") paths.push_back(str(e, "path"));
    }
  } else {
    std::vector<std::pair<std::string, std::string>> pending{{"", r.default_branch}};
    while (!pending.empty()) {
      auto [prefix, sha] = pending.back();
      pending.pop_back();
      auto sub = api.get(repo_path(r) + "/git/trees/" + sha);
      if (!sub) continue;
      auto sj = parse_body(*sub, r.full_name + " subtree");
      for (const auto& e : sj.value("tree", json::array())) {
        const auto path = prefix.empty() ? str(e, "path") : prefix + "/" + str(e, "path");
        if (str(e, "type") == "blob") paths.push_back(path);
        if (str(e, "type") == "tree") pending.emplace_back(path, str(e, "sha"));
      }
    }
  }
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  return paths;
}

struct CommitRef {
  std::string sha;
  std::string user_id;
  std::string login;
  std::int64_t ts = 0;
};

std::vector<CommitRef> list_commits(ApiClient& api, const RepoDescriptor& r) {
  std::vector<CommitRef> out;
  for (const auto& c : items_of(api.get_pages(repo_path(r) + "/commits", {{"sha", r.default_branch}}),
                                r.full_name + " commits")) {
    CommitRef ref;
    ref.sha = str(c, "sha");
    if (c.contains("author") && c["author"].is_object()) {
      ref.user_id = id_of(c["author"]);
      ref.login = str(c["author"], "login");
    }
    if (c.contains("commit") && c["commit"].contains("author")) {
      auto date = str(c["commit"]["author"], "date");
      if (!date.empty()) ref.ts = parse_iso_time(date);
    }
    out.push_back(std::move(ref));
  }
  return out;
}

bool passes_history(const RepoDescriptor& d, const RepoFilter& f) {
  constexpr std::int64_t kMonth = 30LL * 86400;
  return d.last_commit - d.first_commit >= f.min_history_months * kMonth;
}

// Rank-based tertile, ties broken by input order.
std::vector<std::size_t> tertiles(const std::vector<std::int64_t>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<std::size_t> out(values.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) out[order[rank]] = 3 * rank / order.size();
  return out;
}

bool write_if_changed(const fs::path& path, const std::string& bytes) {
  {
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::string old((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (old == bytes) return false;
    }
  }
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << bytes;
  return true;
}

}  // namespace

std::string RequestKey::canonical() const {
  auto sorted = params;
  std::sort(sorted.begin(), sorted.end());
  std::string out = endpoint;
  for (const auto& [k, v] : sorted) out += "\n" + k + "=" + v;
  out += "\npage=" + std::to_string(page);
  return out;
}

std::string RequestKey::digest() const { return sha256_hex(canonical()); }

CrawlCache::CrawlCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::optional<std::string> CrawlCache::get(const RequestKey& key) const {
  std::lock_guard lock(mu_);
  std::ifstream in(dir_ / key.digest(), std::ios::binary);
  if (!in) return std::nullopt;
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void CrawlCache::put(const RequestKey& key, const std::string& body) {
  std::lock_guard lock(mu_);
  const auto final_path = dir_ / key.digest();
  const auto tmp = dir_ / (key.digest() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot write cache entry " + tmp.string());
    out << body;
  }
  fs::rename(tmp, final_path);
}

TokenBucket::TokenBucket(double capacity, double refill_per_second, Clock clock, Sleeper sleep)
    : capacity_(capacity), rate_(refill_per_second), tokens_(capacity), clock_(std::move(clock)),
      sleep_(std::move(sleep)) {
  if (capacity <= 0.0 || refill_per_second <= 0.0) throw ArgumentError("token bucket needs positive capacity and rate");
  if (!clock_) {
    clock_ = [] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
    };
  }
  if (!sleep_) sleep_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
  last_ = clock_();
}

void TokenBucket::acquire() {
  std::lock_guard lock(mu_);
  while (true) {
    const double now = clock_();
    tokens_ = std::min(capacity_, tokens_ + (now - last_) * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    sleep_((1.0 - tokens_) / rate_);
  }
}

double BackoffPolicy::delay(int attempt) const {
  return std::min(max_seconds, base_seconds * std::pow(2.0, attempt));
}

ApiClient::ApiClient(Transport* transport, CrawlCache* cache, TokenBucket* bucket, ClientOptions opts, Sleeper sleep)
    : transport_(transport), cache_(cache), bucket_(bucket), opts_(std::move(opts)), sleep_(std::move(sleep)) {
  if (opts_.per_page <= 0) throw ArgumentError("per_page must be positive");
  if (!sleep_) sleep_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
}

HttpResponse ApiClient::fetch(const std::string& target, const std::string& accept) {
  Headers h{{"Accept", accept.empty() ? kJsonAccept : accept}, {"User-Agent", "coderec-miner"}};
  if (!opts_.token.empty()) h["Authorization"] = "Bearer " + opts_.token;
  for (int attempt = 0;; ++attempt) {
    if (bucket_) bucket_->acquire();
    ++network_calls_;
    auto r = transport_->get(target, h);
    if (r.status == 401) throw ConfigError("authentication rejected by " + target + "; check the API token");
    const bool limited = r.status == 429 || (r.status == 403 && header(r, "x-ratelimit-remaining") == "0");
    const bool transient = limited || r.status == 0 || r.status >= 500;
    if (!transient) return r;
    if (attempt >= opts_.backoff.max_retries) {
      throw NetworkError("giving up on " + target + " after " + std::to_string(attempt + 1) + " attempts (status " +
                         std::to_string(r.status) + ")");
    }
    double wait = opts_.backoff.delay(attempt);
    if (auto ra = header(r, "retry-after"); !ra.empty()) {
      try {
        wait = std::min(opts_.backoff.max_seconds, std::stod(ra));
      } catch (const std::exception&) {
      }
    }
    spdlog::warn("{} returned {}; retrying in {:.1f}s", target, r.status, wait);
    sleep_(wait);
  }
}

std::optional<std::string> ApiClient::get(const std::string& endpoint, const Params& params, int page,
                                          const std::string& accept) {
  RequestKey key{endpoint, params, page};
  if (!accept.empty()) key.params.emplace_back("accept", accept);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      auto nl = hit->find('\n');
      if (nl == std::string::npos) throw FormatError("corrupt cache entry for " + endpoint);
      if (hit->compare(0, nl, "404") == 0) return std::nullopt;
      return hit->substr(nl + 1);
    }
  }
  if (!transport_) throw NetworkError("offline and not cached: " + key.canonical());

  std::string target = encode_path(endpoint);
  Params query = params;
  if (page > 0) {
    query.emplace_back("per_page", std::to_string(opts_.per_page));
    query.emplace_back("page", std::to_string(page));
  }
  for (std::size_t i = 0; i < query.size(); ++i) {
    target += (i == 0 ? "?" : "&") + url_encode(query[i].first) + "=" + url_encode(query[i].second);
  }
  auto r = fetch(target, accept);
  if (r.status == 404 || r.status == 403 || r.status == 409) {
    // 409 is an empty repository; 403 without an exhausted quota is a blocked one.
    if (cache_) cache_->put(key, "404\n");
    return std::nullopt;
  }
  if (r.status != 200) throw NetworkError(target + " returned status " + std::to_string(r.status));
  if (cache_) cache_->put(key, "200\n" + r.body);
  return r.body;
}

std::vector<std::string> ApiClient::get_pages(const std::string& endpoint, const Params& params,
                                              const std::string& accept) {
  std::vector<std::string> pages;
  for (int page = 1;; ++page) {
    auto body = get(endpoint, params, page, accept);
    if (!body) break;
    const auto n = page_size(*body);
    if (n == 0) break;
    pages.push_back(std::move(*body));
    if (n < static_cast<std::size_t>(opts_.per_page)) break;
  }
  return pages;
}

void RepoFilter::validate() const {
  if (min_stars < 0 || min_contributors < 0 || min_history_months < 0) {
    throw ArgumentError("repository thresholds must be non-negative");
  }
  if (topics.empty()) throw ArgumentError("at least one topic is required");
}

bool is_bot(const std::string& login) {
  constexpr std::string_view suffix = "[bot]";
  return login.size() >= suffix.size() && login.compare(login.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::int64_t parse_iso_time(const std::string& s) {
  std::tm tm{};
  std::istringstream in(s);
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (in.fail()) throw FormatError("bad timestamp: " + s);
  return static_cast<std::int64_t>(timegm(&tm));
}

std::string decode_base64(const std::string& text) {
  std::string clean;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean += c;
  }
  if (clean.size() % 4 != 0) throw FormatError("base64 length is not a multiple of 4");
  if (clean.empty()) return {};
  std::string out(clean.size() / 4 * 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(clean.data()), static_cast<int>(clean.size()));
  if (n < 0) throw FormatError("invalid base64");
  std::size_t pad = 0;
  if (clean.back() == '=') ++pad;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::vector<std::size_t> stratified_sample(const std::vector<std::size_t>& stratum_of, std::size_t n,
                                           std::uint64_t seed) {
  std::vector<std::size_t> all(stratum_of.size());
  std::iota(all.begin(), all.end(), 0);
  if (n >= all.size()) return all;

  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < stratum_of.size(); ++i) members[stratum_of[i]].push_back(i);
  std::map<std::size_t, std::size_t> quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t given = 0;
  for (const auto& [s, m] : members) {
    const double exact = static_cast<double>(n) * static_cast<double>(m.size()) / static_cast<double>(all.size());
    quota[s] = static_cast<std::size_t>(std::floor(exact));
    given += quota[s];
    remainders.emplace_back(exact - std::floor(exact), s);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; given < n; ++i, ++given) ++quota[remainders[i].second];

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> out;
  for (auto& [s, m] : members) {
    std::shuffle(m.begin(), m.end(), rng);
    out.insert(out.end(), m.begin(), m.begin() + static_cast<std::ptrdiff_t>(quota[s]));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RepoDescriptor> discover_repos(ApiClient& api, const RepoFilter& filter, std::uint64_t seed,
                                           std::size_t workers) {
  filter.validate();
  std::map<std::string, RepoDescriptor> pool;
  for (const auto& topic : filter.topics) {
    const Params q{{"q", "topic:" + topic + " stars:>=" + std::to_string(filter.min_stars)},
                   {"sort", "stars"},
                   {"order", "desc"}};
    for (const auto& item : items_of(api.get_pages("/search/repositories", q), "search " + topic)) {
      RepoDescriptor d;
      d.full_name = str(item, "full_name");
      if (d.full_name.empty()) continue;
      if (item.contains("owner")) d.owner = str(item["owner"], "login");
      if (d.owner.empty()) d.owner = d.full_name.substr(0, d.full_name.find('/'));
      if (auto b = str(item, "default_branch"); !b.empty()) d.default_branch = b;
      d.stars = item.value("stargazers_count", std::int64_t{0});
      if (auto c = str(item, "created_at"); !c.empty()) d.created_at = parse_iso_time(c);
      for (const auto& t : item.value("topics", json::array())) {
        if (t.is_string()) d.topics.push_back(t.get<std::string>());
      }
      if (d.stars < filter.min_stars) continue;
      pool.emplace(d.full_name, std::move(d));
    }
  }

  std::vector<RepoDescriptor> candidates;
  for (auto& [name, d] : pool) candidates.push_back(std::move(d));
  std::vector<char> keep(candidates.size(), 0);
  parallel_for(candidates.size(), workers, [&](std::size_t i) {
    auto& d = candidates[i];
    std::set<std::string> people;
    for (const auto& c : items_of(api.get_pages(repo_path(d) + "/contributors"), d.full_name + " contributors")) {
      const auto login = str(c, "login");
      if (!login.empty() && !is_bot(login)) people.insert(login);
    }
    d.contributors = people.size();
    if (d.contributors < static_cast<std::size_t>(filter.min_contributors)) return;

    auto commits = list_commits(api, d);
    if (commits.empty()) return;
    auto [lo, hi] = std::minmax_element(commits.begin(), commits.end(),
                                        [](const auto& a, const auto& b) { return a.ts < b.ts; });
    d.first_commit = lo->ts;
    d.last_commit = hi->ts;
    if (!passes_history(d, filter)) return;

    d.file_count = list_tree(api, d).size();
    if (auto langs = api.get(repo_path(d) + "/languages")) {
      std::vector<std::pair<std::int64_t, std::string>> bytes;
      const auto lj = parse_body(*langs, d.full_name + " languages");
      for (const auto& [lang, n] : lj.items()) {
        if (n.is_number()) bytes.emplace_back(n.get<std::int64_t>(), lang);
      }
      std::sort(bytes.begin(), bytes.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      for (std::size_t k = 0; k < bytes.size() && k < 5; ++k) d.languages.push_back(bytes[k].second);
    }
    keep[i] = 1;
  });

  std::vector<RepoDescriptor> passing;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (keep[i]) passing.push_back(std::move(candidates[i]));
  }
  std::vector<std::int64_t> files, stars;
  for (const auto& d : passing) {
    files.push_back(static_cast<std::int64_t>(d.file_count));
    stars.push_back(d.stars);
  }
  const auto ft = tertiles(files);
  const auto st = tertiles(stars);
  std::vector<std::size_t> stratum(passing.size());
  for (std::size_t i = 0; i < passing.size(); ++i) stratum[i] = ft[i] * 3 + st[i];

  std::vector<RepoDescriptor> out;
  for (auto i : stratified_sample(stratum, filter.sample_size, seed)) out.push_back(passing[i]);
  spdlog::info("discovered {} candidates, {} pass thresholds, {} sampled", candidates.size(), passing.size(),
               out.size());
  return out;
}

HarvestedRepo harvest_repo(ApiClient& api, const RepoDescriptor& repo, const HarvestOptions& opts) {
  HarvestedRepo h;
  h.repo = repo;
  h.paths = list_tree(api, repo);
  const std::set<std::string> present(h.paths.begin(), h.paths.end());

  std::set<std::tuple<std::int64_t, std::string, std::string, std::string>> commits;  // ts, user, path, login
  std::map<std::string, std::int64_t> first_seen;
  auto seen = [&](const std::string& user, std::int64_t ts) {
    auto [it, inserted] = first_seen.emplace(user, ts);
    if (!inserted) it->second = std::min(it->second, ts);
  };
  for (const auto& c : list_commits(api, repo)) {
    if (c.user_id.empty() || c.login.empty() || is_bot(c.login)) continue;
    auto detail = api.get(repo_path(repo) + "/commits/" + c.sha);
    if (!detail) continue;
    auto dj = parse_body(*detail, repo.full_name + " commit " + c.sha);
    for (const auto& f : dj.value("files", json::array())) {
      const auto path = str(f, "filename");
      const auto status = str(f, "status");
      if (status == "removed" || !present.count(path)) {
        h.skipped.push_back(repo.full_name + "@" + c.sha + ": " + path + " (" +
                            (status == "removed" ? "deleted" : "no longer present") + ")");
        continue;
      }
      commits.emplace(c.ts, c.user_id, path, c.login);
      seen(c.user_id, c.ts);
    }
  }
  for (const auto& [ts, user, path, login] : commits) h.events.push_back({user, login, Behavior::kCommit, path, ts});

  std::vector<HarvestEvent> project;
  for (const auto& s : items_of(api.get_pages(repo_path(repo) + "/stargazers", {}, kStarAccept),
                                repo.full_name + " stargazers")) {
    const json& u = s.contains("user") ? s["user"] : s;
    const auto login = str(u, "login");
    const auto when = str(s, "starred_at");
    if (login.empty() || is_bot(login)) continue;
    const auto ts = when.empty() ? repo.created_at : parse_iso_time(when);
    project.push_back({id_of(u), login, Behavior::kStar, {}, ts});
    seen(id_of(u), ts);
  }
  for (const auto& f : items_of(api.get_pages(repo_path(repo) + "/forks"), repo.full_name + " forks")) {
    if (!f.contains("owner")) continue;
    const auto login = str(f["owner"], "login");
    if (login.empty() || is_bot(login)) continue;
    const auto when = str(f, "created_at");
    const auto ts = when.empty() ? repo.created_at : parse_iso_time(when);
    project.push_back({id_of(f["owner"]), login, Behavior::kFork, {}, ts});
    seen(id_of(f["owner"]), ts);
  }
  // Subscriptions carry no timestamp: use the user's earliest known activity.
  for (const auto& w : items_of(api.get_pages(repo_path(repo) + "/subscribers"), repo.full_name + " subscribers")) {
    const auto login = str(w, "login");
    if (login.empty() || is_bot(login)) continue;
    auto it = first_seen.find(id_of(w));
    project.push_back({id_of(w), login, Behavior::kWatch, {}, it == first_seen.end() ? repo.created_at : it->second});
  }
  std::stable_sort(project.begin(), project.end(), [](const auto& a, const auto& b) {
    return std::tie(a.timestamp, a.behavior, a.user_id) < std::tie(b.timestamp, b.behavior, b.user_id);
  });
  h.events.insert(h.events.end(), project.begin(), project.end());

  if (opts.fetch_code) {
    for (const auto& path : h.paths) {
      auto body = api.get(repo_path(repo) + "/contents/" + path, {{"ref", repo.default_branch}});
      if (!body) continue;
      auto j = parse_body(*body, repo.full_name + " contents " + path);
      if (!j.is_object() || j.value("size", std::size_t{0}) > opts.max_code_bytes) continue;
      if (str(j, "encoding") != "base64") continue;
      h.code[path] = decode_base64(str(j, "content"));
    }
  }
  for (const auto& w : h.skipped) spdlog::warn("skipped {}", w);
  return h;
}

Dataset assemble_dataset(const std::vector<HarvestedRepo>& repos) {
  Dataset ds;
  std::map<std::string, std::uint32_t> user_index;
  auto user = [&](const HarvestEvent& e) {
    auto [it, inserted] = user_index.emplace(e.user_id, static_cast<std::uint32_t>(ds.users.size()));
    if (inserted) ds.users.push_back({e.user_id, e.login});
    return it->second;
  };

  for (const auto& h : repos) {
    const auto r = static_cast<std::uint32_t>(ds.repos.size());
    const auto& d = h.repo;
    ds.repos.push_back({d.full_name, d.owner, d.created_at, d.languages, d.topics});

    RepoTree tree;
    tree.repo = r;
    const auto slash = d.full_name.find('/');
    tree.nodes.push_back({d.full_name, NodeKind::kRoot,
                          slash == std::string::npos ? d.full_name : d.full_name.substr(slash + 1), -1, r});
    std::map<std::string, std::int32_t> dir_node{{"", 0}};
    std::map<std::string, std::uint32_t> file_index;
    for (const auto& path : h.paths) {
      std::int32_t parent = 0;
      std::size_t start = 0;
      for (auto cut = path.find('/'); cut != std::string::npos; cut = path.find('/', start)) {
        const auto dir = path.substr(0, cut);
        auto it = dir_node.find(dir);
        if (it == dir_node.end()) {
          const auto name = path.substr(start, cut - start);
          const auto idx = static_cast<std::uint32_t>(ds.directories.size());
          ds.directories.push_back({d.full_name + "/" + dir, name, r});
          tree.nodes.push_back({d.full_name + "/" + dir, NodeKind::kDir, name, parent, idx});
          it = dir_node.emplace(dir, static_cast<std::int32_t>(tree.nodes.size() - 1)).first;
        }
        parent = it->second;
        start = cut + 1;
      }
      const auto f = static_cast<std::uint32_t>(ds.files.size());
      const auto name = path.substr(start);
      ds.files.push_back({d.full_name + "/" + path, name, r});
      tree.nodes.push_back({d.full_name + "/" + path, NodeKind::kFile, name, parent, f});
      file_index[path] = f;
      if (auto c = h.code.find(path); c != h.code.end()) ds.code[f] = c->second;
    }
    ds.trees.push_back(std::move(tree));

    for (const auto& e : h.events) {
      if (e.behavior == Behavior::kCommit) {
        auto it = file_index.find(e.path);
        if (it == file_index.end()) continue;
        ds.records.push_back({user(e), it->second, e.behavior, e.timestamp});
      } else {
        ds.records.push_back({user(e), r, e.behavior, e.timestamp});
      }
    }
  }
  std::stable_sort(ds.records.begin(), ds.records.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return ds;
}

CrawlReport run_crawl(ApiClient& api, const CrawlOptions& opts, const fs::path& out) {
  auto found = discover_repos(api, opts.filter, opts.seed, opts.workers);
  std::vector<HarvestedRepo> harvested(found.size());
  parallel_for(found.size(), opts.workers, [&](std::size_t i) { harvested[i] = harvest_repo(api, found[i], opts.harvest); });

  CrawlReport report;
  const auto ds = assemble_dataset(harvested);
  report.repos = ds.repos.size();
  report.users = ds.users.size();
  report.records = ds.records.size();
  std::string ledger;
  for (const auto& h : harvested) {
    report.skipped_files += h.skipped.size();
    for (const auto& w : h.skipped) ledger += w + "\n";
  }

  const auto staging = fs::temp_directory_path() /
                       ("coderec-crawl-" + std::to_string(std::hash<std::string>{}(out.string())) + "-" +
                        std::to_string(std::random_device{}()));
  save_dataset(ds, staging);
  {
    std::ofstream l(staging / "skipped.log", std::ios::binary);
    l << ledger;
  }
  std::vector<fs::path> produced;
  for (const auto& e : fs::recursive_directory_iterator(staging)) {
    if (e.is_regular_file()) produced.push_back(fs::relative(e.path(), staging));
  }
  std::sort(produced.begin(), produced.end());
  for (const auto& rel : produced) {
    std::ifstream in(staging / rel, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (write_if_changed(out / rel, bytes)) ++report.files_written;
  }
  fs::remove_all(staging);
  spdlog::info("crawl wrote {} repos, {} users, {} records ({} files changed, {} skipped paths)", report.repos,
               report.users, report.records, report.files_written, report.skipped_files);
  return report;
}

}  // namespace coderec::miner
