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

#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "coderec/miner.h"
#include "json.hpp"

namespace coderec::testing {

// Plain table-driven encoder, independent of the library's decoder.
inline std::string base64_encode(const std::string& in) {
  static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  std::size_t i = 0;
  for (; i + 2 < in.size(); i += 3) {
    const unsigned v = (static_cast<unsigned char>(in[i]) << 16) | (static_cast<unsigned char>(in[i + 1]) << 8) |
                       static_cast<unsigned char>(in[i + 2]);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += tbl[v & 63];
  }
  if (i + 1 == in.size()) {
    const unsigned v = static_cast<unsigned char>(in[i]) << 16;
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == in.size()) {
    const unsigned v = (static_cast<unsigned char>(in[i]) << 16) | (static_cast<unsigned char>(in[i + 1]) << 8);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

struct FakeAccount {
  std::string login;
  long id = 0;
};

struct FakeCommit {
  std::string sha;
  FakeAccount author;  // empty login: unlinked author
  std::string date;
  std::vector<std::pair<std::string, std::string>> files;  // filename, status
};

struct FakeRepo {
  std::string full_name;
  long stars = 1000;
  std::string created_at = "2015-01-01T00:00:00Z";
  std::vector<std::string> topics;
  std::map<std::string, long> languages;
  std::vector<FakeAccount> contributors;
  std::vector<FakeCommit> commits;
  std::vector<std::string> paths;  // blobs
  bool truncated_tree = false;
  std::vector<std::pair<FakeAccount, std::string>> stargazers;  // starred_at
  std::vector<FakeAccount> subscribers;
  std::vector<std::pair<FakeAccount, std::string>> forks;  // created_at
  std::map<std::string, std::string> contents;
};

// In-memory code-hosting API with paging. Scripted responses in `inject`
// are served first, one per request.
class FakeGitHub : public miner::Transport {
 public:
  std::vector<FakeRepo> repos;
  std::deque<miner::HttpResponse> inject;
  std::vector<std::string> requests;
  std::vector<miner::Headers> request_headers;

  miner::HttpResponse get(const std::string& target, const miner::Headers& headers) override {
    std::lock_guard lock(mu_);
    requests.push_back(target);
    request_headers.push_back(headers);
    if (!inject.empty()) {
      auto r = inject.front();
      inject.pop_front();
      return r;
    }
    return route(target, headers);
  }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return requests.size();
  }

 private:
  using json = nlohmann::json;

  static std::string decode(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '%' && i + 2 < s.size()) {
        out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
        i += 2;
      } else {
        out += s[i] == '+' ? ' ' : s[i];
      }
    }
    return out;
  }

  static miner::HttpResponse ok(const json& j) { return {200, {}, j.dump()}; }
  static miner::HttpResponse missing() { return {404, {}, R"({"message":"Not Found"})"}; }

  static json page(const json& all, const std::map<std::string, std::string>& q) {
    if (!q.count("page")) return all;
    const std::size_t per = std::stoul(q.at("per_page"));
    const std::size_t p = std::stoul(q.at("page"));
    json out = json::array();
    for (std::size_t i = (p - 1) * per; i < all.size() && i < p * per; ++i) out.push_back(all[i]);
    return out;
  }

  static json account(const FakeAccount& a) { return {{"login", a.login}, {"id", a.id}}; }

  const FakeRepo* find(const std::string& name) const {
    for (const auto& r : repos) {
      if (r.full_name == name) return &r;
    }
    return nullptr;
  }

  miner::HttpResponse route(const std::string& target, const miner::Headers& headers) {
    const auto qpos = target.find('?');
    const std::string path = decode(target.substr(0, qpos));
    std::map<std::string, std::string> q;
    if (qpos != std::string::npos) {
      std::string rest = target.substr(qpos + 1);
      std::size_t start = 0;
      while (start <= rest.size()) {
        auto amp = rest.find('&', start);
        auto kv = rest.substr(start, amp - start);
        auto eq = kv.find('=');
        q[decode(kv.substr(0, eq))] = decode(kv.substr(eq + 1));
        if (amp == std::string::npos) break;
        start = amp + 1;
      }
    }

    if (path == "/search/repositories") {
      const auto query = q["q"];
      const auto topic = query.substr(6, query.find(' ') - 6);
      json items = json::array();
      for (const auto& r : repos) {
        if (std::find(r.topics.begin(), r.topics.end(), topic) == r.topics.end()) continue;
        items.push_back({{"full_name", r.full_name},
                         {"owner", {{"login", r.full_name.substr(0, r.full_name.find('/'))}}},
                         {"stargazers_count", r.stars},
                         {"created_at", r.created_at},
                         {"default_branch", "main"},
                         {"topics", r.topics}});
      }
      return ok({{"total_count", items.size()}, {"items", page(items, q)}});
    }
    if (path.rfind("/repos/", 0) != 0) return missing();
    const auto rest = path.substr(7);
    const auto second = rest.find('/', rest.find('/') + 1);
    const auto* repo = find(rest.substr(0, second));
    if (!repo) return missing();
    const auto sub = second == std::string::npos ? std::string() : rest.substr(second + 1);

    if (sub == "contributors") {
      json a = json::array();
      for (const auto& c : repo->contributors) a.push_back(account(c));
      return ok(page(a, q));
    }
    if (sub == "languages") return ok(json(repo->languages));
    if (sub == "commits") {
      json a = json::array();
      for (const auto& c : repo->commits) {
        json o{{"sha", c.sha}, {"commit", {{"author", {{"date", c.date}}}}}};
        o["author"] = c.author.login.empty() ? json(nullptr) : account(c.author);
        a.push_back(o);
      }
      return ok(page(a, q));
    }
    if (sub.rfind("commits/", 0) == 0) {
      for (const auto& c : repo->commits) {
        if (c.sha != sub.substr(8)) continue;
        json files = json::array();
        for (const auto& [f, s] : c.files) files.push_back({{"filename", f}, {"status", s}});
        return ok({{"sha", c.sha}, {"files", files}});
      }
      return missing();
    }
    if (sub.rfind("git/trees/", 0) == 0) return tree(*repo, sub.substr(10), q.count("recursive") > 0);
    if (sub == "stargazers") {
      json a = json::array();
      const bool star_json = headers.count("Accept") && headers.at("Accept").find("star+json") != std::string::npos;
      for (const auto& [u, when] : repo->stargazers) {
        a.push_back(star_json ? json{{"starred_at", when}, {"user", account(u)}} : account(u));
      }
      return ok(page(a, q));
    }
    if (sub == "subscribers") {
      json a = json::array();
      for (const auto& u : repo->subscribers) a.push_back(account(u));
      return ok(page(a, q));
    }
    if (sub == "forks") {
      json a = json::array();
      for (const auto& [u, when] : repo->forks) a.push_back({{"owner", account(u)}, {"created_at", when}});
      return ok(page(a, q));
    }
    if (sub.rfind("contents/", 0) == 0) {
      auto it = repo->contents.find(sub.substr(9));
      if (it == repo->contents.end()) return missing();
      return ok({{"encoding", "base64"}, {"size", it->second.size()}, {"content", base64_encode(it->second)}});
    }
    return missing();
  }

  // Trees are addressed by the branch name or "t<n>" for the n-th directory.
  miner::HttpResponse tree(const FakeRepo& repo, const std::string& sha, bool recursive) {
    std::set<std::string> dirs;
    for (const auto& p : repo.paths) {
      for (auto cut = p.find('/'); cut != std::string::npos; cut = p.find('/', cut + 1)) dirs.insert(p.substr(0, cut));
    }
    const std::vector<std::string> dir_list(dirs.begin(), dirs.end());
    auto dir_sha = [&](const std::string& d) {
      return "t" + std::to_string(std::find(dir_list.begin(), dir_list.end(), d) - dir_list.begin());
    };
    if (recursive) {
      json entries = json::array();
      for (const auto& d : dir_list) entries.push_back({{"path", d}, {"type", "tree"}, {"sha", dir_sha(d)}});
      const std::size_t shown = repo.truncated_tree ? repo.paths.size() / 2 : repo.paths.size();
      for (std::size_t i = 0; i < shown; ++i) entries.push_back({{"path", repo.paths[i]}, {"type", "blob"}});
      return ok({{"tree", entries}, {"truncated", repo.truncated_tree}});
    }
    std::string prefix;
    if (sha != "main") {
      const auto n = std::stoul(sha.substr(1));
      if (n >= dir_list.size()) return missing();
      prefix = dir_list[n];
    }
    json entries = json::array();
    auto direct_child = [&](const std::string& p) -> std::string {
      if (!prefix.empty() && p.rfind(prefix + "/", 0) != 0) return {};
      const auto tail = prefix.empty() ? p : p.substr(prefix.size() + 1);
      return tail.find('/') == std::string::npos ? tail : std::string();
    };
    for (const auto& d : dir_list) {
      if (auto name = direct_child(d); !name.empty()) {
        entries.push_back({{"path", name}, {"type", "tree"}, {"sha", dir_sha(d)}});
      }
    }
    for (const auto& p : repo.paths) {
      if (auto name = direct_child(p); !name.empty()) entries.push_back({{"path", name}, {"type", "blob"}});
    }
    return ok({{"tree", entries}, {"truncated", false}});
  }

  mutable std::mutex mu_;
};

}  // namespace coderec::testing
