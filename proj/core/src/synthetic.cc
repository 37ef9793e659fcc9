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

#include "coderec/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "coderec/error.h"

namespace coderec {
namespace {

constexpr const char* kWords[] = {"data",  "model", "utils", "core",   "io",     "net",   "train",  "eval",
                                  "parse", "cache", "graph", "vision", "text",   "audio", "server", "client"};
constexpr const char* kLanguages[] = {"Python", "C++", "Go", "Rust", "Java", "JavaScript"};
constexpr std::int64_t kTrainStart = 1450000000;

std::string cap(std::string s) {
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

// Weighted draw without replacement from items not in `taken`.
std::optional<std::uint32_t> draw(const std::vector<std::uint32_t>& items, const std::vector<double>& weight,
                                  const std::set<std::uint32_t>& taken, std::mt19937_64& rng) {
  double total = 0.0;
  for (auto i : items) {
    if (!taken.count(i)) total += weight[i];
  }
  if (total <= 0.0) return std::nullopt;
  double x = std::uniform_real_distribution<double>(0.0, total)(rng);
  for (auto i : items) {
    if (taken.count(i)) continue;
    x -= weight[i];
    if (x <= 0.0) return i;
  }
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    if (!taken.count(*it)) return *it;
  }
  return std::nullopt;
}

}  // namespace

Dataset make_synthetic_dataset(const SyntheticConfig& cfg) {
  if (cfg.groups == 0 || cfg.home_repos == 0 || cfg.home_repos > cfg.repos || cfg.hot_dirs > cfg.dirs_per_repo ||
      cfg.users == 0) {
    throw ArgumentError("inconsistent synthetic configuration");
  }
  std::mt19937_64 rng(cfg.seed);
  Dataset ds;
  const std::size_t per_group = cfg.home_repos;
  const std::size_t stride = std::max<std::size_t>(1, cfg.repos / cfg.groups);
  auto home = [&](std::size_t g, std::size_t slot) { return static_cast<std::uint32_t>((g * stride + slot) % cfg.repos); };

  // Repositories, trees and code.
  std::vector<std::vector<std::vector<std::uint32_t>>> dir_files(cfg.repos);
  for (std::uint32_t r = 0; r < cfg.repos; ++r) {
    Repo repo;
    repo.owner = "org" + std::to_string(r % 4);
    repo.id = repo.owner + "/project" + std::to_string(r);
    repo.created_at = 1300000000 + static_cast<std::int64_t>(r) * 7000000;
    repo.top_languages = {kLanguages[r % 6], kLanguages[(r + 2) % 6]};
    repo.topics = {kWords[r % 16]};
    ds.repos.push_back(repo);

    RepoTree tree;
    tree.repo = r;
    tree.nodes.push_back({repo.id, NodeKind::kRoot, "project" + std::to_string(r), -1, r});
    dir_files[r].resize(cfg.dirs_per_repo);
    for (std::size_t k = 0; k < cfg.dirs_per_repo; ++k) {
      const std::string name = cap(kWords[(r * 3 + k) % 16]) + cap(kWords[(r + k * 5 + 1) % 16]);
      const auto dir_index = static_cast<std::uint32_t>(ds.directories.size());
      ds.directories.push_back({repo.id + "/" + name, name, r});
      const auto dir_pos = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back({repo.id + "/" + name, NodeKind::kDir, name, 0, dir_index});
      for (std::size_t i = 0; i < cfg.files_per_dir; ++i) {
        const auto f = static_cast<std::uint32_t>(ds.files.size());
        const std::string fname = std::string(kWords[(k + i) % 16]) + "_" + std::to_string(i) + ".py";
        const std::string fid = repo.id + "/" + name + "/" + fname;
        ds.files.push_back({fid, fname, r});
        tree.nodes.push_back({fid, NodeKind::kFile, fname, dir_pos, f});
        dir_files[r][k].push_back(f);
        std::string code;
        for (int rep = 0; rep < 3; ++rep) {
          code += "def rp" + std::to_string(r) + "_fn ( self , fid" + std::to_string(f) + " ) : return rp" +
                  std::to_string(r) + "_val . " + kWords[(f + rep) % 16] + " ( ) ";
        }
        ds.code[f] = code;
      }
    }
    ds.trees.push_back(std::move(tree));
  }

  // Per-group hot directories and file popularity.
  std::vector<std::vector<double>> weight(cfg.groups, std::vector<double>(ds.files.size(), 0.0));
  std::vector<std::vector<std::vector<std::uint32_t>>> hot(cfg.groups);  // group -> home repo slot -> files
  std::vector<std::vector<std::vector<std::uint32_t>>> seen(cfg.groups);  // hot files eligible for train commits
  std::vector<bool> fresh(ds.files.size());
  for (std::size_t f = 0; f < fresh.size(); ++f) {
    fresh[f] = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.fresh_fraction;
  }
  for (std::size_t g = 0; g < cfg.groups; ++g) {
    hot[g].resize(per_group);
    seen[g].resize(per_group);
    for (std::size_t s = 0; s < per_group; ++s) {
      const auto r = home(g, s);
      std::vector<std::size_t> dirs(cfg.dirs_per_repo);
      std::iota(dirs.begin(), dirs.end(), 0);
      std::shuffle(dirs.begin(), dirs.end(), rng);
      for (std::size_t h = 0; h < cfg.hot_dirs; ++h) {
        for (auto f : dir_files[r][dirs[h]]) {
          hot[g][s].push_back(f);
          if (!fresh[f]) seen[g][s].push_back(f);
        }
      }
      std::vector<std::uint32_t> order = hot[g][s];
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t rank = 0; rank < order.size(); ++rank) weight[g][order[rank]] = 1.0 / std::pow(rank + 1.0, cfg.popularity_skew);
    }
  }

  auto ts_in = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi - 1)(rng);
  };
  for (std::uint32_t u = 0; u < cfg.users; ++u) {
    ds.users.push_back({std::to_string(1000 + u), "dev" + std::to_string(u)});
    const std::size_t g = u % cfg.groups;
    const std::size_t fav = std::uniform_int_distribution<std::size_t>(0, per_group - 1)(rng);
    const bool cold = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.cold_fraction;
    const std::size_t n_train = cold ? std::uniform_int_distribution<std::size_t>(1, 2)(rng)
                                     : std::uniform_int_distribution<std::size_t>(cfg.min_train, cfg.max_train)(rng);
    std::set<std::uint32_t> taken;
    for (std::size_t i = 0; i < n_train; ++i) {
      std::size_t slot = fav;
      if (per_group > 1 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) >= cfg.favorite_share) {
        slot = (fav + 1 + std::uniform_int_distribution<std::size_t>(0, per_group - 2)(rng)) % per_group;
      }
      if (auto f = draw(seen[g][slot], weight[g], taken, rng)) {
        taken.insert(*f);
        ds.records.push_back({u, *f, Behavior::kCommit, ts_in(kTrainStart, kDefaultTrainEnd)});
      }
    }
    for (std::size_t i = 0; i < cfg.val_per_user; ++i) {
      if (auto f = draw(hot[g][fav], weight[g], taken, rng)) {
        taken.insert(*f);
        ds.records.push_back({u, *f, Behavior::kCommit, ts_in(kDefaultTrainEnd, kDefaultValEnd)});
      }
    }
    for (std::size_t i = 0; i < cfg.test_per_user; ++i) {
      if (auto f = draw(hot[g][fav], weight[g], taken, rng)) {
        taken.insert(*f);
        ds.records.push_back({u, *f, Behavior::kCommit, ts_in(kDefaultValEnd, kDefaultValEnd + 50000000)});
      }
    }
    const auto fav_repo = home(g, fav);
    const auto any_repo = [&] { return std::uniform_int_distribution<std::uint32_t>(0, cfg.repos - 1)(rng); };
    const auto home_repo = [&] {
      return home(g, std::uniform_int_distribution<std::size_t>(0, per_group - 1)(rng));
    };
    const auto star = cfg.project_signal ? fav_repo : home_repo();
    ds.records.push_back({u, star, Behavior::kStar, ts_in(kTrainStart, kDefaultTrainEnd)});
    const bool watch_fav = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < 0.7;
    const auto watch = cfg.project_signal ? (watch_fav ? fav_repo : any_repo()) : home_repo();
    ds.records.push_back({u, watch, Behavior::kWatch, ts_in(kTrainStart, kDefaultTrainEnd)});
  }
  std::stable_sort(ds.records.begin(), ds.records.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return ds;
}

}  // namespace coderec
