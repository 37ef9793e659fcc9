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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "coderec/config.h"
#include "coderec/dataset.h"
#include "coderec/protocols.h"

namespace coderec {

using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

// "[section]" headers followed by "key = value" lines; '#' and ';' start
// comments. Keys before the first header belong to section "run".
ConfigSections parse_config_text(std::string_view text);

struct MinerSettings {
  std::string base_url = "https://api.github.com";
  std::string token_env = "GITHUB_TOKEN";
  std::vector<std::string> topics;
  int min_stars = 250;
  int min_contributors = 3;
  int min_history_months = 3;
  std::size_t sample_size = 300;
  std::size_t workers = 4;
  double requests_per_second = 1.0;
  double burst = 10.0;
  std::string cache = "crawl-cache";
  bool fetch_code = true;
};

struct RunConfig {
  // [run]
  ModelKind model = ModelKind::kCoder;
  std::uint64_t seed = 0;
  std::filesystem::path output = "run";
  Protocol protocol = Protocol::kIntra;
  std::vector<std::size_t> ks = {5, 10, 20};
  bool early_stopping = true;
  // [data]
  std::filesystem::path dataset;
  std::filesystem::path features;  // empty: TF-IDF
  bool force_tfidf = false;
  std::int64_t t1 = kDefaultTrainEnd;
  std::int64_t t2 = kDefaultValEnd;
  // [hyper] and [ablation]
  Hyperparams hyper;
  AblationFlags flags;
  // [serve]
  std::string host = "127.0.0.1";
  int port = 8080;
  // [miner]
  MinerSettings miner;

  // Throws ConfigError naming the section and key.
  void set(const std::string& section, const std::string& key, const std::string& value);
  // "section.key=value"; a bare key is looked up in [run].
  void set_override(const std::string& assignment);
  void apply(const ConfigSections& sections);

  void validate() const;

  std::string to_text() const;
  static RunConfig from_text(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace coderec
