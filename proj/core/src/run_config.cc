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

#include "coderec/run_config.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include "coderec/error.h"

namespace coderec {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T number(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError("bad value for " + key + ": '" + v + "'");
  return out;
}

bool boolean(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (auto t = trim(item); !t.empty()) out.push_back(t);
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? "," : "") << xs[i];
  return out.str();
}

std::string fmt_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

ConfigSections parse_config_text(std::string_view text) {
  ConfigSections out;
  std::string section = "run";
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    std::string line(text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    ++lineno;
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    auto key = trim(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out[section][key] = trim(std::string_view(line).substr(eq + 1));
  }
  return out;
}

void RunConfig::set(const std::string& section, const std::string& key, const std::string& v) {
  const auto where = section + "." + key;
  if (section == "run") {
    if (key == "model") model = parse_model_kind(v);
    else if (key == "seed") seed = number<std::uint64_t>(where, v);
    else if (key == "output") output = v;
    else if (key == "protocol") protocol = parse_protocol(v);
    else if (key == "ks") {
      ks.clear();
      for (const auto& k : list(v)) ks.push_back(number<std::size_t>(where, k));
    } else if (key == "early_stopping") early_stopping = boolean(where, v);
    else throw ConfigError("unknown key " + where);
  } else if (section == "data") {
    if (key == "dataset") dataset = v;
    else if (key == "features") features = v;
    else if (key == "force_tfidf") force_tfidf = boolean(where, v);
    else if (key == "t1") t1 = number<std::int64_t>(where, v);
    else if (key == "t2") t2 = number<std::int64_t>(where, v);
    else throw ConfigError("unknown key " + where);
  } else if (section == "hyper") {
    auto m = hyper.to_map();
    if (!m.count(key)) throw ConfigError("unknown key " + where);
    m[key] = v;
    hyper = Hyperparams::from_map(m);
  } else if (section == "ablation") {
    AblationFlags probe;
    try {
      probe.set(key);
    } catch (const Error&) {
      throw ConfigError("unknown key " + where);
    }
    if (boolean(where, v)) {
      flags.set(key);
    } else {
      AblationFlags kept;
      for (const auto& n : flags.names()) {
        AblationFlags one;
        one.set(n);
        if (!(one == probe)) kept.set(n);
      }
      flags = kept;
    }
  } else if (section == "serve") {
    if (key == "host") host = v;
    else if (key == "port") port = number<int>(where, v);
    else throw ConfigError("unknown key " + where);
  } else if (section == "miner") {
    auto& m = miner;
    if (key == "base_url") m.base_url = v;
    else if (key == "token_env") m.token_env = v;
    else if (key == "topics") m.topics = list(v);
    else if (key == "min_stars") m.min_stars = number<int>(where, v);
    else if (key == "min_contributors") m.min_contributors = number<int>(where, v);
    else if (key == "min_history_months") m.min_history_months = number<int>(where, v);
    else if (key == "sample_size") m.sample_size = number<std::size_t>(where, v);
    else if (key == "workers") m.workers = number<std::size_t>(where, v);
    else if (key == "requests_per_second") m.requests_per_second = number<double>(where, v);
    else if (key == "burst") m.burst = number<double>(where, v);
    else if (key == "cache") m.cache = v;
    else if (key == "fetch_code") m.fetch_code = boolean(where, v);
    else throw ConfigError("unknown key " + where);
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

void RunConfig::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override needs key=value: '" + assignment + "'");
  const auto lhs = trim(std::string_view(assignment).substr(0, eq));
  const auto dot = lhs.find('.');
  if (dot == std::string::npos) {
    set("run", lhs, trim(std::string_view(assignment).substr(eq + 1)));
  } else {
    set(lhs.substr(0, dot), lhs.substr(dot + 1), trim(std::string_view(assignment).substr(eq + 1)));
  }
}

void RunConfig::apply(const ConfigSections& sections) {
  for (const auto& [section, kv] : sections) {
    for (const auto& [k, v] : kv) set(section, k, v);
  }
}

void RunConfig::validate() const {
  hyper.validate(!flags.disable_project_level);
  if (t1 >= t2) throw ConfigError("data.t1 must be earlier than data.t2");
  if (ks.empty()) throw ConfigError("run.ks must list at least one cutoff");
  for (auto k : ks) {
    if (k == 0) throw ConfigError("run.ks entries must be positive");
  }
  if (port < 0 || port > 65535) throw ConfigError("serve.port out of range");
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out << "[run]\n"
      << "model = " << to_string(model) << "\n"
      << "seed = " << seed << "\n"
      << "output = " << output.string() << "\n"
      << "protocol = " << to_string(protocol) << "\n"
      << "ks = " << join(ks) << "\n"
      << "early_stopping = " << (early_stopping ? "true" : "false") << "\n\n";
  out << "[data]\n"
      << "dataset = " << dataset.string() << "\n"
      << "features = " << features.string() << "\n"
      << "force_tfidf = " << (force_tfidf ? "true" : "false") << "\n"
      << "t1 = " << t1 << "\n"
      << "t2 = " << t2 << "\n\n";
  out << "[hyper]\n";
  for (const auto& [k, v] : hyper.to_map()) out << k << " = " << v << "\n";
  out << "\n[ablation]\n";
  for (const auto* name : {"disable_fusion", "disable_contrastive", "tfidf_features", "disable_project_level",
                           "disable_structural"}) {
    const auto names = flags.names();
    out << name << " = " << (std::find(names.begin(), names.end(), name) != names.end() ? "true" : "false") << "\n";
  }
  out << "\n[serve]\n"
      << "host = " << host << "\n"
      << "port = " << port << "\n\n";
  out << "[miner]\n"
      << "base_url = " << miner.base_url << "\n"
      << "token_env = " << miner.token_env << "\n"
      << "topics = " << join(miner.topics) << "\n"
      << "min_stars = " << miner.min_stars << "\n"
      << "min_contributors = " << miner.min_contributors << "\n"
      << "min_history_months = " << miner.min_history_months << "\n"
      << "sample_size = " << miner.sample_size << "\n"
      << "workers = " << miner.workers << "\n"
      << "requests_per_second = " << fmt_double(miner.requests_per_second) << "\n"
      << "burst = " << fmt_double(miner.burst) << "\n"
      << "cache = " << miner.cache << "\n"
      << "fetch_code = " << (miner.fetch_code ? "true" : "false") << "\n";
  return out.str();
}

RunConfig RunConfig::from_text(std::string_view text) {
  RunConfig c;
  c.apply(parse_config_text(text));
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return from_text(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void RunConfig::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write config " + path.string());
  out << to_text();
}

}  // namespace coderec
