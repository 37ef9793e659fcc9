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

#include "coderec/dataset.h"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>

#include "coderec/error.h"
#include "coderec/hash.h"
#include "json.hpp"

namespace coderec {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string json_id(const json& j, const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  if (j.is_number_unsigned()) return std::to_string(j.get<std::uint64_t>());
  throw FormatError(where + ": id must be a string or integer");
}

std::int64_t parse_time(const json& j, const std::string& where) {
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<std::int64_t>();
  if (j.is_string()) {
    std::tm tm{};
    std::istringstream in(j.get<std::string>());
    in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
    if (!in.fail()) return static_cast<std::int64_t>(timegm(&tm));
  }
  throw FormatError(where + ": timestamp must be Unix seconds or ISO-8601");
}

// Calls fn(object, line_number) for each non-blank line.
void for_each_json_line(const fs::path& path, const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw FormatError("missing or unreadable file: " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path.filename().string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.is_object()) {
      throw FormatError(path.filename().string() + ":" + std::to_string(lineno) + ": expected a JSON object");
    }
    fn(obj, lineno);
  }
}

std::string at(const fs::path& p, std::size_t line) { return p.filename().string() + ":" + std::to_string(line); }

const json& field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(where + ": missing field '" + key + "'");
  return *it;
}

std::vector<std::string> string_list(const json& obj, const char* key) {
  std::vector<std::string> out;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return out;
  for (const auto& v : *it) out.push_back(v.get<std::string>());
  return out;
}

NodeKind parse_node_kind(const std::string& s, const std::string& where) {
  if (s == "file") return NodeKind::kFile;
  if (s == "dir" || s == "directory") return NodeKind::kDir;
  if (s == "root") return NodeKind::kRoot;
  throw FormatError(where + ": unknown node kind '" + s + "'");
}

std::string_view node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::kFile: return "file";
    case NodeKind::kDir: return "dir";
    case NodeKind::kRoot: return "root";
  }
  return "file";
}

// Stays within the directory when the id contains path separators.
std::string tree_file_name(const std::string& repo_id) {
  std::string s = repo_id;
  std::replace(s.begin(), s.end(), '/', '_');
  return s + ".jsonl";
}

}  // namespace

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::kCommit: return "commit";
    case Behavior::kStar: return "star";
    case Behavior::kWatch: return "watch";
    case Behavior::kFork: return "fork";
  }
  return "commit";
}

Behavior parse_behavior(std::string_view s) {
  if (s == "commit") return Behavior::kCommit;
  if (s == "star") return Behavior::kStar;
  if (s == "watch") return Behavior::kWatch;
  if (s == "fork") return Behavior::kFork;
  throw ArgumentError("unknown behavior '" + std::string(s) + "'");
}

std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::kUser: return "user";
    case EntityKind::kFile: return "file";
    case EntityKind::kDirectory: return "directory";
    case EntityKind::kRepo: return "repo";
  }
  return "user";
}

std::vector<std::uint32_t> Dataset::file_repo() const {
  std::vector<std::uint32_t> out(files.size());
  for (std::size_t f = 0; f < files.size(); ++f) out[f] = files[f].repo;
  return out;
}

std::vector<std::vector<std::uint32_t>> Dataset::repo_files() const {
  std::vector<std::vector<std::uint32_t>> out(repos.size());
  for (std::uint32_t f = 0; f < files.size(); ++f) out[files[f].repo].push_back(f);
  return out;
}

std::optional<std::uint32_t> Dataset::find_user(std::string_view id_or_login) const {
  for (std::uint32_t u = 0; u < users.size(); ++u) {
    if (users[u].id == id_or_login) return u;
  }
  for (std::uint32_t u = 0; u < users.size(); ++u) {
    if (users[u].login == id_or_login) return u;
  }
  return std::nullopt;
}

std::string Dataset::id_map_text() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < users.size(); ++i) out << "user\t" << i << '\t' << users[i].id << '\n';
  for (std::size_t i = 0; i < repos.size(); ++i) out << "repo\t" << i << '\t' << repos[i].id << '\n';
  for (std::size_t i = 0; i < files.size(); ++i) out << "file\t" << i << '\t' << files[i].id << '\n';
  for (std::size_t i = 0; i < directories.size(); ++i) {
    out << "directory\t" << i << '\t' << directories[i].id << '\n';
  }
  return out.str();
}

std::string Dataset::mapping_hash() const { return sha256_hex(id_map_text()); }

void Dataset::write_id_map(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << id_map_text();
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError("dataset directory not found: " + dir.string());
  Dataset ds;

  std::unordered_map<std::string, std::uint32_t> user_ix;
  const auto users_path = dir / "users.jsonl";
  for_each_json_line(users_path, [&](const json& o, std::size_t line) {
    User u;
    u.id = json_id(field(o, "id", at(users_path, line)), at(users_path, line));
    u.login = o.value("login", u.id);
    if (!user_ix.emplace(u.id, static_cast<std::uint32_t>(ds.users.size())).second) {
      throw IntegrityError(at(users_path, line) + ": duplicate user id '" + u.id + "'");
    }
    ds.users.push_back(std::move(u));
  });

  std::unordered_map<std::string, std::uint32_t> repo_ix;
  const auto repos_path = dir / "repos.jsonl";
  for_each_json_line(repos_path, [&](const json& o, std::size_t line) {
    Repo r;
    const auto where = at(repos_path, line);
    r.id = json_id(field(o, "id", where), where);
    r.owner = o.value("owner", std::string{});
    if (o.contains("created_at")) r.created_at = parse_time(o["created_at"], where);
    r.top_languages = string_list(o, "top_languages");
    if (r.top_languages.size() > 5) r.top_languages.resize(5);
    r.topics = string_list(o, "topics");
    if (!repo_ix.emplace(r.id, static_cast<std::uint32_t>(ds.repos.size())).second) {
      throw IntegrityError(where + ": duplicate repo id '" + r.id + "'");
    }
    ds.repos.push_back(std::move(r));
  });

  std::unordered_map<std::string, std::uint32_t> file_ix;
  std::unordered_map<std::string, std::uint32_t> dir_ix;
  for (std::uint32_t r = 0; r < ds.repos.size(); ++r) {
    const auto tree_path = dir / "trees" / tree_file_name(ds.repos[r].id);
    RepoTree tree;
    tree.repo = r;
    std::vector<std::string> parent_ids;
    std::unordered_map<std::string, std::int32_t> local;
    for_each_json_line(tree_path, [&](const json& o, std::size_t line) {
      const auto where = at(tree_path, line);
      TreeNode n;
      n.id = json_id(field(o, "id", where), where);
      n.kind = parse_node_kind(field(o, "kind", where).get<std::string>(), where);
      n.name = o.value("name", std::string{});
      auto p = o.find("parent");
      parent_ids.push_back(p == o.end() || p->is_null() ? std::string{} : json_id(*p, where));
      if (!local.emplace(n.id, static_cast<std::int32_t>(tree.nodes.size())).second) {
        throw IntegrityError(where + ": duplicate node id '" + n.id + "'");
      }
      tree.nodes.push_back(std::move(n));
    });
    std::size_t roots = 0;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      auto& n = tree.nodes[i];
      const auto where = tree_path.filename().string() + " node '" + n.id + "'";
      if (n.kind == NodeKind::kRoot) {
        if (!parent_ids[i].empty()) throw IntegrityError(where + ": root node has a parent");
        ++roots;
        tree.root = static_cast<std::uint32_t>(i);
        n.entity = r;
        continue;
      }
      auto it = local.find(parent_ids[i]);
      if (parent_ids[i].empty() || it == local.end()) {
        throw IntegrityError(where + ": parent '" + parent_ids[i] + "' not in tree");
      }
      if (tree.nodes[static_cast<std::size_t>(it->second)].kind == NodeKind::kFile) {
        throw IntegrityError(where + ": parent is a file");
      }
      n.parent = it->second;
    }
    if (roots != 1) {
      throw IntegrityError(tree_path.filename().string() + ": expected exactly one root, found " +
                           std::to_string(roots));
    }
    // Every node must reach the root without revisiting a node.
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      std::int32_t cur = static_cast<std::int32_t>(i);
      for (std::size_t steps = 0; cur != static_cast<std::int32_t>(tree.root); ++steps) {
        if (steps > tree.nodes.size()) {
          throw IntegrityError(tree_path.filename().string() + ": cycle through node '" + tree.nodes[i].id + "'");
        }
        cur = tree.nodes[static_cast<std::size_t>(cur)].parent;
      }
    }
    for (auto& n : tree.nodes) {
      if (n.kind == NodeKind::kFile) {
        n.entity = static_cast<std::uint32_t>(ds.files.size());
        if (!file_ix.emplace(n.id, n.entity).second) {
          throw IntegrityError(tree_path.filename().string() + ": file id '" + n.id + "' appears in two trees");
        }
        ds.files.push_back({n.id, n.name, r});
      } else if (n.kind == NodeKind::kDir) {
        n.entity = static_cast<std::uint32_t>(ds.directories.size());
        if (!dir_ix.emplace(n.id, n.entity).second) {
          throw IntegrityError(tree_path.filename().string() + ": directory id '" + n.id + "' appears twice");
        }
        ds.directories.push_back({n.id, n.name, r});
      }
    }
    ds.trees.push_back(std::move(tree));
  }

  const auto inter_path = dir / "interactions.jsonl";
  for_each_json_line(inter_path, [&](const json& o, std::size_t line) {
    const auto where = at(inter_path, line);
    InteractionRecord rec;
    try {
      rec.behavior = parse_behavior(field(o, "behavior", where).get<std::string>());
    } catch (const ArgumentError& e) {
      throw FormatError(where + ": " + e.what());
    }
    const std::string user = json_id(field(o, "user", where), where);
    const std::string target = json_id(field(o, "target", where), where);
    const std::string kind = o.value("kind", rec.behavior == Behavior::kCommit ? "file" : "repo");
    rec.timestamp = parse_time(field(o, "ts", where), where);
    if (rec.timestamp <= 0) throw IntegrityError(where + ": timestamp must be positive");
    auto u = user_ix.find(user);
    if (u == user_ix.end()) throw IntegrityError(where + ": unknown user '" + user + "'");
    rec.user = u->second;
    if (rec.behavior == Behavior::kCommit) {
      if (kind != "file") throw IntegrityError(where + ": commit must target a file");
      auto f = file_ix.find(target);
      if (f == file_ix.end()) throw IntegrityError(where + ": unknown file '" + target + "'");
      rec.target = f->second;
    } else {
      if (kind != "repo") throw IntegrityError(where + ": " + std::string(to_string(rec.behavior)) + " must target a repo");
      auto r = repo_ix.find(target);
      if (r == repo_ix.end()) throw IntegrityError(where + ": unknown repo '" + target + "'");
      rec.target = r->second;
    }
    ds.records.push_back(rec);
  });

  const auto code_path = dir / "code.jsonl";
  if (fs::exists(code_path)) {
    for_each_json_line(code_path, [&](const json& o, std::size_t line) {
      const auto where = at(code_path, line);
      const std::string file = json_id(field(o, "file", where), where);
      auto f = file_ix.find(file);
      if (f == file_ix.end()) throw IntegrityError(where + ": unknown file '" + file + "'");
      ds.code[f->second] = o.value("text", std::string{});
    });
  }
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir / "trees");
  auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw FormatError("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(dir / "users.jsonl");
    for (const auto& u : ds.users) out << json{{"id", u.id}, {"login", u.login}}.dump() << '\n';
  }
  {
    auto out = open(dir / "repos.jsonl");
    for (const auto& r : ds.repos) {
      out << json{{"id", r.id}, {"owner", r.owner}, {"created_at", r.created_at},
                  {"top_languages", r.top_languages}, {"topics", r.topics}}
                 .dump()
          << '\n';
    }
  }
  for (const auto& t : ds.trees) {
    auto out = open(dir / "trees" / tree_file_name(ds.repos[t.repo].id));
    for (const auto& n : t.nodes) {
      json o{{"id", n.id}, {"kind", node_kind_name(n.kind)}, {"name", n.name}};
      o["parent"] = n.parent < 0 ? json(nullptr) : json(t.nodes[static_cast<std::size_t>(n.parent)].id);
      out << o.dump() << '\n';
    }
  }
  {
    auto out = open(dir / "interactions.jsonl");
    for (const auto& r : ds.records) {
      const bool commit = r.behavior == Behavior::kCommit;
      out << json{{"user", ds.users[r.user].id},
                  {"target", commit ? ds.files[r.target].id : ds.repos[r.target].id},
                  {"kind", commit ? "file" : "repo"},
                  {"behavior", to_string(r.behavior)},
                  {"ts", r.timestamp}}
                 .dump()
          << '\n';
    }
  }
  if (!ds.code.empty()) {
    auto out = open(dir / "code.jsonl");
    for (const auto& [f, text] : ds.code) out << json{{"file", ds.files[f].id}, {"text", text}}.dump() << '\n';
  }
}

DatasetSplit split_by_time(const std::vector<InteractionRecord>& records, std::int64_t t1, std::int64_t t2) {
  if (t1 >= t2) {
    throw ArgumentError("split boundaries must satisfy t1 < t2 (got " + std::to_string(t1) + ", " +
                        std::to_string(t2) + ")");
  }
  std::set<std::uint32_t> all_users, train_commit, test_commit;
  for (const auto& r : records) {
    all_users.insert(r.user);
    if (r.behavior != Behavior::kCommit) continue;
    if (r.timestamp < t1) train_commit.insert(r.user);
    if (r.timestamp >= t2) test_commit.insert(r.user);
  }
  DatasetSplit split;
  split.t1 = t1;
  split.t2 = t2;
  for (auto u : all_users) {
    if (train_commit.count(u) && test_commit.count(u)) {
      split.retained_users.push_back(u);
    } else {
      split.dropped_users.push_back(u);
    }
  }
  const std::set<std::uint32_t> keep(split.retained_users.begin(), split.retained_users.end());
  for (const auto& r : records) {
    if (!keep.count(r.user)) continue;
    if (r.timestamp < t1) {
      split.train.push_back(r);
    } else if (r.timestamp < t2) {
      split.val.push_back(r);
    } else {
      split.test.push_back(r);
    }
  }
  return split;
}

SparseMatrix<float> binary_matrix(const std::vector<InteractionRecord>& records, Behavior behavior,
                                  std::size_t rows, std::size_t cols) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& r : records) {
    if (r.behavior == behavior) pairs.emplace(r.user, r.target);
  }
  std::vector<Triplet> trips;
  trips.reserve(pairs.size());
  for (const auto& [u, t] : pairs) trips.push_back({u, t, 1.0});
  return SparseMatrix<float>::from_triplets(rows, cols, std::move(trips));
}

InteractionMatrices build_interaction_matrices(const DatasetSplit& split, std::size_t num_users,
                                               std::size_t num_files, std::size_t num_repos) {
  InteractionMatrices m;
  m.y = binary_matrix(split.train, Behavior::kCommit, num_users, num_files);
  for (Behavior b : kProjectBehaviors) m.s[b] = binary_matrix(split.train, b, num_users, num_repos);
  return m;
}

DatasetSummary summarize(const Dataset& ds, const DatasetSplit& split, const InteractionMatrices& m) {
  DatasetSummary s;
  s.users = ds.num_users();
  s.retained_users = split.retained_users.size();
  s.files = ds.num_files();
  s.repos = ds.num_repos();
  auto count_commits = [](const std::vector<InteractionRecord>& rs) {
    return static_cast<std::size_t>(std::count_if(rs.begin(), rs.end(), [](const InteractionRecord& r) {
      return r.behavior == Behavior::kCommit;
    }));
  };
  s.train_commits = count_commits(split.train);
  s.val_commits = count_commits(split.val);
  s.test_commits = count_commits(split.test);
  for (Behavior b : kProjectBehaviors) s.project_records[b] = 0;
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (const auto& r : *part) {
      if (r.behavior != Behavior::kCommit) ++s.project_records[r.behavior];
    }
  }
  s.y_nnz = m.y.nnz();
  const double cells = static_cast<double>(m.y.rows()) * static_cast<double>(m.y.cols());
  s.density = cells > 0 ? static_cast<double>(s.y_nnz) / cells : 0.0;
  return s;
}

}  // namespace coderec
