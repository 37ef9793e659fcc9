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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "coderec/sparse.h"

namespace coderec {

enum class EntityKind { kUser, kFile, kDirectory, kRepo };

struct EntityId {
  EntityKind kind = EntityKind::kUser;
  std::uint32_t index = 0;
  bool operator==(const EntityId&) const = default;
};

enum class Behavior { kCommit, kStar, kWatch, kFork };

std::string_view to_string(Behavior b);
Behavior parse_behavior(std::string_view s);
std::string_view to_string(EntityKind k);

// Project-level behaviors, in canonical order.
inline constexpr Behavior kProjectBehaviors[] = {Behavior::kStar, Behavior::kWatch, Behavior::kFork};

struct InteractionRecord {
  std::uint32_t user = 0;
  // File index for commits, repository index otherwise.
  std::uint32_t target = 0;
  Behavior behavior = Behavior::kCommit;
  std::int64_t timestamp = 0;

  EntityKind target_kind() const { return behavior == Behavior::kCommit ? EntityKind::kFile : EntityKind::kRepo; }
  bool operator==(const InteractionRecord&) const = default;
};

struct User {
  std::string id;
  std::string login;
};

struct Repo {
  std::string id;
  std::string owner;
  std::int64_t created_at = 0;
  std::vector<std::string> top_languages;
  std::vector<std::string> topics;
};

enum class NodeKind { kFile, kDir, kRoot };

struct TreeNode {
  std::string id;
  NodeKind kind = NodeKind::kFile;
  std::string name;
  // Position of the parent within the same tree; -1 for the root.
  std::int32_t parent = -1;
  // File index for kFile, directory index for kDir, repository index for kRoot.
  std::uint32_t entity = 0;
};

struct RepoTree {
  std::uint32_t repo = 0;
  std::vector<TreeNode> nodes;
  std::uint32_t root = 0;
};

struct FileInfo {
  std::string id;
  std::string name;
  std::uint32_t repo = 0;
};

struct DirectoryInfo {
  std::string id;
  std::string name;
  std::uint32_t repo = 0;
};

// Dense ids are assigned in first-appearance order: users and repos in file
// order, files and directories by walking trees in repository order.
struct Dataset {
  std::vector<User> users;
  std::vector<Repo> repos;
  std::vector<FileInfo> files;
  std::vector<DirectoryInfo> directories;
  std::vector<RepoTree> trees;  // aligned with repos
  std::vector<InteractionRecord> records;
  // Optional source text per file index (code.jsonl).
  std::map<std::uint32_t, std::string> code;

  std::size_t num_users() const { return users.size(); }
  std::size_t num_files() const { return files.size(); }
  std::size_t num_repos() const { return repos.size(); }

  // phi: file index -> repository index.
  std::vector<std::uint32_t> file_repo() const;
  std::vector<std::vector<std::uint32_t>> repo_files() const;

  std::optional<std::uint32_t> find_user(std::string_view id_or_login) const;

  // Tab-separated "kind index external-id" lines.
  std::string id_map_text() const;
  std::string mapping_hash() const;
  void write_id_map(const std::filesystem::path& path) const;
};

// Reads users.jsonl, repos.jsonl, interactions.jsonl, trees/<repo>.jsonl and
// optionally code.jsonl. Throws FormatError for missing or malformed files and
// IntegrityError (with file and line) for dangling references.
Dataset load_dataset(const std::filesystem::path& dir);

// Writes the same layout load_dataset reads.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

struct DatasetSplit {
  std::vector<InteractionRecord> train;
  std::vector<InteractionRecord> val;
  std::vector<InteractionRecord> test;
  std::int64_t t1 = 0;
  std::int64_t t2 = 0;
  std::vector<std::uint32_t> retained_users;
  std::vector<std::uint32_t> dropped_users;
};

inline constexpr std::int64_t kDefaultTrainEnd = 1550000000;
inline constexpr std::int64_t kDefaultValEnd = 1602000000;

// Half-open partition [0,t1), [t1,t2), [t2,inf); users without at least one
// train commit and one test commit are dropped from every split.
DatasetSplit split_by_time(const std::vector<InteractionRecord>& records, std::int64_t t1, std::int64_t t2);

struct InteractionMatrices {
  SparseMatrix<float> y;                      // users x files
  std::map<Behavior, SparseMatrix<float>> s;  // users x repos, per project behavior
};

// Binary matrices from train records only; duplicates collapse to one entry.
InteractionMatrices build_interaction_matrices(const DatasetSplit& split, std::size_t num_users,
                                               std::size_t num_files, std::size_t num_repos);

// Binary users x targets matrix of the given records and behavior.
SparseMatrix<float> binary_matrix(const std::vector<InteractionRecord>& records, Behavior behavior,
                                  std::size_t rows, std::size_t cols);

struct DatasetSummary {
  std::size_t users = 0;
  std::size_t retained_users = 0;
  std::size_t files = 0;
  std::size_t repos = 0;
  std::size_t train_commits = 0;
  std::size_t val_commits = 0;
  std::size_t test_commits = 0;
  std::map<Behavior, std::size_t> project_records;
  std::size_t y_nnz = 0;
  double density = 0.0;  // nnz(Y) / (rows(Y) * cols(Y))
};

DatasetSummary summarize(const Dataset& ds, const DatasetSplit& split, const InteractionMatrices& m);

}  // namespace coderec
