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

#include "coderec/protocols.h"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <set>
#include <sstream>

#include "coderec/error.h"
#include "coderec/kernels.h"
#include "json.hpp"

namespace coderec {
namespace {

std::span<const std::uint32_t> row_of(const SparseMatrix<float>& m, std::uint32_t r) {
  const auto& ptr = m.row_ptr();
  return {m.col_idx().data() + ptr[r], ptr[r + 1] - ptr[r]};
}

}  // namespace

float EmbeddingSnapshot::score(std::uint32_t user, std::uint32_t file) const {
  return kernels::dot<float>(users.row(user), files.row(file));
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kIntra: return "intra";
    case Protocol::kCross: return "cross";
    case Protocol::kCold: return "cold";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "intra") return Protocol::kIntra;
  if (s == "cross") return Protocol::kCross;
  if (s == "cold") return Protocol::kCold;
  throw ArgumentError("unknown protocol '" + std::string(s) + "'");
}

std::vector<std::uint32_t> candidate_files(const TrainingData& data, std::uint32_t user, Protocol p) {
  if (user >= data.num_users) throw ArgumentError("user index out of range");
  const auto repos = row_of(data.user_repos, user);
  const auto positives = row_of(data.train.y, user);
  std::vector<std::uint32_t> out;
  for (std::uint32_t r = 0; r < data.num_repos; ++r) {
    const bool interacted = std::binary_search(repos.begin(), repos.end(), r);
    if (interacted == (p == Protocol::kCross)) continue;
    for (auto f : data.repo_files[r]) {
      if (!std::binary_search(positives.begin(), positives.end(), f)) out.push_back(f);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> cold_start_users(const TrainingData& data) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t u = 0; u < data.num_users; ++u) {
    const auto n = data.train.y.row_nnz(u);
    if (n >= 1 && n <= kColdStartMaxTrain) out.push_back(u);
  }
  return out;
}

std::vector<RankingTask> build_tasks(const TrainingData& data, const SparseMatrix<float>& target, Protocol p,
                                     TaskStats* stats) {
  TaskStats local;
  std::vector<std::uint32_t> users;
  if (p == Protocol::kCold) {
    users = cold_start_users(data);
  } else {
    for (std::uint32_t u = 0; u < data.num_users; ++u) users.push_back(u);
  }
  std::vector<RankingTask> tasks;
  for (auto u : users) {
    const auto truth = row_of(target, u);
    if (truth.empty()) continue;
    ++local.cohort_users;
    RankingTask t{u, candidate_files(data, u, p), {}};
    if (t.candidates.empty()) {
      ++local.skipped_no_candidates;
      continue;
    }
    for (auto f : truth) {
      if (std::binary_search(t.candidates.begin(), t.candidates.end(), f)) t.relevant.push_back(f);
    }
    if (t.relevant.empty()) {
      ++local.skipped_no_relevant;
      continue;
    }
    tasks.push_back(std::move(t));
  }
  if (stats != nullptr) *stats = local;
  return tasks;
}

MetricReport evaluate_tasks(const EmbeddingSnapshot& snap, const std::vector<RankingTask>& tasks,
                            const std::vector<std::size_t>& ks) {
  if (ks.empty()) throw ArgumentError("no cut-offs given");
  MetricReport rep;
  rep.ks = ks;
  const std::size_t kmax = *std::max_element(ks.begin(), ks.end());
  std::vector<float> scores(snap.files.rows(), 0.0f);
  const auto start = std::chrono::steady_clock::now();
  for (const auto& t : tasks) {
    for (auto f : t.candidates) scores[f] = snap.score(t.user, f);
    const auto ranked = top_k(scores, t.candidates, kmax);
    UserMetrics um{t.user, {}};
    for (auto k : ks) {
      const auto m = compute_ranking_metrics(ranked, t.relevant, k);
      um.at[k] = *m;
      auto& acc = rep.mean[k];
      acc.ndcg += m->ndcg;
      acc.hit += m->hit;
      acc.mrr += m->mrr;
      acc.recall += m->recall;
    }
    rep.per_user.push_back(std::move(um));
  }
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  for (auto k : ks) {
    auto& acc = rep.mean[k];
    const double n = tasks.empty() ? 1.0 : static_cast<double>(tasks.size());
    acc.ndcg /= n;
    acc.hit /= n;
    acc.mrr /= n;
    acc.recall /= n;
  }
  rep.ms_per_example = tasks.empty() ? 0.0 : ms / static_cast<double>(tasks.size());
  return rep;
}

MetricReport evaluate_protocol(const EmbeddingSnapshot& snap, const TrainingData& data, Protocol p,
                               const std::vector<std::size_t>& ks, bool validation) {
  TaskStats stats;
  const auto tasks = build_tasks(data, validation ? data.val_y : data.test_y, p, &stats);
  auto rep = evaluate_tasks(snap, tasks, ks);
  rep.protocol = std::string(to_string(p));
  rep.stats = stats;
  return rep;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["protocol"] = protocol;
  j["evaluated_users"] = per_user.size();
  j["cohort_users"] = stats.cohort_users;
  j["skipped_no_candidates"] = stats.skipped_no_candidates;
  j["skipped_no_relevant"] = stats.skipped_no_relevant;
  j["ms_per_example"] = ms_per_example;
  auto& metrics = j["metrics"];
  for (auto k : ks) {
    const auto& m = mean.at(k);
    metrics[std::to_string(k)] = {{"ndcg", m.ndcg}, {"hit", m.hit}, {"mrr", m.mrr}, {"recall", m.recall}};
  }
  auto& users = j["per_user"];
  users = nlohmann::ordered_json::array();
  for (const auto& u : per_user) {
    nlohmann::ordered_json row;
    row["user"] = u.user;
    for (const auto& [k, m] : u.at) {
      row[std::to_string(k)] = {{"ndcg", m.ndcg}, {"hit", m.hit}, {"mrr", m.mrr}, {"recall", m.recall}};
    }
    users.push_back(std::move(row));
  }
  return j.dump(2);
}

std::string MetricReport::to_text() const {
  std::ostringstream os;
  os << "model " << model << "  protocol " << protocol << "  users " << per_user.size() << " (cohort "
     << stats.cohort_users << ", no candidates " << stats.skipped_no_candidates << ", no relevant "
     << stats.skipped_no_relevant << ")\n";
  os << std::left << std::setw(6) << "K" << std::right << std::setw(10) << "NDCG" << std::setw(10) << "Hit"
     << std::setw(10) << "MRR" << std::setw(10) << "Recall" << '\n';
  os << std::fixed << std::setprecision(4);
  for (auto k : ks) {
    const auto& m = mean.at(k);
    os << std::left << std::setw(6) << k << std::right << std::setw(10) << m.ndcg << std::setw(10) << m.hit
       << std::setw(10) << m.mrr << std::setw(10) << m.recall << '\n';
  }
  os << "ms/example " << std::setprecision(6) << ms_per_example << '\n';
  return os.str();
}

InferenceTiming measure_inference(const std::function<EmbeddingSnapshot()>& embed,
                                  const std::vector<RankingTask>& tasks, std::size_t k, std::size_t repeats) {
  if (tasks.empty()) throw ArgumentError("timing over zero tasks");
  if (repeats == 0) throw ArgumentError("timing needs at least one repeat");
  std::vector<double> per_task;
  std::size_t sink = 0;
  for (std::size_t r = 0; r <= repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const auto snap = embed();
    std::vector<float> scores(snap.files.rows(), 0.0f);
    for (const auto& t : tasks) {
      for (auto f : t.candidates) scores[f] = snap.score(t.user, f);
      sink += top_k(scores, t.candidates, k).size();
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (r > 0) per_task.push_back(ms / static_cast<double>(tasks.size()));
  }
  if (sink == 0) throw Error("timing produced no rankings");
  InferenceTiming t;
  t.repeats = repeats;
  for (double v : per_task) t.mean_ms += v;
  t.mean_ms /= static_cast<double>(per_task.size());
  std::sort(per_task.begin(), per_task.end());
  t.p95_ms = per_task[std::min(per_task.size() - 1, static_cast<std::size_t>(0.95 * static_cast<double>(per_task.size())))];
  return t;
}

}  // namespace coderec
