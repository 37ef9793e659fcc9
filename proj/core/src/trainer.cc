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

#include "coderec/trainer.h"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "coderec/baselines.h"
#include "coderec/error.h"

namespace coderec {
namespace {

std::span<const std::uint32_t> row_of(const SparseMatrix<float>& m, std::uint32_t r) {
  const auto& ptr = m.row_ptr();
  return {m.col_idx().data() + ptr[r], ptr[r + 1] - ptr[r]};
}

void put_u32(std::ostream& out, std::uint32_t v) {
  static_assert(std::endian::native == std::endian::little);
  out.write(reinterpret_cast<const char*>(&v), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw FormatError("checkpoint truncated");
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 8)) throw FormatError("checkpoint truncated");
  return v;
}

std::string get_str(std::istream& in) {
  const auto n = get_u32(in);
  if (n > (1u << 24)) throw FormatError("checkpoint string too long");
  std::string s(n, '\0');
  if (!in.read(s.data(), n)) throw FormatError("checkpoint truncated");
  return s;
}

constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

std::vector<std::uint32_t> sample_negatives(std::uint32_t user, const SparseMatrix<float>& interactions,
                                            std::size_t n, std::mt19937_64& rng) {
  const auto row = row_of(interactions, user);
  const std::size_t cols = interactions.cols();
  if (row.size() >= cols) {
    throw SamplingError("user " + std::to_string(user) + " has interacted with every item; no negative exists");
  }
  std::vector<std::uint32_t> out;
  out.reserve(n);
  if (row.size() * 2 > cols) {
    std::vector<std::uint32_t> free;
    for (std::uint32_t c = 0; c < cols; ++c) {
      if (!std::binary_search(row.begin(), row.end(), c)) free.push_back(c);
    }
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    for (std::size_t i = 0; i < n; ++i) out.push_back(free[pick(rng)]);
    return out;
  }
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(cols - 1));
  while (out.size() < n) {
    const auto c = pick(rng);
    if (!std::binary_search(row.begin(), row.end(), c)) out.push_back(c);
  }
  return out;
}

std::optional<std::uint32_t> sample_negative_from(std::uint32_t user, std::span<const std::uint32_t> pool,
                                                  const SparseMatrix<float>& interactions, std::mt19937_64& rng) {
  const auto row = row_of(interactions, user);
  std::vector<std::uint32_t> free;
  for (auto c : pool) {
    if (!std::binary_search(row.begin(), row.end(), c)) free.push_back(c);
  }
  if (free.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  return free[pick(rng)];
}

BatchSampler::BatchSampler(const TrainingData& data, const Hyperparams& hyper, bool project_level)
    : data_(data), hyper_(hyper), project_level_(project_level) {
  const auto& y = data.train.y;
  for (std::uint32_t u = 0; u < y.rows(); ++u) {
    const auto row = row_of(y, u);
    if (row.empty()) continue;
    if (row.size() >= y.cols()) {
      ++saturated_;
      spdlog::warn("user {} interacted with every file; skipped for negative sampling", u);
      continue;
    }
    for (auto f : row) positives_.emplace_back(u, f);
  }
  if (project_level_) {
    for (auto b : hyper.behaviors) {
      auto& list = project_positives_[b];
      auto it = data.train.s.find(b);
      if (it == data.train.s.end()) continue;
      for (std::uint32_t u = 0; u < it->second.rows(); ++u) {
        const auto row = row_of(it->second, u);
        if (row.size() >= it->second.cols()) continue;
        for (auto r : row) list.emplace_back(u, r);
      }
    }
  }
}

std::vector<TrainingBatch> BatchSampler::epoch(std::mt19937_64& rng) const {
  auto order = positives_;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<TrainingBatch> batches;
  for (std::size_t start = 0; start < order.size(); start += hyper_.batch_size) {
    const std::size_t end = std::min(order.size(), start + hyper_.batch_size);
    TrainingBatch b;
    std::set<std::uint32_t> users, files;
    for (std::size_t i = start; i < end; ++i) {
      const auto [u, f] = order[i];
      std::optional<std::uint32_t> neg;
      if (hyper_.same_repo_negatives) neg = sample_negative_from(u, data_.repo_files[data_.file_repo[f]], data_.train.y, rng);
      if (!neg) neg = sample_negatives(u, data_.train.y, 1, rng)[0];
      b.files.users.push_back(u);
      b.files.pos.push_back(f);
      b.files.neg.push_back(*neg);
      users.insert(u);
      files.insert(f);
    }
    b.unique_users.assign(users.begin(), users.end());
    b.unique_files.assign(files.begin(), files.end());
    for (const auto& [behavior, list] : project_positives_) {
      if (list.empty()) continue;
      auto& t = b.projects[behavior];
      const auto& s = data_.train.s.at(behavior);
      std::uniform_int_distribution<std::size_t> pick(0, list.size() - 1);
      for (std::size_t i = start; i < end; ++i) {
        const auto [u, r] = list[pick(rng)];
        t.users.push_back(u);
        t.pos.push_back(r);
        t.neg.push_back(sample_negatives(u, s, 1, rng)[0]);
      }
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

template <typename T>
std::unique_ptr<Recommender<T>> make_recommender(ModelKind kind, const TrainingData& data, const Hyperparams& hyper,
                                                 const AblationFlags& flags, std::uint64_t seed) {
  if (kind == ModelKind::kCoder) return std::make_unique<CoderNet<T>>(data, hyper, flags, seed);
  return std::make_unique<BaselineNet<T>>(kind, data, hyper);
}

template <typename T>
EmbeddingSnapshot snapshot_of(const Recommender<T>& net, ParameterStore<T>& store) {
  Tape<T> tape;
  const auto state = net.forward(tape, store);
  return {state.users.value().template cast<float>(), state.files.value().template cast<float>()};
}

template std::unique_ptr<Recommender<float>> make_recommender<float>(ModelKind, const TrainingData&,
                                                                     const Hyperparams&, const AblationFlags&,
                                                                     std::uint64_t);
template std::unique_ptr<Recommender<double>> make_recommender<double>(ModelKind, const TrainingData&,
                                                                       const Hyperparams&, const AblationFlags&,
                                                                       std::uint64_t);
template EmbeddingSnapshot snapshot_of<float>(const Recommender<float>&, ParameterStore<float>&);
template EmbeddingSnapshot snapshot_of<double>(const Recommender<double>&, ParameterStore<double>&);

std::string TrainedModel::tag() const {
  return kind == ModelKind::kCoder ? flags.tag() : kind == ModelKind::kMF ? "MF" : "LightGCN";
}

EmbeddingSnapshot TrainedModel::embed(const TrainingData& data) {
  if (!mapping_hash.empty() && mapping_hash != data.mapping_hash) {
    throw IntegrityError("model was trained on a dataset with a different id mapping");
  }
  const auto net = make_recommender<float>(kind, data, hyper, flags, seed);
  return snapshot_of(*net, params);
}

void TrainedModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  out.write("CCKP", 4);
  put_u32(out, kCheckpointVersion);
  put_str(out, std::string(to_string(kind)));
  put_str(out, mapping_hash);
  const auto kv = hyper.to_map();
  put_u32(out, static_cast<std::uint32_t>(kv.size()));
  for (const auto& [k, v] : kv) {
    put_str(out, k);
    put_str(out, v);
  }
  const auto names = flags.names();
  put_u32(out, static_cast<std::uint32_t>(names.size()));
  for (const auto& n : names) put_str(out, n);
  put_u64(out, seed);
  put_u32(out, static_cast<std::uint32_t>(best_epoch));
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    put_str(out, p.name);
    put_u32(out, static_cast<std::uint32_t>(p.value.rows()));
    put_u32(out, static_cast<std::uint32_t>(p.value.cols()));
    out.write(reinterpret_cast<const char*>(p.value.data()),
              static_cast<std::streamsize>(p.value.size() * sizeof(float)));
  }
  if (!out) throw FormatError("checkpoint write failed: " + path.string());
}

TrainedModel TrainedModel::load(const std::filesystem::path& path, const std::string& expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("missing checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "CCKP", 4) != 0) throw FormatError(path.string() + ": not a checkpoint");
  if (get_u32(in) != kCheckpointVersion) throw FormatError(path.string() + ": unsupported checkpoint version");
  TrainedModel m;
  m.kind = parse_model_kind(get_str(in));
  m.mapping_hash = get_str(in);
  if (!expected_hash.empty() && m.mapping_hash != expected_hash) {
    throw IntegrityError("checkpoint " + path.string() + " was trained on a different dataset (mapping hash " +
                         m.mapping_hash.substr(0, 12) + " vs " + expected_hash.substr(0, 12) + ")");
  }
  std::map<std::string, std::string> kv;
  for (auto n = get_u32(in); n > 0; --n) {
    auto k = get_str(in);
    kv[k] = get_str(in);
  }
  m.hyper = Hyperparams::from_map(kv);
  for (auto n = get_u32(in); n > 0; --n) m.flags.set(get_str(in));
  m.seed = get_u64(in);
  m.best_epoch = static_cast<int>(get_u32(in));
  for (auto n = get_u32(in); n > 0; --n) {
    auto name = get_str(in);
    const auto rows = get_u32(in);
    const auto cols = get_u32(in);
    std::vector<float> v(static_cast<std::size_t>(rows) * cols);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)))) {
      throw FormatError("checkpoint truncated in " + name);
    }
    m.params.add(name, TensorF(rows, cols, std::move(v)));
  }
  return m;
}

TrainedModel train_model(ModelKind kind, const TrainingData& data, const Hyperparams& hyper,
                         const AblationFlags& flags, const TrainOptions& opts) {
  const bool project_level = kind == ModelKind::kCoder && !flags.disable_project_level;
  hyper.validate(project_level);
  TrainedModel model;
  model.kind = kind;
  model.hyper = hyper;
  model.flags = kind == ModelKind::kCoder ? flags : AblationFlags{};
  model.seed = opts.seed;
  model.mapping_hash = data.mapping_hash;

  const auto net = make_recommender<float>(kind, data, hyper, model.flags, opts.seed);
  std::mt19937_64 rng(opts.seed);
  net->init_params(model.params, rng);
  AdamState<float> adam;
  const BatchSampler sampler(data, hyper, project_level);

  const bool has_val = !build_tasks(data, data.val_y, opts.validation_protocol).empty();
  const bool early = opts.early_stopping && has_val;
  if (opts.early_stopping && !has_val) spdlog::info("no validation tasks; early stopping disabled");

  double best = -1.0;
  std::vector<TensorF> best_values;
  int since_best = 0;
  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    for (const auto& batch : sampler.epoch(rng)) {
      model.params.zero_grad();
      Tape<float> tape;
      const auto state = net->forward(tape, model.params);
      const auto loss = training_loss(tape, model.params, state, batch, hyper);
      log.loss += loss.value()[0];
      tape.backward(loss);
      adam_step(model.params, adam, hyper.lr);
      ++log.batches;
    }
    if (log.batches > 0) log.loss /= static_cast<double>(log.batches);
    if (has_val) {
      const auto snap = snapshot_of(*net, model.params);
      log.val_ndcg10 = evaluate_protocol(snap, data, opts.validation_protocol, {10}, true).mean.at(10).ndcg;
    }
    model.log.push_back(log);
    if (opts.on_epoch) opts.on_epoch(log);
    spdlog::debug("epoch {} loss {:.6f} val ndcg@10 {:.4f}", epoch, log.loss, log.val_ndcg10);
    if (!std::isfinite(log.loss)) throw Error("training diverged at epoch " + std::to_string(epoch));
    if (!early) {
      model.best_epoch = epoch;
      continue;
    }
    if (log.val_ndcg10 > best) {
      best = log.val_ndcg10;
      model.best_epoch = epoch;
      since_best = 0;
      best_values.clear();
      for (std::size_t i = 0; i < model.params.size(); ++i) best_values.push_back(model.params[i].value);
    } else if (++since_best >= hyper.patience) {
      break;
    }
  }
  if (early && !best_values.empty()) {
    for (std::size_t i = 0; i < model.params.size(); ++i) model.params[i].value = best_values[i];
  }
  return model;
}

}  // namespace coderec
