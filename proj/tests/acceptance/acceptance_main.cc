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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "coderec/behavior.h"
#include "coderec/cli.h"
#include "coderec/dataset.h"
#include "coderec/experiment.h"
#include "coderec/metrics.h"
#include "coderec/model.h"
#include "coderec/semantics.h"
#include "coderec/synthetic.h"
#include "coderec/trainer.h"
#include "json.hpp"
#include "testing/dense_attention.h"
#include "testing/dense_propagation.h"
#include "testing/gradcheck.h"
#include "testing/metric_oracle.h"
#include "testing/temp_dir.h"
#include "testing/toy_data.h"

namespace coderec {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using testing::Mat;

constexpr int kSeeds = 5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Mat random_mat(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> d(0.0, scale);
  Mat m(r, std::vector<double>(c));
  for (auto& row : m)
    for (auto& v : row) v = d(rng);
  return m;
}

TensorD to_tensor(const Mat& m) {
  TensorD t(m.size(), m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[0].size(); ++j) t(i, j) = m[i][j];
  return t;
}

Outcome gradient_correctness() {
  const auto t0 = Clock::now();
  auto p = testing::prepare(testing::toy_config(), testing::toy_hyper());
  if (p->data.num_users != 5 || p->data.num_files != 8 || p->data.num_repos != 2) {
    return {false, "toy instance is not 5 users / 8 files / 2 repos"};
  }
  auto hyper = testing::toy_hyper();
  hyper.lambda2 = 0.05;
  hyper.lambda3 = 0.01;
  CoderNet<double> net(p->data, hyper, {}, 1);
  ParameterStore<double> store;
  std::mt19937_64 init_rng(12);
  net.init_params(store, init_rng);
  BatchSampler sampler(p->data, hyper, true);
  std::mt19937_64 rng(13);
  const auto batch = sampler.epoch(rng).front();
  const auto report = testing::gradient_check(
      store, [&](Tape<double>& tape) { return training_loss(tape, store, net.forward(tape, store), batch, hyper); },
      1e-4);
  double worst = 0.0;
  std::string worst_name;
  bool dead = false;
  for (const auto& e : report) {
    if (e.rel_error > worst) {
      worst = e.rel_error;
      worst_name = e.name;
    }
    dead = dead || e.analytic_norm == 0.0;
  }
  const double secs = seconds_since(t0);
  const bool ok = report.size() == store.size() && worst < 1e-3 && !dead && secs < 60.0;
  return {ok, std::to_string(report.size()) + " parameters, max rel err " + fmt("%.2e", worst) + " (" + worst_name +
                  ") < 1e-3, " + fmt("%.1f", secs) + " s < 60 s" + (dead ? ", zero gradient present" : "")};
}

Outcome propagation_oracle() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int g = 0; g < 100; ++g) {
    const std::size_t nu = std::uniform_int_distribution<std::size_t>(1, 25)(rng);
    const std::size_t nv = std::uniform_int_distribution<std::size_t>(1, 50 - nu)(rng);
    const int layers = std::uniform_int_distribution<int>(1, 4)(rng);
    std::bernoulli_distribution keep(std::uniform_real_distribution<double>(0.05, 0.6)(rng));
    TensorD biadj(nu, nv);
    for (auto& v : biadj.values()) v = keep(rng) ? 1.0 : 0.0;
    TensorD e0(nu + nv, 4);
    std::normal_distribution<double> nd;
    for (auto& v : e0.values()) v = nd(rng);

    const auto sparse = propagate(e0, normalize_adjacency<double>(testing::sparse_from_dense(biadj)), layers);
    const auto dense = testing::dense_propagate(testing::dense_normalized_adjacency(biadj), e0, layers);
    TensorD dense_pool(e0.rows(), e0.cols());
    for (const auto& layer : dense)
      for (std::size_t i = 0; i < layer.size(); ++i) dense_pool[i] += layer[i] / static_cast<double>(dense.size());
    const auto pooled = pool_layers(sparse);
    for (std::size_t l = 0; l < dense.size(); ++l)
      for (std::size_t i = 0; i < dense[l].size(); ++i) worst = std::max(worst, std::abs(sparse[l][i] - dense[l][i]));
    for (std::size_t i = 0; i < pooled.size(); ++i) worst = std::max(worst, std::abs(pooled[i] - dense_pool[i]));
  }
  return {worst <= 1e-6, "100 graphs, max abs diff " + fmt("%.2e", worst) + " <= 1e-6"};
}

Outcome metric_oracle() {
  std::mt19937_64 rng(2025);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
    std::vector<std::uint32_t> items(n + 20);
    std::iota(items.begin(), items.end(), 0u);
    std::shuffle(items.begin(), items.end(), rng);
    std::vector<std::uint32_t> ranked(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n));
    const std::size_t r = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    std::set<std::uint32_t> relevant;
    while (relevant.size() < r) relevant.insert(items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)]);
    const std::vector<std::uint32_t> rel(relevant.begin(), relevant.end());
    for (std::size_t k : {1u, 5u, 10u, 20u}) {
      const auto got = *compute_ranking_metrics(ranked, rel, k);
      const auto want = testing::oracle_metrics(ranked, relevant, k);
      if (got.ndcg != want.ndcg || got.hit != want.hit || got.mrr != want.mrr || got.recall != want.recall) ++mismatches;
    }
  }
  const std::vector<std::uint32_t> ranked{3, 1, 2};
  const auto perfect = *compute_ranking_metrics(ranked, std::vector<std::uint32_t>{3}, 3);
  const auto second = *compute_ranking_metrics(ranked, std::vector<std::uint32_t>{1}, 3);
  const bool closed = perfect.ndcg == 1.0 && second.ndcg == 1.0 / std::log2(3.0) &&
                      std::abs(second.ndcg - 0.63093) < 5e-6;
  return {mismatches == 0 && closed, "1000 instances x 4 cutoffs, " + std::to_string(mismatches) +
                                         " mismatches; NDCG perfect " + fmt("%.5f", perfect.ndcg) + ", rank-2 " +
                                         fmt("%.5f", second.ndcg)};
}

Outcome coattention_conformance() {
  std::mt19937_64 rng(303);
  double worst = 0.0, worst_sum = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const Mat w_o = random_mat(32, 32, rng, 0.3), w_c = random_mat(32, 32, rng, 0.3),
              w_q = random_mat(32, 32, rng, 0.3), w_h = random_mat(32, 1, rng, 0.5);
    const Mat c = random_mat(8, 32, rng, 1.0), q = random_mat(4, 32, rng, 1.0);
    Tape<double> tape;
    const FusionVars<double> vars{tape.constant(to_tensor(w_o)), tape.constant(to_tensor(w_c)),
                                  tape.constant(to_tensor(w_q)), tape.constant(to_tensor(w_h))};
    const auto out = coattention_fuse(tape.constant(to_tensor(c)), tape.constant(to_tensor(q)), vars, 1);
    std::vector<double> wh;
    for (const auto& r : w_h) wh.push_back(r[0]);
    const auto ref = testing::reference_fusion(c, q, w_o, w_c, w_q, wh);
    for (std::size_t k = 0; k < 32; ++k) worst = std::max(worst, std::abs(out.h.value()[k] - ref.h[k]));
    double sum = 0.0;
    for (std::size_t j = 0; j < 8; ++j) {
      worst = std::max(worst, std::abs(out.attention.value()[j] - ref.a[j]));
      sum += out.attention.value()[j];
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  return {worst <= 1e-6 && worst_sum <= 1e-6,
          "100 draws, max abs diff " + fmt("%.2e", worst) + " <= 1e-6, |sum a - 1| " + fmt("%.2e", worst_sum)};
}

Hyperparams experiment_hyper() {
  Hyperparams h;
  h.lr = 1e-2;
  h.max_epochs = 200;
  h.patience = 10;
  return h;
}

SyntheticConfig planted(int seed) {
  SyntheticConfig c;
  c.seed = static_cast<std::uint64_t>(seed);
  return c;
}

Outcome overfit_sanity() {
  auto p = testing::prepare(planted(0));
  const auto& d = p->data;
  auto h = experiment_hyper();
  TrainOptions o;
  o.early_stopping = false;
  const auto t0 = Clock::now();
  auto m = train_model(ModelKind::kCoder, d, h, {}, o);
  const double secs = seconds_since(t0);
  const auto snap = m.embed(d);
  std::vector<std::uint32_t> all(d.num_files);
  std::iota(all.begin(), all.end(), 0u);
  std::vector<RankingTask> tasks;
  for (std::uint32_t u = 0; u < d.num_users; ++u) {
    RankingTask t{u, all, {}};
    for (std::uint32_t f = 0; f < d.num_files; ++f)
      if (d.train.y.at(u, f) != 0.0f) t.relevant.push_back(f);
    if (!t.relevant.empty()) tasks.push_back(std::move(t));
  }
  const double hit = evaluate_tasks(snap, tasks, {5}).mean.at(5).hit;
  const bool shape = d.num_users == 50 && d.num_files == 200 && d.num_repos == 10;
  return {shape && hit >= 0.9 && secs < 120.0, "train Hit@5 " + fmt("%.3f", hit) + " >= 0.9 after " +
                                                   std::to_string(m.log.size()) + " epochs, " + fmt("%.1f", secs) +
                                                   " s < 120 s"};
}

// 5-seed intra NDCG@10 per variant on the planted synthetic.
struct Experiments {
  std::map<std::string, double> ndcg10;
  std::map<std::string, std::vector<double>> per_seed;
};

Experiments run_experiments() {
  Experiments ex;
  const std::vector<std::pair<std::string, std::string>> variants{{"CD", ""}, {"CD-F", "F"}, {"CD-C", "C"},
                                                                 {"CD-E", "E"}, {"CD-P", "P"}, {"CD-S", "S"}};
  for (int s = 0; s < kSeeds; ++s) {
    auto p = testing::prepare(planted(s));
    const auto h = experiment_hyper();
    for (auto kind : {ModelKind::kMF, ModelKind::kLightGCN}) {
      const auto r = run_model(kind, p->data, h, {}, Protocol::kIntra, {10}, static_cast<std::uint64_t>(s));
      ex.per_seed[std::string(to_string(kind))].push_back(r.report.mean.at(10).ndcg);
    }
    for (const auto& [tag, letter] : variants) {
      AblationFlags flags;
      if (!letter.empty()) flags.set(letter);
      const auto r = run_model(ModelKind::kCoder, p->data, h, flags, Protocol::kIntra, {10}, static_cast<std::uint64_t>(s));
      ex.per_seed[tag].push_back(r.report.mean.at(10).ndcg);
    }
  }
  for (const auto& [k, v] : ex.per_seed) ex.ndcg10[k] = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return ex;
}

Outcome ordering(const Experiments& ex) {
  const double mf = ex.ndcg10.at("mf"), lgn = ex.ndcg10.at("lightgcn"), cd = ex.ndcg10.at("CD");
  return {cd >= lgn && lgn >= mf && cd > mf, "NDCG@10 CODER " + fmt("%.4f", cd) + ", LightGCN " + fmt("%.4f", lgn) +
                                                 ", MF " + fmt("%.4f", mf)};
}

Outcome ablation(const Experiments& ex) {
  const double cd = ex.ndcg10.at("CD");
  std::string detail = "NDCG@10 CD " + fmt("%.4f", cd);
  std::string largest;
  double lowest = 2.0;
  for (const auto* tag : {"CD-F", "CD-C", "CD-E", "CD-P", "CD-S"}) {
    const double v = ex.ndcg10.at(tag);
    detail += std::string(", ") + tag + " " + fmt("%.4f", v);
    if (v < lowest) {
      lowest = v;
      largest = tag;
    }
  }
  const bool ok = cd >= ex.ndcg10.at("CD-P") && cd >= ex.ndcg10.at("CD-S") && largest == "CD-P";
  return {ok, detail + "; largest drop " + largest};
}

Outcome cold_start() {
  auto p = testing::prepare(planted(0));
  const auto& d = p->data;
  std::map<std::uint32_t, std::set<std::uint32_t>> files;
  for (const auto& r : p->split.train)
    if (r.behavior == Behavior::kCommit) files[r.user].insert(r.target);
  std::vector<std::uint32_t> brute;
  for (std::uint32_t u = 0; u < d.num_users; ++u) {
    const auto n = files.count(u) ? files[u].size() : 0u;
    if (n >= 1 && n <= 2) brute.push_back(u);
  }
  const auto cohort = cold_start_users(d);
  Hyperparams h = experiment_hyper();
  h.max_epochs = 20;
  TrainOptions o;
  o.early_stopping = false;
  auto m = train_model(ModelKind::kCoder, d, h, {}, o);
  const auto rep = evaluate_protocol(m.embed(d), d, Protocol::kCold, {10});
  bool inside = !rep.per_user.empty();
  double sum = 0.0;
  for (const auto& um : rep.per_user) {
    inside = inside && std::binary_search(brute.begin(), brute.end(), um.user);
    sum += um.at.at(10).ndcg;
  }
  const auto tasks = build_tasks(d, d.test_y, Protocol::kCold);
  const double mean = rep.per_user.empty() ? 0.0 : sum / static_cast<double>(rep.per_user.size());
  const bool ok = cohort == brute && inside && rep.per_user.size() == tasks.size() &&
                  std::abs(mean - rep.mean.at(10).ndcg) < 1e-12;
  return {ok, "cohort " + std::to_string(cohort.size()) + " = brute force " + std::to_string(brute.size()) + ", " +
                  std::to_string(rep.per_user.size()) + " scored users all inside cohort"};
}

Outcome timing() {
  auto p = testing::prepare(planted(0));
  const auto& d = p->data;
  const auto tasks = build_tasks(d, d.test_y, Protocol::kIntra);
  Hyperparams h = experiment_hyper();
  h.max_epochs = 5;
  TrainOptions o;
  o.early_stopping = false;
  std::map<ModelKind, double> ms;
  for (auto kind : {ModelKind::kMF, ModelKind::kLightGCN, ModelKind::kCoder}) {
    auto m = train_model(kind, d, h, {}, o);
    ms[kind] = measure_inference([&] { return m.embed(d); }, tasks, 10, 200).mean_ms;
  }
  const double mf = ms[ModelKind::kMF], lgn = ms[ModelKind::kLightGCN], cd = ms[ModelKind::kCoder];
  return {mf <= lgn && lgn <= cd && cd <= 3.0 * lgn,
          "ms/example MF " + fmt("%.4f", mf) + ", LightGCN " + fmt("%.4f", lgn) + ", CODER " + fmt("%.4f", cd) +
              " (" + fmt("%.2f", cd / lgn) + "x LightGCN, bound 3x)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "coderec");
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  return code;
}

Outcome determinism() {
  testing::TempDir tmp;
  save_dataset(make_synthetic_dataset(planted(3)), tmp.path() / "ds");
  const auto cfg = tmp.path() / "run.ini";
  std::ofstream(cfg) << "[run]\nseed = 11\n[data]\ndataset = " << (tmp.path() / "ds").string()
                     << "\n[hyper]\nlr = 0.01\nmax_epochs = 30\n";
  std::vector<std::string> ckpts, reports;
  for (const auto* name : {"a", "b"}) {
    const auto dir = (tmp.path() / name).string();
    if (cli({"-q", "train", "--config", cfg.string(), "--out", dir}) != kExitOk) return {false, "train failed"};
    std::string rep;
    if (cli({"-q", "evaluate", "--run", dir, "--json"}, &rep) != kExitOk) return {false, "evaluate failed"};
    auto j = nlohmann::json::parse(rep);
    j.erase("ms_per_example");
    reports.push_back(j.dump());
    ckpts.push_back(slurp(fs::path(dir) / "model.ckpt"));
  }
  const bool same_ckpt = ckpts[0] == ckpts[1] && !ckpts[0].empty();
  const bool same_report = reports[0] == reports[1];
  return {same_ckpt && same_report, std::string("checkpoints ") + (same_ckpt ? "identical" : "differ") + " (" +
                                        std::to_string(ckpts[0].size()) + " bytes), metric reports " +
                                        (same_report ? "identical" : "differ")};
}

}  // namespace
}  // namespace coderec

int main() {
  using namespace coderec;
  spdlog::set_level(spdlog::level::warn);
  int failed = 0;
  auto line = [&](const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %-24s %s  [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  };
  line("gradient-correctness", gradient_correctness);
  line("propagation-oracle", propagation_oracle);
  line("metric-oracle", metric_oracle);
  line("coattention-conformance", coattention_conformance);
  line("overfit-sanity", overfit_sanity);
  Experiments ex;
  std::string ex_error;
  const auto t0 = Clock::now();
  try {
    ex = run_experiments();
  } catch (const std::exception& e) {
    ex_error = e.what();
  }
  std::printf("      5-seed experiments finished in %.1f s\n", seconds_since(t0));
  auto from_experiments = [&](Outcome (*fn)(const Experiments&)) {
    return [&, fn] { return ex_error.empty() ? fn(ex) : Outcome{false, "experiments failed: " + ex_error}; };
  };
  line("relative-ordering", from_experiments(ordering));
  line("ablation-direction", from_experiments(ablation));
  line("cold-start-protocol", cold_start);
  line("timing-ordering", timing);
  line("determinism", determinism);
  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
