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

#include "coderec/service.h"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <charconv>

#include "coderec/error.h"
#include "coderec/metrics.h"
#include "json.hpp"

namespace coderec {
namespace {

using json = nlohmann::json;

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

}  // namespace

RecommendationService::RecommendationService(std::shared_ptr<const Dataset> dataset,
                                             std::shared_ptr<const TrainingData> data, EmbeddingSnapshot snapshot,
                                             std::string model_hash)
    : dataset_(std::move(dataset)), data_(std::move(data)), snapshot_(std::move(snapshot)),
      model_hash_(std::move(model_hash)) {
  if (snapshot_.users.rows() != data_->num_users || snapshot_.files.rows() != data_->num_files) {
    throw IntegrityError("embedding snapshot does not match the prepared dataset");
  }
}

std::vector<Recommendation> RecommendationService::recommend(const std::string& user, std::size_t k,
                                                             Protocol scope) const {
  if (k == 0) throw ArgumentError("k must be positive");
  const auto u = dataset_->find_user(user);
  if (!u) throw NotFoundError("unknown user '" + user + "'");
  const auto candidates = candidate_files(*data_, *u, scope);
  std::vector<float> scores(data_->num_files, 0.0f);
  for (auto f : candidates) scores[f] = snapshot_.score(*u, f);
  std::vector<Recommendation> out;
  for (auto f : top_k(scores, candidates, k)) {
    const auto& file = dataset_->files[f];
    out.push_back({file.id, dataset_->repos[file.repo].id, scores[f]});
  }
  return out;
}

std::string recommendations_json(const std::string& user, const std::vector<Recommendation>& items) {
  json arr = json::array();
  for (const auto& r : items) arr.push_back({{"file", r.file}, {"repo", r.repo}, {"score", r.score}});
  return json{{"user", user}, {"items", arr}}.dump();
}

struct RecommendationServer::Impl {
  httplib::Server server;
  std::shared_ptr<const RecommendationService> service;
  std::mutex mu;
  std::thread thread;

  std::shared_ptr<const RecommendationService> current() {
    std::lock_guard lock(mu);
    return service;
  }
};

RecommendationServer::RecommendationServer(std::shared_ptr<const RecommendationService> service)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  auto* impl = impl_.get();

  impl->server.Get("/healthz", [impl](const httplib::Request&, httplib::Response& res) {
    auto s = impl->current();
    res.set_content(json{{"status", "ok"}, {"model_hash", s->model_hash()}}.dump(), "application/json");
  });

  impl->server.Get("/recommend", [impl](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("user") || req.get_param_value("user").empty()) {
      return send_error(res, 400, "missing 'user'");
    }
    const auto user = req.get_param_value("user");
    std::size_t k = 10;
    if (req.has_param("k")) {
      const auto v = req.get_param_value("k");
      auto r = std::from_chars(v.data(), v.data() + v.size(), k);
      if (r.ec != std::errc() || r.ptr != v.data() + v.size() || k == 0) {
        return send_error(res, 400, "'k' must be a positive integer");
      }
    }
    Protocol scope = Protocol::kIntra;
    if (req.has_param("scope")) {
      const auto v = req.get_param_value("scope");
      if (v == "intra") scope = Protocol::kIntra;
      else if (v == "cross") scope = Protocol::kCross;
      else return send_error(res, 400, "'scope' must be intra or cross");
    }
    try {
      auto items = impl->current()->recommend(user, k, scope);
      res.set_content(recommendations_json(user, items), "application/json");
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.what());
    } catch (const ArgumentError& e) {
      send_error(res, 400, e.what());
    }
  });

  impl->server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send_error(res, 500, what);
  });
}

RecommendationServer::~RecommendationServer() { stop(); }

int RecommendationServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  spdlog::info("serving on {}:{}", host, bound);
  return bound;
}

void RecommendationServer::run(const std::string& host, int port) {
  spdlog::info("serving on {}:{}", host, port);
  if (!impl_->server.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
}

void RecommendationServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void RecommendationServer::swap(std::shared_ptr<const RecommendationService> next) {
  std::lock_guard lock(impl_->mu);
  impl_->service = std::move(next);
}

}  // namespace coderec
