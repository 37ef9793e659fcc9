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

#include "coderec/config.h"

#include <charconv>
#include <sstream>

#include "coderec/error.h"

namespace coderec {
namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError("bad value for " + key + ": '" + v + "'");
  return out;
}

std::string join_behaviors(const std::vector<Behavior>& bs) {
  std::string out;
  for (auto b : bs) {
    if (!out.empty()) out += ',';
    out += to_string(b);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kCoder: return "coder";
    case ModelKind::kMF: return "mf";
    case ModelKind::kLightGCN: return "lightgcn";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "coder") return ModelKind::kCoder;
  if (s == "mf" || s == "MF") return ModelKind::kMF;
  if (s == "lightgcn" || s == "LightGCN") return ModelKind::kLightGCN;
  throw ArgumentError("unknown model '" + std::string(s) + "'");
}

void Hyperparams::validate(bool project_level) const {
  if (dim == 0 || attention_size == 0 || n_segments == 0 || n_history == 0) {
    throw ConfigError("dimensions must be positive");
  }
  if (layers < 0 || gat_layers < 0) throw ConfigError("layer counts must be non-negative");
  if (eta < 0 || eta % 2 != 0) throw ConfigError("eta must be a non-negative even number");
  if (eta > layers) throw ConfigError("eta exceeds the number of propagation layers");
  if (tau <= 0.0) throw ConfigError("tau must be positive");
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (project_level && behaviors.empty()) throw ConfigError("project level enabled with an empty behavior set");
  for (auto b : behaviors) {
    if (b == Behavior::kCommit) throw ConfigError("commit is not a project-level behavior");
  }
}

std::map<std::string, std::string> Hyperparams::to_map() const {
  return {
      {"dim", std::to_string(dim)},
      {"layers", std::to_string(layers)},
      {"n_segments", std::to_string(n_segments)},
      {"n_history", std::to_string(n_history)},
      {"attention_size", std::to_string(attention_size)},
      {"gat_layers", std::to_string(gat_layers)},
      {"lambda1", format_double(lambda1)},
      {"lambda2", format_double(lambda2)},
      {"lambda3", format_double(lambda3)},
      {"tau", format_double(tau)},
      {"eta", std::to_string(eta)},
      {"lr", format_double(lr)},
      {"batch_size", std::to_string(batch_size)},
      {"max_epochs", std::to_string(max_epochs)},
      {"patience", std::to_string(patience)},
      {"behaviors", join_behaviors(behaviors)},
      {"aggregation", aggregation == Aggregation::kMean ? "mean" : "sum"},
      {"mlp_slope", format_double(mlp_slope)},
      {"same_repo_negatives", same_repo_negatives ? "true" : "false"},
      {"tfidf_terms", std::to_string(tfidf_terms)},
  };
}

Hyperparams Hyperparams::from_map(const std::map<std::string, std::string>& kv) {
  Hyperparams h;
  for (const auto& [k, v] : kv) {
    if (k == "dim") h.dim = parse_number<std::size_t>(k, v);
    else if (k == "layers") h.layers = parse_number<int>(k, v);
    else if (k == "n_segments") h.n_segments = parse_number<std::size_t>(k, v);
    else if (k == "n_history") h.n_history = parse_number<std::size_t>(k, v);
    else if (k == "attention_size") h.attention_size = parse_number<std::size_t>(k, v);
    else if (k == "gat_layers") h.gat_layers = parse_number<int>(k, v);
    else if (k == "lambda1") h.lambda1 = parse_number<double>(k, v);
    else if (k == "lambda2") h.lambda2 = parse_number<double>(k, v);
    else if (k == "lambda3") h.lambda3 = parse_number<double>(k, v);
    else if (k == "tau") h.tau = parse_number<double>(k, v);
    else if (k == "eta") h.eta = parse_number<int>(k, v);
    else if (k == "lr") h.lr = parse_number<double>(k, v);
    else if (k == "batch_size") h.batch_size = parse_number<std::size_t>(k, v);
    else if (k == "max_epochs") h.max_epochs = parse_number<int>(k, v);
    else if (k == "patience") h.patience = parse_number<int>(k, v);
    else if (k == "mlp_slope") h.mlp_slope = parse_number<double>(k, v);
    else if (k == "tfidf_terms") h.tfidf_terms = parse_number<std::size_t>(k, v);
    else if (k == "same_repo_negatives") {
      if (v != "true" && v != "false") throw ConfigError("same_repo_negatives must be true or false");
      h.same_repo_negatives = v == "true";
    } else if (k == "aggregation") {
      if (v != "mean" && v != "sum") throw ConfigError("aggregation must be mean or sum");
      h.aggregation = v == "mean" ? Aggregation::kMean : Aggregation::kSum;
    } else if (k == "behaviors") {
      h.behaviors.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
          h.behaviors.push_back(parse_behavior(item));
        } catch (const Error&) {
          throw ConfigError("unknown behavior '" + item + "'");
        }
      }
    } else {
      throw ConfigError("unknown hyperparameter '" + k + "'");
    }
  }
  return h;
}

std::string AblationFlags::tag() const {
  std::string letters;
  if (disable_fusion) letters += 'F';
  if (disable_contrastive) letters += 'C';
  if (tfidf_features) letters += 'E';
  if (disable_project_level) letters += 'P';
  if (disable_structural) letters += 'S';
  return letters.empty() ? "CD" : "CD-" + letters;
}

void AblationFlags::set(std::string_view name) {
  if (name == "disable_fusion" || name == "F") disable_fusion = true;
  else if (name == "disable_contrastive" || name == "C") disable_contrastive = true;
  else if (name == "tfidf_features" || name == "E") tfidf_features = true;
  else if (name == "disable_project_level" || name == "P") disable_project_level = true;
  else if (name == "disable_structural" || name == "S") disable_structural = true;
  else throw ConfigError("unknown ablation flag '" + std::string(name) + "'");
}

std::vector<std::string> AblationFlags::names() const {
  std::vector<std::string> out;
  if (disable_fusion) out.emplace_back("disable_fusion");
  if (disable_contrastive) out.emplace_back("disable_contrastive");
  if (tfidf_features) out.emplace_back("tfidf_features");
  if (disable_project_level) out.emplace_back("disable_project_level");
  if (disable_structural) out.emplace_back("disable_structural");
  return out;
}

}  // namespace coderec
