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

#include "coderec/dataset.h"

namespace coderec {

// Planted user-repository blocks. Users fall into groups; each group has
// `home_repos` consecutive home repositories (windows overlap across groups)
// and a few "hot" directories in each.
// A train commit lands in the user's favourite home repository with
// probability favorite_share and in another home repository otherwise;
// validation and test commits always go to the favourite. With
// project_signal, the favourite is the repository the user stars and (mostly)
// watches; otherwise stars and watches are uninformative.
struct SyntheticConfig {
  std::size_t users = 50;
  std::size_t repos = 10;
  std::size_t groups = 5;
  std::size_t home_repos = 4;
  double favorite_share = 0.5;  // of train commits landing in the favourite repository
  std::size_t dirs_per_repo = 4;
  std::size_t files_per_dir = 5;
  std::size_t hot_dirs = 2;
  double popularity_skew = 0.7;  // Zipf exponent over hot files
  double fresh_fraction = 0.0;   // files never committed in train, still eligible for val and test
  std::size_t min_train = 4;
  std::size_t max_train = 8;
  double cold_fraction = 0.2;  // users with one or two train commits
  std::size_t val_per_user = 1;
  std::size_t test_per_user = 2;
  bool project_signal = true;
  std::uint64_t seed = 0;
};

Dataset make_synthetic_dataset(const SyntheticConfig& cfg);

}  // namespace coderec
