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

#include "coderec/dataset.h"
#include "coderec/tensor.h"

namespace coderec {

using Segment = std::vector<std::string>;

// Identifiers and numbers ([A-Za-z0-9_]+) are single tokens; every other
// non-space character is its own token. A token is never split.
std::vector<std::string> tokenize_code(std::string_view text);

// n_segments contiguous runs of ceil(|tokens| / n_segments) tokens; trailing
// segments are shorter or empty. Concatenation gives back the input.
std::vector<Segment> segment_code(const std::vector<std::string>& tokens, std::size_t n_segments);

// Splits an identifier on '_', '-', '.', digits-to-letters and camel-case
// boundaries, lower-cased: "DataLoaders" -> {"data", "loaders"}.
std::vector<std::string> split_name_words(std::string_view name);

struct TfidfVocabulary {
  std::vector<std::string> terms;
  std::map<std::string, std::uint32_t> index;
  std::vector<double> idf;  // log(N / df)
  std::size_t documents = 0;

  std::size_t size() const { return terms.size(); }
};

// Terms are ranked by document frequency (ties lexicographic) and the top
// max_terms kept; max_terms == 0 keeps all.
TfidfVocabulary build_tfidf_vocabulary(const std::vector<Segment>& documents, std::size_t max_terms = 0);

// tf(t) * idf(t) with tf = count(t) / |doc|; out-of-vocabulary tokens ignored.
std::vector<double> tfidf_row(const Segment& doc, const TfidfVocabulary& vocab);

// Raw (pre-projection) segment features of one file: N_C x d_in.
struct CodeSegmentMatrix {
  std::uint32_t file = 0;
  TensorF c;
};

CodeSegmentMatrix encode_segments_tfidf(std::uint32_t file, const std::vector<Segment>& segments,
                                        const TfidfVocabulary& vocab);

// In-memory form of the "CFEA" binary feature file.
struct SegmentFeatures {
  std::uint32_t n_segments = 0;
  std::uint32_t d_in = 0;
  std::vector<std::string> file_ids;  // row-block order
  std::vector<float> values;          // file_ids.size() * n_segments * d_in

  CodeSegmentMatrix matrix(std::size_t block) const;
};

inline constexpr std::uint32_t kFeatureFormatVersion = 1;

// Layout (little-endian): "CFEA", u32 version, u32 N_files, u32 N_C, u32 d_in,
// f32 payload[N_files * N_C * d_in], then the footer: per file, u32 byte length
// followed by the id bytes.
void write_segment_features(const std::filesystem::path& path, const SegmentFeatures& f);
SegmentFeatures read_segment_features(const std::filesystem::path& path);

// Features re-keyed by dataset file index. Files absent from the feature file
// get zero rows; ids unknown to the dataset are an IntegrityError.
std::map<std::uint32_t, CodeSegmentMatrix> import_segment_features(const std::filesystem::path& path,
                                                                    const Dataset& ds);

// All files stacked in dataset order: (num_files * N_C) x d_in.
TensorF stack_segment_features(const std::map<std::uint32_t, CodeSegmentMatrix>& features, std::size_t num_files,
                               std::size_t n_segments, std::size_t d_in);

// TF-IDF features for every file with source text; the vocabulary is built
// from segments of files that appear in `train_files` only.
SegmentFeatures tfidf_segment_features(const Dataset& ds, const std::vector<std::uint32_t>& train_files,
                                       std::size_t n_segments, std::size_t max_terms);

}  // namespace coderec
