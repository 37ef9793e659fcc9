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

#include "coderec/code_features.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <unordered_map>

#include "coderec/error.h"

namespace coderec {
namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
      static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  return true;
}

}  // namespace

std::vector<std::string> tokenize_code(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (is_word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
      out.emplace_back(text.substr(i, j - i));
      i = j;
    } else {
      out.emplace_back(1, text[i]);
      ++i;
    }
  }
  return out;
}

std::vector<Segment> segment_code(const std::vector<std::string>& tokens, std::size_t n_segments) {
  if (n_segments == 0) throw ArgumentError("segment count must be positive");
  std::vector<Segment> out(n_segments);
  const std::size_t per = (tokens.size() + n_segments - 1) / n_segments;
  for (std::size_t i = 0; i < tokens.size(); ++i) out[i / per].push_back(tokens[i]);
  return out;
}

std::vector<std::string> split_name_words(std::string_view name) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) words.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < name.size(); ++i) {
    const auto c = static_cast<unsigned char>(name[i]);
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      const auto prev = static_cast<unsigned char>(name[i - 1]);
      const bool next_lower = i + 1 < name.size() && std::islower(static_cast<unsigned char>(name[i + 1]));
      const bool lower_to_upper = std::islower(prev) && std::isupper(c);
      // "HTTPServer": break before the 'S' that starts a capitalised word.
      const bool acronym_end = std::isupper(prev) && std::isupper(c) && next_lower;
      const bool digit_edge = static_cast<bool>(std::isdigit(prev)) != static_cast<bool>(std::isdigit(c));
      if (lower_to_upper || acronym_end || digit_edge) flush();
    }
    cur.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  return words;
}

TfidfVocabulary build_tfidf_vocabulary(const std::vector<Segment>& documents, std::size_t max_terms) {
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    std::set<std::string_view> seen(doc.begin(), doc.end());
    for (auto t : seen) ++df[std::string(t)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (max_terms > 0 && ranked.size() > max_terms) ranked.resize(max_terms);
  // Column order is lexicographic so the vocabulary is independent of ties.
  std::sort(ranked.begin(), ranked.end());
  TfidfVocabulary v;
  v.documents = documents.size();
  for (const auto& [term, count] : ranked) {
    v.index[term] = static_cast<std::uint32_t>(v.terms.size());
    v.terms.push_back(term);
    v.idf.push_back(std::log(static_cast<double>(documents.size()) / static_cast<double>(count)));
  }
  return v;
}

std::vector<double> tfidf_row(const Segment& doc, const TfidfVocabulary& vocab) {
  std::vector<double> row(vocab.size(), 0.0);
  if (doc.empty()) return row;
  for (const auto& t : doc) {
    auto it = vocab.index.find(t);
    if (it != vocab.index.end()) row[it->second] += 1.0;
  }
  const double len = static_cast<double>(doc.size());
  for (std::size_t i = 0; i < row.size(); ++i) row[i] = row[i] / len * vocab.idf[i];
  return row;
}

CodeSegmentMatrix encode_segments_tfidf(std::uint32_t file, const std::vector<Segment>& segments,
                                        const TfidfVocabulary& vocab) {
  CodeSegmentMatrix m{file, TensorF(segments.size(), vocab.size())};
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto row = tfidf_row(segments[s], vocab);
    for (std::size_t k = 0; k < row.size(); ++k) m.c(s, k) = static_cast<float>(row[k]);
  }
  return m;
}

CodeSegmentMatrix SegmentFeatures::matrix(std::size_t block) const {
  const std::size_t stride = static_cast<std::size_t>(n_segments) * d_in;
  std::vector<float> v(values.begin() + static_cast<std::ptrdiff_t>(block * stride),
                       values.begin() + static_cast<std::ptrdiff_t>((block + 1) * stride));
  return {static_cast<std::uint32_t>(block), TensorF(n_segments, d_in, std::move(v))};
}

void write_segment_features(const std::filesystem::path& path, const SegmentFeatures& f) {
  const std::size_t expect = f.file_ids.size() * f.n_segments * f.d_in;
  if (f.values.size() != expect) {
    throw ArgumentError("feature payload has " + std::to_string(f.values.size()) + " values, expected " +
                        std::to_string(expect));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write("CFEA", 4);
  put_u32(out, kFeatureFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(f.file_ids.size()));
  put_u32(out, f.n_segments);
  put_u32(out, f.d_in);
  static_assert(std::endian::native == std::endian::little, "payload is written as native little-endian f32");
  out.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(float)));
  for (const auto& id : f.file_ids) {
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  if (!out) throw FormatError("write failed: " + path.string());
}

SegmentFeatures read_segment_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("missing feature file: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "CFEA", 4) != 0) {
    throw FormatError(path.string() + ": bad magic, expected CFEA");
  }
  std::uint32_t version = 0, n_files = 0;
  SegmentFeatures f;
  if (!get_u32(in, version) || !get_u32(in, n_files) || !get_u32(in, f.n_segments) || !get_u32(in, f.d_in)) {
    throw FormatError(path.string() + ": truncated header");
  }
  if (version != kFeatureFormatVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
  }
  const std::uint64_t count = static_cast<std::uint64_t>(n_files) * f.n_segments * f.d_in;
  const auto size = std::filesystem::file_size(path);
  if (20 + count * sizeof(float) > size) {
    throw FormatError(path.string() + ": payload truncated (header declares " + std::to_string(n_files) + "x" +
                      std::to_string(f.n_segments) + "x" + std::to_string(f.d_in) + ")");
  }
  f.values.resize(count);
  if (!in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(count * sizeof(float)))) {
    throw FormatError(path.string() + ": payload truncated");
  }
  f.file_ids.reserve(n_files);
  for (std::uint32_t i = 0; i < n_files; ++i) {
    std::uint32_t len = 0;
    if (!get_u32(in, len) || len > size) throw FormatError(path.string() + ": footer truncated");
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw FormatError(path.string() + ": footer truncated");
    f.file_ids.push_back(std::move(id));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes after footer");
  return f;
}

std::map<std::uint32_t, CodeSegmentMatrix> import_segment_features(const std::filesystem::path& path,
                                                                    const Dataset& ds) {
  const SegmentFeatures f = read_segment_features(path);
  std::unordered_map<std::string, std::uint32_t> by_id;
  for (std::uint32_t i = 0; i < ds.files.size(); ++i) by_id[ds.files[i].id] = i;
  std::map<std::uint32_t, CodeSegmentMatrix> out;
  for (std::size_t b = 0; b < f.file_ids.size(); ++b) {
    auto it = by_id.find(f.file_ids[b]);
    if (it == by_id.end()) throw IntegrityError(path.string() + ": unknown file id '" + f.file_ids[b] + "'");
    auto m = f.matrix(b);
    m.file = it->second;
    out[it->second] = std::move(m);
  }
  return out;
}

TensorF stack_segment_features(const std::map<std::uint32_t, CodeSegmentMatrix>& features, std::size_t num_files,
                               std::size_t n_segments, std::size_t d_in) {
  TensorF out(num_files * n_segments, d_in);
  for (const auto& [file, m] : features) {
    if (file >= num_files) throw ArgumentError("feature file index out of range");
    if (m.c.rows() != n_segments || m.c.cols() != d_in) {
      throw FormatError("segment matrix " + m.c.shape_str() + " does not match " +
                        Tensor<float>::shape_string(n_segments, d_in));
    }
    std::copy(m.c.values().begin(), m.c.values().end(), out.data() + file * n_segments * d_in);
  }
  return out;
}

SegmentFeatures tfidf_segment_features(const Dataset& ds, const std::vector<std::uint32_t>& train_files,
                                       std::size_t n_segments, std::size_t max_terms) {
  std::map<std::uint32_t, std::vector<Segment>> segmented;
  for (const auto& [file, text] : ds.code) segmented[file] = segment_code(tokenize_code(text), n_segments);
  std::vector<Segment> docs;
  for (auto f : std::set<std::uint32_t>(train_files.begin(), train_files.end())) {
    auto it = segmented.find(f);
    if (it == segmented.end()) continue;
    for (const auto& s : it->second) {
      if (!s.empty()) docs.push_back(s);
    }
  }
  const TfidfVocabulary vocab = build_tfidf_vocabulary(docs, max_terms);
  SegmentFeatures out;
  out.n_segments = static_cast<std::uint32_t>(n_segments);
  out.d_in = static_cast<std::uint32_t>(std::max<std::size_t>(vocab.size(), 1));
  for (const auto& [file, segs] : segmented) {
    out.file_ids.push_back(ds.files[file].id);
    const auto m = encode_segments_tfidf(file, segs, vocab);
    for (std::size_t s = 0; s < n_segments; ++s) {
      for (std::size_t k = 0; k < out.d_in; ++k) out.values.push_back(k < vocab.size() ? m.c(s, k) : 0.0f);
    }
  }
  return out;
}

}  // namespace coderec
