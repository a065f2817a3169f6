/*
 * Copyright 2026 The MWE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mwe/embedding.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace mwe {

WordEmbedding::WordEmbedding(Vocabulary vocabulary, std::size_t dim,
                             std::vector<float> vectors)
    : vocab_(std::move(vocabulary)), dim_(dim), vectors_(std::move(vectors)) {
  if (dim_ == 0) throw InvalidArgument("embedding dimension must be >= 1");
  if (vectors_.size() != vocab_.size() * dim_) {
    throw InvalidArgument("embedding has " + std::to_string(vectors_.size()) +
                          " values, expected " +
                          std::to_string(vocab_.size() * dim_));
  }
  for (float v : vectors_) {
    if (!std::isfinite(v)) throw InvalidArgument("non-finite embedding entry");
  }
}

WordEmbedding WordEmbedding::FromModel(Vocabulary vocabulary,
                                       const EmbeddingMatrix<float>& model) {
  if (model.rows != vocabulary.size()) {
    throw InvalidArgument("model rows do not match vocabulary size");
  }
  return WordEmbedding(std::move(vocabulary), model.dim, model.input);
}

std::uint64_t WordEmbedding::Checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(vectors_.data());
  for (std::size_t i = 0; i < vectors_.size() * sizeof(float); ++i) {
    h = (h ^ bytes[i]) * 0x100000001b3ULL;
  }
  return h;
}

QueryVector MakeQueryVector(std::span<const std::string> tokens,
                            const WordEmbedding& emb) {
  QueryVector q;
  q.vector.assign(emb.dim(), 0.0);
  std::size_t used = 0;
  for (const std::string& token : tokens) {
    const auto id = emb.vocabulary().Find(token);
    if (!id) {
      q.skipped.push_back(token);
      continue;
    }
    const auto v = emb.vector(*id);
    for (std::size_t i = 0; i < v.size(); ++i) q.vector[i] += v[i];
    ++used;
  }
  if (used == 0) {
    std::string list;
    for (const std::string& t : q.skipped) list += (list.empty() ? "" : ", ") + t;
    throw InvalidArgument("all query tokens are out of vocabulary: " + list);
  }
  for (double& x : q.vector) x /= static_cast<double>(used);
  return q;
}

std::vector<Neighbor> Nearest(std::span<const double> query, std::size_t k,
                              const std::optional<KindSet>& filter,
                              const WordEmbedding& emb) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (query.size() != emb.dim()) throw InvalidArgument("query dimension mismatch");
  double qq = 0.0;
  for (double x : query) qq += x * x;
  if (qq == 0.0) throw InvalidArgument("zero-norm vector");

  const Vocabulary& vocab = emb.vocabulary();
  std::vector<std::pair<double, TokenId>> scored;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    if (filter && !filter->contains(vocab.kind(id))) continue;
    const auto v = emb.vector(id);
    if (std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; })) {
      continue;
    }
    scored.emplace_back(CosineSimilarity(query, v), id);
  }
  if (scored.empty()) throw InvalidArgument("no candidate tokens for query");

  auto better = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + n, scored.end(), better);

  std::vector<Neighbor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TokenId id = scored[i].second;
    out.push_back({id, vocab.token(id), vocab.kind(id), scored[i].first});
  }
  return out;
}

std::filesystem::path VocabularySidecarPath(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".vocab.tsv");
}

void SaveEmbedding(const WordEmbedding& emb, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << emb.size() << ' ' << emb.dim() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < emb.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    out << emb.vocabulary().token(id);
    for (float v : emb.vector(id)) {
      std::snprintf(buf, sizeof(buf), " %.8g", static_cast<double>(v));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
  emb.vocabulary().SaveTsv(VocabularySidecarPath(path));
}

WordEmbedding LoadEmbedding(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read embedding " + path.string());
  const std::string source = path.string();

  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  std::size_t rows = 0, dim = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> rows >> dim) || (header >> extra) || dim == 0) {
      throw ParseError(source, 1, "header must be '<vocab_size> <dim>'");
    }
  }

  std::vector<std::string> tokens;
  tokens.reserve(rows);
  std::unordered_set<std::string> seen;
  std::vector<float> vectors;
  vectors.reserve(rows * dim);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (tokens.size() == rows) {
      throw ParseError(source, line_no, "more rows than the header declares");
    }
    const auto space = line.find(' ');
    const std::string token = line.substr(0, space);
    if (!seen.insert(token).second) {
      throw ParseError(source, line_no, "duplicate token '" + token + "'");
    }
    std::size_t fields = 0;
    const char* p = space == std::string::npos ? line.data() + line.size()
                                               : line.data() + space;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || (next != end && *next != ' ')) {
        throw ParseError(source, line_no, "malformed number");
      }
      if (++fields > dim) break;
      vectors.push_back(static_cast<float>(v));
      p = next;
    }
    if (fields != dim) {
      throw ParseError(source, line_no,
                       "dimension mismatch: header declares " +
                           std::to_string(dim) + " values per row");
    }
    tokens.push_back(token);
  }
  if (tokens.size() != rows) {
    throw ParseError(source, line_no,
                     "expected " + std::to_string(rows) + " rows, found " +
                         std::to_string(tokens.size()));
  }

  Vocabulary vocab = Vocabulary::LoadTsv(VocabularySidecarPath(path));
  if (vocab.size() != rows) {
    throw ParseError(VocabularySidecarPath(path).string(), 0,
                     "sidecar has " + std::to_string(vocab.size()) +
                         " entries, embedding has " + std::to_string(rows));
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (vocab.token(static_cast<TokenId>(i)) != tokens[i]) {
      throw ParseError(VocabularySidecarPath(path).string(),
                       static_cast<int>(i) + 1,
                       "token order differs from the embedding file");
    }
  }
  return WordEmbedding(std::move(vocab), dim, std::move(vectors));
}

}  // namespace mwe
