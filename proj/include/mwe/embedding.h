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

#ifndef MWE_EMBEDDING_H_
#define MWE_EMBEDDING_H_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwe/corpus.h"
#include "mwe/errors.h"
#include "mwe/sgns.h"

namespace mwe {

// (u . v) / (|u| |v|), clamped to [-1, 1]. Throws InvalidArgument on a
// zero-norm input or a length mismatch.
template <typename A, typename B>
double CosineSimilarity(std::span<const A> u, std::span<const B> v) {
  if (u.size() != v.size()) throw InvalidArgument("vector length mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i], b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) throw InvalidArgument("zero-norm vector");
  const double c = dot / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(c, -1.0, 1.0);
}

inline double CosineSimilarity(const std::vector<double>& u,
                               const std::vector<double>& v) {
  return CosineSimilarity(std::span<const double>(u), std::span<const double>(v));
}

// Published word embedding: a vocabulary and one vector per token.
// Immutable once constructed.
class WordEmbedding {
 public:
  // `vectors` is row-major |V| x dim. Throws InvalidArgument on a shape
  // mismatch or non-finite entries.
  WordEmbedding(Vocabulary vocabulary, std::size_t dim,
                std::vector<float> vectors);

  static WordEmbedding FromModel(Vocabulary vocabulary,
                                 const EmbeddingMatrix<float>& model);

  const Vocabulary& vocabulary() const { return vocab_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vocab_.size(); }
  std::span<const float> vector(TokenId id) const {
    return {vectors_.data() + static_cast<std::size_t>(id) * dim_, dim_};
  }
  // Throws InvalidArgument for OOV tokens.
  std::span<const float> vector(std::string_view token) const {
    return vector(vocab_.IdOf(token));
  }
  const std::vector<float>& data() const { return vectors_; }

  // FNV-1a over the raw vector bytes.
  std::uint64_t Checksum() const;

 private:
  Vocabulary vocab_;
  std::size_t dim_;
  std::vector<float> vectors_;
};

struct QueryVector {
  std::vector<double> vector;
  std::vector<std::string> skipped;  // out-of-vocabulary tokens
};

// Mean of the vectors of the in-vocabulary tokens. Throws InvalidArgument
// listing the tokens when none is in the vocabulary.
QueryVector MakeQueryVector(std::span<const std::string> tokens,
                            const WordEmbedding& emb);

struct Neighbor {
  TokenId id;
  std::string token;
  TokenKind kind;
  double score;
};

// The k highest-cosine tokens whose kind passes `filter`, by descending
// score, ties by ascending id. Zero-norm rows are never candidates. Throws
// InvalidArgument when k < 1 or no candidate exists.
std::vector<Neighbor> Nearest(std::span<const double> query, std::size_t k,
                              const std::optional<KindSet>& filter,
                              const WordEmbedding& emb);

// Sidecar vocabulary path for an embedding file: "<path>.vocab.tsv".
std::filesystem::path VocabularySidecarPath(const std::filesystem::path& path);

// word2vec text format ("<rows> <dim>" header, then a token and dim floats
// per line, 8 significant digits) plus the vocabulary sidecar.
void SaveEmbedding(const WordEmbedding& emb, const std::filesystem::path& path);
// Throws ParseError with the offending line for shape errors and duplicate
// tokens, and when the sidecar disagrees with the embedding file.
WordEmbedding LoadEmbedding(const std::filesystem::path& path);

}  // namespace mwe

#endif  // MWE_EMBEDDING_H_
