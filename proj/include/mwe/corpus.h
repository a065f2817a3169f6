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

#ifndef MWE_CORPUS_H_
#define MWE_CORPUS_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mwe/random.h"

namespace mwe {

using TokenId = std::int32_t;

// Token kinds ordered by musical specificity. The enumerator order is the
// specificity order and is relied upon by comparisons.
enum class TokenKind : std::uint8_t {
  kGeneralWord = 0,
  kReviewWord = 1,
  kTag = 2,
  kArtistId = 3,
  kTrackId = 4,
};

inline constexpr int kNumTokenKinds = 5;

std::string_view TokenKindName(TokenKind kind);
// Accepts the names produced by TokenKindName ("general", "review", "tag",
// "artist", "track"). Throws InvalidArgument otherwise.
TokenKind ParseTokenKind(std::string_view name);

// Word kinds are subject to min_count and subsampling; the rest never are.
inline bool IsWordKind(TokenKind kind) {
  return kind == TokenKind::kGeneralWord || kind == TokenKind::kReviewWord;
}

// Small set of token kinds.
class KindSet {
 public:
  KindSet() = default;
  KindSet(std::initializer_list<TokenKind> kinds) {
    for (TokenKind k : kinds) insert(k);
  }
  static KindSet All() {
    return {TokenKind::kGeneralWord, TokenKind::kReviewWord, TokenKind::kTag,
            TokenKind::kArtistId, TokenKind::kTrackId};
  }

  void insert(TokenKind kind) { bits_ |= Bit(kind); }
  bool contains(TokenKind kind) const { return (bits_ & Bit(kind)) != 0; }
  bool empty() const { return bits_ == 0; }

 private:
  static std::uint8_t Bit(TokenKind kind) {
    return static_cast<std::uint8_t>(1u << static_cast<int>(kind));
  }
  std::uint8_t bits_ = 0;
};

enum class TagCategory : std::uint8_t { kContent, kContext };

std::string_view TagCategoryName(TagCategory category);
TagCategory ParseTagCategory(std::string_view name);

struct TagAnnotation {
  std::string name;
  TagCategory category = TagCategory::kContent;
};

// One track's bundle of review text, tags and IDs.
struct MusicDocument {
  std::string track_id;
  std::string artist_id;
  std::vector<TagAnnotation> tags;
  std::vector<std::vector<std::string>> review_sentences;

  // Throws InvalidArgument on empty IDs or malformed tag names.
  void Validate() const;
};

enum class ShuffleMode : std::uint8_t {
  kStatic,    // paragraphs shuffled once when the corpus is built
  kPerEpoch,  // paragraphs re-assembled with a fresh shuffle every epoch
};

std::string_view ShuffleModeName(ShuffleMode mode);
ShuffleMode ParseShuffleMode(std::string_view name);

struct CorpusConfig {
  int window_size = 15;
  // When false every position uses the full window instead of b ~ U[1, c].
  bool dynamic_window = true;
  int review_repeat = 4;
  std::int64_t min_count = 5;
  // 0 disables subsampling.
  double subsample_threshold = 1e-5;
  ShuffleMode shuffle_mode = ShuffleMode::kStatic;

  void Validate() const;
};

struct VocabEntry {
  std::string token;
  TokenKind kind = TokenKind::kGeneralWord;
  std::int64_t count = 0;
};

// Token <-> dense id map. Ids are assigned in insertion order.
class Vocabulary {
 public:
  Vocabulary() = default;

  // Adds a new token or accumulates `count` into an existing one. The stored
  // kind becomes the more specific of the two.
  TokenId Add(std::string_view token, TokenKind kind, std::int64_t count);

  std::optional<TokenId> Find(std::string_view token) const;
  // Throws InvalidArgument for unknown tokens.
  TokenId IdOf(std::string_view token) const;

  const std::string& token(TokenId id) const { return entries_.at(id).token; }
  TokenKind kind(TokenId id) const { return entries_.at(id).kind; }
  std::int64_t count(TokenId id) const { return entries_.at(id).count; }
  const VocabEntry& entry(TokenId id) const { return entries_.at(id); }
  const std::vector<VocabEntry>& entries() const { return entries_; }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // Sum of all counts.
  std::int64_t total_count() const { return total_count_; }

  // TSV with columns token, kind, count in id order.
  void SaveTsv(const std::filesystem::path& path) const;
  static Vocabulary LoadTsv(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b);

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, TokenId> index_;
  std::int64_t total_count_ = 0;
};

// Lowercases ASCII letters and splits on runs of whitespace.
std::vector<std::string> Tokenize(std::string_view text);

// Aggregates counts over both corpora. Word tokens below min_count are
// dropped; tags and IDs are always kept. Entries are ordered by descending
// count, ties lexicographically.
// Throws InvalidArgument when a track_id repeats.
Vocabulary BuildVocabulary(
    std::span<const std::vector<std::string>> general_docs,
    std::span<const MusicDocument> music_docs, const CorpusConfig& config);

// Assembles one track's training paragraph: every review sentence repeated
// review_repeat times with each copy word-shuffled, then tags and IDs, then a
// global shuffle of the whole paragraph.
std::vector<std::string> AssembleMusicParagraph(const MusicDocument& doc,
                                                const CorpusConfig& config,
                                                Rng& rng);

struct TrainingPair {
  TokenId center;
  TokenId context;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
  friend auto operator<=>(const TrainingPair&, const TrainingPair&) = default;
};

// Probability of keeping a token under frequency subsampling.
double KeepProbability(const Vocabulary& vocab, TokenId id,
                       double subsample_threshold);

// Subsamples word tokens, then emits (center, context) for every position and
// every offset within its (possibly dynamic) window. The visitor is called as
// visitor(center, context).
template <typename Visitor>
void GenerateTrainingPairs(std::span<const TokenId> ids,
                           const Vocabulary& vocab, const CorpusConfig& config,
                           Rng& rng, Visitor&& visitor) {
  std::vector<TokenId> kept;
  kept.reserve(ids.size());
  if (config.subsample_threshold > 0.0) {
    for (TokenId id : ids) {
      const double keep = KeepProbability(vocab, id, config.subsample_threshold);
      if (keep >= 1.0 || UniformUnit(rng) < keep) kept.push_back(id);
    }
  } else {
    kept.assign(ids.begin(), ids.end());
  }
  const auto n = static_cast<std::ptrdiff_t>(kept.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const std::ptrdiff_t b =
        config.dynamic_window ? 1 + UniformIndex<std::ptrdiff_t>(
                                        rng, config.window_size)
                              : config.window_size;
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, t - b);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, t + b);
    for (std::ptrdiff_t j = lo; j <= hi; ++j) {
      if (j != t) visitor(kept[t], kept[j]);
    }
  }
}

std::vector<TrainingPair> GenerateTrainingPairs(std::span<const TokenId> ids,
                                                const Vocabulary& vocab,
                                                const CorpusConfig& config,
                                                Rng& rng);

// Maps tokens to ids, dropping tokens absent from the vocabulary.
std::vector<TokenId> EncodeTokens(std::span<const std::string> tokens,
                                  const Vocabulary& vocab);

using PairVisitor = std::function<void(TokenId center, TokenId context)>;

// A re-playable, sharded source of training pairs. Each (epoch, shard) pass
// is a pure function of the seed, so the same pass can be replayed, e.g. to
// count pairs before training.
class PairStream {
 public:
  virtual ~PairStream() = default;
  virtual std::size_t num_shards() const = 0;
  virtual void VisitShard(int epoch, std::size_t shard,
                          const PairVisitor& visitor) const = 0;
};

// General sentences plus music documents, with paragraphs assembled per the
// shuffle mode. Sequences are visited in one fixed interleaved order drawn
// from the seed; the k-th sequence in that order belongs to shard
// k % num_shards. Holds a reference to `vocab`, which must outlive it.
class TrainingCorpus : public PairStream {
 public:
  TrainingCorpus(const Vocabulary& vocab, CorpusConfig config,
                 std::vector<std::vector<TokenId>> general_sentences,
                 std::vector<MusicDocument> music_docs, std::uint64_t seed,
                 std::size_t num_shards = 1);

  std::size_t num_shards() const override { return num_shards_; }
  void VisitShard(int epoch, std::size_t shard,
                  const PairVisitor& visitor) const override;

  // Paragraph of music document `index` as used in `epoch` (encoded).
  std::vector<TokenId> Paragraph(std::size_t index, int epoch) const;

  std::size_t num_general() const { return general_.size(); }
  std::size_t num_music() const { return music_.size(); }
  const std::vector<std::vector<TokenId>>& general_sentences() const {
    return general_;
  }
  const std::vector<MusicDocument>& music_documents() const { return music_; }
  const Vocabulary& vocabulary() const { return *vocab_; }
  const CorpusConfig& config() const { return config_; }

  // Replaces the static paragraphs, e.g. when loading them from disk.
  void SetStaticParagraphs(std::vector<std::vector<TokenId>> paragraphs);

 private:
  const Vocabulary* vocab_;
  CorpusConfig config_;
  std::vector<std::vector<TokenId>> general_;
  std::vector<MusicDocument> music_;
  std::vector<std::vector<TokenId>> static_paragraphs_;
  std::uint64_t seed_;
  std::size_t num_shards_;
};

// Corpus file formats.
//
// General corpus: UTF-8 text, one document per line.
std::vector<std::vector<std::string>> ReadGeneralCorpus(
    const std::filesystem::path& path);
// Music corpus: JSON Lines, one object per track with keys track_id,
// artist_id, tags [{name, category}], review_sentences [strings].
std::vector<MusicDocument> ReadMusicCorpus(const std::filesystem::path& path);
// Writes documents with review sentences joined by single spaces.
void WriteMusicCorpus(const std::filesystem::path& path,
                      std::span<const MusicDocument> docs);

}  // namespace mwe

#endif  // MWE_CORPUS_H_
