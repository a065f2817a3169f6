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

#include "mwe/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "json.hpp"
#include "mwe/errors.h"

namespace mwe {
namespace {

constexpr std::string_view kKindNames[kNumTokenKinds] = {
    "general", "review", "tag", "artist", "track"};

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::string_view TokenKindName(TokenKind kind) {
  return kKindNames[static_cast<int>(kind)];
}

TokenKind ParseTokenKind(std::string_view name) {
  for (int i = 0; i < kNumTokenKinds; ++i) {
    if (kKindNames[i] == name) return static_cast<TokenKind>(i);
  }
  throw InvalidArgument("unknown token kind '" + std::string(name) + "'");
}

std::string_view TagCategoryName(TagCategory category) {
  return category == TagCategory::kContent ? "content" : "context";
}

TagCategory ParseTagCategory(std::string_view name) {
  if (name == "content") return TagCategory::kContent;
  if (name == "context") return TagCategory::kContext;
  throw InvalidArgument("unknown tag category '" + std::string(name) +
                        "' (expected content or context)");
}

std::string_view ShuffleModeName(ShuffleMode mode) {
  return mode == ShuffleMode::kStatic ? "static" : "per_epoch";
}

ShuffleMode ParseShuffleMode(std::string_view name) {
  if (name == "static") return ShuffleMode::kStatic;
  if (name == "per_epoch") return ShuffleMode::kPerEpoch;
  throw InvalidArgument("unknown shuffle mode '" + std::string(name) +
                        "' (expected static or per_epoch)");
}

void MusicDocument::Validate() const {
  if (track_id.empty()) throw InvalidArgument("music document without track_id");
  if (artist_id.empty()) {
    throw InvalidArgument("track " + track_id + " has no artist_id");
  }
  for (const TagAnnotation& tag : tags) {
    const bool bad =
        tag.name.empty() ||
        std::any_of(tag.name.begin(), tag.name.end(), [](char c) {
          return IsSpace(c) || std::isupper(static_cast<unsigned char>(c));
        });
    if (bad) {
      throw InvalidArgument("track " + track_id + ": tag '" + tag.name +
                            "' must be lowercase without whitespace");
    }
  }
}

void CorpusConfig::Validate() const {
  if (window_size < 1) throw InvalidArgument("window_size must be >= 1");
  if (review_repeat < 1) throw InvalidArgument("review_repeat must be >= 1");
  if (min_count < 0) throw InvalidArgument("min_count must be >= 0");
  if (!(subsample_threshold >= 0.0)) {
    throw InvalidArgument("subsample_threshold must be >= 0");
  }
}

TokenId Vocabulary::Add(std::string_view token, TokenKind kind,
                        std::int64_t count) {
  auto [it, inserted] = index_.try_emplace(
      std::string(token), static_cast<TokenId>(entries_.size()));
  if (inserted) {
    entries_.push_back({std::string(token), kind, count});
  } else {
    VocabEntry& entry = entries_[it->second];
    entry.count += count;
    entry.kind = std::max(entry.kind, kind);
  }
  total_count_ += count;
  return it->second;
}

std::optional<TokenId> Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::IdOf(std::string_view token) const {
  if (auto id = Find(token)) return *id;
  throw InvalidArgument("token '" + std::string(token) +
                        "' is not in the vocabulary");
}

void Vocabulary::SaveTsv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const VocabEntry& e : entries_) {
    out << e.token << '\t' << TokenKindName(e.kind) << '\t' << e.count << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Vocabulary Vocabulary::LoadTsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  Vocabulary vocab;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
      throw ParseError(path.string(), line_no, "expected 3 tab-separated columns");
    }
    const std::string token = line.substr(0, t1);
    if (token.empty()) throw ParseError(path.string(), line_no, "empty token");
    if (vocab.Find(token)) {
      throw ParseError(path.string(), line_no, "duplicate token '" + token + "'");
    }
    TokenKind kind;
    std::int64_t count;
    try {
      kind = ParseTokenKind(line.substr(t1 + 1, t2 - t1 - 1));
      std::size_t used = 0;
      const std::string count_str = line.substr(t2 + 1);
      count = std::stoll(count_str, &used);
      if (used != count_str.size() || count < 0) throw InvalidArgument("count");
    } catch (const std::exception&) {
      throw ParseError(path.string(), line_no, "bad kind or count");
    }
    vocab.Add(token, kind, count);
  }
  return vocab;
}

bool operator==(const Vocabulary& a, const Vocabulary& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const VocabEntry& x = a.entries_[i];
    const VocabEntry& y = b.entries_[i];
    if (x.token != y.token || x.kind != y.kind || x.count != y.count) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (IsSpace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary BuildVocabulary(
    std::span<const std::vector<std::string>> general_docs,
    std::span<const MusicDocument> music_docs, const CorpusConfig& config) {
  config.Validate();
  struct Tally {
    TokenKind kind;
    std::int64_t count = 0;
  };
  std::unordered_map<std::string, Tally> tally;
  auto bump = [&tally](const std::string& token, TokenKind kind) {
    auto [it, inserted] = tally.try_emplace(token, Tally{kind, 0});
    it->second.kind = std::max(it->second.kind, kind);
    ++it->second.count;
  };

  for (const auto& doc : general_docs) {
    for (const std::string& token : doc) bump(token, TokenKind::kGeneralWord);
  }
  std::unordered_set<std::string> seen_tracks;
  for (const MusicDocument& doc : music_docs) {
    doc.Validate();
    if (!seen_tracks.insert(doc.track_id).second) {
      throw InvalidArgument("duplicate track_id '" + doc.track_id +
                            "' in music corpus");
    }
    for (const auto& sentence : doc.review_sentences) {
      for (const std::string& token : sentence) {
        bump(token, TokenKind::kReviewWord);
      }
    }
    for (const TagAnnotation& tag : doc.tags) bump(tag.name, TokenKind::kTag);
    bump(doc.artist_id, TokenKind::kArtistId);
    bump(doc.track_id, TokenKind::kTrackId);
  }

  std::vector<std::pair<std::string, Tally>> kept;
  kept.reserve(tally.size());
  for (auto& [token, t] : tally) {
    if (!IsWordKind(t.kind) || t.count >= config.min_count) {
      kept.emplace_back(token, t);
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.first < b.first;
  });
  Vocabulary vocab;
  for (const auto& [token, t] : kept) vocab.Add(token, t.kind, t.count);
  return vocab;
}

std::vector<std::string> AssembleMusicParagraph(const MusicDocument& doc,
                                                const CorpusConfig& config,
                                                Rng& rng) {
  std::vector<std::string> paragraph;
  std::vector<std::string> copy;
  for (const auto& sentence : doc.review_sentences) {
    for (int r = 0; r < config.review_repeat; ++r) {
      copy.assign(sentence.begin(), sentence.end());
      std::shuffle(copy.begin(), copy.end(), rng);
      paragraph.insert(paragraph.end(), copy.begin(), copy.end());
    }
  }
  for (const TagAnnotation& tag : doc.tags) paragraph.push_back(tag.name);
  paragraph.push_back(doc.artist_id);
  paragraph.push_back(doc.track_id);
  std::shuffle(paragraph.begin(), paragraph.end(), rng);
  return paragraph;
}

double KeepProbability(const Vocabulary& vocab, TokenId id,
                       double subsample_threshold) {
  if (subsample_threshold <= 0.0 || !IsWordKind(vocab.kind(id))) return 1.0;
  const double total = static_cast<double>(vocab.total_count());
  if (total <= 0.0) return 1.0;
  const double freq = static_cast<double>(vocab.count(id)) / total;
  if (freq <= subsample_threshold) return 1.0;
  return std::sqrt(subsample_threshold / freq);
}

std::vector<TrainingPair> GenerateTrainingPairs(std::span<const TokenId> ids,
                                                const Vocabulary& vocab,
                                                const CorpusConfig& config,
                                                Rng& rng) {
  std::vector<TrainingPair> pairs;
  GenerateTrainingPairs(ids, vocab, config, rng,
                        [&pairs](TokenId center, TokenId context) {
                          pairs.push_back({center, context});
                        });
  return pairs;
}

std::vector<TokenId> EncodeTokens(std::span<const std::string> tokens,
                                  const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const std::string& token : tokens) {
    if (auto id = vocab.Find(token)) ids.push_back(*id);
  }
  return ids;
}

TrainingCorpus::TrainingCorpus(
    const Vocabulary& vocab, CorpusConfig config,
    std::vector<std::vector<TokenId>> general_sentences,
    std::vector<MusicDocument> music_docs, std::uint64_t seed,
    std::size_t num_shards)
    : vocab_(&vocab),
      config_(config),
      general_(std::move(general_sentences)),
      music_(std::move(music_docs)),
      seed_(seed),
      num_shards_(std::max<std::size_t>(1, num_shards)) {
  config_.Validate();
  if (config_.shuffle_mode == ShuffleMode::kStatic) {
    static_paragraphs_.reserve(music_.size());
    for (std::size_t i = 0; i < music_.size(); ++i) {
      static_paragraphs_.push_back(Paragraph(i, 0));
    }
  }
}

void TrainingCorpus::SetStaticParagraphs(
    std::vector<std::vector<TokenId>> paragraphs) {
  if (paragraphs.size() != music_.size()) {
    throw InvalidArgument("static paragraph count does not match documents");
  }
  static_paragraphs_ = std::move(paragraphs);
}

std::vector<TokenId> TrainingCorpus::Paragraph(std::size_t index,
                                               int epoch) const {
  if (config_.shuffle_mode == ShuffleMode::kStatic &&
      static_paragraphs_.size() == music_.size()) {
    return static_paragraphs_[index];
  }
  const int effective_epoch =
      config_.shuffle_mode == ShuffleMode::kStatic ? 0 : epoch;
  Rng rng(DeriveSeed(seed_, "paragraph",
                     static_cast<std::uint64_t>(effective_epoch) *
                             music_.size() + index));
  const auto tokens = AssembleMusicParagraph(music_[index], config_, rng);
  return EncodeTokens(tokens, *vocab_);
}

void TrainingCorpus::VisitShard(int epoch, std::size_t shard,
                                const PairVisitor& visitor) const {
  const std::size_t total = general_.size() + music_.size();
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  Rng order_rng(DeriveSeed(seed_, "order"));
  std::shuffle(order.begin(), order.end(), order_rng);

  Rng rng(DeriveSeed(seed_, "pairs",
                     static_cast<std::uint64_t>(epoch) * num_shards_ + shard));
  for (std::size_t k = shard; k < total; k += num_shards_) {
    const std::size_t i = order[k];
    if (i < general_.size()) {
      GenerateTrainingPairs(general_[i], *vocab_, config_, rng, visitor);
    } else {
      const auto paragraph = Paragraph(i - general_.size(), epoch);
      GenerateTrainingPairs(paragraph, *vocab_, config_, rng, visitor);
    }
  }
}

std::vector<std::vector<std::string>> ReadGeneralCorpus(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read general corpus " + path.string());
  std::vector<std::vector<std::string>> docs;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = Tokenize(line);
    if (!tokens.empty()) docs.push_back(std::move(tokens));
  }
  return docs;
}

std::vector<MusicDocument> ReadMusicCorpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read music corpus " + path.string());
  std::vector<MusicDocument> docs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      MusicDocument doc;
      doc.track_id = j.at("track_id").get<std::string>();
      doc.artist_id = j.at("artist_id").get<std::string>();
      for (const auto& tag : j.at("tags")) {
        doc.tags.push_back(
            {tag.at("name").get<std::string>(),
             ParseTagCategory(tag.at("category").get<std::string>())});
      }
      if (j.contains("review_sentences")) {
        for (const auto& sentence : j.at("review_sentences")) {
          auto tokens = Tokenize(sentence.get<std::string>());
          if (!tokens.empty()) doc.review_sentences.push_back(std::move(tokens));
        }
      }
      doc.Validate();
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
  }
  return docs;
}

void WriteMusicCorpus(const std::filesystem::path& path,
                      std::span<const MusicDocument> docs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const MusicDocument& doc : docs) {
    nlohmann::json j;
    j["track_id"] = doc.track_id;
    j["artist_id"] = doc.artist_id;
    j["tags"] = nlohmann::json::array();
    for (const TagAnnotation& tag : doc.tags) {
      j["tags"].push_back(
          {{"name", tag.name}, {"category", TagCategoryName(tag.category)}});
    }
    j["review_sentences"] = nlohmann::json::array();
    for (const auto& sentence : doc.review_sentences) {
      std::string joined;
      for (const std::string& token : sentence) {
        if (!joined.empty()) joined.push_back(' ');
        joined += token;
      }
      j["review_sentences"].push_back(joined);
    }
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mwe
