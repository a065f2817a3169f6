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
#include <filesystem>
#include <fstream>
#include <map>

#include "doctest.h"
#include "mwe/errors.h"

namespace mwe {
namespace {

std::map<std::string, int> Multiset(const std::vector<std::string>& v) {
  std::map<std::string, int> m;
  for (const auto& s : v) ++m[s];
  return m;
}

MusicDocument Doc(std::string track, std::string artist,
                  std::vector<std::string> tags,
                  std::vector<std::vector<std::string>> sentences) {
  MusicDocument d;
  d.track_id = std::move(track);
  d.artist_id = std::move(artist);
  for (auto& t : tags) d.tags.push_back({std::move(t), TagCategory::kContent});
  d.review_sentences = std::move(sentences);
  return d;
}

TEST_CASE("Tokenize lowercases and splits on whitespace") {
  CHECK(Tokenize("Deep House IN Miami") ==
        std::vector<std::string>{"deep", "house", "in", "miami"});
  CHECK(Tokenize("").empty());
  CHECK(Tokenize("  rock\t metal ") == std::vector<std::string>{"rock", "metal"});
  // No other normalization.
  CHECK(Tokenize("Hip-Hop, 90s!") == std::vector<std::string>{"hip-hop,", "90s!"});
}

TEST_CASE("token kinds are ordered by specificity") {
  CHECK(TokenKind::kGeneralWord < TokenKind::kReviewWord);
  CHECK(TokenKind::kReviewWord < TokenKind::kTag);
  CHECK(TokenKind::kTag < TokenKind::kArtistId);
  CHECK(TokenKind::kArtistId < TokenKind::kTrackId);
  for (int i = 0; i < kNumTokenKinds; ++i) {
    const auto k = static_cast<TokenKind>(i);
    CHECK(ParseTokenKind(TokenKindName(k)) == k);
  }
  CHECK_THROWS_AS(ParseTokenKind("word"), InvalidArgument);
}

TEST_CASE("BuildVocabulary applies min_count to words only") {
  CorpusConfig config;
  config.min_count = 2;
  const std::vector<std::vector<std::string>> general = {{"a", "a", "b"}};
  const Vocabulary v = BuildVocabulary(general, {}, config);
  REQUIRE(v.size() == 1);
  CHECK(v.token(0) == "a");
  CHECK(v.count(0) == 2);
  CHECK_FALSE(v.Find("b"));
}

TEST_CASE("BuildVocabulary keeps rare tags and IDs") {
  CorpusConfig config;
  config.min_count = 5;
  const std::vector<MusicDocument> docs = {Doc("trk1", "art1", {"rock"}, {})};
  const Vocabulary v = BuildVocabulary({}, docs, config);
  REQUIRE(v.Find("rock"));
  CHECK(v.count(v.IdOf("rock")) == 1);
  CHECK(v.kind(v.IdOf("rock")) == TokenKind::kTag);
  CHECK(v.kind(v.IdOf("art1")) == TokenKind::kArtistId);
  CHECK(v.kind(v.IdOf("trk1")) == TokenKind::kTrackId);
}

TEST_CASE("BuildVocabulary aggregates across corpora") {
  CorpusConfig config;
  config.min_count = 1;
  const std::vector<std::vector<std::string>> general = {
      {"house", "house", "home"}, {"house"}};
  const std::vector<MusicDocument> docs = {
      Doc("t1", "a1", {}, {{"house", "beat"}, {"house"}})};
  const Vocabulary v = BuildVocabulary(general, docs, config);
  const TokenId house = v.IdOf("house");
  CHECK(v.count(house) == 5);
  CHECK(v.kind(house) == TokenKind::kReviewWord);
  CHECK(v.kind(v.IdOf("home")) == TokenKind::kGeneralWord);
}

TEST_CASE("BuildVocabulary rejects duplicate tracks") {
  const std::vector<MusicDocument> docs = {Doc("t1", "a1", {}, {}),
                                           Doc("t1", "a2", {}, {})};
  CHECK_THROWS_AS(BuildVocabulary({}, docs, CorpusConfig{}), InvalidArgument);
}

TEST_CASE("MusicDocument validation") {
  CHECK_THROWS_AS(Doc("", "a", {}, {}).Validate(), InvalidArgument);
  CHECK_THROWS_AS(Doc("t", "", {}, {}).Validate(), InvalidArgument);
  CHECK_THROWS_AS(Doc("t", "a", {"Deep House"}, {}).Validate(), InvalidArgument);
  CHECK_NOTHROW(Doc("t", "a", {"deep_house"}, {}).Validate());
}

TEST_CASE("vocabulary bijection and kind retention over random corpora") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::string>> general(3);
    for (auto& doc : general) {
      for (int i = 0; i < 20; ++i) {
        doc.push_back("w" + std::to_string(UniformIndex(rng, 12)));
      }
    }
    std::vector<MusicDocument> docs;
    for (int t = 0; t < 6; ++t) {
      std::vector<std::string> tags;
      for (int i = 0; i < 3; ++i) tags.push_back("tag" + std::to_string(UniformIndex(rng, 8)));
      docs.push_back(Doc("trk" + std::to_string(t), "art" + std::to_string(t % 2), tags,
                         {{"w1", "r" + std::to_string(UniformIndex(rng, 5))}}));
    }
    CorpusConfig config;
    config.min_count = UniformIndex<std::int64_t>(rng, 10);
    const Vocabulary v = BuildVocabulary(general, docs, config);
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto id = static_cast<TokenId>(i);
      CHECK(v.IdOf(v.token(id)) == id);
      if (IsWordKind(v.kind(id))) CHECK(v.count(id) >= config.min_count);
    }
    for (const MusicDocument& d : docs) {
      CHECK(v.Find(d.track_id));
      CHECK(v.Find(d.artist_id));
      for (const TagAnnotation& tag : d.tags) CHECK(v.Find(tag.name));
    }
  }
}

TEST_CASE("AssembleMusicParagraph multiset and determinism") {
  CorpusConfig config;
  const MusicDocument doc =
      Doc("trk", "art", {"house", "chill"}, {{"warm", "analog", "synth"}});
  Rng rng(3);
  const auto p = AssembleMusicParagraph(doc, config, rng);
  CHECK(p.size() == 16);
  const auto m = Multiset(p);
  CHECK(m.at("warm") == 4);
  CHECK(m.at("house") == 1);
  CHECK(m.at("trk") == 1);
  CHECK(m.at("art") == 1);

  Rng a(11), b(11);
  CHECK(AssembleMusicParagraph(doc, config, a) == AssembleMusicParagraph(doc, config, b));

  const MusicDocument bare = Doc("trk", "art", {"t1", "t2"}, {});
  Rng c(5);
  auto q = AssembleMusicParagraph(bare, config, c);
  std::sort(q.begin(), q.end());
  CHECK(q == std::vector<std::string>{"art", "t1", "t2", "trk"});
}

TEST_CASE("paragraph multiset conservation over random documents") {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    CorpusConfig config;
    config.review_repeat = 1 + UniformIndex(rng, 5);
    MusicDocument doc = Doc("t", "a", {}, {});
    const int tags = UniformIndex(rng, 4);
    for (int i = 0; i < tags; ++i) doc.tags.push_back({"g" + std::to_string(i), TagCategory::kContext});
    const int sentences = UniformIndex(rng, 4);
    std::map<std::string, int> expected;
    for (int s = 0; s < sentences; ++s) {
      std::vector<std::string> sentence;
      const int len = 1 + UniformIndex(rng, 6);
      for (int i = 0; i < len; ++i) {
        sentence.push_back("w" + std::to_string(UniformIndex(rng, 4)));
        expected[sentence.back()] += config.review_repeat;
      }
      doc.review_sentences.push_back(sentence);
    }
    for (const auto& t : doc.tags) ++expected[t.name];
    ++expected["t"];
    ++expected["a"];
    CHECK(Multiset(AssembleMusicParagraph(doc, config, rng)) == expected);
  }
}

Vocabulary AbcVocab() {
  Vocabulary v;
  v.Add("A", TokenKind::kGeneralWord, 1);
  v.Add("B", TokenKind::kGeneralWord, 1);
  v.Add("C", TokenKind::kGeneralWord, 1);
  return v;
}

TEST_CASE("GenerateTrainingPairs small cases") {
  const Vocabulary v = AbcVocab();
  CorpusConfig config;
  config.subsample_threshold = 0.0;
  config.window_size = 1;
  Rng rng(1);

  const std::vector<TokenId> ab = {0, 1};
  auto pairs = GenerateTrainingPairs(ab, v, config, rng);
  std::sort(pairs.begin(), pairs.end());
  CHECK(pairs == std::vector<TrainingPair>{{0, 1}, {1, 0}});

  const std::vector<TokenId> a = {0};
  CHECK(GenerateTrainingPairs(a, v, config, rng).empty());

  // Fixed b = 1: hand-enumerated windows.
  config.dynamic_window = false;
  const std::vector<TokenId> abc = {0, 1, 2};
  pairs = GenerateTrainingPairs(abc, v, config, rng);
  std::sort(pairs.begin(), pairs.end());
  CHECK(pairs == std::vector<TrainingPair>{{0, 1}, {1, 0}, {1, 2}, {2, 1}});
}

TEST_CASE("full-window pairs are symmetric") {
  Vocabulary v;
  for (int i = 0; i < 10; ++i) v.Add("t" + std::to_string(i), TokenKind::kReviewWord, 1);
  CorpusConfig config;
  config.subsample_threshold = 0.0;
  config.dynamic_window = false;
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    config.window_size = 1 + UniformIndex(rng, 5);
    std::vector<TokenId> ids(1 + UniformIndex(rng, 15));
    for (TokenId& id : ids) id = UniformIndex<TokenId>(rng, 10);
    std::map<TrainingPair, int> counts;
    for (const auto& p : GenerateTrainingPairs(ids, v, config, rng)) ++counts[p];
    for (const auto& [p, n] : counts) {
      const auto it = counts.find({p.context, p.center});
      REQUIRE(it != counts.end());
      CHECK(it->second == n);
    }
  }
}

TEST_CASE("dynamic window never exceeds the configured size") {
  Vocabulary v;
  for (int i = 0; i < 30; ++i) v.Add("t" + std::to_string(i), TokenKind::kGeneralWord, 1);
  CorpusConfig config;
  config.subsample_threshold = 0.0;
  config.window_size = 3;
  std::vector<TokenId> ids(30);
  for (int i = 0; i < 30; ++i) ids[i] = i;
  Rng rng(2);
  int widest = 0;
  GenerateTrainingPairs(ids, v, config, rng, [&](TokenId c, TokenId o) {
    widest = std::max(widest, std::abs(c - o));
  });
  CHECK(widest == 3);
}

TEST_CASE("subsampling never drops tags or IDs") {
  Vocabulary v;
  v.Add("the", TokenKind::kGeneralWord, 1000000);
  v.Add("rock", TokenKind::kTag, 1000000);
  v.Add("trk", TokenKind::kTrackId, 1000000);
  CHECK(KeepProbability(v, 0, 1e-5) < 0.01);
  CHECK(KeepProbability(v, 1, 1e-5) == 1.0);
  CHECK(KeepProbability(v, 2, 1e-5) == 1.0);
  CHECK(KeepProbability(v, 0, 0.0) == 1.0);
  CHECK(KeepProbability(v, 0, 1e-5) == doctest::Approx(std::sqrt(1e-5 * 3)));
}

TEST_CASE("vocabulary TSV round trip") {
  const auto path = std::filesystem::temp_directory_path() / "mwe_vocab_test.tsv";
  Vocabulary v;
  v.Add("hello", TokenKind::kGeneralWord, 7);
  v.Add("rock", TokenKind::kTag, 1);
  v.Add("TRABC", TokenKind::kTrackId, 1);
  v.SaveTsv(path);
  CHECK(Vocabulary::LoadTsv(path) == v);

  std::ofstream(path) << "a\tgeneral\t1\na\tgeneral\t2\n";
  CHECK_THROWS_AS(Vocabulary::LoadTsv(path), ParseError);
  std::ofstream(path) << "a\tbogus\t1\n";
  CHECK_THROWS_AS(Vocabulary::LoadTsv(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("music corpus JSON Lines round trip") {
  const auto path = std::filesystem::temp_directory_path() / "mwe_music_test.jsonl";
  std::ofstream(path)
      << R"({"track_id":"t1","artist_id":"a1","tags":[{"name":"rock","category":"content"},{"name":"party","category":"context"}],"review_sentences":["Loud  GUITARS here","and drums"]})"
      << "\n\n";
  const auto docs = ReadMusicCorpus(path);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].tags[1].category == TagCategory::kContext);
  CHECK(docs[0].review_sentences[0] == std::vector<std::string>{"loud", "guitars", "here"});
  WriteMusicCorpus(path, docs);
  const auto again = ReadMusicCorpus(path);
  CHECK(again[0].review_sentences == docs[0].review_sentences);

  std::ofstream(path) << R"({"track_id":"t1","tags":[]})" << "\n";
  CHECK_THROWS_AS(ReadMusicCorpus(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("TrainingCorpus shuffle modes") {
  CorpusConfig config;
  config.min_count = 1;
  config.subsample_threshold = 0.0;
  std::vector<MusicDocument> docs = {
      Doc("t1", "a1", {"x", "y", "z"}, {{"p", "q", "r", "s"}})};
  const Vocabulary v = BuildVocabulary({}, docs, config);

  config.shuffle_mode = ShuffleMode::kStatic;
  const TrainingCorpus fixed(v, config, {}, docs, 42);
  CHECK(fixed.Paragraph(0, 0) == fixed.Paragraph(0, 5));

  config.shuffle_mode = ShuffleMode::kPerEpoch;
  const TrainingCorpus fresh(v, config, {}, docs, 42);
  int differing = 0;
  for (int e = 1; e < 10; ++e) differing += fresh.Paragraph(0, 0) != fresh.Paragraph(0, e);
  CHECK(differing > 0);

  // Replaying a pass reproduces it.
  std::vector<TrainingPair> first, second;
  fresh.VisitShard(3, 0, [&](TokenId c, TokenId o) { first.push_back({c, o}); });
  fresh.VisitShard(3, 0, [&](TokenId c, TokenId o) { second.push_back({c, o}); });
  CHECK(first == second);
  CHECK_FALSE(first.empty());
}

TEST_CASE("TrainingCorpus shards partition the sequences") {
  CorpusConfig config;
  config.min_count = 1;
  config.subsample_threshold = 0.0;
  config.dynamic_window = false;
  const std::vector<std::vector<std::string>> general = {
      {"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "a"}, {"a", "c"}};
  const Vocabulary v = BuildVocabulary(general, {}, config);
  std::vector<std::vector<TokenId>> encoded;
  for (const auto& s : general) encoded.push_back(EncodeTokens(s, v));

  auto all_pairs = [&](std::size_t shards) {
    const TrainingCorpus corpus(v, config, encoded, {}, 9, shards);
    std::vector<TrainingPair> pairs;
    for (std::size_t s = 0; s < corpus.num_shards(); ++s) {
      corpus.VisitShard(0, s, [&](TokenId c, TokenId o) { pairs.push_back({c, o}); });
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
  };
  CHECK(all_pairs(1).size() == 10);
  CHECK(all_pairs(1) == all_pairs(3));
}

TEST_CASE("CorpusConfig validation") {
  CorpusConfig c;
  c.window_size = 0;
  CHECK_THROWS_AS(c.Validate(), InvalidArgument);
  c = {};
  c.review_repeat = 0;
  CHECK_THROWS_AS(c.Validate(), InvalidArgument);
}

}  // namespace
}  // namespace mwe
