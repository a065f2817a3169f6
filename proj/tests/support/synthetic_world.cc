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

#include "support/synthetic_world.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"
#include "mwe/errors.h"
#include "mwe/random.h"

namespace mwe::testing {
namespace {

std::string TagName(int genre, char kind, int s) {
  return "g" + std::to_string(genre) + kind + std::to_string(s);
}

std::string Pad(int v, int width) {
  std::string s = std::to_string(v);
  return std::string(std::max(0, width - static_cast<int>(s.size())), '0') + s;
}

}  // namespace

SyntheticWorld MakeSyntheticWorld(const SyntheticWorldConfig& config) {
  SyntheticWorld w;
  w.config = config;
  Rng rng(DeriveSeed(config.seed, "synthetic-world"));

  for (int g = 0; g < config.genres; ++g) {
    for (int s = 0; s < config.subclusters; ++s) {
      for (char kind : {'c', 'x'}) {
        const std::string tag = TagName(g, kind, s);
        w.tags.push_back(tag);
        w.tag_genre[tag] = g;
        w.eval.tag_categories[tag] =
            kind == 'c' ? TagCategory::kContent : TagCategory::kContext;
        w.eval.tag_split[tag] = TagSplit::kSeen;
      }
    }
  }
  std::vector<std::string> shuffled = w.tags;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto unseen = static_cast<std::size_t>(config.unseen_fraction * double(w.tags.size()) + 0.5);
  for (std::size_t i = 0; i < unseen; ++i) w.eval.tag_split[shuffled[i]] = TagSplit::kUnseen;

  auto genre_word = [](int g, std::size_t i) {
    return "w" + std::to_string(g) + "_" + std::to_string(i);
  };
  auto sub_word = [](int g, int s, std::size_t i) {
    return "w" + std::to_string(g) + "s" + std::to_string(s) + "_" + std::to_string(i);
  };

  int index = 0;
  for (int g = 0; g < config.genres; ++g) {
    for (int t = 0; t < config.tracks_per_genre; ++t, ++index) {
      SyntheticTrack track;
      track.track_id = "trk" + Pad(index, 4);
      track.genre = g;
      track.subcluster = t % config.subclusters;
      track.artist_id = "art" + std::to_string(g) + "_" +
                        std::to_string(UniformIndex(rng, config.artists_per_genre));
      const int s = track.subcluster;
      track.tags = {TagName(g, 'c', s), TagName(g, 'x', s)};
      if (UniformUnit(rng) < config.neighbor_tag_probability) {
        track.tags.push_back(TagName(g, 'c', (s + 1) % config.subclusters));
      }
      if (UniformUnit(rng) < config.neighbor_tag_probability) {
        track.tags.push_back(TagName(g, 'x', (s + 1) % config.subclusters));
      }
      const int slot = index % 10;
      track.split = slot < 2 ? TrackSplit::kTest : slot == 2 ? TrackSplit::kValid : TrackSplit::kTrain;

      MusicDocument doc;
      doc.track_id = track.track_id;
      doc.artist_id = track.artist_id;
      for (const auto& tag : track.tags) doc.tags.push_back({tag, w.eval.tag_categories[tag]});
      for (int r = 0; r < config.review_sentences; ++r) {
        std::vector<std::string> sentence;
        for (int k = 0; k < config.sentence_length; ++k) {
          const double u = UniformUnit(rng);
          if (u < config.subcluster_word_probability) {
            sentence.push_back(
                sub_word(g, s, UniformIndex<std::size_t>(rng, config.subcluster_words)));
          } else {
            const auto i = UniformIndex<std::size_t>(rng, config.genre_words);
            const bool genre =
                u < config.subcluster_word_probability + config.genre_word_probability;
            sentence.push_back(genre ? genre_word(g, i) : "rw" + std::to_string(i));
          }
        }
        doc.review_sentences.push_back(std::move(sentence));
      }
      w.music.push_back(std::move(doc));

      w.eval.annotations[track.track_id] =
          std::set<std::string>(track.tags.begin(), track.tags.end());
      w.eval.track_split[track.track_id] = track.split;
      w.eval.track_artist[track.track_id] = track.artist_id;
      w.tracks.push_back(std::move(track));
    }
  }
  for (int i = 0; i < config.general_sentences; ++i) {
    std::vector<std::string> sentence;
    for (int k = 0; k < config.general_sentence_length; ++k) {
      sentence.push_back("gen" + std::to_string(UniformIndex(rng, config.general_words)));
    }
    w.general.push_back(std::move(sentence));
  }
  return w;
}

WordEmbedding TrainWorldEmbedding(const SyntheticWorld& world, const CorpusConfig& corpus,
                                  const SgnsConfig& sgns, std::uint64_t corpus_seed) {
  Vocabulary vocab = BuildVocabulary(world.general, world.music, corpus);
  std::vector<std::vector<TokenId>> general;
  for (const auto& d : world.general) general.push_back(EncodeTokens(d, vocab));
  const TrainingCorpus pairs(vocab, corpus, general, world.music, corpus_seed);
  const NegativeSampler sampler(vocab, sgns.ns_exponent);
  SgnsConfig single = sgns;
  single.workers = 1;
  SgnsResult result = TrainSgns(pairs, vocab.size(), sampler, single);
  return WordEmbedding::FromModel(std::move(vocab), result.model);
}

double IntraMinusInterGenreCosine(const SyntheticWorld& world, const WordEmbedding& emb) {
  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < world.tags.size(); ++i) {
    for (std::size_t j = i + 1; j < world.tags.size(); ++j) {
      const double c =
          CosineSimilarity(emb.vector(world.tags[i]), emb.vector(world.tags[j]));
      if (world.tag_genre.at(world.tags[i]) == world.tag_genre.at(world.tags[j])) {
        intra += c;
        ++n_intra;
      } else {
        inter += c;
        ++n_inter;
      }
    }
  }
  return intra / n_intra - inter / n_inter;
}

std::vector<ClipFeatures> CompositionFeatures(const SyntheticWorld& world, int feature_dim,
                                              int clips_per_track, double noise,
                                              std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "composition-features"));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::map<std::string, std::vector<double>> projection;
  for (const auto& tag : world.tags) {
    auto& column = projection[tag];
    for (int i = 0; i < feature_dim; ++i) column.push_back(normal(rng));
  }
  std::vector<ClipFeatures> clips;
  for (const auto& track : world.tracks) {
    for (int c = 0; c < clips_per_track; ++c) {
      ClipFeatures clip{track.track_id + "_" + std::to_string(c), track.track_id,
                        std::vector<double>(feature_dim, 0.0)};
      for (const auto& tag : track.tags) {
        for (int i = 0; i < feature_dim; ++i) clip.vector[i] += projection[tag][i];
      }
      for (auto& v : clip.vector) v += noise * normal(rng);
      clips.push_back(std::move(clip));
    }
  }
  return clips;
}

std::vector<SupervisionRecord> SupervisionFor(const SyntheticWorld& world,
                                              const std::vector<ClipFeatures>& clips,
                                              std::initializer_list<TrackSplit> splits) {
  std::map<std::string, const SyntheticTrack*> by_id;
  for (const auto& t : world.tracks) by_id[t.track_id] = &t;
  std::vector<SupervisionRecord> out;
  for (const auto& clip : clips) {
    const SyntheticTrack& t = *by_id.at(clip.track_id);
    if (std::find(splits.begin(), splits.end(), t.split) == splits.end()) continue;
    SupervisionRecord r{clip, {}, t.artist_id, t.track_id};
    for (const auto& tag : t.tags) {
      if (world.eval.tag_split.at(tag) == TagSplit::kSeen) r.tags.push_back(tag);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void WriteWorldFiles(const SyntheticWorld& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "general.txt", std::ios::binary);
    for (const auto& d : world.general) {
      for (std::size_t i = 0; i < d.size(); ++i) out << (i ? " " : "") << d[i];
      out << "\n";
    }
  }
  WriteMusicCorpus(dir / "music.jsonl", world.music);
  {
    std::ofstream out(dir / "annotations.jsonl", std::ios::binary);
    const char* names[] = {"train", "valid", "test"};
    for (const auto& t : world.tracks) {
      const nlohmann::json j = {{"track_id", t.track_id},
                                {"artist_id", t.artist_id},
                                {"tags", t.tags},
                                {"split", names[static_cast<int>(t.split)]}};
      out << j.dump() << "\n";
    }
  }
  {
    std::ofstream out(dir / "tag_metadata.tsv", std::ios::binary);
    for (const auto& tag : world.tags) {
      out << tag << '\t' << TagCategoryName(world.eval.tag_categories.at(tag)) << '\t'
          << (world.eval.tag_split.at(tag) == TagSplit::kSeen ? "seen" : "unseen") << "\n";
    }
  }
}

void WriteSupervisionFile(const std::filesystem::path& path,
                          const std::vector<SupervisionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : records) {
    const nlohmann::json j = {{"clip_id", r.clip.clip_id},
                              {"track_id", r.track_id},
                              {"artist_id", r.artist_id},
                              {"tags", r.tags}};
    out << j.dump() << "\n";
  }
}

}  // namespace mwe::testing
