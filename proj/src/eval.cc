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

#include "mwe/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "mwe/errors.h"

namespace mwe {
namespace {

std::string_view TrackSplitName(TrackSplit s) {
  switch (s) {
    case TrackSplit::kTrain:
      return "train";
    case TrackSplit::kValid:
      return "valid";
    case TrackSplit::kTest:
      return "test";
  }
  return "?";
}

TrackSplit ParseTrackSplit(std::string_view name) {
  for (TrackSplit s : {TrackSplit::kTrain, TrackSplit::kValid, TrackSplit::kTest}) {
    if (TrackSplitName(s) == name) return s;
  }
  throw InvalidArgument("unknown track split '" + std::string(name) + "'");
}

TagSplit ParseTagSplit(std::string_view name) {
  if (name == "seen") return TagSplit::kSeen;
  if (name == "unseen") return TagSplit::kUnseen;
  throw InvalidArgument("unknown zero-shot split '" + std::string(name) + "'");
}

}  // namespace

void EvalDataset::Validate() const {
  for (const auto& [track, tags] : annotations) {
    if (!track_split.count(track)) {
      throw InvalidArgument("track " + track + " has no split");
    }
    for (const std::string& tag : tags) {
      if (!tag_categories.count(tag)) {
        throw InvalidArgument("tag '" + tag + "' has no category");
      }
    }
  }
}

std::vector<std::string> EvalDataset::AllTags() const {
  std::set<std::string> tags;
  for (const auto& [track, t] : annotations) tags.insert(t.begin(), t.end());
  return {tags.begin(), tags.end()};
}

std::vector<std::string> EvalDataset::AllTracks() const {
  std::vector<std::string> tracks;
  for (const auto& [track, t] : annotations) tracks.push_back(track);
  return tracks;
}

EvalDataset ReadEvalDataset(const std::filesystem::path& annotation_file,
                            const std::filesystem::path& tag_metadata_file) {
  EvalDataset ds;
  {
    std::ifstream in(annotation_file, std::ios::binary);
    if (!in) throw IoError("cannot read annotation file " + annotation_file.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        const auto track = j.at("track_id").get<std::string>();
        if (ds.annotations.count(track)) {
          throw InvalidArgument("duplicate track_id '" + track + "'");
        }
        auto& tags = ds.annotations[track];
        for (const auto& tag : j.at("tags")) tags.insert(tag.get<std::string>());
        ds.track_split[track] = ParseTrackSplit(j.at("split").get<std::string>());
        if (j.contains("artist_id")) {
          ds.track_artist[track] = j.at("artist_id").get<std::string>();
        }
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(annotation_file.string(), line_no, e.what());
      } catch (const InvalidArgument& e) {
        throw ParseError(annotation_file.string(), line_no, e.what());
      }
    }
  }
  {
    std::ifstream in(tag_metadata_file, std::ios::binary);
    if (!in) throw IoError("cannot read tag metadata " + tag_metadata_file.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<std::string> cols;
      std::size_t start = 0;
      for (;;) {
        const auto tab = line.find('\t', start);
        cols.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
      }
      if (cols.size() != 3) {
        throw ParseError(tag_metadata_file.string(), line_no,
                         "expected columns tag, category, zs_split");
      }
      try {
        ds.tag_categories[cols[0]] = ParseTagCategory(cols[1]);
        ds.tag_split[cols[0]] = ParseTagSplit(cols[2]);
      } catch (const InvalidArgument& e) {
        throw ParseError(tag_metadata_file.string(), line_no, e.what());
      }
    }
  }
  ds.Validate();
  return ds;
}

nlohmann::json RankingReport::ToJson() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& [query, score] : per_query) {
    per.push_back({{"query", query}, {"score", score}});
  }
  return {{"metric", metric},
          {"aggregate", aggregate},
          {"query_count", query_count},
          {"excluded_count", excluded.size()},
          {"excluded", excluded},
          {"per_query", per}};
}

RankingReport MakeReport(std::string metric,
                         std::vector<std::pair<std::string, double>> per_query,
                         std::vector<std::string> excluded) {
  RankingReport r;
  r.metric = std::move(metric);
  r.per_query = std::move(per_query);
  r.excluded = std::move(excluded);
  r.query_count = r.per_query.size();
  double sum = 0.0;
  for (const auto& [q, s] : r.per_query) sum += s;
  r.aggregate = r.query_count ? sum / static_cast<double>(r.query_count) : 0.0;
  return r;
}

CooccurrenceMatrix::CooccurrenceMatrix(const Annotations& annotations) {
  std::set<std::string> all;
  for (const auto& [track, tags] : annotations) all.insert(tags.begin(), tags.end());
  tags_.assign(all.begin(), all.end());
  const std::size_t n = tags_.size();
  counts_.assign(n * n, 0);
  std::vector<std::size_t> ids;
  for (const auto& [track, tags] : annotations) {
    ids.clear();
    for (const std::string& tag : tags) ids.push_back(*index(tag));
    for (std::size_t a = 0; a < ids.size(); ++a) {
      for (std::size_t b = a + 1; b < ids.size(); ++b) {
        ++counts_[ids[a] * n + ids[b]];
        ++counts_[ids[b] * n + ids[a]];
      }
    }
  }
}

std::optional<std::size_t> CooccurrenceMatrix::index(std::string_view tag) const {
  const auto it = std::lower_bound(tags_.begin(), tags_.end(), tag);
  if (it == tags_.end() || *it != tag) return std::nullopt;
  return static_cast<std::size_t>(it - tags_.begin());
}

std::int64_t CooccurrenceMatrix::count(std::string_view a, std::string_view b) const {
  const auto i = index(a), j = index(b);
  return i && j ? count(*i, *j) : 0;
}

CooccurrenceMatrix TagCooccurrence(const Annotations& annotations) {
  return CooccurrenceMatrix(annotations);
}

double NdcgAtK(std::span<const std::string> predicted,
               const std::map<std::string, double>& relevance, std::size_t k) {
  std::vector<double> ideal;
  for (const auto& [item, rel] : relevance) {
    if (rel < 0.0) throw InvalidArgument("negative relevance for '" + item + "'");
    ideal.push_back(rel);
  }
  if (std::none_of(ideal.begin(), ideal.end(), [](double r) { return r > 0.0; })) {
    throw InvalidArgument("undefined nDCG: no positive relevance");
  }
  std::sort(ideal.begin(), ideal.end(), std::greater<>());

  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, predicted.size()); ++i) {
    const auto it = relevance.find(predicted[i]);
    if (it != relevance.end()) dcg += it->second / std::log2(i + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, ideal.size()); ++i) {
    idcg += ideal[i] / std::log2(i + 2.0);
  }
  return dcg / idcg;
}

double RocAuc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] != 0) {
        pos_rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw InvalidArgument("AUC undefined: need both positive and negative labels");
  }
  const double p = static_cast<double>(positives);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

int RecallAtK(const std::string& query_track, std::span<const std::string> retrieved,
              const Annotations& annotations, std::size_t k) {
  const auto q = annotations.find(query_track);
  if (q == annotations.end() || q->second.empty()) {
    throw InvalidArgument("query track " + query_track + " has no tags");
  }
  for (std::size_t i = 0; i < std::min(k, retrieved.size()); ++i) {
    if (retrieved[i] == query_track) {
      throw InvalidArgument("query track appears in its own retrieval list");
    }
    const auto c = annotations.find(retrieved[i]);
    if (c == annotations.end()) continue;
    for (const std::string& tag : c->second) {
      if (q->second.count(tag)) return 1;
    }
  }
  return 0;
}

std::string TagRankDirectionName(TagCategory from, TagCategory to) {
  auto shortname = [](TagCategory c) {
    return c == TagCategory::kContent ? "Ctn" : "Ctx";
  };
  return std::string(shortname(from)) + "->" + shortname(to);
}

nlohmann::json TagRankReport::ToJson() const {
  nlohmann::json dirs = nlohmann::json::object();
  for (std::size_t d = 0; d < directions.size(); ++d) {
    const auto [from, to] = kTagRankDirections[d];
    dirs[TagRankDirectionName(from, to)] = directions[d].ToJson();
  }
  return {{"metric", "nDCG@" + std::to_string(k)},
          {"gain", "linear"},
          {"average", average},
          {"directions", dirs}};
}

TagRankReport TagRankPrediction(const WordEmbedding& emb,
                                const Annotations& annotations,
                                const std::map<std::string, TagCategory>& categories,
                                std::size_t k) {
  const CooccurrenceMatrix cooc(annotations);
  const Vocabulary& vocab = emb.vocabulary();

  struct UsableTag {
    std::string name;
    TokenId id;
    std::size_t cooc_index;
  };
  std::array<std::vector<UsableTag>, 2> usable;
  for (const auto& [tag, category] : categories) {
    const auto id = vocab.Find(tag);
    const auto ci = cooc.index(tag);
    if (id && ci) usable[static_cast<int>(category)].push_back({tag, *id, *ci});
  }
  for (int c = 0; c < 2; ++c) {
    if (usable[c].size() < 2) {
      throw InvalidArgument(std::string("tag rank prediction needs >= 2 ") +
                            std::string(TagCategoryName(static_cast<TagCategory>(c))) +
                            " tags present in both embedding and annotations");
    }
  }

  TagRankReport report;
  report.k = k;
  const std::string metric = "nDCG@" + std::to_string(k);
  for (std::size_t d = 0; d < kTagRankDirections.size(); ++d) {
    const auto [from, to] = kTagRankDirections[d];
    std::vector<std::pair<std::string, double>> per_query;
    std::vector<std::string> excluded;
    for (const UsableTag& q : usable[static_cast<int>(from)]) {
      std::vector<std::pair<double, const UsableTag*>> ranked;
      std::map<std::string, double> relevance;
      for (const UsableTag& t : usable[static_cast<int>(to)]) {
        if (t.id == q.id) continue;
        ranked.emplace_back(CosineSimilarity(emb.vector(q.id), emb.vector(t.id)), &t);
        relevance[t.name] = static_cast<double>(cooc.count(q.cooc_index, t.cooc_index));
      }
      if (std::none_of(relevance.begin(), relevance.end(),
                       [](const auto& r) { return r.second > 0.0; })) {
        excluded.push_back(q.name);
        continue;
      }
      std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second->id < b.second->id;
      });
      std::vector<std::string> order;
      order.reserve(ranked.size());
      for (const auto& [score, tag] : ranked) order.push_back(tag->name);
      per_query.emplace_back(q.name, NdcgAtK(order, relevance, k));
    }
    if (per_query.empty()) {
      throw InvalidArgument("no scorable query tags for direction " +
                            TagRankDirectionName(from, to));
    }
    report.directions[d] =
        MakeReport(metric + " " + TagRankDirectionName(from, to),
                   std::move(per_query), std::move(excluded));
  }
  double sum = 0.0;
  for (const RankingReport& r : report.directions) sum += r.aggregate;
  report.average = sum / static_cast<double>(report.directions.size());
  return report;
}

RankingReport QueryByTagEval(const ScoreFn& score, const Annotations& annotations,
                             std::span<const std::string> tags,
                             std::span<const std::string> tracks) {
  std::vector<std::pair<std::string, double>> per_tag;
  std::vector<std::string> excluded;
  std::vector<double> scores(tracks.size());
  std::vector<int> labels(tracks.size());
  for (const std::string& tag : tags) {
    int positives = 0;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      const auto it = annotations.find(tracks[i]);
      labels[i] = it != annotations.end() && it->second.count(tag) ? 1 : 0;
      positives += labels[i];
    }
    if (positives == 0 || positives == static_cast<int>(tracks.size())) {
      excluded.push_back(tag);
      continue;
    }
    for (std::size_t i = 0; i < tracks.size(); ++i) scores[i] = score(tag, tracks[i]);
    per_tag.emplace_back(tag, RocAuc(scores, labels));
  }
  return MakeReport("ROCAUC_tag", std::move(per_tag), std::move(excluded));
}

RankingReport TaggingEval(const ScoreFn& score, const Annotations& annotations,
                          std::span<const std::string> tags,
                          std::span<const std::string> tracks) {
  std::vector<std::pair<std::string, double>> per_track;
  std::vector<std::string> excluded;
  std::vector<double> scores(tags.size());
  std::vector<int> labels(tags.size());
  for (const std::string& track : tracks) {
    const auto it = annotations.find(track);
    int positives = 0;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      labels[i] = it != annotations.end() && it->second.count(tags[i]) ? 1 : 0;
      positives += labels[i];
    }
    if (positives == 0 || positives == static_cast<int>(tags.size())) {
      excluded.push_back(track);
      continue;
    }
    for (std::size_t i = 0; i < tags.size(); ++i) scores[i] = score(tags[i], track);
    per_track.emplace_back(track, RocAuc(scores, labels));
  }
  return MakeReport("ROCAUC_clip", std::move(per_track), std::move(excluded));
}

std::vector<RankingReport> QueryByTrackEval(const TrackSimilarityFn& similarity,
                                            const Annotations& annotations,
                                            std::span<const std::string> tracks,
                                            std::span<const std::size_t> ks) {
  std::vector<std::vector<std::pair<std::string, double>>> per_k(ks.size());
  std::vector<std::string> excluded;
  for (std::size_t q = 0; q < tracks.size(); ++q) {
    const auto it = annotations.find(tracks[q]);
    if (it == annotations.end() || it->second.empty()) {
      excluded.push_back(tracks[q]);
      continue;
    }
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t c = 0; c < tracks.size(); ++c) {
      if (c != q) ranked.emplace_back(similarity(tracks[q], tracks[c]), c);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<std::string> retrieved;
    retrieved.reserve(ranked.size());
    for (const auto& [s, c] : ranked) retrieved.push_back(tracks[c]);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      per_k[i].emplace_back(tracks[q],
                            RecallAtK(tracks[q], retrieved, annotations, ks[i]));
    }
  }
  std::vector<RankingReport> reports;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    reports.push_back(MakeReport("R@" + std::to_string(ks[i]), std::move(per_k[i]),
                                 excluded));
  }
  return reports;
}

ZeroShotSpec ZeroShotProtocol(const EvalDataset& dataset) {
  ZeroShotSpec spec;
  for (const auto& [tag, split] : dataset.tag_split) {
    spec.tagging.tags.push_back(tag);
    if (split == TagSplit::kUnseen) spec.retrieval.tags.push_back(tag);
  }
  if (spec.retrieval.tags.empty()) {
    throw InvalidArgument("zero-shot protocol needs at least one unseen tag");
  }
  for (const auto& [track, tags] : dataset.annotations) {
    spec.retrieval.tracks.push_back(track);
    const auto it = dataset.track_split.find(track);
    if (it != dataset.track_split.end() && it->second == TrackSplit::kTest) {
      spec.tagging.tracks.push_back(track);
    }
  }
  return spec;
}

}  // namespace mwe
