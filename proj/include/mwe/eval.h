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

#ifndef MWE_EVAL_H_
#define MWE_EVAL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mwe/corpus.h"
#include "mwe/embedding.h"

namespace mwe {

// track_id -> annotated tags. Ordered so every aggregate is deterministic.
using Annotations = std::map<std::string, std::set<std::string>>;

enum class TagSplit : std::uint8_t { kSeen, kUnseen };
enum class TrackSplit : std::uint8_t { kTrain, kValid, kTest };

struct EvalDataset {
  Annotations annotations;
  std::map<std::string, TagCategory> tag_categories;
  std::map<std::string, TagSplit> tag_split;
  std::map<std::string, TrackSplit> track_split;
  std::map<std::string, std::string> track_artist;

  // Every annotated tag must have a category and every annotated track a
  // split. Throws InvalidArgument otherwise.
  void Validate() const;
  std::vector<std::string> AllTags() const;
  std::vector<std::string> AllTracks() const;
};

// Annotation file: JSON Lines {track_id, artist_id, tags, split}.
// Tag metadata: TSV tag, category, zs_split.
EvalDataset ReadEvalDataset(const std::filesystem::path& annotation_file,
                            const std::filesystem::path& tag_metadata_file);

struct RankingReport {
  std::string metric;
  std::vector<std::pair<std::string, double>> per_query;
  double aggregate = 0.0;  // mean of per_query scores
  std::size_t query_count = 0;
  std::vector<std::string> excluded;  // queries the metric is undefined for

  nlohmann::json ToJson() const;
};

// Builds a report from per-query scores; the aggregate is their mean, 0 when
// there are none.
RankingReport MakeReport(std::string metric,
                         std::vector<std::pair<std::string, double>> per_query,
                         std::vector<std::string> excluded);

// Symmetric tag x tag count matrix with zero diagonal.
class CooccurrenceMatrix {
 public:
  explicit CooccurrenceMatrix(const Annotations& annotations);

  const std::vector<std::string>& tags() const { return tags_; }
  std::optional<std::size_t> index(std::string_view tag) const;
  std::int64_t count(std::size_t i, std::size_t j) const {
    return counts_[i * tags_.size() + j];
  }
  // 0 for unknown tags.
  std::int64_t count(std::string_view a, std::string_view b) const;

 private:
  std::vector<std::string> tags_;  // sorted
  std::vector<std::int64_t> counts_;
};

CooccurrenceMatrix TagCooccurrence(const Annotations& annotations);

// Linear-gain nDCG@k: sum_i rel_i / log2(i + 1) over the first min(k, n)
// predicted items divided by the same sum over the relevances sorted in
// descending order. Items missing from `relevance` have relevance 0. Throws
// InvalidArgument("undefined nDCG") when no relevance is positive.
double NdcgAtK(std::span<const std::string> predicted,
               const std::map<std::string, double>& relevance, std::size_t k);

// Mann-Whitney AUC with midranks for ties. Throws InvalidArgument("AUC
// undefined") unless both classes are present.
double RocAuc(std::span<const double> scores, std::span<const int> labels);

// 1 iff one of the first k retrieved tracks shares a tag with the query.
// Throws InvalidArgument when the query has no tags or appears in
// `retrieved`.
int RecallAtK(const std::string& query_track,
              std::span<const std::string> retrieved,
              const Annotations& annotations, std::size_t k);

inline constexpr std::array<std::pair<TagCategory, TagCategory>, 4>
    kTagRankDirections = {{{TagCategory::kContent, TagCategory::kContent},
                           {TagCategory::kContent, TagCategory::kContext},
                           {TagCategory::kContext, TagCategory::kContent},
                           {TagCategory::kContext, TagCategory::kContext}}};

std::string TagRankDirectionName(TagCategory from, TagCategory to);

struct TagRankReport {
  std::array<RankingReport, 4> directions;  // in kTagRankDirections order
  double average = 0.0;                     // mean of the four aggregates
  std::size_t k = 0;

  nlohmann::json ToJson() const;
};

// For every query tag of the source category, ranks the destination-category
// tags (excluding the query) by embedding cosine, ties by vocabulary id, and
// scores the ranking with nDCG@k against co-occurrence counts. Only tags
// present in the embedding, the annotations and `categories` take part.
// Queries whose co-occurrence row is zero over the targets are excluded.
// Throws InvalidArgument when a category has fewer than 2 usable tags or a
// direction has no scorable query.
TagRankReport TagRankPrediction(const WordEmbedding& emb,
                                const Annotations& annotations,
                                const std::map<std::string, TagCategory>& categories,
                                std::size_t k = 30);

using ScoreFn =
    std::function<double(const std::string& tag, const std::string& track)>;

// Mean per-tag AUC over `tracks` (ranking tracks for each tag). Tags without
// both positive and negative tracks are excluded and listed.
RankingReport QueryByTagEval(const ScoreFn& score, const Annotations& annotations,
                             std::span<const std::string> tags,
                             std::span<const std::string> tracks);

// Mean per-track AUC over `tags`. Tracks annotated with none or all of the
// tags are excluded and listed.
RankingReport TaggingEval(const ScoreFn& score, const Annotations& annotations,
                          std::span<const std::string> tags,
                          std::span<const std::string> tracks);

using TrackSimilarityFn =
    std::function<double(const std::string& query, const std::string& candidate)>;

// recall@k for each k, querying every track against the others, ranked by
// descending similarity with ties in `tracks` order. Tracks without tags are
// excluded.
std::vector<RankingReport> QueryByTrackEval(const TrackSimilarityFn& similarity,
                                            const Annotations& annotations,
                                            std::span<const std::string> tracks,
                                            std::span<const std::size_t> ks);

struct EvalTaskSpec {
  std::vector<std::string> tracks;
  std::vector<std::string> tags;
};

struct ZeroShotSpec {
  EvalTaskSpec retrieval;  // all tracks, unseen tags
  EvalTaskSpec tagging;    // test tracks, seen + unseen tags
};

// Generalized zero-shot split. Throws InvalidArgument when no tag is unseen.
ZeroShotSpec ZeroShotProtocol(const EvalDataset& dataset);

}  // namespace mwe

#endif  // MWE_EVAL_H_
