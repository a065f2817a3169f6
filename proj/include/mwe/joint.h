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

#ifndef MWE_JOINT_H_
#define MWE_JOINT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mwe/embedding.h"
#include "mwe/features.h"
#include "mwe/random.h"

namespace mwe {

enum class Supervision : std::uint8_t { kTag = 0, kArtist = 1, kTrack = 2 };
inline constexpr int kNumSupervisions = 3;
inline constexpr std::array<Supervision, kNumSupervisions> kAllSupervisions = {
    Supervision::kTag, Supervision::kArtist, Supervision::kTrack};

std::string_view SupervisionName(Supervision s);  // "Tag", "Artist", "Track"

struct JointConfig {
  int joint_dim = 256;
  int hidden = 512;
  double margin = 0.2;
  double lambda_tag = 1.0;
  double lambda_artist = 1.0;
  double lambda_track = 1.0;
  int batch_size = 128;
  int epochs = 200;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  bool nesterov = true;
  // Per-step inverse-time decay: lr_t = learning_rate / (1 + lr_decay * t).
  double lr_decay = 1e-6;
  std::uint64_t seed = 1;

  double lambda(Supervision s) const;
  bool active(Supervision s) const { return lambda(s) > 0.0; }
  // Names of the active supervision terms, e.g. {"Tag", "Track"}.
  std::vector<std::string> ActiveSupervisions() const;
  void Validate() const;
};

// f(x) = W2 tanh(W1 x + b1) + b2.
struct AudioEncoder {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // joint x hidden
  Eigen::VectorXd b2;

  // Glorot-uniform weights, zero biases.
  static AudioEncoder Create(int input_dim, int hidden, int joint_dim, Rng& rng);

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int joint_dim() const { return static_cast<int>(w2.rows()); }

  // Throws InvalidArgument on a dimension mismatch.
  Eigen::VectorXd Encode(std::span<const double> x) const;
  Eigen::VectorXd Encode(const Eigen::VectorXd& x) const;
};

// g(token) = A v(token) + c over a frozen word embedding.
struct SemanticEncoder {
  std::shared_ptr<const WordEmbedding> embedding;
  Eigen::MatrixXd weight;  // joint x word_dim
  Eigen::VectorXd bias;

  static SemanticEncoder Create(std::shared_ptr<const WordEmbedding> embedding,
                                int joint_dim, Rng& rng);

  Eigen::VectorXd WordVector(TokenId id) const;
  Eigen::VectorXd Encode(TokenId id) const;
  // Throws InvalidArgument for OOV tokens.
  Eigen::VectorXd Encode(std::string_view token) const;
};

struct JointModel {
  AudioEncoder audio;
  SemanticEncoder semantic;
};

// Cosine similarity; throws InvalidArgument on a zero-norm input.
double Similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& p);

// max(0, margin - Sim(a, pos) + Sim(a, neg)).
double TripletLoss(const Eigen::VectorXd& anchor, const Eigen::VectorXd& pos,
                   const Eigen::VectorXd& neg, double margin);

using SupervisionLosses = std::array<double, kNumSupervisions>;

// sum_s lambda_s * L_s, skipping terms whose lambda is zero.
double TotalLoss(const SupervisionLosses& losses, const JointConfig& config);

struct SupervisionRecord {
  ClipFeatures clip;
  std::vector<std::string> tags;
  std::string artist_id;
  std::string track_id;
};

// Supervision file: JSON Lines {clip_id, track_id, artist_id, tags}, joined
// against `features` by clip_id. Throws ParseError on malformed lines and
// InvalidArgument listing every clip missing from `features`.
std::vector<SupervisionRecord> ReadSupervisionFile(
    const std::filesystem::path& path, std::span<const ClipFeatures> features);

// A supervision record with tokens resolved to vocabulary ids.
struct ResolvedRecord {
  Eigen::VectorXd features;
  std::vector<TokenId> tags;
  TokenId artist;
  TokenId track;
};

// Training set for the joint model plus the global prototype pools.
class JointDataset {
 public:
  // Throws InvalidArgument listing every OOV token, or on inconsistent
  // feature lengths.
  JointDataset(std::span<const SupervisionRecord> records,
               const Vocabulary& vocab);
  JointDataset(std::vector<ResolvedRecord> records);

  const std::vector<ResolvedRecord>& records() const { return records_; }
  // Distinct prototype ids of one supervision type, ascending.
  std::span<const TokenId> pool(Supervision s) const {
    return pools_[static_cast<int>(s)];
  }
  int feature_dim() const;
  std::size_t size() const { return records_.size(); }

 private:
  void BuildPools();

  std::vector<ResolvedRecord> records_;
  std::array<std::vector<TokenId>, kNumSupervisions> pools_;
};

struct Triplet {
  std::size_t record;  // index into the record span
  TokenId positive;
  TokenId negative;
};

// One triplet per record in `batch`: the positive is a uniform tag of the
// record (records without tags are skipped), its artist, or its track; the
// negative is uniform over `pool` minus every positive of the record. Throws
// InvalidArgument if the pool has fewer than 2 prototypes.
std::vector<Triplet> SampleTriplets(std::span<const ResolvedRecord> records,
                                    std::span<const std::size_t> batch,
                                    Supervision supervision,
                                    std::span<const TokenId> pool, Rng& rng);

using TripletSet = std::array<std::vector<Triplet>, kNumSupervisions>;

// Gradient of the batch loss, shaped like the trainable parameters.
struct JointGradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  static JointGradients ZerosLike(const JointModel& model);
};

struct BatchLoss {
  SupervisionLosses terms{};  // mean hinge per supervision type
  double total = 0.0;
};

// Loss sum_s lambda_s * mean_{triplets of s} hinge, and, when `grad` is
// non-null, its exact gradient with respect to every encoder parameter. The
// hinge contributes zero gradient at and below its kink.
BatchLoss ComputeBatchLoss(const JointModel& model,
                           std::span<const ResolvedRecord> records,
                           const TripletSet& triplets,
                           const JointConfig& config,
                           JointGradients* grad = nullptr);

struct JointTrainingResult {
  JointModel model;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

// Mini-batch SGD with (Nesterov) momentum over the encoder parameters; the
// word embedding is never written. Deterministic for a fixed seed.
JointTrainingResult TrainJoint(
    const JointDataset& dataset, std::shared_ptr<const WordEmbedding> embedding,
    const JointConfig& config,
    const std::function<void(int epoch, double loss)>& on_epoch = {});

// Mean of the encoder outputs over a track's clips.
Eigen::VectorXd TrackEmbedding(const AudioEncoder& encoder,
                               std::span<const ClipFeatures> clips);

// Model checkpoint: the config echo, the embedding it was trained against and
// every encoder parameter as decimal floats, in one JSON document.
struct Checkpoint {
  JointConfig config;
  std::string embedding_path;
  std::uint64_t embedding_checksum = 0;
  AudioEncoder audio;
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  // Throws InvalidArgument when the embedding shape does not fit.
  JointModel Bind(std::shared_ptr<const WordEmbedding> embedding) const;
};

void SaveCheckpoint(const std::filesystem::path& path, const JointModel& model,
                    const JointConfig& config,
                    const std::string& embedding_path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace mwe

#endif  // MWE_JOINT_H_
