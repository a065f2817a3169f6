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

#include "mwe/joint.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "json.hpp"
#include "mwe/config_io.h"
#include "mwe/errors.h"

namespace mwe {
namespace {

constexpr const char* kCheckpointFormat = "mwe-joint-checkpoint";

Eigen::MatrixXd GlorotUniform(int rows, int cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

nlohmann::json MatrixToJson(const Eigen::MatrixXd& m) {
  std::vector<double> data;
  data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd MatrixFromJson(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw InvalidArgument("matrix shape does not match its data");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  }
  return m;
}

nlohmann::json VectorToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd VectorFromJson(const nlohmann::json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(data.data(),
                                           static_cast<Eigen::Index>(data.size()));
}

// d cos(u, v) / du.
Eigen::VectorXd CosineGradient(const Eigen::VectorXd& u, double u_norm,
                               const Eigen::VectorXd& v, double v_norm,
                               double cosine) {
  return v / (u_norm * v_norm) - (cosine / (u_norm * u_norm)) * u;
}

struct AudioForward {
  Eigen::VectorXd hidden;  // tanh(W1 x + b1)
  Eigen::VectorXd output;
};

AudioForward ForwardAudio(const AudioEncoder& enc, const Eigen::VectorXd& x) {
  AudioForward f;
  f.hidden = (enc.w1 * x + enc.b1).array().tanh().matrix();
  f.output = enc.w2 * f.hidden + enc.b2;
  return f;
}

template <typename Fn>
void ForEachBlock(JointModel& model, JointGradients& grad,
                  JointGradients& velocity, Fn&& fn) {
  fn(model.audio.w1, grad.w1, velocity.w1);
  fn(model.audio.b1, grad.b1, velocity.b1);
  fn(model.audio.w2, grad.w2, velocity.w2);
  fn(model.audio.b2, grad.b2, velocity.b2);
  fn(model.semantic.weight, grad.weight, velocity.weight);
  fn(model.semantic.bias, grad.bias, velocity.bias);
}

}  // namespace

std::string_view SupervisionName(Supervision s) {
  switch (s) {
    case Supervision::kTag:
      return "Tag";
    case Supervision::kArtist:
      return "Artist";
    case Supervision::kTrack:
      return "Track";
  }
  return "?";
}

double JointConfig::lambda(Supervision s) const {
  switch (s) {
    case Supervision::kTag:
      return lambda_tag;
    case Supervision::kArtist:
      return lambda_artist;
    case Supervision::kTrack:
      return lambda_track;
  }
  return 0.0;
}

std::vector<std::string> JointConfig::ActiveSupervisions() const {
  std::vector<std::string> names;
  for (Supervision s : kAllSupervisions) {
    if (active(s)) names.emplace_back(SupervisionName(s));
  }
  return names;
}

void JointConfig::Validate() const {
  if (joint_dim < 1) throw InvalidArgument("joint.joint_dim must be >= 1");
  if (hidden < 1) throw InvalidArgument("joint.hidden must be >= 1");
  if (!(margin > 0.0)) throw InvalidArgument("joint.margin must be > 0");
  for (Supervision s : kAllSupervisions) {
    if (!(lambda(s) >= 0.0) || !std::isfinite(lambda(s))) {
      throw InvalidArgument("joint.lambda_* must be finite and >= 0");
    }
  }
  if (!(lambda_tag > 0.0 || lambda_artist > 0.0 || lambda_track > 0.0)) {
    throw InvalidArgument(
        "at least one of joint.lambda_tag, lambda_artist, lambda_track must be > 0");
  }
  if (batch_size < 1) throw InvalidArgument("joint.batch_size must be >= 1");
  if (epochs < 1) throw InvalidArgument("joint.epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("joint.learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidArgument("joint.momentum must be in [0, 1)");
  }
  if (!(lr_decay >= 0.0)) throw InvalidArgument("joint.lr_decay must be >= 0");
}

AudioEncoder AudioEncoder::Create(int input_dim, int hidden, int joint_dim,
                                  Rng& rng) {
  AudioEncoder enc;
  enc.w1 = GlorotUniform(hidden, input_dim, rng);
  enc.b1 = Eigen::VectorXd::Zero(hidden);
  enc.w2 = GlorotUniform(joint_dim, hidden, rng);
  enc.b2 = Eigen::VectorXd::Zero(joint_dim);
  return enc;
}

Eigen::VectorXd AudioEncoder::Encode(const Eigen::VectorXd& x) const {
  if (x.size() != w1.cols()) {
    throw InvalidArgument("audio feature length " + std::to_string(x.size()) +
                          " does not match encoder input " +
                          std::to_string(w1.cols()));
  }
  return ForwardAudio(*this, x).output;
}

Eigen::VectorXd AudioEncoder::Encode(std::span<const double> x) const {
  return Encode(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
      x.data(), static_cast<Eigen::Index>(x.size()))));
}

SemanticEncoder SemanticEncoder::Create(
    std::shared_ptr<const WordEmbedding> embedding, int joint_dim, Rng& rng) {
  if (!embedding) throw InvalidArgument("semantic encoder needs an embedding");
  SemanticEncoder enc;
  const int word_dim = static_cast<int>(embedding->dim());
  enc.weight = GlorotUniform(joint_dim, word_dim, rng);
  enc.bias = Eigen::VectorXd::Zero(joint_dim);
  enc.embedding = std::move(embedding);
  return enc;
}

Eigen::VectorXd SemanticEncoder::WordVector(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= embedding->size()) {
    throw InvalidArgument("token id " + std::to_string(id) + " out of range");
  }
  const auto v = embedding->vector(id);
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

Eigen::VectorXd SemanticEncoder::Encode(TokenId id) const {
  return weight * WordVector(id) + bias;
}

Eigen::VectorXd SemanticEncoder::Encode(std::string_view token) const {
  return Encode(embedding->vocabulary().IdOf(token));
}

double Similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& p) {
  return CosineSimilarity(std::span<const double>(a.data(), a.size()),
                          std::span<const double>(p.data(), p.size()));
}

double TripletLoss(const Eigen::VectorXd& anchor, const Eigen::VectorXd& pos,
                   const Eigen::VectorXd& neg, double margin) {
  return std::max(0.0, margin - Similarity(anchor, pos) + Similarity(anchor, neg));
}

double TotalLoss(const SupervisionLosses& losses, const JointConfig& config) {
  double total = 0.0;
  for (Supervision s : kAllSupervisions) {
    if (config.active(s)) total += config.lambda(s) * losses[static_cast<int>(s)];
  }
  return total;
}

std::vector<SupervisionRecord> ReadSupervisionFile(
    const std::filesystem::path& path, std::span<const ClipFeatures> features) {
  std::map<std::string, const ClipFeatures*> by_clip;
  for (const ClipFeatures& c : features) by_clip.emplace(c.clip_id, &c);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read supervision file " + path.string());
  std::vector<SupervisionRecord> records;
  std::set<std::string> missing;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    SupervisionRecord r;
    std::string clip_id;
    try {
      const auto j = nlohmann::json::parse(line);
      clip_id = j.at("clip_id").get<std::string>();
      r.track_id = j.at("track_id").get<std::string>();
      r.artist_id = j.at("artist_id").get<std::string>();
      r.tags = j.at("tags").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    const auto it = by_clip.find(clip_id);
    if (it == by_clip.end()) {
      missing.insert(clip_id);
      continue;
    }
    r.clip = *it->second;
    records.push_back(std::move(r));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& c : missing) list += (list.empty() ? "" : ", ") + c;
    throw InvalidArgument("clips without features: " + list);
  }
  return records;
}

JointDataset::JointDataset(std::span<const SupervisionRecord> records,
                           const Vocabulary& vocab) {
  std::set<std::string> missing;
  auto resolve = [&](const std::string& token) -> TokenId {
    if (auto id = vocab.Find(token)) return *id;
    missing.insert(token);
    return -1;
  };
  records_.reserve(records.size());
  for (const SupervisionRecord& r : records) {
    ResolvedRecord out;
    out.features = Eigen::Map<const Eigen::VectorXd>(
        r.clip.vector.data(), static_cast<Eigen::Index>(r.clip.vector.size()));
    for (const std::string& tag : r.tags) out.tags.push_back(resolve(tag));
    out.artist = resolve(r.artist_id);
    out.track = resolve(r.track_id);
    records_.push_back(std::move(out));
  }
  if (!missing.empty()) {
    std::string list;
    for (const std::string& t : missing) list += (list.empty() ? "" : ", ") + t;
    throw InvalidArgument(std::to_string(missing.size()) +
                          " supervision tokens are not in the embedding "
                          "vocabulary: " + list);
  }
  BuildPools();
}

JointDataset::JointDataset(std::vector<ResolvedRecord> records)
    : records_(std::move(records)) {
  BuildPools();
}

void JointDataset::BuildPools() {
  for (const ResolvedRecord& r : records_) {
    if (r.features.size() != records_.front().features.size()) {
      throw InvalidArgument("supervision records have differing feature lengths");
    }
  }
  std::array<std::set<TokenId>, kNumSupervisions> pools;
  for (const ResolvedRecord& r : records_) {
    pools[0].insert(r.tags.begin(), r.tags.end());
    pools[1].insert(r.artist);
    pools[2].insert(r.track);
  }
  for (int s = 0; s < kNumSupervisions; ++s) {
    pools_[s].assign(pools[s].begin(), pools[s].end());
  }
}

int JointDataset::feature_dim() const {
  return records_.empty() ? 0 : static_cast<int>(records_.front().features.size());
}

std::vector<Triplet> SampleTriplets(std::span<const ResolvedRecord> records,
                                    std::span<const std::size_t> batch,
                                    Supervision supervision,
                                    std::span<const TokenId> pool, Rng& rng) {
  if (pool.size() < 2) {
    throw InvalidArgument(std::string(SupervisionName(supervision)) +
                          " prototype pool has " + std::to_string(pool.size()) +
                          " entries, need at least 2");
  }
  std::vector<Triplet> triplets;
  triplets.reserve(batch.size());
  std::vector<TokenId> positives;
  for (std::size_t index : batch) {
    const ResolvedRecord& r = records[index];
    switch (supervision) {
      case Supervision::kTag:
        positives.assign(r.tags.begin(), r.tags.end());
        break;
      case Supervision::kArtist:
        positives.assign(1, r.artist);
        break;
      case Supervision::kTrack:
        positives.assign(1, r.track);
        break;
    }
    if (positives.empty()) continue;
    auto is_positive = [&positives](TokenId id) {
      return std::find(positives.begin(), positives.end(), id) != positives.end();
    };
    const TokenId positive =
        positives.size() == 1 ? positives[0]
                              : positives[UniformIndex(rng, positives.size())];
    // Rejection sampling is uniform over pool \ positives; skip records whose
    // positives cover the whole pool.
    if (std::all_of(pool.begin(), pool.end(), is_positive)) continue;
    TokenId negative;
    do {
      negative = pool[UniformIndex(rng, pool.size())];
    } while (is_positive(negative));
    triplets.push_back({index, positive, negative});
  }
  return triplets;
}

JointGradients JointGradients::ZerosLike(const JointModel& model) {
  JointGradients g;
  g.w1 = Eigen::MatrixXd::Zero(model.audio.w1.rows(), model.audio.w1.cols());
  g.b1 = Eigen::VectorXd::Zero(model.audio.b1.size());
  g.w2 = Eigen::MatrixXd::Zero(model.audio.w2.rows(), model.audio.w2.cols());
  g.b2 = Eigen::VectorXd::Zero(model.audio.b2.size());
  g.weight = Eigen::MatrixXd::Zero(model.semantic.weight.rows(),
                                   model.semantic.weight.cols());
  g.bias = Eigen::VectorXd::Zero(model.semantic.bias.size());
  return g;
}

BatchLoss ComputeBatchLoss(const JointModel& model,
                           std::span<const ResolvedRecord> records,
                           const TripletSet& triplets,
                           const JointConfig& config, JointGradients* grad) {
  std::map<std::size_t, AudioForward> anchors;
  std::map<TokenId, Eigen::VectorXd> prototypes;
  for (Supervision s : kAllSupervisions) {
    if (!config.active(s)) continue;
    for (const Triplet& t : triplets[static_cast<int>(s)]) {
      if (!anchors.count(t.record)) {
        anchors.emplace(t.record, ForwardAudio(model.audio, records[t.record].features));
      }
      for (TokenId id : {t.positive, t.negative}) {
        if (!prototypes.count(id)) prototypes.emplace(id, model.semantic.Encode(id));
      }
    }
  }

  std::map<std::size_t, Eigen::VectorXd> anchor_grads;
  std::map<TokenId, Eigen::VectorXd> prototype_grads;
  auto add = [](auto& m, auto key, const Eigen::VectorXd& g) {
    auto it = m.find(key);
    if (it == m.end()) {
      m.emplace(key, g);
    } else {
      it->second += g;
    }
  };

  BatchLoss loss;
  for (Supervision s : kAllSupervisions) {
    const auto& set = triplets[static_cast<int>(s)];
    if (!config.active(s) || set.empty()) continue;
    const double weight = config.lambda(s) / static_cast<double>(set.size());
    double sum = 0.0;
    for (const Triplet& t : set) {
      const Eigen::VectorXd& a = anchors.at(t.record).output;
      const Eigen::VectorXd& p = prototypes.at(t.positive);
      const Eigen::VectorXd& n = prototypes.at(t.negative);
      const double na = a.norm(), np = p.norm(), nn = n.norm();
      if (na == 0.0 || np == 0.0 || nn == 0.0) {
        throw InvalidArgument("zero-norm vector");
      }
      const double sim_pos = std::clamp(a.dot(p) / (na * np), -1.0, 1.0);
      const double sim_neg = std::clamp(a.dot(n) / (na * nn), -1.0, 1.0);
      const double hinge = config.margin - sim_pos + sim_neg;
      if (hinge <= 0.0) continue;
      sum += hinge;
      if (!grad) continue;
      add(anchor_grads, t.record,
          weight * (CosineGradient(a, na, n, nn, sim_neg) -
                    CosineGradient(a, na, p, np, sim_pos)));
      add(prototype_grads, t.positive, -weight * CosineGradient(p, np, a, na, sim_pos));
      add(prototype_grads, t.negative, weight * CosineGradient(n, nn, a, na, sim_neg));
    }
    loss.terms[static_cast<int>(s)] = sum / static_cast<double>(set.size());
  }
  loss.total = TotalLoss(loss.terms, config);

  if (grad) {
    *grad = JointGradients::ZerosLike(model);
    for (const auto& [index, d_out] : anchor_grads) {
      const AudioForward& f = anchors.at(index);
      grad->w2.noalias() += d_out * f.hidden.transpose();
      grad->b2 += d_out;
      const Eigen::VectorXd d_pre =
          ((model.audio.w2.transpose() * d_out).array() *
           (1.0 - f.hidden.array().square()))
              .matrix();
      grad->w1.noalias() += d_pre * records[index].features.transpose();
      grad->b1 += d_pre;
    }
    for (const auto& [id, d_out] : prototype_grads) {
      grad->weight.noalias() += d_out * model.semantic.WordVector(id).transpose();
      grad->bias += d_out;
    }
  }
  return loss;
}

JointTrainingResult TrainJoint(
    const JointDataset& dataset, std::shared_ptr<const WordEmbedding> embedding,
    const JointConfig& config,
    const std::function<void(int epoch, double loss)>& on_epoch) {
  config.Validate();
  if (dataset.size() == 0) throw InvalidArgument("empty supervision dataset");
  if (!embedding) throw InvalidArgument("joint training needs an embedding");
  for (Supervision s : kAllSupervisions) {
    if (config.active(s) && dataset.pool(s).size() < 2) {
      throw InvalidArgument(std::string(SupervisionName(s)) +
                            " prototype pool has fewer than 2 entries");
    }
    for (TokenId id : dataset.pool(s)) {
      if (id < 0 || static_cast<std::size_t>(id) >= embedding->size()) {
        throw InvalidArgument("supervision token id out of embedding range");
      }
    }
  }

  const std::uint64_t checksum = embedding->Checksum();
  Rng init_rng(DeriveSeed(config.seed, "joint-init"));
  JointTrainingResult result;
  result.model.audio = AudioEncoder::Create(dataset.feature_dim(), config.hidden,
                                            config.joint_dim, init_rng);
  result.model.semantic =
      SemanticEncoder::Create(std::move(embedding), config.joint_dim, init_rng);
  JointModel& model = result.model;

  JointGradients grad = JointGradients::ZerosLike(model);
  JointGradients velocity = JointGradients::ZerosLike(model);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(DeriveSeed(config.seed, "joint-train"));
  const auto& records = dataset.records();
  std::uint64_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      TripletSet triplets;
      for (Supervision s : kAllSupervisions) {
        if (!config.active(s)) continue;
        triplets[static_cast<int>(s)] =
            SampleTriplets(records, batch, s, dataset.pool(s), rng);
      }
      const BatchLoss loss = ComputeBatchLoss(model, records, triplets, config, &grad);
      const double lr = config.learning_rate / (1.0 + config.lr_decay * step);
      ForEachBlock(model, grad, velocity, [&](auto& param, auto& g, auto& v) {
        v = config.momentum * v - lr * g;
        if (config.nesterov) {
          param += config.momentum * v - lr * g;
        } else {
          param += v;
        }
      });
      ++step;
      epoch_loss += loss.total;
      ++batches;
    }
    const double mean = epoch_loss / static_cast<double>(batches);
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  if (model.semantic.embedding->Checksum() != checksum) {
    throw Error("word embedding changed during joint training");
  }
  return result;
}

Eigen::VectorXd TrackEmbedding(const AudioEncoder& encoder,
                               std::span<const ClipFeatures> clips) {
  if (clips.empty()) throw InvalidArgument("track has no clips");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(encoder.joint_dim());
  for (const ClipFeatures& clip : clips) sum += encoder.Encode(clip.vector);
  return sum / static_cast<double>(clips.size());
}

JointModel Checkpoint::Bind(std::shared_ptr<const WordEmbedding> embedding) const {
  if (!embedding) throw InvalidArgument("checkpoint needs an embedding");
  if (weight.cols() != static_cast<Eigen::Index>(embedding->dim())) {
    throw InvalidArgument("checkpoint expects word dimension " +
                          std::to_string(weight.cols()) + ", embedding has " +
                          std::to_string(embedding->dim()));
  }
  JointModel model;
  model.audio = audio;
  model.semantic.embedding = std::move(embedding);
  model.semantic.weight = weight;
  model.semantic.bias = bias;
  return model;
}

void SaveCheckpoint(const std::filesystem::path& path, const JointModel& model,
                    const JointConfig& config,
                    const std::string& embedding_path) {
  char checksum[17];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(model.semantic.embedding->Checksum()));
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = 1;
  j["config"] = ToJson(config);
  j["embedding"] = {{"path", embedding_path},
                    {"checksum", checksum},
                    {"dim", model.semantic.embedding->dim()},
                    {"size", model.semantic.embedding->size()}};
  j["audio"] = {{"w1", MatrixToJson(model.audio.w1)},
                {"b1", VectorToJson(model.audio.b1)},
                {"w2", MatrixToJson(model.audio.w2)},
                {"b2", VectorToJson(model.audio.b2)}};
  j["semantic"] = {{"weight", MatrixToJson(model.semantic.weight)},
                   {"bias", VectorToJson(model.semantic.bias)}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  Checkpoint cp;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw ParseError(path.string(), 0, "not a joint-model checkpoint");
    }
    FromJson(j.at("config"), cp.config);
    cp.embedding_path = j.at("embedding").at("path").get<std::string>();
    cp.embedding_checksum = std::stoull(
        j.at("embedding").at("checksum").get<std::string>(), nullptr, 16);
    const auto& audio = j.at("audio");
    cp.audio.w1 = MatrixFromJson(audio.at("w1"));
    cp.audio.b1 = VectorFromJson(audio.at("b1"));
    cp.audio.w2 = MatrixFromJson(audio.at("w2"));
    cp.audio.b2 = VectorFromJson(audio.at("b2"));
    cp.weight = MatrixFromJson(j.at("semantic").at("weight"));
    cp.bias = VectorFromJson(j.at("semantic").at("bias"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  const bool shapes_ok =
      cp.audio.b1.size() == cp.audio.w1.rows() &&
      cp.audio.w2.cols() == cp.audio.w1.rows() &&
      cp.audio.b2.size() == cp.audio.w2.rows() &&
      cp.weight.rows() == cp.audio.w2.rows() && cp.bias.size() == cp.weight.rows();
  if (!shapes_ok) throw ParseError(path.string(), 0, "inconsistent parameter shapes");
  return cp;
}

}  // namespace mwe
