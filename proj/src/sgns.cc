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

#include "mwe/sgns.h"

#include <algorithm>
#include <atomic>
#include <thread>

#include "mwe/errors.h"

namespace mwe {
namespace {

constexpr double kSigmoidClamp = 700.0;
// Workers publish progress to the shared counter in chunks of this many pairs.
constexpr std::uint64_t kProgressChunk = 256;

double LearningRate(const SgnsConfig& config, std::uint64_t processed,
                    std::uint64_t total) {
  const double progress =
      std::min(1.0, static_cast<double>(processed) / static_cast<double>(total));
  return config.initial_lr * (1.0 - (1.0 - config.final_lr_fraction) * progress);
}

}  // namespace

void SgnsConfig::Validate() const {
  if (dim < 1) throw InvalidArgument("sgns.dim must be >= 1");
  if (epochs < 1) throw InvalidArgument("sgns.epochs must be >= 1");
  if (negatives < 1) throw InvalidArgument("sgns.negatives must be >= 1");
  if (!(initial_lr > 0.0)) throw InvalidArgument("sgns.initial_lr must be > 0");
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) {
    throw InvalidArgument("sgns.final_lr_fraction must be in (0, 1]");
  }
  if (!std::isfinite(ns_exponent)) {
    throw InvalidArgument("sgns.ns_exponent must be finite");
  }
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
}

double Sigmoid(double x) {
  x = std::clamp(x, -kSigmoidClamp, kSigmoidClamp);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double LogSigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

NegativeSampler::NegativeSampler(const Vocabulary& vocab, double exponent,
                                 KindSet allowed) {
  if (vocab.empty()) throw InvalidArgument("negative sampler over empty vocabulary");
  cumulative_.resize(vocab.size());
  double total = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const VocabEntry& e = vocab.entry(static_cast<TokenId>(i));
    if (allowed.contains(e.kind) && e.count > 0) {
      total += std::pow(static_cast<double>(e.count), exponent);
    }
    cumulative_[i] = total;
  }
  if (!(total > 0.0)) {
    throw InvalidArgument("negative sampler has no token with nonzero mass");
  }
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
}

TokenId NegativeSampler::Sample(Rng& rng) const {
  const double u = UniformUnit(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  // u < 1 == back(), so `it` is always dereferenceable.
  return static_cast<TokenId>(it - cumulative_.begin());
}

double NegativeSampler::probability(TokenId id) const {
  const auto i = static_cast<std::size_t>(id);
  return i == 0 ? cumulative_[0] : cumulative_[i] - cumulative_[i - 1];
}

EmbeddingMatrix<float> InitEmbeddingMatrix(std::size_t rows, std::size_t dim,
                                           std::uint64_t seed) {
  EmbeddingMatrix<float> model(rows, dim);
  Rng rng(DeriveSeed(seed, "sgns-init"));
  const double half = 0.5 / static_cast<double>(dim);
  std::uniform_real_distribution<double> dist(-half, half);
  for (float& v : model.input) v = static_cast<float>(dist(rng));
  return model;
}

SgnsResult TrainSgns(const PairStream& pairs, std::size_t vocab_size,
                     const NegativeSampler& sampler, const SgnsConfig& config,
                     const EpochCallback& on_epoch) {
  config.Validate();
  if (sampler.size() != vocab_size) {
    throw InvalidArgument("negative sampler does not match vocabulary size");
  }
  const std::size_t shards = pairs.num_shards();

  // Counting pass: the lr schedule is linear in processed pairs, so the total
  // must be known up front. Each pass is deterministic, so this is exact.
  std::uint64_t total = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t s = 0; s < shards; ++s) {
      pairs.VisitShard(epoch, s, [&total](TokenId, TokenId) { ++total; });
    }
  }
  if (total == 0) throw InvalidArgument("empty corpus");

  SgnsResult result;
  result.model = InitEmbeddingMatrix(vocab_size, config.dim, config.seed);
  result.total_pairs = total;

  std::atomic<std::uint64_t> processed{0};
  const int workers =
      static_cast<int>(std::min<std::size_t>(config.workers, shards));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<double> loss_sum(workers, 0.0);
    std::vector<std::uint64_t> pair_count(workers, 0);

    auto run_worker = [&](int worker) {
      SgnsWorkspace<float> ws;
      std::vector<TokenId> negatives(config.negatives);
      std::uint64_t local = 0;
      float lr = static_cast<float>(
          LearningRate(config, processed.load(std::memory_order_relaxed), total));
      for (std::size_t s = worker; s < shards; s += workers) {
        Rng rng(DeriveSeed(config.seed, "sgns-negatives",
                           static_cast<std::uint64_t>(epoch) * shards + s));
        pairs.VisitShard(epoch, s, [&](TokenId center, TokenId context) {
          for (TokenId& n : negatives) n = sampler.Sample(rng);
          loss_sum[worker] +=
              SgnsStep<float>(center, context, negatives, lr, result.model, ws);
          ++pair_count[worker];
          if (++local == kProgressChunk) {
            const auto now =
                processed.fetch_add(local, std::memory_order_relaxed) + local;
            local = 0;
            lr = static_cast<float>(LearningRate(config, now, total));
          }
        });
      }
      processed.fetch_add(local, std::memory_order_relaxed);
    };

    if (workers == 1) {
      run_worker(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(workers);
      for (int w = 0; w < workers; ++w) threads.emplace_back(run_worker, w);
      for (std::thread& t : threads) t.join();
    }

    double epoch_loss = 0.0;
    std::uint64_t epoch_pairs = 0;
    for (int w = 0; w < workers; ++w) {
      epoch_loss += loss_sum[w];
      epoch_pairs += pair_count[w];
    }
    const double mean = epoch_pairs ? epoch_loss / epoch_pairs : 0.0;
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace mwe
