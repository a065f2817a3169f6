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

#ifndef MWE_SGNS_H_
#define MWE_SGNS_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mwe/corpus.h"
#include "mwe/random.h"

namespace mwe {

struct SgnsConfig {
  int dim = 300;
  int epochs = 15;
  int negatives = 20;
  double initial_lr = 0.025;
  // The learning rate decays linearly to initial_lr * final_lr_fraction.
  double final_lr_fraction = 1e-4 / 0.025;
  double ns_exponent = 0.75;
  std::uint64_t seed = 1;
  int workers = 1;

  void Validate() const;
};

// Paired input (W) and output (C) vector tables, row-major |V| x dim. W is the
// published word embedding.
template <typename Real>
struct EmbeddingMatrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<Real> input;
  std::vector<Real> output;

  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows_in, std::size_t dim_in)
      : rows(rows_in),
        dim(dim_in),
        input(rows_in * dim_in, Real(0)),
        output(rows_in * dim_in, Real(0)) {}

  std::span<Real> input_row(TokenId id) {
    return {input.data() + static_cast<std::size_t>(id) * dim, dim};
  }
  std::span<const Real> input_row(TokenId id) const {
    return {input.data() + static_cast<std::size_t>(id) * dim, dim};
  }
  std::span<Real> output_row(TokenId id) {
    return {output.data() + static_cast<std::size_t>(id) * dim, dim};
  }
  std::span<const Real> output_row(TokenId id) const {
    return {output.data() + static_cast<std::size_t>(id) * dim, dim};
  }

  bool AllFinite() const {
    for (Real v : input) if (!std::isfinite(v)) return false;
    for (Real v : output) if (!std::isfinite(v)) return false;
    return true;
  }
};

// 1 / (1 + exp(-x)), with |x| clamped to 700.
double Sigmoid(double x);
// log(sigmoid(x)) without overflow.
double LogSigmoid(double x);

// Noise distribution over token ids with mass proportional to count^exponent.
// Tokens whose kind is not in `allowed` get zero mass.
class NegativeSampler {
 public:
  NegativeSampler(const Vocabulary& vocab, double exponent,
                  KindSet allowed = KindSet::All());

  TokenId Sample(Rng& rng) const;
  double probability(TokenId id) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;  // normalized, last entry == 1
};

// Per-thread scratch space for SgnsStep.
template <typename Real>
struct SgnsWorkspace {
  std::vector<Real> grad_input;
  std::vector<Real> coefficients;
};

// One SGD step on the negative-sampling loss
//   -log sigmoid(W_c . C_o) - sum_n log sigmoid(-W_c . C_n).
// All coefficients are computed from the parameters before the update, so the
// step is exactly -lr times the gradient even when negatives repeat or equal
// the context. Returns the loss before the update.
template <typename Real>
Real SgnsStep(TokenId center, TokenId context,
              std::span<const TokenId> negatives, Real lr,
              EmbeddingMatrix<Real>& model, SgnsWorkspace<Real>& ws) {
  const std::size_t d = model.dim;
  auto w = model.input_row(center);
  ws.grad_input.assign(d, Real(0));
  ws.coefficients.resize(negatives.size() + 1);

  auto dot = [d](std::span<const Real> a, std::span<const Real> b) {
    Real s = 0;
    for (std::size_t i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
  };
  auto accumulate = [&](Real g, std::span<const Real> c) {
    for (std::size_t i = 0; i < d; ++i) ws.grad_input[i] += g * c[i];
  };

  double loss = 0.0;
  {
    const Real score = dot(w, model.output_row(context));
    const Real g = static_cast<Real>(Sigmoid(score) - 1.0);
    ws.coefficients[0] = g;
    loss -= LogSigmoid(score);
    accumulate(g, model.output_row(context));
  }
  for (std::size_t n = 0; n < negatives.size(); ++n) {
    const Real score = dot(w, model.output_row(negatives[n]));
    const Real g = static_cast<Real>(Sigmoid(score));
    ws.coefficients[n + 1] = g;
    loss -= LogSigmoid(-score);
    accumulate(g, model.output_row(negatives[n]));
  }

  auto apply = [&](TokenId id, Real g) {
    auto c = model.output_row(id);
    for (std::size_t i = 0; i < d; ++i) c[i] -= lr * g * w[i];
  };
  // W must not change until every output row has been updated with its old
  // value, so W is updated last.
  if (lr != Real(0)) {
    apply(context, ws.coefficients[0]);
    for (std::size_t n = 0; n < negatives.size(); ++n) {
      apply(negatives[n], ws.coefficients[n + 1]);
    }
    for (std::size_t i = 0; i < d; ++i) w[i] -= lr * ws.grad_input[i];
  }
  return static_cast<Real>(loss);
}

template <typename Real>
Real SgnsStep(TokenId center, TokenId context,
              std::span<const TokenId> negatives, Real lr,
              EmbeddingMatrix<Real>& model) {
  SgnsWorkspace<Real> ws;
  return SgnsStep(center, context, negatives, lr, model, ws);
}

// W uniform in [-0.5/d, 0.5/d], C zero.
EmbeddingMatrix<float> InitEmbeddingMatrix(std::size_t rows, std::size_t dim,
                                           std::uint64_t seed);

struct SgnsResult {
  EmbeddingMatrix<float> model;
  // Mean pair loss per epoch.
  std::vector<double> epoch_loss;
  std::uint64_t total_pairs = 0;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

// Trains with Hogwild-style workers: each worker owns the shards congruent to
// its index and updates W and C without locks. With one worker the result is
// a pure function of the inputs and the seed. Throws InvalidArgument("empty
// corpus") when the stream produces no pairs.
SgnsResult TrainSgns(const PairStream& pairs, std::size_t vocab_size,
                     const NegativeSampler& sampler, const SgnsConfig& config,
                     const EpochCallback& on_epoch = {});

}  // namespace mwe

#endif  // MWE_SGNS_H_
