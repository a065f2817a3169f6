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

#include "mwe/config_io.h"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "mwe/errors.h"

namespace mwe {
namespace {

// Reads `j[key]` into `out` if present.
class FieldReader {
 public:
  FieldReader(const nlohmann::json& j, std::string_view prefix)
      : j_(j), prefix_(prefix) {
    if (!j.is_object()) {
      throw InvalidArgument("config section '" + prefix_ + "' must be an object");
    }
  }

  template <typename T>
  void Read(const char* key, T& out) {
    known_.push_back(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("bool");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw std::invalid_argument("integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("number");
      }
      out = it->get<T>();
    } catch (const std::exception&) {
      throw InvalidArgument("config key '" + prefix_ + "." + key +
                            "' has the wrong type");
    }
  }

  template <typename Enum, typename Parse>
  void ReadEnum(const char* key, Enum& out, Parse parse) {
    std::string name;
    const bool present = j_.contains(key);
    Read(key, name);
    if (present) out = parse(name);
  }

  // Rejects keys that were never requested.
  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(known_.begin(), known_.end(), key) == known_.end()) {
        throw InvalidArgument("unknown config key '" + prefix_ + "." + key + "'");
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string prefix_;
  std::vector<std::string> known_;
};

}  // namespace

nlohmann::json ToJson(const CorpusConfig& c) {
  return {{"window_size", c.window_size},
          {"dynamic_window", c.dynamic_window},
          {"review_repeat", c.review_repeat},
          {"min_count", c.min_count},
          {"subsample_threshold", c.subsample_threshold},
          {"shuffle_mode", ShuffleModeName(c.shuffle_mode)}};
}

nlohmann::json ToJson(const SgnsConfig& c) {
  return {{"dim", c.dim},
          {"epochs", c.epochs},
          {"negatives", c.negatives},
          {"initial_lr", c.initial_lr},
          {"final_lr_fraction", c.final_lr_fraction},
          {"ns_exponent", c.ns_exponent},
          {"seed", c.seed},
          {"workers", c.workers}};
}

nlohmann::json ToJson(const MelConfig& c) {
  return {{"sample_rate", c.sample_rate},
          {"fft_size", c.fft_size},
          {"hop", c.hop},
          {"mel_bins", c.mel_bins},
          {"log_floor", c.log_floor}};
}

nlohmann::json ToJson(const JointConfig& c) {
  return {{"joint_dim", c.joint_dim},
          {"hidden", c.hidden},
          {"margin", c.margin},
          {"lambda_tag", c.lambda_tag},
          {"lambda_artist", c.lambda_artist},
          {"lambda_track", c.lambda_track},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"momentum", c.momentum},
          {"nesterov", c.nesterov},
          {"lr_decay", c.lr_decay},
          {"seed", c.seed}};
}

void FromJson(const nlohmann::json& j, CorpusConfig& c, std::string_view prefix) {
  FieldReader r(j, prefix);
  r.Read("window_size", c.window_size);
  r.Read("dynamic_window", c.dynamic_window);
  r.Read("review_repeat", c.review_repeat);
  r.Read("min_count", c.min_count);
  r.Read("subsample_threshold", c.subsample_threshold);
  r.ReadEnum("shuffle_mode", c.shuffle_mode, ParseShuffleMode);
  r.Finish();
  c.Validate();
}

void FromJson(const nlohmann::json& j, SgnsConfig& c, std::string_view prefix) {
  FieldReader r(j, prefix);
  r.Read("dim", c.dim);
  r.Read("epochs", c.epochs);
  r.Read("negatives", c.negatives);
  r.Read("initial_lr", c.initial_lr);
  r.Read("final_lr_fraction", c.final_lr_fraction);
  r.Read("ns_exponent", c.ns_exponent);
  r.Read("seed", c.seed);
  r.Read("workers", c.workers);
  r.Finish();
  c.Validate();
}

void FromJson(const nlohmann::json& j, MelConfig& c, std::string_view prefix) {
  FieldReader r(j, prefix);
  r.Read("sample_rate", c.sample_rate);
  r.Read("fft_size", c.fft_size);
  r.Read("hop", c.hop);
  r.Read("mel_bins", c.mel_bins);
  r.Read("log_floor", c.log_floor);
  r.Finish();
  c.Validate();
}

void FromJson(const nlohmann::json& j, JointConfig& c, std::string_view prefix) {
  FieldReader r(j, prefix);
  r.Read("joint_dim", c.joint_dim);
  r.Read("hidden", c.hidden);
  r.Read("margin", c.margin);
  r.Read("lambda_tag", c.lambda_tag);
  r.Read("lambda_artist", c.lambda_artist);
  r.Read("lambda_track", c.lambda_track);
  r.Read("batch_size", c.batch_size);
  r.Read("epochs", c.epochs);
  r.Read("learning_rate", c.learning_rate);
  r.Read("momentum", c.momentum);
  r.Read("nesterov", c.nesterov);
  r.Read("lr_decay", c.lr_decay);
  r.Read("seed", c.seed);
  r.Finish();
  c.Validate();
}

}  // namespace mwe
