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

// Run configuration shared by every subcommand: one JSON file, overlaid by
// command-line flags.
#ifndef MWE_TOOLS_RUN_CONFIG_H_
#define MWE_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mwe/corpus.h"
#include "mwe/features.h"
#include "mwe/joint.h"
#include "mwe/sgns.h"

namespace mwe::cli {

struct RunPaths {
  std::string general_corpus;
  std::string music_corpus;
  std::string corpus_dir;
  std::string embedding;
  std::string features;
  std::string supervision;
  std::string annotations;
  std::string tag_metadata;
  std::string checkpoint;
  std::string audio_list;  // TSV clip_id, track_id, wav path
};

struct EvalOptions {
  std::string source = "word";  // "word" or "joint"
  std::size_t k = 30;           // nDCG cutoff for tag-rank
  std::vector<std::size_t> recall_ks = {1, 5, 10};
  std::string track_split = "all";  // all, train, valid or test
};

struct ExtractOptions {
  double excerpt_seconds = 0.0;  // 0 keeps the whole file
};

struct RunConfig {
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out = ".";
  RunPaths paths;
  CorpusConfig corpus;
  SgnsConfig sgns;
  MelConfig mel;
  JointConfig joint;
  EvalOptions eval;
  ExtractOptions extract;

  // Stage seeds and worker counts follow the top-level values.
  void Propagate();
  nlohmann::json ToJson() const;
};

// Overlays `j` onto `config`. Unknown keys, wrong types and out-of-range
// values throw InvalidArgument naming the key.
void ApplyJson(const nlohmann::json& j, RunConfig& config);
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Throws InvalidArgument naming `key` when `value` is empty or the path does
// not exist.
std::filesystem::path RequireFile(const std::string& value, std::string_view key);
std::filesystem::path RequireDirectory(const std::string& value, std::string_view key);

}  // namespace mwe::cli

#endif  // MWE_TOOLS_RUN_CONFIG_H_
