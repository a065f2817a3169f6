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

#include "run_config.h"

#include <algorithm>
#include <fstream>

#include "mwe/config_io.h"
#include "mwe/errors.h"
#include "mwe/random.h"

namespace mwe::cli {
namespace {

void RejectUnknown(const nlohmann::json& j, std::string_view prefix,
                   std::initializer_list<std::string_view> known) {
  if (!j.is_object()) {
    throw InvalidArgument("config section '" + std::string(prefix) +
                          "' must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidArgument("unknown config key '" +
                            (prefix.empty() ? "" : std::string(prefix) + ".") + key + "'");
    }
  }
}

template <typename T>
void ReadKey(const nlohmann::json& j, const char* key, std::string_view prefix, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  const std::string name = (prefix.empty() ? "" : std::string(prefix) + ".") + key;
  bool ok;
  if constexpr (std::is_same_v<T, std::string>) {
    ok = it->is_string();
  } else if constexpr (std::is_integral_v<T>) {
    ok = it->is_number_integer() && !(std::is_unsigned_v<T> && it->get<std::int64_t>() < 0);
  } else if constexpr (std::is_floating_point_v<T>) {
    ok = it->is_number();
  } else {
    ok = it->is_array() && std::all_of(it->begin(), it->end(), [](const auto& v) {
           return v.is_number_integer() && v.template get<std::int64_t>() > 0;
         });
  }
  if (!ok) throw InvalidArgument("config key '" + name + "' has the wrong type");
  out = it->get<T>();
}

// The stage seeds derive from the top-level seed, so they may not be set
// per section.
nlohmann::json WithoutGlobals(const nlohmann::json& section, std::string_view prefix) {
  for (const char* key : {"seed", "workers"}) {
    if (section.is_object() && section.contains(key)) {
      throw InvalidArgument("config key '" + std::string(prefix) + "." + key +
                            "' is not allowed; set the top-level '" + key + "'");
    }
  }
  return section;
}

}  // namespace

void RunConfig::Propagate() {
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  sgns.seed = DeriveSeed(seed, "train-word");
  sgns.workers = workers;
  joint.seed = DeriveSeed(seed, "train-joint");
}

nlohmann::json RunConfig::ToJson() const {
  auto strip = [](nlohmann::json j) {
    j.erase("seed");
    j.erase("workers");
    return j;
  };
  return {{"seed", seed},
          {"workers", workers},
          {"out", out},
          {"paths",
           {{"general_corpus", paths.general_corpus},
            {"music_corpus", paths.music_corpus},
            {"corpus_dir", paths.corpus_dir},
            {"embedding", paths.embedding},
            {"features", paths.features},
            {"supervision", paths.supervision},
            {"annotations", paths.annotations},
            {"tag_metadata", paths.tag_metadata},
            {"checkpoint", paths.checkpoint},
            {"audio_list", paths.audio_list}}},
          {"corpus", mwe::ToJson(corpus)},
          {"sgns", strip(mwe::ToJson(sgns))},
          {"mel", mwe::ToJson(mel)},
          {"joint", strip(mwe::ToJson(joint))},
          {"eval",
           {{"source", eval.source},
            {"k", eval.k},
            {"recall_ks", eval.recall_ks},
            {"track_split", eval.track_split}}},
          {"extract", {{"excerpt_seconds", extract.excerpt_seconds}}}};
}

void ApplyJson(const nlohmann::json& j, RunConfig& c) {
  RejectUnknown(j, "", {"seed", "workers", "out", "paths", "corpus", "sgns", "mel",
                        "joint", "eval", "extract"});
  ReadKey(j, "seed", "", c.seed);
  ReadKey(j, "workers", "", c.workers);
  ReadKey(j, "out", "", c.out);
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    RejectUnknown(p, "paths", {"general_corpus", "music_corpus", "corpus_dir", "embedding",
                               "features", "supervision", "annotations", "tag_metadata",
                               "checkpoint", "audio_list"});
    ReadKey(p, "general_corpus", "paths", c.paths.general_corpus);
    ReadKey(p, "music_corpus", "paths", c.paths.music_corpus);
    ReadKey(p, "corpus_dir", "paths", c.paths.corpus_dir);
    ReadKey(p, "embedding", "paths", c.paths.embedding);
    ReadKey(p, "features", "paths", c.paths.features);
    ReadKey(p, "supervision", "paths", c.paths.supervision);
    ReadKey(p, "annotations", "paths", c.paths.annotations);
    ReadKey(p, "tag_metadata", "paths", c.paths.tag_metadata);
    ReadKey(p, "checkpoint", "paths", c.paths.checkpoint);
    ReadKey(p, "audio_list", "paths", c.paths.audio_list);
  }
  if (j.contains("corpus")) FromJson(j["corpus"], c.corpus);
  if (j.contains("sgns")) FromJson(WithoutGlobals(j["sgns"], "sgns"), c.sgns);
  if (j.contains("mel")) FromJson(j["mel"], c.mel);
  if (j.contains("joint")) FromJson(WithoutGlobals(j["joint"], "joint"), c.joint);
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    RejectUnknown(e, "eval", {"source", "k", "recall_ks", "track_split"});
    ReadKey(e, "source", "eval", c.eval.source);
    ReadKey(e, "k", "eval", c.eval.k);
    ReadKey(e, "recall_ks", "eval", c.eval.recall_ks);
    ReadKey(e, "track_split", "eval", c.eval.track_split);
  }
  if (j.contains("extract")) {
    const auto& e = j["extract"];
    RejectUnknown(e, "extract", {"excerpt_seconds"});
    ReadKey(e, "excerpt_seconds", "extract", c.extract.excerpt_seconds);
  }
  if (c.eval.source != "word" && c.eval.source != "joint") {
    throw InvalidArgument("eval.source must be 'word' or 'joint'");
  }
  if (c.eval.k < 1) throw InvalidArgument("eval.k must be >= 1");
  const auto& split = c.eval.track_split;
  if (split != "all" && split != "train" && split != "valid" && split != "test") {
    throw InvalidArgument("eval.track_split must be all, train, valid or test");
  }
  if (c.extract.excerpt_seconds < 0) {
    throw InvalidArgument("extract.excerpt_seconds must be >= 0");
  }
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  RunConfig config;
  ApplyJson(j, config);
  return config;
}

std::filesystem::path RequireFile(const std::string& value, std::string_view key) {
  if (value.empty()) {
    throw InvalidArgument("missing required path '" + std::string(key) + "'");
  }
  if (!std::filesystem::is_regular_file(value)) {
    throw InvalidArgument(std::string(key) + " '" + value + "' does not exist");
  }
  return value;
}

std::filesystem::path RequireDirectory(const std::string& value, std::string_view key) {
  if (value.empty()) {
    throw InvalidArgument("missing required path '" + std::string(key) + "'");
  }
  if (!std::filesystem::is_directory(value)) {
    throw InvalidArgument(std::string(key) + " '" + value + "' is not a directory");
  }
  return value;
}

}  // namespace mwe::cli
