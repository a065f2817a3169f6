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

#ifndef MWE_CONFIG_IO_H_
#define MWE_CONFIG_IO_H_

#include "json.hpp"
#include "mwe/corpus.h"
#include "mwe/features.h"
#include "mwe/joint.h"
#include "mwe/sgns.h"

namespace mwe {

// JSON echo of each stage config. The readers overlay `j` onto the existing
// values, reject unknown keys and wrongly typed values with InvalidArgument
// (naming `prefix.key`), and validate the result.
nlohmann::json ToJson(const CorpusConfig& config);
nlohmann::json ToJson(const SgnsConfig& config);
nlohmann::json ToJson(const MelConfig& config);
nlohmann::json ToJson(const JointConfig& config);

void FromJson(const nlohmann::json& j, CorpusConfig& config,
              std::string_view prefix = "corpus");
void FromJson(const nlohmann::json& j, SgnsConfig& config,
              std::string_view prefix = "sgns");
void FromJson(const nlohmann::json& j, MelConfig& config,
              std::string_view prefix = "mel");
void FromJson(const nlohmann::json& j, JointConfig& config,
              std::string_view prefix = "joint");

}  // namespace mwe

#endif  // MWE_CONFIG_IO_H_
