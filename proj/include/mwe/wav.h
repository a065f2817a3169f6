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

#ifndef MWE_WAV_H_
#define MWE_WAV_H_

#include <filesystem>
#include <vector>

namespace mwe {

struct Audio {
  int sample_rate = 0;
  std::vector<float> samples;  // mono, nominally in [-1, 1]
};

// Reads RIFF/WAVE with 16-bit integer or 32-bit float PCM. Multi-channel
// input is averaged to mono.
Audio ReadWav(const std::filesystem::path& path);

// Reads a WAV file and rejects any sample rate other than `sample_rate`;
// resampling is not supported.
Audio ReadWavAt(const std::filesystem::path& path, int sample_rate);

// Writes mono 16-bit PCM.
void WriteWav16(const std::filesystem::path& path, const Audio& audio);

}  // namespace mwe

#endif  // MWE_WAV_H_
