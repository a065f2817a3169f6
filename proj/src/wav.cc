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

#include "mwe/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "mwe/errors.h"

namespace mwe {
namespace {

std::uint32_t ReadU32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutU16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace

Audio ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::string source = path.string();
  if (bytes.size() < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw ParseError(source, 0, "not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* samples = nullptr;
  std::size_t sample_bytes = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = data + pos;
    const std::size_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw ParseError(source, 0, "truncated fmt chunk");
      format = ReadU16(data + body);
      channels = ReadU16(data + body + 2);
      rate = ReadU32(data + body + 4);
      bits = ReadU16(data + body + 14);
      if (format == kFormatExtensible && avail >= 26) {
        format = ReadU16(data + body + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      samples = data + body;
      sample_bytes = avail;
    }
    pos = body + size + (size & 1);
  }
  if (channels == 0 || rate == 0) throw ParseError(source, 0, "missing fmt chunk");
  if (!samples) throw ParseError(source, 0, "missing data chunk");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw ParseError(source, 0,
                     "unsupported sample format (need 16-bit PCM or 32-bit float)");
  }
  const std::size_t width = bits / 8;
  const std::size_t frames = sample_bytes / (width * channels);

  Audio audio;
  audio.sample_rate = static_cast<int>(rate);
  audio.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = samples + (i * channels + c) * width;
      if (pcm16) {
        sum += static_cast<std::int16_t>(ReadU16(p)) / 32768.0;
      } else {
        const std::uint32_t raw = ReadU32(p);
        float f;
        std::memcpy(&f, &raw, sizeof(f));
        sum += f;
      }
    }
    audio.samples[i] = static_cast<float>(sum / channels);
  }
  return audio;
}

Audio ReadWavAt(const std::filesystem::path& path, int sample_rate) {
  Audio audio = ReadWav(path);
  if (audio.sample_rate != sample_rate) {
    throw InvalidArgument(path.string() + ": sample rate " +
                          std::to_string(audio.sample_rate) + " Hz, expected " +
                          std::to_string(sample_rate) +
                          " Hz (resampling is not supported)");
  }
  return audio;
}

void WriteWav16(const std::filesystem::path& path, const Audio& audio) {
  std::string out;
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(audio.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (float s : audio.samples) {
    const double clamped = std::clamp(static_cast<double>(s), -1.0, 32767.0 / 32768.0);
    PutU16(out, static_cast<std::uint16_t>(
                    static_cast<std::int16_t>(std::lround(clamped * 32768.0))));
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("write failed: " + path.string());
}

}  // namespace mwe
