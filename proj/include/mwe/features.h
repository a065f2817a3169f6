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

#ifndef MWE_FEATURES_H_
#define MWE_FEATURES_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mwe/random.h"

namespace mwe {

struct MelConfig {
  int sample_rate = 22050;
  int fft_size = 1024;
  int hop = 512;
  int mel_bins = 128;
  double log_floor = 1e-10;

  void Validate() const;
};

double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filters with unit peak on the mel(f) = 2595 log10(1 + f/700)
// scale, from 0 Hz to sample_rate / 2. Adjacent triangles sum to 1 between
// their centers.
class MelFilterbank {
 public:
  explicit MelFilterbank(const MelConfig& config);

  // mel_bins x (fft_size / 2 + 1).
  const Eigen::MatrixXd& weights() const { return weights_; }
  // Center frequency (Hz) of each filter.
  const std::vector<double>& centers() const { return centers_; }
  // Frequency (Hz) of FFT bin k.
  double bin_frequency(std::size_t k) const;

 private:
  MelConfig config_;
  Eigen::MatrixXd weights_;
  std::vector<double> centers_;
};

// 1 + floor((n - fft_size) / hop) for n >= fft_size, else 0.
std::size_t FrameCount(std::size_t num_samples, const MelConfig& config);

// frames x mel_bins matrix of ln(mel_power + log_floor), using a periodic
// Hann window and no padding. Throws InvalidArgument when the input is
// shorter than one frame or contains non-finite samples.
Eigen::MatrixXd LogMelSpectrogram(std::span<const float> pcm,
                                  const MelConfig& config);

// A contiguous floor(seconds * sample_rate) slice at a uniform random offset.
// Throws InvalidArgument when the input is shorter than the excerpt.
std::vector<float> Excerpt(std::span<const float> pcm, double seconds,
                           int sample_rate, Rng& rng,
                           std::size_t* offset = nullptr);

struct ClipFeatures {
  std::string clip_id;
  std::string track_id;
  std::vector<double> vector;
};

// Per-bin mean followed by per-bin population standard deviation.
std::vector<double> Summarize(const Eigen::MatrixXd& spectrogram);

// JSON Lines {clip_id, track_id, vector}. Reading checks that every vector
// is finite and that all vectors have the same length.
std::vector<ClipFeatures> ReadFeatureFile(const std::filesystem::path& path);
void WriteFeatureFile(const std::filesystem::path& path,
                      std::span<const ClipFeatures> clips);

}  // namespace mwe

#endif  // MWE_FEATURES_H_
