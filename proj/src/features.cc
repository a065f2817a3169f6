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

#include "mwe/features.h"

#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "json.hpp"
#include "mwe/errors.h"

namespace mwe {
namespace {

// The FFTW planner is not thread-safe; execution with distinct buffers is.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(PlannerMutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  // Writes |X_k|^2 for k in [0, n/2].
  void PowerSpectrum(Eigen::Ref<Eigen::VectorXd> power) {
    fftw_execute(plan_);
    for (int k = 0; k <= n_ / 2; ++k) {
      power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

}  // namespace

void MelConfig::Validate() const {
  if (sample_rate <= 0) throw InvalidArgument("mel.sample_rate must be > 0");
  if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0) {
    throw InvalidArgument("mel.fft_size must be a power of two");
  }
  if (hop < 1 || hop > fft_size) {
    throw InvalidArgument("mel.hop must be in [1, fft_size]");
  }
  if (mel_bins < 1) throw InvalidArgument("mel.mel_bins must be >= 1");
  if (!(log_floor > 0.0)) throw InvalidArgument("mel.log_floor must be > 0");
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank::MelFilterbank(const MelConfig& config) : config_(config) {
  config_.Validate();
  const int bins = config_.mel_bins;
  const int fft_bins = config_.fft_size / 2 + 1;
  const double top = HzToMel(config_.sample_rate / 2.0);

  std::vector<double> edges(bins + 2);
  for (int i = 0; i < bins + 2; ++i) {
    edges[i] = MelToHz(top * i / (bins + 1));
  }
  centers_.assign(edges.begin() + 1, edges.end() - 1);

  weights_ = Eigen::MatrixXd::Zero(bins, fft_bins);
  for (int m = 0; m < bins; ++m) {
    const double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < fft_bins; ++k) {
      const double f = bin_frequency(k);
      const double rise = (f - lo) / (center - lo);
      const double fall = (hi - f) / (hi - center);
      weights_(m, k) = std::max(0.0, std::min(rise, fall));
    }
  }
}

double MelFilterbank::bin_frequency(std::size_t k) const {
  return static_cast<double>(k) * config_.sample_rate / config_.fft_size;
}

std::size_t FrameCount(std::size_t num_samples, const MelConfig& config) {
  const auto n = static_cast<std::size_t>(config.fft_size);
  if (num_samples < n) return 0;
  return 1 + (num_samples - n) / static_cast<std::size_t>(config.hop);
}

Eigen::MatrixXd LogMelSpectrogram(std::span<const float> pcm,
                                  const MelConfig& config) {
  config.Validate();
  const std::size_t frames = FrameCount(pcm.size(), config);
  if (frames == 0) {
    throw InvalidArgument("audio has " + std::to_string(pcm.size()) +
                          " samples, need at least " +
                          std::to_string(config.fft_size));
  }
  for (float s : pcm) {
    if (!std::isfinite(s)) throw InvalidArgument("non-finite audio sample");
  }

  const int n = config.fft_size;
  std::vector<double> window(n);
  for (int i = 0; i < n; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }

  const MelFilterbank bank(config);
  Eigen::MatrixXd power(n / 2 + 1, frames);
  RealFft fft(n);
  for (std::size_t t = 0; t < frames; ++t) {
    const float* frame = pcm.data() + t * config.hop;
    double* in = fft.input();
    for (int i = 0; i < n; ++i) in[i] = window[i] * frame[i];
    fft.PowerSpectrum(power.col(t));
  }
  Eigen::MatrixXd mel = (bank.weights() * power).transpose();
  // std::log rather than Eigen's vectorized log, which is not correctly
  // rounded: silence must map to exactly ln(log_floor).
  return mel.unaryExpr([&](double m) { return std::log(m + config.log_floor); });
}

std::vector<float> Excerpt(std::span<const float> pcm, double seconds,
                           int sample_rate, Rng& rng, std::size_t* offset) {
  if (!(seconds > 0.0) || sample_rate <= 0) {
    throw InvalidArgument("excerpt length must be positive");
  }
  const auto length =
      static_cast<std::size_t>(std::floor(seconds * sample_rate));
  if (pcm.size() < length) {
    throw InvalidArgument("track has " + std::to_string(pcm.size()) +
                          " samples, shorter than the " +
                          std::to_string(length) + "-sample excerpt");
  }
  const std::size_t start = UniformIndex<std::size_t>(rng, pcm.size() - length + 1);
  if (offset) *offset = start;
  return {pcm.begin() + start, pcm.begin() + start + length};
}

std::vector<double> Summarize(const Eigen::MatrixXd& spectrogram) {
  const auto frames = spectrogram.rows();
  const auto bins = spectrogram.cols();
  if (frames == 0) throw InvalidArgument("cannot summarize an empty spectrogram");
  std::vector<double> out(2 * bins);
  for (Eigen::Index b = 0; b < bins; ++b) {
    const auto col = spectrogram.col(b);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().mean();
    out[b] = mean;
    out[bins + b] = std::sqrt(var);
  }
  return out;
}

std::vector<ClipFeatures> ReadFeatureFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read feature file " + path.string());
  std::vector<ClipFeatures> clips;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ClipFeatures clip;
    try {
      const auto j = nlohmann::json::parse(line);
      clip.clip_id = j.at("clip_id").get<std::string>();
      clip.track_id = j.at("track_id").get<std::string>();
      clip.vector = j.at("vector").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    if (clip.vector.empty()) {
      throw ParseError(path.string(), line_no, "empty feature vector");
    }
    for (double v : clip.vector) {
      if (!std::isfinite(v)) {
        throw ParseError(path.string(), line_no, "non-finite feature value");
      }
    }
    if (!clips.empty() && clips.front().vector.size() != clip.vector.size()) {
      throw ParseError(path.string(), line_no,
                       "feature length " + std::to_string(clip.vector.size()) +
                           " differs from " +
                           std::to_string(clips.front().vector.size()));
    }
    clips.push_back(std::move(clip));
  }
  return clips;
}

void WriteFeatureFile(const std::filesystem::path& path,
                      std::span<const ClipFeatures> clips) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const ClipFeatures& clip : clips) {
    nlohmann::json j;
    j["clip_id"] = clip.clip_id;
    j["track_id"] = clip.track_id;
    j["vector"] = clip.vector;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mwe
