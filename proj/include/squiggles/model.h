/* Copyright 2026 The Squiggles Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Small residual CNN for binary image classification, with hand-written
// backpropagation, Adam with cosine decay, and evaluation metrics.
//
// Layout: stem conv (3x3, stride `stem_stride`) + ReLU, then one stage per
// entry of `widths`. Stages after the first open with a stride-2 3x3 conv +
// ReLU. Each stage holds `blocks_per_stage` residual blocks
// h <- relu(h + conv(relu(conv(h)))). A global pool and a linear layer give a
// single logit; the prediction is its logistic.
//
// Checkpoint format (little-endian):
//   char[4] "SQCK", u32 version = 1,
//   u32 input_size, u32 stem_stride, u32 blocks_per_stage, u32 pooling,
//   u32 stage count, u32 widths[stage count],
//   u64 parameter count, f32 parameters[count], u32 CRC-32 of all prior bytes.

#ifndef SQUIGGLES_MODEL_H_
#define SQUIGGLES_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "squiggles/datastore.h"
#include "squiggles/raster.h"

namespace squiggles {

enum class Pooling : uint32_t { kAverage = 0, kMax = 1 };

struct Architecture {
  int input_size = kDefaultResolution;
  int stem_stride = 2;
  std::vector<int> widths = {16, 32, 64};
  int blocks_per_stage = 1;
  Pooling pooling = Pooling::kMax;

  // Throws kInvalidConfig.
  void Validate() const;
  bool operator==(const Architecture&) const = default;
};

template <typename S>
class Classifier {
 public:
  // All parameters zero.
  explicit Classifier(Architecture architecture);

  // Uniform(+-1/sqrt(fan_in)) weights and biases, except that the second
  // conv of every residual block and the output layer start at zero.
  static Classifier Initialized(Architecture architecture, uint64_t seed);

  const Architecture& architecture() const { return architecture_; }
  size_t parameter_count() const { return parameters_.size(); }
  std::span<const S> parameters() const { return parameters_; }
  std::span<S> parameters() { return parameters_; }
  int pixel_count() const { return architecture_.input_size * architecture_.input_size; }

  // `images` holds `batch` images in Image storage order.
  std::vector<S> Logits(std::span<const S> images, int batch) const;
  std::vector<S> Predict(std::span<const S> images, int batch) const;

  // Sum over the batch of binary cross-entropy against `targets` in [0, 1].
  // Gradients of that sum are written to the non-empty output spans
  // (parameter_count() and batch * pixel_count() entries).
  S LossAndGradient(std::span<const S> images, std::span<const S> targets,
                    int batch, std::span<S> parameter_gradient,
                    std::span<S> input_gradient) const;

  template <typename T>
  Classifier<T> Cast() const {
    Classifier<T> out(architecture_);
    for (size_t i = 0; i < parameters_.size(); ++i) {
      out.parameters()[i] = static_cast<T>(parameters_[i]);
    }
    return out;
  }

  bool operator==(const Classifier&) const = default;

 private:
  Architecture architecture_;
  std::vector<S> parameters_;
};

extern template class Classifier<float>;
extern template class Classifier<double>;

using Model = Classifier<float>;

void SaveCheckpoint(const Model& model, const std::filesystem::path& path);
// Throws kCorruptFile or kIo.
Model LoadCheckpoint(const std::filesystem::path& path);

double Sigmoid(double logit);

// Adds i.i.d. N(0, sigma^2) noise keyed by (seed, presentation).
void AddPixelNoise(uint64_t seed, uint64_t presentation, double sigma,
                   bool clamp, std::span<float> image);

struct TrainConfig {
  Architecture architecture;
  int batch_size = 512;
  int64_t steps = 1000;
  double init_lr = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double noise_sigma = 0.0;
  bool clamp_noisy = false;
  // Without this, training that needs more than one pass over the data is a
  // configuration error.
  bool allow_epochs = false;
  // A metrics row (with held-out accuracy when an eval set is given) is
  // recorded every this many steps and after the last one; 0 keeps only the
  // last.
  int64_t log_every = 100;
  uint64_t seed = 0;

  void Validate() const;
  double LearningRate(int64_t step) const;
};

struct MetricRow {
  int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  // NaN without an evaluation set.
  double accuracy = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<MetricRow> history;
};

// Throws kEmptyInput on an empty training set.
TrainResult Train(const TrainConfig& config, const Dataset& train,
                  const Dataset* eval = nullptr);

void WriteMetricsCsv(const std::vector<MetricRow>& history,
                     const std::filesystem::path& path);

struct Evaluation {
  double accuracy = 0.0;
  double roc_auc = 0.0;
};

// Mann-Whitney statistic with midranks. Throws kUndefined unless both
// classes are present.
double RocAuc(std::span<const double> scores, std::span<const int> labels);

std::vector<double> PredictDataset(const Model& model, const Dataset& data,
                                   int batch = 256);
Evaluation Evaluate(const Model& model, const Dataset& data, int batch = 256);

}  // namespace squiggles

#endif  // SQUIGGLES_MODEL_H_
