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

#include "squiggles/model.h"

#include <zlib.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <numeric>

#include "bytes.h"
#include "squiggles/errors.h"
#include "squiggles/random.h"

namespace squiggles {
namespace {

using internal::GetFloat;
using internal::GetLE;
using internal::PutFloat;
using internal::PutLE;

constexpr char kCheckpointMagic[4] = {'S', 'Q', 'C', 'K'};
constexpr uint32_t kCheckpointVersion = 1;

struct Conv {
  int in_channels, out_channels, stride, in_size, out_size;
  size_t weight, bias;  // parameter offsets
  bool zero_init;
};

// Either a conv followed by ReLU, or a residual block of two convs.
struct Step {
  bool block;
  int first_conv;
};

struct Layout {
  std::vector<Conv> convs;
  std::vector<Step> steps;
  int final_channels = 0;
  int final_size = 0;
  size_t fc_weight = 0, fc_bias = 0;
  size_t total = 0;
};

int ConvOutputSize(int size, int stride) { return (size - 1) / stride + 1; }

Layout MakeLayout(const Architecture& a) {
  Layout layout;
  size_t offset = 0;
  int channels = 1, size = a.input_size;
  auto add_conv = [&](int out, int stride, bool zero) {
    Conv c{channels, out, stride, size, ConvOutputSize(size, stride), 0, 0, zero};
    c.weight = offset;
    offset += static_cast<size_t>(out) * 9 * channels;
    c.bias = offset;
    offset += out;
    layout.convs.push_back(c);
    channels = out;
    size = c.out_size;
    return static_cast<int>(layout.convs.size()) - 1;
  };
  layout.steps.push_back({false, add_conv(a.widths[0], a.stem_stride, false)});
  for (size_t s = 0; s < a.widths.size(); ++s) {
    if (s > 0) layout.steps.push_back({false, add_conv(a.widths[s], 2, false)});
    for (int b = 0; b < a.blocks_per_stage; ++b) {
      const int first = add_conv(channels, 1, false);
      add_conv(channels, 1, true);
      layout.steps.push_back({true, first});
    }
  }
  layout.final_channels = channels;
  layout.final_size = size;
  layout.fc_weight = offset;
  offset += channels;
  layout.fc_bias = offset;
  offset += 1;
  layout.total = offset;
  return layout;
}

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// Activations are channels x (batch * size * size); column (b, y, x) is
// (b * size + y) * size + x. Convolutions unroll one sample at a time: column
// (oy, ox) of the unrolled matrix holds the 3x3 neighbourhood, tap-major,
// zero outside the image.
template <typename Fn>
void ForEachTap(const Conv& c, Fn&& fn) {
  const int in = c.in_size, out = c.out_size;
  for (int oy = 0; oy < out; ++oy) {
    for (int ox = 0; ox < out; ++ox) {
      const size_t col = static_cast<size_t>(oy) * out + ox;
      for (int ky = 0; ky < 3; ++ky) {
        const int iy = oy * c.stride + ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int ix = ox * c.stride + kx - 1;
          const bool inside = iy >= 0 && iy < in && ix >= 0 && ix < in;
          fn(col * 9 + ky * 3 + kx, inside ? static_cast<size_t>(iy) * in + ix : 0, inside);
        }
      }
    }
  }
}

// `x` points at one sample's activations.
template <typename S>
void Im2Col(const S* x, const Conv& c, Mat<S>& cols) {
  const int ch = c.in_channels;
  cols.resize(9 * ch, static_cast<Eigen::Index>(c.out_size) * c.out_size);
  S* dst = cols.data();
  ForEachTap(c, [&](size_t tap, size_t pixel, bool inside) {
    if (inside) {
      std::copy_n(x + pixel * ch, ch, dst + tap * ch);
    } else {
      std::fill_n(dst + tap * ch, ch, S(0));
    }
  });
}

// Accumulates into one sample's activation gradient `dx`.
template <typename S>
void Col2Im(const Mat<S>& cols, const Conv& c, S* dx) {
  const int ch = c.in_channels;
  const S* src = cols.data();
  ForEachTap(c, [&](size_t tap, size_t pixel, bool inside) {
    if (!inside) return;
    const S* from = src + tap * ch;
    S* to = dx + pixel * ch;
    for (int k = 0; k < ch; ++k) to[k] += from[k];
  });
}

template <typename S>
class Network {
 public:
  Network(const Architecture& a, std::span<const S> params)
      : arch_(a), layout_(MakeLayout(a)), params_(params) {}

  // Returns logits and keeps the activations for Backward.
  std::vector<S> Forward(std::span<const S> images, int batch) {
    batch_ = batch;
    const int n = arch_.input_size;
    acts_.clear();
    acts_.emplace_back(Eigen::Map<const Mat<S>>(images.data(), 1,
                                                 static_cast<Eigen::Index>(batch) * n * n));
    for (const Step& step : layout_.steps) {
      if (!step.block) {
        acts_.push_back(ConvForward(acts_.back(), layout_.convs[step.first_conv]).cwiseMax(S(0)));
      } else {
        Mat<S> a = ConvForward(acts_.back(), layout_.convs[step.first_conv]).cwiseMax(S(0));
        Mat<S> out = (acts_.back() + ConvForward(a, layout_.convs[step.first_conv + 1]))
                         .cwiseMax(S(0));
        acts_.push_back(std::move(a));
        acts_.push_back(std::move(out));
      }
    }
    const Mat<S>& h = acts_.back();
    const int c = layout_.final_channels;
    const int area = layout_.final_size * layout_.final_size;
    pooled_.resize(c, batch);
    argmax_.assign(static_cast<size_t>(c) * batch, 0);
    for (int b = 0; b < batch; ++b) {
      const auto block = h.middleCols(static_cast<Eigen::Index>(b) * area, area);
      if (arch_.pooling == Pooling::kAverage) {
        pooled_.col(b) = block.rowwise().sum() / S(area);
      } else {
        for (int k = 0; k < c; ++k) {
          Eigen::Index at;
          pooled_(k, b) = block.row(k).maxCoeff(&at);
          argmax_[static_cast<size_t>(b) * c + k] = static_cast<int>(at);
        }
      }
    }
    Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>> w(params_.data() + layout_.fc_weight, c);
    const S bias = params_[layout_.fc_bias];
    std::vector<S> logits(batch);
    for (int b = 0; b < batch; ++b) logits[b] = w.dot(pooled_.col(b)) + bias;
    return logits;
  }

  void Backward(std::span<const S> dlogits, std::span<S> dparams, std::span<S> dinput) {
    const bool want_params = !dparams.empty();
    if (want_params) std::fill(dparams.begin(), dparams.end(), S(0));
    const int batch = batch_;
    const int c = layout_.final_channels;
    const int area = layout_.final_size * layout_.final_size;
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> w(params_.data() + layout_.fc_weight, c);
    Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>> dl(dlogits.data(), batch);
    if (want_params) {
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> dw(dparams.data() + layout_.fc_weight, c);
      dw = pooled_ * dl.transpose();
      dparams[layout_.fc_bias] = dl.sum();
    }
    const Mat<S> dpooled = w * dl;

    Mat<S> grad = Mat<S>::Zero(c, static_cast<Eigen::Index>(batch) * area);
    for (int b = 0; b < batch; ++b) {
      const Eigen::Index base = static_cast<Eigen::Index>(b) * area;
      for (int k = 0; k < c; ++k) {
        if (arch_.pooling == Pooling::kAverage) {
          grad.block(k, base, 1, area).setConstant(dpooled(k, b) / S(area));
        } else {
          grad(k, base + argmax_[static_cast<size_t>(b) * c + k]) = dpooled(k, b);
        }
      }
    }

    size_t act = acts_.size() - 1;
    for (auto step = layout_.steps.rbegin(); step != layout_.steps.rend(); ++step) {
      if (!step->block) {
        MaskInactive(acts_[act], grad);
        grad = ConvBackward(acts_[act - 1], grad, layout_.convs[step->first_conv], dparams);
        act -= 1;
      } else {
        const Mat<S>& out = acts_[act];
        const Mat<S>& a = acts_[act - 1];
        const Mat<S>& h = acts_[act - 2];
        MaskInactive(out, grad);
        Mat<S> da = ConvBackward(a, grad, layout_.convs[step->first_conv + 1], dparams);
        MaskInactive(a, da);
        grad += ConvBackward(h, da, layout_.convs[step->first_conv], dparams);
        act -= 2;
      }
    }
    if (!dinput.empty()) std::copy(grad.data(), grad.data() + grad.size(), dinput.begin());
  }

 private:
  // ReLU backward: zero the gradient wherever the output was clipped.
  static void MaskInactive(const Mat<S>& out, Mat<S>& grad) {
    S* g = grad.data();
    const S* o = out.data();
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      if (!(o[i] > S(0))) g[i] = S(0);
    }
  }

  Mat<S> ConvForward(const Mat<S>& x, const Conv& c) {
    Eigen::Map<const Mat<S>> w(params_.data() + c.weight, c.out_channels, 9 * c.in_channels);
    Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>> bias(params_.data() + c.bias,
                                                                c.out_channels);
    const Eigen::Index in_area = static_cast<Eigen::Index>(c.in_size) * c.in_size;
    const Eigen::Index out_area = static_cast<Eigen::Index>(c.out_size) * c.out_size;
    Mat<S> y(c.out_channels, batch_ * out_area);
    for (int b = 0; b < batch_; ++b) {
      Im2Col(x.data() + b * in_area * c.in_channels, c, cols_);
      y.middleCols(b * out_area, out_area).noalias() = w * cols_;
    }
    y.colwise() += bias;
    return y;
  }

  Mat<S> ConvBackward(const Mat<S>& x, const Mat<S>& dy, const Conv& c, std::span<S> dparams) {
    Eigen::Map<const Mat<S>> w(params_.data() + c.weight, c.out_channels, 9 * c.in_channels);
    const Eigen::Index in_area = static_cast<Eigen::Index>(c.in_size) * c.in_size;
    const Eigen::Index out_area = static_cast<Eigen::Index>(c.out_size) * c.out_size;
    const bool want_params = !dparams.empty();
    Mat<S> dx = Mat<S>::Zero(c.in_channels, batch_ * in_area);
    Mat<S> dw_sum;
    if (want_params) dw_sum.setZero(c.out_channels, 9 * c.in_channels);
    for (int b = 0; b < batch_; ++b) {
      const auto dy_b = dy.middleCols(b * out_area, out_area);
      if (want_params) {
        Im2Col(x.data() + b * in_area * c.in_channels, c, cols_);
        dw_sum.noalias() += dy_b * cols_.transpose();
      }
      dcols_.noalias() = w.transpose() * dy_b;
      Col2Im(dcols_, c, dx.data() + b * in_area * c.in_channels);
    }
    if (want_params) {
      Eigen::Map<Mat<S>> dw(dparams.data() + c.weight, c.out_channels, 9 * c.in_channels);
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>> db(dparams.data() + c.bias, c.out_channels);
      dw += dw_sum;
      db += dy.rowwise().sum();
    }
    return dx;
  }

  const Architecture& arch_;
  Layout layout_;
  std::span<const S> params_;
  int batch_ = 0;
  std::vector<Mat<S>> acts_;
  Mat<S> cols_;
  Mat<S> dcols_;
  Mat<S> pooled_;
  std::vector<int> argmax_;
};

template <typename S>
void CheckBatch(const Classifier<S>& model, size_t values, int batch) {
  if (batch <= 0 || values != static_cast<size_t>(batch) * model.pixel_count()) {
    throw Error(ErrorCode::kInvalidInput,
                "image batch does not match the model resolution " +
                    std::to_string(model.architecture().input_size));
  }
}

template <typename S>
S LogisticLoss(S logit, S target) {
  return std::max(logit, S(0)) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

}  // namespace

void Architecture::Validate() const {
  if (input_size < 1 || stem_stride < 1 || blocks_per_stage < 0 || widths.empty() ||
      std::any_of(widths.begin(), widths.end(), [](int w) { return w < 1; }) ||
      (pooling != Pooling::kAverage && pooling != Pooling::kMax)) {
    throw Error(ErrorCode::kInvalidConfig, "invalid classifier architecture");
  }
}

template <typename S>
Classifier<S>::Classifier(Architecture architecture)
    : architecture_(std::move(architecture)) {
  architecture_.Validate();
  parameters_.assign(MakeLayout(architecture_).total, S(0));
}

template <typename S>
Classifier<S> Classifier<S>::Initialized(Architecture architecture, uint64_t seed) {
  Classifier model(std::move(architecture));
  const Layout layout = MakeLayout(model.architecture_);
  RandomStream rng(seed, 0, StreamTag::kParameterInit);
  auto fill = [&](size_t offset, size_t count, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (size_t i = 0; i < count; ++i) {
      model.parameters_[offset + i] = static_cast<S>(rng.NextUniform(-bound, bound));
    }
  };
  for (const Conv& c : layout.convs) {
    const int fan_in = 9 * c.in_channels;
    if (!c.zero_init) fill(c.weight, static_cast<size_t>(c.out_channels) * fan_in, fan_in);
    fill(c.bias, c.out_channels, fan_in);
  }
  fill(layout.fc_weight, layout.final_channels + 1, layout.final_channels);
  return model;
}

template <typename S>
std::vector<S> Classifier<S>::Logits(std::span<const S> images, int batch) const {
  CheckBatch(*this, images.size(), batch);
  Network<S> net(architecture_, parameters_);
  return net.Forward(images, batch);
}

template <typename S>
std::vector<S> Classifier<S>::Predict(std::span<const S> images, int batch) const {
  std::vector<S> out = Logits(images, batch);
  for (S& v : out) v = static_cast<S>(Sigmoid(v));
  return out;
}

template <typename S>
S Classifier<S>::LossAndGradient(std::span<const S> images, std::span<const S> targets,
                                 int batch, std::span<S> parameter_gradient,
                                 std::span<S> input_gradient) const {
  CheckBatch(*this, images.size(), batch);
  if (targets.size() != static_cast<size_t>(batch) ||
      (!parameter_gradient.empty() && parameter_gradient.size() != parameters_.size()) ||
      (!input_gradient.empty() && input_gradient.size() != images.size())) {
    throw Error(ErrorCode::kInvalidInput, "gradient buffer size mismatch");
  }
  Network<S> net(architecture_, parameters_);
  const std::vector<S> logits = net.Forward(images, batch);
  S loss = 0;
  std::vector<S> dlogits(batch);
  for (int b = 0; b < batch; ++b) {
    loss += LogisticLoss(logits[b], targets[b]);
    dlogits[b] = static_cast<S>(Sigmoid(logits[b])) - targets[b];
  }
  if (!parameter_gradient.empty() || !input_gradient.empty()) {
    net.Backward(dlogits, parameter_gradient, input_gradient);
  }
  return loss;
}

template class Classifier<float>;
template class Classifier<double>;

double Sigmoid(double logit) {
  if (logit >= 0) return 1.0 / (1.0 + std::exp(-logit));
  const double e = std::exp(logit);
  return e / (1.0 + e);
}

void SaveCheckpoint(const Model& model, const std::filesystem::path& path) {
  const Architecture& a = model.architecture();
  std::vector<char> out(4 + 4 * 7 + 4 * a.widths.size() + 8 + 4 * model.parameter_count() + 4);
  char* p = out.data();
  std::memcpy(p, kCheckpointMagic, 4);
  p += 4;
  for (uint32_t v : {kCheckpointVersion, static_cast<uint32_t>(a.input_size),
                     static_cast<uint32_t>(a.stem_stride),
                     static_cast<uint32_t>(a.blocks_per_stage),
                     static_cast<uint32_t>(a.pooling),
                     static_cast<uint32_t>(a.widths.size())}) {
    PutLE<uint32_t>(p, v);
    p += 4;
  }
  for (int w : a.widths) {
    PutLE<uint32_t>(p, w);
    p += 4;
  }
  PutLE<uint64_t>(p, model.parameter_count());
  p += 8;
  for (float v : model.parameters()) {
    PutFloat(p, v);
    p += 4;
  }
  const size_t body = p - out.data();
  out.resize(body + 4);
  PutLE<uint32_t>(out.data() + body,
                  crc32(0L, reinterpret_cast<const Bytef*>(out.data()), body));
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file.write(out.data(), out.size());
  file.close();
  if (!file) throw Error(ErrorCode::kIo, path.string() + ": cannot write checkpoint");
}

Model LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIo, path.string() + ": cannot open checkpoint");
  const std::vector<char> in((std::istreambuf_iterator<char>(file)),
                             std::istreambuf_iterator<char>());
  auto corrupt = [&](const std::string& what) {
    return Error(ErrorCode::kCorruptFile, path.string() + ": " + what);
  };
  if (in.size() < 32 || std::memcmp(in.data(), kCheckpointMagic, 4) != 0) {
    throw corrupt("not a checkpoint");
  }
  const size_t body = in.size() - 4;
  if (crc32(0L, reinterpret_cast<const Bytef*>(in.data()), body) !=
      GetLE<uint32_t>(in.data() + body)) {
    throw corrupt("checksum mismatch");
  }
  const char* p = in.data() + 4;
  auto u32 = [&] {
    const uint32_t v = GetLE<uint32_t>(p);
    p += 4;
    return v;
  };
  if (u32() != kCheckpointVersion) throw corrupt("unsupported version");
  Architecture a;
  a.input_size = static_cast<int>(u32());
  a.stem_stride = static_cast<int>(u32());
  a.blocks_per_stage = static_cast<int>(u32());
  a.pooling = static_cast<Pooling>(u32());
  const uint32_t stages = u32();
  if (stages == 0 || stages > 64 || p + 4 * stages + 8 > in.data() + body) {
    throw corrupt("bad architecture");
  }
  a.widths.resize(stages);
  for (int& w : a.widths) w = static_cast<int>(u32());
  try {
    a.Validate();
  } catch (const Error&) {
    throw corrupt("bad architecture");
  }
  Model model(a);
  const uint64_t count = GetLE<uint64_t>(p);
  p += 8;
  if (count != model.parameter_count() ||
      static_cast<size_t>(in.data() + body - p) != 4 * count) {
    throw corrupt("parameter count mismatch");
  }
  for (float& v : model.parameters()) {
    v = GetFloat(p);
    p += 4;
  }
  return model;
}

void AddPixelNoise(uint64_t seed, uint64_t presentation, double sigma, bool clamp,
                   std::span<float> image) {
  if (sigma <= 0) return;
  RandomStream rng(seed, presentation, StreamTag::kTrainingNoise);
  for (float& v : image) {
    float x = static_cast<float>(v + sigma * rng.NextNormal());
    if (clamp) x = std::clamp(x, 0.0f, 1.0f);
    v = x;
  }
}

void TrainConfig::Validate() const {
  architecture.Validate();
  if (batch_size < 1 || steps < 1 || !(init_lr > 0) || !(noise_sigma >= 0) ||
      !(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1) || !(adam_epsilon > 0) ||
      log_every < 0) {
    throw Error(ErrorCode::kInvalidConfig, "invalid training configuration");
  }
}

double TrainConfig::LearningRate(int64_t step) const {
  return init_lr * 0.5 *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / steps));
}

namespace {

std::vector<uint32_t> EpochOrder(size_t size, uint64_t seed, uint64_t epoch) {
  std::vector<uint32_t> order(size);
  std::iota(order.begin(), order.end(), 0u);
  RandomStream rng(seed, epoch, StreamTag::kShuffle);
  for (size_t i = size - 1; i > 0; --i) {
    std::swap(order[i], order[rng.NextU64() % (i + 1)]);
  }
  return order;
}

}  // namespace

TrainResult Train(const TrainConfig& config, const Dataset& train, const Dataset* eval) {
  config.Validate();
  if (train.size() == 0) throw Error(ErrorCode::kEmptyInput, "empty training set");
  if (train.resolution() != config.architecture.input_size ||
      (eval != nullptr && eval->resolution() != config.architecture.input_size)) {
    throw Error(ErrorCode::kInvalidInput, "dataset resolution does not match the model");
  }
  const uint64_t presentations = static_cast<uint64_t>(config.steps) * config.batch_size;
  if (presentations > train.size() && !config.allow_epochs) {
    throw Error(ErrorCode::kInvalidConfig,
                "training needs " + std::to_string(presentations) + " samples but the set has " +
                    std::to_string(train.size()) + "; enable epochs to repeat samples");
  }

  TrainResult result{Model::Initialized(config.architecture, config.seed), {}};
  Model& model = result.model;
  const size_t count = model.parameter_count();
  const int pixels = model.pixel_count();
  const int batch = config.batch_size;
  std::vector<float> m(count, 0.0f), v(count, 0.0f), grad(count);
  std::vector<float> images(static_cast<size_t>(batch) * pixels), targets(batch);
  std::vector<uint32_t> order;
  uint64_t order_epoch = std::numeric_limits<uint64_t>::max();

  for (int64_t step = 0; step < config.steps; ++step) {
    for (int k = 0; k < batch; ++k) {
      const uint64_t p = static_cast<uint64_t>(step) * batch + k;
      const uint64_t epoch = p / train.size();
      if (epoch != order_epoch) {
        order = EpochOrder(train.size(), config.seed, epoch);
        order_epoch = epoch;
      }
      const size_t index = order[p % train.size()];
      float* image = images.data() + static_cast<size_t>(k) * pixels;
      train.FillImage(index, image);
      AddPixelNoise(config.seed, p, config.noise_sigma, config.clamp_noisy,
                    std::span<float>(image, pixels));
      targets[k] = static_cast<float>(LabelValue(train.label(index)));
    }
    const double loss =
        model.LossAndGradient(images, targets, batch, grad, {}) / static_cast<double>(batch);

    const double lr = config.LearningRate(step);
    const double t = static_cast<double>(step + 1);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    const float b1 = static_cast<float>(config.beta1), b2 = static_cast<float>(config.beta2);
    const float scale = 1.0f / static_cast<float>(batch);
    auto params = model.parameters();
    for (size_t i = 0; i < count; ++i) {
      const float g = grad[i] * scale;
      m[i] = b1 * m[i] + (1.0f - b1) * g;
      v[i] = b2 * v[i] + (1.0f - b2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      params[i] -= static_cast<float>(lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon));
    }

    const bool periodic = config.log_every > 0 && step % config.log_every == 0;
    if (periodic || step + 1 == config.steps) {
      MetricRow row{step, lr, loss, std::numeric_limits<double>::quiet_NaN()};
      if (eval != nullptr) row.accuracy = Evaluate(model, *eval).accuracy;
      result.history.push_back(row);
    }
  }
  return result;
}

void WriteMetricsCsv(const std::vector<MetricRow>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  out.precision(17);
  out << "step,lr,loss,acc\n";
  for (const MetricRow& r : history) {
    out << r.step << ',' << r.lr << ',' << r.loss << ',';
    if (!std::isnan(r.accuracy)) out << r.accuracy;
    out << '\n';
  }
  out.close();
  if (!out) throw Error(ErrorCode::kIo, path.string() + ": cannot write metrics");
}

double RocAuc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidInput, "scores and labels differ in length");
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  size_t positives = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j + 1);  // 1-based
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] != 0) {
        positive_rank_sum += midrank;
        ++positives;
      }
    }
    i = j;
  }
  const size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::kUndefined, "roc-auc needs both classes");
  }
  const double np = static_cast<double>(positives);
  return (positive_rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(negatives));
}

std::vector<double> PredictDataset(const Model& model, const Dataset& data, int batch) {
  if (data.resolution() != model.architecture().input_size) {
    throw Error(ErrorCode::kInvalidInput, "dataset resolution does not match the model");
  }
  const int pixels = model.pixel_count();
  std::vector<double> out(data.size());
  std::vector<float> images;
  for (size_t start = 0; start < data.size(); start += batch) {
    const int b = static_cast<int>(std::min<size_t>(batch, data.size() - start));
    images.resize(static_cast<size_t>(b) * pixels);
    for (int k = 0; k < b; ++k) {
      data.FillImage(start + k, images.data() + static_cast<size_t>(k) * pixels);
    }
    const std::vector<float> logits = model.Logits(images, b);
    for (int k = 0; k < b; ++k) out[start + k] = Sigmoid(logits[k]);
  }
  return out;
}

Evaluation Evaluate(const Model& model, const Dataset& data, int batch) {
  if (data.size() == 0) throw Error(ErrorCode::kEmptyInput, "empty evaluation set");
  const std::vector<double> scores = PredictDataset(model, data, batch);
  std::vector<int> labels(data.size());
  size_t correct = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    labels[i] = LabelValue(data.label(i));
    correct += (scores[i] >= 0.5 ? 1 : 0) == labels[i];
  }
  return {static_cast<double>(correct) / data.size(), RocAuc(scores, labels)};
}

}  // namespace squiggles
