#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vattr/scorer.hpp"
#include "vattr/tensor.hpp"

namespace vattr {

// Layer sizes of the toy video classifier:
//   avgpool(p) -> conv3x3x3(conv1) -> relu -> avgpool(p) -> conv3x3x3(conv2) -> relu
//   -> global average pool -> linear(classes) -> softmax.
// Both convolutions are stride 1 with one voxel of zero padding; pools are
// spatial only. The second ReLU output is the Grad-CAM tap.
struct ToyArch {
  Shape3 input{16, 64, 64};
  std::size_t channels = 1;
  std::size_t classes = 4;
  std::size_t conv1 = 8;
  std::size_t conv2 = 16;
  std::size_t pool = 2;
  double input_offset = 0.5;  // subtracted from every input value first

  friend bool operator==(const ToyArch&, const ToyArch&) = default;
};

std::vector<double> softmax(std::span<const double> logits);

class ToyConv3dScorer final : public Scorer {
 public:
  // He-uniform initialization from the seed.
  ToyConv3dScorer(ToyArch arch, std::uint64_t seed);
  ToyConv3dScorer(ToyArch arch, std::vector<double> parameters);

  std::size_t num_classes() const override { return arch_.classes; }
  Shape3 input_shape() const override { return arch_.input; }
  std::size_t input_channels() const override { return arch_.channels; }

  std::vector<double> score(const VideoTensor& x) const override;
  ScoreGrad score_and_gradient(const VideoTensor& x, std::size_t c) const override;

  bool has_activation_tap() const override { return true; }
  ActivationTap activation_tap(const VideoTensor& x, std::size_t c) const override;

  std::vector<double> logits(const VideoTensor& x) const;

  // Cross-entropy loss for one labeled sample; accumulates the parameter
  // gradient into `grad` (same layout as parameters()).
  double loss_and_gradient(const VideoTensor& x, std::size_t label, std::span<double> grad) const;

  const ToyArch& arch() const { return arch_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }
  static std::size_t parameter_count(const ToyArch& arch);

 private:
  struct Cache;
  struct Backward;
  Cache forward(const VideoTensor& x) const;
  // Backpropagates d loss / d logits; fills whichever outputs are requested.
  void backward(const Cache& cache, std::span<const double> dlogits, Backward& out) const;

  ToyArch arch_;
  std::vector<double> params_;
};

struct LabeledVideo {
  const VideoTensor* video;
  std::size_t label;
};

enum class ToyOptimizer { sgd, adam };

struct ToyTrainConfig {
  std::size_t epochs = 30;
  double lr = 0.005;
  double momentum = 0.9;  // SGD momentum, or Adam's first-moment decay
  ToyOptimizer optimizer = ToyOptimizer::adam;
  std::size_t batch_size = 2;
  std::uint64_t seed = 0;
};

struct ToyTrainResult {
  ToyConv3dScorer model;
  double train_accuracy = 0.0;
  std::vector<double> epoch_loss;
};

// Minibatch Adam (or SGD with momentum) on cross-entropy. Deterministic for a seed.
ToyTrainResult train_toy(std::span<const LabeledVideo> dataset, const ToyArch& arch, const ToyTrainConfig& cfg);

double classification_accuracy(const Scorer& scorer, std::span<const LabeledVideo> dataset);

namespace layers {

// Channel-interleaved 3x3x3 convolution, stride 1, zero padding 1.
// weights: [out][3][3][3][in], bias: [out].
FeatureMap conv3_forward(const FeatureMap& in, std::span<const double> weights, std::span<const double> bias,
                         std::size_t out_channels);
// Any of grad_in / grad_w / grad_b may be empty to skip it; grad_w and grad_b
// are accumulated into.
void conv3_backward(const FeatureMap& in, std::span<const double> weights, const FeatureMap& grad_out,
                    FeatureMap* grad_in, std::span<double> grad_w, std::span<double> grad_b);

FeatureMap avg_pool_spatial(const FeatureMap& in, std::size_t factor);
FeatureMap avg_pool_spatial_backward(const FeatureMap& grad_out, Shape3 in_shape, std::size_t factor);

namespace serial {
FeatureMap conv3_forward(const FeatureMap& in, std::span<const double> weights, std::span<const double> bias,
                         std::size_t out_channels);
void conv3_backward(const FeatureMap& in, std::span<const double> weights, const FeatureMap& grad_out,
                    FeatureMap* grad_in, std::span<double> grad_w, std::span<double> grad_b);
}  // namespace serial

}  // namespace layers

}  // namespace vattr
