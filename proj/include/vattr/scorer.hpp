#pragma once

#include <cstddef>
#include <vector>

#include "vattr/tensor.hpp"

namespace vattr {

struct ScoreGrad {
  std::vector<double> probs;
  VideoTensor gradient;  // d probs[c] / d x
};

// Activation of the designated internal layer together with the gradient of
// the target probability with respect to it.
struct ActivationTap {
  FeatureMap activation;
  FeatureMap gradient;
};

// Differentiable video classifier returning softmax-style probabilities.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual std::size_t num_classes() const = 0;
  virtual Shape3 input_shape() const = 0;
  virtual std::size_t input_channels() const = 0;

  virtual std::vector<double> score(const VideoTensor& x) const = 0;
  virtual ScoreGrad score_and_gradient(const VideoTensor& x, std::size_t c) const = 0;

  VideoTensor input_gradient(const VideoTensor& x, std::size_t c) const {
    return score_and_gradient(x, c).gradient;
  }
  double probability(const VideoTensor& x, std::size_t c) const;

  virtual bool has_activation_tap() const { return false; }
  // Throws UnsupportedError unless has_activation_tap().
  virtual ActivationTap activation_tap(const VideoTensor& x, std::size_t c) const;

 protected:
  void check_input(const VideoTensor& x) const;
  void check_class(std::size_t c) const;
};

double logistic(double z);

// Two-class analytic scorer whose evidence is the mean intensity inside a
// per-frame box tube:
//   P(1) = logistic((mean_tube(x) - 0.5) / temperature),  P(0) = 1 - P(1).
// Its input gradient is supported exactly on the tube.
class OracleTubeScorer final : public Scorer {
 public:
  OracleTubeScorer(Shape3 frame_shape, std::size_t channels, BoxTrack tube, double temperature);

  std::size_t num_classes() const override { return 2; }
  Shape3 input_shape() const override { return shape_; }
  std::size_t input_channels() const override { return channels_; }

  std::vector<double> score(const VideoTensor& x) const override;
  ScoreGrad score_and_gradient(const VideoTensor& x, std::size_t c) const override;

  const BoxTrack& tube() const { return tube_; }
  double temperature() const { return temperature_; }
  // Number of (pixel, channel) elements inside the tube.
  std::size_t tube_elements() const { return tube_elements_; }
  // Binary T x H x W indicator of the tube.
  Volume tube_indicator() const;

 private:
  double tube_mean(const VideoTensor& x) const;

  Shape3 shape_;
  std::size_t channels_;
  BoxTrack tube_;
  double temperature_;
  std::size_t tube_elements_ = 0;
};

// Fixed output regardless of input; zero gradient. Used as a metric stub.
class ConstantScorer final : public Scorer {
 public:
  ConstantScorer(Shape3 frame_shape, std::size_t channels, std::vector<double> probs);

  std::size_t num_classes() const override { return probs_.size(); }
  Shape3 input_shape() const override { return shape_; }
  std::size_t input_channels() const override { return channels_; }

  std::vector<double> score(const VideoTensor& x) const override;
  ScoreGrad score_and_gradient(const VideoTensor& x, std::size_t c) const override;

 private:
  Shape3 shape_;
  std::size_t channels_;
  std::vector<double> probs_;
};

}  // namespace vattr
