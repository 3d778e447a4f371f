#include "vattr/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vattr/error.hpp"

namespace vattr {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Scorer::probability(const VideoTensor& x, std::size_t c) const {
  check_class(c);
  return score(x)[c];
}

ActivationTap Scorer::activation_tap(const VideoTensor&, std::size_t) const {
  throw UnsupportedError("scorer exposes no activation tap");
}

void Scorer::check_input(const VideoTensor& x) const {
  if (!(x.frame_shape() == input_shape()) || x.channels() != input_channels()) {
    const Shape3 s = input_shape();
    throw ContractError("scorer expects input " + std::to_string(s.t) + "x" + std::to_string(s.h) + "x" +
                        std::to_string(s.w) + "x" + std::to_string(input_channels()) + ", got " +
                        std::to_string(x.frames()) + "x" + std::to_string(x.height()) + "x" +
                        std::to_string(x.width()) + "x" + std::to_string(x.channels()));
  }
}

void Scorer::check_class(std::size_t c) const {
  if (c >= num_classes()) {
    throw ParameterError("class index " + std::to_string(c) + " out of range [0, " +
                         std::to_string(num_classes()) + ")");
  }
}

OracleTubeScorer::OracleTubeScorer(Shape3 frame_shape, std::size_t channels, BoxTrack tube,
                                   double temperature)
    : shape_(frame_shape), channels_(channels), tube_(std::move(tube)), temperature_(temperature) {
  if (!(temperature > 0.0)) throw ParameterError("OracleTubeScorer: temperature must be > 0");
  if (tube_.size() != shape_.t) throw ContractError("OracleTubeScorer: need one tube entry per frame");
  for (auto& box : tube_) {
    if (!box) continue;
    box->i0 = std::max(0L, box->i0);
    box->j0 = std::max(0L, box->j0);
    box->i1 = std::min(static_cast<long>(shape_.h) - 1, box->i1);
    box->j1 = std::min(static_cast<long>(shape_.w) - 1, box->j1);
    if (box->i1 < box->i0 || box->j1 < box->j0) {
      box.reset();
      continue;
    }
    tube_elements_ += static_cast<std::size_t>(box->area()) * channels_;
  }
  if (tube_elements_ == 0) throw ParameterError("OracleTubeScorer: tube is empty");
}

double OracleTubeScorer::tube_mean(const VideoTensor& x) const {
  double sum = 0.0;
  for (std::size_t t = 0; t < shape_.t; ++t) {
    if (!tube_[t]) continue;
    const Box& b = *tube_[t];
    for (long i = b.i0; i <= b.i1; ++i)
      for (long j = b.j0; j <= b.j1; ++j)
        for (std::size_t c = 0; c < channels_; ++c) sum += x(t, i, j, c);
  }
  return sum / static_cast<double>(tube_elements_);
}

std::vector<double> OracleTubeScorer::score(const VideoTensor& x) const {
  check_input(x);
  const double p1 = logistic((tube_mean(x) - 0.5) / temperature_);
  return {1.0 - p1, p1};
}

ScoreGrad OracleTubeScorer::score_and_gradient(const VideoTensor& x, std::size_t c) const {
  check_class(c);
  ScoreGrad out{score(x), VideoTensor(x.frame_shape(), x.channels(), 0.0)};
  const double p1 = out.probs[1];
  double g = p1 * (1.0 - p1) / (temperature_ * static_cast<double>(tube_elements_));
  if (c == 0) g = -g;
  for (std::size_t t = 0; t < shape_.t; ++t) {
    if (!tube_[t]) continue;
    const Box& b = *tube_[t];
    for (long i = b.i0; i <= b.i1; ++i)
      for (long j = b.j0; j <= b.j1; ++j)
        for (std::size_t ch = 0; ch < channels_; ++ch) out.gradient(t, i, j, ch) = g;
  }
  return out;
}

Volume OracleTubeScorer::tube_indicator() const {
  Volume v(shape_, 0.0);
  for (std::size_t t = 0; t < shape_.t; ++t) {
    if (!tube_[t]) continue;
    const Box& b = *tube_[t];
    for (long i = b.i0; i <= b.i1; ++i)
      for (long j = b.j0; j <= b.j1; ++j) v(t, i, j) = 1.0;
  }
  return v;
}

ConstantScorer::ConstantScorer(Shape3 frame_shape, std::size_t channels, std::vector<double> probs)
    : shape_(frame_shape), channels_(channels), probs_(std::move(probs)) {
  if (probs_.empty()) throw ParameterError("ConstantScorer: need at least one class");
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("ConstantScorer: probabilities must sum to 1");
  for (double p : probs_)
    if (p < 0.0 || p > 1.0) throw ParameterError("ConstantScorer: probabilities must lie in [0,1]");
}

std::vector<double> ConstantScorer::score(const VideoTensor& x) const {
  check_input(x);
  return probs_;
}

ScoreGrad ConstantScorer::score_and_gradient(const VideoTensor& x, std::size_t c) const {
  check_class(c);
  return {score(x), VideoTensor(x.frame_shape(), x.channels(), 0.0)};
}

}  // namespace vattr
