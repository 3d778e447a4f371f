#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace vattr {

struct Shape3 {
  std::size_t t = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t count() const { return t * h * w; }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

struct Stride3 {
  std::size_t t = 1;
  std::size_t h = 1;
  std::size_t w = 1;
};

// Dense T x H x W array of doubles, row-major. Used for masks, attribution
// maps, heatmaps and convolution outputs.
class Volume {
 public:
  Volume() = default;
  explicit Volume(Shape3 shape, double fill = 0.0);
  Volume(Shape3 shape, std::vector<double> values);

  const Shape3& shape() const { return shape_; }
  std::size_t frames() const { return shape_.t; }
  std::size_t height() const { return shape_.h; }
  std::size_t width() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(std::size_t t, std::size_t i, std::size_t j) const {
    return (t * shape_.h + i) * shape_.w + j;
  }
  double& operator()(std::size_t t, std::size_t i, std::size_t j) { return data_[index(t, i, j)]; }
  double operator()(std::size_t t, std::size_t i, std::size_t j) const { return data_[index(t, i, j)]; }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> frame(std::size_t t) { return values().subspan(t * shape_.h * shape_.w, shape_.h * shape_.w); }
  std::span<const double> frame(std::size_t t) const {
    return values().subspan(t * shape_.h * shape_.w, shape_.h * shape_.w);
  }

  double min() const;
  double max() const;
  double sum() const;

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  Shape3 shape_;
  std::vector<double> data_;
};

using MaskSequence = Volume;

// Non-negative 3D kernel, T_K x H_K x W_K.
class Kernel3D {
 public:
  explicit Kernel3D(Volume weights);

  const Volume& weights() const { return weights_; }
  const Shape3& shape() const { return weights_.shape(); }

 private:
  Volume weights_;
};

// T x H x W x C frame sequence with C in {1, 3}; channels are innermost.
class VideoTensor {
 public:
  VideoTensor() = default;
  VideoTensor(Shape3 frames, std::size_t channels, double fill = 0.0);
  VideoTensor(Shape3 frames, std::size_t channels, std::vector<double> values);

  const Shape3& frame_shape() const { return shape_; }
  std::size_t frames() const { return shape_.t; }
  std::size_t height() const { return shape_.h; }
  std::size_t width() const { return shape_.w; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(std::size_t t, std::size_t i, std::size_t j, std::size_t c) const {
    return ((t * shape_.h + i) * shape_.w + j) * channels_ + c;
  }
  double& operator()(std::size_t t, std::size_t i, std::size_t j, std::size_t c = 0) {
    return data_[index(t, i, j, c)];
  }
  double operator()(std::size_t t, std::size_t i, std::size_t j, std::size_t c = 0) const {
    return data_[index(t, i, j, c)];
  }
  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double min() const;
  double max() const;
  bool all_finite() const;

  friend bool operator==(const VideoTensor&, const VideoTensor&) = default;

 private:
  Shape3 shape_;
  std::size_t channels_ = 1;
  std::vector<double> data_;
};

// Inclusive pixel rectangle [i0, i1] x [j0, j1] (rows x columns).
struct Box {
  long i0 = 0;
  long j0 = 0;
  long i1 = 0;
  long j1 = 0;

  long area() const { return (i1 - i0 + 1) * (j1 - j0 + 1); }
  bool contains(long i, long j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
  friend bool operator==(const Box&, const Box&) = default;
};

// One optional box per frame.
using BoxTrack = std::vector<std::optional<Box>>;

// Channel-interleaved feature map used for scorer activation taps.
struct FeatureMap {
  Shape3 shape;
  std::size_t channels = 0;
  std::vector<double> values;

  double& at(std::size_t t, std::size_t i, std::size_t j, std::size_t k) {
    return values[((t * shape.h + i) * shape.w + j) * channels + k];
  }
  double at(std::size_t t, std::size_t i, std::size_t j, std::size_t k) const {
    return values[((t * shape.h + i) * shape.w + j) * channels + k];
  }
};

// Rescale to [0,1] by global min/max. A constant input maps to all zeros.
Volume minmax_normalize(const Volume& v);

// Elementwise clamp to [lo, hi].
void clamp_inplace(Volume& v, double lo = 0.0, double hi = 1.0);

}  // namespace vattr
